"""Exact frequency response of the detuned cavity, no bandwidth limit.

Assembles the full linear-response system for signal frequencies of the
order of (or beyond) the cavity bandwidth: the three radiation-pressure
force channels, the output phase-quadrature transfer, the equivalent
input noise spectrum, and the location and depth of the dual sensitivity
dips that a detuned finite-bandwidth cavity develops.

The transfer coefficients are assembled from the hand-eliminated closed
form (the mirror coordinate is folded in through the effective
susceptibility). A redundant per-frequency linear solve over the
intracavity quadratures is kept as an independent validation oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    NORMALIZED,
    Constants,
    MechanicalOscillator,
    OpticalCavity,
    WorkingPoint,
    kappa_for_coupling,
    loop_denominator,
    mech_susceptibility,
)
from .errors import NoDipFoundError, SingularPointError
from .quasistatic import COHERENT, InputNoiseModel, sql_frequency

DEFAULT_GRID_DECADES = (1e-2, 1e3)
DEFAULT_POINTS_PER_DECADE = 400

# Fig-4-style runs model an essentially free mirror; a small but nonzero
# resonance frequency and damping regularize the static response and the
# spring pole without visible effect on the spectra.
FREE_MASS_RESONANCE_RATIO = 1e-4
FREE_MASS_DAMPING_RATIO = 1e-6


@dataclass(frozen=True)
class ForceTransfer:
    """Radiation-pressure force per unit input quadrature / displacement.

    ``f_p``/``f_q`` multiply the incident amplitude and phase
    fluctuations; ``f_m``/``f_sig`` multiply the mirror displacement and
    the signal. The latter two are identical for all parameters (both
    act through the same intensity slope) and vanish on resonance.
    """

    f_p: complex
    f_q: complex
    f_m: complex
    f_sig: complex


@dataclass(frozen=True)
class FullTransfer:
    """Exact output phase-quadrature coefficients.

    ``q_out = c_q * q_in + c_p * p_in + c_sig * X_sig``; reduces to the
    quasi-static transfer as omega * round_trip -> 0.
    """

    c_q: complex
    c_p: complex
    c_sig: complex


@dataclass(frozen=True)
class NoiseSpectrum:
    """Equivalent-input noise on a frequency grid, with its SQL curve."""

    omega: np.ndarray
    s_sig: np.ndarray
    s_sql: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def ratio(self) -> np.ndarray:
        return self.s_sig / self.s_sql


@dataclass(frozen=True)
class DipReport:
    """Positions and depths of the sensitivity dips of one spectrum.

    Depths are referenced to the SQL level at the balance frequency
    ``omega_sql``; ``ratio_local_*`` compare against the SQL at the dip
    itself. Predicted values are the large-detuning asymptotics: the
    spring dip at omega_sql * sqrt(detuning / 2 gamma) (positive detuning
    only), the optical dip at the loop resonance
    bandwidth * sqrt(1 + (detuning/gamma)^2), and a common depth
    2 (gamma / detuning)^2.
    """

    omega_sql: float
    count: int
    omega_minus: float | None
    omega_plus: float | None
    depth_minus: float | None
    depth_plus: float | None
    ratio_local_minus: float | None
    ratio_local_plus: float | None
    below_sql_plus: bool | None
    predicted_omega_minus: float | None
    predicted_omega_plus: float
    predicted_depth: float


def quasi_free_oscillator(
    omega_sql: float,
    mass: float = 1.0,
    resonance_ratio: float = FREE_MASS_RESONANCE_RATIO,
    damping_ratio: float = FREE_MASS_DAMPING_RATIO,
) -> MechanicalOscillator:
    """Oscillator that behaves as a free mass over a spectrum grid.

    Resonance and damping sit far below the balance frequency, so the
    response is -1/(M omega^2) everywhere the spectrum is evaluated while
    both the static response and the spring pole stay regular.
    """
    return MechanicalOscillator(
        mass=mass,
        resonance_freq=resonance_ratio * omega_sql,
        damping=damping_ratio * omega_sql,
    )


def airy_slope(cavity: OpticalCavity, detuning: float, a_bar: float) -> float:
    """Slope of the intracavity intensity versus cavity length.

    On the side of the resonance fringe, a length change converts into an
    intensity change, hence into a radiation-pressure force.
    """
    kappa = 2.0 * cavity.wavevector * a_bar
    return -2.0 * kappa * detuning * a_bar / (cavity.gamma**2 + detuning**2)


def radiation_force_transfer(
    cavity: OpticalCavity,
    detuning: float,
    kappa: float,
    omega,
    constants: Constants = NORMALIZED,
) -> ForceTransfer:
    """The three radiation-pressure force channels at ``omega``.

    The incident-field channel carries both quadratures (the phase
    quadrature only enters when the cavity is detuned and the frequency
    finite); the displacement and signal channels share the prefactor
    -2 hbar kappa^2 detuning / Delta(omega).
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    hbar = constants.hbar
    g = cavity.gamma
    u2 = g**2 + detuning**2
    omtau = np.asarray(omega, dtype=float) * cavity.round_trip
    delta = loop_denominator(cavity, detuning, omega)
    front = hbar * kappa * math.sqrt(2.0 * g / u2)
    f_p = front * (u2 - 1j * g * omtau) / delta
    f_q = front * (-1j * detuning * omtau) / delta
    f_m = -2.0 * hbar * kappa**2 * detuning / delta
    return ForceTransfer(f_p=f_p, f_q=f_q, f_m=f_m, f_sig=f_m)


def full_transfer(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    wp: WorkingPoint,
    omega,
    constants: Constants = NORMALIZED,
) -> FullTransfer:
    """Exact output phase-quadrature coefficients at ``omega``.

    The mirror coordinate is eliminated through the effective
    susceptibility applied to the incident-field and signal force
    channels; the result is substituted into the exact input-output
    relation for the phase quadrature. Raises if the effective
    susceptibility diverges at a real grid frequency.
    """
    hbar = constants.hbar
    g, tau = cavity.gamma, cavity.round_trip
    psi, xi = wp.detuning, wp.coupling
    u2 = g**2 + psi**2
    omega = np.asarray(omega, dtype=float)
    omtau = omega * tau
    delta = loop_denominator(cavity, psi, omega)

    gain = (u2 - 1j * g * omtau) / delta  # cavity-filtered transduction
    a_q = (u2 + omtau**2 * (g**2 - psi**2) / u2) / delta
    a_p = -(2.0 * omtau**2 * g * psi / u2) / delta

    chi = mech_susceptibility(osc, omega)
    kappa = kappa_for_coupling(cavity, psi, xi)
    inv_eff = 1.0 / chi + 2.0 * hbar * kappa**2 * psi / delta
    inv_eff = np.asarray(inv_eff)
    if np.any(inv_eff == 0):
        om = np.broadcast_to(omega, inv_eff.shape)
        bad = om if inv_eff.ndim == 0 else om[np.nonzero(inv_eff == 0)][0]
        raise SingularPointError(
            f"effective susceptibility diverges at omega={float(bad)!r}"
        )
    chi_eff = 1.0 / inv_eff

    # mirror response to the force channels, folded into the output
    c_p = 2.0 * hbar * xi**2 * chi_eff * gain**2 + a_p
    c_q = a_q + 2.0 * xi * gain * chi_eff * (-1j * hbar * xi * psi * omtau / delta)
    c_sig = 2.0 * xi * gain * chi_eff / chi
    if np.asarray(c_sig).ndim == 0:
        return FullTransfer(c_q=complex(c_q), c_p=complex(c_p), c_sig=complex(c_sig))
    return FullTransfer(c_q=c_q, c_p=c_p, c_sig=c_sig)


def full_transfer_by_solve(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    wp: WorkingPoint,
    omega: float,
    constants: Constants = NORMALIZED,
) -> FullTransfer:
    """Validation oracle: solve the raw linear system per frequency.

    Unknowns are the intracavity quadratures and the mirror displacement;
    the output quadrature is then formed from the input-output relation.
    Independent of the hand-eliminated closed form used by
    :func:`full_transfer`.
    """
    hbar = constants.hbar
    g, tau, k = cavity.gamma, cavity.round_trip, cavity.wavevector
    psi, xi = wp.detuning, wp.coupling
    kappa = kappa_for_coupling(cavity, psi, xi)
    r = math.hypot(g, psi)
    cth, sth = g / r, psi / r  # cos/sin of the input mean-field phase
    chi = mech_susceptibility(osc, omega)
    root2g = math.sqrt(2.0 * g)

    coeffs = []
    for p_in, q_in, x_sig in np.eye(3):
        a = np.array(
            [
                [g - 1j * omega * tau, psi, 0.0],
                [-psi, g - 1j * omega * tau, -2.0 * kappa],
                [-hbar * kappa * chi, 0.0, 1.0],
            ],
            dtype=complex,
        )
        b = np.array(
            [
                root2g * (cth * p_in + sth * q_in),
                root2g * (cth * q_in - sth * p_in) + 2.0 * kappa * x_sig,
                0.0,
            ],
            dtype=complex,
        )
        p_c, q_c, _ = np.linalg.solve(a, b)
        # output field = -input + sqrt(2 gamma) * intracavity, rotated to
        # the output mean-field phase (the opposite of the input phase)
        v1 = -(cth * p_in + sth * q_in) + root2g * p_c
        v2 = -(cth * q_in - sth * p_in) + root2g * q_c
        coeffs.append(-sth * v1 + cth * v2)
    c_p, c_q, c_sig = coeffs
    return FullTransfer(c_q=c_q, c_p=c_p, c_sig=c_sig)


def log_grid(lo: float, hi: float, points_per_decade: int) -> np.ndarray:
    """Logarithmic frequency grid with a fixed density per decade."""
    if not (0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    if points_per_decade < 1:
        raise ValueError("points_per_decade must be >= 1")
    n = int(round(math.log10(hi / lo) * points_per_decade)) + 1
    return np.geomspace(lo, hi, n)


def default_grid(omega_sql: float) -> np.ndarray:
    """Default spectrum grid around the balance frequency."""
    lo, hi = DEFAULT_GRID_DECADES
    return log_grid(lo * omega_sql, hi * omega_sql, DEFAULT_POINTS_PER_DECADE)


def spectrum(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    wp: WorkingPoint,
    grid: np.ndarray,
    noise: InputNoiseModel = COHERENT,
    constants: Constants = NORMALIZED,
) -> NoiseSpectrum:
    """Exact equivalent-input noise over a frequency grid.

    Also evaluates the SQL reference curve hbar |chi| on the same grid.
    The grid must be strictly increasing and positive. Singularities are
    reported with the offending frequency.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2:
        raise ValueError("grid must be a 1-d array with at least 2 points")
    if grid[0] <= 0 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be strictly increasing and positive")
    t = full_transfer(osc, cavity, wp, grid, constants)
    power = (
        np.abs(t.c_q) ** 2 * noise.s_q
        + np.abs(t.c_p) ** 2 * noise.s_p
        + 2.0 * np.real(t.c_q * np.conj(t.c_p)) * noise.s_pq
    )
    sig2 = np.abs(t.c_sig) ** 2
    if np.any(sig2 == 0):
        bad = grid[np.nonzero(sig2 == 0)][0]
        raise SingularPointError(f"no signal transduction at omega={bad!r}")
    s_sql = constants.hbar * np.abs(mech_susceptibility(osc, grid))
    meta = {
        "model": "finite_bandwidth",
        "hbar": constants.hbar,
        "oscillator": {
            "mass": osc.mass,
            "resonance_freq": osc.resonance_freq,
            "damping": osc.damping,
        },
        "cavity": {
            "gamma": cavity.gamma,
            "round_trip": cavity.round_trip,
            "wavevector": cavity.wavevector,
            "bandwidth": cavity.bandwidth,
        },
        "working_point": {"detuning": wp.detuning, "coupling": wp.coupling},
    }
    if wp.coupling > 0:
        meta["omega_sql"] = sql_frequency(osc, wp.coupling, constants)
    return NoiseSpectrum(omega=grid, s_sig=power / sig2, s_sql=s_sql, meta=meta)


def _parabolic_refine(x: np.ndarray, y: np.ndarray, i: int) -> tuple[float, float]:
    """Refine a grid minimum by a parabola through three log-log points."""
    lx = np.log(x[i - 1 : i + 2])
    ly = np.log(y[i - 1 : i + 2])
    curv = ly[0] - 2.0 * ly[1] + ly[2]
    if curv <= 0:
        return float(x[i]), float(y[i])
    d = 0.5 * (ly[0] - ly[2]) / curv
    return (
        float(np.exp(lx[1] + d * (lx[1] - lx[0]))),
        float(np.exp(ly[1] - 0.25 * (ly[0] - ly[2]) * d)),
    )


def dip_analysis(
    noise_spectrum: NoiseSpectrum,
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    wp: WorkingPoint,
    constants: Constants = NORMALIZED,
) -> DipReport:
    """Locate and characterize the sensitivity dips of a spectrum.

    A dip is a local minimum of the equivalent-input noise that lies
    below the zero-detuning reference spectrum at the same coupling;
    positions and values are refined by a log-log parabola. Found dips
    are assigned to the mechanical-resonance dip (lower frequency,
    positive detuning only) and the cavity-loop dip by proximity to the
    asymptotic predictions. Raises ``NoDipFoundError`` when the spectrum
    has no minima below the reference (e.g. at zero detuning).
    """
    if wp.coupling <= 0:
        raise ValueError("dip analysis needs a positive coupling")
    grid, s = noise_spectrum.omega, noise_spectrum.s_sig
    reference = spectrum(
        osc,
        cavity,
        WorkingPoint(detuning=0.0, coupling=wp.coupling),
        grid,
        constants=constants,
    ).s_sig

    found = []
    for i in range(1, len(grid) - 1):
        if s[i] < s[i - 1] and s[i] < s[i + 1] and s[i] < reference[i]:
            found.append(_parabolic_refine(grid, s, i))
    if not found:
        raise NoDipFoundError(
            "no sensitivity dip below the zero-detuning reference on this grid"
        )

    omega_sql = sql_frequency(osc, wp.coupling, constants)
    g, psi = cavity.gamma, wp.detuning
    beta = 0.5 * psi / g
    pred_minus = omega_sql * math.sqrt(beta) if psi > 0 else None
    pred_plus = cavity.bandwidth * math.sqrt(1.0 + (psi / g) ** 2)
    pred_depth = 2.0 * (g / psi) ** 2 if psi != 0 else math.inf
    s_ref = constants.hbar / (osc.mass * omega_sql**2)

    minus = plus = None
    if len(found) >= 2 and pred_minus is not None:
        minus, plus = found[0], found[-1]
    else:
        # single dip (or no spring dip expected): assign by log proximity
        for cand in found:
            targets = [(abs(math.log(cand[0] / pred_plus)), "plus")]
            if pred_minus is not None:
                targets.append((abs(math.log(cand[0] / pred_minus)), "minus"))
            if min(targets)[1] == "plus" and plus is None:
                plus = cand
            elif minus is None:
                minus = cand

    def local_ratio(dip):
        chi = mech_susceptibility(osc, dip[0])
        return dip[1] / (constants.hbar * abs(chi))

    return DipReport(
        omega_sql=omega_sql,
        count=len(found),
        omega_minus=minus[0] if minus else None,
        omega_plus=plus[0] if plus else None,
        depth_minus=minus[1] / s_ref if minus else None,
        depth_plus=plus[1] / s_ref if plus else None,
        ratio_local_minus=local_ratio(minus) if minus else None,
        ratio_local_plus=local_ratio(plus) if plus else None,
        below_sql_plus=(local_ratio(plus) < 1.0) if plus else None,
        predicted_omega_minus=pred_minus,
        predicted_omega_plus=pred_plus,
        predicted_depth=pred_depth,
    )
