"""Core model of a single-ended cavity with a movable mirror.

Parameter records (oscillator, cavity, working point), the free and
optical-spring-modified mechanical susceptibilities, the cavity steady
state including radiation-pressure recoil (bistability), and the static
and dynamic stability tests.

Conventions
-----------
* Fourier transform with d/dt -> -i*omega, so a decaying mode has its
  pole in the lower half of the complex frequency plane.
* The mean intracavity field is taken real and non-negative; input and
  output mean fields then carry the phases ``theta_in``/``theta_out``.
* Field amplitudes are normalized so that |amplitude|^2 is a photon flux.
* Detunings are round-trip phases reduced to (-pi, pi]; reduction is the
  caller's job (see :func:`wrap_phase`) and is enforced at construction.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import SingularPointError

TWO_PI = 2.0 * math.pi

# Damping-to-resonance ratio above which the Lorentzian effective-damping
# picture is no longer trusted and a warning is emitted.
HIGH_Q_RATIO = 0.1

# A cubic root is accepted as real when |Im| < REAL_ROOT_TOL * (1 + |Re|).
REAL_ROOT_TOL = 1e-10


def wrap_phase(x: float) -> float:
    """Reduce an angle to the principal interval (-pi, pi]."""
    r = math.remainder(x, TWO_PI)
    if r <= -math.pi:
        r += TWO_PI
    return r


def _check_phase(name: str, value: float) -> None:
    if not (-math.pi < value <= math.pi):
        raise ValueError(
            f"{name} must lie in (-pi, pi]; got {value!r} (use wrap_phase)"
        )


@dataclass(frozen=True)
class Constants:
    """Unit-system record. ``hbar`` is 1 in normalized mode, J*s in SI."""

    hbar: float = 1.0

    def __post_init__(self):
        if not self.hbar > 0:
            raise ValueError(f"hbar must be positive, got {self.hbar!r}")


NORMALIZED = Constants(hbar=1.0)
SI = Constants(hbar=1.054571817e-34)


@dataclass(frozen=True)
class MechanicalOscillator:
    """Single-mode mirror: mass, resonance frequency and damping rate.

    ``damping = 0`` is allowed for analytic limits, but operations that
    depend on the dissipative (imaginary) part of the response refuse to
    run on such an oscillator instead of silently returning zero.
    """

    mass: float
    resonance_freq: float
    damping: float

    def __post_init__(self):
        if not self.mass > 0:
            raise ValueError(f"mass must be positive, got {self.mass!r}")
        if not self.resonance_freq > 0:
            raise ValueError(
                f"resonance_freq must be positive, got {self.resonance_freq!r}"
            )
        if self.damping < 0:
            raise ValueError(f"damping must be >= 0, got {self.damping!r}")

    @property
    def is_high_q(self) -> bool:
        return self.damping < HIGH_Q_RATIO * self.resonance_freq


@dataclass(frozen=True)
class OpticalCavity:
    """Single-ended cavity: damping rate, round-trip time, wavevector.

    ``gamma`` is the (dimensionless) amplitude damping rate per round
    trip, assumed small compared to 1. ``bare_detuning`` is the
    round-trip phase offset without light, reduced to (-pi, pi].
    """

    gamma: float
    round_trip: float
    wavevector: float
    bare_detuning: float = 0.0

    def __post_init__(self):
        if not 0 < self.gamma < 1:
            raise ValueError(f"gamma must be in (0, 1), got {self.gamma!r}")
        if not self.round_trip > 0:
            raise ValueError(f"round_trip must be positive, got {self.round_trip!r}")
        if not self.wavevector > 0:
            raise ValueError(f"wavevector must be positive, got {self.wavevector!r}")
        _check_phase("bare_detuning", self.bare_detuning)

    @property
    def bandwidth(self) -> float:
        """Cavity bandwidth gamma / round_trip (rad/s)."""
        return self.gamma / self.round_trip


@dataclass(frozen=True)
class WorkingPoint:
    """Mean detuning and optomechanical coupling, the two free knobs.

    The coupling parameter combines cavity finesse, detuning and input
    power into a single scalar that sets how strongly a length change
    imprints on the output phase quadrature.
    """

    detuning: float
    coupling: float

    def __post_init__(self):
        _check_phase("detuning", self.detuning)
        if self.coupling < 0:
            raise ValueError(f"coupling must be >= 0, got {self.coupling!r}")


@dataclass(frozen=True)
class SteadyState:
    """Mean-field steady state of the driven cavity.

    ``a_bar`` is the (real, non-negative) intracavity amplitude,
    ``a_in``/``a_out`` the complex input/output mean fields, and
    ``kappa = 2 k a_bar`` the frequency pulled per unit mirror motion.
    """

    a_bar: float
    a_in: complex
    a_out: complex
    theta_in: float
    theta_out: float
    intensity: float
    kappa: float


@dataclass(frozen=True)
class DetuningBranch:
    """One self-consistent detuning root with its steady state."""

    detuning: float
    state: SteadyState
    static_ok: bool


@dataclass(frozen=True)
class StabilityReport:
    """Static (bistability) and dynamic (positive damping) stability.

    Margins are the left-hand sides of the respective conditions; a
    working point is stable when both are strictly positive.
    """

    static_ok: bool
    dynamic_ok: bool
    gamma_eff: float
    static_margin: float
    dynamic_margin: float


def mech_susceptibility(osc: MechanicalOscillator, omega):
    """Free mechanical susceptibility of the mirror at ``omega``.

    Returns 1 / (M (Omega_M^2 - omega^2 - i Gamma omega)). Accepts a
    scalar or an array of frequencies.
    """
    omega = np.asarray(omega, dtype=float)
    den = osc.mass * (osc.resonance_freq**2 - omega**2 - 1j * osc.damping * omega)
    if np.any(den == 0):
        bad = omega if omega.ndim == 0 else omega[np.nonzero(den == 0)][0]
        raise SingularPointError(
            f"undamped oscillator driven exactly on resonance (omega={float(bad)!r})"
        )
    out = 1.0 / den
    return complex(out) if out.ndim == 0 else out


def loop_denominator(cavity: OpticalCavity, detuning: float, omega):
    """Cavity loop denominator (gamma - i omega tau)^2 + detuning^2."""
    omega = np.asarray(omega, dtype=float)
    out = (cavity.gamma - 1j * omega * cavity.round_trip) ** 2 + detuning**2
    return complex(out) if out.ndim == 0 else out


def steady_state(
    cavity: OpticalCavity, detuning: float, input_magnitude: float
) -> SteadyState:
    """Mean fields of the cavity driven at a fixed mean detuning.

    The global phase is chosen so that the intracavity field is real and
    non-negative; for a lossless single-ended cavity the output magnitude
    equals the input magnitude and only the phases differ.
    """
    if input_magnitude < 0:
        raise ValueError("input_magnitude must be >= 0")
    g = cavity.gamma
    norm = math.hypot(g, detuning)
    a_bar = math.sqrt(2.0 * g) * input_magnitude / norm
    theta_in = math.atan2(detuning, g)
    theta_out = -theta_in
    a_in = input_magnitude * complex(math.cos(theta_in), math.sin(theta_in))
    a_out = input_magnitude * complex(math.cos(theta_out), math.sin(theta_out))
    return SteadyState(
        a_bar=a_bar,
        a_in=a_in,
        a_out=a_out,
        theta_in=theta_in,
        theta_out=theta_out,
        intensity=a_bar**2,
        kappa=2.0 * cavity.wavevector * a_bar,
    )


def coupling_from_input(
    cavity: OpticalCavity, detuning: float, input_magnitude: float
) -> float:
    """Optomechanical coupling produced by a given input amplitude."""
    if input_magnitude < 0:
        raise ValueError("input_magnitude must be >= 0")
    g = cavity.gamma
    return 4.0 * cavity.wavevector * g * input_magnitude / (g**2 + detuning**2)


def input_from_coupling(
    cavity: OpticalCavity, detuning: float, coupling: float
) -> float:
    """Input amplitude needed to reach a given coupling (inverse map)."""
    if coupling < 0:
        raise ValueError("coupling must be >= 0")
    g = cavity.gamma
    return coupling * (g**2 + detuning**2) / (4.0 * cavity.wavevector * g)


def kappa_for_coupling(cavity: OpticalCavity, detuning: float, coupling: float) -> float:
    """Frequency-pull rate kappa corresponding to a coupling value."""
    g = cavity.gamma
    return coupling * math.sqrt((g**2 + detuning**2) / (2.0 * g))


def solve_self_consistent_detuning(
    cavity: OpticalCavity,
    osc: MechanicalOscillator,
    bare_detuning: float,
    input_magnitude: float,
    constants: Constants = NORMALIZED,
) -> list[DetuningBranch]:
    """All steady-state detunings for a given drive, with stability flags.

    Radiation pressure shifts the mean detuning by the static mirror
    recoil, which closes into a cubic for the detuning. The cubic is
    solved via the companion matrix (robust near degenerate
    discriminants); roots with |Im| below ``REAL_ROOT_TOL * (1 + |Re|)``
    count as real. One or three branches come back, sorted by detuning;
    with three, the middle branch fails the static test.
    """
    if input_magnitude < 0:
        raise ValueError("input_magnitude must be >= 0")
    g = cavity.gamma
    chi0 = 1.0 / (osc.mass * osc.resonance_freq**2)
    drive = 8.0 * constants.hbar * chi0 * cavity.wavevector**2 * g * input_magnitude**2
    # (psi - psi0)(gamma^2 + psi^2) = drive  ->  monic cubic in psi
    coeffs = [1.0, -bare_detuning, g**2, -(bare_detuning * g**2 + drive)]
    roots = np.roots(coeffs)
    real = sorted(
        r.real for r in roots if abs(r.imag) < REAL_ROOT_TOL * (1.0 + abs(r.real))
    )
    if not 1 <= len(real) <= 3:  # pragma: no cover - real cubic guarantee
        raise RuntimeError(f"cubic solver returned {len(real)} real roots")
    branches = []
    for psi in real:
        state = steady_state(cavity, psi, input_magnitude)
        margin = (
            g**2
            + psi**2
            + 2.0 * constants.hbar * state.kappa**2 * chi0 * psi
        )
        branches.append(DetuningBranch(detuning=psi, state=state, static_ok=margin > 0))
    return branches


def effective_susceptibility(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    detuning: float,
    kappa: float,
    omega,
    constants: Constants = NORMALIZED,
):
    """Mirror susceptibility including the optical-spring back-action.

    The radiation-pressure force proportional to the mirror position adds
    2 hbar kappa^2 psi / Delta(omega) to the inverse susceptibility. For
    a resonant cavity (detuning 0) the free susceptibility is returned
    unchanged. Diverges (and raises) if the inverse vanishes at a real
    frequency, which is the signature of a stability boundary.
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    chi = mech_susceptibility(osc, omega)
    inv = 1.0 / chi + 2.0 * constants.hbar * kappa**2 * detuning / loop_denominator(
        cavity, detuning, omega
    )
    inv = np.asarray(inv)
    if np.any(inv == 0):
        om = np.broadcast_to(np.asarray(omega, dtype=float), inv.shape)
        bad = om if inv.ndim == 0 else om[np.nonzero(inv == 0)][0]
        raise SingularPointError(
            f"effective susceptibility diverges at omega={float(bad)!r} "
            "(working point on a stability boundary)"
        )
    out = 1.0 / inv
    return complex(out) if out.ndim == 0 else out


def effective_damping(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    detuning: float,
    kappa: float,
    constants: Constants = NORMALIZED,
) -> float:
    """Effective mechanical damping in the detuned cavity.

    Valid for a high-Q oscillator, where the modified response is still
    Lorentzian; the resonance is widened (detuning < 0) or narrowed
    (detuning > 0). Emits a warning outside the high-Q regime.
    """
    if kappa < 0:
        raise ValueError("kappa must be >= 0")
    if not osc.is_high_q:
        warnings.warn(
            "effective damping assumes a high-Q oscillator "
            f"(damping/resonance_freq = {osc.damping / osc.resonance_freq:.3g})",
            stacklevel=2,
        )
    delta = loop_denominator(cavity, detuning, osc.resonance_freq)
    return osc.damping - (
        4.0 * constants.hbar * kappa**2 / (osc.mass * cavity.bandwidth)
    ) * cavity.gamma**2 * detuning / abs(delta) ** 2


def effective_susceptibility_poles(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    detuning: float,
    kappa: float,
    constants: Constants = NORMALIZED,
) -> np.ndarray:
    """Complex-frequency poles of the effective susceptibility.

    Zeros of the inverse susceptibility continued to complex frequency:
    the roots of a quartic whose factors are the mechanical response and
    the cavity loop denominator. With the d/dt -> -i*omega convention
    every decaying mode has Im(pole) < 0, so the sign of the largest
    imaginary part is an oracle for dynamic stability that is independent
    of the Lorentzian effective-damping approximation.
    """
    m, om, g = osc.mass, osc.resonance_freq, osc.damping
    gamma, tau = cavity.gamma, cavity.round_trip
    chi_inv = np.array([-m, -1j * m * g, m * om**2])  # coefficients in omega
    cav = np.array([-(tau**2), -2j * gamma * tau, gamma**2 + detuning**2])
    poly = np.polymul(chi_inv, cav).astype(complex)
    poly[-1] += 2.0 * constants.hbar * kappa**2 * detuning
    return np.roots(poly)


def stability(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    wp: WorkingPoint,
    constants: Constants = NORMALIZED,
) -> StabilityReport:
    """Evaluate both stability conditions at a working point.

    The static margin is the bistability condition
    gamma^2 + psi^2 + 2 hbar kappa^2 chi[0] psi, evaluated in its
    equivalent factored form (gamma^2 + psi^2)(1 + hbar xi^2 chi[0]
    psi / gamma) so that its zero set coincides bit-for-bit with the
    divergence of the signal amplification factor. The dynamic margin is
    the effective damping. A margin of exactly zero is reported as
    unstable (boundary).
    """
    chi0 = 1.0 / (osc.mass * osc.resonance_freq**2)
    factor = 1.0 + constants.hbar * wp.coupling**2 * (wp.detuning / cavity.gamma) * chi0
    static_margin = (cavity.gamma**2 + wp.detuning**2) * factor
    kappa = kappa_for_coupling(cavity, wp.detuning, wp.coupling)
    gamma_eff = effective_damping(osc, cavity, wp.detuning, kappa, constants)
    return StabilityReport(
        static_ok=static_margin > 0,
        dynamic_ok=gamma_eff > 0,
        gamma_eff=gamma_eff,
        static_margin=static_margin,
        dynamic_margin=gamma_eff,
    )
