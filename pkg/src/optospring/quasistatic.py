"""Measurement chain in the quasi-static (infinite-bandwidth) regime.

Valid for signal frequencies well below the cavity bandwidth: the output
phase quadrature carries the signal amplified by the mirror dynamics on
top of the incident phase and radiation-pressure noises. This module
provides the output-quadrature transfer, the equivalent-input noise
spectrum, the standard quantum limit, closed-form optimal working points
at low and high frequency, and the dissipation-set ultimate limit.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    NORMALIZED,
    Constants,
    MechanicalOscillator,
    OpticalCavity,
    WorkingPoint,
    mech_susceptibility,
)
from .errors import (
    DegenerateDissipationError,
    NoMeasurementError,
    SingularPointError,
    StabilityBoundaryError,
)


@dataclass(frozen=True)
class InputNoiseModel:
    """Symmetrized spectra of the incident quadrature fluctuations.

    Defaults are the coherent-state values: unit white noise in both
    quadratures, no cross-correlation. Quadratures are defined relative
    to the mean-field phase.
    """

    s_q: float = 1.0
    s_p: float = 1.0
    s_pq: float = 0.0

    def __post_init__(self):
        if self.s_q < 0 or self.s_p < 0:
            raise ValueError("quadrature spectra must be >= 0")


COHERENT = InputNoiseModel()


@dataclass(frozen=True)
class QuadratureTransfer:
    """Coefficients of the measured output phase quadrature.

    ``q_out = c_q * q_in + c_p * p_in + c_sig * X_sig``.
    """

    c_q: complex
    c_p: complex
    c_sig: complex


@dataclass(frozen=True)
class SqlPoint:
    """Standard-quantum-limit reference at one frequency."""

    coupling: float
    level: float
    omega: float | None = None


@dataclass(frozen=True)
class OptimumPoint:
    """An optimal working point and the noise it achieves.

    ``ratio_to_sql`` is referenced to the SQL at ``omega`` when a
    frequency is part of the optimum (the high-frequency case), and to
    the SQL at the evaluation frequency otherwise. ``balanced_*`` carry
    the simpler equal-noise point (phase noise = back-action noise) when
    one exists; the true optimum is slightly better.
    """

    coupling: float | None
    detuning: float | None
    omega: float | None
    level: float
    ratio_to_sql: float
    balanced_coupling: float | None = None
    balanced_ratio: float | None = None


def _chi_eff_quasistatic(osc, gamma, wp, omega, constants):
    """Optical-spring susceptibility in the quasi-static limit."""
    chi = mech_susceptibility(osc, omega)
    inv = 1.0 / chi + constants.hbar * wp.coupling**2 * wp.detuning / gamma
    inv = np.asarray(inv)
    if np.any(inv == 0):
        raise SingularPointError(
            "effective susceptibility diverges (static stability boundary)"
        )
    out = 1.0 / inv
    return (complex(out) if out.ndim == 0 else out), chi


def quadrature_transfer(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    wp: WorkingPoint,
    omega,
    constants: Constants = NORMALIZED,
) -> QuadratureTransfer:
    """Output phase-quadrature coefficients at ``omega``.

    The incident phase noise passes through unchanged; the incident
    amplitude noise drives the mirror through radiation pressure; and the
    signal is transduced with the mirror-dynamics amplification factor
    chi_eff / chi. Caller is responsible for omega << cavity bandwidth
    (see :mod:`optospring.finite_bandwidth` for the general case).
    """
    chi_eff, chi = _chi_eff_quasistatic(osc, cavity.gamma, wp, omega, constants)
    xi = wp.coupling
    c_p = 2.0 * constants.hbar * xi**2 * chi_eff
    c_sig = 2.0 * xi * chi_eff / chi
    c_q = np.ones_like(np.asarray(c_sig))
    if np.asarray(c_sig).ndim == 0:
        return QuadratureTransfer(c_q=1.0 + 0.0j, c_p=c_p, c_sig=c_sig)
    return QuadratureTransfer(c_q=c_q.astype(complex), c_p=c_p, c_sig=c_sig)


def equivalent_input_noise(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    wp: WorkingPoint,
    omega,
    noise: InputNoiseModel = COHERENT,
    constants: Constants = NORMALIZED,
):
    """Equivalent-input noise spectrum of the length measurement.

    Output noise power referred to an apparent cavity-length change:
    (|c_q|^2 S_q + |c_p|^2 S_p + 2 Re(c_q c_p*) S_pq) / |c_sig|^2.
    With coherent input this reproduces the closed form of
    :func:`equivalent_input_noise_closed_form` identically.
    """
    if wp.coupling == 0:
        raise NoMeasurementError("coupling is zero: the output carries no signal")
    t = quadrature_transfer(osc, cavity, wp, omega, constants)
    # the balanced-noise floor (zeta + 1/zeta)/2 >= 1 must hold pointwise
    zeta = np.abs(t.c_p)
    assert np.all(0.5 * (zeta + 1.0 / zeta) >= 1.0 - 1e-12)
    power = (
        np.abs(t.c_q) ** 2 * noise.s_q
        + np.abs(t.c_p) ** 2 * noise.s_p
        + 2.0 * np.real(t.c_q * np.conj(t.c_p)) * noise.s_pq
    )
    out = power / np.abs(t.c_sig) ** 2
    return float(out) if np.asarray(out).ndim == 0 else out


def equivalent_input_noise_closed_form(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    wp: WorkingPoint,
    omega,
    constants: Constants = NORMALIZED,
):
    """Closed form of the coherent-input equivalent noise.

    hbar |chi| |chi/chi_eff| (zeta + 1/zeta)/2 with
    zeta = 2 hbar xi^2 |chi_eff|. Kept as an independent route for
    validating the coefficient-based computation.
    """
    if wp.coupling == 0:
        raise NoMeasurementError("coupling is zero: the output carries no signal")
    chi_eff, chi = _chi_eff_quasistatic(osc, cavity.gamma, wp, omega, constants)
    zeta = 2.0 * constants.hbar * wp.coupling**2 * np.abs(chi_eff)
    out = (
        constants.hbar
        * np.abs(chi)
        * np.abs(chi / chi_eff)
        * 0.5
        * (zeta + 1.0 / zeta)
    )
    return float(out) if np.asarray(out).ndim == 0 else out


def sql_point(
    osc: MechanicalOscillator, omega, constants: Constants = NORMALIZED
) -> SqlPoint:
    """Standard quantum limit at ``omega`` for a resonant cavity.

    The coupling at which phase and back-action noises balance, and the
    corresponding minimum noise level hbar |chi|.
    """
    chi = mech_susceptibility(osc, omega)
    mag = abs(chi)
    return SqlPoint(
        coupling=1.0 / math.sqrt(2.0 * constants.hbar * mag),
        level=constants.hbar * mag,
    )


def sql_frequency(
    osc: MechanicalOscillator, coupling: float, constants: Constants = NORMALIZED
) -> float:
    """Frequency where a fixed coupling reaches the SQL (free-mass regime).

    In the regime well above the mechanical resonance the balance
    condition picks the single frequency with M omega^2 = 2 hbar xi^2.
    """
    if coupling <= 0:
        raise ValueError("coupling must be > 0")
    return math.sqrt(2.0 * constants.hbar * coupling**2 / osc.mass)


def amplification_factor(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    wp: WorkingPoint,
    omega,
    constants: Constants = NORMALIZED,
):
    """Signal amplification |chi_eff / chi| by the mirror dynamics.

    Greater than 1 when the mirror motion adds constructively to the
    signal. Diverges exactly on the static stability boundary.
    """
    chi = mech_susceptibility(osc, omega)
    term = 1.0 + constants.hbar * wp.coupling**2 * (wp.detuning / cavity.gamma) * chi
    mag = np.abs(term)
    if np.any(mag == 0):
        raise StabilityBoundaryError(
            "amplification diverges: working point on the static stability boundary"
        )
    out = 1.0 / mag
    return float(out) if np.asarray(out).ndim == 0 else out


def lowfreq_optimum(
    osc: MechanicalOscillator,
    gamma: float,
    detuning: float,
    constants: Constants = NORMALIZED,
) -> OptimumPoint:
    """Best coupling and noise at zero frequency for a given detuning.

    Closed forms for the true optimum and for the balanced-noise point.
    Negative detuning amplifies the signal here (the static response is
    positive); a positive detuning is accepted but cannot beat the SQL.
    """
    if detuning > 0:
        warnings.warn(
            "positive detuning does not improve the low-frequency sensitivity",
            stacklevel=2,
        )
    beta = 0.5 * detuning / gamma
    root = math.sqrt(1.0 + beta**2)
    ref = sql_point(osc, 0.0, constants)
    ratio = root + beta
    # the balanced (equal-noise) point only exists for beta < 1
    balanced_coupling = ref.coupling / math.sqrt(1.0 - beta) if beta < 1 else None
    balanced_ratio = 1.0 / (1.0 - beta) if beta < 1 else None
    return OptimumPoint(
        coupling=ref.coupling / root**0.5,
        detuning=detuning,
        omega=None,
        level=ratio * ref.level,
        ratio_to_sql=ratio,
        balanced_coupling=balanced_coupling,
        balanced_ratio=balanced_ratio,
    )


def highfreq_optimum(
    osc: MechanicalOscillator,
    coupling: float,
    detuning: float,
    gamma: float,
    constants: Constants = NORMALIZED,
) -> OptimumPoint:
    """Best frequency for fixed coupling in the free-mass regime.

    For a stiffness-free response (frequencies far above resonance) the
    noise dips below the SQL at a single frequency; positive detuning is
    the amplifying sign here. ``ratio_to_sql`` is referenced to the SQL
    evaluated at the optimal frequency.
    """
    if detuning < 0:
        warnings.warn(
            "negative detuning does not improve the high-frequency sensitivity",
            stacklevel=2,
        )
    beta = 0.5 * detuning / gamma
    root = math.sqrt(1.0 + beta**2)
    omega_ref = sql_frequency(osc, coupling, constants)
    omega_min = omega_ref * root**0.5
    ratio = root - beta
    level = ratio * constants.hbar / (osc.mass * omega_min**2)
    return OptimumPoint(
        coupling=coupling,
        detuning=detuning,
        omega=omega_min,
        level=level,
        ratio_to_sql=ratio,
    )


def coupling_optimum(
    osc: MechanicalOscillator,
    omega,
    detuning: float,
    gamma: float,
    constants: Constants = NORMALIZED,
) -> OptimumPoint:
    """Optimal coupling at fixed frequency and detuning, any response.

    Valid for an arbitrary complex susceptibility; reduces to the low-
    and high-frequency forms when the response is purely real. The
    improvement term scales with Re(chi)/|chi|, so detuning cannot help
    exactly on the mechanical resonance.
    """
    chi = mech_susceptibility(osc, omega)
    mag = abs(chi)
    beta = 0.5 * detuning / gamma
    root = math.sqrt(1.0 + beta**2)
    ref = sql_point(osc, omega, constants)
    ratio = root + beta * chi.real / mag
    return OptimumPoint(
        coupling=ref.coupling / root**0.5,
        detuning=detuning,
        omega=None,
        level=ratio * ref.level,
        ratio_to_sql=ratio,
    )


def ultimate_quantum_limit(
    osc: MechanicalOscillator,
    omega,
    gamma: float,
    constants: Constants = NORMALIZED,
) -> OptimumPoint:
    """Joint optimum over coupling and detuning at one frequency.

    The noise floor reachable by detuning is set solely by mechanical
    dissipation: hbar |Im chi|, reached at a finite optimal detuning.
    Requires damping > 0; an undamped oscillator has no such floor off
    resonance.
    """
    if osc.damping == 0:
        raise DegenerateDissipationError(
            "ultimate limit undefined for an undamped oscillator"
        )
    chi = mech_susceptibility(osc, omega)
    beta_min = -chi.real / abs(chi.imag)
    detuning_min = 2.0 * gamma * beta_min
    inner = coupling_optimum(osc, omega, detuning_min, gamma, constants)
    level = constants.hbar * abs(chi.imag)
    return OptimumPoint(
        coupling=inner.coupling,
        detuning=detuning_min,
        omega=None,
        level=level,
        ratio_to_sql=abs(chi.imag) / abs(chi),
    )
