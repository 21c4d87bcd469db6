"""Numeric minimization of the equivalent-input noise.

Serves two purposes: a user-facing optimum finder over the working-point
parameters, and an independent numeric oracle for every closed-form
optimum in :mod:`optospring.quasistatic`. Searches are deterministic
(fixed seeding, no randomness): a coarse logarithmic pre-scan brackets
the minimum, then a golden-section/parabolic (Brent) polish runs inside
the bracket. The coupling is searched in log(coupling^2), where the
objective spans decades but is nearly quadratic around its minimum.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .core import (
    NORMALIZED,
    Constants,
    MechanicalOscillator,
    OpticalCavity,
    WorkingPoint,
    stability,
)
from .errors import DegenerateDissipationError
from .quasistatic import COHERENT, InputNoiseModel, equivalent_input_noise, sql_point

# searches stop this far (relative) inside the static-stability margin
STABILITY_CLAMP = 1e-6


@dataclass(frozen=True)
class SearchSpec:
    """Bounds and tolerances for the working-point searches."""

    xi2_bounds: tuple[float, float] = (1e-6, 1e6)
    psi_bounds: tuple[float, float] = (-math.pi + 1e-6, math.pi - 1e-6)
    rel_tol: float = 1e-8
    max_iter: int = 200
    stability_constrained: bool = False
    seed_points: int = 60

    def __post_init__(self):
        for name in ("xi2_bounds", "psi_bounds"):
            lo, hi = getattr(self, name)
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ValueError(f"{name} must be finite and ordered, got {lo, hi}")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be > 0")
        if self.max_iter < 1 or self.seed_points < 3:
            raise ValueError("max_iter >= 1 and seed_points >= 3 required")


@dataclass(frozen=True)
class OptimResult:
    """Outcome of one numeric search."""

    coupling2: float
    detuning: float | None
    level: float
    ratio_to_sql: float | None
    iterations: int
    converged: bool
    constraint_active: bool


@dataclass(frozen=True)
class StabilityMap:
    """Stability flags and margins on a (coupling^2, detuning) grid.

    ``boundary`` holds (detuning, coupling^2) pairs where the static
    margin crosses zero along each detuning row (the margin is linear in
    coupling^2, so the crossing is interpolated exactly).
    """

    coupling2: np.ndarray
    detunings: np.ndarray
    static_ok: np.ndarray
    dynamic_ok: np.ndarray
    static_margin: np.ndarray
    dynamic_margin: np.ndarray
    boundary: list = field(default_factory=list)


def static_coupling2_bound(
    osc: MechanicalOscillator,
    gamma: float,
    detuning: float,
    constants: Constants = NORMALIZED,
) -> float:
    """Largest statically stable coupling^2 at a detuning (inf if none)."""
    if detuning >= 0:
        return math.inf
    chi0 = 1.0 / (osc.mass * osc.resonance_freq**2)
    return gamma / (constants.hbar * chi0 * abs(detuning))


def minimize_over_xi(
    objective,
    spec: SearchSpec = SearchSpec(),
    xi2_max_stable: float | None = None,
) -> OptimResult:
    """Minimize a noise objective over the coupling.

    ``objective`` maps a coupling value to a noise level (quasi-static or
    full-bandwidth, at fixed frequency and detuning). The search runs on
    log(coupling^2): a deterministic seed scan brackets the minimum, then
    a bounded Brent polish finishes. When ``xi2_max_stable`` is given the
    upper bound is clamped just inside the static-stability margin and an
    optimum pushed against it is flagged ``constraint_active``.
    """
    lo, hi = spec.xi2_bounds
    constrained = xi2_max_stable is not None and xi2_max_stable < hi
    if constrained:
        hi = xi2_max_stable * (1.0 - STABILITY_CLAMP)
        if hi <= lo:
            raise ValueError("stability bound leaves an empty coupling bracket")
    t = np.linspace(math.log(lo), math.log(hi), spec.seed_points)
    seed_vals = np.array([objective(math.sqrt(math.exp(u))) for u in t])
    i = int(np.argmin(seed_vals))
    i = min(max(i, 1), len(t) - 2)
    res = minimize_scalar(
        lambda u: objective(math.sqrt(math.exp(u))),
        bounds=(t[i - 1], t[i + 1]),
        method="bounded",
        options={"xatol": spec.rel_tol, "maxiter": spec.max_iter},
    )
    xi2, level = float(math.exp(res.x)), float(res.fun)
    j = int(np.argmin(seed_vals))
    if seed_vals[j] < level:  # polish must never lose to its own seed
        xi2, level = float(math.exp(t[j])), float(seed_vals[j])
    active = constrained and (hi - xi2) / hi < 1e-5
    return OptimResult(
        coupling2=xi2,
        detuning=None,
        level=level,
        ratio_to_sql=None,
        iterations=spec.seed_points + int(res.nfev),
        converged=bool(res.success),
        constraint_active=active,
    )


def _quasistatic_cavity(gamma: float) -> OpticalCavity:
    # round_trip and wavevector never enter the quasi-static noise chain
    return OpticalCavity(gamma=gamma, round_trip=1e-9, wavevector=1.0)


def minimize_xi_quasistatic(
    osc: MechanicalOscillator,
    gamma: float,
    detuning: float,
    omega: float,
    spec: SearchSpec = SearchSpec(),
    noise: InputNoiseModel = COHERENT,
    constants: Constants = NORMALIZED,
) -> OptimResult:
    """Numeric coupling optimum of the quasi-static noise at one point."""
    cavity = _quasistatic_cavity(gamma)

    def objective(xi):
        wp = WorkingPoint(detuning=detuning, coupling=xi)
        return equivalent_input_noise(osc, cavity, wp, omega, noise, constants)

    bound = None
    if spec.stability_constrained:
        bound = static_coupling2_bound(osc, gamma, detuning, constants)
        if not math.isfinite(bound):
            bound = None
    res = minimize_over_xi(objective, spec, xi2_max_stable=bound)
    ref = sql_point(osc, omega, constants)
    return OptimResult(
        coupling2=res.coupling2,
        detuning=detuning,
        level=res.level,
        ratio_to_sql=res.level / ref.level,
        iterations=res.iterations,
        converged=res.converged,
        constraint_active=res.constraint_active,
    )


def minimize_over_detuning(
    osc: MechanicalOscillator,
    gamma: float,
    omega: float,
    spec: SearchSpec = SearchSpec(),
    constants: Constants = NORMALIZED,
) -> OptimResult:
    """Joint numeric optimum over detuning and coupling at one frequency.

    Nested search: an outer scan-plus-Brent over the detuning, each step
    minimizing over the coupling. Requires mechanical dissipation, since
    otherwise no finite optimum exists off resonance.
    """
    if osc.damping == 0:
        raise DegenerateDissipationError(
            "detuning optimization undefined for an undamped oscillator"
        )
    evals = 0

    def outer(psi: float) -> OptimResult:
        nonlocal evals
        r = minimize_xi_quasistatic(osc, gamma, psi, omega, spec, constants=constants)
        evals += r.iterations
        return r

    lo, hi = spec.psi_bounds
    lo = max(lo, -math.pi + 1e-9)
    hi = min(hi, math.pi)
    p = np.linspace(lo, hi, spec.seed_points)
    seed_vals = np.array([outer(pi).level for pi in p])
    i = int(np.argmin(seed_vals))
    i = min(max(i, 1), len(p) - 2)
    res = minimize_scalar(
        lambda q: outer(q).level,
        bounds=(p[i - 1], p[i + 1]),
        method="bounded",
        options={"xatol": spec.rel_tol, "maxiter": spec.max_iter},
    )
    psi_opt = float(res.x)
    j = int(np.argmin(seed_vals))
    if seed_vals[j] < res.fun:
        psi_opt = float(p[j])
    best = outer(psi_opt)
    return OptimResult(
        coupling2=best.coupling2,
        detuning=psi_opt,
        level=best.level,
        ratio_to_sql=best.ratio_to_sql,
        iterations=evals,
        converged=bool(res.success) and best.converged,
        constraint_active=best.constraint_active,
    )


def stability_map(
    osc: MechanicalOscillator,
    cavity: OpticalCavity,
    coupling2: np.ndarray,
    detunings: np.ndarray,
    constants: Constants = NORMALIZED,
) -> StabilityMap:
    """Stability flags over a working-point grid, with the static boundary."""
    coupling2 = np.asarray(coupling2, dtype=float)
    detunings = np.asarray(detunings, dtype=float)
    shape = (detunings.size, coupling2.size)
    static_ok = np.zeros(shape, dtype=bool)
    dynamic_ok = np.zeros(shape, dtype=bool)
    static_margin = np.zeros(shape)
    dynamic_margin = np.zeros(shape)
    for a, psi in enumerate(detunings):
        for b, xi2 in enumerate(coupling2):
            rep = stability(
                osc, cavity, WorkingPoint(psi, math.sqrt(xi2)), constants
            )
            static_ok[a, b] = rep.static_ok
            dynamic_ok[a, b] = rep.dynamic_ok
            static_margin[a, b] = rep.static_margin
            dynamic_margin[a, b] = rep.dynamic_margin
    boundary = []
    for a, psi in enumerate(detunings):
        m = static_margin[a]
        for b in range(len(coupling2) - 1):
            if m[b] == 0.0 or (m[b] > 0) != (m[b + 1] > 0):
                # margin is linear in coupling^2: interpolate exactly
                x0, x1 = coupling2[b], coupling2[b + 1]
                cross = x0 + (x1 - x0) * m[b] / (m[b] - m[b + 1])
                boundary.append((float(psi), float(cross)))
    return StabilityMap(
        coupling2=coupling2,
        detunings=detunings,
        static_ok=static_ok,
        dynamic_ok=dynamic_ok,
        static_margin=static_margin,
        dynamic_margin=dynamic_margin,
        boundary=boundary,
    )


def lowfreq_curve_minimum(
    osc: MechanicalOscillator,
    gamma: float,
    detuning: float,
    spec: SearchSpec = SearchSpec(),
    constants: Constants = NORMALIZED,
) -> tuple[float, float]:
    """Numeric (coupling^2, noise) minimum of the zero-frequency curve."""
    if detuning > 0:
        raise ValueError("the zero-frequency curves improve only for detuning <= 0")
    res = minimize_xi_quasistatic(osc, gamma, detuning, 0.0, spec, constants=constants)
    return res.coupling2, res.level
