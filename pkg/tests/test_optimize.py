import math

import numpy as np
import pytest

from optospring import (
    DegenerateDissipationError,
    MechanicalOscillator,
    OpticalCavity,
    SearchSpec,
    StabilityBoundaryError,
    WorkingPoint,
    amplification_factor,
    coupling_optimum,
    equivalent_input_noise,
    full_transfer,
    highfreq_optimum,
    lowfreq_curve_minimum,
    lowfreq_optimum,
    mech_susceptibility,
    minimize_over_detuning,
    minimize_over_xi,
    minimize_xi_quasistatic,
    quasi_free_oscillator,
    sql_point,
    stability_map,
    static_coupling2_bound,
    ultimate_quantum_limit,
)

GAMMA = 0.01


class TestSearchSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            SearchSpec(xi2_bounds=(1.0, 1.0))
        with pytest.raises(ValueError):
            SearchSpec(rel_tol=0.0)
        with pytest.raises(ValueError):
            SearchSpec(seed_points=2)


class TestMinimizeOverXi:
    def test_recovers_sql(self, osc):
        for omega in np.geomspace(0.05, 5.0, 8):
            res = minimize_xi_quasistatic(osc, GAMMA, 0.0, omega)
            ref = sql_point(osc, omega)
            assert res.converged
            assert res.level == pytest.approx(ref.level, rel=1e-9)
            assert res.coupling2 == pytest.approx(ref.coupling**2, rel=1e-4)

    def test_matches_lowfreq_closed_form(self, high_q_osc):
        res = minimize_xi_quasistatic(high_q_osc, GAMMA, -10.0 * GAMMA, 0.0)
        best = lowfreq_optimum(high_q_osc, GAMMA, -10.0 * GAMMA)
        assert res.level == pytest.approx(best.level, rel=1e-6)
        assert res.coupling2 == pytest.approx(best.coupling**2, rel=1e-3)
        assert res.ratio_to_sql == pytest.approx(best.ratio_to_sql, rel=1e-6)

    def test_full_bandwidth_objective_beats_sql_at_spring_dip(self):
        # minimize the exact spectrum over the coupling at the spring-dip
        # frequency: the result sits below the local quasi-static SQL
        osc = quasi_free_oscillator(1.0)
        cavity = OpticalCavity(gamma=GAMMA, round_trip=GAMMA / 2.0, wavevector=1.0)
        omega = 2.2957  # spring dip of the detuning = 10 gamma spectrum

        def objective(xi):
            t = full_transfer(osc, cavity, WorkingPoint(10.0 * GAMMA, xi), omega)
            return (abs(t.c_q) ** 2 + abs(t.c_p) ** 2) / abs(t.c_sig) ** 2

        res = minimize_over_xi(objective)
        assert res.converged
        assert res.level < sql_point(osc, omega).level

    def test_seed_fallback_never_worse_than_scan(self):
        # a deliberately spiky objective: the polish must not return a
        # value above the best seed sample
        def objective(xi):
            t = math.log(xi**2)
            return (t - 0.3) ** 2 + 0.5 * math.sin(8.0 * t) ** 2

        res = minimize_over_xi(objective, SearchSpec(xi2_bounds=(1e-3, 1e3)))
        seeds = [
            objective(math.sqrt(math.exp(u)))
            for u in np.linspace(math.log(1e-3), math.log(1e3), 60)
        ]
        assert res.level <= min(seeds) + 1e-15

    def test_non_convergence_flagged(self, osc):
        spec = SearchSpec(max_iter=1)
        res = minimize_xi_quasistatic(osc, GAMMA, 0.0, 0.5, spec)
        assert not res.converged

    def test_constraint_clamp_and_flag(self):
        # monotone-decreasing objective pushes against the stability clamp
        res = minimize_over_xi(lambda xi: 1.0 / xi, xi2_max_stable=10.0)
        assert res.constraint_active
        assert res.coupling2 <= 10.0
        assert res.coupling2 == pytest.approx(10.0, rel=1e-4)

    def test_interior_optimum_not_flagged(self, high_q_osc):
        spec = SearchSpec(stability_constrained=True)
        res = minimize_xi_quasistatic(high_q_osc, GAMMA, -10.0 * GAMMA, 0.0, spec)
        free = minimize_xi_quasistatic(high_q_osc, GAMMA, -10.0 * GAMMA, 0.0)
        assert not res.constraint_active
        assert res.level == pytest.approx(free.level, rel=1e-9)
        bound = static_coupling2_bound(high_q_osc, GAMMA, -10.0 * GAMMA)
        assert res.coupling2 < bound


class TestMinimizeOverDetuning:
    def test_zero_detuning_on_resonance(self, osc):
        res = minimize_over_detuning(osc, GAMMA, 1.0)
        assert res.converged
        assert abs(res.detuning) < 1e-4
        assert res.level == pytest.approx(sql_point(osc, 1.0).level, rel=1e-6)

    def test_matches_closed_form_point(self, osc):
        res = minimize_over_detuning(osc, GAMMA, 0.5)
        best = ultimate_quantum_limit(osc, 0.5, GAMMA)
        assert res.level == pytest.approx(best.level, rel=1e-6)
        assert res.detuning == pytest.approx(best.detuning, rel=1e-4)

    def test_traces_dissipation_floor_over_a_decade(self, osc):
        for omega in np.geomspace(0.3, 3.0, 7):
            res = minimize_over_detuning(osc, GAMMA, omega)
            chi = mech_susceptibility(osc, omega)
            assert res.level == pytest.approx(abs(chi.imag), rel=1e-4)

    def test_degenerate_without_damping(self):
        free = MechanicalOscillator(1.0, 1.0, 0.0)
        with pytest.raises(DegenerateDissipationError):
            minimize_over_detuning(free, GAMMA, 0.5)


class TestClosedFormOracleEquivalence:
    """Every closed-form optimum is matched by an independent numeric search."""

    def test_balanced_point_by_root_finding(self, high_q_osc, cavity):
        # the equal-noise coupling solves zeta = 1; find it numerically
        from scipy.optimize import brentq

        for ratio in (-0.5, -2.0, -10.0):
            psi = ratio * GAMMA
            best = lowfreq_optimum(high_q_osc, GAMMA, psi)

            def zeta_minus_one(xi2):
                chi0 = 1.0
                chi_eff = 1.0 / (1.0 / chi0 + xi2 * psi / GAMMA)
                return 2.0 * xi2 * abs(chi_eff) - 1.0

            # bracket inside the statically stable region, where the
            # balance parameter grows monotonically through 1
            hi = 0.999 * static_coupling2_bound(high_q_osc, GAMMA, psi)
            root = brentq(zeta_minus_one, 1e-6, hi, xtol=1e-15)
            assert root == pytest.approx(best.balanced_coupling**2, rel=1e-9)

    def test_frequency_optimum_by_scalar_search(self, cavity):
        # numeric minimum of the noise-to-SQL ratio over frequency matches
        # the closed-form optimal frequency in the free-mass regime
        from scipy.optimize import minimize_scalar

        osc = quasi_free_oscillator(1.0)
        xi = math.sqrt(0.5)
        for ratio in (2.0, 5.0, 10.0):
            wp = WorkingPoint(ratio * GAMMA, xi)

            def noise_ratio(logw):
                omega = math.exp(logw)
                s = equivalent_input_noise(osc, _cavity_for(GAMMA), wp, omega)
                return s / sql_point(osc, omega).level

            res = minimize_scalar(
                noise_ratio, bounds=(math.log(0.3), math.log(10.0)),
                method="bounded", options={"xatol": 1e-12},
            )
            best = highfreq_optimum(osc, xi, ratio * GAMMA, GAMMA)
            assert math.exp(res.x) == pytest.approx(best.omega, rel=1e-6)
            assert res.fun == pytest.approx(best.ratio_to_sql, rel=1e-6)

    def test_coupling_optimum_on_random_samples(self, rng):
        for _ in range(50):
            osc = MechanicalOscillator(
                1.0, rng.uniform(0.3, 3.0), 10 ** rng.uniform(-3, -0.5)
            )
            omega = 10 ** rng.uniform(-1.5, 0.7)
            psi = rng.uniform(-0.3, 0.3)
            res = minimize_xi_quasistatic(osc, GAMMA, psi, omega)
            closed = coupling_optimum(osc, omega, psi, GAMMA)
            assert res.level == pytest.approx(closed.level, rel=1e-6)

    def test_joint_optimum_on_random_samples(self, rng):
        for _ in range(20):
            osc = MechanicalOscillator(1.0, 1.0, 10 ** rng.uniform(-1.5, -0.5))
            omega = 10 ** rng.uniform(-0.5, 0.5)
            res = minimize_over_detuning(osc, GAMMA, omega)
            closed = ultimate_quantum_limit(osc, omega, GAMMA)
            assert res.level == pytest.approx(closed.level, rel=1e-4)
            scale = max(abs(closed.detuning), 2.0 * GAMMA)
            assert abs(res.detuning - closed.detuning) / scale < 1e-3


def _cavity_for(gamma):
    return OpticalCavity(gamma=gamma, round_trip=1e-9, wavevector=1.0)


class TestMonotonicity:
    def test_deeper_detuning_always_helps_at_zero_frequency(self, high_q_osc):
        ladder = -GAMMA * np.linspace(1.0, 19.0, 10)
        levels = [
            minimize_xi_quasistatic(high_q_osc, GAMMA, psi, 0.0).level
            for psi in ladder
        ]
        assert all(a > b for a, b in zip(levels, levels[1:]))
        closed = [lowfreq_optimum(high_q_osc, GAMMA, psi).level for psi in ladder]
        assert np.allclose(levels, closed, rtol=1e-6)


class TestStabilityMap:
    def test_nonnegative_detunings_statically_stable(self, high_q_osc, cavity):
        m = stability_map(
            high_q_osc, cavity, np.geomspace(0.005, 50.0, 20), np.linspace(0.0, 0.1, 5)
        )
        assert m.static_ok.all()

    def test_boundary_location_on_a_row(self, high_q_osc, cavity):
        psi = -2.0 * cavity.gamma
        xi2 = np.geomspace(0.005, 50.0, 40)
        m = stability_map(high_q_osc, cavity, xi2, np.array([psi]))
        crossings = [c for p, c in m.boundary if p == psi]
        assert len(crossings) == 1
        assert crossings[0] == pytest.approx(
            static_coupling2_bound(high_q_osc, cavity.gamma, psi), rel=1e-9
        )

    def test_boundary_coincides_with_amplification_divergence(self, high_q_osc, cavity):
        xi2 = np.geomspace(0.005, 50.0, 30)
        psis = np.linspace(-0.1, -0.01, 7)
        m = stability_map(high_q_osc, cavity, xi2, psis)
        assert m.boundary, "expected static boundary crossings"
        for psi, cross in m.boundary:
            # just inside: finite amplification; at the crossing: divergent
            # (an exact hit raises, a rounded one returns a huge value)
            inside = amplification_factor(
                high_q_osc, cavity, WorkingPoint(psi, math.sqrt(0.99 * cross)), 0.0
            )
            try:
                at_edge = amplification_factor(
                    high_q_osc, cavity, WorkingPoint(psi, math.sqrt(cross)), 0.0
                )
            except StabilityBoundaryError:
                at_edge = math.inf
            assert at_edge > 1e6
            assert inside < at_edge

    def test_flags_match_margin_signs(self, high_q_osc, cavity, rng):
        xi2 = np.geomspace(0.01, 20.0, 10)
        psis = rng.uniform(-0.2, 0.2, size=6)
        m = stability_map(high_q_osc, cavity, xi2, psis)
        assert ((m.static_margin > 0) == m.static_ok).all()
        assert ((m.dynamic_margin > 0) == m.dynamic_ok).all()


class TestLowfreqCurveMinimum:
    def test_resonant(self, high_q_osc):
        xi2, level = lowfreq_curve_minimum(high_q_osc, GAMMA, 0.0)
        ref = sql_point(high_q_osc, 0.0)
        assert xi2 == pytest.approx(ref.coupling**2, rel=1e-4)
        assert level == pytest.approx(ref.level, rel=1e-9)

    def test_minus_five_gamma(self, high_q_osc):
        xi2, level = lowfreq_curve_minimum(high_q_osc, GAMMA, -5.0 * GAMMA)
        ref = sql_point(high_q_osc, 0.0)
        assert xi2 / ref.coupling**2 == pytest.approx(0.3713906763541037, rel=1e-4)
        assert level / ref.level == pytest.approx(0.19258240356725187, rel=1e-6)

    def test_minus_ten_gamma(self, high_q_osc):
        _, level = lowfreq_curve_minimum(high_q_osc, GAMMA, -10.0 * GAMMA)
        assert level == pytest.approx(0.09901951359278449, rel=1e-6)

    def test_rejects_positive_detuning(self, high_q_osc):
        with pytest.raises(ValueError):
            lowfreq_curve_minimum(high_q_osc, GAMMA, 0.02)
