import math

import pytest
from hypothesis import given, settings, strategies as st

from nussbaumsim import synthesize_gain_params, validate_gain_constraints


class TestValidate:
    def test_paper_scenario_growth_bound_fails(self):
        rep = validate_gain_constraints(n_agents=3, rho_min=1.8, rho_max=2.2,
                                        eta_bar=0.1, a_N=3.0, b_N=3.0)
        assert rep.b_lower_bound == pytest.approx(2 * 2 * 2.2 / 1.8, rel=1e-15)
        assert rep.b_lower_bound == pytest.approx(4.888888888888889)
        assert not rep.b_satisfied
        assert not rep.satisfied
        assert "FAIL" in rep.summary()

    def test_kappa_and_xi_formulas(self):
        rep = validate_gain_constraints(3, 1.8, 2.2, 0.1, a_N=3.0, b_N=6.0)
        assert rep.kappa == pytest.approx(2 * 2.2 / 6.0 - 0.9, rel=1e-15)
        assert rep.xi == pytest.approx(3 / 5.0 + 7 / 6.0, rel=1e-15)
        assert rep.b_satisfied

    def test_single_agent_any_b_above_one(self):
        rep = validate_gain_constraints(1, 1.0, 1.0, 0.5, a_N=10.0, b_N=1.01)
        assert rep.b_lower_bound == 0.0
        assert rep.b_satisfied
        assert rep.kappa == pytest.approx(-0.5)

    def test_b_at_most_one_fails_family_requirement(self):
        rep = validate_gain_constraints(2, 1.0, 1.0, 0.5, a_N=10.0, b_N=1.0)
        assert not rep.b_satisfied
        assert not rep.a_satisfied
        assert rep.notes

    def test_degenerate_kappa_reported_not_raised(self):
        # kappa = 0 exactly when b_N equals 2 (N-1) rho_max / rho_min
        rep = validate_gain_constraints(2, 1.0, 1.0, 1.0, a_N=100.0, b_N=2.0)
        assert rep.kappa == 0.0
        assert not rep.satisfied
        assert any("kappa" in n for n in rep.notes)

    def test_invalid_inputs(self):
        with pytest.raises(ValueError):
            validate_gain_constraints(0, 1, 1, 1, 1, 2)
        with pytest.raises(ValueError):
            validate_gain_constraints(2, -1, 1, 1, 1, 2)
        with pytest.raises(ValueError):
            validate_gain_constraints(2, 2, 1, 1, 1, 2)
        with pytest.raises(ValueError):
            validate_gain_constraints(2, 1, 1, 0, 1, 2)


class TestSynthesize:
    def test_three_agent_example(self):
        a_N, b_N = synthesize_gain_params(3, 1.8, 2.2, 0.1, margin=1.1)
        assert b_N == pytest.approx(1.1 * 4.888888888888889, rel=1e-15)
        rep = validate_gain_constraints(3, 1.8, 2.2, 0.1, a_N, b_N)
        assert rep.satisfied

    def test_single_agent_floor(self):
        a_N, b_N = synthesize_gain_params(1, 0.5, 3.0, 0.2, margin=2.0)
        assert b_N == 2.0
        assert validate_gain_constraints(1, 0.5, 3.0, 0.2, a_N, b_N).satisfied

    def test_margin_must_exceed_one(self):
        with pytest.raises(ValueError):
            synthesize_gain_params(3, 1.0, 2.0, 0.1, margin=1.0)

    @given(
        n=st.integers(1, 12),
        rho_min=st.floats(1e-3, 10.0),
        ratio=st.floats(1.0, 20.0),
        eta_bar=st.floats(1e-4, 100.0),
        margin=st.floats(1.001, 5.0),
    )
    @settings(max_examples=300, deadline=None)
    def test_round_trip_always_passes(self, n, rho_min, ratio, eta_bar, margin):
        rho_max = rho_min * ratio
        a_N, b_N = synthesize_gain_params(n, rho_min, rho_max, eta_bar, margin)
        assert math.isfinite(a_N) and math.isfinite(b_N)
        rep = validate_gain_constraints(n, rho_min, rho_max, eta_bar, a_N, b_N)
        assert rep.satisfied
