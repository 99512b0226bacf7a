import math

import numpy as np
import pytest

from nussbaumsim import SimConfig, SystemState, rk4_step
from nussbaumsim import config as cfgmod
from nussbaumsim import engine
from nussbaumsim.dynamics import StateDerivative


def scalar_state(x):
    return SystemState(x=np.array([x]), theta_hat=(np.zeros(0),),
                       chi=np.zeros(1), t=0.0)


def exp_deriv(s: SystemState) -> StateDerivative:
    return StateDerivative(dx=s.x.copy(), dtheta_hat=(np.zeros(0),), dchi=np.zeros(1))


class TestRk4Step:
    def test_zero_derivative_fixed_point(self):
        zero = lambda s: StateDerivative(dx=np.zeros(1), dtheta_hat=(np.zeros(0),),
                                         dchi=np.zeros(1))
        s1 = rk4_step(zero, scalar_state(4.2), 0.5)
        assert s1.x[0] == 4.2
        assert s1.t == 0.5

    def test_exponential_single_step(self):
        s1 = rk4_step(exp_deriv, scalar_state(1.0), 0.1)
        # truncated exponential series: sum_{k<=4} 0.1^k / k!
        assert s1.x[0] == pytest.approx(1.1051708333333332, rel=1e-15)
        assert abs(s1.x[0] - math.exp(0.1)) < 1e-7

    def test_fourth_order_convergence(self):
        def integrate(dt):
            s = scalar_state(1.0)
            for _ in range(round(1.0 / dt)):
                s = rk4_step(exp_deriv, s, dt)
            return s.x[0]

        err_coarse = abs(integrate(0.02) - math.e)
        err_fine = abs(integrate(0.01) - math.e)
        assert 12.0 < err_coarse / err_fine < 20.0

    def test_non_finite_derivative_raises(self):
        from nussbaumsim import NonFiniteDerivativeError

        bad = lambda s: StateDerivative(dx=np.array([np.inf]),
                                        dtheta_hat=(np.zeros(0),), dchi=np.zeros(1))
        with pytest.raises(NonFiniteDerivativeError):
            rk4_step(bad, scalar_state(1.0), 0.1)


class TestSimConfig:
    def test_rejects_bad_steps(self):
        with pytest.raises(ValueError):
            SimConfig(dt=-1.0, t_final=1.0)
        with pytest.raises(ValueError):
            SimConfig(dt=2.0, t_final=1.0)
        with pytest.raises(ValueError):
            SimConfig(dt=0.1, t_final=1.0, record_stride=0)
        with pytest.raises(ValueError):
            SimConfig(dt=0.1, t_final=1.0, solver="rk45")

    def test_non_multiple_duration_rejected(self):
        with pytest.raises(ValueError):
            SimConfig(dt=0.3, t_final=1.0).n_steps

    def test_step_count(self):
        assert SimConfig(dt=0.001, t_final=10.0).n_steps == 10_000


def single_agent_config(gain_kind="saturated", **sim_kw):
    data = {
        "schema_version": 1,
        "graph": {"n": 1, "edges": []},
        "agents": [{
            "rho": 2.0, "theta": [1.0],
            "regressor": {"kind": "constant", "coefficients": [0.0]},
            "zeta": 1.0, "gamma": 1.0, "x0": 1.5,
            "theta_hat0": [0.0], "chi0": 0.0,
        }],
        "gain_scheme": ({"kind": "saturated", "a_N": 3.0, "b_N": 3.0,
                         "T_N": 100.0, "M": 4}
                        if gain_kind == "saturated"
                        else {"kind": "traditional", "alpha": 4.0, "beta": 0.2,
                              "exponent_cap": 50.0}),
        "gain_bounds": {"rho_min": 1.0, "rho_max": 3.0},
        "sim": {"dt": sim_kw.get("dt", 0.01), "t_final": sim_kw.get("t_final", 1.0),
                "record_stride": sim_kw.get("record_stride", 1), "solver": "rk4"},
    }
    return cfgmod.from_dict(data)


class TestRun:
    def test_zero_coupling_zero_feature_constant(self):
        cfg = single_agent_config()
        tr = cfgmod.run_scenario(cfg)
        np.testing.assert_array_equal(tr.x, np.full((101, 1), 1.5))
        np.testing.assert_array_equal(tr.u, np.zeros((101, 1)))
        assert tr.blowup is None

    def test_times_uniform(self, novel_run):
        dt = np.diff(novel_run.times)
        np.testing.assert_allclose(dt, 0.01, rtol=1e-12)
        assert novel_run.times[0] == 0.0

    def test_deterministic_repeat(self, novel_cfg):
        a = cfgmod.run_scenario(novel_cfg)
        b = cfgmod.run_scenario(novel_cfg)
        for field in ("times", "x", "u", "u_N", "e", "chi", "nussbaum_gain", "theta_hat"):
            assert np.array_equal(getattr(a, field), getattr(b, field)), field
        assert a.fingerprint == b.fingerprint

    def test_all_recorded_values_finite(self, novel_run, trad_run):
        for tr in (novel_run, trad_run):
            for field in ("x", "u", "u_N", "e", "chi", "nussbaum_gain", "theta_hat"):
                assert np.all(np.isfinite(getattr(tr, field))), field

    def test_step_halving_leaves_terminal_spread(self, novel_cfg):
        base = cfgmod.run_scenario(novel_cfg)
        halved = cfgmod.run_scenario(
            novel_cfg, SimConfig(dt=novel_cfg.sim.dt / 2, t_final=10.0,
                                 record_stride=novel_cfg.sim.record_stride * 2))
        s1 = base.spread()[-1]
        s2 = halved.spread()[-1]
        assert abs(s1 - s2) < 1e-4

    def test_python_fallback_matches_kernel(self, monkeypatch):
        cfg = cfgmod.bundled_scenario("paper_novel")
        sim = SimConfig(dt=1e-3, t_final=0.05, record_stride=1)
        fast = cfgmod.run_scenario(cfg, sim)
        monkeypatch.setattr(engine, "_kernel", None)
        slow = cfgmod.run_scenario(cfg, sim)
        np.testing.assert_allclose(slow.x, fast.x, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(slow.u, fast.u, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(slow.chi, fast.chi, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(slow.theta_hat, fast.theta_hat,
                                   rtol=1e-10, atol=1e-12)

    def test_euler_solver_runs(self):
        cfg = single_agent_config()
        sim = SimConfig(dt=0.01, t_final=0.5, record_stride=1, solver="euler")
        tr = cfgmod.run_scenario(cfg, sim)
        assert tr.n_samples == 51
        np.testing.assert_array_equal(tr.x, np.full((51, 1), 1.5))


class TestBlowup:
    @pytest.fixture()
    def explosive_cfg(self):
        # positive feedback through a wrong-direction constant-sign region,
        # with a tight exponent cap so the gain overflow path triggers
        data = {
            "schema_version": 1,
            "graph": {"n": 2, "edges": [[1, 2, 1.0]]},
            "agents": [
                {"rho": -2.0, "theta": [0.0],
                 "regressor": {"kind": "constant", "coefficients": [0.0]},
                 "zeta": 1.0, "gamma": 50.0, "x0": 1.0, "theta_hat0": [0.0],
                 "chi0": 0.0},
                {"rho": -2.0, "theta": [0.0],
                 "regressor": {"kind": "constant", "coefficients": [0.0]},
                 "zeta": 1.0, "gamma": 50.0, "x0": -1.0, "theta_hat0": [0.0],
                 "chi0": 0.0},
            ],
            "gain_scheme": {"kind": "traditional", "alpha": 4.0, "beta": 0.2,
                            "exponent_cap": 2.0},
            "gain_bounds": {"rho_min": 1.0, "rho_max": 3.0},
            "sim": {"dt": 0.001, "t_final": 5.0, "record_stride": 1,
                    "solver": "rk4"},
        }
        return cfgmod.from_dict(data)

    def test_gain_overflow_truncates_with_record(self, explosive_cfg):
        tr = cfgmod.run_scenario(explosive_cfg)
        assert tr.blowup is not None
        assert tr.blowup.reason == "gain exponent overflow"
        assert 0 < tr.n_samples < 5001
        assert np.all(np.isfinite(tr.u))

    def test_partial_trajectory_is_prefix(self, explosive_cfg):
        full_attempt = cfgmod.run_scenario(explosive_cfg)
        short = cfgmod.run_scenario(
            explosive_cfg,
            SimConfig(dt=0.001, t_final=full_attempt.times[-1], record_stride=1))
        k = short.n_samples
        np.testing.assert_array_equal(full_attempt.x[:k], short.x)
