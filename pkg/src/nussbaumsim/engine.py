"""Deterministic fixed-step integration of the closed loop.

Fixed-step classical RK4 (or forward Euler) over the stacked state
``(x, chi, theta_hat)``.  Fixed stepping is deliberate: every recorded
sample lands on an exact multiple of ``dt * record_stride``, so metrics and
traces are bit-reproducible across runs of the same configuration.

The hot loop runs through the compiled kernel when numba is importable and
falls back to a pure-Python loop otherwise; both implement the same
recurrence.
"""

from __future__ import annotations


from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dynamics import (
    AgentSpec,
    Graph,
    StateDerivative,
    SystemState,
    closed_loop_derivative,
    laplacian,
)
from .errors import NonFiniteDerivativeError

try:
    from . import _kernel
except ImportError:  # numba unavailable; pure-Python loop only
    _kernel = None

SOLVERS = ("rk4", "euler")


@dataclass(frozen=True)
class SimConfig:
    """Integration settings: step, duration, recording stride, solver."""

    dt: float
    t_final: float
    record_stride: int = 10
    solver: str = "rk4"

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be positive, got {self.dt}")
        if self.dt > self.t_final:
            raise ValueError(f"dt={self.dt} exceeds t_final={self.t_final}")
        if self.record_stride < 1 or int(self.record_stride) != self.record_stride:
            raise ValueError(f"record_stride must be a positive integer, "
                             f"got {self.record_stride}")
        if self.solver not in SOLVERS:
            raise ValueError(f"solver must be one of {SOLVERS}, got {self.solver!r}")

    @property
    def n_steps(self) -> int:
        steps = round(self.t_final / self.dt)
        if abs(steps * self.dt - self.t_final) > 1e-9 * max(1.0, self.t_final):
            raise ValueError(f"t_final={self.t_final} is not an integer "
                             f"multiple of dt={self.dt}")
        return int(steps)


@dataclass(frozen=True)
class BlowupRecord:
    step: int
    time: float
    reason: str


@dataclass(frozen=True)
class Trajectory:
    """Recorded closed-loop run.

    All per-sample arrays share the first dimension; ``theta_hat`` is stored
    flat across agents with ``theta_offsets`` marking each agent's slice.
    ``blowup`` is set when integration aborted; the arrays then hold the
    portion recorded before the failure.
    """

    times: np.ndarray
    x: np.ndarray
    u: np.ndarray
    u_N: np.ndarray
    e: np.ndarray
    chi: np.ndarray
    nussbaum_gain: np.ndarray
    theta_hat: np.ndarray
    theta_offsets: tuple[int, ...]
    fingerprint: str
    blowup: BlowupRecord | None = None

    @property
    def n_agents(self) -> int:
        return self.x.shape[1]

    @property
    def n_samples(self) -> int:
        return self.x.shape[0]

    def theta_hat_agent(self, i: int) -> np.ndarray:
        """Estimate history for 0-based agent ``i``."""
        return self.theta_hat[:, self.theta_offsets[i]:self.theta_offsets[i + 1]]

    def spread(self) -> np.ndarray:
        """Max pairwise state disagreement per sample."""
        return self.x.max(axis=1) - self.x.min(axis=1)


def _state_combo(s: SystemState, deriv: StateDerivative, c: float, dt_t: float) -> SystemState:
    return SystemState(
        x=s.x + c * deriv.dx,
        theta_hat=tuple(th + c * dth for th, dth in zip(s.theta_hat, deriv.dtheta_hat)),
        chi=s.chi + c * deriv.dchi,
        t=s.t + dt_t,
    )


def _check_finite(d: StateDerivative):
    if not (np.all(np.isfinite(d.dx)) and np.all(np.isfinite(d.dchi))
            and all(np.all(np.isfinite(dth)) for dth in d.dtheta_hat)):
        raise NonFiniteDerivativeError("state derivative is not finite")


def rk4_step(deriv: Callable[[SystemState], StateDerivative],
             s: SystemState, dt: float) -> SystemState:
    """One classical Runge-Kutta update of the full state."""
    k1 = deriv(s)
    _check_finite(k1)
    k2 = deriv(_state_combo(s, k1, 0.5 * dt, 0.5 * dt))
    _check_finite(k2)
    k3 = deriv(_state_combo(s, k2, 0.5 * dt, 0.5 * dt))
    _check_finite(k3)
    k4 = deriv(_state_combo(s, k3, dt, dt))
    _check_finite(k4)
    sixth = dt / 6.0
    return SystemState(
        x=s.x + sixth * (k1.dx + 2.0 * k2.dx + 2.0 * k3.dx + k4.dx),
        theta_hat=tuple(
            th + sixth * (a + 2.0 * b + 2.0 * c + d)
            for th, a, b, c, d in zip(s.theta_hat,
                                      k1.dtheta_hat, k2.dtheta_hat,
                                      k3.dtheta_hat, k4.dtheta_hat)),
        chi=s.chi + sixth * (k1.dchi + 2.0 * k2.dchi + 2.0 * k3.dchi + k4.dchi),
        t=s.t + dt,
    )


def euler_step(deriv: Callable[[SystemState], StateDerivative],
               s: SystemState, dt: float) -> SystemState:
    k1 = deriv(s)
    _check_finite(k1)
    return _state_combo(s, k1, dt, dt)


_BLOWUP_REASONS = {1: "non-finite state", 2: "segment horizon exceeded",
                   3: "gain exponent overflow"}


def simulate(graph: Graph, agents: Sequence[AgentSpec], scheme,
             sim: SimConfig, fingerprint: str = "") -> Trajectory:
    """Integrate the closed loop and record every ``record_stride``-th step.

    ``scheme`` is a gain scheme (see ``config``) exposing ``kernel_args`` and
    ``evaluators``.  On blowup the trajectory is truncated at the last
    complete sample and carries a :class:`BlowupRecord`.
    """
    n = graph.n
    steps = sim.n_steps
    th_off = np.zeros(n + 1, dtype=np.int64)
    for i, agent in enumerate(agents):
        th_off[i + 1] = th_off[i] + agent.regressor.dim
    total = int(th_off[-1])

    if _kernel is not None:
        arrays, r, blow_step, status = _run_kernel(graph, agents, scheme, sim,
                                                   th_off, total)
        X, CHI, TH, U, E, UN, G = (a[:r] for a in arrays)
    else:
        X, CHI, TH, U, E, UN, G, r, blow_step, status = _run_python(
            graph, agents, scheme, sim, th_off, total)

    stride = sim.record_stride
    times = np.arange(r) * (sim.dt * stride)
    blow = None
    if status != 0:
        blow = BlowupRecord(step=blow_step, time=blow_step * sim.dt,
                            reason=_BLOWUP_REASONS.get(status, "unknown"))
    return Trajectory(times=times, x=X, u=U, u_N=UN, e=E, chi=CHI,
                      nussbaum_gain=G, theta_hat=TH,
                      theta_offsets=tuple(int(v) for v in th_off),
                      fingerprint=fingerprint, blowup=blow)


def _pack_regressors(agents: Sequence[AgentSpec]):
    kind_codes = {"sine_of_state": 0, "cosine_of_state": 1,
                  "identity_of_state": 2, "polynomial": 3, "constant": 4}
    kinds = np.array([kind_codes[a.regressor.kind] for a in agents], dtype=np.int64)
    pars: list[float] = []
    off = [0]
    for a in agents:
        pars.extend(a.regressor.coefficients)
        off.append(len(pars))
    return kinds, np.asarray(pars, dtype=float), np.asarray(off, dtype=np.int64)


def _run_kernel(graph: Graph, agents, scheme, sim: SimConfig, th_off, total):
    n = graph.n
    L = laplacian(graph)
    rho = np.array([a.rho for a in agents])
    theta = np.concatenate([np.asarray(a.theta, dtype=float) for a in agents]) \
        if total else np.zeros(0)
    zeta = np.array([a.zeta for a in agents])
    gamma = np.array([a.gamma for a in agents])
    kinds, reg_pars, reg_off = _pack_regressors(agents)
    s0 = np.concatenate([
        np.array([a.x0 for a in agents], dtype=float),
        np.array([a.chi0 for a in agents], dtype=float),
        np.concatenate([np.asarray(a.theta_hat0, dtype=float) for a in agents])
        if total else np.zeros(0),
    ])
    (scheme_code, sat_a, sat_b, sat_T, horizon,
     trad_pref, trad_alpha, trad_beta_pow, trad_cap) = scheme.kernel_args(len(agents))
    solver_code = _kernel.SOLVER_RK4 if sim.solver == "rk4" else _kernel.SOLVER_EULER
    out = _kernel.run_loop(s0, n, L, rho, theta, th_off, zeta, gamma,
                           kinds, reg_pars, reg_off,
                           scheme_code, sat_a, sat_b, sat_T, horizon,
                           trad_pref, trad_alpha, trad_beta_pow, trad_cap,
                           sim.dt, sim.n_steps, sim.record_stride, solver_code)
    X, CHI, TH, U, E, UN, G, r, blow_step, status = out
    return (X, CHI, TH, U, E, UN, G), r, blow_step, status


def _run_python(graph: Graph, agents, scheme, sim: SimConfig, th_off, total):
    """Reference loop; same recurrence as the kernel, plain Python."""
    from .errors import GainOverflowError, SegmentHorizonError

    n = graph.n
    gains = scheme.evaluators(len(agents))
    steps = sim.n_steps
    stride = sim.record_stride
    nrec = steps // stride + 1
    X = np.empty((nrec, n)); CHI = np.empty((nrec, n)); TH = np.empty((nrec, total))
    U = np.empty((nrec, n)); E = np.empty((nrec, n)); UN = np.empty((nrec, n))
    G = np.empty((nrec, n))
    state = SystemState(
        x=np.array([a.x0 for a in agents], dtype=float),
        theta_hat=tuple(np.asarray(a.theta_hat0, dtype=float) for a in agents),
        chi=np.array([a.chi0 for a in agents], dtype=float),
        t=0.0)
    step_fn = rk4_step if sim.solver == "rk4" else euler_step

    def deriv(s: SystemState) -> StateDerivative:
        return closed_loop_derivative(graph, agents, gains, s)

    from .dynamics import control_step
    r = 0
    for k in range(steps + 1):
        try:
            out = control_step(graph, agents, gains, state)
        except SegmentHorizonError:
            return X[:r], CHI[:r], TH[:r], U[:r], E[:r], UN[:r], G[:r], r, k, 2
        except GainOverflowError:
            return X[:r], CHI[:r], TH[:r], U[:r], E[:r], UN[:r], G[:r], r, k, 3
        if k % stride == 0:
            X[r] = state.x
            CHI[r] = state.chi
            TH[r] = np.concatenate(state.theta_hat) if total else np.zeros(0)
            U[r] = out.u; E[r] = out.e; UN[r] = out.u_N; G[r] = out.nussbaum_gain
            r += 1
        if k == steps:
            break
        try:
            state = step_fn(deriv, state, sim.dt)
        except (SegmentHorizonError, GainOverflowError, NonFiniteDerivativeError) as exc:
            code = {SegmentHorizonError: 2, GainOverflowError: 3}.get(type(exc), 1)
            return X[:r], CHI[:r], TH[:r], U[:r], E[:r], UN[:r], G[:r], r, k, code
        if not (np.all(np.isfinite(state.x)) and np.all(np.isfinite(state.chi))):
            return X[:r], CHI[:r], TH[:r], U[:r], E[:r], UN[:r], G[:r], r, k, 1
    return X[:r], CHI[:r], TH[:r], U[:r], E[:r], UN[:r], G[:r], r, -1, 0
