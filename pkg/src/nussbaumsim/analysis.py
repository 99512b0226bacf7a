"""Trajectory metrics and numerical certification of the gain-family claims.

Everything operates on recorded samples only, so results are reproducible
for a fixed scenario fingerprint regardless of platform timing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import (
    NegativeOverlapInterval,
    NussbaumChain,
    containment_interval,
    overlap_interval_for_signs,
)
from .config import ScenarioConfig
from .dynamics import laplacian
from .engine import Trajectory
from .functions import SaturatedParams, eval_saturated_G, segment_boundary

DEFAULT_CONSENSUS_TOL = 0.05


# ---------------------------------------------------------------------------
# run metrics

@dataclass(frozen=True)
class MetricsReport:
    """Per-agent peak control magnitude and consensus timing."""

    mai: tuple[float, ...]
    settling_time: float | None
    final_spread: float
    consensus_tolerance: float

    def text(self) -> str:
        lines = ["run metrics"]
        for i, v in enumerate(self.mai, start=1):
            lines.append(f"  max |u_{i}| = {v!r}")
        settled = ("not settled" if self.settling_time is None
                   else f"{self.settling_time!r} s")
        lines.append(f"  settling time (spread <= {self.consensus_tolerance}): {settled}")
        lines.append(f"  final spread = {self.final_spread!r}")
        return "\n".join(lines)


def compute_metrics(tr: Trajectory,
                    consensus_tol: float = DEFAULT_CONSENSUS_TOL) -> MetricsReport:
    """Peak |u_i| per agent and the first time the spread stays small.

    The settling time is the earliest recorded instant after which the max
    pairwise spread never exceeds ``consensus_tol`` again.
    """
    if tr.n_samples == 0:
        raise ValueError("empty trajectory")
    mai = tuple(float(v) for v in np.max(np.abs(tr.u), axis=0))
    spread = tr.spread()
    above = np.nonzero(spread > consensus_tol)[0]
    if len(above) == 0:
        settling = float(tr.times[0])
    elif above[-1] + 1 < len(spread):
        settling = float(tr.times[above[-1] + 1])
    else:
        settling = None
    return MetricsReport(mai=mai, settling_time=settling,
                         final_spread=float(spread[-1]),
                         consensus_tolerance=consensus_tol)


# ---------------------------------------------------------------------------
# Lyapunov accounting

@dataclass(frozen=True)
class LyapunovTrace:
    """Energy bookkeeping along a run.

    ``V`` is the disagreement-plus-estimation energy
    ``0.5 x'Lx + 0.5 theta_tilde' H theta_tilde`` (H = diag(1/zeta)).
    ``rhs`` accumulates the gain-weighted argument drift
    ``sum_i int (1/gamma_i - (rho_i/gamma_i) N_i) chi_dot_i`` plus the
    initial offset ``delta = V(0)``, by trapezoid over recorded samples.
    Along exact dynamics ``rhs - V`` equals the accumulated error energy
    ``sum_i int e_i^2``, which is stored independently in
    ``error_energy``; ``residual = rhs - V`` must therefore be nonnegative
    and nondecreasing up to quadrature error.
    """

    times: np.ndarray
    V: np.ndarray
    rhs: np.ndarray
    residual: np.ndarray
    error_energy: np.ndarray
    delta: float
    H: np.ndarray
    theta_tilde: np.ndarray


def _cumtrapz(y: np.ndarray, t: np.ndarray) -> np.ndarray:
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def lyapunov_values(tr: Trajectory, cfg: ScenarioConfig) -> np.ndarray:
    """V per sample, using the scenario's ground-truth parameters."""
    L = laplacian(cfg.graph.build())
    zeta = np.array([a.zeta for a in cfg.agents])
    theta = np.concatenate([np.asarray(a.theta) for a in cfg.agents])
    quad = 0.5 * np.einsum("ki,ij,kj->k", tr.x, L, tr.x)
    tilde = tr.theta_hat - theta
    inv_zeta = np.concatenate([
        np.full(a.regressor.dim, 1.0 / a.zeta) for a in cfg.agents])
    est = 0.5 * np.sum(tilde * tilde * inv_zeta, axis=1)
    return quad + est


def lyapunov_trace(tr: Trajectory, cfg: ScenarioConfig) -> LyapunovTrace:
    if tr.n_samples == 0:
        raise ValueError("empty trajectory")
    rho = np.array([a.rho for a in cfg.agents])
    gamma = np.array([a.gamma for a in cfg.agents])
    theta = np.concatenate([np.asarray(a.theta) for a in cfg.agents])
    inv_zeta = np.array([1.0 / a.zeta for a in cfg.agents])

    V = lyapunov_values(tr, cfg)
    chidot = gamma * tr.e * tr.u_N
    integrand = np.sum((1.0 / gamma - (rho / gamma) * tr.nussbaum_gain) * chidot,
                       axis=1)
    delta = float(V[0])
    rhs = delta + _cumtrapz(integrand, tr.times)
    error_energy = _cumtrapz(np.sum(tr.e ** 2, axis=1), tr.times)
    return LyapunovTrace(times=tr.times, V=V, rhs=rhs, residual=rhs - V,
                         error_energy=error_energy, delta=delta,
                         H=inv_zeta, theta_tilde=tr.theta_hat - theta)


# ---------------------------------------------------------------------------
# integral-ratio profile

@dataclass(frozen=True)
class GainRatioReport:
    """Measured G/chi at each segment extremum against the closed-form limit
    ``2 a (b - 1) / (pi (b + 1))`` (with alternating sign)."""

    ratio_sequence: tuple[tuple[int, float], ...]
    limiting_constant: float
    max_deviation_from_limit: float
    sign_alternation_ok: bool


def gain_ratio_profile(params: SaturatedParams, n_segments: int,
                       horizon: int = 64) -> GainRatioReport:
    """Evaluate the extremum ratios G(chi*)/chi* over the first segments.

    The magnitudes converge to a finite constant; the sign alternates with
    segment parity.  ``max_deviation_from_limit`` is taken over the last
    quarter of the computed sequence.
    """
    if n_segments < 1:
        raise ValueError("need at least one segment")
    limit = 2.0 * params.a * (params.b - 1.0) / (math.pi * (params.b + 1.0))
    seq = []
    alternation = True
    for n in range(1, n_segments + 1):
        chi_star = (segment_boundary(params, n - 1, horizon)
                    + 0.5 * params.b ** (n - 1) * params.T * math.pi)
        ratio = eval_saturated_G(params, chi_star, horizon) / chi_star
        seq.append((n, float(ratio)))
        if math.copysign(1.0, ratio) != (1.0 if n % 2 == 1 else -1.0):
            alternation = False
    tail = seq[-max(1, n_segments // 4):]
    max_dev = max(abs(abs(r) - limit) / limit for _, r in tail)
    return GainRatioReport(ratio_sequence=tuple(seq), limiting_constant=limit,
                           max_deviation_from_limit=max_dev,
                           sign_alternation_ok=alternation)


# ---------------------------------------------------------------------------
# negative-overlap certification

@dataclass(frozen=True)
class OverlapCertificate:
    """Grid-scan verdict for one window.

    Margins are ``threshold - max(sign * G)``; in exact arithmetic both are
    nonnegative, with equality attained at the window endpoints, so the
    check allows a relative slack of ``rel_slack * |threshold|``.
    """

    interval: NegativeOverlapInterval
    sign_slow: int
    sign_fast: int
    slow_margin: float
    fast_margin: float
    containment_ok: bool
    passed: bool
    grid_points: int

    @property
    def worst_margin(self) -> float:
        return min(self.slow_margin, self.fast_margin)


def certify_negative_overlap(slow: SaturatedParams, fast: SaturatedParams,
                             sign_slow: int, sign_fast: int, k: int,
                             grid_points: int = 10_000,
                             rel_slack: float = 1e-9,
                             horizon: int = 64,
                             interval: NegativeOverlapInterval | None = None
                             ) -> OverlapCertificate:
    """Scan both agents' sign-adjusted integrals over the overlap window.

    Passes when both stay at or below half the faster agent's segment
    minimum and the window is strictly inside the slower agent's own
    admissible sub-interval.
    """
    if grid_points < 1000:
        raise ValueError("grid must have at least 1000 points")
    if interval is None:
        interval = overlap_interval_for_signs(fast, sign_slow, sign_fast, k, horizon)
    grid = np.linspace(interval.chi_in, interval.chi_out, grid_points)
    g_fast = np.max(sign_fast * eval_saturated_G(fast, grid, horizon))
    g_slow = np.max(sign_slow * eval_saturated_G(slow, grid, horizon))
    thr = interval.threshold
    slack = rel_slack * abs(thr)
    fast_margin = thr - float(g_fast)
    slow_margin = thr - float(g_slow)
    lo, hi = containment_interval(slow, fast, interval, horizon)
    containment = lo < interval.chi_in and hi > interval.chi_out
    passed = (fast_margin >= -slack and slow_margin >= -slack
              and containment and thr < 0)
    return OverlapCertificate(interval=interval, sign_slow=sign_slow,
                              sign_fast=sign_fast, slow_margin=slow_margin,
                              fast_margin=fast_margin, containment_ok=containment,
                              passed=passed, grid_points=grid_points)


SIGN_COMBINATIONS = ((1, 1), (1, -1), (-1, 1), (-1, -1))


def certify_chain(chain: NussbaumChain, k_values=(1, 2),
                  grid_points: int = 10_000) -> list[OverlapCertificate]:
    """Certify every consecutive pair, all sign combinations, all k."""
    certs = []
    for i in range(chain.n_agents - 1):
        slow, fast = chain.params[i], chain.params[i + 1]
        for k in k_values:
            for s_slow, s_fast in SIGN_COMBINATIONS:
                certs.append(certify_negative_overlap(
                    slow, fast, s_slow, s_fast, k, grid_points))
    return certs


# ---------------------------------------------------------------------------
# scheme comparison

@dataclass(frozen=True)
class ComparisonReport:
    """Per-agent peak-control reductions of run A relative to run B."""

    mai_a: tuple[float, ...]
    mai_b: tuple[float, ...]
    reductions: tuple[float | None, ...]
    settling_a: float | None
    settling_b: float | None
    settling_delta: float | None
    blowup_a: str | None
    blowup_b: str | None

    def text(self) -> str:
        lines = ["scheme comparison (A vs B)"]
        for i, (ma, mb, red) in enumerate(zip(self.mai_a, self.mai_b,
                                              self.reductions), start=1):
            r = "undefined (MAI_b = 0)" if red is None else f"{100.0 * red:.1f}%"
            lines.append(f"  agent {i}: MAI_a = {ma!r}, MAI_b = {mb!r}, "
                         f"reduction = {r}")
        fmt = lambda s: "not settled" if s is None else f"{s!r} s"
        lines.append(f"  settling: A = {fmt(self.settling_a)}, "
                     f"B = {fmt(self.settling_b)}")
        if self.settling_delta is not None:
            lines.append(f"  settling delta (A - B) = {self.settling_delta!r} s")
        if self.blowup_a:
            lines.append(f"  run A blew up: {self.blowup_a}")
        if self.blowup_b:
            lines.append(f"  run B blew up: {self.blowup_b}")
        return "\n".join(lines)


def compare_runs(tr_a: Trajectory, tr_b: Trajectory,
                 consensus_tol: float = DEFAULT_CONSENSUS_TOL) -> ComparisonReport:
    if tr_a.n_agents != tr_b.n_agents:
        raise ValueError("trajectories have different agent counts")
    ma = compute_metrics(tr_a, consensus_tol)
    mb = compute_metrics(tr_b, consensus_tol)
    reductions = tuple(
        None if b == 0 else 1.0 - a / b
        for a, b in zip(ma.mai, mb.mai))
    delta = (None if ma.settling_time is None or mb.settling_time is None
             else ma.settling_time - mb.settling_time)
    fmt_blow = lambda tr: (f"{tr.blowup.reason} at step {tr.blowup.step} "
                           f"(t = {tr.blowup.time})") if tr.blowup else None
    return ComparisonReport(mai_a=ma.mai, mai_b=mb.mai, reductions=reductions,
                            settling_a=ma.settling_time, settling_b=mb.settling_time,
                            settling_delta=delta,
                            blowup_a=fmt_blow(tr_a), blowup_b=fmt_blow(tr_b))
