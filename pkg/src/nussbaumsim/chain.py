"""Per-agent parameter chains for the saturated gain family.

Consecutive agents are coupled by the recurrences

    a_i = b_{i+1}^(M-1) / S_{i+1} * a_{i+1}
    b_i = b_{i+1}^M
    T_i = S_{i+1} * T_{i+1},        S_{i+1} = sum_{n=0}^{M-1} b_{i+1}^n

(agent N is the base and carries the fastest segment subdivision).  These
identities make every extremum of agent i's integral equal in magnitude to
the corresponding extremum of agent i+1, and align agent i's segment
boundaries with every M-th boundary of agent i+1:

    a_i T_i b_i^(n-1) = a_{i+1} T_{i+1} b_{i+1}^(M*n - 1)
    chi_{n,i}         = chi_{M*n, i+1}

Those two facts are what the negative-overlap windows below rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import ChainOverflowError
from .functions import (
    DEFAULT_SEGMENT_HORIZON,
    SaturatedParams,
    eval_saturated_G,
    eval_saturated_N,
    segment_boundary,
    segment_extremum_amplitude,
)

SignCase = Literal["identical", "opposite"]


@dataclass(frozen=True)
class NussbaumChain:
    """Ordered saturated-gain constants for agents 1..N (agent N fastest)."""

    params: tuple[SaturatedParams, ...]

    @property
    def n_agents(self) -> int:
        return len(self.params)

    def gain(self, agent: int, chi: float, horizon: int = DEFAULT_SEGMENT_HORIZON) -> float:
        """N_i(chi) for 1-based agent index."""
        return eval_saturated_N(self.params[agent - 1], chi, horizon)

    def integral(self, agent: int, chi: float, horizon: int = DEFAULT_SEGMENT_HORIZON) -> float:
        """G_i(chi) for 1-based agent index."""
        return eval_saturated_G(self.params[agent - 1], chi, horizon)

    def gain_bound(self, agent: int) -> float:
        return self.params[agent - 1].a


def geometric_sum(b: float, M: int) -> float:
    """sum_{n=0}^{M-1} b^n."""
    total = 0.0
    term = 1.0
    for _ in range(M):
        total += term
        term *= b
    return total


def build_chain(n_agents: int, a_N: float, b_N: float, T_N: float, M: int = 4) -> NussbaumChain:
    """Derive all agents' constants from the base agent's (a_N, b_N, T_N, M)."""
    if n_agents < 1:
        raise ValueError(f"n_agents must be >= 1, got {n_agents}")
    base = SaturatedParams(a=a_N, b=b_N, T=T_N, M=M)
    params = [base]
    for idx in range(n_agents - 1, 0, -1):
        succ = params[0]
        try:
            S = geometric_sum(succ.b, M)
            b_prev = succ.b ** M
            a_prev = succ.b ** (M - 1) / S * succ.a
            T_prev = S * succ.T
        except OverflowError:
            raise ChainOverflowError(
                idx, f"growth ratio overflowed deriving agent {idx} "
                     f"from agent {idx + 1} (b={succ.b})") from None
        if not all(map(math.isfinite, (S, b_prev, a_prev, T_prev))):
            raise ChainOverflowError(
                idx, f"constants overflowed deriving agent {idx}")
        params.insert(0, SaturatedParams(a=a_prev, b=b_prev, T=T_prev, M=M))
    return NussbaumChain(params=tuple(params))


def is_consecutive_pair(slow: SaturatedParams, fast: SaturatedParams,
                        rel_tol: float = 1e-9) -> bool:
    """Whether ``slow`` equals the constants derived from ``fast``."""
    if slow.M != fast.M:
        return False
    S = geometric_sum(fast.b, fast.M)
    return (
        math.isclose(slow.b, fast.b ** fast.M, rel_tol=rel_tol)
        and math.isclose(slow.a, fast.b ** (fast.M - 1) / S * fast.a, rel_tol=rel_tol)
        and math.isclose(slow.T, S * fast.T, rel_tol=rel_tol)
    )


@dataclass(frozen=True)
class NegativeOverlapInterval:
    """Window [chi_in, chi_out] on which both agents' sign-adjusted
    integrals stay at or below half the faster agent's segment minimum."""

    chi_in: float
    chi_out: float
    k: int
    sign_case: SignCase
    fast_segment: int      # segment of the faster agent hosting the window
    slow_segment: int      # segment of the slower agent containing it
    threshold: float       # 0.5 * (segment minimum) < 0

    def __post_init__(self):
        if not self.chi_in < self.chi_out:
            raise ValueError("degenerate interval")


def _window_segments(sign_slow: int, sign_fast: int, k: int) -> tuple[int, int]:
    """Map the two agents' gain signs to (fast segment m, slow segment p).

    The slower agent's integral must be negative after sign adjustment,
    which selects an even (sign_slow > 0) or odd (sign_slow < 0) slow
    segment; within the four fast sub-segments it contains, the second or
    third is picked so the window clears the containment offsets at both
    ends.  A flipped slow sign shifts everything by one slow period.
    """
    if k < 1:
        raise ValueError(f"period index k must be >= 1, got {k}")
    if sign_slow > 0:
        p = 2 * k
        m = 8 * k - 2 if sign_fast > 0 else 8 * k - 1
    else:
        p = 2 * k + 1
        m = 8 * k + 2 if sign_fast > 0 else 8 * k + 3
    return m, p


def overlap_interval_for_signs(fast: SaturatedParams, sign_slow: int, sign_fast: int,
                               k: int, horizon: int = DEFAULT_SEGMENT_HORIZON
                               ) -> NegativeOverlapInterval:
    """Negative-overlap window for arbitrary gain-sign combinations.

    Requires M = 4 (the window construction subdivides each slow segment
    into exactly four fast segments).
    """
    if fast.M != 4:
        raise ValueError(f"window construction requires M = 4, got M = {fast.M}")
    if sign_slow == 0 or sign_fast == 0:
        raise ValueError("gain signs must be nonzero")
    m, p = _window_segments(sign_slow, sign_fast, k)
    left = segment_boundary(fast, m - 1, horizon)
    right = segment_boundary(fast, m, horizon)
    inset = fast.b ** (m - 1) * fast.T * math.pi / 6.0
    amp = segment_extremum_amplitude(fast, m)
    case: SignCase = "identical" if sign_slow == sign_fast else "opposite"
    return NegativeOverlapInterval(
        chi_in=left + inset,
        chi_out=right - inset,
        k=k,
        sign_case=case,
        fast_segment=m,
        slow_segment=p,
        threshold=-0.5 * amp,
    )


def overlap_interval(pair: tuple[SaturatedParams, SaturatedParams],
                     sign_case: SignCase, k: int,
                     horizon: int = DEFAULT_SEGMENT_HORIZON) -> NegativeOverlapInterval:
    """Window for a consecutive (slow, fast) pair with the slower agent's
    gain sign taken positive; ``sign_case`` states whether the faster
    agent's sign matches it."""
    slow, fast = pair
    if not is_consecutive_pair(slow, fast):
        raise ValueError("pair is not linked by the chain recurrences")
    sign_fast = 1 if sign_case == "identical" else -1
    return overlap_interval_for_signs(fast, 1, sign_fast, k, horizon)


def containment_interval(slow: SaturatedParams, fast: SaturatedParams,
                         window: NegativeOverlapInterval,
                         horizon: int = DEFAULT_SEGMENT_HORIZON) -> tuple[float, float]:
    """Sub-interval of the slower agent's segment on which its sign-adjusted
    integral stays at or below the window threshold.

    Strictly contains the window itself; the inset is
    ``b_slow^(p-1) * T_slow * arcsin(|threshold| / amp_slow)``.
    """
    p = window.slow_segment
    amp_slow = segment_extremum_amplitude(slow, p)
    ratio = -window.threshold / amp_slow
    if ratio > 1:
        raise ValueError("threshold exceeds the slower agent's amplitude")
    inset = slow.b ** (p - 1) * slow.T * math.asin(ratio)
    return (segment_boundary(slow, p - 1, horizon) + inset,
            segment_boundary(slow, p, horizon) - inset)
