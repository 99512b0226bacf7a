"""Nussbaum-type gain families.

Two families are implemented:

* a saturated time-elongation family: piecewise half-cosines whose segment
  lengths grow geometrically (ratio ``b``) while the amplitude stays capped
  at ``a``, so the gain never exceeds ``a`` no matter how far the argument
  travels;
* a traditional exponential family ``pref * exp(alpha*|chi|) * sin(chi/beta^i)``
  whose envelope grows without bound, used as the comparison baseline.

The saturated gain on segment ``n`` (counting from 1, covering
``[chi_{n-1}, chi_n)`` with ``chi_n = T*pi*(b^n - 1)/(b - 1)``) is

    N(chi) = (-1)^(n-1) * a * cos(offset / (b^(n-1) * T)),   offset = chi - chi_{n-1}

with even extension for negative arguments.  Its running integral has the
closed form

    G(chi) = (-1)^(n-1) * a * T * b^(n-1) * sin(offset / (b^(n-1) * T))

(odd extension), which vanishes at every segment boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import GainOverflowError, SegmentHorizonError

DEFAULT_SEGMENT_HORIZON = 64

# boundaries beyond this magnitude are treated as unrepresentable
_OVERFLOW_LIMIT = 1e306


@dataclass(frozen=True)
class SaturatedParams:
    """Constants of one agent's saturated gain: amplitude ``a``, segment
    growth ratio ``b`` (> 1), base half-period scale ``T`` (argument units
    per pi), and the per-agent frequency subdivision factor ``M`` (>= 4)."""

    a: float
    b: float
    T: float
    M: int = 4

    def __post_init__(self):
        if not self.a > 0:
            raise ValueError(f"amplitude a must be positive, got {self.a}")
        if not self.b > 1:
            raise ValueError(f"growth ratio b must exceed 1, got {self.b}")
        if not self.T > 0:
            raise ValueError(f"period scale T must be positive, got {self.T}")
        if int(self.M) != self.M or self.M < 4:
            raise ValueError(f"subdivision factor M must be an integer >= 4, got {self.M}")


@dataclass(frozen=True)
class TraditionalParams:
    """Constants of the exponential baseline gain for one agent.

    ``agent_index`` selects the frequency 1/beta^i so that no two agents
    share a frequency.
    """

    alpha: float
    beta: float
    agent_index: int
    exponent_cap: float = 50.0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0 < self.beta < 1:
            raise ValueError(f"beta must lie in (0, 1), got {self.beta}")
        if self.agent_index < 1:
            raise ValueError(f"agent_index must be >= 1, got {self.agent_index}")


@lru_cache(maxsize=256)
def _segment_table(params: SaturatedParams, horizon: int):
    """Boundary and length arrays for segments 1..m, m <= horizon.

    Accumulates lengths ``T*pi*b^(n-1)`` iteratively; stops early once the
    next boundary would overflow.  Iterative accumulation keeps boundaries
    and lengths mutually consistent even for huge ``b`` (e.g. 3**16).
    """
    bounds = [0.0]
    lengths = []
    length = params.T * math.pi
    for _ in range(horizon):
        nxt = bounds[-1] + length
        if not math.isfinite(nxt) or nxt > _OVERFLOW_LIMIT:
            break
        lengths.append(length)
        bounds.append(nxt)
        length *= params.b
        if not math.isfinite(length):
            break
    return np.asarray(bounds), np.asarray(lengths)


def max_representable_segment(params: SaturatedParams,
                              horizon: int = DEFAULT_SEGMENT_HORIZON) -> int:
    """Largest segment index with a representable right boundary."""
    bounds, _ = _segment_table(params, horizon)
    return len(bounds) - 1


def segment_boundary(params: SaturatedParams, n: int,
                     horizon: int = DEFAULT_SEGMENT_HORIZON) -> float:
    """Right end ``chi_n`` of segment ``n``; ``chi_0 = 0``."""
    if n < 0:
        raise ValueError(f"segment index must be >= 0, got {n}")
    bounds, _ = _segment_table(params, horizon)
    if n >= len(bounds):
        raise SegmentHorizonError(
            f"segment horizon exceeded: boundary {n} not representable "
            f"within {horizon} segments for b={params.b}, T={params.T}")
    return float(bounds[n])


def locate_segment(params: SaturatedParams, chi: float,
                   horizon: int = DEFAULT_SEGMENT_HORIZON) -> tuple[int, float]:
    """Segment index ``n >= 1`` and offset into it for ``|chi|``.

    Negative arguments are located by magnitude; the parity of the
    evaluation functions supplies the symmetry.
    """
    if not math.isfinite(chi):
        raise SegmentHorizonError(f"cannot locate non-finite argument {chi}")
    c = abs(chi)
    bounds, _ = _segment_table(params, horizon)
    if c >= bounds[-1]:
        raise SegmentHorizonError(
            f"segment horizon exceeded: |chi|={c} beyond boundary "
            f"{bounds[-1]} ({len(bounds) - 1} segments)")
    n = int(np.searchsorted(bounds, c, side="right"))
    return n, c - float(bounds[n - 1])


def _locate_array(params: SaturatedParams, chi: np.ndarray, horizon: int):
    bounds, lengths = _segment_table(params, horizon)
    c = np.abs(chi)
    if not np.all(np.isfinite(c)):
        raise SegmentHorizonError("cannot locate non-finite argument")
    if np.any(c >= bounds[-1]):
        worst = float(np.max(c))
        raise SegmentHorizonError(
            f"segment horizon exceeded: |chi|={worst} beyond boundary {bounds[-1]}")
    n = np.searchsorted(bounds, c, side="right")
    return n, c - bounds[n - 1], lengths[n - 1]


def eval_saturated_N(params: SaturatedParams, chi,
                     horizon: int = DEFAULT_SEGMENT_HORIZON):
    """Saturated gain N(chi); even in chi, |N| <= a everywhere.

    Accepts scalars or arrays.
    """
    arr = np.asarray(chi, dtype=float)
    n, offset, length = _locate_array(params, arr, horizon)
    sign = np.where(n % 2 == 1, 1.0, -1.0)
    val = sign * params.a * np.cos(offset * np.pi / length)
    return float(val) if np.isscalar(chi) or arr.ndim == 0 else val


def eval_saturated_G(params: SaturatedParams, chi,
                     horizon: int = DEFAULT_SEGMENT_HORIZON):
    """Running integral G(chi) of the saturated gain; odd in chi.

    Zero at every segment boundary; extremum magnitude on segment n is
    ``a * T * b^(n-1)``.
    """
    arr = np.asarray(chi, dtype=float)
    n, offset, length = _locate_array(params, arr, horizon)
    sign = np.where(n % 2 == 1, 1.0, -1.0)
    amplitude = params.a * length / np.pi
    val = sign * amplitude * np.sin(offset * np.pi / length)
    val = np.where(arr < 0, -val, val)
    return float(val) if np.isscalar(chi) or arr.ndim == 0 else val


def segment_extremum_amplitude(params: SaturatedParams, n: int) -> float:
    """|G| at the midpoint of segment n: ``a * T * b^(n-1)``."""
    if n < 1:
        raise ValueError(f"segment index must be >= 1, got {n}")
    amp = params.a * params.T * params.b ** (n - 1)
    if not math.isfinite(amp):
        raise SegmentHorizonError(f"extremum amplitude overflows at segment {n}")
    return amp


def traditional_prefactor(params: TraditionalParams) -> float:
    """Amplitude normalisation sqrt(alpha^2 beta^(2i) + 1) / beta^i."""
    bi = params.beta ** params.agent_index
    return math.sqrt(params.alpha ** 2 * bi * bi + 1.0) / bi


def eval_traditional_N(params: TraditionalParams, chi: float) -> float:
    """Exponential baseline gain; odd in chi, unbounded envelope."""
    if not math.isfinite(chi):
        raise GainOverflowError(f"cannot evaluate non-finite argument {chi}")
    if params.alpha * abs(chi) > params.exponent_cap:
        raise GainOverflowError(
            f"exponent cap exceeded: alpha*|chi| = {params.alpha * abs(chi)} "
            f"> {params.exponent_cap}")
    bi = params.beta ** params.agent_index
    return traditional_prefactor(params) * math.exp(params.alpha * abs(chi)) * math.sin(chi / bi)
