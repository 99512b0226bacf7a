"""Design constraints linking the base gain constants to the plant bounds.

For N agents whose unknown input coefficients satisfy
``rho_min <= |rho_i| <= rho_max`` and whose Nussbaum-argument drift is
bounded by ``eta_bar``, boundedness of the closed loop is guaranteed when

    b_N > 2 (N - 1) rho_max / rho_min
    a_N > max( 2 eta_bar pi / (rho_min (b_N - 1)),  -eta_bar pi xi / kappa )

with

    kappa = (N - 1) rho_max / b_N - rho_min / 2
    xi    = N / (b_N - 1) + (N + 4) / 6.

The b_N bound forces kappa < 0, which makes the second a_N term positive;
a nonnegative kappa is reported as a violated constraint rather than an
arithmetic error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class GainConstraintReport:
    n_agents: int
    rho_min: float
    rho_max: float
    eta_bar: float
    a_N: float
    b_N: float
    kappa: float
    xi: float
    b_lower_bound: float
    a_lower_bound: float
    b_satisfied: bool
    a_satisfied: bool
    notes: tuple[str, ...] = field(default_factory=tuple)

    @property
    def satisfied(self) -> bool:
        return self.b_satisfied and self.a_satisfied

    def summary(self) -> str:
        lines = [
            f"agents: {self.n_agents}, |rho| in [{self.rho_min}, {self.rho_max}], "
            f"eta_bar = {self.eta_bar}",
            f"kappa = {self.kappa:.6g}, xi = {self.xi:.6g}",
            f"b_N = {self.b_N:.6g}  required > {self.b_lower_bound:.6g} (and > 1): "
            f"{'PASS' if self.b_satisfied else 'FAIL'}",
            f"a_N = {self.a_N:.6g}  required > {self.a_lower_bound:.6g}: "
            f"{'PASS' if self.a_satisfied else 'FAIL'}",
            f"overall: {'PASS' if self.satisfied else 'FAIL'}",
        ]
        lines.extend(f"note: {n}" for n in self.notes)
        return "\n".join(lines)


def _check_inputs(n_agents: int, rho_min: float, rho_max: float, eta_bar: float):
    if n_agents < 1:
        raise ValueError(f"n_agents must be >= 1, got {n_agents}")
    if not 0 < rho_min <= rho_max:
        raise ValueError(f"need 0 < rho_min <= rho_max, got [{rho_min}, {rho_max}]")
    if not eta_bar > 0:
        raise ValueError(f"eta_bar must be positive, got {eta_bar}")


def validate_gain_constraints(n_agents: int, rho_min: float, rho_max: float,
                              eta_bar: float, a_N: float, b_N: float) -> GainConstraintReport:
    """Evaluate both design inequalities for given base constants."""
    _check_inputs(n_agents, rho_min, rho_max, eta_bar)
    notes: list[str] = []
    b_lower = 2.0 * (n_agents - 1) * rho_max / rho_min
    b_ok = b_N > b_lower and b_N > 1.0
    if b_N <= 1.0:
        notes.append(f"b_N = {b_N} does not satisfy the family requirement b_N > 1")

    if b_N > 1.0:
        kappa = (n_agents - 1) * rho_max / b_N - rho_min / 2.0
        xi = n_agents / (b_N - 1.0) + (n_agents + 4.0) / 6.0
        term1 = 2.0 * eta_bar * math.pi / (rho_min * (b_N - 1.0))
        if kappa == 0.0:
            term2 = math.inf
            notes.append("kappa = 0: the second amplitude bound degenerates; "
                         "treated as a violated constraint")
        elif kappa > 0.0:
            term2 = -eta_bar * math.pi * xi / kappa
            notes.append(f"kappa = {kappa:.6g} > 0 (growth-ratio bound not met); "
                         "the second amplitude term is vacuous")
        else:
            term2 = -eta_bar * math.pi * xi / kappa
        a_lower = max(term1, term2)
    else:
        kappa = math.nan
        xi = math.nan
        a_lower = math.inf
        notes.append("amplitude bound undefined for b_N <= 1")

    a_ok = a_N > a_lower and math.isfinite(a_lower)
    return GainConstraintReport(
        n_agents=n_agents, rho_min=rho_min, rho_max=rho_max, eta_bar=eta_bar,
        a_N=a_N, b_N=b_N, kappa=kappa, xi=xi,
        b_lower_bound=b_lower, a_lower_bound=a_lower,
        b_satisfied=b_ok, a_satisfied=a_ok, notes=tuple(notes))


def synthesize_gain_params(n_agents: int, rho_min: float, rho_max: float,
                           eta_bar: float, margin: float = 1.1) -> tuple[float, float]:
    """Smallest-by-construction (a_N, b_N) passing both constraints with the
    given multiplicative margin (> 1); floored at ``margin`` when the
    growth-ratio bound degenerates to zero (single agent)."""
    _check_inputs(n_agents, rho_min, rho_max, eta_bar)
    if not margin > 1.0:
        raise ValueError(f"margin must exceed 1, got {margin}")
    b_lower = 2.0 * (n_agents - 1) * rho_max / rho_min
    b_N = max(margin * b_lower, margin)
    kappa = (n_agents - 1) * rho_max / b_N - rho_min / 2.0
    xi = n_agents / (b_N - 1.0) + (n_agents + 4.0) / 6.0
    a_N = margin * max(2.0 * eta_bar * math.pi / (rho_min * (b_N - 1.0)),
                       -eta_bar * math.pi * xi / kappa)
    return a_N, b_N
