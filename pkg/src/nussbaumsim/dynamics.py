"""Communication graph, plant models, and the distributed control laws.

Each agent is a scalar first-order plant with unknown input coefficient and
linearly parameterized drift,

    xdot_i = rho_i * u_i + psi_i(x_i)^T theta_i,

driven through a Nussbaum-modulated auxiliary control

    e_i   = sum_j a_ij (x_i - x_j)          (combined error, e = L x)
    u_N,i = e_i + psi_i(x_i)^T theta_hat_i
    u_i   = -N_i(chi_i) * u_N,i

with adaptation

    theta_hat_dot_i = zeta_i * psi_i(x_i) * e_i
    chi_dot_i       = gamma_i * e_i * u_N,i.

Everything here is a pure function of immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

REGRESSOR_KINDS = ("sine_of_state", "cosine_of_state", "identity_of_state",
                   "polynomial", "constant")


@dataclass(frozen=True)
class Regressor:
    """State-dependent feature vector psi(x).

    ``polynomial`` produces the scaled monomials (c_0, c_1 x, c_2 x^2, ...);
    ``constant`` returns its vector unchanged.  The three scalar kinds have
    dimension 1.
    """

    kind: str
    coefficients: tuple[float, ...] = ()

    def __post_init__(self):
        if self.kind not in REGRESSOR_KINDS:
            raise ValueError(f"unknown regressor kind {self.kind!r}")
        if self.kind in ("polynomial", "constant") and not self.coefficients:
            raise ValueError(f"regressor kind {self.kind!r} needs coefficients")

    @property
    def dim(self) -> int:
        if self.kind in ("polynomial", "constant"):
            return len(self.coefficients)
        return 1

    def evaluate(self, x: float) -> np.ndarray:
        if self.kind == "sine_of_state":
            return np.array([np.sin(x)])
        if self.kind == "cosine_of_state":
            return np.array([np.cos(x)])
        if self.kind == "identity_of_state":
            return np.array([x])
        if self.kind == "polynomial":
            c = np.asarray(self.coefficients)
            return c * x ** np.arange(len(c))
        return np.asarray(self.coefficients, dtype=float)


@dataclass(frozen=True)
class AgentSpec:
    """Ground-truth plant constants plus controller gains for one agent."""

    rho: float
    theta: tuple[float, ...]
    regressor: Regressor
    zeta: float
    gamma: float
    x0: float
    theta_hat0: tuple[float, ...]
    chi0: float = 0.0

    def __post_init__(self):
        if self.rho == 0:
            raise ValueError("rho must be nonzero")
        if not self.zeta > 0:
            raise ValueError(f"zeta must be positive, got {self.zeta}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if len(self.theta) != self.regressor.dim:
            raise ValueError(f"theta has length {len(self.theta)}, "
                             f"regressor dimension is {self.regressor.dim}")
        if len(self.theta_hat0) != self.regressor.dim:
            raise ValueError(f"theta_hat0 has length {len(self.theta_hat0)}, "
                             f"regressor dimension is {self.regressor.dim}")


class Graph:
    """Undirected weighted graph on n nodes (symmetric, zero diagonal)."""

    def __init__(self, adjacency: np.ndarray):
        adj = np.array(adjacency, dtype=float)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {adj.shape}")
        if np.any(adj < 0):
            raise ValueError("adjacency weights must be nonnegative")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(adj) != 0):
            raise ValueError("adjacency diagonal must be zero (no self-edges)")
        adj.flags.writeable = False
        self.adjacency = adj
        self.n = adj.shape[0]

    def __eq__(self, other):
        return isinstance(other, Graph) and np.array_equal(self.adjacency, other.adjacency)

    def is_connected(self) -> bool:
        seen = {0}
        stack = [0]
        while stack:
            i = stack.pop()
            for j in np.nonzero(self.adjacency[i] > 0)[0]:
                if int(j) not in seen:
                    seen.add(int(j))
                    stack.append(int(j))
        return len(seen) == self.n


def laplacian(g: Graph) -> np.ndarray:
    """L = diag(row sums) - A; symmetric, zero row sums."""
    return np.diag(g.adjacency.sum(axis=1)) - g.adjacency


def combined_error(g: Graph, x: np.ndarray) -> np.ndarray:
    """e = L x, elementwise e_i = sum_j a_ij (x_i - x_j)."""
    x = np.asarray(x, dtype=float)
    if x.shape != (g.n,):
        raise ValueError(f"state has shape {x.shape}, expected ({g.n},)")
    return laplacian(g) @ x


@dataclass(frozen=True)
class SystemState:
    """Closed-loop state: agent states, parameter estimates, gain arguments."""

    x: np.ndarray
    theta_hat: tuple[np.ndarray, ...]
    chi: np.ndarray
    t: float = 0.0


@dataclass(frozen=True)
class StateDerivative:
    dx: np.ndarray
    dtheta_hat: tuple[np.ndarray, ...]
    dchi: np.ndarray


@dataclass(frozen=True)
class ControlOutputs:
    e: np.ndarray
    u_N: np.ndarray
    u: np.ndarray
    nussbaum_gain: np.ndarray


GainEvaluators = Sequence[Callable[[float], float]]


def control_step(g: Graph, agents: Sequence[AgentSpec], gains: GainEvaluators,
                 s: SystemState) -> ControlOutputs:
    """Evaluate the distributed control layer at one state."""
    n = g.n
    e = combined_error(g, s.x)
    u_N = np.empty(n)
    gain = np.empty(n)
    for i, agent in enumerate(agents):
        psi = agent.regressor.evaluate(s.x[i])
        u_N[i] = e[i] + psi @ np.asarray(s.theta_hat[i])
        gain[i] = gains[i](s.chi[i])
    u = -gain * u_N
    return ControlOutputs(e=e, u_N=u_N, u=u, nussbaum_gain=gain)


def closed_loop_derivative(g: Graph, agents: Sequence[AgentSpec],
                           gains: GainEvaluators, s: SystemState) -> StateDerivative:
    """Time derivative of the full closed-loop state."""
    out = control_step(g, agents, gains, s)
    n = g.n
    dx = np.empty(n)
    dchi = np.empty(n)
    dth = []
    for i, agent in enumerate(agents):
        psi = agent.regressor.evaluate(s.x[i])
        dx[i] = agent.rho * out.u[i] + psi @ np.asarray(agent.theta)
        dth.append(agent.zeta * psi * out.e[i])
        dchi[i] = agent.gamma * out.e[i] * out.u_N[i]
    return StateDerivative(dx=dx, dtheta_hat=tuple(dth), dchi=dchi)
