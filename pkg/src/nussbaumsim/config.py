"""Scenario configuration: JSON schema, validation, runtime assembly.

A scenario file is a single versioned JSON document holding the graph, the
per-agent plant/controller constants, the gain scheme, the admissible
coefficient bounds, and the integration settings.  Parsing is strict:
unknown keys, wrong types, or physically invalid values fail with the
offending field path.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .chain import NussbaumChain, build_chain
from .dynamics import AgentSpec, Graph, Regressor
from .engine import SimConfig, Trajectory, simulate
from .errors import ConfigError
from .functions import (
    DEFAULT_SEGMENT_HORIZON,
    TraditionalParams,
    eval_saturated_N,
    eval_traditional_N,
    traditional_prefactor,
)

SCHEMA_VERSION = 1

BUNDLED_SCENARIOS = ("paper_novel", "paper_traditional")


@dataclass(frozen=True)
class GraphConfig:
    """Node count and weighted edge list (1-based endpoints)."""

    n: int
    edges: tuple[tuple[int, int, float], ...]

    def build(self) -> Graph:
        adj = np.zeros((self.n, self.n))
        for i, j, w in self.edges:
            adj[i - 1, j - 1] = w
            adj[j - 1, i - 1] = w
        return Graph(adj)


@dataclass(frozen=True)
class GainBounds:
    rho_min: float
    rho_max: float

    def __post_init__(self):
        if not 0 < self.rho_min <= self.rho_max:
            raise ValueError(f"need 0 < rho_min <= rho_max, "
                             f"got [{self.rho_min}, {self.rho_max}]")


@dataclass(frozen=True)
class SaturatedSchemeConfig:
    """Saturated gain family, base agent constants."""

    a_N: float
    b_N: float
    T_N: float
    M: int = 4
    horizon: int = DEFAULT_SEGMENT_HORIZON

    kind = "saturated"

    def chain(self, n_agents: int) -> NussbaumChain:
        return build_chain(n_agents, self.a_N, self.b_N, self.T_N, self.M)

    def evaluators(self, n_agents: int):
        ch = self.chain(n_agents)
        return [lambda chi, p=p: eval_saturated_N(p, chi, self.horizon)
                for p in ch.params]

    def gain_bounds_per_agent(self, n_agents: int) -> tuple[float, ...]:
        return tuple(p.a for p in self.chain(n_agents).params)

    def kernel_args(self, n_agents: int):
        ch = self.chain(n_agents)
        sat_a = np.array([p.a for p in ch.params])
        sat_b = np.array([p.b for p in ch.params])
        sat_T = np.array([p.T for p in ch.params])
        dummy = np.zeros(n_agents)
        return (0, sat_a, sat_b, sat_T, self.horizon,
                dummy, 0.0, np.ones(n_agents), 0.0)


@dataclass(frozen=True)
class TraditionalSchemeConfig:
    """Exponential baseline gain family."""

    alpha: float
    beta: float
    exponent_cap: float = 50.0

    kind = "traditional"

    def params_for(self, agent_index: int) -> TraditionalParams:
        return TraditionalParams(alpha=self.alpha, beta=self.beta,
                                 agent_index=agent_index,
                                 exponent_cap=self.exponent_cap)

    def evaluators(self, n_agents: int):
        return [lambda chi, p=self.params_for(i + 1): eval_traditional_N(p, chi)
                for i in range(n_agents)]

    def gain_bounds_per_agent(self, n_agents: int) -> tuple[float, ...]:
        return tuple(float("inf") for _ in range(n_agents))

    def kernel_args(self, n_agents: int):
        prefs = np.array([traditional_prefactor(self.params_for(i + 1))
                          for i in range(n_agents)])
        beta_pow = np.array([self.beta ** (i + 1) for i in range(n_agents)])
        dummy = np.zeros(n_agents)
        return (1, dummy, dummy, dummy, 0,
                prefs, self.alpha, beta_pow, self.exponent_cap)


@dataclass(frozen=True)
class ScenarioConfig:
    graph: GraphConfig
    agents: tuple[AgentSpec, ...]
    gain_scheme: SaturatedSchemeConfig | TraditionalSchemeConfig
    gain_bounds: GainBounds
    sim: SimConfig
    schema_version: int = SCHEMA_VERSION


# ---------------------------------------------------------------------------
# serialization

def _regressor_to_dict(r: Regressor) -> dict:
    d: dict = {"kind": r.kind}
    if r.kind in ("polynomial", "constant"):
        d["coefficients"] = list(r.coefficients)
    return d


def to_dict(cfg: ScenarioConfig) -> dict:
    scheme = cfg.gain_scheme
    if isinstance(scheme, SaturatedSchemeConfig):
        scheme_d = {"kind": "saturated", "a_N": scheme.a_N, "b_N": scheme.b_N,
                    "T_N": scheme.T_N, "M": scheme.M, "horizon": scheme.horizon}
    else:
        scheme_d = {"kind": "traditional", "alpha": scheme.alpha,
                    "beta": scheme.beta, "exponent_cap": scheme.exponent_cap}
    return {
        "schema_version": cfg.schema_version,
        "graph": {"n": cfg.graph.n,
                  "edges": [[i, j, w] for i, j, w in cfg.graph.edges]},
        "agents": [
            {"rho": a.rho, "theta": list(a.theta),
             "regressor": _regressor_to_dict(a.regressor),
             "zeta": a.zeta, "gamma": a.gamma, "x0": a.x0,
             "theta_hat0": list(a.theta_hat0), "chi0": a.chi0}
            for a in cfg.agents
        ],
        "gain_scheme": scheme_d,
        "gain_bounds": {"rho_min": cfg.gain_bounds.rho_min,
                        "rho_max": cfg.gain_bounds.rho_max},
        "sim": {"dt": cfg.sim.dt, "t_final": cfg.sim.t_final,
                "record_stride": cfg.sim.record_stride, "solver": cfg.sim.solver},
    }


class _Reader:
    """Typed dict access that reports full field paths on failure."""

    def __init__(self, data: dict, path: str):
        if not isinstance(data, dict):
            raise ConfigError(path, f"expected an object, got {type(data).__name__}")
        self.data = data
        self.path = path

    def child(self, key: str) -> "_Reader":
        return _Reader(self.require(key, dict), f"{self.path}.{key}")

    def require(self, key: str, typ, default=...):
        if key not in self.data:
            if default is not ...:
                return default
            raise ConfigError(f"{self.path}.{key}", "missing required field")
        val = self.data[key]
        if typ is float and isinstance(val, int) and not isinstance(val, bool):
            val = float(val)
        if not isinstance(val, typ) or isinstance(val, bool) and typ is not bool:
            raise ConfigError(f"{self.path}.{key}",
                              f"expected {typ.__name__}, got {type(val).__name__}")
        return val

    def number_list(self, key: str, default=...):
        val = self.require(key, list, default)
        out = []
        for idx, v in enumerate(val):
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ConfigError(f"{self.path}.{key}[{idx}]", "expected a number")
            out.append(float(v))
        return tuple(out)


def _parse_regressor(r: _Reader) -> Regressor:
    kind = r.require("kind", str)
    coeffs = r.number_list("coefficients", default=())
    try:
        return Regressor(kind=kind, coefficients=coeffs)
    except ValueError as exc:
        raise ConfigError(r.path, str(exc)) from None


def from_dict(data: dict, path: str = "config") -> ScenarioConfig:
    root = _Reader(data, path)
    version = root.require("schema_version", int)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"{path}.schema_version",
                          f"unsupported version {version} (expected {SCHEMA_VERSION})")

    g = root.child("graph")
    n = g.require("n", int)
    if n < 1:
        raise ConfigError(f"{path}.graph.n", f"need at least one node, got {n}")
    edges = []
    raw_edges = g.require("edges", list)
    for idx, item in enumerate(raw_edges):
        epath = f"{path}.graph.edges[{idx}]"
        if (not isinstance(item, list) or len(item) != 3
                or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                           for v in item)):
            raise ConfigError(epath, "expected [i, j, weight]")
        i, j, w = int(item[0]), int(item[1]), float(item[2])
        if item[0] != i or item[1] != j:
            raise ConfigError(epath, "endpoints must be integers")
        if not (1 <= i <= n and 1 <= j <= n):
            raise ConfigError(epath, f"endpoints must be in 1..{n}")
        if i == j:
            raise ConfigError(epath, "self-edges are not allowed")
        if w <= 0:
            raise ConfigError(epath, f"edge weight must be positive, got {w}")
        edges.append((i, j, w))
    graph = GraphConfig(n=n, edges=tuple(edges))

    raw_agents = root.require("agents", list)
    if len(raw_agents) != n:
        raise ConfigError(f"{path}.agents",
                          f"expected {n} agents to match graph.n, got {len(raw_agents)}")
    agents = []
    for idx, item in enumerate(raw_agents):
        a = _Reader(item, f"{path}.agents[{idx}]")
        try:
            agents.append(AgentSpec(
                rho=a.require("rho", float),
                theta=a.number_list("theta"),
                regressor=_parse_regressor(a.child("regressor")),
                zeta=a.require("zeta", float),
                gamma=a.require("gamma", float),
                x0=a.require("x0", float),
                theta_hat0=a.number_list("theta_hat0"),
                chi0=a.require("chi0", float, default=0.0),
            ))
        except ValueError as exc:
            raise ConfigError(a.path, str(exc)) from None

    sch = root.child("gain_scheme")
    kind = sch.require("kind", str)
    try:
        if kind == "saturated":
            scheme = SaturatedSchemeConfig(
                a_N=sch.require("a_N", float), b_N=sch.require("b_N", float),
                T_N=sch.require("T_N", float), M=sch.require("M", int, default=4),
                horizon=sch.require("horizon", int, default=DEFAULT_SEGMENT_HORIZON))
        elif kind == "traditional":
            scheme = TraditionalSchemeConfig(
                alpha=sch.require("alpha", float), beta=sch.require("beta", float),
                exponent_cap=sch.require("exponent_cap", float, default=50.0))
        else:
            raise ConfigError(f"{path}.gain_scheme.kind",
                              f"unknown gain scheme {kind!r}")
    except ValueError as exc:
        raise ConfigError(sch.path, str(exc)) from None

    gb = root.child("gain_bounds")
    try:
        bounds = GainBounds(rho_min=gb.require("rho_min", float),
                            rho_max=gb.require("rho_max", float))
    except ValueError as exc:
        raise ConfigError(gb.path, str(exc)) from None

    sm = root.child("sim")
    solver = sm.require("solver", str, default="rk4")
    try:
        sim = SimConfig(dt=sm.require("dt", float),
                        t_final=sm.require("t_final", float),
                        record_stride=sm.require("record_stride", int, default=10),
                        solver=solver)
        sim.n_steps
    except ValueError as exc:
        raise ConfigError(sm.path, str(exc)) from None

    return ScenarioConfig(graph=graph, agents=tuple(agents), gain_scheme=scheme,
                          gain_bounds=bounds, sim=sim, schema_version=version)


def to_json(cfg: ScenarioConfig) -> str:
    return json.dumps(to_dict(cfg), indent=2, sort_keys=True) + "\n"


def load_file(path: str | Path) -> ScenarioConfig:
    p = Path(path)
    try:
        data = json.loads(p.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(str(p), f"cannot read config: {exc}") from None
    return from_dict(data, path=p.name)


def save_file(cfg: ScenarioConfig, path: str | Path) -> None:
    Path(path).write_text(to_json(cfg))


def bundled_scenario(name: str) -> ScenarioConfig:
    """Load one of the packaged scenario files by name."""
    if name not in BUNDLED_SCENARIOS:
        raise ConfigError(name, f"unknown bundled scenario "
                                f"(available: {', '.join(BUNDLED_SCENARIOS)})")
    text = resources.files("nussbaumsim.scenarios").joinpath(f"{name}.json").read_text()
    return from_dict(json.loads(text), path=name)


def resolve_config(name_or_path: str) -> ScenarioConfig:
    """Accept either a bundled scenario name or a filesystem path."""
    if name_or_path in BUNDLED_SCENARIOS:
        return bundled_scenario(name_or_path)
    return load_file(name_or_path)


# ---------------------------------------------------------------------------
# validation and execution

def validate_scenario(cfg: ScenarioConfig, path: str = "config") -> None:
    """Cross-field checks run before any simulation."""
    graph = cfg.graph.build()
    if not graph.is_connected():
        raise ConfigError(f"{path}.graph", "graph must be connected")
    for idx, agent in enumerate(cfg.agents):
        mag = abs(agent.rho)
        if not (cfg.gain_bounds.rho_min <= mag <= cfg.gain_bounds.rho_max):
            raise ConfigError(
                f"{path}.agents[{idx}].rho",
                f"|rho| = {mag} outside gain_bounds "
                f"[{cfg.gain_bounds.rho_min}, {cfg.gain_bounds.rho_max}]")
    if isinstance(cfg.gain_scheme, SaturatedSchemeConfig):
        try:
            cfg.gain_scheme.chain(len(cfg.agents))
        except Exception as exc:
            raise ConfigError(f"{path}.gain_scheme", str(exc)) from None


def fingerprint(cfg: ScenarioConfig, sim: SimConfig | None = None) -> str:
    """SHA-256 of the canonical serialized scenario (with effective sim)."""
    effective = cfg if sim is None else ScenarioConfig(
        graph=cfg.graph, agents=cfg.agents, gain_scheme=cfg.gain_scheme,
        gain_bounds=cfg.gain_bounds, sim=sim, schema_version=cfg.schema_version)
    blob = json.dumps(to_dict(effective), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()


def eta_bar_for(cfg: ScenarioConfig) -> float:
    """Default drift bound: the largest 1/gamma_i across agents."""
    return max(1.0 / a.gamma for a in cfg.agents)


def run_scenario(cfg: ScenarioConfig, sim: SimConfig | None = None,
                 validate: bool = True) -> Trajectory:
    """Validate, then integrate; ``sim`` overrides the config's settings."""
    if validate:
        validate_scenario(cfg)
    effective = sim if sim is not None else cfg.sim
    return simulate(cfg.graph.build(), cfg.agents, cfg.gain_scheme,
                    effective, fingerprint(cfg, effective))
