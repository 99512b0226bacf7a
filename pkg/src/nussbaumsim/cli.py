"""Command-line entry point.

Subcommands
-----------
run                 integrate one scenario, write CSV + metrics + manifest
compare             run two scenarios and report per-agent MAI reductions
validate-params     check the gain-design inequalities for a scenario
synthesize-params   propose base constants that satisfy them
certify             grid-certify the overlap windows and ratio limits

``--config`` accepts a bundled scenario name (paper_novel,
paper_traditional) or a JSON file path.  Trajectory CSVs are written with
shortest round-trip decimals, so identical configurations produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__, analysis, config
from .engine import SimConfig, Trajectory
from .errors import ConfigError, NussbaumSimError
from .functions import max_representable_segment
from .theorem import synthesize_gain_params, validate_gain_constraints

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_BLOWUP = 2
EXIT_CONSTRAINT_FAIL = 3


def _fmt(v: float) -> str:
    return repr(float(v))


def write_trajectory_csv(path: Path, tr: Trajectory, cfg: config.ScenarioConfig) -> None:
    """Fixed column order: t, x_*, u_*, uN_*, e_*, chi_*, gain_*, V."""
    n = tr.n_agents
    V = analysis.lyapunov_values(tr, cfg)
    header = (["t"]
              + [f"x_{i}" for i in range(1, n + 1)]
              + [f"u_{i}" for i in range(1, n + 1)]
              + [f"uN_{i}" for i in range(1, n + 1)]
              + [f"e_{i}" for i in range(1, n + 1)]
              + [f"chi_{i}" for i in range(1, n + 1)]
              + [f"gain_{i}" for i in range(1, n + 1)]
              + ["V"])
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for k in range(tr.n_samples):
            row = [_fmt(tr.times[k])]
            for block in (tr.x, tr.u, tr.u_N, tr.e, tr.chi, tr.nussbaum_gain):
                row.extend(_fmt(v) for v in block[k])
            row.append(_fmt(V[k]))
            fh.write(",".join(row) + "\n")


def write_manifest(path: Path, cfg: config.ScenarioConfig, sim: SimConfig,
                   tr: Trajectory) -> None:
    manifest = {
        "tool_version": __version__,
        "schema_version": cfg.schema_version,
        "config_hash": tr.fingerprint,
        "solver": sim.solver,
        "dt": sim.dt,
        "t_final": sim.t_final,
        "record_stride": sim.record_stride,
        "n_samples": tr.n_samples,
        "blowup": None if tr.blowup is None else {
            "step": tr.blowup.step, "time": tr.blowup.time,
            "reason": tr.blowup.reason},
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _effective_sim(cfg: config.ScenarioConfig, args) -> SimConfig:
    sim = cfg.sim
    if getattr(args, "dt", None) or getattr(args, "t_final", None) \
            or getattr(args, "stride", None):
        sim = SimConfig(dt=args.dt or sim.dt,
                        t_final=args.t_final or sim.t_final,
                        record_stride=args.stride or sim.record_stride,
                        solver=sim.solver)
    return sim


def _run_one(cfg: config.ScenarioConfig, sim: SimConfig, out_dir: Path,
             label: str = "") -> Trajectory:
    tr = config.run_scenario(cfg, sim)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out_dir / "trajectory.csv", tr, cfg)
    metrics = analysis.compute_metrics(tr)
    (out_dir / "metrics.txt").write_text(metrics.text() + "\n")
    write_manifest(out_dir / "manifest.json", cfg, sim, tr)
    tag = f"[{label}] " if label else ""
    print(f"{tag}wrote {out_dir / 'trajectory.csv'} ({tr.n_samples} samples)")
    print(metrics.text())
    if tr.blowup is not None:
        print(f"{tag}simulation aborted: {tr.blowup.reason} at step "
              f"{tr.blowup.step} (t = {tr.blowup.time})", file=sys.stderr)
    return tr


def cmd_run(args) -> int:
    cfg = config.resolve_config(args.config)
    sim = _effective_sim(cfg, args)
    tr = _run_one(cfg, sim, Path(args.out))
    return EXIT_BLOWUP if tr.blowup is not None else EXIT_OK


def cmd_compare(args) -> int:
    cfg_a = config.resolve_config(args.config_a)
    cfg_b = config.resolve_config(args.config_b)
    out = Path(args.out)
    tr_a = _run_one(cfg_a, cfg_a.sim, out / "a", "A")
    tr_b = _run_one(cfg_b, cfg_b.sim, out / "b", "B")
    report = analysis.compare_runs(tr_a, tr_b, consensus_tol=args.tol)
    (out / "comparison.txt").write_text(report.text() + "\n")
    print(report.text())
    if tr_a.blowup is not None or tr_b.blowup is not None:
        return EXIT_BLOWUP
    return EXIT_OK


def cmd_validate_params(args) -> int:
    cfg = config.resolve_config(args.config)
    scheme = cfg.gain_scheme
    if not isinstance(scheme, config.SaturatedSchemeConfig):
        print("validate-params requires a saturated gain scheme", file=sys.stderr)
        return EXIT_ERROR
    eta_bar = args.eta_bar if args.eta_bar else config.eta_bar_for(cfg)
    report = validate_gain_constraints(
        n_agents=len(cfg.agents), rho_min=cfg.gain_bounds.rho_min,
        rho_max=cfg.gain_bounds.rho_max, eta_bar=eta_bar,
        a_N=scheme.a_N, b_N=scheme.b_N)
    print(report.summary())
    return EXIT_OK if report.satisfied else EXIT_CONSTRAINT_FAIL


def cmd_synthesize_params(args) -> int:
    cfg = config.resolve_config(args.config)
    eta_bar = args.eta_bar if args.eta_bar else config.eta_bar_for(cfg)
    a_N, b_N = synthesize_gain_params(
        n_agents=len(cfg.agents), rho_min=cfg.gain_bounds.rho_min,
        rho_max=cfg.gain_bounds.rho_max, eta_bar=eta_bar, margin=args.margin)
    report = validate_gain_constraints(
        n_agents=len(cfg.agents), rho_min=cfg.gain_bounds.rho_min,
        rho_max=cfg.gain_bounds.rho_max, eta_bar=eta_bar, a_N=a_N, b_N=b_N)
    print(f"suggested a_N = {a_N!r}")
    print(f"suggested b_N = {b_N!r}")
    print(report.summary())
    return EXIT_OK if report.satisfied else EXIT_CONSTRAINT_FAIL


def cmd_certify(args) -> int:
    cfg = config.resolve_config(args.config)
    scheme = cfg.gain_scheme
    if not isinstance(scheme, config.SaturatedSchemeConfig):
        print("certify requires a saturated gain scheme", file=sys.stderr)
        return EXIT_ERROR
    chain = scheme.chain(len(cfg.agents))
    lines = ["negative-overlap certification"]
    all_ok = True
    certs = analysis.certify_chain(chain, k_values=tuple(range(1, args.k_max + 1)),
                                   grid_points=args.grid_points)
    idx = 0
    for i in range(chain.n_agents - 1):
        for k in range(1, args.k_max + 1):
            for s_slow, s_fast in analysis.SIGN_COMBINATIONS:
                c = certs[idx]
                idx += 1
                all_ok &= c.passed
                lines.append(
                    f"  pair ({i + 1},{i + 2}) k={k} signs=({s_slow:+d},{s_fast:+d}) "
                    f"[{c.interval.sign_case}]: margin={c.worst_margin:.6g} "
                    f"containment={'ok' if c.containment_ok else 'VIOLATED'} "
                    f"-> {'PASS' if c.passed else 'FAIL'}")
    lines.append("integral-ratio limits")
    for i, params in enumerate(chain.params, start=1):
        n_seg = min(30, max_representable_segment(params, scheme.horizon))
        prof = analysis.gain_ratio_profile(params, n_seg, scheme.horizon)
        ok = prof.max_deviation_from_limit < 0.01 and prof.sign_alternation_ok
        all_ok &= ok
        lines.append(
            f"  agent {i}: limit={prof.limiting_constant:.6g} "
            f"tail deviation={prof.max_deviation_from_limit:.3g} "
            f"alternation={'ok' if prof.sign_alternation_ok else 'BROKEN'} "
            f"(over {n_seg} segments) -> {'PASS' if ok else 'FAIL'}")
    text = "\n".join(lines)
    print(text)
    if args.out:
        Path(args.out).write_text(text + "\n")
    return EXIT_OK if all_ok else EXIT_CONSTRAINT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nussbaumsim", description=__doc__,
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate one scenario")
    run.add_argument("--config", required=True)
    run.add_argument("--out", required=True)
    run.add_argument("--dt", type=float, default=None, help="override step size")
    run.add_argument("--t-final", type=float, default=None, dest="t_final",
                     help="override duration")
    run.add_argument("--stride", type=int, default=None,
                     help="override record stride")
    run.set_defaults(func=cmd_run)

    cmp_ = sub.add_parser("compare", help="run two scenarios and compare")
    cmp_.add_argument("--config-a", required=True, dest="config_a")
    cmp_.add_argument("--config-b", required=True, dest="config_b")
    cmp_.add_argument("--out", required=True)
    cmp_.add_argument("--tol", type=float, default=analysis.DEFAULT_CONSENSUS_TOL)
    cmp_.set_defaults(func=cmd_compare)

    val = sub.add_parser("validate-params", help="check design inequalities")
    val.add_argument("--config", required=True)
    val.add_argument("--eta-bar", type=float, default=None, dest="eta_bar")
    val.set_defaults(func=cmd_validate_params)

    syn = sub.add_parser("synthesize-params", help="propose passing constants")
    syn.add_argument("--config", required=True)
    syn.add_argument("--eta-bar", type=float, default=None, dest="eta_bar")
    syn.add_argument("--margin", type=float, default=1.1)
    syn.set_defaults(func=cmd_synthesize_params)

    cert = sub.add_parser("certify", help="certify overlap windows and ratios")
    cert.add_argument("--config", required=True)
    cert.add_argument("--grid-points", type=int, default=10_000, dest="grid_points")
    cert.add_argument("--k-max", type=int, default=2, dest="k_max")
    cert.add_argument("--out", default=None)
    cert.set_defaults(func=cmd_certify)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except NussbaumSimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
