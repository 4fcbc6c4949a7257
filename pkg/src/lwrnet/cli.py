"""Command-line entry point: ``lwrnet {validate,simulate,rates,verify,classify}``.

Exit codes: 0 success / PASS, 1 invalid scenario, 2 runtime or I/O error,
3 oracle verification FAIL.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import analysis, oracle
from .dynamics import ZeroNormalizerError, simulate
from .graph import classify, reachable_ancestors
from .scenario import Scenario, ScenarioInvalid, ScenarioParseError, load

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME, EXIT_FAIL = 0, 1, 2, 3


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def _num(x):
    # JSON has no infinities; spell non-finite values out
    if x is None:
        return None
    x = float(x)
    if math.isfinite(x):
        return x
    return "nan" if math.isnan(x) else ("inf" if x > 0 else "-inf")


def _dump(obj, out) -> None:
    text = json.dumps(obj, indent=2, sort_keys=True) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        Path(out).parent.mkdir(parents=True, exist_ok=True)
        Path(out).write_text(text, encoding="utf-8")


def _apply_overrides(sc: Scenario, args) -> Scenario:
    if getattr(args, "horizon", None) is not None:
        sc.horizon = args.horizon
    if getattr(args, "seed", None) is not None:
        sc.seed = args.seed
    if getattr(args, "seeds", None) is not None:
        sc.seeds = args.seeds
    return sc


def write_trajectory_csv(path, sc: Scenario, traj) -> None:
    labels = sc.model.states.labels
    beliefs = traj.beliefs
    n, T1, m = beliefs.shape
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "agent", "state", "belief"])
        for t in range(T1):
            for i in range(n):
                for k in range(m):
                    w.writerow([t, i, labels[k], fmt(beliefs[i, t, k])])


def write_signal_csv(path, sc: Scenario, traj) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "agent", "signal"])
        for t in range(traj.horizon + 1):
            for i in range(sc.model.n):
                w.writerow([t, i, sc.model.structures[i].signal_labels[traj.signals[i, t]]])


def cmd_validate(args) -> int:
    load(args.config)
    print("OK")
    return EXIT_OK


def cmd_simulate(args) -> int:
    sc = _apply_overrides(load(args.config), args)
    cfg = sc.sim_config()
    traj = simulate(cfg)
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(out / "trajectory.csv", sc, traj)
    write_signal_csv(out / "signals.csv", sc, traj)
    theta = cfg.true_state
    print(f"true state {sc.model.states.labels[theta]!r}, horizon {cfg.horizon}, seed {cfg.seed}")
    for i in range(sc.model.n):
        print(f"agent {i}: final belief at true state {fmt(traj.belief(i, cfg.horizon)[theta])}")
    return EXIT_OK


def rate_report_json(sc: Scenario, workers: int = 1) -> dict:
    theta = sc.state_for(sc.seed)
    rep = analysis.rate_study(
        sc.model, sc.net, theta, sc.horizon, sc.seed_values(),
        burn_in_fraction=sc.burn_in_fraction,
        true_mass_threshold=sc.true_mass_threshold,
        r_squared_threshold=sc.r_squared_threshold,
        workers=workers,
    )
    agents = [{
        "id": a.agent,
        "theoretical_private_rate": _num(a.private_rate),
        "theoretical_bound": _num(a.bound),
        "predicted_rate": _num(a.predicted),
        "rate_kind": a.kind,
        "empirical_mean": _num(a.empirical_mean),
        "empirical_std": _num(a.empirical_std),
        "r_squared": _num(a.r_squared),
        "converged": a.all_converged,
    } for a in rep.agents]
    return {"agents": agents, "seeds": rep.seeds, "config_digest": sc.digest}


def cmd_rates(args) -> int:
    sc = _apply_overrides(load(args.config), args)
    _dump(rate_report_json(sc, args.workers), args.out)
    return EXIT_OK


def verify_report_json(sc: Scenario) -> dict:
    worst = None
    for seed in sc.seed_values():
        cfg = sc.sim_config(seed)
        rep = oracle.verify_trajectory(cfg, simulate(cfg))
        if worst is None or rep.max_deviation > worst[0].max_deviation:
            worst = (rep, seed)
    rep, seed = worst
    return {
        "pass": rep.passed,
        "max_deviation": _num(rep.max_deviation),
        "at": {"agent": rep.agent, "t": rep.t, "seed": seed},
        "tolerance": rep.tolerance,
    }


def cmd_verify(args) -> int:
    sc = _apply_overrides(load(args.config), args)
    report = verify_report_json(sc)
    _dump(report, args.out)
    return EXIT_OK if report["pass"] else EXIT_FAIL


def classify_json(sc: Scenario) -> dict:
    shape = classify(sc.net)
    return {
        "components": [
            {"nodes": list(c.nodes), "kind": c.kind, "circle": list(c.circle)}
            for c in shape.components
        ],
        "kind": shape.kind,
        "depth": list(shape.depth),
        "ancestors": [sorted(reachable_ancestors(sc.net, i)) for i in range(sc.net.n)],
    }


def cmd_classify(args) -> int:
    _dump(classify_json(load(args.config)), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lwrnet", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, func, help, out_help=None, overrides=False):
        p = sub.add_parser(name, help=help)
        p.add_argument("--config", required=True, metavar="PATH")
        if out_help:
            p.add_argument("--out", metavar="PATH", help=out_help)
        if overrides:
            p.add_argument("--horizon", type=int)
            p.add_argument("--seed", type=int)
            p.add_argument("--seeds", type=int)
        p.set_defaults(func=func)
        return p

    add("validate", cmd_validate, "check a scenario file")
    add("simulate", cmd_simulate, "write trajectory.csv and signals.csv",
        "output directory (default: current)", overrides=True)
    p = add("rates", cmd_rates, "theoretical vs. regressed learning rates",
            "JSON output file (default: stdout)", overrides=True)
    p.add_argument("--workers", type=int, default=1, help="threads used across seeds")
    add("verify", cmd_verify, "compare the recursion with one-shot posteriors",
        "JSON output file (default: stdout)", overrides=True)
    add("classify", cmd_classify, "network components, circles, depths, ancestors",
        "JSON output file (default: stdout)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ScenarioInvalid as exc:
        for v in exc.violations:
            print(v)
        return EXIT_INVALID
    except ScenarioParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except (ZeroNormalizerError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
