"""Command line entry point: ``smithian {solve,run,stats,trace,plot-data}``.

Exit status is 0 on success, 1 on usage errors and 2 on runtime failures.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .episode import Guide, Hunter, WumpusGame, read_trials, run_episode, write_trace, write_trials
from .experiment import (FIGURE2_COLUMNS, ExperimentPlan, StatsReport, figure2_rows, plan_keys,
                         run_experiment, solve_policies, summarize, trial_seed)
from .pomdp import Policy
from .signaling import SignalerConfig

log = logging.getLogger("smithian")

POLICY_FORMAT = 1
SOLVER_KEYS = ("discount", "shooting", "belief_points", "expansion_rounds", "backup_iterations",
               "solver_tolerance", "solver_seed", "expansion")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def parse_plan_text(text: str) -> dict:
    """JSON object, a manifest (``{"plan": {...}}``), or ``key = value`` lines."""
    stripped = text.strip()
    if stripped.startswith("{"):
        d = json.loads(stripped)
        return d["plan"] if "plan" in d and isinstance(d["plan"], dict) else d
    d = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"plan line {lineno}: expected key = value, got {line!r}")
        k, v = line.split("=", 1)
        d[k.strip()] = _parse_value(v.strip())
    return d


def parse_overrides(items) -> dict:
    out = {}
    for item in items or ():
        if "=" not in item:
            raise UsageError(f"--override expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v.strip())
    return out


def resolve_plan(args, out_dir: Path | None = None) -> ExperimentPlan:
    d = {}
    if args.plan:
        d = parse_plan_text(Path(args.plan).read_text())
    elif out_dir is not None and (out_dir / "manifest.json").exists():
        d = parse_plan_text((out_dir / "manifest.json").read_text())
    d.update(parse_overrides(args.override))
    if args.seed is not None and args.command == "run":
        d["master_seed"] = args.seed
    unknown = set(d) - set(plan_keys())
    if unknown:
        raise UsageError(f"unknown plan keys {sorted(unknown)}; valid keys: {', '.join(plan_keys())}")
    try:
        return ExperimentPlan.from_dict(d)
    except (TypeError, ValueError) as exc:
        raise UsageError(f"invalid plan: {exc}") from exc


def write_manifest(out_dir: Path, plan: ExperimentPlan, command: str, name="manifest.json", **extra):
    manifest = {"format": "smithian.manifest/1", "version": __version__, "command": command,
                "plan": plan.to_dict(), **extra}
    (out_dir / name).write_text(json.dumps(manifest, indent=1, sort_keys=True) + "\n")


# --------------------------------------------------------------------------
# policy cache

def policy_key(plan: ExperimentPlan, cost: float) -> str:
    d = plan.to_dict()
    payload = {"format": POLICY_FORMAT, "cost": float(cost), **{k: d[k] for k in SOLVER_KEYS}}
    return hashlib.sha256(json.dumps(payload, sort_keys=True).encode()).hexdigest()[:16]


def policy_path(cache_dir: Path, plan: ExperimentPlan, cost: float) -> Path:
    return cache_dir / f"pbvi-v{POLICY_FORMAT}-{policy_key(plan, cost)}.npz"


def save_policy(path: Path, policy: Policy):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        np.savez(fh, alphas=policy.alphas, actions=policy.actions)


def load_policy(path: Path) -> Policy:
    with np.load(path) as z:
        return Policy(z["alphas"], z["actions"])


def cached_policies(plan: ExperimentPlan, cache_dir: Path) -> dict:
    found = {}
    for cost in plan.costs:
        p = policy_path(cache_dir, plan, cost)
        if p.exists():
            found[cost] = load_policy(p)
    policies = solve_policies(plan, found)
    for cost, pol in policies.items():
        if cost not in found:
            save_policy(policy_path(cache_dir, plan, cost), pol)
    return policies


# --------------------------------------------------------------------------
# commands

def _write_stats(out_dir: Path, records, plan: ExperimentPlan) -> StatsReport:
    report = summarize(records, plan.stats_seed, plan.bootstrap_resamples, plan.ci_level, plan)
    (out_dir / "stats.json").write_text(report.dumps())
    return report


def _write_figure2(out_dir: Path, report: StatsReport):
    with open(out_dir / "figure2.csv", "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIGURE2_COLUMNS)
        for row in figure2_rows(report):
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])


def cmd_solve(args, out_dir):
    plan = resolve_plan(args, out_dir)
    policies = cached_policies(plan, out_dir / "policies")
    for cost, pol in policies.items():
        game = WumpusGame.from_policy(plan.episode_config(cost), pol)
        print(f"cost {cost:g}: value(initial) = {pol.value(game.model.initial_belief):.6f}  "
              f"vectors = {len(pol.alphas)}  file = {policy_path(out_dir / 'policies', plan, cost).name}")
    write_manifest(out_dir, plan, "solve")


def cmd_run(args, out_dir):
    plan = resolve_plan(args, out_dir)
    write_manifest(out_dir, plan, "run")
    policies = cached_policies(plan, out_dir / "policies")
    records = run_experiment(plan, policies, jobs=args.jobs)
    with open(out_dir / "trials.csv", "w", newline="") as fh:
        write_trials(records, fh)
    if records:
        report = _write_stats(out_dir, records, plan)
        _write_figure2(out_dir, report)
        caps = report.cap_hits
        print(f"{len(records)} trials, {caps} cap hits; model effect F({report.anova['model']['df']}, "
              f"{report.anova['df_error']}) = {report.anova['model']['F']:.3f}, "
              f"p = {report.anova['model']['p']:.4g}")
    else:
        print("no trials in plan; statistics skipped")
    if args.trace:
        _trace_all(plan, policies, out_dir)


def _trace_all(plan, policies, out_dir):
    with open(out_dir / "steps.csv", "w", newline="") as fh:
        header = True
        for ci, cond in enumerate(plan.conditions):
            for ki, cost in enumerate(plan.costs):
                game = WumpusGame.from_policy(plan.episode_config(cost), policies[cost])
                guide = Guide(SignalerConfig(plan.alpha), plan.continuation)
                for t in range(plan.trials_per_cell):
                    seed = trial_seed(plan.master_seed, ci, ki, t)
                    rec = run_episode(game, cond, guide, seed, trace=True)
                    write_trace(rec.trace, fh, {"condition": cond, "moving_cost": repr(cost), "seed": seed},
                                header=header)
                    header = False


def cmd_stats(args, out_dir):
    plan = resolve_plan(args, out_dir)
    trials = Path(args.trials) if args.trials else out_dir / "trials.csv"
    with open(trials, newline="") as fh:
        records = read_trials(fh)
    if not records:
        raise UsageError(f"{trials} holds no trials; refusing to compute statistics")
    report = _write_stats(out_dir, records, plan)
    print(f"wrote {out_dir / 'stats.json'} ({report.n_trials} trials)")


def cmd_plot_data(args, out_dir):
    plan = resolve_plan(args, out_dir)
    stats_path = out_dir / "stats.json"
    if stats_path.exists() and not args.trials:
        report = StatsReport.loads(stats_path.read_text())
    else:
        with open(Path(args.trials) if args.trials else out_dir / "trials.csv", newline="") as fh:
            report = summarize(read_trials(fh), plan.stats_seed, plan.bootstrap_resamples, plan.ci_level, plan)
    _write_figure2(out_dir, report)
    print(f"wrote {out_dir / 'figure2.csv'}")


def cmd_trace(args, out_dir):
    plan = resolve_plan(args, out_dir)
    cost = float(args.cost)
    plan = ExperimentPlan.from_dict({**plan.to_dict(), "costs": [cost]})
    policies = cached_policies(plan, out_dir / "policies")
    game = WumpusGame.from_policy(plan.episode_config(cost), policies[cost])
    seed = args.seed if args.seed is not None else 0
    rec = run_episode(game, args.condition, Guide(SignalerConfig(plan.alpha), plan.continuation),
                      seed, trace=True)
    path = out_dir / "trace.csv"
    with open(path, "w", newline="") as fh:
        write_trace(rec.trace, fh, {"condition": rec.condition, "moving_cost": repr(cost), "seed": seed})
    write_manifest(out_dir, plan, "trace", "trace_manifest.json", condition=rec.condition, seed=seed)
    print(f"wumpus at {rec.wumpus_pos}; {rec.steps} steps, reward {rec.total_reward:g}, "
          f"{'hit' if rec.hit else 'miss'}; trace in {path}")


COMMANDS = {"solve": cmd_solve, "run": cmd_run, "stats": cmd_stats, "trace": cmd_trace,
            "plot-data": cmd_plot_data}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--plan", help="plan file (JSON, manifest.json, or key = value lines)")
    common.add_argument("--out", default=os.environ.get("SMITHIAN_OUT_DIR", "results"),
                        help="output directory (default: $SMITHIAN_OUT_DIR or ./results)")
    common.add_argument("--seed", type=int, help="master seed (episode seed for trace)")
    common.add_argument("--override", action="append", metavar="KEY=VALUE",
                        help="override one plan entry; repeatable")
    common.add_argument("--trace", action="store_true", help="also write per-step steps.csv")
    common.add_argument("--jobs", type=int, default=1, help="worker processes for trials")
    common.add_argument("--trials", help="trials.csv to read (stats, plot-data)")
    common.add_argument("-q", "--quiet", action="store_true")
    common.add_argument("-v", "--verbose", action="count", default=0)

    p = _Parser(prog="smithian", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "trace":
            sp.add_argument("--condition", required=True, choices=[h.value for h in Hunter])
            sp.add_argument("--cost", required=True, type=float)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)

    level = logging.ERROR if args.quiet else (logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)]
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    out_dir = Path(args.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        COMMANDS[args.command](args, out_dir)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"smithian {args.command}: {exc}", file=sys.stderr)
        if exc.__cause__ is not None:
            print(f"  caused by: {exc.__cause__!r}", file=sys.stderr)
        log.debug("traceback", exc_info=True)
        return 2
    return 0
