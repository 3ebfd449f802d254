"""The three-hunter by five-cost experiment and its summary statistics."""
from __future__ import annotations

import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np

from . import stats
from .episode import Guide, Hunter, TrialRecord, WumpusGame, run_episode
from .pomdp import Policy, SolverConfig, solve_fully_observable
from .signaling import SignalerConfig
from .wumpus import EpisodeConfig, START, WUMPUS_TILES, build_model, state_index

log = logging.getLogger(__name__)

CANONICAL_COSTS = (-1.0, -3.0, -5.0, -7.0, -9.0)
CONDITIONS = tuple(h.value for h in Hunter)


@dataclass(frozen=True)
class ExperimentPlan:
    conditions: tuple = CONDITIONS
    costs: tuple = CANONICAL_COSTS
    trials_per_cell: int = 100
    master_seed: int = 0
    stats_seed: int = 0
    bootstrap_resamples: int = 10_000
    ci_level: float = 0.95
    alpha: float = 5.0
    continuation: str = "auto"
    discount: float = 0.95
    shooting: str = "adjacent"
    max_steps: int = 20
    belief_points: int = 64
    expansion_rounds: int = 3
    backup_iterations: int = 200
    solver_tolerance: float = 1e-6
    solver_seed: int = 0
    expansion: str = "reachable"

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(Hunter(c).value for c in self.conditions))
        object.__setattr__(self, "costs", tuple(float(c) for c in self.costs))
        if self.trials_per_cell < 0:
            raise ValueError("trials_per_cell must be non-negative")
        if not 0 <= self.master_seed < 2**64:
            raise ValueError("master_seed must be a 64-bit unsigned integer")

    @property
    def solver(self) -> SolverConfig:
        return SolverConfig(self.belief_points, self.expansion_rounds, self.backup_iterations,
                            self.solver_tolerance, self.solver_seed, self.expansion)

    def episode_config(self, cost: float) -> EpisodeConfig:
        return EpisodeConfig(moving_cost=cost, max_steps=self.max_steps, discount=self.discount,
                             shooting=self.shooting)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["conditions"], d["costs"] = list(self.conditions), list(self.costs)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> ExperimentPlan:
        unknown = set(d) - set(plan_keys())
        if unknown:
            raise KeyError(f"unknown plan keys {sorted(unknown)}; valid keys: {', '.join(plan_keys())}")
        return cls(**d)

    def with_overrides(self, overrides: dict) -> ExperimentPlan:
        d = self.to_dict()
        d.update(overrides)
        return ExperimentPlan.from_dict(d)


def plan_keys() -> list[str]:
    return [f.name for f in fields(ExperimentPlan)]


def trial_seed(master_seed: int, condition: int, cost: int, trial: int) -> int:
    """64-bit episode seed for one trial.

    The seed is the first uint64 produced by numpy's ``SeedSequence`` with
    entropy ``master_seed`` and spawn key ``(condition, cost, trial)``.
    Each index is a position in the plan's lists.
    """
    ss = np.random.SeedSequence(master_seed, spawn_key=(condition, cost, trial))
    return int(ss.generate_state(1, np.uint64)[0])


def solve_policies(plan: ExperimentPlan, cache=None) -> dict[float, Policy]:
    """One PBVI policy per cost; every condition at that cost shares it."""
    out = {}
    for cost in plan.costs:
        if cache is not None and cost in cache:
            out[cost] = cache[cost]
            continue
        log.info("solving cost %g", cost)
        out[cost] = WumpusGame.solve(plan.episode_config(cost), plan.solver).policy
    return out


def _run_cell(args):
    plan, policy, ci, ki, n = args
    cond, cost = plan.conditions[ci], plan.costs[ki]
    game = WumpusGame.from_policy(plan.episode_config(cost), policy)
    guide = Guide(SignalerConfig(plan.alpha), plan.continuation)
    recs = []
    for t in range(n):
        seed = trial_seed(plan.master_seed, ci, ki, t)
        try:
            recs.append(run_episode(game, cond, guide, seed))
        except Exception as exc:
            raise RuntimeError(f"episode failed: condition={cond} cost={cost} trial={t} seed={seed}") from exc
    return recs


def run_experiment(plan: ExperimentPlan, policies: dict | None = None, jobs: int = 1) -> list[TrialRecord]:
    """Run every (condition, cost, trial) cell; records come back in that order."""
    policies = solve_policies(plan, policies)
    tasks = [(plan, policies[cost], ci, ki, plan.trials_per_cell)
             for ci in range(len(plan.conditions)) for ki, cost in enumerate(plan.costs)]
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            cells = list(pool.map(_run_cell, tasks))
    else:
        cells = [_run_cell(t) for t in tasks]
    records = [r for cell in cells for r in cell]
    caps = sum(r.cap_hit for r in records)
    if caps:
        log.warning("%d of %d episodes hit the step cap", caps, len(records))
    return records


# --------------------------------------------------------------------------
# statistics

def upper_bound(cost: float, plan: ExperimentPlan | None = None) -> float:
    """Undiscounted fully-observable value from the start tile, averaged over Wumpus tiles."""
    plan = plan or ExperimentPlan()
    V = solve_fully_observable(build_model(plan.episode_config(cost)), discount=1.0)
    return float(np.mean([V[state_index(START, w)] for w in WUMPUS_TILES]))


def _by_cell(records):
    cells = {}
    for r in records:
        cells.setdefault((r.condition, r.moving_cost), []).append(r.total_reward)
    return {k: np.array(v) for k, v in cells.items()}


def anova_from_records(records) -> stats.AnovaTable:
    vals = [r.total_reward for r in records]
    return stats.two_way_anova(vals, [r.condition for r in records], [r.moving_cost for r in records])


def bonferroni_posthoc(records, pair, n_comparisons: int = 3) -> dict:
    """F test between two conditions pooled over costs, Bonferroni-adjusted."""
    g1 = [r.total_reward for r in records if r.condition == pair[0]]
    g2 = [r.total_reward for r in records if r.condition == pair[1]]
    eff = stats.one_way_anova(g1, g2)
    return {"pair": list(pair), "F": eff.F, "df1": eff.df, "df2": len(g1) + len(g2) - 2,
            "p_raw": eff.p, "p_adj": stats.bonferroni(eff.p, n_comparisons)}


@dataclass(frozen=True)
class StatsReport:
    cell_means: list
    anova: dict
    posthoc: list
    per_cost: list
    bootstrap_ci: list
    upper_bound: dict
    n_trials: int
    cap_hits: int
    stats_seed: int
    format: str = "smithian.stats/1"

    def to_dict(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True) + "\n"

    @classmethod
    def loads(cls, text: str) -> StatsReport:
        return cls(**json.loads(text))

    def cell(self, condition, cost):
        for row in self.cell_means:
            if row["condition"] == condition and row["cost"] == cost:
                return row
        raise KeyError((condition, cost))


def summarize(records, stats_seed: int = 0, resamples: int = 10_000, level: float = 0.95,
              plan: ExperimentPlan | None = None) -> StatsReport:
    if not records:
        raise ValueError("no records to summarize")
    cells = _by_cell(records)
    conditions = list(dict.fromkeys(r.condition for r in records))
    costs = list(dict.fromkeys(r.moving_cost for r in records))

    means, cis = [], []
    for ci, cond in enumerate(conditions):
        for ki, cost in enumerate(costs):
            v = cells[(cond, cost)]
            sem = float(v.std(ddof=1) / np.sqrt(v.size)) if v.size > 1 else 0.0
            means.append({"condition": cond, "cost": cost, "n": int(v.size), "mean": float(v.mean()),
                          "sem": sem})
            rng = np.random.default_rng(np.random.SeedSequence(stats_seed, spawn_key=(ci, ki)))
            lo, hi = stats.bootstrap_ci(v, resamples, level, rng)
            cis.append({"condition": cond, "cost": cost, "low": lo, "high": hi, "level": level,
                        "resamples": resamples})

    table = anova_from_records(records).to_dict()
    anova = {"model": table["a"], "cost": table["b"], "interaction": table["interaction"],
             "ss_error": table["ss_error"], "df_error": table["df_error"], "ss_total": table["ss_total"]}

    pooled = {c: [r.total_reward for r in records if r.condition == c] for c in conditions}
    posthoc = stats.pairwise_bonferroni(pooled)

    per_cost = []
    for cost in costs if len(conditions) > 1 else ():
        eff = stats.one_way_anova(*[cells[(c, cost)] for c in conditions])
        n = sum(cells[(c, cost)].size for c in conditions)
        per_cost.append({"cost": cost, "F": eff.F, "df1": eff.df, "df2": n - len(conditions), "p": eff.p})

    return StatsReport(
        cell_means=means, anova=anova, posthoc=posthoc, per_cost=per_cost, bootstrap_ci=cis,
        upper_bound={repr(c): upper_bound(c, plan) for c in costs}, n_trials=len(records),
        cap_hits=int(sum(r.cap_hit for r in records)), stats_seed=stats_seed)


FIGURE2_COLUMNS = ("cost", "condition", "mean_reward", "ci_low", "ci_high", "upper_bound")


def figure2_rows(report: StatsReport) -> list[tuple]:
    rows = []
    ci = {(c["condition"], c["cost"]): c for c in report.bootstrap_ci}
    for m in sorted(report.cell_means, key=lambda m: (-m["cost"], m["condition"])):
        c = ci[(m["condition"], m["cost"])]
        rows.append((m["cost"], m["condition"], m["mean"], c["low"], c["high"],
                     report.upper_bound[repr(m["cost"])]))
    return rows
