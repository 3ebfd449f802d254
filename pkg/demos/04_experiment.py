"""Three hunters, five moving costs, one table of results.

A reduced version of the full run; pass a trial count to change it, e.g.
``python demos/04_experiment.py 100`` for the canonical 1,500 trials.
"""
# %%
import sys

from smithian.experiment import ExperimentPlan, run_experiment, summarize

trials = int(sys.argv[1]) if len(sys.argv) > 1 else 30
plan = ExperimentPlan(trials_per_cell=trials, bootstrap_resamples=2000)
records = run_experiment(plan)
report = summarize(records, plan.stats_seed, plan.bootstrap_resamples, plan.ci_level, plan)

# %%
print(f"{'cost':>5} " + " ".join(f"{c:>16}" for c in plan.conditions) + f" {'bound':>7}")
for cost in plan.costs:
    means = [report.cell(c, cost)["mean"] for c in plan.conditions]
    print(f"{cost:5g} " + " ".join(f"{m:16.1f}" for m in means) + f" {report.upper_bound[repr(cost)]:7.1f}")

# %%
a = report.anova
print(f"model F({a['model']['df']}, {a['df_error']}) = {a['model']['F']:.3f}, p = {a['model']['p']:.4f}")
for row in report.posthoc:
    print(f"{row['pair'][0]} vs {row['pair'][1]}: F = {row['F']:.3f}, adjusted p = {row['p_adj']:.4f}")
for row in report.per_cost:
    print(f"cost {row['cost']:g}: F({row['df1']}, {row['df2']}) = {row['F']:.3f}, p = {row['p']:.3f}")
