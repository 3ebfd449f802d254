"""Balanced ANOVA, Bonferroni post-hoc contrasts, and percentile bootstrap intervals."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from itertools import combinations

import numpy as np
from scipy.special import betainc


def f_sf(F: float, df1: float, df2: float) -> float:
    """Upper tail P(X > F) of the F distribution via the regularized incomplete beta."""
    if np.isnan(F):
        return float("nan")
    if np.isinf(F):
        return 0.0
    if F <= 0.0:
        return 1.0
    return float(betainc(df2 / 2.0, df1 / 2.0, df2 / (df2 + df1 * F)))


def _f_ratio(ms_effect, ms_error, ss_effect):
    if ss_effect == 0.0:
        return 0.0
    if ms_error == 0.0:
        return float("inf")
    return ms_effect / ms_error


@dataclass(frozen=True)
class Effect:
    ss: float
    df: int
    F: float
    p: float


@dataclass(frozen=True)
class AnovaTable:
    a: Effect
    b: Effect
    interaction: Effect
    ss_error: float
    df_error: int
    ss_total: float

    def to_dict(self):
        return asdict(self)


def _cells(values, fa, fb):
    values = np.asarray(values, float)
    fa, fb = np.asarray(fa), np.asarray(fb)
    la, lb = list(dict.fromkeys(fa.tolist())), list(dict.fromkeys(fb.tolist()))
    cells = [[values[(fa == x) & (fb == y)] for y in lb] for x in la]
    sizes = {len(c) for row in cells for c in row}
    if len(sizes) != 1 or 0 in sizes:
        raise ValueError(f"unbalanced design: cell sizes {sorted(sizes)}")
    return np.array(cells), la, lb


def two_way_anova(values, factor_a, factor_b) -> AnovaTable:
    """Fixed-effects two-way ANOVA with interaction for a balanced design."""
    data, la, lb = _cells(values, factor_a, factor_b)  # shape (A, B, n)
    A, B, n = data.shape
    grand = data.mean()
    cell = data.mean(axis=2)
    ma, mb = data.mean(axis=(1, 2)), data.mean(axis=(0, 2))
    ss_a = B * n * float(np.sum((ma - grand) ** 2))
    ss_b = A * n * float(np.sum((mb - grand) ** 2))
    ss_ab = n * float(np.sum((cell - ma[:, None] - mb[None, :] + grand) ** 2))
    ss_e = float(np.sum((data - cell[..., None]) ** 2))
    ss_t = float(np.sum((data - grand) ** 2))
    df_a, df_b, df_ab, df_e = A - 1, B - 1, (A - 1) * (B - 1), A * B * (n - 1)
    ms_e = ss_e / df_e if df_e > 0 else 0.0

    def effect(ss, df):
        F = _f_ratio(ss / df if df else 0.0, ms_e, ss if df else 0.0)
        return Effect(ss, df, F, f_sf(F, df, df_e) if df else 1.0)

    return AnovaTable(effect(ss_a, df_a), effect(ss_b, df_b), effect(ss_ab, df_ab), ss_e, df_e, ss_t)


def one_way_anova(*groups) -> Effect:
    """One-way ANOVA F test; returns the between-groups effect (df2 = N - k)."""
    groups = [np.asarray(g, float) for g in groups]
    if len(groups) < 2:
        raise ValueError("one-way ANOVA needs at least two groups")
    allv = np.concatenate(groups)
    grand = allv.mean()
    ss_b = float(sum(len(g) * (g.mean() - grand) ** 2 for g in groups))
    ss_w = float(sum(np.sum((g - g.mean()) ** 2) for g in groups))
    df1, df2 = len(groups) - 1, len(allv) - len(groups)
    F = _f_ratio(ss_b / df1, ss_w / df2 if df2 else 0.0, ss_b)
    return Effect(ss_b, df1, F, f_sf(F, df1, df2))


def bonferroni(p: float, m: int) -> float:
    return min(1.0, p * m)


def pairwise_bonferroni(groups: dict) -> list[dict]:
    """All pairwise one-way F tests with Bonferroni-adjusted p-values."""
    pairs = list(combinations(groups, 2))
    out = []
    for g1, g2 in pairs:
        eff = one_way_anova(groups[g1], groups[g2])
        df2 = len(groups[g1]) + len(groups[g2]) - 2
        out.append({"pair": [g1, g2], "F": eff.F, "df1": eff.df, "df2": df2,
                    "p_raw": eff.p, "p_adj": bonferroni(eff.p, len(pairs))})
    return out


def bootstrap_ci(values, resamples: int = 10_000, level: float = 0.95,
                 rng: np.random.Generator | int | None = 0) -> tuple[float, float]:
    """Percentile interval of resampled means."""
    values = np.asarray(values, float)
    if values.size == 0:
        raise ValueError("bootstrap needs a non-empty sample")
    rng = np.random.default_rng(rng)
    idx = rng.integers(0, values.size, size=(resamples, values.size))
    means = values[idx].mean(axis=1)
    tail = (1.0 - level) / 2.0 * 100.0
    lo, hi = np.percentile(means, [tail, 100.0 - tail])
    # percentile interpolation can stray by an ulp outside the sample range
    return float(np.clip(lo, values.min(), values.max())), float(np.clip(hi, values.min(), values.max()))
