"""Run statistics: correlation, regression, effect sizes, bootstrap
confidence intervals, and resampling-based significance tests.

Everything here is deterministic given an explicit seed. Significance tests
default to seeded permutation rather than table lookups: exact under the
null, no special-function dependency.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, asdict
from typing import Callable, Sequence

import numpy as np

from .types import ValidationError


def _as_array(values: Sequence[float], name: str, min_n: int = 2) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValidationError(f"{name} must be one-dimensional")
    if arr.size < min_n:
        raise ValidationError(f"{name} needs at least {min_n} values, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise ValidationError(f"{name} contains non-finite values")
    return arr


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation. Undefined (raises) for zero variance."""
    x = _as_array(xs, "xs")
    y = _as_array(ys, "ys")
    if x.size != y.size:
        raise ValidationError("xs and ys must have equal length")
    xd = x - x.mean()
    yd = y - y.mean()
    sx = float(np.dot(xd, xd))
    sy = float(np.dot(yd, yd))
    if sx == 0.0 or sy == 0.0:
        raise ValidationError("pearson is undefined for zero-variance input")
    return float(np.dot(xd, yd) / math.sqrt(sx * sy))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=float)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        # 1-based average rank for the tie block [i, j]
        avg = (i + j) / 2.0 + 1.0
        ranks[order[i : j + 1]] = avg
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Rank correlation: Pearson over average ranks (ties averaged)."""
    x = _as_array(xs, "xs")
    y = _as_array(ys, "ys")
    if x.size != y.size:
        raise ValidationError("xs and ys must have equal length")
    return pearson(_average_ranks(x), _average_ranks(y))


def linfit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float, float]:
    """Ordinary least squares of y on x.

    Returns ``(intercept, slope, r_squared)`` with a residual-based R^2;
    constant targets give slope 0 and R^2 defined as 0.
    """
    x = _as_array(xs, "xs", min_n=3)
    y = _as_array(ys, "ys", min_n=3)
    if x.size != y.size:
        raise ValidationError("xs and ys must have equal length")
    xd = x - x.mean()
    sxx = float(np.dot(xd, xd))
    if sxx == 0.0:
        raise ValidationError("linfit is undefined for zero-variance x")
    slope = float(np.dot(xd, y - y.mean()) / sxx)
    intercept = float(y.mean() - slope * x.mean())
    resid = y - (intercept + slope * x)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(y - y.mean(), y - y.mean()))
    r_squared = 0.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return intercept, slope, r_squared


def cohens_d(group_a: Sequence[float], group_b: Sequence[float]) -> float:
    """Standardized mean difference with pooled standard deviation."""
    a = _as_array(group_a, "group_a")
    b = _as_array(group_b, "group_b")
    na, nb = a.size, b.size
    va = float(a.var(ddof=1))
    vb = float(b.var(ddof=1))
    pooled = math.sqrt(((na - 1) * va + (nb - 1) * vb) / (na + nb - 2))
    if pooled == 0.0:
        return 0.0
    return float((a.mean() - b.mean()) / pooled)


def bootstrap_ci(
    values: Sequence[float],
    statistic: Callable[[np.ndarray], float] = np.mean,
    iterations: int = 1000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Seeded percentile bootstrap interval for any statistic."""
    arr = _as_array(values, "values", min_n=1)
    if not 0.0 < level < 1.0:
        raise ValidationError(f"level must be in (0, 1), got {level}")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, arr.size, size=(iterations, arr.size))
    stats = np.apply_along_axis(statistic, 1, arr[idx])
    lo = (1.0 - level) / 2.0
    low, high = np.quantile(stats, [lo, 1.0 - lo])
    return float(low), float(high)


def welch_t(a: Sequence[float], b: Sequence[float]) -> float:
    """Welch's t statistic for unequal-variance two-sample comparison."""
    x = _as_array(a, "a")
    y = _as_array(b, "b")
    se = math.sqrt(x.var(ddof=1) / x.size + y.var(ddof=1) / y.size)
    diff = float(x.mean() - y.mean())
    if se == 0.0:
        # zero-variance groups: perfectly separated unless the means agree
        return 0.0 if diff == 0.0 else math.copysign(math.inf, diff)
    return diff / se


def paired_t(a: Sequence[float], b: Sequence[float]) -> float:
    """Paired-sample t statistic over elementwise differences."""
    x = _as_array(a, "a")
    y = _as_array(b, "b")
    if x.size != y.size:
        raise ValidationError("paired samples must have equal length")
    d = x - y
    sd = float(d.std(ddof=1))
    mean = float(d.mean())
    if sd == 0.0:
        return 0.0 if mean == 0.0 else math.copysign(math.inf, mean)
    return mean / (sd / math.sqrt(d.size))


def permutation_p(
    a: Sequence[float],
    b: Sequence[float],
    statistic: Callable[[np.ndarray, np.ndarray], float] | None = None,
    iterations: int = 1000,
    seed: int = 0,
) -> float:
    """Two-sided permutation p-value for a two-sample statistic.

    Labels are reshuffled under the null; the p-value is the fraction of
    permuted statistics at least as extreme as the observed one (with the
    +1 correction so p is never exactly zero).
    """
    x = _as_array(a, "a")
    y = _as_array(b, "b")
    stat = statistic or (lambda u, v: float(u.mean() - v.mean()))
    observed = abs(stat(x, y))
    pooled = np.concatenate([x, y])
    rng = np.random.default_rng(seed)
    hits = 0
    for _ in range(iterations):
        perm = rng.permutation(pooled)
        if abs(stat(perm[: x.size], perm[x.size :])) >= observed:
            hits += 1
    return (hits + 1) / (iterations + 1)


@dataclass
class StatReport:
    """Summary statistics for a complexity-vs-latency record set."""

    n: int
    pearson_r: float
    spearman_rho: float
    intercept: float
    slope: float
    r_squared: float
    latency_ci_low: float
    latency_ci_high: float
    p_value: float | None = None
    p_value_method: str = "permutation"
    cohens_d_paths: dict[str, float] | None = None

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2)


def analyze_records(
    records_csv: str, seed: int = 0, bootstrap_iterations: int = 1000
) -> StatReport:
    """Build a StatReport from a per-record CSV written by a workload run.

    Correlates effective complexity with latency, fits the latency model,
    bootstraps the mean-latency interval, and (when two or more paths are
    present) reports the effect size and permutation p-value between the two
    most common paths' latencies.
    """
    kappas: list[float] = []
    latencies: list[float] = []
    by_path: dict[str, list[float]] = {}
    with open(records_csv, "r", encoding="utf-8", newline="") as fh:
        for row in csv.DictReader(fh):
            k = float(row["kappa_eff"])
            lat = float(row["latency_s"])
            kappas.append(k)
            latencies.append(lat)
            by_path.setdefault(row["final_path"], []).append(lat)
    if len(kappas) < 3:
        raise ValidationError("need at least 3 records for analysis")
    intercept, slope, r2 = linfit(kappas, latencies)
    low, high = bootstrap_ci(latencies, iterations=bootstrap_iterations, seed=seed)
    d_by_pair: dict[str, float] = {}
    p_value: float | None = None
    ranked = sorted(by_path.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    if len(ranked) >= 2 and len(ranked[0][1]) >= 2 and len(ranked[1][1]) >= 2:
        (pa, la), (pb, lb) = ranked[0], ranked[1]
        d_by_pair[f"{pa}_vs_{pb}"] = cohens_d(la, lb)
        p_value = permutation_p(la, lb, seed=seed)
    return StatReport(
        n=len(kappas),
        pearson_r=pearson(kappas, latencies),
        spearman_rho=spearman(kappas, latencies),
        intercept=intercept,
        slope=slope,
        r_squared=r2,
        latency_ci_low=low,
        latency_ci_high=high,
        p_value=p_value,
        cohens_d_paths=d_by_pair or None,
    )
