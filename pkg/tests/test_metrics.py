"""Statistics toolkit: correlation, regression, effect sizes, resampling."""

from __future__ import annotations

import math
import random

import numpy as np
import pytest

from adaptroute.metrics import (
    analyze_records,
    bootstrap_ci,
    cohens_d,
    linfit,
    paired_t,
    pearson,
    permutation_p,
    spearman,
    welch_t,
)
from adaptroute.types import ValidationError


def test_pearson_trivials():
    xs = [1.0, 2.0, 3.0, 4.0]
    assert pearson(xs, xs) == pytest.approx(1.0)
    assert pearson(xs, [-x for x in xs]) == pytest.approx(-1.0)


def test_pearson_hand_value():
    # product-moment by hand: cov = 5, var_x = 2, var_y = 38/3 -> 0.993399...
    assert pearson([1, 2, 3], [2, 4, 7]) == pytest.approx(0.9933992677987828, abs=1e-12)


def test_pearson_zero_variance_undefined():
    with pytest.raises(ValidationError):
        pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(ValidationError):
        pearson([1.0], [2.0])


def test_pearson_affine_invariance_sign():
    rng = random.Random(6)
    xs = [rng.random() for _ in range(50)]
    for a, b in [(2.5, 1.0), (-3.0, 4.0), (0.01, -2.0)]:
        ys = [a * x + b for x in xs]
        assert pearson(xs, ys) == pytest.approx(math.copysign(1.0, a))


def test_spearman_monotone_and_reverse():
    xs = [1.0, 2.0, 3.0, 4.0]
    assert spearman(xs, [x**3 for x in xs]) == pytest.approx(1.0)
    assert spearman(xs, list(reversed(xs))) == pytest.approx(-1.0)


def test_spearman_average_rank_ties():
    assert spearman([1, 1, 2], [3, 3, 5]) == pytest.approx(1.0)


def test_spearman_invariant_under_monotone_transform():
    rng = random.Random(8)
    xs = [rng.uniform(0.1, 5.0) for _ in range(80)]
    ys = [rng.uniform(0.1, 5.0) for _ in range(80)]
    base = spearman(xs, ys)
    assert spearman([math.exp(x) for x in xs], ys) == pytest.approx(base, abs=1e-12)
    assert spearman(xs, [math.log(y) for y in ys]) == pytest.approx(base, abs=1e-12)


def test_linfit_exact_line():
    xs = [0.0, 1.0, 2.0, 3.0]
    intercept, slope, r2 = linfit(xs, [2 * x + 1 for x in xs])
    assert intercept == pytest.approx(1.0)
    assert slope == pytest.approx(2.0)
    assert r2 == pytest.approx(1.0)


def test_linfit_constant_targets():
    intercept, slope, r2 = linfit([0.0, 1.0, 2.0], [5.0, 5.0, 5.0])
    assert slope == 0.0
    assert intercept == pytest.approx(5.0)
    assert r2 == 0.0


def test_linfit_recovers_generative_model():
    rng = np.random.default_rng(0)
    kappas = rng.uniform(0.0, 8.0, 1000)
    times = 1.85 + 0.1 * kappas + rng.normal(0.0, 0.4, 1000)
    intercept, slope, _ = linfit(kappas, times)
    assert 1.75 <= intercept <= 1.95
    assert 0.05 <= slope <= 0.15


def test_linfit_residuals_orthogonal_to_x():
    rng = np.random.default_rng(3)
    xs = rng.uniform(0, 10, 200)
    ys = 0.5 * xs + rng.normal(0, 1, 200)
    intercept, slope, _ = linfit(xs, ys)
    resid = ys - (intercept + slope * xs)
    assert abs(float(np.dot(resid, xs))) / len(xs) < 1e-9


def test_cohens_d_trivials():
    assert cohens_d([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    # means one apart, both sample SDs exactly 1
    assert cohens_d([1.0, 2.0, 3.0], [0.0, 1.0, 2.0]) == pytest.approx(1.0)


def test_cohens_d_sampling_scale():
    rng = np.random.default_rng(123)
    a = rng.normal(0.0, 1.0, 1000)
    b = rng.normal(0.78, 1.0, 1000)
    assert 0.68 <= cohens_d(b, a) <= 0.88


def test_bootstrap_constant_values():
    low, high = bootstrap_ci([2.5] * 20, seed=1)
    assert low == high == 2.5


def test_bootstrap_deterministic_given_seed():
    values = list(np.random.default_rng(9).normal(0, 1, 50))
    assert bootstrap_ci(values, seed=4) == bootstrap_ci(values, seed=4)
    assert bootstrap_ci(values, seed=4) != bootstrap_ci(values, seed=5)


def test_bootstrap_coverage_bernoulli_mean():
    rng = np.random.default_rng(2024)
    covered = 0
    for trial in range(100):
        values = (rng.random(1000) < 0.5).astype(float)
        low, high = bootstrap_ci(values, iterations=1000, seed=trial)
        if low <= 0.5 <= high:
            covered += 1
    assert covered >= 90


def test_bootstrap_validates_level():
    with pytest.raises(ValidationError):
        bootstrap_ci([1.0, 2.0], level=1.5)


def test_permutation_p_detects_shift_and_null():
    rng = np.random.default_rng(7)
    a = rng.normal(0.0, 1.0, 60)
    b = rng.normal(1.5, 1.0, 60)
    assert permutation_p(a, b, iterations=500, seed=0) < 0.01
    c = rng.normal(0.0, 1.0, 60)
    d = rng.normal(0.0, 1.0, 60)
    assert permutation_p(c, d, iterations=500, seed=0) > 0.05
    assert permutation_p(a, b, seed=3) == permutation_p(a, b, seed=3)


def test_t_statistics_direction():
    a = [5.0, 6.0, 7.0, 8.0]
    b = [1.0, 2.0, 3.0, 4.0]
    assert welch_t(a, b) > 0
    assert paired_t(a, b) > 0
    assert paired_t(a, a) == 0.0
    with pytest.raises(ValidationError):
        paired_t([1.0, 2.0], [1.0, 2.0, 3.0])


def test_analyze_records_from_run(tmp_path):
    from adaptroute.cli import write_records_csv
    from adaptroute.executors import run_workload
    from adaptroute.workload import generate_mixed_workload

    items = generate_mixed_workload(80, seed=3)
    report = run_workload(items, seed=3)
    path = tmp_path / "records.csv"
    write_records_csv(report.records, str(path))
    stat = analyze_records(str(path), seed=0)
    assert stat.n == 80
    assert -1.0 <= stat.pearson_r <= 1.0
    assert -1.0 <= stat.spearman_rho <= 1.0
    assert stat.latency_ci_low <= stat.latency_ci_high
    assert stat.p_value is None or 0.0 <= stat.p_value <= 1.0
    assert stat.cohens_d_paths
    parsed = stat.to_json()
    assert '"pearson_r"' in parsed
