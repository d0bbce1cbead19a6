"""Acceptance criteria A1-A10.

Each test implements one criterion at its stated tolerance and prints a
one-line PASS marker with the measured values (visible under ``pytest -s``
or in captured output).
"""

from __future__ import annotations

import random
import time

import pytest

from adaptroute.cli import main
from adaptroute.executors import ControlConfig, compare_reports, run_workload
from adaptroute.fusion import Answer, FusionCase, FusionPolicy, fuse
from adaptroute.metrics import linfit, pearson
from adaptroute.resources import ResourceMonitor, ResourceState
from adaptroute.router import (
    KAPPA_BOUND_HIGH,
    KAPPA_BOUND_LOW,
    PathStats,
    ThresholdSet,
    UtilityWeights,
    argmax_path,
    optimize_thresholds,
    select_path,
)
from adaptroute.rules import Rule, RuleRegistry, RuleType, exemplar_registry, match_rules
from adaptroute.types import (
    AnswerType,
    ConfigError,
    Dataset,
    RoutePath,
    RoutingMode,
)
from adaptroute.workload import complexity_latency_sample, generate_mixed_workload

SEED = 42
N = 1000


@pytest.fixture(scope="module")
def ablation_runs():
    items = generate_mixed_workload(N, seed=SEED)
    t0 = time.perf_counter()
    adaptive = run_workload(items, ControlConfig(mode=RoutingMode.ADAPTIVE), seed=SEED)
    forced = run_workload(items, ControlConfig(mode=RoutingMode.FORCED_HYBRID), seed=SEED)
    elapsed = time.perf_counter() - t0
    return adaptive, forced, elapsed


def test_a1_path_selection_oracle_equivalence():
    """Selection agrees with a literal transcription of the algorithm on a
    101x101 grid x 50 random valid threshold sets (510,050 cases), in <5s."""

    def transcription(kappa_eff, pressure, th, dataset):
        # independent literal transcription, dataset branches duplicated
        p_star = RoutePath.HYBRID
        if dataset is Dataset.DISCRETE_REASONING:
            if kappa_eff < th.t_low_k and pressure < th.t_low_r:
                p_star = RoutePath.SYMBOLIC
            elif kappa_eff >= th.t_high_k or pressure >= th.t_high_r:
                p_star = RoutePath.NEURAL
        else:
            if kappa_eff < th.t_low_k and pressure < th.t_low_r:
                p_star = RoutePath.SYMBOLIC
            elif kappa_eff >= th.t_high_k or pressure >= th.t_high_r:
                p_star = RoutePath.NEURAL
        return p_star

    rng = random.Random(2027)
    kappas = [1.25 * i / 100 for i in range(101)]
    pressures = [i / 100 for i in range(101)]
    datasets = list(Dataset)
    cases = 0
    t0 = time.perf_counter()
    for t in range(50):
        low_k = rng.uniform(KAPPA_BOUND_LOW, KAPPA_BOUND_HIGH)
        th = ThresholdSet(
            low_k,
            rng.uniform(low_k, KAPPA_BOUND_HIGH),
            rng.uniform(0.0, 1.0) * 0.999,
            1.0,
        )
        th = ThresholdSet(th.t_low_k, th.t_high_k, th.t_low_r,
                          rng.uniform(th.t_low_r, 1.0))
        dataset = datasets[t % len(datasets)]
        for k in kappas:
            for p in pressures:
                got = select_path(k, p, th, dataset).path
                want = transcription(k, p, th, dataset)
                assert got is want, (k, p, th)
                cases += 1
    elapsed = time.perf_counter() - t0
    assert cases == 510_050
    assert elapsed < 5.0
    print(f"[A1] PASS selection oracle: {cases} cases, 100% agreement, {elapsed:.2f}s")


def test_a2_ablation_direction(ablation_runs):
    """Forced-hybrid mean latency >= 1.5x adaptive; Cohen's d >= 0.5; <30s."""
    adaptive, forced, elapsed = ablation_runs
    cmp = compare_reports(adaptive, forced)
    mean_a = cmp["adaptive_mean_latency_s"]
    mean_f = cmp["forced_mean_latency_s"]
    d = cmp["cohens_d_latency"]
    assert mean_f >= 1.5 * mean_a, (mean_f, mean_a)
    assert d >= 0.5
    assert elapsed < 30.0
    print(
        f"[A2] PASS ablation: forced {mean_f:.3f}s vs adaptive {mean_a:.3f}s "
        f"(+{cmp['delta_latency_pct']:.1f}%), d={d:.2f}, runtime {elapsed:.1f}s"
    )


def test_a3_threshold_safety_under_random_optimization():
    """10,000 random optimizer steps keep thresholds in bounds and ordered."""
    rng = random.Random(99)
    th = ThresholdSet()
    violations = 0
    for step in range(10_000):
        if step % 500 == 499:  # occasional restart from a random valid set
            low_k = rng.uniform(KAPPA_BOUND_LOW, KAPPA_BOUND_HIGH)
            th = ThresholdSet(low_k, rng.uniform(low_k, KAPPA_BOUND_HIGH), 0.6, 0.85)
        stats = PathStats()
        for path in RoutePath:
            stats.record(path, rng.random() < 0.5, rng.uniform(0.0, 3.0), rng.random())
        th = optimize_thresholds(th, rng.random(), stats)
        if not (KAPPA_BOUND_LOW <= th.t_low_k <= th.t_high_k <= KAPPA_BOUND_HIGH):
            violations += 1
    assert violations == 0
    print("[A3] PASS threshold safety: 10000 steps, 0 violations")


def test_a4_fusion_worked_examples():
    """The four fusion confidence examples reproduce within 1e-9."""
    pol = FusionPolicy()

    def num(v, c, src):
        return Answer(float(v), AnswerType.NUMBER, c, src)

    agree = fuse(num(30, 0.8, RoutePath.SYMBOLIC), num(30, 0.9, RoutePath.NEURAL), pol)
    assert agree.case is FusionCase.AGREE
    assert abs(agree.c_fusion - 0.96) < 1e-9

    conflict = fuse(num(30, 0.8, RoutePath.SYMBOLIC), num(17, 0.9, RoutePath.NEURAL), pol)
    assert conflict.case is FusionCase.CONFLICT
    assert abs(conflict.c_fusion - 0.72) < 1e-9
    assert conflict.answer.value == 17.0  # higher-confidence (neural) value chosen

    mismatch = fuse(
        num(30, 0.6, RoutePath.SYMBOLIC),
        Answer("thirty", AnswerType.SPAN, 0.8, RoutePath.NEURAL),
        pol,
    )
    assert mismatch.case is FusionCase.MISMATCH
    assert abs(mismatch.c_fusion - 0.42) < 1e-9

    clamped = fuse(num(5, 1.0, RoutePath.SYMBOLIC), num(5, 1.0, RoutePath.NEURAL), pol)
    assert abs(clamped.c_fusion - 1.0) < 1e-9
    print("[A4] PASS fusion examples: 0.96 / 0.72 / 0.42 / clamp-to-1.0")


def test_a5_ema_contract():
    """Smoothed values match the reference recurrence within 1e-12; geometric
    convergence holds on constant streams."""
    rng = random.Random(314)
    worst = 0.0
    for _ in range(50):
        alpha = rng.choice([0.1, 0.3, 0.5, 0.9, 1.0])
        mon = ResourceMonitor(alpha=alpha)
        ref = None
        for i in range(200):
            raw = rng.random()
            got = mon.ingest_sample(ResourceState(raw, 0, 0, 0, float(i + 1))).cpu
            ref = raw if ref is None else alpha * raw + (1 - alpha) * ref
            worst = max(worst, abs(got - ref))
            assert abs(got - ref) <= 1e-12
    alpha = 0.3
    mon = ResourceMonitor(alpha=alpha)
    mon.ingest_sample(ResourceState(1.0, 0, 0, 0, 1.0))
    target, err0 = 0.25, 0.75
    for k in range(1, 80):
        got = mon.ingest_sample(ResourceState(target, 0, 0, 0, 1.0 + k)).cpu
        assert abs(got - target) <= (1 - alpha) ** k * err0 * (1 + 1e-9) + 1e-15
    print(f"[A5] PASS EMA contract: max |got-ref| = {worst:.2e} (<= 1e-12)")


def test_a6_correlation_pipeline():
    """Pearson r in [0.4, 0.6]; fit intercept in [1.75, 1.95], slope in
    [0.05, 0.15] on the built-in latency model, n=1000, fixed seed."""
    kappas, times = complexity_latency_sample(1000, seed=0)
    r = pearson(kappas, times)
    intercept, slope, _ = linfit(kappas, times)
    assert 0.4 <= r <= 0.6
    assert 1.75 <= intercept <= 1.95
    assert 0.05 <= slope <= 0.15
    print(f"[A6] PASS correlation: r={r:.3f}, intercept={intercept:.3f}, slope={slope:.3f}")


def test_a7_rule_engine_oracle():
    """Matching equals a naive all-rules scan on 1000 random instances, and
    the six exemplar rules match their table examples."""
    import re as _re

    rng = random.Random(777)
    words = ["score", "many", "how", "yards", "difference", "who", "threw",
             "players", "quarter", "game", "the", "of", "in"]

    def random_registry():
        reg = RuleRegistry(min_support=0)
        for i in range(rng.randint(1, 10)):
            choice = rng.random()
            if choice < 0.4:
                pattern = r"\b" + rng.choice(words) + r"\b"
            elif choice < 0.7:
                pattern = rng.choice(words) + r"\s+([\w]+)"
            else:
                pattern = r"([0-9]+)\s*" + rng.choice(words)
            reg.add(Rule(f"r{i:03d}", rng.choice(list(RuleType)), pattern, support=9))
        return reg

    checked = 0
    for _ in range(1000):
        reg = random_registry()
        text = " ".join(
            rng.choice(words + [str(rng.randint(0, 99))])
            for _ in range(rng.randint(2, 25))
        )
        got = [(m.rule.id, m.captures, m.span) for m in match_rules(text, reg)]
        naive = []
        for rule in sorted(reg.rules(), key=lambda r: r.id):
            m = _re.compile(rule.pattern).search(text)
            if m is not None:
                naive.append(
                    (rule.id, tuple(g if g is not None else "" for g in m.groups()), m.span())
                )
        assert got == naive
        checked += 1

    exemplars = exemplar_registry()
    samples = {
        "r001": "with the Saints losing to Tampa Bay 30 - 17 at home",
        "r002": "they met again in a Week 7 rematch",
        "r003": "with 26.20% of population, age 18 to 24",
        "r004": "how many players scored",
        "r005": "how many yards difference from midfield",
        "r006": "who threw the longest pass",
    }
    assert len(exemplars) == 6
    for rule_id, text in samples.items():
        assert rule_id in [m.rule.id for m in match_rules(text, exemplars)], rule_id
    count = [m for m in match_rules("how many players scored", exemplars)
             if m.rule.rule_type is RuleType.COUNT]
    assert count[0].captures[0] == "player"
    print(f"[A7] PASS rule oracle: {checked} random instances + 6 exemplars agree")


def test_a8_cmd_run_determinism(tmp_path):
    """Two cmd_run invocations with identical config and seed produce
    byte-identical report.json and records.csv."""
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", "--seed", "7", "--n", "200", "--out", str(out_a)]) == 0
    assert main(["run", "--seed", "7", "--n", "200", "--out", str(out_b)]) == 0
    report_a = (out_a / "report.json").read_bytes()
    report_b = (out_b / "report.json").read_bytes()
    records_a = (out_a / "records.csv").read_bytes()
    records_b = (out_b / "records.csv").read_bytes()
    assert report_a == report_b
    assert records_a == records_b
    print(f"[A8] PASS determinism: report.json ({len(report_a)}B) and "
          f"records.csv ({len(records_a)}B) byte-identical")


def test_a9_path_share_structure(ablation_runs):
    """Adaptive run: pure-symbolic share < 5%, hybrid+neural share > 95%."""
    adaptive, _, _ = ablation_runs
    d = adaptive.to_dict()
    decided = d["paths_decided"]
    total = sum(decided.values())
    sym_share = decided.get("symbolic", 0) / total
    rest_share = (decided.get("hybrid", 0) + decided.get("neural", 0)) / total
    assert sym_share < 0.05
    assert rest_share > 0.95
    print(f"[A9] PASS path shares: symbolic {sym_share:.1%}, hybrid+neural {rest_share:.1%}")


def test_a10_utility_invariances():
    """Argmax invariant under positive affine transforms; weight sum
    enforced at 1e-9 on construction."""
    rng = random.Random(4242)
    for _ in range(500):
        u = {p: rng.uniform(-2, 2) for p in RoutePath}
        a, b = rng.uniform(0.01, 50.0), rng.uniform(-10, 10)
        transformed = {p: a * v + b for p, v in u.items()}
        assert argmax_path(u) is argmax_path(transformed)
    with pytest.raises(ConfigError):
        UtilityWeights(0.6, 0.25, 0.15 + 1e-6)
    UtilityWeights(0.6, 0.25, 0.15 + 1e-10)  # inside tolerance: accepted
    print("[A10] PASS utility invariances: affine-invariant argmax, weight sum enforced")
