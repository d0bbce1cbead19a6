"""Path executors, the calibrated synthetic stand-ins, and the per-query
control manager.

The manager wires the full per-query pipeline: rule matching and path hints,
complexity scoring, pressure readout, path selection, execution with retries
and ordered fallback, hybrid composition with answer fusion, a hard query
deadline, and outcome recording into the router's path statistics.

Synthetic executors replace the real symbolic engine and the retrieval+
generation stack with seeded stochastic models: latency is linear in query
complexity plus gaussian noise, answers are correct with a calibrated
probability, and each execution injects per-channel utilization deltas into
the resource trace. The symbolic model's steep latency slope reflects how
constraint engines degrade on complex inputs; it is what makes forcing every
query through the hybrid path visibly expensive.
"""

from __future__ import annotations

import hashlib
import logging
import math
import random
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Protocol, Sequence

from .complexity import (
    ComplexityBreakdown,
    ComplexityWeights,
    DEFAULT_HINT_DELTA,
    LexicalSalience,
    Query,
    SalienceProvider,
    compute_kappa,
    effective_complexity,
)
from .fusion import Answer, FusionCase, FusionOutcome, FusionPolicy, exact_match, fallback
from .resources import MetricSource, ResourceMonitor, SmoothedState, SyntheticLoadSource
from .router import PathDecision, Router, RouterConfig, ThresholdSet
from .rules import RuleRegistry, exemplar_registry, match_rules, suggest_path
from .types import (
    AnswerType,
    ConfigError,
    RoutePath,
    RoutingMode,
    ValidationError,
)
from .workload import WorkloadItem

logger = logging.getLogger(__name__)

PERIOD_MS = 100.0
_FALLBACK_ORDER = (RoutePath.HYBRID, RoutePath.NEURAL, RoutePath.SYMBOLIC)
_CHANNELS = ("cpu", "gpu", "mem", "power")


@dataclass(frozen=True)
class ExecOutcome:
    """What one executor attempt produced: an answer or a failure, the
    latency it consumed, and the per-channel resource cost it caused."""

    answer: Answer | None
    latency_s: float
    cost: Mapping[str, float]
    failed: bool = False
    failure_reason: str | None = None


class PathExecutor(Protocol):
    """Executes a query on one path; context is the complexity score and an
    optional gold answer (used by synthetic stand-ins to emit calibrated
    correctness)."""

    def execute(self, q: Query, kappa: float, gold: Answer | None = None) -> ExecOutcome: ...


@dataclass(frozen=True)
class PathModelParams:
    """Synthetic latency/accuracy/cost model for one path."""

    base_latency_s: float
    latency_kappa_slope: float
    latency_noise_sigma: float
    accuracy: float
    cost: Mapping[str, float]
    failure_rate: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.accuracy <= 1.0:
            raise ValidationError(f"accuracy must be in [0, 1], got {self.accuracy}")
        if self.latency_noise_sigma < 0:
            raise ValidationError("latency_noise_sigma must be >= 0")
        if not 0.0 <= self.failure_rate <= 1.0:
            raise ValidationError("failure_rate must be in [0, 1]")


@dataclass(frozen=True)
class SyntheticModel:
    """Per-path synthetic models plus the seed that makes runs reproducible.

    Default calibration anchors the base latencies and accuracies to the
    measured single-path baselines (symbolic 0.362 s at 31.4% exact match,
    neural 0.904 s at 97.8%, hybrid 0.985 s at 99.4%). The symbolic slope is
    steep; the neural slope matches the fitted latency model.
    """

    symbolic: PathModelParams = PathModelParams(
        0.362, 4.0, 0.03, 0.314,
        cost={"cpu": 0.05, "gpu": 0.01, "mem": 0.01, "power": 0.02},
    )
    neural: PathModelParams = PathModelParams(
        0.904, 0.1, 0.08, 0.978,
        cost={"cpu": 0.02, "gpu": 0.18, "mem": 0.04, "power": 0.10},
    )
    hybrid: PathModelParams = PathModelParams(
        0.985, 0.1, 0.08, 0.994,
        cost={"cpu": 0.07, "gpu": 0.19, "mem": 0.05, "power": 0.12},
    )
    seed: int = 0

    def params(self, path: RoutePath) -> PathModelParams:
        return {
            RoutePath.SYMBOLIC: self.symbolic,
            RoutePath.NEURAL: self.neural,
            RoutePath.HYBRID: self.hybrid,
        }[path]

    @classmethod
    def from_dict(cls, obj: Mapping) -> "SyntheticModel":
        def parse(path: str, current: PathModelParams) -> PathModelParams:
            sub = obj.get(path)
            if sub is None:
                return current
            return PathModelParams(
                base_latency_s=float(sub.get("base_latency_s", current.base_latency_s)),
                latency_kappa_slope=float(
                    sub.get("latency_kappa_slope", current.latency_kappa_slope)
                ),
                latency_noise_sigma=float(
                    sub.get("latency_noise_sigma", current.latency_noise_sigma)
                ),
                accuracy=float(sub.get("accuracy", current.accuracy)),
                cost=dict(sub.get("cost", current.cost)),
                failure_rate=float(sub.get("failure_rate", current.failure_rate)),
            )

        default = cls()
        return cls(
            symbolic=parse("symbolic", default.symbolic),
            neural=parse("neural", default.neural),
            hybrid=parse("hybrid", default.hybrid),
            seed=int(obj.get("seed", default.seed)),
        )


def _derived_rng(seed: int, *parts: object) -> random.Random:
    """Per-query, per-path RNG so execution order cannot perturb outcomes."""
    digest = hashlib.blake2s(
        ("|".join(str(p) for p in (seed, *parts))).encode("utf-8"), digest_size=8
    )
    return random.Random(int.from_bytes(digest.digest(), "big"))


def _wrong_answer(gold: Answer, rng: random.Random) -> Answer:
    """A deterministic wrong answer: usually same-typed (value conflict),
    occasionally a different type entirely."""
    if rng.random() < 0.15:
        if gold.answer_type is AnswerType.NUMBER:
            return replace(gold, value="an unresolved span", answer_type=AnswerType.SPAN)
        return replace(gold, value=float(rng.randint(100, 999)),
                       answer_type=AnswerType.NUMBER)
    if gold.answer_type is AnswerType.NUMBER:
        return replace(gold, value=float(gold.value) + rng.randint(1, 9))
    if gold.answer_type is AnswerType.SPAN:
        return replace(gold, value=str(gold.value) + " county")
    y, m, d = gold.value  # type: ignore[misc]
    return replace(gold, value=(y + 1, m, d))


def synthetic_execute(
    path: RoutePath,
    q: Query,
    kappa: float,
    model: SyntheticModel,
    rng: random.Random,
    gold: Answer | None = None,
) -> ExecOutcome:
    """One synthetic execution: seeded latency, correctness and cost.

    Latency is ``base + slope * kappa + N(0, sigma)`` floored at zero. The
    emitted answer equals the gold value with probability ``accuracy`` (a
    fabricated number when no gold is known); hard failures occur with the
    model's failure rate.
    """
    p = model.params(path)
    latency = max(0.0, p.base_latency_s + p.latency_kappa_slope * kappa
                  + (rng.gauss(0.0, p.latency_noise_sigma) if p.latency_noise_sigma else 0.0))
    if p.failure_rate and rng.random() < p.failure_rate:
        return ExecOutcome(None, latency, dict(p.cost), failed=True,
                           failure_reason="synthetic_failure")
    correct = rng.random() < p.accuracy
    if gold is not None:
        value_answer = (
            Answer(gold.value, gold.answer_type, rng.uniform(0.70, 0.95), path)
            if correct
            else replace(_wrong_answer(gold, rng), confidence=rng.uniform(0.30, 0.60),
                         source=path)
        )
    else:
        value_answer = Answer(float(rng.randint(0, 100)), AnswerType.NUMBER,
                              rng.uniform(0.40, 0.90), path)
    return ExecOutcome(value_answer, latency, dict(p.cost))


class SyntheticExecutor:
    """PathExecutor backed by the synthetic model for one path."""

    def __init__(self, path: RoutePath, model: SyntheticModel) -> None:
        self.path = path
        self.model = model

    def execute(self, q: Query, kappa: float, gold: Answer | None = None) -> ExecOutcome:
        rng = _derived_rng(self.model.seed, q.id, self.path.value)
        return synthetic_execute(self.path, q, kappa, self.model, rng, gold)


@dataclass(frozen=True)
class ControlConfig:
    """Per-query processing limits and the routing mode.

    ``retry_limit`` is the attempt budget on the selected path: the path gets
    ``max(1, retry_limit)`` tries before fallback, and the record's retry
    count is the number of failed attempts charged against that budget.
    """

    retry_limit: int = 2
    max_query_time_s: float = 30.0
    optimizer_cadence: int = 10
    mode: RoutingMode = RoutingMode.ADAPTIVE
    hint_delta: float = DEFAULT_HINT_DELTA
    fusion_overhead_s: float = 0.02

    def __post_init__(self) -> None:
        if self.retry_limit < 0:
            raise ConfigError("retry_limit must be >= 0")
        if self.max_query_time_s <= 0:
            raise ConfigError("max_query_time_s must be positive")
        if self.optimizer_cadence < 1:
            raise ConfigError("optimizer_cadence must be >= 1")


@dataclass(frozen=True)
class ExecutionRecord:
    """Everything recorded about one processed query."""

    query_id: str
    dataset: str
    decision: PathDecision
    final_path: RoutePath
    breakdown: ComplexityBreakdown
    answer: Answer | None
    latency_s: float
    cost: float
    success: bool
    correct: bool | None
    confidence: float
    fusion_case: FusionCase | None
    retries: int
    timed_out: bool
    resource: SmoothedState | None


class ControlManager:
    """Orchestrates per-query processing against a fixed set of dependencies.

    Thread-safe for concurrent ``process_query`` calls: the router serializes
    stats/threshold updates and the monitor publishes immutable snapshots.
    """

    def __init__(
        self,
        router: Router,
        monitor: ResourceMonitor,
        registry: RuleRegistry | None = None,
        salience: SalienceProvider | None = None,
        weights: ComplexityWeights | None = None,
        fusion_policy: FusionPolicy | None = None,
        executors: Mapping[RoutePath, PathExecutor] | None = None,
        config: ControlConfig | None = None,
        cost_sink: Callable[[Mapping[str, float]], None] | None = None,
    ) -> None:
        self.router = router
        self.monitor = monitor
        self.registry = registry if registry is not None else exemplar_registry()
        self.salience = salience or LexicalSalience()
        self.weights = weights or ComplexityWeights()
        self.fusion_policy = fusion_policy or FusionPolicy()
        self.config = config or ControlConfig()
        self.cost_sink = cost_sink
        if executors is None:
            model = SyntheticModel()
            executors = {
                RoutePath.SYMBOLIC: SyntheticExecutor(RoutePath.SYMBOLIC, model),
                RoutePath.NEURAL: SyntheticExecutor(RoutePath.NEURAL, model),
            }
        missing = {RoutePath.SYMBOLIC, RoutePath.NEURAL} - set(executors)
        if missing:
            raise ConfigError(f"executors missing for paths: {sorted(p.value for p in missing)}")
        self.executors = dict(executors)

    def score(self, q: Query) -> ComplexityBreakdown:
        """Complexity scoring with rule hints folded in."""
        matches = match_rules(q.text, self.registry)
        hint = suggest_path(matches)
        b = compute_kappa(q, self.salience, self.weights)
        return effective_complexity(b, hint, self.config.hint_delta)

    def _execute_once(
        self, path: RoutePath, q: Query, kappa: float, gold: Answer | None
    ) -> tuple[ExecOutcome, FusionOutcome | None]:
        """Run one attempt; the hybrid path composes both executors and fuses."""
        if path is not RoutePath.HYBRID:
            return self.executors[path].execute(q, kappa, gold), None
        hybrid = self.executors.get(RoutePath.HYBRID)
        if hybrid is not None:
            return hybrid.execute(q, kappa, gold), None
        sym = self.executors[RoutePath.SYMBOLIC].execute(q, kappa, gold)
        neur = self.executors[RoutePath.NEURAL].execute(q, kappa, gold)
        fused = fallback(
            None if sym.failed else sym.answer,
            None if neur.failed else neur.answer,
            self.fusion_policy,
        )
        logger.debug(
            "fusion audit query=%s sym=%r neur=%r type_match=%s value_match=%s "
            "case=%s c_fusion=%.4f",
            q.id, sym.answer, neur.answer, fused.type_match, fused.value_match,
            fused.case.value, fused.c_fusion,
        )
        latency = max(sym.latency_s, neur.latency_s) + self.config.fusion_overhead_s
        cost = {
            c: sym.cost.get(c, 0.0) + neur.cost.get(c, 0.0) for c in _CHANNELS
        }
        outcome = ExecOutcome(
            answer=fused.answer,
            latency_s=latency,
            cost=cost,
            failed=fused.answer is None,
            failure_reason="both_components_failed" if fused.answer is None else None,
        )
        return outcome, fused

    def process_query(self, q: Query, gold: Answer | None = None) -> ExecutionRecord:
        """Process one query end to end and record its outcome.

        On repeated executor failure the selected path's attempt budget is
        exhausted first, then fallback paths are tried once each in the order
        hybrid, neural, symbolic (skipping the failed one). The query
        deadline caps total processing time; hitting it yields a timed-out
        record counted as a failure.
        """
        cfg = self.config
        b = self.score(q)
        snapshot = self.monitor.snapshot()
        pressure = self.monitor.current_pressure()
        decision = self.router.decide(b.kappa_eff, pressure, q.dataset)

        try_order = [decision.path] + [p for p in _FALLBACK_ORDER if p != decision.path]
        total_latency = 0.0
        total_cost = {c: 0.0 for c in _CHANNELS}
        retries = 0
        timed_out = False
        answer: Answer | None = None
        fused: FusionOutcome | None = None
        final_path = decision.path

        for path in try_order:
            attempts = max(1, cfg.retry_limit) if path is decision.path else 1
            final_path = path
            done = False
            for _ in range(attempts):
                outcome, fusion_outcome = self._execute_once(path, q, b.kappa_eff, gold)
                total_latency += outcome.latency_s
                for c, v in outcome.cost.items():
                    total_cost[c] = total_cost.get(c, 0.0) + v
                if total_latency >= cfg.max_query_time_s:
                    total_latency = cfg.max_query_time_s
                    timed_out = True
                    done = True
                    break
                if not outcome.failed and outcome.answer is not None:
                    answer = outcome.answer
                    fused = fusion_outcome
                    done = True
                    break
                if path is decision.path and retries < cfg.retry_limit:
                    retries += 1
            if done:
                break
            logger.debug("query %s: %s path exhausted %d attempt(s), falling back",
                         q.id, path.value, attempts)
        if timed_out:
            answer = None
            fused = None

        confidence = 0.0
        fusion_case = None
        if fused is not None:
            confidence = fused.c_fusion
            fusion_case = fused.case
        elif answer is not None:
            confidence = answer.confidence

        if gold is not None:
            correct: bool | None = answer is not None and exact_match(
                answer, gold, self.fusion_policy
            )
            success = bool(correct)
        else:
            correct = None
            success = answer is not None and confidence >= self.fusion_policy.min_confidence

        cost_scalar = sum(total_cost.values()) / len(_CHANNELS)
        if self.cost_sink is not None:
            self.cost_sink(total_cost)
        self.router.record(final_path, success, total_latency, cost_scalar, pressure)

        return ExecutionRecord(
            query_id=q.id,
            dataset=q.dataset.value,
            decision=decision,
            final_path=final_path,
            breakdown=b,
            answer=answer,
            latency_s=total_latency,
            cost=cost_scalar,
            success=success,
            correct=correct,
            confidence=confidence,
            fusion_case=fusion_case,
            retries=retries,
            timed_out=timed_out,
            resource=snapshot,
        )


def _percentile(sorted_values: Sequence[float], q: float) -> float:
    if not sorted_values:
        return 0.0
    # nearest-rank percentile: deterministic and exact over the sample
    idx = max(0, math.ceil(q * len(sorted_values)) - 1)
    return sorted_values[idx]


def _median(sorted_values: Sequence[float]) -> float:
    n = len(sorted_values)
    if n == 0:
        return 0.0
    mid = n // 2
    if n % 2 == 1:
        return sorted_values[mid]
    return (sorted_values[mid - 1] + sorted_values[mid]) / 2.0


@dataclass
class ResourceAggregate:
    """Streaming mean/max per channel plus pressure over sampler ticks."""

    count: int = 0
    sums: dict[str, float] = field(default_factory=lambda: {c: 0.0 for c in _CHANNELS})
    maxes: dict[str, float] = field(default_factory=lambda: {c: 0.0 for c in _CHANNELS})
    pressure_sum: float = 0.0
    pressure_max: float = 0.0

    def add(self, s: SmoothedState) -> None:
        self.count += 1
        for c in _CHANNELS:
            v = getattr(s, c)
            self.sums[c] += v
            self.maxes[c] = max(self.maxes[c], v)
        p = max(s.cpu, s.gpu, s.mem)
        self.pressure_sum += p
        self.pressure_max = max(self.pressure_max, p)

    def to_dict(self) -> dict:
        if self.count == 0:
            return {"samples": 0}
        out: dict = {"samples": self.count}
        for c in _CHANNELS:
            out[c] = {"mean": self.sums[c] / self.count, "max": self.maxes[c]}
        out["pressure"] = {
            "mean": self.pressure_sum / self.count,
            "max": self.pressure_max,
        }
        return out


@dataclass
class WorkloadReport:
    """Aggregate view of a run plus the full per-query record list."""

    n: int
    seed: int
    mode: str
    records: list[ExecutionRecord]
    resources: ResourceAggregate
    trajectory: list[tuple[int, ThresholdSet]]
    path_stats: dict

    def to_dict(self) -> dict:
        latency_sum = sum(r.latency_s for r in self.records)
        latencies = sorted(r.latency_s for r in self.records)
        decided: dict[str, int] = {}
        final: dict[str, int] = {}
        reasons: dict[str, int] = {}
        fusion_cases: dict[str, int] = {}
        n_gold = n_correct = n_success = timeouts = retries_total = 0
        for r in self.records:
            decided[r.decision.path.value] = decided.get(r.decision.path.value, 0) + 1
            final[r.final_path.value] = final.get(r.final_path.value, 0) + 1
            reasons[r.decision.reason.value] = reasons.get(r.decision.reason.value, 0) + 1
            if r.fusion_case is not None:
                fusion_cases[r.fusion_case.value] = fusion_cases.get(r.fusion_case.value, 0) + 1
            if r.correct is not None:
                n_gold += 1
                n_correct += int(r.correct)
            n_success += int(r.success)
            timeouts += int(r.timed_out)
            retries_total += r.retries
        first = self.trajectory[0][1] if self.trajectory else None
        last = self.trajectory[-1][1] if self.trajectory else None

        def th_dict(th: ThresholdSet | None) -> dict | None:
            if th is None:
                return None
            return {"t_low_k": th.t_low_k, "t_high_k": th.t_high_k,
                    "t_low_r": th.t_low_r, "t_high_r": th.t_high_r}

        return {
            "n": self.n,
            "seed": self.seed,
            "mode": self.mode,
            "paths_decided": dict(sorted(decided.items())),
            "paths_final": dict(sorted(final.items())),
            "reasons": dict(sorted(reasons.items())),
            "fusion_cases": dict(sorted(fusion_cases.items())),
            "latency": {
                "mean": latency_sum / len(latencies) if latencies else 0.0,
                "median": _median(latencies),
                "p95": _percentile(latencies, 0.95),
                "sum": latency_sum,
            },
            "exact_match": {
                "n_gold": n_gold,
                "n_correct": n_correct,
                "rate": (n_correct / n_gold) if n_gold else None,
            },
            "success_rate": (n_success / self.n) if self.n else None,
            "timeouts": timeouts,
            "retries_total": retries_total,
            "resources": self.resources.to_dict(),
            "thresholds": {
                "initial": th_dict(first),
                "final": th_dict(last),
                "changes": max(0, len(self.trajectory) - 1),
            },
            "path_stats": self.path_stats,
        }


def run_workload(
    items: Sequence[WorkloadItem],
    cfg: ControlConfig | None = None,
    model: SyntheticModel | None = None,
    seed: int = 0,
    registry: RuleRegistry | None = None,
    thresholds: ThresholdSet | None = None,
    load_source: MetricSource | None = None,
) -> WorkloadReport:
    """Process a workload sequentially against a freshly wired engine.

    Bit-reproducible given (items, config, model, seed): the load source,
    executors and per-query RNGs all derive from the seed, and queries are
    processed in order. The resource sampler advances one period before each
    dispatch and then by the simulated latency of the query; executor cost
    deltas feed back into the load source. A source without ``add_load``
    (e.g. a trace replay) is driven read-only, and an exhausted source leaves
    the last smoothed state in place flagged stale.
    """
    cfg = cfg or ControlConfig()
    model = model or SyntheticModel(seed=seed)
    source = load_source or SyntheticLoadSource(seed)
    monitor = ResourceMonitor()
    router = Router(
        RouterConfig(
            thresholds=thresholds or ThresholdSet(),
            mode=cfg.mode,
            optimize_every=cfg.optimizer_cadence,
        )
    )
    resources = ResourceAggregate()

    def tick(times: int = 1) -> None:
        for _ in range(times):
            sample = source.read()
            if sample is None:
                stale = monitor.mark_stale()
                if stale is not None:
                    resources.add(stale)
                continue
            resources.add(monitor.ingest_sample(sample))

    manager = ControlManager(
        router=router,
        monitor=monitor,
        registry=registry,
        executors={
            RoutePath.SYMBOLIC: SyntheticExecutor(RoutePath.SYMBOLIC, model),
            RoutePath.NEURAL: SyntheticExecutor(RoutePath.NEURAL, model),
        },
        config=cfg,
        cost_sink=getattr(source, "add_load", None),
    )

    tick(5)  # settle the EMA before the first dispatch
    records: list[ExecutionRecord] = []
    for item in items:
        tick(1)
        rec = manager.process_query(item.query, item.gold)
        records.append(rec)
        # advance the simulated clock by the query's processing time
        steps = min(600, int(rec.latency_s / (PERIOD_MS / 1000.0)))
        tick(steps)

    return WorkloadReport(
        n=len(records),
        seed=seed,
        mode=cfg.mode.value,
        records=records,
        resources=resources,
        trajectory=router.trajectory,
        path_stats=router.stats.as_dict(),
    )


def compare_reports(adaptive: WorkloadReport, forced: WorkloadReport) -> dict:
    """Ablation comparison: forced-path run against the adaptive run."""
    from .metrics import cohens_d

    lat_a = [r.latency_s for r in adaptive.records]
    lat_f = [r.latency_s for r in forced.records]
    mean_a = sum(lat_a) / len(lat_a) if lat_a else 0.0
    mean_f = sum(lat_f) / len(lat_f) if lat_f else 0.0
    em_a = adaptive.to_dict()["exact_match"]["rate"]
    em_f = forced.to_dict()["exact_match"]["rate"]
    return {
        "adaptive_mean_latency_s": mean_a,
        "forced_mean_latency_s": mean_f,
        "delta_latency_pct": ((mean_f - mean_a) / mean_a * 100.0) if mean_a else None,
        "adaptive_em": em_a,
        "forced_em": em_f,
        "delta_em_pp": ((em_f - em_a) * 100.0) if em_a is not None and em_f is not None else None,
        "cohens_d_latency": cohens_d(lat_f, lat_a) if len(lat_a) > 1 and len(lat_f) > 1 else None,
    }
