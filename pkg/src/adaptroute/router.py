"""Path selection and online threshold adaptation.

Routing follows a two-threshold scheme over (effective complexity, resource
pressure): both low selects the symbolic path, either high selects the neural
path, and everything else falls to the hybrid default. The four thresholds
are adapted online from pressure extremes and per-path performance, with
bounded steps and a repair rule that keeps the pair ordered.

Per-path utilities (accuracy minus normalized latency and cost) are computed
from running statistics and logged with every decision; an optional policy
mode routes by utility argmax instead of the threshold scheme.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field, replace
from typing import Mapping

from .types import (
    ConfigError,
    ContractViolationError,
    Dataset,
    RoutePath,
    RouteReason,
    RoutingMode,
    ValidationError,
)

logger = logging.getLogger(__name__)

KAPPA_BOUND_LOW = 0.2
KAPPA_BOUND_HIGH = 0.9
THRESHOLD_STEP = 0.05

# Tie-break preference for utility argmax, strongest first.
_ARGMAX_ORDER = (RoutePath.HYBRID, RoutePath.NEURAL, RoutePath.SYMBOLIC)


@dataclass(frozen=True)
class ThresholdSet:
    """The four routing thresholds. Complexity thresholds live in
    [0.2, 0.9]; pressure thresholds in [0, 1]; each pair is ordered."""

    t_low_k: float = 0.4
    t_high_k: float = 0.8
    t_low_r: float = 0.6
    t_high_r: float = 0.85

    def __post_init__(self) -> None:
        if not (KAPPA_BOUND_LOW <= self.t_low_k <= self.t_high_k <= KAPPA_BOUND_HIGH):
            raise ValidationError(
                f"complexity thresholds ({self.t_low_k}, {self.t_high_k}) must satisfy "
                f"{KAPPA_BOUND_LOW} <= low <= high <= {KAPPA_BOUND_HIGH}"
            )
        if not (0.0 <= self.t_low_r <= self.t_high_r <= 1.0):
            raise ValidationError(
                f"pressure thresholds ({self.t_low_r}, {self.t_high_r}) must satisfy "
                f"0 <= low <= high <= 1"
            )


DEFAULT_THRESHOLDS = ThresholdSet()


@dataclass(frozen=True)
class UtilityWeights:
    """Weights and normalizers for the path utility function.

    The three weights must sum to 1; latency is normalized by the maximum
    acceptable query time and cost by the maximum system capacity.
    """

    w_acc: float = 0.6
    w_lat: float = 0.25
    w_cost: float = 0.15
    tau_max: float = 30.0
    c_max: float = 1.0

    def __post_init__(self) -> None:
        total = self.w_acc + self.w_lat + self.w_cost
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"utility weights sum to {total!r}, expected 1.0")
        if self.tau_max <= 0 or self.c_max <= 0:
            raise ConfigError("tau_max and c_max must be positive")


@dataclass
class PathStatEntry:
    """EMA estimates of one path's success rate, latency and cost."""

    success_rate: float = 0.0
    avg_time: float = 0.0
    avg_cost: float = 0.0
    sample_count: int = 0


class PathStats:
    """Per-path running statistics, updated only through ``record``.

    A path's first recorded outcome initializes its entry; later outcomes
    apply an EMA with the configured decay. Stats may be seeded with priors
    (entries with ``sample_count == 0``) so utilities are defined before any
    observations; the first real outcome then decays against the prior.
    """

    def __init__(
        self,
        decay: float = 0.1,
        priors: Mapping[RoutePath, PathStatEntry] | None = None,
    ) -> None:
        if not 0.0 < decay <= 1.0:
            raise ConfigError(f"decay must be in (0, 1], got {decay}")
        self.decay = decay
        self._entries: dict[RoutePath, PathStatEntry] = {}
        if priors:
            for path, entry in priors.items():
                self._entries[path] = replace(entry)

    @classmethod
    def with_default_priors(cls, decay: float = 0.1) -> "PathStats":
        """Stats seeded with the calibrated per-path baselines.

        Accuracy/latency priors come from the measured single-path baselines;
        cost priors use each path's typical GPU utilization fraction.
        """
        return cls(
            decay=decay,
            priors={
                RoutePath.SYMBOLIC: PathStatEntry(0.314, 0.362, 0.253, 0),
                RoutePath.NEURAL: PathStatEntry(0.978, 0.904, 0.443, 0),
                RoutePath.HYBRID: PathStatEntry(0.994, 0.985, 0.411, 0),
            },
        )

    def get(self, path: RoutePath) -> PathStatEntry | None:
        return self._entries.get(path)

    def record(
        self, path: RoutePath, success: bool, latency: float, cost: float = 0.0
    ) -> PathStatEntry:
        if latency < 0:
            raise ValidationError(f"latency must be >= 0, got {latency}")
        s = 1.0 if success else 0.0
        entry = self._entries.get(path)
        if entry is None:
            entry = PathStatEntry(s, latency, cost, 1)
            self._entries[path] = entry
        else:
            d = self.decay
            entry.success_rate = (1.0 - d) * entry.success_rate + d * s
            entry.avg_time = (1.0 - d) * entry.avg_time + d * latency
            entry.avg_cost = (1.0 - d) * entry.avg_cost + d * cost
            entry.sample_count += 1
        return entry

    def as_dict(self) -> dict[str, dict[str, float]]:
        return {
            path.value: {
                "success_rate": e.success_rate,
                "avg_time": e.avg_time,
                "avg_cost": e.avg_cost,
                "sample_count": e.sample_count,
            }
            for path, e in sorted(self._entries.items(), key=lambda kv: kv[0].value)
        }


def record_outcome(
    stats: PathStats, path: RoutePath, success: bool, latency: float, cost: float = 0.0
) -> PathStats:
    """Fold one execution outcome into the per-path statistics."""
    stats.record(path, success, latency, cost)
    return stats


@dataclass(frozen=True)
class PathDecision:
    """A routing decision with everything needed to audit it."""

    path: RoutePath
    kappa_eff: float
    pressure: float
    thresholds: ThresholdSet
    reason: RouteReason
    utilities: Mapping[RoutePath, float] | None = None


def select_path(
    kappa_eff: float,
    pressure: float,
    th: ThresholdSet,
    dataset: Dataset = Dataset.OTHER,
    mode: RoutingMode = RoutingMode.ADAPTIVE,
    utilities: Mapping[RoutePath, float] | None = None,
) -> PathDecision:
    """Select the execution path for one query.

    Adaptive mode: symbolic iff complexity and pressure are both strictly
    under their low thresholds; otherwise neural iff complexity or pressure
    is at/above its high threshold; otherwise the hybrid default. The branch
    structure is identical for every dataset tag; the parameter is kept for
    forward compatibility. Forced modes bypass the logic entirely.
    """
    if mode is not RoutingMode.ADAPTIVE:
        forced = {
            RoutingMode.FORCED_HYBRID: RoutePath.HYBRID,
            RoutingMode.FORCED_NEURAL: RoutePath.NEURAL,
            RoutingMode.FORCED_SYMBOLIC: RoutePath.SYMBOLIC,
        }[mode]
        return PathDecision(forced, kappa_eff, pressure, th, RouteReason.FORCED, utilities)
    if kappa_eff < th.t_low_k and pressure < th.t_low_r:
        return PathDecision(
            RoutePath.SYMBOLIC, kappa_eff, pressure, th, RouteReason.LOW_BOTH, utilities
        )
    if kappa_eff >= th.t_high_k or pressure >= th.t_high_r:
        return PathDecision(
            RoutePath.NEURAL, kappa_eff, pressure, th, RouteReason.HIGH_EITHER, utilities
        )
    return PathDecision(
        RoutePath.HYBRID, kappa_eff, pressure, th, RouteReason.DEFAULT_HYBRID, utilities
    )


def path_utility(
    accuracy: float, latency: float, cost: float, w: UtilityWeights
) -> float:
    """Utility of a path given expected accuracy, latency and cost.

    ``w_acc * acc - w_lat * latency / tau_max - w_cost * cost / c_max``;
    higher is better.
    """
    if not 0.0 <= accuracy <= 1.0:
        raise ValidationError(f"accuracy must be in [0, 1], got {accuracy}")
    if latency < 0 or cost < 0:
        raise ValidationError("latency and cost must be >= 0")
    return (
        w.w_acc * accuracy
        - w.w_lat * (latency / w.tau_max)
        - w.w_cost * (cost / w.c_max)
    )


def estimate_utilities(
    stats: PathStats, w: UtilityWeights
) -> dict[RoutePath, float]:
    """Per-path utilities from the current running statistics."""
    out: dict[RoutePath, float] = {}
    for path in RoutePath:
        e = stats.get(path)
        if e is not None:
            out[path] = path_utility(e.success_rate, e.avg_time, e.avg_cost, w)
    return out


def argmax_path(utilities: Mapping[RoutePath, float]) -> RoutePath:
    """Highest-utility path; ties prefer hybrid, then neural, then symbolic."""
    if len(utilities) != len(RoutePath):
        raise ValidationError("utilities must cover all three paths")
    best: RoutePath | None = None
    for path in _ARGMAX_ORDER:
        u = utilities[path]
        if math.isnan(u):
            raise ContractViolationError(f"utility for {path.value} is NaN")
        if best is None or u > utilities[best]:
            best = path
    assert best is not None
    return best


def optimize_thresholds(
    th: ThresholdSet,
    pressure: float,
    stats: PathStats,
    delta: float = THRESHOLD_STEP,
) -> ThresholdSet:
    """One bounded adaptation step over the complexity thresholds.

    Very high pressure squeezes the pair toward 0.6 (fewer extreme-path
    choices); very low pressure widens it toward [0.2, 0.9]. A path that is
    both failing (success rate < 0.5) and slow (avg time > 1 s) pulls its
    threshold down: the neural trigger for the neural path, the symbolic
    ceiling for the symbolic path. If a step crosses the pair, both collapse
    to their midpoint (logged as a repair).
    """
    t_low, t_high = th.t_low_k, th.t_high_k
    if pressure > 0.9:
        t_low = min(0.6, t_low + delta)
        t_high = max(0.6, t_high - delta)
    elif pressure < 0.3:
        t_low = max(KAPPA_BOUND_LOW, t_low - delta)
        t_high = min(KAPPA_BOUND_HIGH, t_high + delta)
    for path in (RoutePath.NEURAL, RoutePath.SYMBOLIC):
        e = stats.get(path)
        if e is None or not (e.success_rate < 0.5 and e.avg_time > 1.0):
            continue
        if path is RoutePath.NEURAL and t_high > 0.6:
            t_high = max(0.6, t_high - delta)
        if path is RoutePath.SYMBOLIC and t_low > KAPPA_BOUND_LOW:
            t_low = max(KAPPA_BOUND_LOW, t_low - delta)
    if t_low > t_high:
        mid = (t_low + t_high) / 2.0
        logger.info(
            "threshold crossing repaired: (%.3f, %.3f) -> midpoint %.3f",
            t_low, t_high, mid,
        )
        t_low = t_high = mid
    return ThresholdSet(t_low, t_high, th.t_low_r, th.t_high_r)


@dataclass
class RouterConfig:
    thresholds: ThresholdSet = field(default_factory=ThresholdSet)
    utility_weights: UtilityWeights = field(default_factory=UtilityWeights)
    mode: RoutingMode = RoutingMode.ADAPTIVE
    policy: str = "threshold"  # "threshold" (authoritative) or "utility"
    optimize_every: int = 10
    stats_decay: float = 0.1

    def __post_init__(self) -> None:
        if self.policy not in ("threshold", "utility"):
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.optimize_every < 1:
            raise ConfigError("optimize_every must be >= 1")


class Router:
    """Shared routing control state: thresholds plus path statistics.

    One writer (outcome recording and threshold optimization) and many
    readers (per-query decisions); decisions read a consistent snapshot of
    the thresholds and statistics under the same lock that serializes
    updates.
    """

    def __init__(self, config: RouterConfig | None = None,
                 stats: PathStats | None = None) -> None:
        self.config = config or RouterConfig()
        self._lock = threading.Lock()
        self._thresholds = self.config.thresholds
        self._stats = stats if stats is not None else PathStats.with_default_priors(
            decay=self.config.stats_decay
        )
        self._completed = 0
        self._trajectory: list[tuple[int, ThresholdSet]] = [(0, self._thresholds)]
        self._repairs = 0

    @property
    def thresholds(self) -> ThresholdSet:
        return self._thresholds

    @property
    def stats(self) -> PathStats:
        return self._stats

    @property
    def trajectory(self) -> list[tuple[int, ThresholdSet]]:
        return list(self._trajectory)

    def decide(
        self, kappa_eff: float, pressure: float, dataset: Dataset = Dataset.OTHER
    ) -> PathDecision:
        with self._lock:
            th = self._thresholds
            utilities = estimate_utilities(self._stats, self.config.utility_weights)
        if self.config.policy == "utility" and len(utilities) == len(RoutePath):
            if self.config.mode is RoutingMode.ADAPTIVE:
                path = argmax_path(utilities)
                return PathDecision(
                    path, kappa_eff, pressure, th, RouteReason.UTILITY_ARGMAX, utilities
                )
        return select_path(
            kappa_eff, pressure, th, dataset, self.config.mode, utilities
        )

    def record(
        self, path: RoutePath, success: bool, latency: float, cost: float = 0.0,
        pressure: float = 0.0,
    ) -> None:
        """Record one outcome; runs a threshold optimization step every
        ``optimize_every`` completions."""
        with self._lock:
            self._stats.record(path, success, latency, cost)
            self._completed += 1
            if self._completed % self.config.optimize_every == 0:
                before = self._thresholds
                after = optimize_thresholds(before, pressure, self._stats)
                if after != before:
                    self._thresholds = after
                    self._trajectory.append((self._completed, after))
                    if after.t_low_k == after.t_high_k and before.t_low_k < before.t_high_k:
                        self._repairs += 1
