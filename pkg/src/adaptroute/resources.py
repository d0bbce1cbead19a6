"""Resource-state tracking: a 4-channel utilization vector, its EMA view,
and the scalar pressure signal used by routing.

Channels are normalized fractions (0 = idle, 1 = saturated). Smoothing is a
per-channel exponential moving average; pressure is the max of the smoothed
CPU/GPU/MEM channels. Power is carried through state and reports but never
feeds routing.
"""

from __future__ import annotations

import logging
import threading
import time
from dataclasses import dataclass
from typing import Iterator, Protocol

from .types import ValidationError

logger = logging.getLogger(__name__)

DEFAULT_ALPHA = 0.3
DEFAULT_PERIOD_MS = 100.0

_CHANNELS = ("cpu", "gpu", "mem", "power")


@dataclass(frozen=True)
class ResourceState:
    """One raw utilization sample. Timestamps must strictly increase."""

    cpu: float
    gpu: float
    mem: float
    power: float
    t_ms: float

    def __post_init__(self) -> None:
        for name in _CHANNELS:
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                raise ValidationError(f"channel {name}={v} outside [0, 1]")


@dataclass(frozen=True)
class SmoothedState:
    """EMA-smoothed view of the resource channels."""

    cpu: float
    gpu: float
    mem: float
    power: float
    t_ms: float
    alpha: float = DEFAULT_ALPHA
    stale: bool = False


def pressure(s: SmoothedState) -> float:
    """Max of the smoothed cpu/gpu/mem channels; power is excluded."""
    return max(s.cpu, s.gpu, s.mem)


class ResourceMonitor:
    """Single-writer EMA smoother publishing an immutable snapshot.

    ``ingest_sample`` is the only writer; readers call ``snapshot`` (or
    ``current_pressure``) and always observe a complete, consistent state.
    """

    def __init__(self, alpha: float = DEFAULT_ALPHA) -> None:
        if not 0.0 < alpha <= 1.0:
            raise ValidationError(f"alpha must be in (0, 1], got {alpha}")
        self.alpha = alpha
        self._lock = threading.Lock()
        self._state: SmoothedState | None = None

    def ingest_sample(self, s: ResourceState) -> SmoothedState:
        """Fold one raw sample into the smoothed view.

        The first sample initializes the smoothed state to the raw values;
        later samples apply ``alpha * raw + (1 - alpha) * previous`` per
        channel. Non-monotonic timestamps are rejected.
        """
        a = self.alpha
        with self._lock:
            prev = self._state
            if prev is not None and s.t_ms <= prev.t_ms:
                raise ValidationError(
                    f"non-monotonic timestamp {s.t_ms} (last was {prev.t_ms})"
                )
            if prev is None:
                nxt = SmoothedState(s.cpu, s.gpu, s.mem, s.power, s.t_ms, a)
            else:
                nxt = SmoothedState(
                    cpu=a * s.cpu + (1.0 - a) * prev.cpu,
                    gpu=a * s.gpu + (1.0 - a) * prev.gpu,
                    mem=a * s.mem + (1.0 - a) * prev.mem,
                    power=a * s.power + (1.0 - a) * prev.power,
                    t_ms=s.t_ms,
                    alpha=a,
                )
            self._state = nxt
            return nxt

    def mark_stale(self) -> SmoothedState | None:
        """Republish the last smoothed state flagged stale (source failure)."""
        with self._lock:
            if self._state is None:
                return None
            self._state = SmoothedState(
                self._state.cpu, self._state.gpu, self._state.mem,
                self._state.power, self._state.t_ms, self._state.alpha, stale=True,
            )
            return self._state

    def snapshot(self) -> SmoothedState | None:
        return self._state

    def current_pressure(self, default: float = 0.0) -> float:
        s = self._state
        return pressure(s) if s is not None else default


class MetricSource(Protocol):
    """Yields raw channel readings on demand; ``None`` signals a failure."""

    def read(self) -> ResourceState | None: ...


class TraceReplaySource:
    """Replays a ``t_ms,cpu,gpu,mem,power`` CSV of fraction samples."""

    def __init__(self, path: str) -> None:
        self._rows: list[ResourceState] = []
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
            expected = ["t_ms", "cpu", "gpu", "mem", "power"]
            if [h.strip() for h in header] != expected:
                raise ValidationError(
                    f"trace header {header!r} does not match {expected!r}"
                )
            for line_no, line in enumerate(fh, start=2):
                line = line.strip()
                if not line:
                    continue
                parts = line.split(",")
                if len(parts) != 5:
                    raise ValidationError(f"trace line {line_no}: expected 5 fields")
                t, cpu, gpu, mem, power = (float(p) for p in parts)
                self._rows.append(ResourceState(cpu, gpu, mem, power, t))
        self._pos = 0

    def __len__(self) -> int:
        return len(self._rows)

    def read(self) -> ResourceState | None:
        if self._pos >= len(self._rows):
            return None
        row = self._rows[self._pos]
        self._pos += 1
        return row


class HostMetricSource:
    """Live OS-level sampler: host CPU load and memory from /proc.

    GPU and power read 0 when no sensor is available. Raw values are divided
    by the configured capacities before publication.
    """

    def __init__(self, cpu_capacity: float | None = None) -> None:
        import os

        self._ncpu = cpu_capacity or float(os.cpu_count() or 1)

    def read(self) -> ResourceState | None:
        import os

        try:
            load1 = os.getloadavg()[0]
            cpu = min(1.0, load1 / self._ncpu)
        except OSError:
            cpu = 0.0
        mem = 0.0
        try:
            info: dict[str, float] = {}
            with open("/proc/meminfo", "r", encoding="ascii") as fh:
                for line in fh:
                    key, _, rest = line.partition(":")
                    info[key] = float(rest.split()[0])
            total = info.get("MemTotal", 0.0)
            avail = info.get("MemAvailable", total)
            if total > 0:
                mem = min(1.0, max(0.0, 1.0 - avail / total))
        except (OSError, ValueError, IndexError):
            pass
        return ResourceState(cpu, 0.0, mem, 0.0, t_ms=time.monotonic() * 1000.0)


class SyntheticLoadSource:
    """Seeded load generator with exponentially decaying injected load.

    Baseline levels drift with a small bounded random walk; executors inject
    per-channel cost deltas that decay with time constant ``tau_s``. Fully
    deterministic given the seed and the sequence of calls.
    """

    def __init__(
        self,
        seed: int,
        baseline: dict[str, float] | None = None,
        tau_s: float = 1.5,
        wander: float = 0.01,
        period_ms: float = DEFAULT_PERIOD_MS,
    ) -> None:
        import math
        import random

        base = {"cpu": 0.18, "gpu": 0.22, "mem": 0.30, "power": 0.20}
        if baseline:
            base.update(baseline)
        self._base = base
        self._drift = {c: 0.0 for c in _CHANNELS}
        self._load = {c: 0.0 for c in _CHANNELS}
        self._tau_s = tau_s
        self._wander = wander
        self._period_ms = period_ms
        self._t_ms = 0.0
        self._rng = random.Random(seed)
        self._decay_per_step = math.exp(-(period_ms / 1000.0) / tau_s)

    @property
    def t_ms(self) -> float:
        return self._t_ms

    def add_load(self, deltas: dict[str, float]) -> None:
        """Inject per-channel cost deltas from a completed execution."""
        for c, d in deltas.items():
            if c not in self._load:
                raise ValidationError(f"unknown channel {c!r}")
            self._load[c] += max(0.0, d)

    def read(self) -> ResourceState:
        """Advance one period and return the current sample."""
        self._t_ms += self._period_ms
        values = {}
        for c in _CHANNELS:
            self._drift[c] = min(
                0.05, max(-0.05, self._drift[c] + self._rng.uniform(-self._wander, self._wander))
            )
            self._load[c] *= self._decay_per_step
            values[c] = min(1.0, max(0.0, self._base[c] + self._drift[c] + self._load[c]))
        return ResourceState(values["cpu"], values["gpu"], values["mem"],
                             values["power"], self._t_ms)


def sampler_loop(
    source: MetricSource,
    monitor: ResourceMonitor,
    max_consecutive_failures: int = 5,
    realtime_period_s: float | None = None,
) -> Iterator[SmoothedState]:
    """Drive a metric source into a monitor, one smoothed state per period.

    Timestamps from the source are carried through, so sampling jitter shifts
    the EMA's clock without corrupting its values. A failed read republishes
    the last smoothed state flagged stale; hitting the consecutive-failure
    limit ends the stream. When ``realtime_period_s`` is set the loop sleeps
    between reads (live monitoring); otherwise the caller drives the pace.
    """
    failures = 0
    while True:
        try:
            sample = source.read()
        except Exception:
            logger.exception("metric source read failed")
            sample = None
        if sample is None:
            failures += 1
            stale = monitor.mark_stale()
            if stale is not None:
                yield stale
            if failures >= max_consecutive_failures:
                logger.warning(
                    "aborting sampler after %d consecutive source failures", failures
                )
                return
        else:
            failures = 0
            yield monitor.ingest_sample(sample)
        if realtime_period_s is not None:
            time.sleep(realtime_period_s)
