"""Resource smoothing: EMA contract, pressure, sources and the sampler loop."""

from __future__ import annotations

import random

import pytest

from adaptroute.resources import (
    ResourceMonitor,
    ResourceState,
    SmoothedState,
    SyntheticLoadSource,
    TraceReplaySource,
    pressure,
    sampler_loop,
)
from adaptroute.types import ValidationError


def _sample(cpu=0.0, gpu=0.0, mem=0.0, power=0.0, t=None, _clock=[0.0]):
    if t is None:
        _clock[0] += 100.0
        t = _clock[0]
    return ResourceState(cpu, gpu, mem, power, t)


def test_first_sample_initializes_smoothed():
    mon = ResourceMonitor()
    s = mon.ingest_sample(_sample(cpu=0.5))
    assert s.cpu == 0.5


def test_ema_hand_value():
    mon = ResourceMonitor(alpha=0.3)
    mon.ingest_sample(_sample(cpu=0.5))
    s = mon.ingest_sample(_sample(cpu=1.0))
    assert s.cpu == pytest.approx(0.65, abs=1e-12)


def test_constant_stream_is_fixed_point():
    mon = ResourceMonitor()
    for _ in range(10):
        s = mon.ingest_sample(_sample(cpu=0.4))
        assert s.cpu == pytest.approx(0.4, abs=1e-15)


def test_out_of_range_channel_rejected():
    with pytest.raises(ValidationError):
        ResourceState(1.2, 0, 0, 0, 1.0)
    with pytest.raises(ValidationError):
        ResourceState(-0.1, 0, 0, 0, 1.0)


def test_non_monotonic_timestamp_rejected():
    mon = ResourceMonitor()
    mon.ingest_sample(ResourceState(0.1, 0, 0, 0, 100.0))
    with pytest.raises(ValidationError):
        mon.ingest_sample(ResourceState(0.1, 0, 0, 0, 100.0))
    with pytest.raises(ValidationError):
        mon.ingest_sample(ResourceState(0.1, 0, 0, 0, 50.0))


def test_smoothed_stays_inside_raw_envelope():
    rng = random.Random(3)
    mon = ResourceMonitor()
    lo, hi = 1.0, 0.0
    for i in range(300):
        v = rng.random()
        lo, hi = min(lo, v), max(hi, v)
        s = mon.ingest_sample(ResourceState(v, 0, 0, 0, float(i + 1)))
        assert lo - 1e-12 <= s.cpu <= hi + 1e-12


def test_ema_linearity_under_scaling():
    rng = random.Random(11)
    raws = [rng.random() for _ in range(100)]
    scale = 0.5
    full = ResourceMonitor()
    half = ResourceMonitor()
    for i, v in enumerate(raws, start=1):
        a = full.ingest_sample(ResourceState(v, 0, 0, 0, float(i)))
        b = half.ingest_sample(ResourceState(scale * v, 0, 0, 0, float(i)))
        assert b.cpu == pytest.approx(scale * a.cpu, rel=1e-12, abs=1e-15)


def test_geometric_convergence_bound():
    alpha = 0.3
    mon = ResourceMonitor(alpha=alpha)
    mon.ingest_sample(ResourceState(1.0, 0, 0, 0, 1.0))  # smooth_0 = 1.0
    target = 0.2
    err0 = abs(1.0 - target)
    for k in range(1, 60):
        s = mon.ingest_sample(ResourceState(target, 0, 0, 0, 1.0 + k))
        bound = (1 - alpha) ** k * err0
        assert abs(s.cpu - target) <= bound * (1 + 1e-9) + 1e-15


def test_pressure_excludes_power():
    s = SmoothedState(cpu=0.2, gpu=0.9, mem=0.3, power=1.0, t_ms=1.0)
    assert pressure(s) == 0.9


def test_pressure_trivials():
    assert pressure(SmoothedState(0, 0, 0, 0, 1.0)) == 0.0
    s = SmoothedState(0.61, 0.60, 0.60, 0.0, 1.0)
    assert pressure(s) == 0.61
    assert pressure(s) >= s.cpu and pressure(s) >= s.gpu and pressure(s) >= s.mem
    assert pressure(s) in (s.cpu, s.gpu, s.mem)


def _write_trace(path, rows):
    lines = ["t_ms,cpu,gpu,mem,power"]
    lines += [",".join(str(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")


def test_trace_replay_source(tmp_path):
    trace = tmp_path / "trace.csv"
    _write_trace(trace, [(100, 0.1, 0.2, 0.3, 0.0), (200, 0.2, 0.2, 0.3, 0.0)])
    src = TraceReplaySource(str(trace))
    assert len(src) == 2
    assert src.read().cpu == 0.1
    assert src.read().t_ms == 200.0
    assert src.read() is None


def test_trace_replay_rejects_bad_header(tmp_path):
    trace = tmp_path / "bad.csv"
    trace.write_text("time,cpu\n1,0.5\n")
    with pytest.raises(ValidationError):
        TraceReplaySource(str(trace))


def test_sampler_loop_stale_and_abort(tmp_path):
    trace = tmp_path / "trace.csv"
    _write_trace(trace, [(100, 0.4, 0.0, 0.0, 0.0), (200, 0.4, 0.0, 0.0, 0.0)])
    src = TraceReplaySource(str(trace))
    mon = ResourceMonitor()
    states = list(sampler_loop(src, mon, max_consecutive_failures=3))
    # 2 live samples, then 3 stale republications before the loop aborts
    assert len(states) == 5
    assert [s.stale for s in states] == [False, False, True, True, True]
    assert states[-1].cpu == pytest.approx(0.4)


def test_synthetic_load_source_deterministic():
    a = SyntheticLoadSource(seed=5)
    b = SyntheticLoadSource(seed=5)
    for _ in range(10):
        ra, rb = a.read(), b.read()
        assert (ra.cpu, ra.gpu, ra.mem, ra.power, ra.t_ms) == (rb.cpu, rb.gpu, rb.mem, rb.power, rb.t_ms)


def test_synthetic_load_injection_decays():
    src = SyntheticLoadSource(seed=1, wander=0.0)
    baseline = src.read().gpu
    src.add_load({"gpu": 0.5})
    spiked = src.read().gpu
    assert spiked > baseline + 0.3
    for _ in range(100):
        last = src.read().gpu
    assert last < baseline + 0.01  # injected load decays away


def test_synthetic_load_rejects_unknown_channel():
    src = SyntheticLoadSource(seed=1)
    with pytest.raises(ValidationError):
        src.add_load({"disk": 0.1})
