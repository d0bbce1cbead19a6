"""
Resource smoothing and pressure
===============================

Feeds a noisy synthetic utilization stream through the exponential smoother
and shows how the pressure signal (max of smoothed cpu/gpu/mem) reacts to an
injected load spike while staying stable against single-sample noise.
"""

from adaptroute import ResourceMonitor, SyntheticLoadSource, pressure

source = SyntheticLoadSource(seed=7)
monitor = ResourceMonitor(alpha=0.3)

print("tick  raw_gpu  smooth_gpu  pressure")
for tick in range(30):
    if tick == 10:
        source.add_load({"gpu": 0.55, "cpu": 0.10})  # a heavy execution lands
        print("-- injected gpu load spike --")
    raw = source.read()
    s = monitor.ingest_sample(raw)
    if tick % 2 == 0:
        print(f"{tick:>4}  {raw.gpu:.3f}    {s.gpu:.3f}       {pressure(s):.3f}")

print("\nthe spike decays with the source's time constant; the smoothed view")
print("lags it by design, so one-off blips never flip a routing decision")
