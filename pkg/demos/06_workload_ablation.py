"""
Running a workload and disabling the adaptive logic
===================================================

Processes the same 300-query mixed workload twice on one seed: once with
adaptive routing, once with every query forced through the hybrid path.
Forcing hybrid drags every complex query through the slow symbolic
component, which is exactly the cost adaptive routing avoids.
"""

from adaptroute import compare_reports, run_workload
from adaptroute.executors import ControlConfig
from adaptroute.types import RoutingMode
from adaptroute.workload import generate_mixed_workload

items = generate_mixed_workload(300, seed=11)
adaptive = run_workload(items, ControlConfig(mode=RoutingMode.ADAPTIVE), seed=11)
forced = run_workload(items, ControlConfig(mode=RoutingMode.FORCED_HYBRID), seed=11)

for name, report in (("adaptive", adaptive), ("forced-hybrid", forced)):
    d = report.to_dict()
    lat = d["latency"]
    print(f"{name:<14} paths={d['paths_decided']}")
    print(f"{'':14} latency mean={lat['mean']:.3f}s median={lat['median']:.3f}s "
          f"p95={lat['p95']:.3f}s em={d['exact_match']['rate']:.3f}")

cmp = compare_reports(adaptive, forced)
print(f"\ndisabling adaptive routing: +{cmp['delta_latency_pct']:.1f}% mean latency, "
      f"cohen's d on latency = {cmp['cohens_d_latency']:.2f}")

final = adaptive.to_dict()["thresholds"]["final"]
print(f"thresholds drifted to ({final['t_low_k']:.2f}, {final['t_high_k']:.2f}): "
      "calm pressure widens the pair, and the slow low-accuracy symbolic path "
      "pulls its own trigger down")
