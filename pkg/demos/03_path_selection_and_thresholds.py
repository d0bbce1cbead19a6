"""
Path selection regions and online threshold adaptation
======================================================

Draws the (complexity, pressure) decision plane as an ASCII map, then runs
the threshold optimizer through a pressure regime change and prints the
trajectory of the complexity threshold pair.
"""

from adaptroute import PathStats, ThresholdSet, optimize_thresholds, select_path
from adaptroute.types import RoutePath

th = ThresholdSet()  # 0.4 / 0.8 / 0.6 / 0.85
glyph = {RoutePath.SYMBOLIC: "s", RoutePath.NEURAL: "N", RoutePath.HYBRID: "."}

print("decision plane (rows: pressure 1.0 -> 0.0, cols: kappa_eff 0.0 -> 1.2)")
for row in range(10, -1, -1):
    p = row / 10
    line = "".join(
        glyph[select_path(col * 1.2 / 40, p, th).path] for col in range(41)
    )
    print(f"p={p:.1f} {line}")
print("       s = symbolic, N = neural, . = hybrid default\n")

# sustained overload squeezes the complexity pair toward 0.6; calm periods
# widen it back out toward the [0.2, 0.9] legal bounds
stats = PathStats.with_default_priors()
print("phase      step  t_low_k  t_high_k")
for phase, pressure_level in (("overload", 0.95), ("calm", 0.10)):
    for step in range(6):
        th = optimize_thresholds(th, pressure_level, stats)
        print(f"{phase:<9} {step:>5}  {th.t_low_k:.2f}     {th.t_high_k:.2f}")
