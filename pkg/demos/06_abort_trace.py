"""The abortable overtake, end to end: trace export and excursion detection.

A slow leader blocks the lane while an oncoming car approaches; the driver
starts the pass, bails out when the gap turns insufficient, waits, and
completes the pass once the opposite lane clears.

Run:  python demos/06_abort_trace.py   (writes abort_trace.csv next to it)
"""

from pathlib import Path

import numpy as np

from overtake_rl import RunConfig, lane_excursions
from overtake_rl.bench import AbortRulePolicy, abort_demo_spec, export_trace, run_episode

cfg = RunConfig()
spec = abort_demo_spec()
print(f"scenario: leader {spec.d1:.0f} m ahead at {spec.v1} m/s,"
      f" oncoming car {spec.d1 + spec.d2:.0f} m out at {spec.v2} m/s")

policy = AbortRulePolicy(cfg.baseline, cfg.road.lane_width)
result = run_episode(spec, policy, cfg)
print(f"outcome: {result.outcome} at t={result.completion_time:.1f} s, zero collisions")

out = Path(__file__).resolve().parent / "abort_trace.csv"
export_trace(result, out)
print(f"trace written to {out}")

d = np.array([row[2] for row in result.trace])
t = np.array([row[0] for row in result.trace])
excursions = lane_excursions(d, cfg.road.lane_width)
print(f"\nlane-boundary excursions (d > {cfg.road.lane_width / 2} m): {len(excursions)}")
for k, (i, j) in enumerate(excursions, start=1):
    print(f"  excursion {k}: t = {t[i]:.1f} .. {t[j]:.1f} s, peak offset {d[i:j+1].max():.2f} m")
between = d[excursions[0][1] + 1 : excursions[1][0]]
print(f"fully back in lane between attempts (min offset {between.min():.2f} m)")

# Coarse lateral-offset strip chart, one column per decision.
levels = "   .:-=+*#"
chars = [levels[min(len(levels) - 1, int(max(0.0, x) / 3.0 * (len(levels) - 1)))] for x in d]
print("\nlateral offset over time (one char per second, # = opposite lane):")
print("".join(chars))
