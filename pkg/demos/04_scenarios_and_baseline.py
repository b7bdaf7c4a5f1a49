"""Scenario generation and the rule-based policies in closed loop.

Run:  python demos/04_scenarios_and_baseline.py
"""

from overtake_rl import RunConfig, generate_scenarios
from overtake_rl.bench import AbortRulePolicy, BaselinePolicy, run_batch, aggregate_metrics

cfg = RunConfig()
specs = generate_scenarios(40, cfg.ranges, seed=7)
print("first scenarios drawn from the configured ranges:")
for s in specs[:5]:
    extra = f" d3={s.d3:.1f} v3={s.v3:.2f}" if s.npc_count == 3 else ""
    print(f"  id={s.scenario_id} npcs={s.npc_count} d1={s.d1:5.1f} d2={s.d2:6.1f}"
          f" v1={s.v1:.2f} v2={s.v2:.2f}{extra}")

baseline = run_batch(specs, BaselinePolicy(cfg.baseline), cfg)
abortrule = run_batch(specs, AbortRulePolicy(cfg.baseline, cfg.road.lane_width), cfg)
t_rule, t_base = aggregate_metrics(abortrule, baseline)

print("\ncommit-and-hope baseline vs the hand abort rule on the same scenarios:")
for name, t in [("baseline", t_base), ("abort-rule", t_rule)]:
    print(f"  {name:10s} success {t.success_rate:5.1f} %   crashes {t.n_crashes:2d}"
          f" (oncoming {t.crash_share_oncoming:5.1f} %)   timeouts {t.n_timeout}")
print(f"  both failed the same scenario in {t_base.crash_overlap_pct:.1f} % of cases")

crashes = [r for r in baseline if r.outcome == "crash"]
if crashes:
    r = crashes[0]
    print(f"\nbaseline crash example: scenario {r.scenario_id} struck npc {r.crash_npc_id}"
          f" (d2={r.spec.d2:.0f} m, v2={r.spec.v2:.2f} m/s oncoming)")
    print("the abort rule on that scenario:",
          next(x.outcome for x in abortrule if x.scenario_id == r.scenario_id))
