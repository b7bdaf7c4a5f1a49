"""Command-line entry point: gen, train, eval, map, trace.

Every command is a pure function of (config file, flags, input files,
seed): reruns produce byte-identical outputs, and the resolved effective
config is always written next to the results. Exit codes: 0 success,
1 usage or config error, 2 runtime failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import traceback
from pathlib import Path

import numpy as np

from .bench import (
    AbortRulePolicy,
    BaselinePolicy,
    GreedyPolicy,
    abort_demo_spec,
    aggregate_metrics,
    decision_map,
    export_trace,
    run_batch,
    run_episode,
)
from .config import ConfigError, RunConfig, load_config, parse_config, render_config
from .dqn import train
from .env import OvertakeEnv
from .qnet import QNetwork
from .scenarios import generate_scenarios, load_scenarios, save_scenarios

__all__ = ["main"]


def _resolve_config(args) -> RunConfig:
    cfg = RunConfig()
    if getattr(args, "config", None):
        path = Path(args.config)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        cfg = load_config(path)
    overrides = getattr(args, "set", None) or []
    if overrides:
        cfg = parse_config("\n".join(overrides), base=cfg)
    return cfg


def _echo_config(cfg: RunConfig, out: Path) -> None:
    target = out / "config.txt" if out.is_dir() else out.parent / (out.name + ".config.txt")
    target.write_text(render_config(cfg), encoding="utf-8")


def _load_model(path: str) -> QNetwork:
    model_path = Path(path)
    if not model_path.exists():
        raise ConfigError(f"model file not found: {model_path}")
    return QNetwork.load(model_path)


def _make_policy(name: str, args, cfg: RunConfig):
    if name == "dqn":
        if not getattr(args, "model", None):
            raise ConfigError("--policy dqn requires --model")
        try:
            return GreedyPolicy(_load_model(args.model), cfg.obs)
        except ValueError as exc:  # dimension mismatch names both sizes
            raise ConfigError(str(exc)) from exc
    if name == "baseline":
        return BaselinePolicy(cfg.baseline)
    if name == "abort-rule":
        return AbortRulePolicy(cfg.baseline, cfg.road.lane_width)
    raise ConfigError(f"unknown policy {name!r}")


# -- gen ---------------------------------------------------------------------


def cmd_gen(args) -> int:
    cfg = _resolve_config(args)
    seed = cfg.seed if args.seed is None else args.seed
    out = Path(args.out)
    if args.check:
        specs = load_scenarios(out)
        r = cfg.ranges
        for spec in specs:
            ok = (
                r.d1_min <= spec.d1 <= r.d1_max
                and r.d2_min <= spec.d2 <= r.d2_max
                and r.v1_min <= spec.v1 <= r.v1_max
                and r.v2_min <= spec.v2 <= r.v2_max
                and spec.npc_count in r.npc_counts
            )
            if not ok:
                print(f"scenario {spec.scenario_id}: outside configured ranges", file=sys.stderr)
                return 1
        print(f"{len(specs)} scenarios within ranges")
        return 0
    specs = generate_scenarios(args.n, cfg.ranges, seed)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_scenarios(specs, out)
    _echo_config(cfg, out)
    print(f"wrote {len(specs)} scenarios to {out}")
    return 0


# -- train -------------------------------------------------------------------


def cmd_train(args) -> int:
    cfg = _resolve_config(args)
    scen_path = Path(args.scenarios)
    if not scen_path.exists():
        raise ConfigError(f"scenario file not found: {scen_path}")
    specs = load_scenarios(scen_path)
    train_cfg = cfg.train
    if args.iters is not None:
        train_cfg = type(train_cfg)(**{**train_cfg.__dict__, "iterations": args.iters})
    if args.seed is not None:
        train_cfg = type(train_cfg)(**{**train_cfg.__dict__, "seed": args.seed})

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    net, curve = train(lambda spec: OvertakeEnv(spec, cfg), specs, train_cfg)
    net.save(out / "model.qnet")
    lines = ["episode,discounted_return,outcome,decisions,epsilon"]
    lines += [
        f"{e.episode},{e.discounted_return:.9f},{e.outcome},{e.decisions},{e.epsilon:.6f}"
        for e in curve
    ]
    (out / "learning_curve.csv").write_text("\n".join(lines) + "\n", encoding="ascii")
    _echo_config(cfg, out)
    n_succ = sum(e.outcome == "success" for e in curve)
    print(
        f"trained {train_cfg.iterations} iterations over {len(curve)} episodes "
        f"({n_succ} successes); model at {out / 'model.qnet'}"
    )
    return 0


# -- eval --------------------------------------------------------------------


def _format_metrics_text(blocks: dict) -> str:
    lines = []
    for name, table in blocks.items():
        d = table.to_dict()
        lines.append(f"policy: {name}")
        lines.append(f"  episodes                 {d['n_episodes']}")
        lines.append(f"  success rate             {d['success_rate']:.1f} %")
        lines.append(f"  mean completion (succ.)  {d['mean_completion_time']:.1f} s")
        lines.append(
            f"  crashes                  {d['n_crashes']}"
            f" (npc1 {d['crash_share_npc1']:.1f} %, npc2 {d['crash_share_npc2']:.1f} %,"
            f" oncoming {d['crash_share_oncoming']:.1f} %)"
        )
        if not d["crash_shares_defined"]:
            lines.append("  (no crashes: shares reported as 0)")
        lines.append(f"  off road / timeout       {d['n_off_road']} / {d['n_timeout']}")
        lines.append(
            f"  mean v1/v2 in failures   {d['mean_v1_in_failures']:.2f} / "
            f"{d['mean_v2_in_failures']:.2f} m/s"
        )
        lines.append("")
    if len(blocks) == 2:
        any_table = next(iter(blocks.values()))
        lines.append(f"failed in same scenarios: {any_table.crash_overlap_pct:.1f} %")
        lines.append("")
    return "\n".join(lines)


def cmd_eval(args) -> int:
    cfg = _resolve_config(args)
    scen_path = Path(args.scenarios)
    if not scen_path.exists():
        raise ConfigError(f"scenario file not found: {scen_path}")
    specs = load_scenarios(scen_path)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.compare:
        policies = {
            "dqn": _make_policy("dqn", args, cfg),
            "baseline": _make_policy("baseline", args, cfg),
        }
    else:
        policies = {args.policy: _make_policy(args.policy, args, cfg)}

    results = {
        name: run_batch(specs, policy, cfg, jobs=args.jobs)
        for name, policy in policies.items()
    }
    if len(results) == 2:
        res_a, res_b = results["dqn"], results["baseline"]
        table_a, table_b = aggregate_metrics(res_a, res_b)
        blocks = {"dqn": table_a, "baseline": table_b}
    else:
        name = next(iter(results))
        table, _ = aggregate_metrics(results[name], results[name])
        blocks = {name: table}

    records = [{"policy": name, **table.to_dict()} for name, table in blocks.items()]
    with open(out / "metrics.jsonl", "w", encoding="ascii", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record) + "\n")
    (out / "metrics.txt").write_text(_format_metrics_text(blocks), encoding="ascii")

    if args.traces:
        for name, res in results.items():
            trace_dir = out / f"traces_{name}"
            trace_dir.mkdir(exist_ok=True)
            for episode in res:
                export_trace(episode, trace_dir / f"trace_{episode.scenario_id:05d}.csv")
    _echo_config(cfg, out)
    print(_format_metrics_text(blocks))
    return 0


# -- map ---------------------------------------------------------------------


def cmd_map(args) -> int:
    cfg = _resolve_config(args)
    if args.res1 < 2 or args.res2 < 2:
        raise ConfigError("map resolution must be >= 2 per axis")
    net = _load_model(args.model)
    grid, axis1, axis2 = decision_map(
        net,
        cfg,
        npc1_s=(args.npc1_min, args.npc1_max),
        npc2_s=(args.npc2_min, args.npc2_max),
        resolution=(args.res1, args.res2),
        v1=args.v1,
        v2=args.v2,
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    lines = [
        "# decision map: action codes 0=following 1=overtaking 2=aborting",
        f"# fixed speeds: v1={args.v1} v2={args.v2}",
        "# rows: npc1_s = " + ",".join(f"{v:.6f}" for v in axis1),
        "# cols: npc2_s = " + ",".join(f"{v:.6f}" for v in axis2),
    ]
    lines += [",".join(str(int(v)) for v in row) for row in grid]
    out.write_text("\n".join(lines) + "\n", encoding="ascii")
    _echo_config(cfg, out)
    print(f"wrote {grid.shape[0]}x{grid.shape[1]} decision map to {out}")
    return 0


# -- trace -------------------------------------------------------------------


def cmd_trace(args) -> int:
    cfg = _resolve_config(args)
    if args.abort_demo:
        spec = abort_demo_spec()
    else:
        if not args.scenarios or args.id is None:
            raise ConfigError("trace needs --scenarios and --id, or --abort-demo")
        specs = {s.scenario_id: s for s in load_scenarios(Path(args.scenarios))}
        if args.id not in specs:
            raise ConfigError(f"scenario id {args.id} not in {args.scenarios}")
        spec = specs[args.id]
    policy = _make_policy(args.policy, args, cfg)
    result = run_episode(spec, policy, cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    export_trace(result, out)
    _echo_config(cfg, out)
    print(
        f"scenario {spec.scenario_id}: {result.outcome}"
        + (f" at t={result.completion_time:.1f} s" if result.completion_time else "")
        + f"; trace written to {out}"
    )
    return 0


# -- parser ------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage errors exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        raise ConfigError(message)


def _add_common(p):
    p.add_argument("--config", help="key = value config file (defaults otherwise)")
    p.add_argument(
        "--set",
        action="append",
        metavar="SECTION.KEY=VALUE",
        help="override one config entry (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="overtake-rl",
        description="Two-lane overtaking simulator, DQN decision maker, and benchmark",
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    fmt = dict(formatter_class=argparse.ArgumentDefaultsHelpFormatter)

    p = sub.add_parser("gen", help="generate a randomized scenario file", **fmt)
    p.add_argument("--n", type=int, default=1000, help="number of scenarios")
    p.add_argument("--seed", type=int, default=None, help="master seed (config seed otherwise)")
    p.add_argument("--out", required=True, help="output scenario file (JSON lines)")
    p.add_argument("--check", action="store_true", help="validate an existing file at --out")
    _add_common(p)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("train", help="train the DQN decision maker", **fmt)
    p.add_argument("--scenarios", required=True, help="scenario file to train on")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--iters", type=int, default=None, help="decision-step iterations")
    p.add_argument("--seed", type=int, default=None, help="training seed")
    _add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate policies over a scenario file", **fmt)
    p.add_argument("--scenarios", required=True, help="scenario file to evaluate on")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--policy", default="dqn", choices=["dqn", "baseline", "abort-rule"])
    p.add_argument("--model", default=None, help="model file for the dqn policy")
    p.add_argument("--compare", action="store_true", help="evaluate dqn and baseline paired")
    p.add_argument("--jobs", type=int, default=1, help="parallel episode workers")
    p.add_argument("--traces", action="store_true", help="export per-episode trace CSVs")
    _add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("map", help="decision map over NPC positions", **fmt)
    p.add_argument("--model", required=True, help="model file")
    p.add_argument("--out", required=True, help="output CSV")
    p.add_argument("--npc1-min", type=float, default=5.0)
    p.add_argument("--npc1-max", type=float, default=60.0)
    p.add_argument("--npc2-min", type=float, default=10.0)
    p.add_argument("--npc2-max", type=float, default=150.0)
    p.add_argument("--res1", type=int, default=50, help="cells along the npc1 axis")
    p.add_argument("--res2", type=int, default=50, help="cells along the npc2 axis")
    p.add_argument("--v1", type=float, default=2.0, help="fixed NPC1 speed")
    p.add_argument("--v2", type=float, default=2.0, help="fixed NPC2 speed")
    _add_common(p)
    p.set_defaults(func=cmd_map)

    p = sub.add_parser("trace", help="run one scenario and export its trace", **fmt)
    p.add_argument("--scenarios", default=None, help="scenario file")
    p.add_argument("--id", type=int, default=None, help="scenario id within the file")
    p.add_argument("--abort-demo", action="store_true", help="use the scripted abort scenario")
    p.add_argument("--policy", default="abort-rule", choices=["dqn", "baseline", "abort-rule"])
    p.add_argument("--model", default=None, help="model file for the dqn policy")
    p.add_argument("--out", required=True, help="output trace CSV")
    _add_common(p)
    p.set_defaults(func=cmd_trace)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except Exception:
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
