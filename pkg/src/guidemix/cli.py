"""Command line entry points: plan, simulate, serve, replay."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .harness import (
    batch_compare,
    emit_plots,
    export_mixture_guides,
    read_rows_csv,
    write_frame_log,
    write_rows_csv,
)
from .learner import plan_for_scenario, scenario_learner_config
from .operators import MODES, PlanFollower, run_episode
from .promp import GuideMixture
from .scenarios import PRESETS, Scenario, load_scenario, save_scenario
from .session import preset_session_config


def _load_scenario_arg(args) -> Scenario:
    if args.scenario:
        return load_scenario(args.scenario)
    if args.preset:
        return PRESETS[args.preset]()
    raise SystemExit("one of --scenario or --preset is required")


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--scenario", help="scenario JSON file")
    p.add_argument("--preset", choices=sorted(PRESETS), help="built-in scenario")


def cmd_plan(args) -> int:
    scenario = _load_scenario_arg(args)
    cfg = scenario_learner_config(
        scenario,
        n_components=args.components,
        seed=args.seed,
        max_iterations=args.iterations,
    )
    mixture, report = plan_for_scenario(scenario, cfg)
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    mixture.save(out)
    print(f"wrote mixture with {mixture.n_components} guides to {out}")
    if args.report:
        report.to_csv(args.report)
        print(f"wrote learner report to {args.report}")
    if args.scenario_out:
        save_scenario(scenario, args.scenario_out)
    return 0


def cmd_simulate(args) -> int:
    scenario = _load_scenario_arg(args)
    mixture = GuideMixture.load(args.mixture)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    modes = tuple(args.mode) if args.mode else MODES
    rows = batch_compare(
        scenario,
        mixture,
        modes,
        range(args.seeds),
        script_for_seed=lambda seed: PlanFollower(
            plan=seed % max(1, min(2, mixture.n_components)),
            noise=args.operator_noise,
            speed=args.operator_speed,
        ),
        timeout=args.timeout,
    )
    csv_path = out_dir / "episodes.csv"
    write_rows_csv(rows, csv_path)
    print(f"wrote {len(rows)} episode rows to {csv_path}")
    if args.frames:
        metrics, frames = run_episode(
            scenario,
            mixture,
            PlanFollower(plan=0, noise=args.operator_noise, speed=args.operator_speed),
            modes[0],
            seed=0,
            timeout=args.timeout,
            record_frames=True,
        )
        log_path = out_dir / "frames.jsonl"
        write_frame_log(frames, log_path)
        print(f"wrote frame log ({len(frames)} ticks) to {log_path}")
    if args.plots:
        written = emit_plots(rows, out_dir)
        for path in written:
            print(f"wrote {path}")
    return 0


def cmd_serve(args) -> int:
    from .service import serve_forever

    scenario = _load_scenario_arg(args)
    mixture = GuideMixture.load(args.mixture)
    session_config = preset_session_config(scenario, replan_iterations=args.replan_iterations)
    serve_forever(
        scenario,
        mixture,
        session_config,
        host=args.host,
        port=args.port,
        ui_dir=args.ui_dir,
    )
    return 0


def cmd_replay(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if args.frames:
        from .harness import export_guides_from_log

        written.append(export_guides_from_log(args.frames, out_dir / "guides.json"))
    if args.episodes:
        rows = read_rows_csv(args.episodes)
        written.extend(emit_plots(rows, out_dir))
    if args.mixture:
        scenario = _load_scenario_arg(args)
        mixture = GuideMixture.load(args.mixture)
        written.append(export_mixture_guides(scenario, mixture, out_dir / "mixture_guides.json"))
    for path in written:
        print(f"wrote {path}")
    if not written:
        raise SystemExit("nothing to replay: pass --frames, --episodes or --mixture")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="guidemix",
        description="Shared-autonomy guidance: learn guide mixtures, simulate, serve.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("plan", help="learn a guide mixture for a scenario")
    _add_scenario_args(p)
    p.add_argument("--out", required=True, help="output mixture JSON file")
    p.add_argument("--components", type=int, default=3)
    p.add_argument("--iterations", type=int, default=120)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--report", help="optional learner report CSV")
    p.add_argument("--scenario-out", help="also write the resolved scenario JSON")
    p.set_defaults(func=cmd_plan)

    p = sub.add_parser("simulate", help="run scripted-operator episodes")
    _add_scenario_args(p)
    p.add_argument("--mixture", required=True)
    p.add_argument("--mode", action="append", choices=MODES, help="repeatable; default all")
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--operator-noise", type=float, default=0.3)
    p.add_argument("--operator-speed", type=float, default=0.05)
    p.add_argument("--timeout", type=float, default=60.0)
    p.add_argument("--frames", action="store_true", help="record a frame log for seed 0")
    p.add_argument("--plots", action="store_true", help="emit quartile summaries and plots")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("serve", help="start the live guidance service")
    _add_scenario_args(p)
    p.add_argument("--mixture", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=None, help="default 8765 or GUIDEMIX_PORT")
    p.add_argument("--replan-iterations", type=int, default=40)
    p.add_argument("--ui-dir", help="also serve this directory over HTTP for the browser UI")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="export guides and summaries from recorded runs")
    _add_scenario_args(p)
    p.add_argument("--frames", help="frame log (JSONL) to extract guide geometry from")
    p.add_argument("--episodes", help="episodes CSV to summarize")
    p.add_argument("--mixture", help="mixture file to export ellipse chains for")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_replay)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
