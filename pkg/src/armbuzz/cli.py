"""Command-line entry point.

Subcommands: ``simulate`` (one trial per seed), ``protocol`` (the four-task
sequence per seed), ``serve`` (interactive WebSocket session), ``replay``
(recompute metrics from an existing log), ``report`` (aggregate protocol
reports into comparison tables and figures).

Exit codes: 0 success, 1 configuration/usage error, 2 runtime error.
Machine-readable errors go to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import merge_config, parse_task, trial_config_from_doc
from .errors import ConfigError, LogParseError, SnapshotError
from .feedback import FeedbackMode
from .gvf import save_snapshot
from .harness import run_protocol, run_trial
from .logio import read_log, write_log
from .metrics import compute_metrics
from .pacing import TickPacer
from .report import (load_report_documents, render_report,
                     write_protocol_outputs)


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # usage problems exit 1, not argparse's 2
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _emit_error(code: str, message: str) -> None:
    print(json.dumps({"error": {"code": code, "message": message}}),
          file=sys.stderr)


def _add_config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="YAML config file")
    p.add_argument("--set", dest="overrides", metavar="KEY=VALUE",
                   action="append", default=[],
                   help="override a config value by dotted path (repeatable)")


def _add_run_args(p: argparse.ArgumentParser) -> None:
    _add_config_args(p)
    p.add_argument("--seed", dest="seeds", metavar="N", type=int,
                   action="append", default=[], help="trial seed (repeatable)")
    p.add_argument("--out", metavar="DIR", help="output directory")
    p.add_argument("--duration-ticks", type=int, default=None,
                   help="override trial length in ticks")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="armbuzz",
                     description="Simulated shoulder with learned anticipatory load feedback")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", parents=[], help="run one trial per seed")
    _add_run_args(p)
    p.add_argument("--task", default="training",
                   help="training | no_feedback | reactive | predictive")
    p.add_argument("--snapshot", metavar="PATH",
                   help="trained weights for reactive/predictive trials")
    p.add_argument("--realtime", action="store_true",
                   help="pace ticks to the wall clock instead of fast-forward")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("protocol", help="run the four-task protocol per seed")
    _add_run_args(p)
    p.set_defaults(func=cmd_protocol)

    p = sub.add_parser("serve", help="start the interactive session server")
    _add_config_args(p)
    p.add_argument("--bind", default="127.0.0.1:8000", metavar="HOST:PORT")
    p.add_argument("--out", metavar="DIR", default="runs/session",
                   help="directory for session logs and the trained snapshot")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--snapshot", metavar="PATH",
                   help="serve reactive/predictive tasks from these weights")
    p.add_argument("--static", metavar="DIR",
                   help="static web client directory (default: ./frontend/dist if present)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("replay", help="recompute metrics from a trial log")
    p.add_argument("log", metavar="LOGFILE")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("report", help="aggregate protocol reports into tables and figures")
    p.add_argument("paths", nargs="+", metavar="RUN_DIR_OR_REPORT_JSON")
    p.add_argument("--out", metavar="DIR", required=True)
    p.set_defaults(func=cmd_report)
    return parser


def _require_seeds(args) -> list[int]:
    if not args.seeds:
        raise ConfigError("at least one --seed is required")
    return args.seeds


def _seed_dir(out: Path, seed: int, multi: bool) -> Path:
    d = out / f"seed-{seed}" if multi else out
    d.mkdir(parents=True, exist_ok=True)
    return d


def cmd_simulate(args) -> int:
    seeds = _require_seeds(args)
    task = parse_task(args.task)
    doc = merge_config(args.config, args.overrides)
    out = Path(args.out) if args.out else None
    multi = len(seeds) > 1
    for seed in seeds:
        snapshot_path = args.snapshot
        if snapshot_path is None and out is not None and task in (
                FeedbackMode.REACTIVE, FeedbackMode.PREDICTIVE):
            candidate = _seed_dir(out, seed, multi) / "snapshot.json"
            if candidate.exists():
                snapshot_path = str(candidate)
        cfg = trial_config_from_doc(doc, task, seed=seed,
                                    duration_ticks=args.duration_ticks,
                                    snapshot_path=snapshot_path)
        pacer = TickPacer(cfg.sim.dt_s) if args.realtime else None
        result = run_trial(cfg, pacer=pacer)
        if out is not None:
            d = _seed_dir(out, seed, multi)
            write_log(result.log, d / f"{task.value}.log")
            (d / "metrics.json").write_text(
                json.dumps(result.metrics.as_dict(), indent=2) + "\n", encoding="utf-8")
            if result.learner is not None:
                save_snapshot(result.learner, d / "snapshot.json")
            print(f"seed {seed}: wrote {d / (task.value + '.log')}")
        else:
            print(json.dumps({"seed": seed, "metrics": result.metrics.as_dict()}))
    return 0


def cmd_protocol(args) -> int:
    seeds = _require_seeds(args)
    doc = merge_config(args.config, args.overrides)
    out = Path(args.out) if args.out else None
    multi = len(seeds) > 1
    for seed in seeds:
        base = trial_config_from_doc(doc, FeedbackMode.TRAINING, seed=seed,
                                     duration_ticks=args.duration_ticks)
        result = run_protocol(base, seed)
        loads = result.report.total_loads
        ordered = (result.report.ordering_no_feedback_gt_reactive
                   and result.report.ordering_reactive_gt_predictive)
        print(f"seed {seed}: " +
              " ".join(f"{t}={loads[t]}" for t in
                       ("no_feedback", "reactive", "predictive", "training")) +
              f" ordering={'ok' if ordered else 'violated'}")
        if out is not None:
            d = _seed_dir(out, seed, multi)
            for task_name, trial in result.trials.items():
                write_log(trial.log, d / f"{task_name}.log")
            save_snapshot(result.trained_learner, d / "snapshot.json")
            write_protocol_outputs(result, d)
    return 0


def cmd_replay(args) -> int:
    log = read_log(args.log)
    metrics = compute_metrics(log)
    print(json.dumps({"task": log.task, "seed": log.seed,
                      "metrics": metrics.as_dict()}, indent=2))
    return 0


def cmd_report(args) -> int:
    docs = load_report_documents(args.paths)
    created = render_report(docs, args.out)
    for path in created:
        print(f"wrote {path}")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .server import SessionConfig, create_app

    doc = merge_config(args.config, args.overrides)
    base = trial_config_from_doc(doc, FeedbackMode.TRAINING, seed=args.seed)
    session_cfg = SessionConfig(
        sim=base.sim,
        codec=base.codec,
        thresholds=base.thresholds,
        learner_alpha=base.learner_alpha,
        learner_gamma=base.learner_gamma,
        out_dir=Path(args.out),
        snapshot_path=Path(args.snapshot) if args.snapshot else None,
        seed=args.seed,
    )
    static = Path(args.static) if args.static else Path("frontend/dist")
    host, _, port = args.bind.rpartition(":")
    if not host or not port.isdigit():
        raise ConfigError(f"--bind must look like HOST:PORT, got {args.bind!r}")
    app = create_app(session_cfg, static_dir=static if static.is_dir() else None)
    uvicorn.run(app, host=host, port=int(port), log_level="warning")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        _emit_error("config_error", str(exc))
        return 1
    except SnapshotError as exc:
        _emit_error(exc.code, str(exc))
        return 2
    except LogParseError as exc:
        _emit_error("log_parse_error", str(exc))
        return 2
    except OSError as exc:
        _emit_error("io_error", str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
