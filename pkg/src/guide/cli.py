"""Command-line entry point: ``guide {validate,frontier,select,simulate,compare}``.

Data goes to stdout (or ``--out``); diagnostics go to stderr. Exit status is
0 on success, 1 on any domain or I/O failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .config import ResolvedConfig, resolve_config
from .errors import BudgetStarvation, GuideError, RegistryParseError, UnknownTask
from .meter import PowerTrace
from .registry import ModelRegistry, default_registry, load_registry_path
from .selector import FixedBudget, ModelSelector, SelectorConfig, no_wait, task_frontier
from .sim import (
    Policy,
    SimulationReport,
    compare_policies,
    format_comparison,
    format_report,
    generate_workload,
    load_name_only_distribution,
    load_workload,
    run_simulation,
)
from .sim.report import comparison_to_json

logger = logging.getLogger("guide")


def _err(msg: str) -> None:
    print(f"guide: error: {msg}", file=sys.stderr)


def _load_registry(path: str | None) -> ModelRegistry:
    return load_registry_path(path) if path else default_registry()


def _write_out(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def cmd_validate(args: argparse.Namespace) -> int:
    path = args.registry_path or args.registry
    try:
        registry = _load_registry(path)
    except OSError as exc:
        _err(f"cannot read {path}: {exc.strerror}")
        return 1
    except RegistryParseError as exc:
        _err(f"{path or '<shipped registry>'}: {exc}")
        return 1
    profiled = sum(1 for m in registry if not m.unprofiled)
    print(
        f"ok: {len(registry)} models ({profiled} profiled) across "
        f"{len(registry.tasks())} tasks: {', '.join(registry.tasks())}"
    )
    return 0


def cmd_frontier(args: argparse.Namespace) -> int:
    registry = _load_registry(args.registry)
    frontier = task_frontier(registry, args.task)
    if args.json:
        _write_out(json.dumps([m.to_record() for m in frontier], indent=2) + "\n", args.out)
        return 0
    lines = [f"{'Model':<20} {'Accuracy':>9} {'Energy (J)':>11} {'Latency (s)':>12}"]
    lines.append("-" * len(lines[0]))
    for m in frontier:
        lines.append(f"{m.id:<20} {m.accuracy:>9.3f} {m.energy_avg:>11.2f} {m.latency_avg:>12.3f}")
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def cmd_select(args: argparse.Namespace) -> int:
    registry = _load_registry(args.registry)
    config = SelectorConfig(retry_interval_s=args.retry_interval, max_retries=args.max_retries)
    selector = ModelSelector(registry, config)
    # The budget is constant, so waiting cannot change the outcome: skip real sleeps.
    decision = selector.select(args.task, FixedBudget(args.budget_j), wait=no_wait)
    if args.json:
        _write_out(json.dumps(decision.to_dict(), indent=2) + "\n", args.out)
        return 0
    lines = [
        decision.chosen,
        f"  task            {decision.task}",
        f"  budget (J)      {decision.budget_at_decision_j:g}",
        f"  task candidates {', '.join(decision.candidates_task)}",
        f"  within budget   {', '.join(decision.candidates_budget)}",
        f"  pareto subset   {', '.join(decision.pareto_subset)}",
        f"  retries         {decision.retries}",
        f"  latency (ms)    {1000 * decision.decision_latency_s:.3f}",
    ]
    _write_out("\n".join(lines) + "\n", args.out)
    return 0


def _policy_from_args(args: argparse.Namespace, cfg: ResolvedConfig) -> Policy:
    if args.policy == "guide":
        return Policy.guide(cfg.tracker.energy_target_j, cfg.selector)
    if args.policy == "popularity":
        return Policy.popularity()
    if args.policy == "name-only":
        path = cfg.simulation["name_only_distribution"] or None
        return Policy.name_only(load_name_only_distribution(path))
    if not args.model:
        raise GuideError("--policy fixed needs --model")
    return Policy.fixed(args.model)


def _emit_plot_data(report: SimulationReport, directory: str) -> None:
    d = Path(directory)
    d.mkdir(parents=True, exist_ok=True)
    with open(d / "slot_energy.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["slot", "energy_j", "target_j"])
        for i, e in enumerate(report.per_slot_energy):
            w.writerow([i, repr(e), repr(report.energy_target_j)])
    with open(d / "acc_per_joule.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["task", "policy", "accuracy_pct", "energy_j", "acc_per_joule_pct"])
        for task, s in report.per_task.items():
            if s.mean_accuracy is None:
                continue
            w.writerow([task, report.policy, 100 * s.mean_accuracy, s.mean_energy_j, s.acc_per_joule_pct])


def cmd_simulate(args: argparse.Namespace) -> int:
    overrides = {
        "tracker": {"energy_target_j": args.target_j, "ema_weight": args.ema_weight},
        "meter": {"base_draw_w": args.base_draw_w, "base_draw_jitter_w": args.jitter_w},
        "selector": {"max_retries": args.max_retries},
        "simulation": {
            "seed": args.seed,
            "requests": args.requests,
            "mean_interarrival_s": args.mean_interarrival,
            "task_mix": args.task_mix,
            "registry": args.registry,
            "trace": args.trace,
            "sample_accuracy": True if args.sample_accuracy else None,
        },
    }
    cfg = resolve_config(args.config, overrides=overrides)
    sim = cfg.simulation
    registry = _load_registry(sim["registry"] or None)
    if args.workload:
        workload = load_workload(args.workload)
    else:
        workload = generate_workload(
            sim["task_mix"], sim["requests"], sim["mean_interarrival_s"], sim["seed"]
        )
    trace = PowerTrace.load(sim["trace"]) if sim["trace"] else None
    policy = _policy_from_args(args, cfg)
    report = run_simulation(
        registry,
        workload,
        policy,
        cfg.tracker,
        cfg.meter,
        sim["seed"],
        sample_accuracy=sim["sample_accuracy"],
        trace=trace,
    )
    if args.out:
        Path(args.out).write_text(report.to_json(), encoding="utf-8")
        sys.stdout.write(format_report(report))
    else:
        sys.stdout.write(report.to_json())
    if args.emit_plot_data:
        _emit_plot_data(report, args.emit_plot_data)
    for f in report.failures:
        print(f"guide: {f['request_id']}: {f['error']}: {f['message']}", file=sys.stderr)
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    reports = [SimulationReport.load(p) for p in args.reports]
    rows = compare_policies(reports)
    text = comparison_to_json(rows) if args.json else format_comparison(rows)
    _write_out(text, args.out)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML config file")
    common.add_argument("--seed", type=int, default=None, help="random seed")
    common.add_argument("--out", help="write machine-readable output here instead of stdout")
    common.add_argument("--registry", help="registry file (JSON Lines); defaults to the shipped one")

    parser = argparse.ArgumentParser(prog="guide", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="validate a registry file")
    p.add_argument("registry_path", nargs="?", help="registry file (defaults to the shipped one)")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("frontier", parents=[common], help="print a task's Pareto frontier")
    p.add_argument("--task", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_frontier)

    p = sub.add_parser("select", parents=[common], help="select a model under a fixed budget")
    p.add_argument("--task", required=True)
    p.add_argument("--budget-j", type=float, required=True)
    p.add_argument("--max-retries", type=int, default=SelectorConfig.max_retries)
    p.add_argument("--retry-interval", type=float, default=SelectorConfig.retry_interval_s)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("simulate", parents=[common], help="replay a workload under a policy")
    p.add_argument("--policy", choices=["guide", "popularity", "name-only", "fixed"], default="guide")
    p.add_argument("--model", help="model id for --policy fixed")
    p.add_argument("--target-j", type=float, help="per-slot energy target (J)")
    p.add_argument("--ema-weight", type=float)
    p.add_argument("--base-draw-w", type=float)
    p.add_argument("--jitter-w", type=float)
    p.add_argument("--max-retries", type=int)
    p.add_argument("--workload", help="workload file (arrival_s,task,request_id per line)")
    p.add_argument("--task-mix", help="generated workload mix, e.g. icapt or icapt:0.5,vqa:0.5")
    p.add_argument("--requests", type=int, help="generated workload size")
    p.add_argument("--mean-interarrival", type=float, help="generated workload mean gap (s)")
    p.add_argument("--trace", help="extra power trace (timestamp_s,power_w per line)")
    p.add_argument("--sample-accuracy", action="store_true", help="Bernoulli-sample per-request accuracy")
    p.add_argument("--emit-plot-data", metavar="DIR", help="write CSV series for plotting")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("compare", parents=[common], help="compare simulation reports")
    p.add_argument("reports", nargs="+")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="guide: %(levelname)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except UnknownTask as exc:
        _err(f"UnknownTask: {exc}")
    except BudgetStarvation as exc:
        _err(f"BudgetStarvation: {exc}")
    except GuideError as exc:
        _err(str(exc))
    except OSError as exc:
        _err(f"{exc.filename or ''}: {exc.strerror or exc}")
    except (ValueError, KeyError) as exc:
        _err(str(exc))
    return 1


if __name__ == "__main__":
    sys.exit(main())
