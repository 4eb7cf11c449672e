"""Simulation reports: canonical JSON, aligned text tables and policy comparison."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..errors import WorkloadMismatch

REPORT_FORMAT = "guide-sim-report/1"


@dataclass
class TaskStats:
    requests: int = 0
    completed: int = 0
    failed: int = 0
    mean_accuracy: float | None = None
    mean_energy_j: float | None = None
    acc_per_joule: float | None = None
    selection_histogram: dict[str, int] = field(default_factory=dict)
    pareto_rate: float | None = None

    @property
    def acc_per_joule_pct(self) -> float | None:
        return None if self.acc_per_joule is None else 100.0 * self.acc_per_joule


@dataclass
class SimulationReport:
    policy: str
    policy_config: dict
    seed: int
    workload_fingerprint: str
    per_task: dict[str, TaskStats]
    per_slot_energy: list[float]
    energy_target_j: float
    violation_rate: float
    total_energy_j: float
    meter_energy_j: float
    config: dict
    requests: list[dict] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "format": REPORT_FORMAT,
            "policy": self.policy,
            "policy_config": self.policy_config,
            "seed": self.seed,
            "workload_fingerprint": self.workload_fingerprint,
            "per_task": {
                t: {
                    "requests": s.requests,
                    "completed": s.completed,
                    "failed": s.failed,
                    "mean_accuracy": s.mean_accuracy,
                    "mean_energy_j": s.mean_energy_j,
                    "acc_per_joule": s.acc_per_joule,
                    "selection_histogram": dict(s.selection_histogram),
                    "pareto_rate": s.pareto_rate,
                }
                for t, s in self.per_task.items()
            },
            "per_slot_energy_j": list(self.per_slot_energy),
            "energy_target_j": self.energy_target_j,
            "violation_rate": self.violation_rate,
            "total_energy_j": self.total_energy_j,
            "meter_energy_j": self.meter_energy_j,
            "config": self.config,
            "requests": self.requests,
            "failures": self.failures,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "SimulationReport":
        if d.get("format") != REPORT_FORMAT:
            raise ValueError(f"not a simulation report (format={d.get('format')!r})")
        return cls(
            policy=d["policy"],
            policy_config=d["policy_config"],
            seed=d["seed"],
            workload_fingerprint=d["workload_fingerprint"],
            per_task={t: TaskStats(**s) for t, s in d["per_task"].items()},
            per_slot_energy=list(d["per_slot_energy_j"]),
            energy_target_j=d["energy_target_j"],
            violation_rate=d["violation_rate"],
            total_energy_j=d["total_energy_j"],
            meter_energy_j=d["meter_energy_j"],
            config=d["config"],
            requests=d.get("requests", []),
            failures=d.get("failures", []),
        )

    @classmethod
    def load(cls, path: str | Path) -> "SimulationReport":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))


def violation_rate(per_slot_energy: Sequence[float], energy_target_j: float) -> float:
    """Fraction of slots whose realized energy exceeds the target."""
    if not per_slot_energy:
        return 0.0
    return sum(1 for e in per_slot_energy if e > energy_target_j) / len(per_slot_energy)


def _fmt(x: float | None, spec: str) -> str:
    return "-" if x is None else format(x, spec)


def format_report(report: SimulationReport) -> str:
    lines = [
        f"policy {report.policy}  seed {report.seed}  target {report.energy_target_j:g} J",
        f"slots {len(report.per_slot_energy)}  violation rate {100 * report.violation_rate:.1f}%  "
        f"total energy {report.total_energy_j:.1f} J",
        "",
    ]
    header = f"{'Task':<8} {'Req':>5} {'Fail':>5} {'Acc (%)':>8} {'Energy (J)':>11} {'Acc/J (%/J)':>12} {'Pareto':>7}  Selections"
    lines.append(header)
    lines.append("-" * len(header))
    for task, s in report.per_task.items():
        hist = ", ".join(f"{m} {c}" for m, c in sorted(s.selection_histogram.items(), key=lambda kv: (-kv[1], kv[0])))
        acc = None if s.mean_accuracy is None else 100 * s.mean_accuracy
        pareto = None if s.pareto_rate is None else 100 * s.pareto_rate
        lines.append(
            f"{task:<8} {s.requests:>5} {s.failed:>5} {_fmt(acc, '8.2f')} {_fmt(s.mean_energy_j, '11.2f')} "
            f"{_fmt(s.acc_per_joule_pct, '12.2f')} {_fmt(pareto, '6.1f')}%  {hist}"
        )
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class ComparisonRow:
    task: str
    policy: str
    accuracy_pct: float | None
    energy_j: float | None
    acc_per_joule_pct: float | None


def compare_policies(reports: Sequence[SimulationReport]) -> list[ComparisonRow]:
    """Per-task rows, Acc/J descending within each task, ties by policy name.

    Raises:
        WorkloadMismatch: the reports were produced from different workloads.
    """
    if not reports:
        return []
    fingerprints = {r.workload_fingerprint for r in reports}
    if len(fingerprints) > 1:
        raise WorkloadMismatch("reports were produced from different workloads")
    tasks: list[str] = []
    for r in reports:
        for t in r.per_task:
            if t not in tasks:
                tasks.append(t)
    rows: list[ComparisonRow] = []
    for task in tasks:
        group = []
        for r in reports:
            s = r.per_task.get(task)
            if s is None:
                continue
            acc = None if s.mean_accuracy is None else 100 * s.mean_accuracy
            group.append(ComparisonRow(task, r.policy, acc, s.mean_energy_j, s.acc_per_joule_pct))
        group.sort(key=lambda row: (
            row.acc_per_joule_pct is None,
            -(row.acc_per_joule_pct or 0.0),
            row.policy,
        ))
        rows.extend(group)
    return rows


def format_comparison(rows: Sequence[ComparisonRow]) -> str:
    header = f"{'System':<20} {'Acc (%)':>8} {'Energy (J)':>11} {'Acc/J (%/J)':>12}"
    lines = [header, "-" * len(header)]
    current = None
    for row in rows:
        if row.task != current:
            current = row.task
            lines.append(row.task)
        lines.append(
            f"{row.policy:<20} {_fmt(row.accuracy_pct, '8.2f')} {_fmt(row.energy_j, '11.2f')} "
            f"{_fmt(row.acc_per_joule_pct, '12.2f')}"
        )
    return "\n".join(lines) + "\n"


def comparison_to_json(rows: Sequence[ComparisonRow]) -> str:
    data = [
        {
            "task": r.task,
            "policy": r.policy,
            "accuracy_pct": r.accuracy_pct,
            "energy_j": r.energy_j,
            "acc_per_joule_pct": r.acc_per_joule_pct,
        }
        for r in rows
    ]
    return json.dumps(data, indent=2, sort_keys=True) + "\n"
