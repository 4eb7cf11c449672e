"""Single-threaded virtual-clock simulation of a serving GPU under a selection policy.

Events are processed in timestamp order with ties resolved as
poll < arrival < completion. Requests are served one at a time: a request
starts when it has arrived and the previous inference has finished. The
tracker polls the simulated meter on a fixed grid for the whole run, and the
run is extended to the end of the slot holding the last completion so every
joule lands in a closed slot.
"""

from __future__ import annotations

import logging
import math
import random
from collections import Counter
from dataclasses import asdict, replace
from typing import Sequence

from ..errors import BudgetStarvation, ConfigError, PreconditionError, UnknownTask
from ..meter import PowerTrace, ScheduledExecution, SimMeter, SimMeterConfig
from ..registry import ModelRegistry
from ..selector import ModelSelector, task_frontier
from ..tracker import EnergyBudgetTracker, TrackerConfig
from .policies import Policy, PolicyKind, baseline_choose
from .report import SimulationReport, TaskStats, violation_rate
from .workload import WorkloadRequest, workload_fingerprint

logger = logging.getLogger(__name__)


class _VirtualClock:
    """Drives tracker polls against the meter as virtual time advances."""

    def __init__(self, tracker: EnergyBudgetTracker, meter: SimMeter):
        self.tracker = tracker
        self.meter = meter
        self.dt = tracker.config.poll_interval_s
        self.now = 0.0
        self.polls = 0

    def advance_to(self, t: float) -> None:
        # <= puts polls before any arrival sharing their timestamp.
        while (self.polls + 1) * self.dt <= t:
            tp = (self.polls + 1) * self.dt
            self.tracker.ingest(self.meter.read_energy_delta(tp))
            self.polls += 1
        if t > self.now:
            self.now = t

    def wait(self, seconds: float) -> None:
        self.advance_to(self.now + seconds)

    def time(self) -> float:
        return self.now

    def close_open_slot(self) -> None:
        """Poll until the slot containing ``now`` has closed."""
        n = self.tracker.config.polls_per_slot
        target = max(1, math.ceil(self.polls / n)) * n
        while (target * self.dt) < self.now:
            target += n
        while self.polls < target:
            self.advance_to((self.polls + 1) * self.dt)


def run_simulation(
    registry: ModelRegistry,
    workload: Sequence[WorkloadRequest],
    policy: Policy,
    tracker_config: TrackerConfig,
    meter_config: SimMeterConfig | None = None,
    seed: int = 0,
    *,
    sample_accuracy: bool = False,
    trace: PowerTrace | None = None,
) -> SimulationReport:
    """Replay ``workload`` under ``policy`` and aggregate the outcome.

    Per-request energy in the report is the chosen model's profiled
    forward-pass energy (base draw excluded); per-slot energy is what the
    meter integrated, base draw included. Unknown-task and starvation errors
    are recorded per request and do not stop the run.
    """
    if not workload:
        raise PreconditionError("workload is empty")
    for a, b in zip(workload, workload[1:]):
        if b.arrival_s < a.arrival_s:
            raise PreconditionError("workload arrivals must be non-decreasing")

    meter_config = meter_config or SimMeterConfig()
    if policy.kind is PolicyKind.GUIDE and policy.energy_target_j is not None:
        tracker_config = replace(tracker_config, energy_target_j=policy.energy_target_j)

    rng = random.Random(seed)
    meter = SimMeter(meter_config, trace=trace)
    tracker = EnergyBudgetTracker(tracker_config)
    clock = _VirtualClock(tracker, meter)
    selector = ModelSelector(registry, policy.selector) if policy.kind is PolicyKind.GUIDE else None

    frontier_cache: dict[str, frozenset[str] | None] = {}

    def frontier_ids(task: str) -> frozenset[str] | None:
        if task not in frontier_cache:
            try:
                frontier_cache[task] = frozenset(m.id for m in task_frontier(registry, task))
            except UnknownTask:
                frontier_cache[task] = None
        return frontier_cache[task]

    records: list[dict] = []
    failures: list[dict] = []
    busy_until = 0.0

    for req in workload:
        clock.advance_to(max(req.arrival_s, busy_until))
        retries = 0
        try:
            if selector is not None:
                decision = selector.select(req.task, tracker, wait=clock.wait, clock=clock.time)
                model_id, retries = decision.chosen, decision.retries
            else:
                model_id = baseline_choose(policy, req.task, registry, rng)
            model = registry.get(model_id)
            if model is None:
                raise ConfigError(f"policy chose '{model_id}', which is not in the registry")
        except (UnknownTask, BudgetStarvation, ConfigError) as exc:
            failures.append({
                "request_id": req.request_id,
                "task": req.task,
                "error": type(exc).__name__,
                "message": str(exc),
                "time_s": clock.now,
            })
            busy_until = clock.now
            continue

        start = clock.now
        meter.schedule_execution(ScheduledExecution(model.id, start, model.latency_avg, model.energy_avg))
        busy_until = start + model.latency_avg
        if sample_accuracy:
            realized = 1.0 if rng.random() < model.accuracy else 0.0
        else:
            realized = model.accuracy
        front = frontier_ids(req.task)
        records.append({
            "request_id": req.request_id,
            "task": req.task,
            "model": model.id,
            "arrival_s": req.arrival_s,
            "start_s": start,
            "end_s": busy_until,
            "retries": retries,
            "accuracy": realized,
            "energy_j": model.energy_avg,
            "on_frontier": None if front is None else model.id in front,
            "unprofiled": model.unprofiled,
        })

    clock.advance_to(busy_until)
    clock.close_open_slot()

    per_slot = [e for _, e in tracker.slot_energy_log()]
    end_time = clock.polls * clock.dt
    per_task = _aggregate(workload, records, failures)
    if any(r["unprofiled"] for r in records):
        logger.warning("simulation executed unprofiled models; their numbers are placeholders")

    return SimulationReport(
        policy=policy.label(tracker_config.energy_target_j),
        policy_config=policy.describe(),
        seed=seed,
        workload_fingerprint=workload_fingerprint(workload),
        per_task=per_task,
        per_slot_energy=per_slot,
        energy_target_j=tracker_config.energy_target_j,
        violation_rate=violation_rate(per_slot, tracker_config.energy_target_j),
        total_energy_j=math.fsum(per_slot),
        meter_energy_j=meter.energy_between(0.0, end_time),
        config={
            "tracker": asdict(tracker_config),
            "meter": asdict(meter_config),
            "sample_accuracy": sample_accuracy,
            "trace": trace is not None,
            "duration_s": end_time,
        },
        requests=records,
        failures=failures,
    )


def _aggregate(
    workload: Sequence[WorkloadRequest], records: list[dict], failures: list[dict]
) -> dict[str, TaskStats]:
    stats: dict[str, TaskStats] = {}
    for req in workload:
        stats.setdefault(req.task, TaskStats()).requests += 1
    for f in failures:
        stats[f["task"]].failed += 1
    by_task: dict[str, list[dict]] = {}
    for r in records:
        by_task.setdefault(r["task"], []).append(r)
    for task, rs in by_task.items():
        s = stats[task]
        s.completed = len(rs)
        s.mean_accuracy = math.fsum(r["accuracy"] for r in rs) / len(rs)
        s.mean_energy_j = math.fsum(r["energy_j"] for r in rs) / len(rs)
        s.acc_per_joule = s.mean_accuracy / s.mean_energy_j
        s.selection_histogram = dict(sorted(Counter(r["model"] for r in rs).items()))
        flags = [r["on_frontier"] for r in rs if r["on_frontier"] is not None]
        s.pareto_rate = sum(flags) / len(flags) if flags else None
    return stats


def energy_closure_gap(report: SimulationReport) -> float:
    """Relative difference between slot-summed and analytic meter energy."""
    if report.meter_energy_j == 0:
        return abs(report.total_energy_j)
    return abs(report.total_energy_j - report.meter_energy_j) / report.meter_energy_j



