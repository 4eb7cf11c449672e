"""Workload traces: parsing, writing and seeded generation."""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

from ..errors import ConfigError
from ..registry import KNOWN_TASKS


@dataclass(frozen=True)
class WorkloadRequest:
    arrival_s: float
    task: str
    request_id: str


def parse_workload(text: str) -> list[WorkloadRequest]:
    """Parse ``arrival_s,task,request_id`` lines ('#' starts a comment)."""
    out: list[WorkloadRequest] = []
    prev = float("-inf")
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise ConfigError(f"workload line {lineno}: expected 'arrival_s,task,request_id'")
        try:
            arrival = float(parts[0])
        except ValueError:
            raise ConfigError(f"workload line {lineno}: bad arrival time {parts[0]!r}") from None
        if arrival < prev:
            raise ConfigError(f"workload line {lineno}: arrivals must be non-decreasing")
        if not parts[1] or not parts[2]:
            raise ConfigError(f"workload line {lineno}: empty task or request id")
        prev = arrival
        out.append(WorkloadRequest(arrival, parts[1], parts[2]))
    return out


def load_workload(path: str | Path) -> list[WorkloadRequest]:
    return parse_workload(Path(path).read_text(encoding="utf-8"))


def format_workload(requests: Sequence[WorkloadRequest]) -> str:
    lines = ["# arrival_s,task,request_id"]
    lines += [f"{r.arrival_s!r},{r.task},{r.request_id}" for r in requests]
    return "\n".join(lines) + "\n"


def workload_fingerprint(requests: Sequence[WorkloadRequest]) -> str:
    return hashlib.sha256(format_workload(requests).encode("utf-8")).hexdigest()


_TASK_ALIASES = {t.lower(): t for t in KNOWN_TASKS}


def parse_task_mix(spec: str) -> dict[str, float]:
    """``"icapt"`` or ``"icapt:0.5,vqa:0.5"`` -> normalized task weights.

    Known task names are matched case-insensitively; anything else is kept verbatim.
    """
    mix: dict[str, float] = {}
    for part in spec.split(","):
        part = part.strip()
        if not part:
            continue
        name, _, weight = part.partition(":")
        task = _TASK_ALIASES.get(name.strip().lower(), name.strip())
        try:
            w = float(weight) if weight else 1.0
        except ValueError:
            raise ConfigError(f"bad weight in task mix: {part!r}") from None
        if w < 0:
            raise ConfigError(f"negative weight in task mix: {part!r}")
        mix[task] = mix.get(task, 0.0) + w
    total = sum(mix.values())
    if not mix or total <= 0:
        raise ConfigError(f"empty task mix: {spec!r}")
    return {t: w / total for t, w in mix.items()}


def generate_workload(
    task_mix: Mapping[str, float] | str,
    n_requests: int = 100,
    mean_interarrival_s: float = 5.0,
    seed: int = 0,
    start_s: float = 0.0,
) -> list[WorkloadRequest]:
    """Poisson arrivals with tasks drawn from ``task_mix``.

    The default spacing of a few seconds reflects that each request also
    passes through LLM planning and response generation before and after the
    model call, so the GPU sees isolated inferences rather than a saturated queue.
    """
    if isinstance(task_mix, str):
        task_mix = parse_task_mix(task_mix)
    if n_requests <= 0:
        raise ConfigError("n_requests must be positive")
    if mean_interarrival_s <= 0:
        raise ConfigError("mean_interarrival_s must be positive")
    rng = random.Random(seed)
    tasks = list(task_mix)
    weights = [task_mix[t] for t in tasks]
    t = start_s
    out = []
    for i in range(n_requests):
        t += rng.expovariate(1.0 / mean_interarrival_s)
        task = tasks[0] if len(tasks) == 1 else rng.choices(tasks, weights)[0]
        out.append(WorkloadRequest(t, task, f"req-{i:05d}"))
    return out
