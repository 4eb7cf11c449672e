"""Model profiles, the registry file format, and the accuracy/energy Pareto filter.

Registry files are JSON Lines: one object per model, blank lines and lines
starting with ``#`` are skipped. Required keys are ``id``, ``task``,
``energy_avg_j``, ``accuracy`` and ``latency_s``; ``likes``, ``description``,
``lifecycle_energy_j`` and ``unprofiled`` are optional.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import BinaryIO, Iterable, Iterator, Sequence

from .errors import PreconditionError, RegistryParseError, RegistryValidationError

#: Task labels used by the shipped data. Any other non-empty string is accepted.
KNOWN_TASKS = ("ICapt", "VQA", "OD", "IGen", "DocVQA", "IClass")

REQUIRED_FIELDS = ("id", "task", "energy_avg_j", "accuracy", "latency_s")
OPTIONAL_FIELDS = ("likes", "description", "lifecycle_energy_j", "unprofiled")


@dataclass(frozen=True)
class ModelProfile:
    """Pre-measured characteristics of one servable model.

    ``energy_avg`` is the incremental energy of a single forward pass with the
    model already resident on the device; ``lifecycle_energy`` (load + run +
    unload) is carried for reference only and never used for selection.
    """

    id: str
    task: str
    energy_avg: float
    accuracy: float
    latency_avg: float
    likes: int = 0
    description: str = ""
    lifecycle_energy: float | None = None
    unprofiled: bool = False

    def __post_init__(self) -> None:
        if not isinstance(self.id, str) or not self.id:
            raise RegistryValidationError("id must be a non-empty string", field="id")
        if not isinstance(self.task, str) or not self.task:
            raise RegistryValidationError("task must be a non-empty string", field="task")
        _check_finite("energy_avg_j", self.energy_avg)
        _check_finite("accuracy", self.accuracy)
        _check_finite("latency_s", self.latency_avg)
        if self.energy_avg <= 0:
            raise RegistryValidationError(
                f"energy must be > 0, got {self.energy_avg}", field="energy_avg_j"
            )
        if self.latency_avg <= 0:
            raise RegistryValidationError(
                f"latency must be > 0, got {self.latency_avg}", field="latency_s"
            )
        if not 0.0 <= self.accuracy <= 1.0:
            raise RegistryValidationError(
                f"accuracy must lie in [0, 1], got {self.accuracy}", field="accuracy"
            )
        if isinstance(self.likes, bool) or not isinstance(self.likes, int) or self.likes < 0:
            raise RegistryValidationError(
                f"likes must be a non-negative integer, got {self.likes!r}", field="likes"
            )
        if self.lifecycle_energy is not None:
            _check_finite("lifecycle_energy_j", self.lifecycle_energy)
            if self.lifecycle_energy < 0:
                raise RegistryValidationError(
                    "lifecycle energy must be >= 0", field="lifecycle_energy_j"
                )

    def to_record(self) -> dict:
        rec = {
            "id": self.id,
            "task": self.task,
            "energy_avg_j": self.energy_avg,
            "accuracy": self.accuracy,
            "latency_s": self.latency_avg,
            "likes": self.likes,
        }
        if self.description:
            rec["description"] = self.description
        if self.lifecycle_energy is not None:
            rec["lifecycle_energy_j"] = self.lifecycle_energy
        if self.unprofiled:
            rec["unprofiled"] = True
        return rec


def _check_finite(name: str, value: object) -> None:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise RegistryValidationError(f"expected a number, got {value!r}", field=name)
    if not math.isfinite(value):
        raise RegistryValidationError(f"expected a finite number, got {value!r}", field=name)


class ModelRegistry:
    """Immutable, ordered collection of model profiles keyed by unique id."""

    def __init__(self, models: Iterable[ModelProfile] = ()):
        ordered = tuple(models)
        by_id: dict[str, ModelProfile] = {}
        for m in ordered:
            if m.id in by_id:
                raise RegistryValidationError(f"duplicate model id '{m.id}'", field="id")
            by_id[m.id] = m
        self._models = ordered
        self._by_id = by_id

    @property
    def models(self) -> tuple[ModelProfile, ...]:
        return self._models

    def __iter__(self) -> Iterator[ModelProfile]:
        return iter(self._models)

    def __len__(self) -> int:
        return len(self._models)

    def __contains__(self, model_id: object) -> bool:
        return model_id in self._by_id

    def __getitem__(self, model_id: str) -> ModelProfile:
        return self._by_id[model_id]

    def get(self, model_id: str) -> ModelProfile | None:
        return self._by_id.get(model_id)

    def tasks(self) -> list[str]:
        """Task labels in first-appearance order."""
        return list(dict.fromkeys(m.task for m in self._models))

    def profiled(self) -> "ModelRegistry":
        return ModelRegistry(m for m in self._models if not m.unprofiled)

    def __repr__(self) -> str:
        return f"ModelRegistry({len(self)} models)"


def parse_record(obj: object, line: int | None = None) -> ModelProfile:
    if not isinstance(obj, dict):
        raise RegistryParseError("record must be a JSON object", line=line)
    for key in REQUIRED_FIELDS:
        if key not in obj:
            raise RegistryParseError("missing required field", line=line, field=key)
    unknown = set(obj) - set(REQUIRED_FIELDS) - set(OPTIONAL_FIELDS)
    if unknown:
        raise RegistryParseError(
            "unknown field", line=line, field=sorted(unknown)[0]
        )
    description = obj.get("description", "")
    if not isinstance(description, str):
        raise RegistryParseError("description must be a string", line=line, field="description")
    unprofiled = obj.get("unprofiled", False)
    if not isinstance(unprofiled, bool):
        raise RegistryParseError("unprofiled must be a boolean", line=line, field="unprofiled")
    try:
        return ModelProfile(
            id=obj["id"],
            task=obj["task"],
            energy_avg=obj["energy_avg_j"],
            accuracy=obj["accuracy"],
            latency_avg=obj["latency_s"],
            likes=obj.get("likes", 0),
            description=description,
            lifecycle_energy=obj.get("lifecycle_energy_j"),
            unprofiled=unprofiled,
        )
    except RegistryValidationError as exc:
        raise RegistryValidationError(exc.detail, line=line, field=exc.field) from None


def load_registry(source: BinaryIO | bytes) -> ModelRegistry:
    """Parse and validate a JSON Lines registry from a byte stream."""
    data = source if isinstance(source, bytes) else source.read()
    try:
        text = data.decode("utf-8")
    except UnicodeDecodeError as exc:
        raise RegistryParseError(f"registry is not valid UTF-8: {exc}") from None

    models: list[ModelProfile] = []
    seen: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        stripped = raw.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            obj = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise RegistryParseError(f"malformed JSON ({exc.msg})", line=lineno) from None
        profile = parse_record(obj, line=lineno)
        if profile.id in seen:
            raise RegistryValidationError(
                f"duplicate model id '{profile.id}' (first defined on line {seen[profile.id]})",
                line=lineno,
                field="id",
            )
        seen[profile.id] = lineno
        models.append(profile)
    return ModelRegistry(models)


def load_registry_path(path: str | Path) -> ModelRegistry:
    with open(path, "rb") as fh:
        return load_registry(fh)


def default_registry() -> ModelRegistry:
    """The shipped 26-model registry."""
    data = resources.files("guide").joinpath("data/registry.jsonl").read_bytes()
    return load_registry(io.BytesIO(data))


def dump_registry(registry: Iterable[ModelProfile]) -> bytes:
    lines = [json.dumps(m.to_record(), sort_keys=False) for m in registry]
    return ("\n".join(lines) + "\n").encode("utf-8")


def filter_by_task(registry: Iterable[ModelProfile], task: str) -> list[ModelProfile]:
    return [m for m in registry if m.task == task]


def dominates(a: ModelProfile, b: ModelProfile) -> bool:
    """True when ``a`` is strictly cheaper and strictly more accurate than ``b``."""
    return a.energy_avg < b.energy_avg and a.accuracy > b.accuracy


def pareto_frontier(models: Sequence[ModelProfile]) -> list[ModelProfile]:
    """Models not strictly dominated in both energy and accuracy.

    Ties in either coordinate never dominate, so two models with equal
    accuracy both survive. The result is ordered by ascending energy, then id.
    Runs in O(n log n): after sorting by energy, a model is dominated exactly
    when some strictly cheaper model has higher accuracy.
    """
    if not models:
        return []
    tasks = {m.task for m in models}
    if len(tasks) > 1:
        raise PreconditionError(f"pareto_frontier needs a single task, got {sorted(tasks)}")

    ordered = sorted(models, key=lambda m: (m.energy_avg, m.id))
    frontier: list[ModelProfile] = []
    best_cheaper = -math.inf  # max accuracy among strictly cheaper models
    i = 0
    n = len(ordered)
    while i < n:
        j = i
        group_best = -math.inf
        energy = ordered[i].energy_avg
        while j < n and ordered[j].energy_avg == energy:
            m = ordered[j]
            if not m.accuracy < best_cheaper:
                frontier.append(m)
            group_best = max(group_best, m.accuracy)
            j += 1
        best_cheaper = max(best_cheaper, group_best)
        i = j
    return frontier
