"""Selection policies: the budget-aware selector plus the metadata-driven baselines."""

from __future__ import annotations

import json
import math
import random
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Mapping

from ..errors import ConfigError, UnknownTask
from ..registry import ModelRegistry, filter_by_task
from ..selector import SelectorConfig


class PolicyKind(str, Enum):
    GUIDE = "guide"
    POPULARITY = "popularity"
    NAME_ONLY = "name-only"
    FIXED = "fixed"


@dataclass(frozen=True)
class Policy:
    kind: PolicyKind
    selector: SelectorConfig = field(default_factory=SelectorConfig)
    energy_target_j: float | None = None
    distribution: Mapping[str, Mapping[str, float]] | None = None
    model_id: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", PolicyKind(self.kind))
        if self.kind is PolicyKind.FIXED and not self.model_id:
            raise ConfigError("fixed policy needs a model id")
        if self.kind is PolicyKind.NAME_ONLY:
            if self.distribution is None:
                object.__setattr__(self, "distribution", load_name_only_distribution())
            validate_distribution(self.distribution)
        if self.energy_target_j is not None and not self.energy_target_j > 0:
            raise ConfigError("energy target must be > 0")

    @classmethod
    def guide(cls, energy_target_j: float | None = None, selector: SelectorConfig | None = None) -> "Policy":
        return cls(PolicyKind.GUIDE, selector=selector or SelectorConfig(), energy_target_j=energy_target_j)

    @classmethod
    def popularity(cls) -> "Policy":
        return cls(PolicyKind.POPULARITY)

    @classmethod
    def name_only(cls, distribution: Mapping[str, Mapping[str, float]] | None = None) -> "Policy":
        return cls(PolicyKind.NAME_ONLY, distribution=distribution)

    @classmethod
    def fixed(cls, model_id: str) -> "Policy":
        return cls(PolicyKind.FIXED, model_id=model_id)

    def label(self, energy_target_j: float | None = None) -> str:
        if self.kind is PolicyKind.GUIDE:
            target = self.energy_target_j if self.energy_target_j is not None else energy_target_j
            return f"GUIDE-{target:g}" if target is not None else "GUIDE"
        if self.kind is PolicyKind.POPULARITY:
            return "Popularity"
        if self.kind is PolicyKind.NAME_ONLY:
            return "Name-Only"
        return f"Fixed({self.model_id})"

    def describe(self) -> dict:
        d: dict = {"kind": self.kind.value}
        if self.kind is PolicyKind.GUIDE:
            d["retry_interval_s"] = self.selector.retry_interval_s
            d["max_retries"] = self.selector.max_retries
            if self.energy_target_j is not None:
                d["energy_target_j"] = self.energy_target_j
        elif self.kind is PolicyKind.NAME_ONLY:
            d["distribution"] = {t: dict(w) for t, w in self.distribution.items()}
        elif self.kind is PolicyKind.FIXED:
            d["model_id"] = self.model_id
        return d


def validate_distribution(dist: Mapping[str, Mapping[str, float]]) -> None:
    for task, weights in dist.items():
        if not weights:
            raise ConfigError(f"empty selection distribution for task '{task}'")
        if any(w < 0 for w in weights.values()):
            raise ConfigError(f"negative selection weight for task '{task}'")
        total = math.fsum(weights.values())
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"selection weights for task '{task}' sum to {total}, not 1")


def load_name_only_distribution(path: str | Path | None = None) -> dict[str, dict[str, float]]:
    if path is None:
        text = resources.files("guide").joinpath("data/name_only.json").read_text("utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    raw = json.loads(text)
    dist = {t: {m: float(w) for m, w in ws.items()} for t, ws in raw.items() if not t.startswith("_")}
    validate_distribution(dist)
    return dist


def most_liked(registry: ModelRegistry, task: str) -> str:
    models = filter_by_task(registry, task)
    if not models:
        raise UnknownTask(task)
    return min(models, key=lambda m: (-m.likes, m.id)).id


def baseline_choose(policy: Policy, task: str, registry: ModelRegistry, rng: random.Random) -> str:
    """Model id a non-budget-aware policy picks for one request.

    Raises:
        ConfigError: called with the budget-aware policy, or the task is
            missing from a name-only distribution.
        UnknownTask: popularity policy on a task with no models.
    """
    if policy.kind is PolicyKind.POPULARITY:
        return most_liked(registry, task)
    if policy.kind is PolicyKind.FIXED:
        return policy.model_id
    if policy.kind is PolicyKind.NAME_ONLY:
        weights = policy.distribution.get(task)
        if weights is None:
            raise ConfigError(f"no name-only selection distribution for task '{task}'")
        u = rng.random()
        acc = 0.0
        last = None
        for model_id, w in weights.items():
            acc += w
            last = model_id
            if u < acc:
                return model_id
        return last
    raise ConfigError("baseline_choose does not handle the budget-aware policy")
