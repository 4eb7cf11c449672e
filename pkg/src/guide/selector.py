"""Budget-aware model selection.

For a request of a given task the selector keeps the task's profiled models
whose mean energy fits the tracker's current usable budget, reduces them to
the accuracy/energy Pareto frontier and returns the most accurate survivor.
If nothing fits, it waits and pulls a fresh budget, up to ``max_retries``
times.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

from .errors import BudgetStarvation, ConfigError, UnknownTask
from .registry import ModelProfile, ModelRegistry, filter_by_task, pareto_frontier
from .tracker import BudgetEstimate, BudgetSource


@dataclass(frozen=True)
class SelectorConfig:
    retry_interval_s: float = 0.5
    max_retries: int = 20

    def __post_init__(self) -> None:
        if not self.retry_interval_s > 0:
            raise ConfigError(f"retry_interval_s must be > 0, got {self.retry_interval_s}")
        if isinstance(self.max_retries, bool) or not isinstance(self.max_retries, int) or self.max_retries < 0:
            raise ConfigError(f"max_retries must be a non-negative integer, got {self.max_retries!r}")


@dataclass(frozen=True)
class SelectionDecision:
    chosen: str
    task: str
    budget_at_decision_j: float
    candidates_task: tuple[str, ...]
    candidates_budget: tuple[str, ...]
    pareto_subset: tuple[str, ...]
    retries: int
    decision_latency_s: float

    def to_dict(self) -> dict:
        return {
            "chosen": self.chosen,
            "task": self.task,
            "budget_at_decision_j": self.budget_at_decision_j,
            "candidates_task": list(self.candidates_task),
            "candidates_budget": list(self.candidates_budget),
            "pareto_subset": list(self.pareto_subset),
            "retries": self.retries,
            "decision_latency_s": self.decision_latency_s,
        }


class FixedBudget:
    """Budget source that always reports the same usable energy."""

    def __init__(self, usable_j: float):
        self._estimate = BudgetEstimate(
            usable_j=max(0.0, float(usable_j)),
            predicted_remaining_j=0.0,
            predicted_total_j=0.0,
            time_remaining_s=0.0,
            as_of_poll=(0, 0),
        )

    def pull(self) -> BudgetEstimate:
        return self._estimate


class BudgetSequence:
    """Replays a fixed list of budgets, repeating the last one when exhausted."""

    def __init__(self, budgets: Iterable[float]):
        self._sources = [FixedBudget(b) for b in budgets]
        if not self._sources:
            raise ValueError("need at least one budget")
        self._i = 0

    def pull(self) -> BudgetEstimate:
        est = self._sources[min(self._i, len(self._sources) - 1)].pull()
        self._i += 1
        return est


def best_by_accuracy(models: Sequence[ModelProfile]) -> ModelProfile:
    """Highest accuracy; ties go to lower energy, then lexicographically smaller id."""
    return min(models, key=lambda m: (-m.accuracy, m.energy_avg, m.id))


def no_wait(_: float) -> None:
    """Wait callback for static budget sources, where sleeping cannot help."""
    pass


def choose_from(candidates: Sequence[ModelProfile], budget_j: float):
    """One pass of the filter chain over a task's candidates.

    Returns ``(within_budget, frontier, chosen)``; ``chosen`` is None when no
    candidate fits.
    """
    within = [m for m in candidates if m.energy_avg <= budget_j]
    if not within:
        return within, [], None
    frontier = pareto_frontier(within)
    return within, frontier, best_by_accuracy(frontier)


class ModelSelector:
    """Selector bound to one registry snapshot; task candidate lists are precomputed."""

    def __init__(self, registry: ModelRegistry, config: SelectorConfig | None = None):
        self.registry = registry
        self.config = config or SelectorConfig()
        self._by_task: dict[str, list[ModelProfile]] = {}
        for m in registry:
            if not m.unprofiled:
                self._by_task.setdefault(m.task, []).append(m)

    def candidates(self, task: str) -> list[ModelProfile]:
        try:
            return self._by_task[task]
        except KeyError:
            raise UnknownTask(task) from None

    def select(
        self,
        task: str,
        budget_source: BudgetSource,
        *,
        wait: Callable[[float], None] = time.sleep,
        clock: Callable[[], float] = time.perf_counter,
    ) -> SelectionDecision:
        """Pick a model for ``task``, pulling a fresh budget on every attempt.

        ``wait`` and ``clock`` default to real time; the simulator passes its
        virtual clock so that retries advance simulated time instead.

        Raises:
            UnknownTask: the registry has no profiled model for ``task``.
            BudgetStarvation: nothing fit after ``max_retries`` waits.
        """
        started = clock()
        task_models = self.candidates(task)
        cfg = self.config
        retries = 0
        while True:
            budget = budget_source.pull().usable_j
            within, frontier, chosen = choose_from(task_models, budget)
            if chosen is not None:
                break
            if retries >= cfg.max_retries:
                raise BudgetStarvation(task, retries, budget)
            wait(cfg.retry_interval_s)
            retries += 1

        return SelectionDecision(
            chosen=chosen.id,
            task=task,
            budget_at_decision_j=budget,
            candidates_task=tuple(m.id for m in task_models),
            candidates_budget=tuple(m.id for m in within),
            pareto_subset=tuple(m.id for m in frontier),
            retries=retries,
            decision_latency_s=clock() - started,
        )


def select(
    task: str,
    registry: ModelRegistry,
    budget_source: BudgetSource,
    config: SelectorConfig | None = None,
    *,
    wait: Callable[[float], None] = time.sleep,
    clock: Callable[[], float] = time.perf_counter,
) -> SelectionDecision:
    return ModelSelector(registry, config).select(task, budget_source, wait=wait, clock=clock)


def task_frontier(registry: ModelRegistry, task: str) -> list[ModelProfile]:
    """Unconstrained frontier over a task's profiled models."""
    models = [m for m in filter_by_task(registry, task) if not m.unprofiled]
    if not models:
        raise UnknownTask(task)
    return pareto_frontier(models)
