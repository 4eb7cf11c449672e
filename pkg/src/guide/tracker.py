"""Per-slot GPU energy accounting with an EMA power forecast.

Time is cut into fixed slots. Every poll the tracker receives the energy
consumed since the previous poll, folds the implied power into an exponential
moving average, and projects the slot total as::

    used + ema_power * time_remaining

The usable budget is whatever is left of the slot target after that
projection, clamped at zero. The state transition is a pure function
(:func:`ingest_sample`); :class:`EnergyBudgetTracker` wraps it for the single
polling writer and hands out immutable snapshots to any number of readers.
"""

from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Protocol

from .errors import ConfigError, MonotonicityError, PreconditionError

logger = logging.getLogger(__name__)

_REL_TOL = 1e-9


@dataclass(frozen=True)
class TrackerConfig:
    energy_target_j: float
    slot_duration_s: float = 2.0
    poll_interval_s: float = 0.1
    ema_weight: float = 0.3
    ema_persists_across_slots: bool = False

    def __post_init__(self) -> None:
        for name in ("energy_target_j", "slot_duration_s", "poll_interval_s"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ConfigError(f"{name} must be a positive finite number, got {value!r}")
        if self.poll_interval_s > self.slot_duration_s:
            raise ConfigError("poll_interval_s must not exceed slot_duration_s")
        # alpha == 1 is allowed: it disables smoothing (EMA == last sample).
        if not 0.0 < self.ema_weight <= 1.0:
            raise ConfigError(f"ema_weight must be in (0, 1], got {self.ema_weight!r}")
        ratio = self.slot_duration_s / self.poll_interval_s
        if abs(ratio - round(ratio)) > _REL_TOL * ratio:
            raise ConfigError(
                "slot_duration_s must be an integer multiple of poll_interval_s "
                f"({self.slot_duration_s} / {self.poll_interval_s} = {ratio})"
            )

    @property
    def polls_per_slot(self) -> int:
        return int(round(self.slot_duration_s / self.poll_interval_s))


@dataclass(frozen=True)
class EnergySample:
    energy_delta_j: float
    interval_s: float

    def __post_init__(self) -> None:
        if self.interval_s <= 0:
            raise PreconditionError(f"sample interval must be > 0, got {self.interval_s}")

    @property
    def power_w(self) -> float:
        return self.energy_delta_j / self.interval_s


@dataclass(frozen=True)
class BudgetEstimate:
    usable_j: float
    predicted_remaining_j: float
    predicted_total_j: float
    time_remaining_s: float
    as_of_poll: tuple[int, int]


@dataclass(frozen=True)
class TrackerState:
    slot_index: int
    poll_index_in_slot: int
    energy_used_j: float
    power_ema_w: float
    last_estimate: BudgetEstimate
    elapsed_in_slot_s: float = 0.0
    # Realized energy of the slot closed by the transition that produced this
    # state, or None if no slot closed.
    closed_slot_energy_j: float | None = field(default=None, compare=False)


def _estimate(
    config: TrackerConfig,
    energy_used: float,
    power_ema: float,
    time_remaining: float,
    as_of: tuple[int, int],
) -> BudgetEstimate:
    predicted_remaining = power_ema * time_remaining
    predicted_total = energy_used + predicted_remaining
    return BudgetEstimate(
        usable_j=max(0.0, config.energy_target_j - predicted_total),
        predicted_remaining_j=predicted_remaining,
        predicted_total_j=predicted_total,
        time_remaining_s=time_remaining,
        as_of_poll=as_of,
    )


def initial_state(config: TrackerConfig) -> TrackerState:
    return TrackerState(
        slot_index=0,
        poll_index_in_slot=0,
        energy_used_j=0.0,
        power_ema_w=0.0,
        last_estimate=_estimate(config, 0.0, 0.0, config.slot_duration_s, (0, 0)),
    )


def ingest_sample(
    state: TrackerState,
    config: TrackerConfig,
    sample: EnergySample,
    *,
    live: bool = False,
) -> TrackerState:
    """Advance the tracker by one poll.

    In simulation mode (default) every sample must span exactly one polling
    interval and the slot closes after ``polls_per_slot`` samples. In live
    mode the measured interval is used for power and remaining time, and the
    slot closes once accumulated time reaches the slot length.

    The estimate computed at the final poll of a slot (zero time remaining)
    stays current until the first poll of the next slot.
    """
    if sample.energy_delta_j < 0:
        raise MonotonicityError(
            f"negative energy delta {sample.energy_delta_j} J (meter wrap or fault)"
        )
    if not live and not math.isclose(
        sample.interval_s, config.poll_interval_s, rel_tol=_REL_TOL, abs_tol=0.0
    ):
        raise PreconditionError(
            f"sample interval {sample.interval_s} s != poll interval {config.poll_interval_s} s"
        )

    k = state.poll_index_in_slot + 1
    alpha = config.ema_weight
    power_ema = alpha * sample.power_w + (1.0 - alpha) * state.power_ema_w
    energy_used = state.energy_used_j + sample.energy_delta_j
    elapsed = state.elapsed_in_slot_s + sample.interval_s

    n = config.polls_per_slot
    if live:
        closing = elapsed >= config.slot_duration_s * (1.0 - _REL_TOL)
        time_remaining = 0.0 if closing else config.slot_duration_s - elapsed
    else:
        closing = k >= n
        time_remaining = 0.0 if closing else config.slot_duration_s - k * config.poll_interval_s

    estimate = _estimate(config, energy_used, power_ema, time_remaining, (state.slot_index, k))

    if not closing:
        return TrackerState(
            slot_index=state.slot_index,
            poll_index_in_slot=k,
            energy_used_j=energy_used,
            power_ema_w=power_ema,
            last_estimate=estimate,
            elapsed_in_slot_s=elapsed,
        )
    return TrackerState(
        slot_index=state.slot_index + 1,
        poll_index_in_slot=0,
        energy_used_j=0.0,
        power_ema_w=power_ema if config.ema_persists_across_slots else 0.0,
        last_estimate=estimate,
        elapsed_in_slot_s=0.0,
        closed_slot_energy_j=energy_used,
    )


def usable_budget(state: TrackerState) -> BudgetEstimate:
    return state.last_estimate


class BudgetSource(Protocol):
    """Anything the selector can pull a fresh usable budget from."""

    def pull(self) -> BudgetEstimate: ...


class EnergyBudgetTracker:
    """Stateful wrapper: one writer calls :meth:`ingest`, readers call :meth:`pull`.

    Readers only ever see a fully built, immutable :class:`BudgetEstimate`,
    because the state reference is swapped in a single assignment.
    """

    def __init__(self, config: TrackerConfig, *, live: bool = False):
        self.config = config
        self.live = live
        self._state = initial_state(config)
        self._slot_log: list[tuple[int, float]] = []

    @property
    def state(self) -> TrackerState:
        return self._state

    def ingest(self, sample: EnergySample) -> BudgetEstimate:
        prev_slot = self._state.slot_index
        new = ingest_sample(self._state, self.config, sample, live=self.live)
        if new.closed_slot_energy_j is not None:
            self._slot_log.append((prev_slot, new.closed_slot_energy_j))
        self._state = new
        return new.last_estimate

    def pull(self) -> BudgetEstimate:
        return self._state.last_estimate

    usable_budget = pull

    def slot_energy_log(self) -> list[tuple[int, float]]:
        return list(self._slot_log)

    def replace_config(self, **changes) -> None:
        """Swap tunables between slots (e.g. a new energy target)."""
        self.config = replace(self.config, **changes)


def slot_energy_log(tracker: EnergyBudgetTracker) -> list[tuple[int, float]]:
    return tracker.slot_energy_log()


class PollingLoop:
    """Background thread that feeds a live tracker from a primed energy source.

    ``source`` follows the ``meter.RealMeter`` contract: ``prime(now)`` once,
    then ``read_energy_delta(now)`` returns the sample since the previous read.
    """

    def __init__(self, tracker: EnergyBudgetTracker, source, clock: Callable[[], float]):
        self.tracker = tracker
        self.source = source
        self._clock = clock
        self._stop = threading.Event()
        self._thread: threading.Thread | None = None

    def start(self) -> None:
        if not self.tracker.live:
            raise ConfigError("PollingLoop needs a tracker constructed with live=True")
        if self._thread is not None:
            raise RuntimeError("polling loop already started")
        self.source.prime(self._clock())
        self._thread = threading.Thread(target=self._run, name="energy-tracker", daemon=True)
        self._thread.start()

    def stop(self, timeout: float | None = None) -> None:
        self._stop.set()
        if self._thread is not None:
            self._thread.join(timeout)

    def _run(self) -> None:
        interval = self.tracker.config.poll_interval_s
        while not self._stop.wait(interval):
            try:
                self.tracker.ingest(self.source.read_energy_delta(self._clock()))
            except Exception:  # one bad reading must not kill the tracker
                logger.exception("energy poll failed")
