"""Energy sources: a deterministic simulated GPU meter and the live-meter seam.

The simulated meter draws a constant base power (optionally with seeded
uniform jitter), adds constant-power model executions and an optional
replayed power trace, and answers reads with the exact integral of total
power since the previous read.
"""

from __future__ import annotations

import abc
import bisect
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol

from .errors import ConfigError, MonotonicityError, SchedulingError
from .tracker import EnergySample


@dataclass(frozen=True)
class PowerTrace:
    """Piecewise-constant power: each breakpoint's power holds until the next.

    Power is zero before the first breakpoint and the last value holds forever.
    """

    samples: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        prev = -math.inf
        for t, p in self.samples:
            if not t > prev:
                raise ConfigError(f"trace timestamps must be strictly increasing (at {t})")
            if p < 0:
                raise ConfigError(f"trace power must be >= 0 (got {p} at {t})")
            prev = t
        object.__setattr__(self, "_times", [t for t, _ in self.samples])
        cum = [0.0]
        for (t0, p0), (t1, _) in zip(self.samples, self.samples[1:]):
            cum.append(cum[-1] + p0 * (t1 - t0))
        object.__setattr__(self, "_cum", cum)

    def _cumulative(self, t: float) -> float:
        times = self._times  # type: ignore[attr-defined]
        i = bisect.bisect_right(times, t) - 1
        if i < 0:
            return 0.0
        return self._cum[i] + self.samples[i][1] * (t - times[i])  # type: ignore[attr-defined]

    def energy(self, t0: float, t1: float) -> float:
        if not self.samples:
            return 0.0
        return max(0.0, self._cumulative(t1) - self._cumulative(t0))

    @classmethod
    def parse(cls, text: str) -> "PowerTrace":
        pts = []
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 2:
                raise ConfigError(f"trace line {lineno}: expected 'timestamp_s,power_w'")
            try:
                pts.append((float(parts[0]), float(parts[1])))
            except ValueError:
                raise ConfigError(f"trace line {lineno}: not a number") from None
        return cls(tuple(pts))

    @classmethod
    def load(cls, path: str | Path) -> "PowerTrace":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


@dataclass(frozen=True)
class SimMeterConfig:
    base_draw_w: float = 45.0
    base_draw_jitter_w: float = 0.0
    seed: int = 0
    jitter_step_s: float = 0.1
    # Power the tracker's own polling adds to the GPU; off by default.
    tracker_overhead_w: float = 0.0

    def __post_init__(self) -> None:
        if self.base_draw_w < 0:
            raise ConfigError("base_draw_w must be >= 0")
        if not 0 <= self.base_draw_jitter_w <= self.base_draw_w:
            raise ConfigError("base_draw_jitter_w must lie in [0, base_draw_w]")
        if self.jitter_step_s <= 0:
            raise ConfigError("jitter_step_s must be > 0")
        if self.tracker_overhead_w < 0:
            raise ConfigError("tracker_overhead_w must be >= 0")


@dataclass(frozen=True)
class ScheduledExecution:
    model_id: str
    start_s: float
    duration_s: float
    energy_j: float

    def __post_init__(self) -> None:
        if not self.duration_s > 0:
            raise SchedulingError(f"execution duration must be > 0, got {self.duration_s}")
        if self.energy_j < 0:
            raise SchedulingError(f"execution energy must be >= 0, got {self.energy_j}")

    @property
    def end_s(self) -> float:
        return self.start_s + self.duration_s

    @property
    def power_w(self) -> float:
        return self.energy_j / self.duration_s

    def energy_between(self, t0: float, t1: float) -> float:
        if t0 <= self.start_s and self.end_s <= t1:
            return self.energy_j
        lo = max(t0, self.start_s)
        hi = min(t1, self.end_s)
        if hi <= lo:
            return 0.0
        return self.energy_j * (hi - lo) / self.duration_s


class EnergySource(Protocol):
    def read_energy_delta(self, now_s: float) -> EnergySample: ...


class SimMeter:
    """Simulated single-GPU energy meter on a virtual clock."""

    def __init__(
        self,
        config: SimMeterConfig | None = None,
        trace: PowerTrace | None = None,
        start_s: float = 0.0,
    ):
        self.config = config or SimMeterConfig()
        self.trace = trace
        self._origin = start_s
        self._last_read = start_s
        self._execs: list[ScheduledExecution] = []
        self._ends: list[float] = []
        self._rng = random.Random(self.config.seed)
        self._jitter: list[float] = []

    @property
    def last_read_s(self) -> float:
        return self._last_read

    @property
    def executions(self) -> tuple[ScheduledExecution, ...]:
        return tuple(self._execs)

    def schedule_execution(self, execution: ScheduledExecution) -> ScheduledExecution:
        """Register a model run; returns the accepted execution as acknowledgment."""
        if execution.start_s < self._last_read:
            raise SchedulingError(
                f"execution of {execution.model_id} starts at {execution.start_s} s, "
                f"before the last meter read at {self._last_read} s"
            )
        i = bisect.bisect_right(self._ends, execution.start_s)
        if i < len(self._execs) and self._execs[i].start_s < execution.end_s:
            other = self._execs[i]
            raise SchedulingError(
                f"execution of {execution.model_id} [{execution.start_s}, {execution.end_s}) "
                f"overlaps {other.model_id} [{other.start_s}, {other.end_s})"
            )
        self._execs.insert(i, execution)
        self._ends.insert(i, execution.end_s)
        return execution

    def _jitter_value(self, bucket: int) -> float:
        while len(self._jitter) <= bucket:
            j = self.config.base_draw_jitter_w
            self._jitter.append(self._rng.uniform(-j, j))
        return self._jitter[bucket]

    def _base_energy(self, t0: float, t1: float) -> float:
        cfg = self.config
        total = (cfg.base_draw_w + cfg.tracker_overhead_w) * (t1 - t0)
        if cfg.base_draw_jitter_w == 0.0:
            return total
        step = cfg.jitter_step_s
        b0 = int(math.floor((t0 - self._origin) / step))
        b1 = int(math.floor((t1 - self._origin) / step))
        for b in range(max(b0, 0), b1 + 1):
            lo = max(t0, self._origin + b * step)
            hi = min(t1, self._origin + (b + 1) * step)
            if hi > lo:
                total += self._jitter_value(b) * (hi - lo)
        return total

    def _exec_energy(self, t0: float, t1: float) -> float:
        total = 0.0
        i = bisect.bisect_right(self._ends, t0)
        while i < len(self._execs) and self._execs[i].start_s < t1:
            total += self._execs[i].energy_between(t0, t1)
            i += 1
        return total

    def energy_between(self, t0: float, t1: float) -> float:
        """Analytic energy over ``(t0, t1]`` without advancing the read cursor."""
        if t1 <= t0:
            return 0.0
        e = self._base_energy(t0, t1) + self._exec_energy(t0, t1)
        if self.trace is not None:
            e += self.trace.energy(t0, t1)
        return max(0.0, e)

    def read_energy_delta(self, now_s: float) -> EnergySample:
        if not now_s > self._last_read:
            raise MonotonicityError(
                f"meter read at {now_s} s does not advance past the previous read at "
                f"{self._last_read} s"
            )
        delta = self.energy_between(self._last_read, now_s)
        sample = EnergySample(delta, now_s - self._last_read)
        self._last_read = now_s
        return sample


class RealMeter(abc.ABC):
    """Live energy source backed by a hardware cumulative-energy counter.

    Subclasses provide :meth:`read_counter_j` (e.g. an NVML total-energy
    query); this base turns counter differences into samples with the same
    contract as :class:`SimMeter`. No hardware backend ships here.
    """

    def __init__(self) -> None:
        self._last_time: float | None = None
        self._last_counter: float | None = None

    @abc.abstractmethod
    def read_counter_j(self) -> float:
        """Monotone cumulative device energy in joules."""

    def read_energy_delta(self, now_s: float) -> EnergySample:
        counter = self.read_counter_j()
        if self._last_time is None:
            raise MonotonicityError("meter not primed; call prime() before the first read")
        if not now_s > self._last_time:
            raise MonotonicityError("time did not advance between meter reads")
        delta = counter - self._last_counter
        interval = now_s - self._last_time
        self._last_time, self._last_counter = now_s, counter
        if delta < 0:
            raise MonotonicityError(f"energy counter went backwards by {-delta} J")
        return EnergySample(delta, interval)

    def prime(self, now_s: float) -> None:
        self._last_time, self._last_counter = now_s, self.read_counter_j()


def total_energy(meter: SimMeter, t0: float, t1: float) -> float:
    return meter.energy_between(t0, t1)


def replay(meter: EnergySource, times: Iterable[float]) -> list[EnergySample]:
    return [meter.read_energy_delta(t) for t in times]
