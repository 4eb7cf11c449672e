import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from guide import (
    ConfigError,
    MonotonicityError,
    PowerTrace,
    RealMeter,
    ScheduledExecution,
    SchedulingError,
    SimMeter,
    SimMeterConfig,
)


def test_base_draw_only():
    m = SimMeter(SimMeterConfig(base_draw_w=45.0))
    s = m.read_energy_delta(0.1)
    assert s.energy_delta_j == pytest.approx(4.5, rel=1e-12)
    assert s.interval_s == pytest.approx(0.1)


def test_execution_inside_window():
    # BLIP-Capt-B: 12.5 J over 0.09 s, fully inside (0, 0.1].
    m = SimMeter(SimMeterConfig(base_draw_w=45.0))
    m.schedule_execution(ScheduledExecution("BLIP-Capt-B", 0.005, 0.09, 12.5))
    assert m.read_energy_delta(0.1).energy_delta_j == pytest.approx(17.0, rel=1e-12)


def test_zero_everything():
    m = SimMeter(SimMeterConfig(base_draw_w=0.0))
    assert m.read_energy_delta(1.0).energy_delta_j == 0.0


def test_execution_full_duration_is_exact():
    m = SimMeter(SimMeterConfig(base_draw_w=0.0))
    m.schedule_execution(ScheduledExecution("x", 0.0, 0.41, 110.8))
    assert m.read_energy_delta(0.41).energy_delta_j == 110.8


def test_execution_half_duration():
    m = SimMeter(SimMeterConfig(base_draw_w=0.0))
    m.schedule_execution(ScheduledExecution("x", 0.0, 0.4, 10.0))
    assert m.read_energy_delta(0.2).energy_delta_j == pytest.approx(5.0, rel=1e-12)
    assert m.read_energy_delta(0.4).energy_delta_j == pytest.approx(5.0, rel=1e-12)


def test_back_to_back_executions_additive():
    m = SimMeter(SimMeterConfig(base_draw_w=0.0))
    m.schedule_execution(ScheduledExecution("a", 0.0, 0.07, 12.7))
    m.schedule_execution(ScheduledExecution("b", 0.07, 0.09, 12.5))
    total = sum(m.read_energy_delta(t).energy_delta_j for t in (0.03, 0.05, 0.1, 0.16, 0.3))
    assert total == pytest.approx(25.2, rel=1e-12)


def test_overlap_rejected():
    m = SimMeter()
    m.schedule_execution(ScheduledExecution("a", 1.0, 0.5, 1.0))
    with pytest.raises(SchedulingError):
        m.schedule_execution(ScheduledExecution("b", 1.2, 0.5, 1.0))
    with pytest.raises(SchedulingError):
        m.schedule_execution(ScheduledExecution("c", 0.8, 0.3, 1.0))
    m.schedule_execution(ScheduledExecution("d", 0.5, 0.5, 1.0))  # touches, no overlap


def test_schedule_before_last_read_rejected():
    m = SimMeter()
    m.read_energy_delta(1.0)
    with pytest.raises(SchedulingError):
        m.schedule_execution(ScheduledExecution("a", 0.9, 0.5, 1.0))


def test_time_regression_rejected():
    m = SimMeter()
    m.read_energy_delta(1.0)
    with pytest.raises(MonotonicityError):
        m.read_energy_delta(0.5)
    with pytest.raises(MonotonicityError):
        m.read_energy_delta(1.0)


def test_invalid_execution_and_config():
    with pytest.raises(SchedulingError):
        ScheduledExecution("a", 0.0, 0.0, 1.0)
    with pytest.raises(SchedulingError):
        ScheduledExecution("a", 0.0, 1.0, -1.0)
    with pytest.raises(ConfigError):
        SimMeterConfig(base_draw_w=10, base_draw_jitter_w=11)


def test_trace_parse_and_integral():
    tr = PowerTrace.parse("# t,p\n0.0,10\n1.0, 20  # step\n\n3.0,0\n")
    assert tr.energy(0.0, 1.0) == pytest.approx(10.0)
    assert tr.energy(0.5, 2.0) == pytest.approx(5.0 + 20.0)
    assert tr.energy(2.5, 10.0) == pytest.approx(10.0)
    m = SimMeter(SimMeterConfig(base_draw_w=0.0), trace=tr)
    assert m.read_energy_delta(2.0).energy_delta_j == pytest.approx(30.0)


def test_trace_rejects_bad_input():
    with pytest.raises(ConfigError):
        PowerTrace.parse("1.0,5\n0.5,5\n")
    with pytest.raises(ConfigError):
        PowerTrace.parse("1.0,-5\n")
    with pytest.raises(ConfigError):
        PowerTrace.parse("1.0\n")


def test_jitter_reproducible_and_bounded():
    cfg = SimMeterConfig(base_draw_w=45.0, base_draw_jitter_w=5.0, seed=42)
    times = [0.1 * k for k in range(1, 200)]
    a = [SimMeter(cfg).read_energy_delta(t) for t in times[:1]]
    m1, m2 = SimMeter(cfg), SimMeter(cfg)
    s1 = [m1.read_energy_delta(t).energy_delta_j for t in times]
    s2 = [m2.read_energy_delta(t).energy_delta_j for t in times]
    assert s1 == s2 and a
    assert all(4.0 - 1e-9 <= e <= 5.0 + 1e-9 for e in s1)
    other = SimMeter(SimMeterConfig(base_draw_w=45.0, base_draw_jitter_w=5.0, seed=43))
    assert [other.read_energy_delta(t).energy_delta_j for t in times] != s1


def test_jitter_independent_of_read_partition():
    cfg = SimMeterConfig(base_draw_w=45.0, base_draw_jitter_w=5.0, seed=1)
    coarse = SimMeter(cfg).read_energy_delta(3.0).energy_delta_j
    fine = SimMeter(cfg)
    total = math.fsum(fine.read_energy_delta(0.07 * k).energy_delta_j for k in range(1, 43))
    total += fine.read_energy_delta(3.0).energy_delta_j
    assert total == pytest.approx(coarse, rel=1e-9)


def test_tracker_overhead_folded_into_base():
    m = SimMeter(SimMeterConfig(base_draw_w=45.0, tracker_overhead_w=0.316))
    assert m.read_energy_delta(1.0).energy_delta_j == pytest.approx(45.316)


execs_st = st.lists(
    st.tuples(st.floats(0.0, 0.5), st.floats(0.01, 0.5), st.floats(0.0, 200.0)), max_size=15
)


@settings(max_examples=200)
@given(execs_st, st.lists(st.floats(0.001, 0.7), min_size=1, max_size=40), st.floats(0.0, 60.0))
def test_conservation_over_any_partition(execs, steps, base):
    m = SimMeter(SimMeterConfig(base_draw_w=base))
    t = 0.0
    analytic = 0.0
    for gap, dur, energy in execs:
        start = t + gap
        m.schedule_execution(ScheduledExecution("x", start, dur, energy))
        analytic += energy
        t = start + dur
    horizon = max(t, 0.01) + 0.1
    times, acc = [], 0.0
    for s in steps:
        acc += s
        if acc < horizon:
            times.append(acc)
    times.append(horizon)
    deltas = [m.read_energy_delta(x).energy_delta_j for x in times]
    assert all(d >= 0 for d in deltas)
    analytic += base * horizon
    assert math.fsum(deltas) == pytest.approx(analytic, rel=1e-9, abs=1e-9)


class CounterMeter(RealMeter):
    def __init__(self, values):
        super().__init__()
        self.values = iter(values)

    def read_counter_j(self):
        return next(self.values)


def test_real_meter_seam():
    m = CounterMeter([100.0, 104.5, 113.5, 110.0])
    with pytest.raises(MonotonicityError):
        m.read_energy_delta(0.1)
    m = CounterMeter([100.0, 104.5, 113.5, 110.0])
    m.prime(0.0)
    assert m.read_energy_delta(0.1).energy_delta_j == pytest.approx(4.5)
    s = m.read_energy_delta(0.3)
    assert (s.energy_delta_j, s.interval_s) == (pytest.approx(9.0), pytest.approx(0.2))
    with pytest.raises(MonotonicityError):
        m.read_energy_delta(0.4)
