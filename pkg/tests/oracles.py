"""Brute-force reference implementations used only by the tests.

Deliberately written without reusing package code paths: closed-form EMA
sums instead of the recurrence, pairwise dominance instead of the sorted
sweep, explicit lexicographic argmax instead of a composite sort key.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass
class OracleStep:
    slot: int
    k: int
    energy_used: float
    power_ema: float
    time_remaining: float
    usable: float


def tracker_oracle(deltas, slot_s, target_j, dt, alpha, persist=False):
    """Re-evaluate the slot algorithm from scratch after every sample.

    EMA after n samples of a slot (starting from 0) is
    sum_i alpha * (1 - alpha)**(n - i) * P_i; with ``persist`` the carried
    value from previous slots is folded in as a decayed initial term.
    """
    n_per_slot = round(slot_s / dt)
    steps = []
    for idx in range(len(deltas)):
        slot = idx // n_per_slot
        start = slot * n_per_slot
        k = idx - start + 1
        in_slot = deltas[start: idx + 1]
        powers = [e / dt for e in in_slot]
        if persist:
            all_powers = [e / dt for e in deltas[: idx + 1]]
            n = len(all_powers)
            ema = sum(alpha * (1 - alpha) ** (n - i) * p for i, p in enumerate(all_powers, start=1))
        else:
            n = len(powers)
            ema = sum(alpha * (1 - alpha) ** (n - i) * p for i, p in enumerate(powers, start=1))
        used = sum(in_slot)
        t_rem = 0.0 if k == n_per_slot else slot_s - k * dt
        usable = max(0.0, target_j - (used + ema * t_rem))
        steps.append(OracleStep(slot, k, used, ema, t_rem, usable))
    return steps


def strictly_dominates(a, b) -> bool:
    return a[1] < b[1] and a[2] > b[2]


def frontier_oracle(models):
    """models: iterable of (id, energy, accuracy). Returns the non-dominated ids as a set."""
    models = list(models)
    return {m[0] for m in models if not any(strictly_dominates(o, m) for o in models)}


def select_oracle(models, task, budget):
    """models: (id, task, energy, accuracy). Returns chosen id or None."""
    cand = [(i, e, a) for i, t, e, a in models if t == task]
    fits = [m for m in cand if m[1] <= budget]
    if not fits:
        return None
    front = [m for m in fits if not any(strictly_dominates(o, m) for o in fits)]
    best_acc = max(m[2] for m in front)
    top = [m for m in front if m[2] == best_acc]
    low_e = min(m[1] for m in top)
    top = [m for m in top if m[1] == low_e]
    return sorted(m[0] for m in top)[0]
