"""Pure-Python cascade kernel, used when the compiled extension is unavailable.

Mirrors ``_ckernel.pyx`` operation for operation; both must produce
bit-identical outputs for identical inputs.
"""

from __future__ import annotations

import math

import numpy as np

NEUTRAL, INCREASING, RECOVERING = 0, 1, 2
SINGLE_STAGE, PER_STEP, REVIVAL = 0, 1, 2


def simulate_batch(indptr, indices, draws, rankings, pp, budget, seeding_mode,
                   habituation, alpha, tau, stimulus, baseline, continuous, max_steps):
    """Run one cascade per row of ``draws``.

    ``rankings`` has one row per run, or a single row shared by all runs.
    ``seeding_mode`` is 0 (all seeds at t=0), 1 (one seed every step) or 2
    (one seed at t=0, then one whenever a step activates nobody).
    Returns ``(activation_time, duration, seeds_used, truncated)`` where
    ``activation_time[r, v]`` is the step node ``v`` became active in run
    ``r`` (``-1`` if never).
    """
    n = len(indptr) - 1
    runs = draws.shape[0]
    act_out = np.full((runs, n), -1, dtype=np.int64)
    duration_out = np.zeros(runs, dtype=np.int64)
    seeds_out = np.zeros(runs, dtype=np.int64)
    trunc_out = np.zeros(runs, dtype=np.uint8)

    indptr = indptr.tolist()
    indices = indices.tolist()
    shared_rank = rankings.shape[0] == 1
    floor_h = max(0.0, baseline - stimulus / alpha)
    s_over_a = stimulus / alpha
    budget = min(budget, n)

    for r in range(runs):
        d = draws[r].tolist()
        rank = rankings[0 if shared_rank else r].tolist()
        act = [-1] * n
        factor = [baseline] * n
        phase = [NEUTRAL] * n
        count = [0] * n
        offset = [0.0] * n
        rfloor = [baseline] * n
        contact = [-1] * n
        done = [-1] * n
        tracked: list[int] = []

        t = 0
        ptr = 0
        frontier: list[int] = []
        if seeding_mode != SINGLE_STAGE:
            seeds = 1 if budget > 0 else 0
        else:
            seeds = budget
        for i in range(seeds):
            v = rank[i]
            act[v] = 0
            frontier.append(v)
        ptr = seeds
        budget_left = budget - seeds
        seeds_used = seeds
        active = seeds
        duration = 0
        truncated = 0

        while True:
            if active == n or (not frontier and budget_left == 0):
                break
            t += 1
            if t > max_steps:
                truncated = 1
                break
            nxt: list[int] = []
            contacted: list[int] = []
            for u in frontier:
                for k in range(indptr[u], indptr[u + 1]):
                    v = indices[k]
                    if act[v] != -1:
                        continue
                    if contact[v] != t:
                        contact[v] = t
                        contacted.append(v)
                    thr = pp * factor[v] if habituation else pp
                    if d[k] <= thr:
                        act[v] = t
                        nxt.append(v)
            active += len(nxt)

            if budget_left > 0 and (seeding_mode == PER_STEP or not nxt):
                while ptr < n and act[rank[ptr]] != -1:
                    ptr += 1
                if ptr < n:
                    v = rank[ptr]
                    act[v] = t
                    nxt.append(v)
                    budget_left -= 1
                    seeds_used += 1
                    active += 1

            if nxt:
                duration = t

            if habituation:
                kept: list[int] = []
                for v in contacted:
                    if act[v] != -1:
                        continue
                    done[v] = t
                    if phase[v] == INCREASING:
                        count[v] += 1
                    elif phase[v] == RECOVERING and continuous:
                        f = factor[v]
                        if f >= baseline:
                            offset[v] = 0.0
                        else:
                            arg = 1.0 - alpha * (baseline - f) / stimulus
                            if arg <= 0.0:
                                offset[v] = math.inf
                            else:
                                offset[v] = -(tau / alpha) * math.log(arg)
                        count[v] = 1
                    else:
                        offset[v] = 0.0
                        count[v] = 1
                    phase[v] = INCREASING
                    y = baseline - s_over_a * (1.0 - math.exp(-alpha * (offset[v] + count[v]) / tau))
                    factor[v] = min(max(y, floor_h), baseline)
                    kept.append(v)
                for v in tracked:
                    if act[v] != -1 or done[v] == t:
                        continue
                    if factor[v] >= baseline:
                        factor[v] = baseline
                        phase[v] = NEUTRAL
                        count[v] = 0
                        offset[v] = 0.0
                        rfloor[v] = baseline
                        continue
                    if phase[v] == RECOVERING:
                        count[v] += 1
                    else:
                        rfloor[v] = factor[v]
                        count[v] = 1
                        phase[v] = RECOVERING
                    offset[v] = 0.0
                    y = rfloor[v] - (baseline - rfloor[v]) * math.expm1(-alpha * count[v] / tau)
                    factor[v] = min(y, baseline)
                    kept.append(v)
                tracked = kept

            frontier = nxt

        act_out[r] = act
        duration_out[r] = duration
        seeds_out[r] = seeds_used
        trunc_out[r] = truncated

    return act_out, duration_out, seeds_out, trunc_out
