# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled cascade kernel. Semantics match ``_pykernel.simulate_batch`` exactly."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, expm1, log, INFINITY

cnp.import_array()

ctypedef cnp.int64_t i64

cdef enum:
    NEUTRAL = 0
    INCREASING = 1
    RECOVERING = 2

cdef enum:
    SINGLE_STAGE = 0
    PER_STEP = 1
    REVIVAL = 2


def simulate_batch(const i64[::1] indptr, const i64[::1] indices,
                   const double[:, ::1] draws, const i64[:, ::1] rankings,
                   double pp, Py_ssize_t budget, int seeding_mode, bint habituation,
                   double alpha, double tau, double stimulus, double baseline,
                   bint continuous, Py_ssize_t max_steps):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t runs = draws.shape[0]
    cdef bint shared_rank = rankings.shape[0] == 1

    act_arr = np.full((runs, n), -1, dtype=np.int64)
    duration_arr = np.zeros(runs, dtype=np.int64)
    seeds_arr = np.zeros(runs, dtype=np.int64)
    trunc_arr = np.zeros(runs, dtype=np.uint8)
    cdef i64[:, ::1] act_out = act_arr
    cdef i64[::1] duration_out = duration_arr
    cdef i64[::1] seeds_out = seeds_arr
    cdef cnp.uint8_t[::1] trunc_out = trunc_arr

    work_i = np.empty((7, n + 1), dtype=np.int64)
    work_f = np.empty((3, n + 1), dtype=np.float64)
    phase_arr = np.empty(n + 1, dtype=np.int8)
    cdef i64[::1] act = work_i[0]
    cdef i64[::1] count = work_i[1]
    cdef i64[::1] contact = work_i[2]
    cdef i64[::1] done = work_i[3]
    cdef i64[::1] frontier = work_i[4]
    cdef i64[::1] nxt = work_i[5]
    cdef i64[::1] contacted = work_i[6]
    cdef double[::1] factor = work_f[0]
    cdef double[::1] offset = work_f[1]
    cdef double[::1] rfloor = work_f[2]
    cdef cnp.int8_t[::1] phase = phase_arr
    tracked_arr = np.empty((2, n + 1), dtype=np.int64)
    cdef i64[::1] tracked = tracked_arr[0]
    cdef i64[::1] kept = tracked_arr[1]
    cdef i64[::1] swap

    cdef double floor_h = baseline - stimulus / alpha
    if floor_h < 0.0:
        floor_h = 0.0
    cdef double s_over_a = stimulus / alpha
    if budget > n:
        budget = n

    cdef Py_ssize_t r, i, k, u, v, t, ptr, seeds, budget_left, seeds_used, active
    cdef Py_ssize_t nf, nn, nc, ntr, nk, duration, rrow
    cdef bint truncated
    cdef double thr, f, arg, y

    for r in range(runs):
        rrow = 0 if shared_rank else r
        for i in range(n):
            act[i] = -1
            factor[i] = baseline
            phase[i] = NEUTRAL
            count[i] = 0
            offset[i] = 0.0
            rfloor[i] = baseline
            contact[i] = -1
            done[i] = -1
        ntr = 0

        t = 0
        nf = 0
        if seeding_mode != SINGLE_STAGE:
            seeds = 1 if budget > 0 else 0
        else:
            seeds = budget
        for i in range(seeds):
            v = rankings[rrow, i]
            act[v] = 0
            frontier[nf] = v
            nf += 1
        ptr = seeds
        budget_left = budget - seeds
        seeds_used = seeds
        active = seeds
        duration = 0
        truncated = False

        while True:
            if active == n or (nf == 0 and budget_left == 0):
                break
            t += 1
            if t > max_steps:
                truncated = True
                break
            nn = 0
            nc = 0
            for i in range(nf):
                u = frontier[i]
                for k in range(indptr[u], indptr[u + 1]):
                    v = indices[k]
                    if act[v] != -1:
                        continue
                    if contact[v] != t:
                        contact[v] = t
                        contacted[nc] = v
                        nc += 1
                    if habituation:
                        thr = pp * factor[v]
                    else:
                        thr = pp
                    if draws[r, k] <= thr:
                        act[v] = t
                        nxt[nn] = v
                        nn += 1
            active += nn

            if budget_left > 0 and (seeding_mode == PER_STEP or nn == 0):
                while ptr < n and act[rankings[rrow, ptr]] != -1:
                    ptr += 1
                if ptr < n:
                    v = rankings[rrow, ptr]
                    act[v] = t
                    nxt[nn] = v
                    nn += 1
                    budget_left -= 1
                    seeds_used += 1
                    active += 1

            if nn > 0:
                duration = t

            if habituation:
                nk = 0
                for i in range(nc):
                    v = contacted[i]
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
                                offset[v] = INFINITY
                            else:
                                offset[v] = -(tau / alpha) * log(arg)
                        count[v] = 1
                    else:
                        offset[v] = 0.0
                        count[v] = 1
                    phase[v] = INCREASING
                    y = baseline - s_over_a * (1.0 - exp(-alpha * (offset[v] + <double>count[v]) / tau))
                    if y < floor_h:
                        y = floor_h
                    if y > baseline:
                        y = baseline
                    factor[v] = y
                    kept[nk] = v
                    nk += 1
                for i in range(ntr):
                    v = tracked[i]
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
                    y = rfloor[v] - (baseline - rfloor[v]) * expm1(-alpha * <double>count[v] / tau)
                    if y > baseline:
                        y = baseline
                    factor[v] = y
                    kept[nk] = v
                    nk += 1
                swap = tracked
                tracked = kept
                kept = swap
                ntr = nk

            swap = frontier
            frontier = nxt
            nxt = swap
            nf = nn

        for i in range(n):
            act_out[r, i] = act[i]
        duration_out[r] = duration
        seeds_out[r] = seeds_used
        trunc_out[r] = truncated

    return act_arr, duration_arr, seeds_arr, trunc_arr
