"""Jit-compiled inner loop.

Implements exactly the same chain as the reference path in engine.py: the
same xoshiro256++ stream, the same closed-form temperature, the same
acceptance comparisons, in the same order. Tests pin the two paths to
bit-identical trajectories, so any edit here must be mirrored there.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

U11 = np.uint64(11)
U17 = np.uint64(17)
U19 = np.uint64(19)
U23 = np.uint64(23)
U41 = np.uint64(41)
U45 = np.uint64(45)
INV53 = 1.1102230246251565e-16  # 2**-53


@njit(cache=True, nogil=True)
def _next_u64(s):
    x0 = s[0]
    tmp = x0 + s[3]
    res = ((tmp << U23) | (tmp >> U41)) + x0
    t = s[1] << U17
    s[2] ^= x0
    s[3] ^= s[1]
    s[1] ^= s[2]
    s[0] ^= s[3]
    s[2] ^= t
    s[3] = (s[3] << U45) | (s[3] >> U19)
    return res


@njit(cache=True, nogil=True)
def stream_u64(seed_state, out):
    """Fill `out` from the stream; used by cross-implementation tests."""
    for i in range(out.shape[0]):
        out[i] = _next_u64(seed_state)


@njit(cache=True, nogil=True)
def run_kernel(
    eu,
    ev,
    ew,
    n,
    bits,
    s,
    t0,
    ell,
    start_step,
    max_steps,
    freeze_a,
    record_events,
    counters,
    parent,
    ev_step,
    ev_edge,
    ev_dir,
    ev_delta,
    ev_temp,
    hv_step,
    hv_edge,
    hv_weight,
    hv_temp,
    fills,
):
    """Run steps [start_step, max_steps); returns the step reached.

    A return below max_steps means a telemetry buffer filled; the caller
    grows it and resumes with the same state arrays. Buffer space for one
    event of each kind is guaranteed by the checks at the loop top, so a
    step never half-happens.
    """
    m = eu.shape[0]
    beta = 1.0 - 1.0 / ell
    ev_n = fills[0]
    hv_n = fills[1]
    ev_cap = ev_step.shape[0]
    hv_cap = hv_step.shape[0]
    for t in range(start_step, max_steps):
        if record_events and ev_n >= ev_cap:
            fills[0] = ev_n
            fills[1] = hv_n
            return t
        if freeze_a > 0.0 and hv_n >= hv_cap:
            fills[0] = ev_n
            fills[1] = hv_n
            return t
        r = _next_u64(s)
        f = np.float64(r >> U11) * INV53
        i = np.int64(f * m)
        if bits[i] == 1:
            # removal: always improving (weights > 0); rejected only
            # when the remaining selection disconnects
            for v in range(n):
                parent[v] = v
            comps = n
            for j in range(m):
                if j != i and bits[j] == 1:
                    ra = eu[j]
                    while parent[ra] != ra:
                        parent[ra] = parent[parent[ra]]
                        ra = parent[ra]
                    rb = ev[j]
                    while parent[rb] != rb:
                        parent[rb] = parent[parent[rb]]
                        rb = parent[rb]
                    if ra != rb:
                        parent[ra] = rb
                        comps -= 1
                        if comps == 1:
                            break
            if comps == 1:
                bits[i] = 0
                counters[0] += 1
                if record_events:
                    ev_step[ev_n] = t
                    ev_edge[ev_n] = i
                    ev_dir[ev_n] = 0
                    ev_delta[ev_n] = -ew[i]
                    ev_temp[ev_n] = t0 * beta ** np.float64(t)
                    ev_n += 1
            else:
                counters[4] += 1
        else:
            temp = t0 * beta ** np.float64(t)
            w = ew[i]
            r2 = _next_u64(s)
            u = np.float64(r2 >> U11) * INV53
            # temp underflows to 0 on long schedules; division would trip
            # the zero check, and the acceptance probability is 0 anyway
            p_accept = math.exp(-w / temp) if temp > 0.0 else 0.0
            if u < p_accept:
                bits[i] = 1
                counters[2] += 1
                if freeze_a > 0.0 and w >= freeze_a * temp:
                    hv_step[hv_n] = t
                    hv_edge[hv_n] = i
                    hv_weight[hv_n] = w
                    hv_temp[hv_n] = temp
                    hv_n += 1
                if record_events:
                    ev_step[ev_n] = t
                    ev_edge[ev_n] = i
                    ev_dir[ev_n] = 1
                    ev_delta[ev_n] = w
                    ev_temp[ev_n] = temp
                    ev_n += 1
            else:
                counters[3] += 1
    fills[0] = ev_n
    fills[1] = hv_n
    return max_steps
