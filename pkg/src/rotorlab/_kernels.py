"""Numba hot loops for the aggregation and walk simulations.

Every kernel is single-threaded and deterministic.  Seeded kernels implement
SplitMix64 bit-for-bit identically to ``lattice.SeededRandom`` (pinned by a
test).  Grids are flat int32/int64 arrays sized by the caller; kernels report
a status code instead of raising:

    0  ok
    1  step/topple cap exceeded
    2  activity reached the grid border (caller must grow and rerun)

Per-site rotor departure counters are int32: the depar­ture count of a site is
O(n log n / n)-bounded far below 2**31 for every supported n (wrappers enforce
the supported range); aggregate hop counters are int64.
"""

from __future__ import annotations

import numpy as np
from numba import njit
from numpy import uint64

_U1 = uint64(1)
_U3 = uint64(3)
_GAMMA = uint64(0x9E3779B97F4A7C15)
_MIX1 = uint64(0xBF58476D1CE4E5B9)
_MIX2 = uint64(0x94D049BB133111EB)
_S30 = uint64(30)
_S27 = uint64(27)
_S31 = uint64(31)


@njit(inline="always")
def _sm64_next(state):
    state = state + _GAMMA
    z = state
    z = (z ^ (z >> _S30)) * _MIX1
    z = (z ^ (z >> _S27)) * _MIX2
    z = z ^ (z >> _S31)
    return state, z


@njit(inline="always")
def _sm64_below(state, n):
    # Uniform in [0, n) by low-bit mask rejection; n == 1 consumes nothing.
    if n <= 1:
        return state, uint64(0)
    m = uint64(n - 1)
    m |= m >> uint64(1)
    m |= m >> uint64(2)
    m |= m >> uint64(4)
    m |= m >> uint64(8)
    m |= m >> uint64(16)
    m |= m >> uint64(32)
    while True:
        state, z = _sm64_next(state)
        r = z & m
        if r < uint64(n):
            return state, r


@njit(cache=True)
def sm64_stream(seed, count):
    """Raw output stream, for pinning equality with the Python generator."""
    out = np.empty(count, np.uint64)
    state = uint64(seed)
    for i in range(count):
        state, z = _sm64_next(state)
        out[i] = z
    return out


@njit(cache=True)
def sm64_below_stream(seed, n, count):
    out = np.empty(count, np.int64)
    state = uint64(seed)
    for i in range(count):
        state, r = _sm64_below(state, n)
        out[i] = np.int64(r)
    return out


@njit(cache=True)
def rotor_aggregate(n, half, cap_per_bug):
    """Sequential rotor-router aggregation of n bugs from the center.

    cnt[site] = -1 while vacant, else the total departure count; a settled
    site starts at 0 with its rotor East.  Departure k from any site goes in
    direction k mod 4 of the cycle E,N,W,S (rotate CCW, then move).
    """
    W = 2 * half + 1
    cnt = np.full(W * W, -1, np.int32)
    step = np.empty(4, np.int64)
    step[0] = 1
    step[1] = W
    step[2] = -1
    step[3] = -W
    src = half * W + half
    total_hops = np.int64(0)
    max_bug_hops = np.int64(0)
    for _ in range(n):
        idx = src
        hops = np.int64(0)
        while True:
            c = cnt[idx]
            if c < 0:
                cnt[idx] = 0
                break
            c += 1
            cnt[idx] = c
            idx += step[c & 3]
            hops += 1
            if hops >= cap_per_bug:
                return cnt, total_hops, max_bug_hops, 1
        total_hops += hops
        if hops > max_bug_hops:
            max_bug_hops = hops
        r = idx // W
        col = idx - r * W
        if r == 0 or r == W - 1 or col == 0 or col == W - 1:
            return cnt, total_hops, max_bug_hops, 2
    return cnt, total_hops, max_bug_hops, 0


@njit(cache=True)
def rotor_swarm(n, half, seed, cap_total):
    """Swarm variant: n bugs dropped at the center, mover picked uniformly."""
    W = 2 * half + 1
    cnt = np.full(W * W, -1, np.int32)
    step = np.empty(4, np.int64)
    step[0] = 1
    step[1] = W
    step[2] = -1
    step[3] = -W
    src = half * W + half
    hops = np.int64(0)
    if n == 0:
        return cnt, hops, 0
    pos = np.full(n, src, np.int64)
    cnt[src] = 0  # first bug settles on the vacant source
    m = n - 1
    state = uint64(seed)
    while m > 0:
        state, j = _sm64_below(state, m)
        idx = pos[j]
        c = cnt[idx] + 1
        cnt[idx] = c
        nidx = idx + step[c & 3]
        hops += 1
        if hops >= cap_total:
            return cnt, hops, 1
        if cnt[nidx] < 0:
            cnt[nidx] = 0
            m -= 1
            pos[j] = pos[m]
            r = nidx // W
            col = nidx - r * W
            if r == 0 or r == W - 1 or col == 0 or col == W - 1:
                return cnt, hops, 2
        else:
            pos[j] = nidx
    return cnt, hops, 0


@njit(cache=True)
def idla_run(n, half, seed, cap_per_bug):
    """IDLA: each bug walks to a uniform neighbor until it finds a vacancy.

    Directions take two low bits per step of the SplitMix64 stream, in the
    fixed E,N,W,S encoding.  Per-site departures are recorded per direction.
    """
    W = 2 * half + 1
    occ = np.zeros(W * W, np.uint8)
    planes = np.zeros((4, W * W), np.int32)
    step = np.empty(4, np.int64)
    step[0] = 1
    step[1] = W
    step[2] = -1
    step[3] = -W
    src = half * W + half
    state = uint64(seed)
    total_hops = np.int64(0)
    for _ in range(n):
        idx = src
        hops = np.int64(0)
        while occ[idx] == 1:
            state, z = _sm64_next(state)
            d = np.int64(z & _U3)
            planes[d, idx] += 1
            idx += step[d]
            hops += 1
            if hops >= cap_per_bug:
                return occ, planes, total_hops, 1
        occ[idx] = 1
        total_hops += hops
        r = idx // W
        col = idx - r * W
        if r == 0 or r == W - 1 or col == 0 or col == W - 1:
            return occ, planes, total_hops, 2
    return occ, planes, total_hops, 0


@njit(cache=True)
def sandpile_queue(n, half, keep, cap_topples):
    """Stabilize n grains at the center; BFS-like queue, multi-topples.

    keep=1 is the greedy variant (topple at 5+, site keeps a grain);
    keep=0 the standard one (topple at 4+, may empty itself).
    """
    W = 2 * half + 1
    h = np.zeros(W * W, np.int64)
    ever = np.zeros(W * W, np.uint8)
    step = np.empty(4, np.int64)
    step[0] = 1
    step[1] = W
    step[2] = -1
    step[3] = -W
    src = half * W + half
    h[src] = n
    if n > 0:
        ever[src] = 1
    thresh = 4 + keep
    topples = np.int64(0)
    qcap = W * W + 1
    queue = np.empty(qcap, np.int64)
    inq = np.zeros(W * W, np.uint8)
    head = 0
    tail = 0
    if h[src] >= thresh:
        queue[tail] = src
        tail += 1
        inq[src] = 1
    while head != tail:
        idx = queue[head]
        head += 1
        if head == qcap:
            head = 0
        inq[idx] = 0
        g = h[idx]
        if g < thresh:
            continue
        r = idx // W
        col = idx - r * W
        if r == 0 or r == W - 1 or col == 0 or col == W - 1:
            return h, ever, topples, 2
        k = (g - keep) // 4
        h[idx] = g - 4 * k
        topples += k
        if topples >= cap_topples:
            return h, ever, topples, 1
        for d in range(4):
            nidx = idx + step[d]
            h[nidx] += k
            ever[nidx] = 1
            if h[nidx] >= thresh and inq[nidx] == 0:
                queue[tail] = nidx
                tail += 1
                if tail == qcap:
                    tail = 0
                inq[nidx] = 1
    return h, ever, topples, 0


@njit(cache=True)
def sandpile_random(n, half, keep, seed, cap_topples):
    """Stabilize with single topples at uniformly random unstable sites."""
    W = 2 * half + 1
    h = np.zeros(W * W, np.int64)
    ever = np.zeros(W * W, np.uint8)
    step = np.empty(4, np.int64)
    step[0] = 1
    step[1] = W
    step[2] = -1
    step[3] = -W
    src = half * W + half
    h[src] = n
    if n > 0:
        ever[src] = 1
    thresh = 4 + keep
    lst = np.empty(W * W, np.int64)
    posmap = np.full(W * W, -1, np.int64)
    m = 0
    if h[src] >= thresh:
        lst[0] = src
        posmap[src] = 0
        m = 1
    state = uint64(seed)
    topples = np.int64(0)
    while m > 0:
        state, jj = _sm64_below(state, m)
        j = np.int64(jj)
        idx = lst[j]
        r = idx // W
        col = idx - r * W
        if r == 0 or r == W - 1 or col == 0 or col == W - 1:
            return h, ever, topples, 2
        g = h[idx] - 4
        h[idx] = g
        topples += 1
        if topples >= cap_topples:
            return h, ever, topples, 1
        if g < thresh:
            m -= 1
            last = lst[m]
            lst[j] = last
            posmap[last] = j
            posmap[idx] = -1
        for d in range(4):
            nidx = idx + step[d]
            h[nidx] += 1
            ever[nidx] = 1
            if h[nidx] >= thresh and posmap[nidx] < 0:
                lst[m] = nidx
                posmap[nidx] = m
                m += 1
    return h, ever, topples, 0


@njit(cache=True)
def ruin_mc(start, trials, seed, cap_per_trial):
    """Random +1/-2 walks from `start`; counts absorptions at -1.

    Each step takes one low bit of the stream: 1 hops +1, 0 hops -2.
    """
    state = uint64(seed)
    left = np.int64(0)
    for _ in range(trials):
        i = start
        steps = np.int64(0)
        while i >= 1:
            state, z = _sm64_next(state)
            if z & _U1:
                i += 1
            else:
                i -= 2
            steps += 1
            if steps >= cap_per_trial:
                return left, 1
        if i <= -1:
            left += 1
    return left, 0
