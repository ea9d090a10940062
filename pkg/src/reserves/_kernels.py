"""Augmenting-path b-matching kernels over flat CSR arrays.

This is the one hot loop in the package: every rule queries maximum matching
sizes of (reduced) reservation graphs, and the rejection scan does so once
per agent. The kernels are written as plain Python over numpy arrays and are
compiled with numba by default; set ``RESERVES_NO_NUMBA=1`` to run the pure
fallback (same functions, uncompiled). ``benchmarks/bench_matching.py``
compares the two paths.

Conventions: left vertices are agent ids ``0..n-1`` (rows of the CSR), right
vertices are dense category columns. ``epos[k]`` is the priority position of
the edge's agent in the edge's category; an edge is live iff
``epos[k] <= thr[c]``. ``THR_INF`` means "no pruning". Matched agents for a
category ``c`` occupy ``slots[slot_base[c] : slot_base[c] + used[c]]``.
"""

from __future__ import annotations

import os

import numpy as np

THR_INF = np.int64(2**31)


def rebuild_slots(match, used, slot_base, slots):
    """Recompute per-category occupancy from the match array."""
    used[:] = 0
    for u in range(match.shape[0]):
        c = match[u]
        if c >= 0:
            slots[slot_base[c] + used[c]] = u
            used[c] += 1


def greedy(order, alive, match, indptr, cats, epos, thr, cap, used, slot_base, slots):
    """Seed pass: first live category with spare capacity, in scan order."""
    got = 0
    for oi in range(order.shape[0]):
        u = order[oi]
        if not alive[u] or match[u] >= 0:
            continue
        for k in range(indptr[u], indptr[u + 1]):
            c = cats[k]
            if epos[k] <= thr[c] and used[c] < cap[c]:
                slots[slot_base[c] + used[c]] = u
                used[c] += 1
                match[u] = c
                got += 1
                break
    return got


def augment(u, indptr, cats, epos, thr, cap, used, slot_base, slots, match, visited):
    """Try to match ``u``, rerouting already-matched agents along an
    alternating path. Each category is entered at most once per search."""
    for k in range(indptr[u], indptr[u + 1]):
        c = cats[k]
        if epos[k] > thr[c] or visited[c]:
            continue
        visited[c] = True
        if used[c] < cap[c]:
            slots[slot_base[c] + used[c]] = u
            used[c] += 1
            match[u] = c
            return True
        for s in range(slot_base[c], slot_base[c] + used[c]):
            a = slots[s]
            if augment(a, indptr, cats, epos, thr, cap, used, slot_base, slots, match, visited):
                slots[s] = u
                match[u] = c
                return True
    return False


def augment_all(order, alive, match, indptr, cats, epos, thr, cap, used, slot_base, slots, visited):
    """One augmentation attempt per unmatched agent, in scan order. Starting
    from any valid partial matching this reaches maximum cardinality."""
    got = 0
    for oi in range(order.shape[0]):
        u = order[oi]
        if not alive[u] or match[u] >= 0:
            continue
        visited[:] = False
        if augment(u, indptr, cats, epos, thr, cap, used, slot_base, slots, match, visited):
            got += 1
    return got


def purge(match, alive, indptr, cats, epos, thr):
    """Unmatch agents whose pair died (agent removed or edge pruned)."""
    dropped = 0
    for u in range(match.shape[0]):
        c = match[u]
        if c < 0:
            continue
        if not alive[u]:
            match[u] = -1
            dropped += 1
            continue
        for k in range(indptr[u], indptr[u + 1]):
            if cats[k] == c:
                if epos[k] > thr[c]:
                    match[u] = -1
                    dropped += 1
                break
    return dropped


USING_NUMBA = False
if not os.environ.get("RESERVES_NO_NUMBA"):
    try:
        from numba import njit
    except ImportError:
        pass
    else:
        rebuild_slots = njit(cache=True)(rebuild_slots)
        greedy = njit(cache=True)(greedy)
        augment = njit(cache=True)(augment)
        augment_all = njit(cache=True)(augment_all)
        purge = njit(cache=True)(purge)
        USING_NUMBA = True


def warm_up() -> None:
    """Force compilation on a two-edge graph (no-op on the pure path)."""
    indptr = np.array([0, 2], dtype=np.int64)
    cats = np.array([0, 1], dtype=np.int64)
    epos = np.zeros(2, dtype=np.int64)
    thr = np.full(2, THR_INF, dtype=np.int64)
    cap = np.ones(2, dtype=np.int64)
    used = np.zeros(2, dtype=np.int64)
    slot_base = np.array([0, 1], dtype=np.int64)
    slots = np.full(2, -1, dtype=np.int64)
    match = np.full(1, -1, dtype=np.int64)
    visited = np.zeros(2, dtype=np.bool_)
    alive = np.ones(1, dtype=np.bool_)
    order = np.zeros(1, dtype=np.int64)
    rebuild_slots(match, used, slot_base, slots)
    greedy(order, alive, match, indptr, cats, epos, thr, cap, used, slot_base, slots)
    match[0] = -1
    rebuild_slots(match, used, slot_base, slots)
    augment_all(order, alive, match, indptr, cats, epos, thr, cap, used, slot_base, slots, visited)
    purge(match, alive, indptr, cats, epos, thr)
