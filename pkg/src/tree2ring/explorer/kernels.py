"""Breadth-first reachability over bit-vector states.

Two interchangeable kernels with identical results (up to state order):

* ``bfs_numba`` -- a compiled queue + open-addressing hash set.
* ``bfs_numpy`` -- level-synchronous, every transition applied to the whole
  frontier at once, duplicates removed by sorting.

Set ``TREE2RING_PURE_NUMPY=1`` to force the numpy path even when numba is
importable. Both return a :class:`KernelResult`.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

OK, BOUND_EXCEEDED, NOT_SAFE = 0, 1, 2

PURE_NUMPY = os.environ.get("TREE2RING_PURE_NUMPY", "").strip().lower() in ("1", "true", "yes", "on")

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAVE_NUMBA = numba is not None
USE_NUMBA = HAVE_NUMBA and not PURE_NUMPY


@dataclass
class KernelResult:
    states: np.ndarray  # (n, words) uint64
    terminal: np.ndarray  # (n,) bool, False for states never expanded
    arcs: int
    max_frontier: int
    status: int


if HAVE_NUMBA:
    _njit = numba.njit(cache=True, nogil=True)

    @_njit
    def _hash_row(row, W):
        h = np.uint64(0x9E3779B97F4A7C15)
        for w in range(W):
            x = row[w] ^ h
            x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
            x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
            h = x ^ (x >> np.uint64(31))
        return h

    @_njit
    def _probe(table, row, W, mask):
        """Slot holding ``row``, or the empty slot where it belongs."""
        h = _hash_row(row, W) & mask
        while table[h, W] != 0:
            same = True
            for w in range(W):
                if table[h, w] != row[w]:
                    same = False
                    break
            if same:
                return h
            h = (h + np.uint64(1)) & mask
        return h

    @_njit
    def _bfs_numba(init, pre, post, bound):
        # table rows are [state words..., index + 1]; 0 in the last column marks a free slot,
        # so a lookup touches a single cache line for small W
        W = init.shape[0]
        T = pre.shape[0]
        cap = 1024
        states = np.empty((cap, W), np.uint64)
        terminal = np.zeros(cap, np.bool_)
        depth = np.zeros(cap, np.int32)
        tsize = 4096
        mask = np.uint64(tsize - 1)
        table = np.zeros((tsize, W + 1), np.uint64)
        cand = np.empty(W, np.uint64)
        states[0, :] = init
        h = _probe(table, init, W, mask)
        table[h, :W] = init
        table[h, W] = 1
        n = 1
        head = 0
        arcs = 0
        status = 0
        width = np.zeros(64, np.int64)
        width[0] = 1
        while head < n and status == 0:
            enabled_any = False
            for t in range(T):
                ok = True
                for w in range(W):
                    if states[head, w] & pre[t, w] != pre[t, w]:
                        ok = False
                        break
                if not ok:
                    continue
                enabled_any = True
                arcs += 1
                for w in range(W):
                    rest = states[head, w] & ~pre[t, w]
                    if rest & post[t, w] != 0:
                        status = 2
                    cand[w] = rest | post[t, w]
                if status != 0:
                    break
                h = _probe(table, cand, W, mask)
                if table[h, W] != 0:
                    continue
                if bound >= 0 and n >= bound:
                    status = 1
                    break
                if n == cap:
                    cap *= 2
                    grown = np.empty((cap, W), np.uint64)
                    grown[:n] = states[:n]
                    states = grown
                    gt = np.zeros(cap, np.bool_)
                    gt[:n] = terminal[:n]
                    terminal = gt
                    gd = np.zeros(cap, np.int32)
                    gd[:n] = depth[:n]
                    depth = gd
                states[n, :] = cand
                table[h, :W] = cand
                table[h, W] = n + 1
                d = depth[head] + 1
                depth[n] = d
                if d >= width.shape[0]:
                    gw = np.zeros(2 * width.shape[0], np.int64)
                    gw[: width.shape[0]] = width
                    width = gw
                width[d] += 1
                n += 1
                if 2 * n > tsize:
                    tsize *= 2
                    mask = np.uint64(tsize - 1)
                    table = np.zeros((tsize, W + 1), np.uint64)
                    for i in range(n):
                        h = _probe(table, states[i], W, mask)
                        table[h, :W] = states[i]
                        table[h, W] = i + 1
            if status == 0:
                terminal[head] = not enabled_any
            head += 1
        return states[:n].copy(), terminal[:n].copy(), arcs, width.max(), status


def bfs_numba(init: np.ndarray, pre: np.ndarray, post: np.ndarray, bound: int | None = None) -> KernelResult:
    if not HAVE_NUMBA:
        raise RuntimeError("numba is not available")
    states, terminal, arcs, width, status = _bfs_numba(
        np.ascontiguousarray(init, dtype=np.uint64),
        np.ascontiguousarray(pre, dtype=np.uint64),
        np.ascontiguousarray(post, dtype=np.uint64),
        -1 if bound is None else int(bound),
    )
    return KernelResult(states, terminal, int(arcs), int(width), int(status))


def _keys(rows: np.ndarray) -> np.ndarray:
    rows = np.ascontiguousarray(rows)
    if rows.shape[1] == 1:
        return rows[:, 0]
    return rows.view(np.dtype((np.void, 8 * rows.shape[1]))).ravel()


def _rows(keys: np.ndarray, W: int) -> np.ndarray:
    if W == 1:
        return keys.reshape(-1, 1)
    return np.frombuffer(keys.tobytes(), dtype=np.uint64).reshape(-1, W)


def bfs_numpy(init: np.ndarray, pre: np.ndarray, post: np.ndarray, bound: int | None = None) -> KernelResult:
    W = init.shape[0]
    frontier = np.asarray(init, dtype=np.uint64).reshape(1, W)
    visited = np.sort(_keys(frontier))
    levels = [frontier]
    terminal_parts = []
    arcs = 0
    total = 1
    width = 1
    status = OK
    while len(frontier):
        enabled_any = np.zeros(len(frontier), dtype=bool)
        cands = []
        for t in range(pre.shape[0]):
            en = np.all((frontier & pre[t]) == pre[t], axis=1)
            k = int(en.sum())
            if not k:
                continue
            rest = frontier[en] & ~pre[t]
            if np.any(rest & post[t]):
                status = NOT_SAFE
                break
            cands.append(rest | post[t])
            arcs += k
            enabled_any |= en
        if status != OK:
            terminal_parts.append(np.zeros(len(frontier), dtype=bool))
            break
        terminal_parts.append(~enabled_any)
        if not cands:
            break
        ck = np.unique(_keys(np.concatenate(cands)))
        pos = np.searchsorted(visited, ck)
        seen = np.zeros(len(ck), dtype=bool)
        inside = pos < len(visited)
        seen[inside] = visited[pos[inside]] == ck[inside]
        new = ck[~seen]
        if bound is not None and total + len(new) > bound:
            new = new[: max(0, bound - total)]
            status = BOUND_EXCEEDED
        if not len(new):
            break
        visited = np.sort(np.concatenate([visited, new]))
        frontier = _rows(new, W)
        levels.append(frontier)
        total += len(new)
        width = max(width, len(new))
        if status != OK:
            break
    states = np.concatenate(levels)
    terminal = np.zeros(len(states), dtype=bool)
    done = np.concatenate(terminal_parts) if terminal_parts else terminal[:0]
    terminal[: len(done)] = done
    return KernelResult(states, terminal, arcs, width, status)


def bfs(init, pre, post, bound=None) -> KernelResult:
    """Dispatch to the compiled kernel unless the pure-numpy path is requested."""
    if USE_NUMBA:
        return bfs_numba(init, pre, post, bound)
    return bfs_numpy(init, pre, post, bound)
