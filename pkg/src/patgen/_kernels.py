"""Numeric inner loops with a numba path and a pure-numpy fallback.

The numba path is used unless ``PATGEN_DISABLE_NUMBA`` is set to a truthy
value or numba cannot be imported. Both paths return identical results; the
test-suite runs each kernel through both and compares.
"""
import os

import numpy as np

_FLAG = os.environ.get("PATGEN_DISABLE_NUMBA", "").strip().lower()

try:
    from numba import njit
except ImportError:  # pragma: no cover - numba is a declared dependency
    njit = None

USE_NUMBA = njit is not None and _FLAG not in ("1", "true", "yes", "on")


# ---------------------------------------------------------------------------
# tandem repeat candidates
# ---------------------------------------------------------------------------

def _runs_numpy(codes):
    n = codes.shape[0]
    half = n // 2
    runs = np.zeros((half + 1, n), dtype=np.int64)
    idx = np.arange(n, dtype=np.int64)
    for p in range(1, half + 1):
        m = n - p
        eq = codes[:m] == codes[p:]
        # distance to the next mismatch at or after i, i.e. the run of equal
        # pairs (j, j+p) starting at i
        stop = np.where(eq, m, idx[:m])
        nxt = np.minimum.accumulate(stop[::-1])[::-1]
        runs[p, :m] = nxt - idx[:m]
    return runs


def _candidates_numpy(codes):
    n = codes.shape[0]
    if n < 2:
        return np.zeros((0, 3), dtype=np.int64)
    runs = _runs_numpy(codes)
    out = []
    for p in range(1, n // 2 + 1):
        row = runs[p]
        starts = np.nonzero(row[: n - 2 * p + 1] >= p)[0]
        if starts.size == 0:
            continue
        left = np.ones(starts.size, dtype=bool)
        inner = starts > 0
        left[inner] = row[starts[inner] - 1] == 0
        starts = starts[left]
        if starts.size == 0:
            continue
        prim = np.ones(starts.size, dtype=bool)
        for d in range(1, p):
            if p % d == 0:
                prim &= runs[d, starts] < p - d
        starts = starts[prim]
        k = row[starts] // p + 1
        block = np.empty((starts.size, 3), dtype=np.int64)
        block[:, 0] = starts
        block[:, 1] = p
        block[:, 2] = k
        out.append(block)
    if not out:
        return np.zeros((0, 3), dtype=np.int64)
    return np.concatenate(out)


def _candidates_loop(codes):
    n = codes.shape[0]
    if n < 2:
        return np.zeros((0, 3), dtype=np.int64)
    half = n // 2
    runs = np.zeros((half + 1, n), dtype=np.int64)
    for p in range(1, half + 1):
        m = n - p
        acc = 0
        for i in range(m - 1, -1, -1):
            if codes[i] == codes[i + p]:
                acc += 1
            else:
                acc = 0
            runs[p, i] = acc
    count = 0
    buf = np.empty((n * half + 1, 3), dtype=np.int64)
    for p in range(1, half + 1):
        for s in range(0, n - 2 * p + 1):
            r = runs[p, s]
            if r < p:
                continue
            if s > 0 and runs[p, s - 1] > 0:
                continue
            primitive = True
            for d in range(1, p):
                if p % d == 0 and runs[d, s] >= p - d:
                    primitive = False
                    break
            if not primitive:
                continue
            buf[count, 0] = s
            buf[count, 1] = p
            buf[count, 2] = r // p + 1
            count += 1
    return buf[:count].copy()


# ---------------------------------------------------------------------------
# transitive closure / reduction of a DAG given as a boolean matrix
# ---------------------------------------------------------------------------

def _closure_numpy(adj):
    reach = adj.copy()
    for k in range(reach.shape[0]):
        reach |= np.outer(reach[:, k], reach[k, :])
    return reach


def _closure_loop(adj):
    n = adj.shape[0]
    reach = adj.copy()
    for k in range(n):
        for i in range(n):
            if reach[i, k]:
                for j in range(n):
                    if reach[k, j]:
                        reach[i, j] = True
    return reach


def _reduction_numpy(strict):
    s = strict.astype(np.int64)
    return strict & ~((s @ s) > 0)


def _reduction_loop(strict):
    n = strict.shape[0]
    red = strict.copy()
    for i in range(n):
        for j in range(n):
            if not strict[i, j]:
                continue
            for k in range(n):
                if strict[i, k] and strict[k, j]:
                    red[i, j] = False
                    break
    return red


# ---------------------------------------------------------------------------
# longest common subsequence (indel-only edit distance)
# ---------------------------------------------------------------------------

def _lcs_numpy(a, b):
    m = b.shape[0]
    prev = np.zeros(m + 1, dtype=np.int64)
    for x in a:
        cand = prev.copy()
        cand[1:] = np.maximum(prev[1:], prev[:-1] + (b == x))
        prev = np.maximum.accumulate(cand)
    return int(prev[m])


def _lcs_loop(a, b):
    n = a.shape[0]
    m = b.shape[0]
    prev = np.zeros(m + 1, dtype=np.int64)
    cur = np.zeros(m + 1, dtype=np.int64)
    for i in range(n):
        cur[0] = 0
        for j in range(1, m + 1):
            if a[i] == b[j - 1]:
                cur[j] = prev[j - 1] + 1
            elif prev[j] >= cur[j - 1]:
                cur[j] = prev[j]
            else:
                cur[j] = cur[j - 1]
        prev, cur = cur, prev
    return prev[m]


# ---------------------------------------------------------------------------
# one column of the indel edit-distance table: trace prefixes vs. a run that
# grows by one label
# ---------------------------------------------------------------------------

def _indel_step_numpy(row, codes, x):
    n = codes.shape[0]
    cand = row + 1
    diag = np.where(codes == x, row[:-1], row.max() + 2)
    cand[1:] = np.minimum(cand[1:], diag)
    # new[j] = min(cand[j], new[j-1] + 1) as a running minimum
    j = np.arange(n + 1, dtype=np.int64)
    return np.minimum.accumulate(cand - j) + j


def _indel_step_loop(row, codes, x):
    n = codes.shape[0]
    new = np.empty(n + 1, dtype=np.int64)
    new[0] = row[0] + 1
    for j in range(1, n + 1):
        best = row[j] + 1
        if new[j - 1] + 1 < best:
            best = new[j - 1] + 1
        if codes[j - 1] == x and row[j - 1] < best:
            best = row[j - 1]
        new[j] = best
    return new


if USE_NUMBA:
    _indel_jit = njit(cache=True)(_indel_step_loop)
    _candidates_jit = njit(cache=True)(_candidates_loop)
    _closure_jit = njit(cache=True)(_closure_loop)
    _reduction_jit = njit(cache=True)(_reduction_loop)
    _lcs_jit = njit(cache=True)(_lcs_loop)
else:
    _candidates_jit = _closure_jit = _reduction_jit = _lcs_jit = _indel_jit = None


def tandem_candidates(codes, jit=None):
    """Leftmost, primitive, right-maximal tandem repeats of an integer sequence.

    Returns an ``(m, 3)`` int64 array of ``(start0, period, repetitions)``
    rows with 0-based starts, ordered by period then start.
    """
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    if _use(jit):
        return _candidates_jit(codes)
    return _candidates_numpy(codes)


def transitive_closure(adj, jit=None):
    adj = np.ascontiguousarray(adj, dtype=np.bool_)
    if _use(jit):
        return _closure_jit(adj)
    return _closure_numpy(adj)


def transitive_reduction(strict, jit=None):
    """Hasse diagram of a strict (irreflexive, transitive) order matrix."""
    strict = np.ascontiguousarray(strict, dtype=np.bool_)
    if _use(jit):
        return _reduction_jit(strict)
    return _reduction_numpy(strict)


def lcs_length(a, b, jit=None):
    a = np.ascontiguousarray(a, dtype=np.int64)
    b = np.ascontiguousarray(b, dtype=np.int64)
    if _use(jit):
        return int(_lcs_jit(a, b))
    return _lcs_numpy(a, b)


def indel_step(row, codes, x, jit=None):
    """Extend the indel distance row of every trace prefix by run label ``x``.

    ``row[j]`` is the distance between ``codes[:j]`` and the run so far.
    """
    row = np.ascontiguousarray(row, dtype=np.int64)
    codes = np.ascontiguousarray(codes, dtype=np.int64)
    if _use(jit):
        return _indel_jit(row, codes, np.int64(x))
    return _indel_step_numpy(row, codes, x)


def _use(jit):
    if jit is None:
        return USE_NUMBA
    if jit and not USE_NUMBA:
        raise RuntimeError("numba path requested but disabled")
    return bool(jit)
