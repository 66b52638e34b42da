"""Optimal alignments of traces against system nets.

The search runs A* over ``(marking, trace position)`` pairs. Silent
transitions are free and never show up in the reported steps; the
transitions actually fired (silent ones included) are kept on the
alignment so it can be replayed.
"""
from __future__ import annotations

import heapq
import time
from typing import NamedTuple

import numpy as np

from . import _kernels
from .petri import SafetyViolation, SystemNet, fire

MT, LH, RH = "MT", "LH", "RH"

# tie-break rank of the move that created a search state
_PRIORITY = {"MT": 0, "TAU": 1, "RH": 2, "LH": 3}


class AlignmentError(RuntimeError):
    pass


class AlignmentTimeout(AlignmentError):
    pass


class Step(NamedTuple):
    op: str
    label: str

    def __str__(self):
        return f"({self.op},{self.label})"


class Alignment(NamedTuple):
    steps: tuple
    cost: int
    firing: tuple = ()  # transition indices fired, silent ones included

    def ops(self) -> str:
        return "".join(s.op[0] for s in self.steps)

    def __str__(self):
        return "<" + ",".join(str(s) for s in self.steps) + f"> g={self.cost}"


def cost(a: Alignment) -> int:
    return sum(1 for s in a.steps if s.op != MT)


def trace_projection(a: Alignment) -> list:
    return [s for s in a.steps if s.op != RH]


def model_projection(a: Alignment) -> list:
    return [s for s in a.steps if s.op != LH]


def align(trace, sn: SystemNet, max_states: int = 2_000_000, deadline: float | None = None) -> Alignment:
    """Minimum-cost alignment of ``trace`` with a complete run of ``sn``.

    Ties are broken by ``(f, -g, move rank, transition index, position)``
    where the move rank orders synchronous moves before silent moves, model
    moves and log moves. The first time a state leaves the queue fixes its
    predecessor, so among equal-cost predecessors the better-ranked move wins.

    Raises
    ------
    AlignmentError
        When the final marking cannot be reached.
    SafetyViolation
        When a fired transition would double-mark a place.
    AlignmentTimeout
        When ``max_states`` expansions or the ``deadline`` (a
        ``time.monotonic`` value) are exceeded.
    """
    trace = tuple(trace)
    n = len(trace)
    net = sn.net
    alphabet = net.alphabet
    # admissible: labels the net cannot produce must be log moves
    h_suffix = [0] * (n + 1)
    for i in range(n - 1, -1, -1):
        h_suffix[i] = h_suffix[i + 1] + (trace[i] not in alphabet)
    n_trans = len(net.transitions)
    pre = net.pre
    labels = [t.label for t in net.transitions]

    start = (sn.initial, 0)
    best_g = {start: 0}
    parent: dict = {}
    closed = set()
    counter = 0
    heap = [(h_suffix[0], 0, -1, -1, 0, counter, start, None, None)]
    expanded = 0
    while heap:
        f, neg_g, prio, tidx, pos, _, state, prev, move = heapq.heappop(heap)
        if state in closed:
            continue
        g = -neg_g
        if g > best_g.get(state, g):
            continue
        closed.add(state)
        parent[state] = (prev, move)
        m, i = state
        if m == sn.final and i == n:
            return _unwind(state, parent, g)
        expanded += 1
        if expanded > max_states:
            raise AlignmentTimeout(f"alignment of a trace of length {n} exceeded {max_states} states")
        if deadline is not None and expanded & 1023 == 0 and time.monotonic() > deadline:
            raise AlignmentTimeout("alignment deadline reached")

        succ = []
        for t in range(n_trans):
            p = pre[t]
            if p & m != p:
                continue
            try:
                m2 = fire(m, t, sn)
            except SafetyViolation as exc:
                raise SafetyViolation(f"{exc} (from marking {sn.places_of(m)})") from None
            lab = labels[t]
            if lab is None:
                succ.append(((m2, i), 0, "TAU", t, (None, t)))
                continue
            if i < n and trace[i] == lab:
                succ.append(((m2, i + 1), 0, MT, t, (Step(MT, lab), t)))
            succ.append(((m2, i), 1, RH, t, (Step(RH, lab), t)))
        if i < n:
            succ.append(((m, i + 1), 1, LH, n_trans, (Step(LH, trace[i]), None)))
        for nxt, c, kind, t, mv in succ:
            if nxt in closed:
                continue
            g2 = g + c
            if g2 > best_g.get(nxt, g2):
                continue
            best_g[nxt] = g2
            counter += 1
            heapq.heappush(heap, (g2 + h_suffix[nxt[1]], -g2, _PRIORITY[kind], t, nxt[1], counter, nxt, state, mv))
    raise AlignmentError("final marking is unreachable from the initial marking")


def _unwind(state, parent, g) -> Alignment:
    steps, firing = [], []
    while True:
        prev, move = parent[state]
        if prev is None:
            break
        step, t = move
        if step is not None:
            steps.append(step)
        if t is not None:
            firing.append(t)
        state = prev
    steps.reverse()
    firing.reverse()
    return Alignment(tuple(steps), g, tuple(firing))


def is_proper(a: Alignment, trace, sn: SystemNet) -> bool:
    """Trace projection gives ``trace``; the firing sequence replays to the sink."""
    if tuple(s.label for s in trace_projection(a)) != tuple(trace):
        return False
    m = sn.initial
    visible = []
    for t in a.firing:
        try:
            m = fire(m, t, sn)
        except Exception:
            return False
        lab = sn.transitions[t].label
        if lab is not None:
            visible.append(lab)
    if m != sn.final:
        return False
    if visible != [s.label for s in model_projection(a)]:
        return False
    return a.cost == cost(a)


# ---------------------------------------------------------------------------
# exhaustive reference
# ---------------------------------------------------------------------------

def shortest_visible_run(sn: SystemNet, limit: int = 100_000) -> int:
    """Fewest visible transitions on any run from the initial to the final marking."""
    dist = {sn.initial: 0}
    frontier = [(0, 0, sn.initial)]
    seen = 0
    while frontier:
        d, _, m = heapq.heappop(frontier)
        if d > dist.get(m, d):
            continue
        if m == sn.final:
            return d
        seen += 1
        if seen > limit:
            break
        for t in sn.transitions:
            p = sn.net.pre[t.index]
            if p & m != p:
                continue
            m2 = fire(m, t.index, sn)
            d2 = d + (t.label is not None)
            if d2 < dist.get(m2, d2 + 1):
                dist[m2] = d2
                heapq.heappush(frontier, (d2, t.index, m2))
    raise AlignmentError("final marking is unreachable from the initial marking")


def brute_force_align(trace, sn: SystemNet, bound: int | None = None, jit=None) -> Alignment:
    """Reference alignment by enumerating model runs.

    Every run of at most ``bound`` visible labels that ends in the final
    marking is scored by its indel edit distance to the trace. A run prefix
    is abandoned once its distance to every trace prefix exceeds the best
    cost found. The default bound (twice the trace length plus the shortest
    run) cannot cut off an optimal run.
    """
    trace = tuple(trace)
    n = len(trace)
    shortest = shortest_visible_run(sn)
    if bound is None:
        bound = 2 * n + shortest
    codes = {a: k for k, a in enumerate(sorted(set(trace) | set(sn.alphabet)))}
    tcode = np.array([codes[a] for a in trace], dtype=np.int64)

    limit = n + shortest  # all log moves plus a shortest run
    best_cost = None
    best_run = None
    # a run prefix is summarised by its marking and the distance row against
    # every trace prefix; equal summaries have equal futures
    seen: dict = {}
    stack = [(sn.initial, np.arange(n + 1, dtype=np.int64), (), ())]
    while stack:
        m, row, run, fired = stack.pop()
        key = (m, row.tobytes())
        if seen.get(key, bound + 1) <= len(run):
            continue
        seen[key] = len(run)
        if row.min() > limit:
            continue
        if m == sn.final:
            c = int(row[n])
            if best_cost is None or (c, run) < (best_cost, best_run[0]):
                best_cost, best_run = c, (run, fired)
                limit = min(limit, c)
        for t in reversed(sn.transitions):
            p = sn.net.pre[t.index]
            if p & m != p:
                continue
            m2 = fire(m, t.index, sn)
            if t.label is None:
                stack.append((m2, row, run, fired + (t.index,)))
            elif len(run) < bound:
                nxt = _kernels.indel_step(row, tcode, codes[t.label], jit=jit)
                stack.append((m2, nxt, run + (t.label,), fired + (t.index,)))
    if best_run is None:
        raise AlignmentError(f"no complete model run within {bound} visible steps")
    run, fired = best_run
    rcode = np.array([codes[a] for a in run], dtype=np.int64)
    # independent recomputation of the winner's cost
    assert best_cost == n + len(run) - 2 * _kernels.lcs_length(tcode, rcode, jit=jit)
    return Alignment(_edit_steps(trace, run), best_cost, fired)


def _edit_steps(trace, run) -> tuple:
    n, m = len(trace), len(run)
    d = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n + 1):
        for j in range(m + 1):
            if i == 0 or j == 0:
                d[i][j] = i + j
                continue
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1,
                          d[i - 1][j - 1] if trace[i - 1] == run[j - 1] else n + m + 1)
    steps = []
    i, j = n, m
    while i or j:
        if i and j and trace[i - 1] == run[j - 1] and d[i][j] == d[i - 1][j - 1]:
            steps.append(Step(MT, trace[i - 1]))
            i, j = i - 1, j - 1
        elif j and d[i][j] == d[i][j - 1] + 1:
            steps.append(Step(RH, run[j - 1]))
            j -= 1
        else:
            steps.append(Step(LH, trace[i - 1]))
            i -= 1
    return tuple(reversed(steps))
