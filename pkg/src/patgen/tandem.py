"""Tandem repeat detection and the reduce/extend log transformations."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from . import _kernels
from .eventlog import EventLog, Trace


class TandemRepeat(NamedTuple):
    """``repeat_type`` occurs ``repetitions`` times back to back from ``start`` (1-based)."""

    start: int
    repeat_type: Trace
    repetitions: int

    @property
    def span(self) -> int:
        return len(self.repeat_type) * self.repetitions

    def __str__(self):
        sep = "" if all(len(a) == 1 for a in self.repeat_type) else " "
        return f"({self.start},{sep.join(self.repeat_type)},{self.repetitions})"


def encode(trace) -> np.ndarray:
    """Map labels to dense integer codes (first-seen order)."""
    table: dict = {}
    return np.fromiter((table.setdefault(a, len(table)) for a in trace), dtype=np.int64, count=len(trace))


def _sort_key(r: TandemRepeat):
    return (r.start, -r.span, r.repeat_type)


def detect_tandem_repeats(trace, jit=None) -> list[TandemRepeat]:
    """All maximal, primitive tandem repeats of ``trace`` without right shifts.

    Only the leftmost occurrence of each run is reported. The result is
    ordered by start, then by covered length (longest first), then by the
    repeat type.
    """
    trace = tuple(trace)
    if len(trace) < 2:
        return []
    rows = _kernels.tandem_candidates(encode(trace), jit=jit)
    found = [
        TandemRepeat(int(s) + 1, trace[s:s + p], int(k))
        for s, p, k in rows.tolist()
    ]
    found.sort(key=_sort_key)
    return found


def _longest_by_start(repeats):
    best: dict[int, TandemRepeat] = {}
    for r in repeats:
        # already ordered: the first repeat seen at a start is the longest,
        # ties resolved by the smaller repeat type
        best.setdefault(r.start, r)
    return best


def reduce_trace(trace, jit=None) -> Trace:
    """Collapse every selected tandem repeat to exactly two copies."""
    trace = tuple(trace)
    best = _longest_by_start(detect_tandem_repeats(trace, jit=jit))
    out: list = []
    i = 1
    while i <= len(trace):
        r = best.get(i)
        if r is None:
            out.append(trace[i - 1])
            i += 1
        else:
            out.extend(r.repeat_type * 2)
            i += r.span
    return tuple(out)


def reduce_log(log: EventLog, jit=None, tick=None) -> EventLog:
    """Reduced traces of every log trace that contains a tandem repeat.

    ``tick``, if given, is called once per trace (deadline checks).
    """
    entries = []
    for trace, c in log.items():
        if tick is not None:
            tick()
        if detect_tandem_repeats(trace, jit=jit):
            entries.append((reduce_trace(trace, jit=jit), c))
    return EventLog(entries)


def extend_trace(rt, jit=None) -> Trace:
    """Repeat each selected repeat type as many times as the trace is long."""
    rt = tuple(rt)
    best = _longest_by_start(detect_tandem_repeats(rt, jit=jit))
    n = len(rt)
    out: list = []
    i = 1
    while i <= n:
        r = best.get(i)
        if r is None:
            out.append(rt[i - 1])
            i += 1
        else:
            out.extend(r.repeat_type * n)
            i += 2 * len(r.repeat_type)
    return tuple(out)


def extend_log(rl: EventLog, jit=None) -> EventLog:
    return EventLog([(extend_trace(t, jit=jit), c) for t, c in rl.items()])


def brute_force_tandem_repeats(trace) -> list[TandemRepeat]:
    """Reference enumeration used by the tests; cubic or worse."""
    t = tuple(trace)
    n = len(t)

    def occurs(s, p, k):  # 0-based start
        if s < 0 or s + p * k > n:
            return False
        return all(t[s + m * p + j] == t[s + j] for m in range(k) for j in range(p))

    def is_tandem(seq):
        m = len(seq)
        return any(m % d == 0 and seq == seq[:d] * (m // d) for d in range(1, m // 2 + 1))

    out = []
    for s in range(n):
        for p in range(1, (n - s) // 2 + 1):
            alpha = t[s:s + p]
            if is_tandem(alpha):
                continue
            for k in range(2, (n - s) // p + 1):
                if not occurs(s, p, k):
                    break
                if occurs(s - p, p, k + 1) or occurs(s, p, k + 1):
                    continue
                if any(occurs(s - x, p, k) for x in range(1, p)):
                    continue
                out.append(TandemRepeat(s + 1, alpha, k))
    out.sort(key=_sort_key)
    return out
