"""Repetitive and concurrent patterns and their partial fulfilment."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .align import MT, Alignment, align, trace_projection
from .concurrency import ConcurrencyRelation, PartialOrder, unique_partial_orders
from .eventlog import EventLog, Trace
from .petri import SystemNet
from .tandem import _longest_by_start, detect_tandem_repeats

DEFAULT_CAP = 10_000


class LinearizationCapExceeded(RuntimeError):
    def __init__(self, po: PartialOrder, cap: int):
        self.po = po
        self.cap = cap
        src = "" if po.trace is None else f" built from <{','.join(po.trace)}>"
        super().__init__(f"partial order{src} has more than {cap} linearizations")


@dataclass
class RepetitivePattern:
    trace: Trace  # extended trace the pattern was found in
    repeat_type: Trace
    positions: tuple
    repetitions: int
    count: int
    pf: Fraction

    kind = "repetitive"

    @property
    def weight(self) -> int:
        return self.count


@dataclass
class ConcurrentPattern:
    po: PartialOrder
    positions: tuple
    count: int
    pf: Optional[Fraction] = None
    partial: Optional[Fraction] = None
    interleavings: Optional[Fraction] = None

    kind = "concurrent"

    @property
    def weight(self) -> int:
        return self.count


def _aligner(sn, cache, align_fn):
    def run(trace):
        a = cache.get(trace)
        if a is None:
            a = cache[trace] = align_fn(trace, sn)
        return a
    return run


def repetitive_fulfilment(proj_ops, start: int, period: int, repetitions: int) -> Fraction:
    """Share of offsets matched synchronously in every repetition."""
    hits = 0
    for d in range(period):
        if all(proj_ops[start - 1 + d + j * period] == MT for j in range(repetitions)):
            hits += 1
    return Fraction(hits, period)


def define_repetitive_patterns(el: EventLog, sn: SystemNet, cache: dict | None = None,
                               align_fn: Callable = align, jit=None) -> dict:
    """Patterns for each extended trace, keyed by that trace."""
    run = _aligner(sn, {} if cache is None else cache, align_fn)
    out = {}
    for et, c in el.items():
        best = _longest_by_start(detect_tandem_repeats(et, jit=jit))
        if not best:
            out[et] = []
            continue
        ops = [s.op for s in trace_projection(run(et))]
        found = []
        i = 1
        while i <= len(et):
            r = best.get(i)
            if r is None:
                i += 1
                continue
            p = len(r.repeat_type)
            pf = repetitive_fulfilment(ops, i, p, r.repetitions)
            found.append(RepetitivePattern(et, r.repeat_type, tuple(range(i, i + p)), r.repetitions, c, pf))
            i += r.span
        out[et] = found
    return out


# ---------------------------------------------------------------------------
# linearizations and concurrent blocks
# ---------------------------------------------------------------------------

def linearizations(po: PartialOrder, cap: int = DEFAULT_CAP) -> list:
    """All linear extensions of ``po`` as tuples of event indices (1..n).

    Built level by level: a prefix is extended by every event whose
    predecessors it already contains. The number of prefixes at any level
    never exceeds the final count, so the cap is enforced as soon as a level
    grows past it.
    """
    n = po.size
    if n == 0:
        return [()]
    need = [0] * (n + 1)
    for j in range(1, n + 1):
        for i in po.predecessors(j):
            if 1 <= i <= n:
                need[j] |= 1 << i
    level = [(0, ())]
    for _ in range(n):
        nxt = []
        for placed, seq in level:
            for e in range(1, n + 1):
                bit = 1 << e
                if not placed & bit and need[e] & placed == need[e]:
                    nxt.append((placed | bit, seq + (e,)))
        if len(nxt) > cap:
            raise LinearizationCapExceeded(po, cap)
        level = nxt
    return [seq for _, seq in level]


def concurrent_blocks(po: PartialOrder) -> list:
    """Position blocks that are open to reordering.

    Events comparable with every other event act as synchronisation points
    and sit at the same position in every linearization; the events between
    two consecutive synchronisation points form one block.
    """
    size = len(po.labels)
    comparable = po.order | po.order.T
    sync = [v for v in range(size) if all(comparable[v, u] for u in range(size) if u != v)]
    # sentinels are always synchronisation points; order them by position
    rank = {v: int(po.order[:, v].sum()) for v in sync}
    sync.sort(key=rank.__getitem__)
    blocks = []
    for a, b in zip(sync, sync[1:]):
        lo, hi = rank[a], rank[b]
        if hi - lo > 1:
            blocks.append(tuple(range(lo + 1, hi)))
    return blocks


@dataclass
class POAnalysis:
    po: PartialOrder
    count: int
    traces: list = field(default_factory=list)  # representative traces
    patterns: list = field(default_factory=list)
    error: Optional[str] = None


def representative_traces_and_patterns(log: EventLog, oracle: ConcurrencyRelation,
                                       cap: int = DEFAULT_CAP, jit=None, strict: bool = True,
                                       tick=None) -> list:
    """One :class:`POAnalysis` per partial-order class, in log order.

    With ``strict`` a class over the cap raises; otherwise the class is
    returned with ``error`` set and no traces or patterns.
    """
    out = []
    for po, c in unique_partial_orders(log, oracle, jit=jit).items():
        if tick is not None:
            tick()
        try:
            lins = linearizations(po, cap)
        except LinearizationCapExceeded as exc:
            if strict:
                raise
            out.append(POAnalysis(po, c, error=str(exc)))
            continue
        reps = [tuple(po.labels[e] for e in seq) for seq in lins]
        pats = [ConcurrentPattern(po, block, c) for block in concurrent_blocks(po)]
        out.append(POAnalysis(po, c, reps, pats))
    return out


def _matched(alignment: Alignment, positions):
    ops = [s.op for s in trace_projection(alignment)]
    if positions and max(positions) > len(ops):
        raise RuntimeError("pattern position beyond the aligned trace")
    return [ops[p - 1] == MT for p in positions]


def concurrent_fulfilment_partial(p: ConcurrentPattern, alignments) -> Fraction:
    alignments = list(alignments)
    if not alignments:
        raise ValueError("no alignments given")
    hits = sum(sum(_matched(a, p.positions)) for a in alignments)
    return Fraction(hits, len(p.positions) * len(alignments))


def concurrent_fulfilment_interleavings(p: ConcurrentPattern, alignments) -> Fraction:
    alignments = list(alignments)
    if not alignments:
        raise ValueError("no alignments given")
    full = sum(1 for a in alignments if all(_matched(a, p.positions)))
    return Fraction(full, len(alignments))


def score_concurrent_patterns(analyses, sn: SystemNet, matching: str = "interleavings",
                              cache: dict | None = None, align_fn: Callable = align) -> None:
    """Fill in both fulfilment variants and select ``pf`` by ``matching``."""
    if matching not in ("partial", "interleavings"):
        raise ValueError(f"unknown matching mode {matching!r}")
    run = _aligner(sn, {} if cache is None else cache, align_fn)
    for an in analyses:
        if not an.patterns:
            continue
        alignments = [run(t) for t in an.traces]
        for p in an.patterns:
            p.partial = concurrent_fulfilment_partial(p, alignments)
            p.interleavings = concurrent_fulfilment_interleavings(p, alignments)
            p.pf = p.partial if matching == "partial" else p.interleavings
