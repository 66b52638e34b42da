"""Concurrency oracles and the mapping from traces to partial orders.

Global oracles (alpha, alpha+) decide concurrency on label pairs derived from
directly-follows counts. The explicit oracle reads concurrent *position*
pairs per trace from a JSON file, which lets a trace-local oracle's output be
fed in without reimplementing it.
"""
from __future__ import annotations

import json
import warnings
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels
from .eventlog import EventLog, Trace


class OracleError(ValueError):
    pass


# ---------------------------------------------------------------------------
# directly-follows statistics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class DirectlyFollowsStats:
    """Count-weighted directly-follows frequencies plus a boolean view.

    ``relation`` holds the pairs currently considered to directly follow each
    other; unfiltered it is every pair with a positive count.
    """

    counts: dict
    relation: frozenset
    epsilon: Fraction = Fraction(0)

    def count(self, x, y) -> int:
        return self.counts.get((x, y), 0)

    def df(self, x, y) -> bool:
        return (x, y) in self.relation


def directly_follows(log: EventLog) -> DirectlyFollowsStats:
    counts: dict = defaultdict(int)
    for trace, c in log.items():
        for x, y in zip(trace, trace[1:]):
            counts[(x, y)] += c
    counts = dict(sorted(counts.items()))
    return DirectlyFollowsStats(counts, frozenset(counts))


def filter_df(stats: DirectlyFollowsStats, epsilon) -> DirectlyFollowsStats:
    """Drop pairs whose count does not exceed a share of their neighbourhood.

    For a pair ``(x, y)`` the threshold is ``epsilon`` times the mean of the
    other outgoing counts of ``x`` and the other incoming counts of ``y``.
    """
    eps = Fraction(epsilon) if not isinstance(epsilon, float) else Fraction(str(epsilon))
    if not 0 <= eps <= 1:
        raise ValueError(f"df filter must lie in [0, 1], got {epsilon}")
    out_sum: dict = defaultdict(int)
    in_sum: dict = defaultdict(int)
    for (x, y), c in stats.counts.items():
        out_sum[x] += c
        in_sum[y] += c
    keep = set()
    for (x, y), c in stats.counts.items():
        # sum over z != x of dfC(x, z): exclude the reflexive term
        outs = out_sum[x] - stats.count(x, x)
        ins = in_sum[y] - stats.count(y, y)
        threshold = eps * (outs + ins) / 2
        if c > threshold:
            keep.add((x, y))
    return DirectlyFollowsStats(stats.counts, frozenset(keep), eps)


# ---------------------------------------------------------------------------
# relations
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ConcurrencyRelation:
    """Symmetric concurrency between labels, optionally refined per trace.

    ``pairs`` holds label pairs as sorted 2-tuples. ``local`` maps a trace to
    the sorted 1-based position pairs that are concurrent in it.
    """

    pairs: frozenset = frozenset()
    local: dict = field(default_factory=dict)
    name: str = "custom"
    warnings: tuple = ()

    def labels_concurrent(self, x, y) -> bool:
        if x is None or y is None or x == y:
            return False
        return (min(x, y), max(x, y)) in self.pairs

    def concurrent(self, trace: Trace, i: int, j: int) -> bool:
        """Whether events ``i`` and ``j`` (1-based) of ``trace`` are concurrent."""
        if i == j:
            return False
        pos = self.local.get(tuple(trace))
        if pos is not None and (min(i, j), max(i, j)) in pos:
            return True
        return self.labels_concurrent(trace[i - 1], trace[j - 1])

    def sorted_pairs(self) -> list:
        return sorted(self.pairs)


def _symmetric_pairs(relation) -> frozenset:
    return frozenset(
        (x, y) for (x, y) in relation if x < y and (y, x) in relation
    )


def alpha_oracle(stats: DirectlyFollowsStats) -> ConcurrencyRelation:
    return ConcurrencyRelation(_symmetric_pairs(stats.relation), name="alpha")


def alpha_plus_oracle(log: EventLog, stats: DirectlyFollowsStats) -> ConcurrencyRelation:
    """Alpha pairs minus those that also form a length-two loop somewhere."""
    loops = set()
    for trace in log:
        for x, y, z in zip(trace, trace[1:], trace[2:]):
            if x == z and x != y:
                loops.add((min(x, y), max(x, y)))
    return ConcurrencyRelation(_symmetric_pairs(stats.relation) - loops, name="alpha-plus")


def explicit_oracle(config, log: EventLog | None = None) -> ConcurrencyRelation:
    """Build a relation from an oracle document.

    ``config`` is a path, a JSON string or an already-decoded dict of the form
    ``{"global": [[x, y], ...], "traces": [{"trace": [...], "pairs": [[i, j], ...]}]}``.
    Traces missing from ``log`` (when given) trigger a warning and are kept.
    """
    doc = _load_config(config)
    if not isinstance(doc, dict):
        raise OracleError("oracle document must be a JSON object")
    pairs = set()
    for entry in doc.get("global", []) or []:
        if not (isinstance(entry, (list, tuple)) and len(entry) == 2):
            raise OracleError(f"global pair {entry!r} is not a 2-element list")
        x, y = (str(v) for v in entry)
        if x == y:
            raise OracleError(f"global pair {entry!r} relates a label to itself")
        pairs.add((min(x, y), max(x, y)))
    local: dict = {}
    notes = []
    for n, entry in enumerate(doc.get("traces", []) or [], start=1):
        try:
            trace = tuple(str(a) for a in entry["trace"])
            raw = entry.get("pairs", [])
        except (KeyError, TypeError, AttributeError):
            raise OracleError(f"traces[{n}]: expected an object with 'trace' and 'pairs'") from None
        found = set(local.get(trace, ()))
        for p in raw:
            if not (isinstance(p, (list, tuple)) and len(p) == 2):
                raise OracleError(f"traces[{n}]: pair {p!r} is not a 2-element list")
            i, j = int(p[0]), int(p[1])
            if i == j:
                raise OracleError(f"traces[{n}]: pair ({i},{j}) relates an event to itself")
            for v in (i, j):
                if not 1 <= v <= len(trace):
                    raise OracleError(
                        f"traces[{n}]: position {v} out of range for a trace of length {len(trace)}")
            found.add((min(i, j), max(i, j)))
        if log is not None and trace not in log:
            msg = f"oracle trace <{','.join(trace)}> does not occur in the log"
            warnings.warn(msg, stacklevel=2)
            notes.append(msg)
        local[trace] = frozenset(found)
    return ConcurrencyRelation(frozenset(pairs), local, name="explicit", warnings=tuple(notes))


def _load_config(config):
    if isinstance(config, dict):
        return config
    text = None
    if isinstance(config, (bytes, bytearray)):
        text = config.decode("utf-8")
    elif isinstance(config, str) and config.lstrip().startswith("{"):
        text = config
    if text is None:
        from pathlib import Path

        text = Path(config).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise OracleError(f"oracle file is not valid JSON: {exc}") from None


# ---------------------------------------------------------------------------
# partial orders
# ---------------------------------------------------------------------------

class PartialOrder:
    """Labelled strict order over a trace's events plus two sentinels.

    Event 0 is the initial sentinel and event ``n + 1`` the final one; both
    carry the label ``None``. Events ``1..n`` are the trace positions.
    ``order[i, j]`` is True when ``i`` strictly precedes ``j``. Equality and
    hashing are up to label-preserving isomorphism.
    """

    __slots__ = ("labels", "order", "cover", "trace", "_key")

    def __init__(self, labels, order, trace=None, jit=None):
        self.labels = tuple(labels)
        self.order = np.asarray(order, dtype=bool)
        self.order.setflags(write=False)
        self.cover = _kernels.transitive_reduction(self.order, jit=jit)
        self.cover.setflags(write=False)
        self.trace = trace
        self._key = None

    @property
    def size(self) -> int:
        """Number of non-sentinel events."""
        return len(self.labels) - 2

    def arcs(self) -> list:
        """Arcs of the transitive reduction."""
        return [tuple(map(int, a)) for a in np.argwhere(self.cover)]

    def successors(self, i) -> list:
        return [int(j) for j in np.nonzero(self.cover[i])[0]]

    def predecessors(self, i) -> list:
        return [int(j) for j in np.nonzero(self.cover[:, i])[0]]

    def leq(self, i, j) -> bool:
        return i == j or bool(self.order[i, j])

    @property
    def key(self):
        if self._key is None:
            self._key = canonical_form(self)
        return self._key

    def __eq__(self, other):
        if not isinstance(other, PartialOrder):
            return NotImplemented
        return self.labels.__len__() == other.labels.__len__() and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def describe(self) -> str:
        def name(i):
            if i == 0:
                return "s0"
            if i == len(self.labels) - 1:
                return "f0"
            return f"{self.labels[i]}{i}"

        return ", ".join(f"{name(a)}->{name(b)}" for a, b in self.arcs())

    def __repr__(self):
        src = "" if self.trace is None else f" of <{','.join(self.trace)}>"
        return f"PartialOrder{src}({self.describe()})"


def to_partial_order(trace, oracle: ConcurrencyRelation, jit=None) -> PartialOrder:
    trace = tuple(trace)
    n = len(trace)
    size = n + 2
    base = np.zeros((size, size), dtype=bool)
    base[0, 1:] = True
    base[:-1, -1] = True
    for i in range(1, n + 1):
        for j in range(i + 1, n + 1):
            if not oracle.concurrent(trace, i, j):
                base[i, j] = True
    order = _kernels.transitive_closure(base, jit=jit)
    return PartialOrder((None,) + trace + (None,), order, trace=trace, jit=jit)


def unique_partial_orders(log: EventLog, oracle: ConcurrencyRelation, jit=None) -> dict:
    """Group traces by the isomorphism class of their partial order.

    Returns an insertion-ordered ``{PartialOrder: count}``; each class is
    represented by the partial order of its lexicographically first trace.
    """
    classes: dict = {}
    for trace, c in log.items():
        po = to_partial_order(trace, oracle, jit=jit)
        classes[po] = classes.get(po, 0) + c
    return classes


# ---------------------------------------------------------------------------
# canonical form
# ---------------------------------------------------------------------------

def _refine(colors, preds, succs):
    while True:
        sigs = [
            (colors[v], tuple(sorted(colors[u] for u in preds[v])),
             tuple(sorted(colors[u] for u in succs[v])))
            for v in range(len(colors))
        ]
        ranks = {s: r for r, s in enumerate(sorted(set(sigs)))}
        new = [ranks[s] for s in sigs]
        if len(ranks) == len(set(colors)):
            return new
        colors = new


def canonical_form(po: PartialOrder):
    """Certificate equal for two orders iff they are isomorphic.

    Colour refinement on (label, predecessor colours, successor colours),
    with individualisation of each member of the first ambiguous cell when
    refinement alone leaves ties; the lexicographically least certificate
    wins.
    """
    n = len(po.labels)
    preds = [po.predecessors(v) for v in range(n)]
    succs = [po.successors(v) for v in range(n)]
    start = [("" if a is None else "L" + a) for a in po.labels]
    ranks = {s: r for r, s in enumerate(sorted(set(start)))}
    colors = _refine([ranks[s] for s in start], preds, succs)
    label_key = tuple(sorted(start))

    def certificate(cols):
        order = sorted(range(n), key=lambda v: cols[v])
        pos = {v: i for i, v in enumerate(order)}
        lab = tuple(start[v] for v in order)
        arcs = tuple(sorted((pos[a], pos[b]) for a in range(n) for b in succs[a]))
        return lab, arcs

    def search(cols):
        if len(set(cols)) == n:
            return certificate(cols)
        cells: dict = defaultdict(list)
        for v, c in enumerate(cols):
            cells[c].append(v)
        target = min(c for c, vs in cells.items() if len(vs) > 1)
        best = None
        for v in cells[target]:
            # split v off below its cell; other colours keep their relative order
            trial = [2 * c + (0 if u == v else 1) if c == target else 2 * c for u, c in enumerate(cols)]
            cert = search(_refine(trial, preds, succs))
            if best is None or cert < best:
                best = cert
        return best

    return label_key, search(colors)


def isomorphic(a: PartialOrder, b: PartialOrder) -> bool:
    return len(a.labels) == len(b.labels) and a.key == b.key
