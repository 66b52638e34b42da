"""Event logs as multisets of label sequences, plus XES and CSV readers."""
from __future__ import annotations

import xml.etree.ElementTree as ET
from collections.abc import Iterable, Iterator, Mapping
from typing import Tuple

Trace = Tuple[str, ...]


class LogParseError(ValueError):
    """Raised when a log document cannot be read."""


class EventLog(Mapping):
    """Immutable multiset of traces.

    Traces are tuples of activity labels. Iteration follows the
    lexicographic order of the label sequences so every consumer sees the
    same ordering.
    """

    __slots__ = ("_counts", "_order")

    def __init__(self, entries: Iterable[tuple[Iterable[str], int]] | Mapping = ()):
        counts: dict[Trace, int] = {}
        items = entries.items() if isinstance(entries, Mapping) else entries
        for trace, c in items:
            trace = tuple(trace)
            c = int(c)
            if c < 1:
                raise ValueError(f"trace count must be positive, got {c} for {trace!r}")
            for label in trace:
                if not isinstance(label, str) or not label:
                    raise ValueError(f"invalid activity label {label!r} in {trace!r}")
            counts[trace] = counts.get(trace, 0) + c
        self._counts = counts
        self._order = tuple(sorted(counts))

    def __getitem__(self, trace) -> int:
        return self._counts[tuple(trace)]

    def __iter__(self) -> Iterator[Trace]:
        return iter(self._order)

    def __len__(self) -> int:
        return len(self._order)

    def __contains__(self, trace) -> bool:
        return tuple(trace) in self._counts

    def __eq__(self, other):
        if isinstance(other, EventLog):
            return self._counts == other._counts
        return NotImplemented

    def __hash__(self):
        return hash(frozenset(self._counts.items()))

    def __repr__(self):
        body = ", ".join(f"{'<' + ','.join(t) + '>'}: {c}" for t, c in self.items())
        return f"EventLog({{{body}}})"

    def unique(self) -> list[Trace]:
        """Distinct traces in lexicographic order."""
        return list(self._order)

    def count(self, trace) -> int:
        return self._counts.get(tuple(trace), 0)

    def total(self) -> int:
        return sum(self._counts.values())

    def alphabet(self) -> set[str]:
        return {label for trace in self._order for label in trace}

    def add(self, trace, count: int = 1) -> "EventLog":
        """Multiset sum with a single trace; returns a new log."""
        return EventLog(list(self._counts.items()) + [(tuple(trace), count)])

    def __add__(self, other: "EventLog") -> "EventLog":
        if not isinstance(other, EventLog):
            return NotImplemented
        return EventLog(list(self._counts.items()) + list(other._counts.items()))


def unique(log: EventLog) -> list[Trace]:
    return log.unique()


def count(trace, log: EventLog) -> int:
    return log.count(trace)


# ---------------------------------------------------------------------------
# CSV: one line per distinct trace, ``count;label1,label2,...``
# ---------------------------------------------------------------------------

def parse_csv(data: bytes | str) -> EventLog:
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    entries = []
    for lineno, raw in enumerate(data.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        head, sep, body = line.partition(";")
        if not sep:
            raise LogParseError(f"line {lineno}: expected 'count;labels'")
        try:
            c = int(head.strip())
        except ValueError:
            raise LogParseError(f"line {lineno}: count {head.strip()!r} is not an integer") from None
        if c < 1:
            raise LogParseError(f"line {lineno}: count must be positive, got {c}")
        labels = [part.strip() for part in body.split(",")] if body.strip() else []
        if any(not label for label in labels):
            raise LogParseError(f"line {lineno}: empty activity label")
        entries.append((tuple(labels), c))
    return EventLog(entries)


def render_csv(log: EventLog) -> str:
    return "".join(f"{c};{','.join(t)}\n" for t, c in log.items())


# ---------------------------------------------------------------------------
# XES subset: trace/event ``concept:name`` only
# ---------------------------------------------------------------------------

def _local(tag: str) -> str:
    return tag.rsplit("}", 1)[-1]


def _concept_name(elem) -> str | None:
    for child in elem:
        if _local(child.tag) == "string" and child.get("key") == "concept:name":
            return child.get("value")
    return None


def parse_xes(data: bytes | str) -> EventLog:
    """Read the control-flow of an XES document.

    Each ``<trace>`` becomes one label sequence (event ``concept:name`` in
    document order); identical sequences are merged.
    """
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise LogParseError(f"malformed XES at line {line}, column {col}: {exc}") from None
    if _local(root.tag) != "log":
        raise LogParseError(f"expected <log> root element, found <{_local(root.tag)}>")
    entries = []
    for index, trace in enumerate((t for t in root if _local(t.tag) == "trace"), start=1):
        labels = []
        for pos, event in enumerate((e for e in trace if _local(e.tag) == "event"), start=1):
            name = _concept_name(event)
            if not name:
                raise LogParseError(f"trace {index}: event {pos} has no concept:name")
            labels.append(name)
        entries.append((tuple(labels), 1))
    return EventLog(entries)


def render_xes(log: EventLog) -> str:
    """Write a minimal XES document, one ``<trace>`` per occurrence."""
    from xml.sax.saxutils import quoteattr

    out = ['<?xml version="1.0" encoding="UTF-8"?>', '<log xes.version="1.0">']
    case = 0
    for trace, c in log.items():
        for _ in range(c):
            case += 1
            out.append("  <trace>")
            out.append(f'    <string key="concept:name" value="case{case}"/>')
            for label in trace:
                out.append(f'    <event><string key="concept:name" value={quoteattr(label)}/></event>')
            out.append("  </trace>")
    out.append("</log>")
    return "\n".join(out) + "\n"


def read_log(path) -> EventLog:
    """Load a log file, choosing the reader by extension (.xes or .csv)."""
    from pathlib import Path

    path = Path(path)
    raw = path.read_bytes()
    suffixes = [s.lower() for s in path.suffixes]
    if suffixes and suffixes[-1] == ".gz":
        import gzip

        raw = gzip.decompress(raw)
        suffixes = suffixes[:-1]
    if suffixes and suffixes[-1] == ".xes":
        return parse_xes(raw)
    if suffixes and suffixes[-1] in (".csv", ".txt"):
        return parse_csv(raw)
    raise LogParseError(f"{path}: unknown log format (expected .xes or .csv)")
