"""Safe, uniquely-labelled, free-choice workflow system nets.

Markings are plain ``int`` bitmasks over place indices: bit ``p`` is set when
place ``p`` holds a token. Nets are assumed safe; a firing that would put a
second token on a place raises :class:`SafetyViolation`.
"""
from __future__ import annotations

import itertools
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field

TAU = None  # label of silent transitions


class ModelError(ValueError):
    """Structural problem in a net or its serialization."""


class FiringError(RuntimeError):
    """A transition was fired while not enabled."""


class SafetyViolation(ModelError):
    """A reachable marking puts two tokens on one place."""


@dataclass(frozen=True)
class Transition:
    index: int
    name: str
    label: str | None

    @property
    def silent(self) -> bool:
        return self.label is None


class PetriNet:
    """Labelled Petri net with places and transitions addressed by index."""

    def __init__(self, places, transitions, arcs):
        self.places = tuple(places)
        if len(set(self.places)) != len(self.places):
            raise ModelError("duplicate place identifiers")
        self.transitions = tuple(
            Transition(i, name, label) for i, (name, label) in enumerate(transitions)
        )
        names = [t.name for t in self.transitions]
        if len(set(names)) != len(names):
            raise ModelError("duplicate transition identifiers")
        if set(names) & set(self.places):
            raise ModelError("place and transition identifiers overlap")
        pidx = {p: i for i, p in enumerate(self.places)}
        tidx = {t: i for i, t in enumerate(names)}
        pre = [0] * len(self.transitions)
        post = [0] * len(self.transitions)
        place_in = [[] for _ in self.places]
        place_out = [[] for _ in self.places]
        arcset = []
        for src, dst in arcs:
            if src in pidx and dst in tidx:
                p, t = pidx[src], tidx[dst]
                pre[t] |= 1 << p
                place_out[p].append(t)
            elif src in tidx and dst in pidx:
                t, p = tidx[src], pidx[dst]
                post[t] |= 1 << p
                place_in[p].append(t)
            else:
                raise ModelError(f"arc {src!r} -> {dst!r} does not connect a place and a transition")
            arcset.append((src, dst))
        self.arcs = tuple(arcset)
        self.pre = tuple(pre)
        self.post = tuple(post)
        self.place_in = tuple(tuple(sorted(set(x))) for x in place_in)
        self.place_out = tuple(tuple(sorted(set(x))) for x in place_out)
        self._pidx = pidx
        self._tidx = tidx

    def place_index(self, name: str) -> int:
        return self._pidx[name]

    def transition(self, name: str) -> Transition:
        return self.transitions[self._tidx[name]]

    @property
    def alphabet(self) -> frozenset:
        return frozenset(t.label for t in self.transitions if t.label is not None)

    def by_label(self, label: str) -> Transition | None:
        for t in self.transitions:
            if t.label == label:
                return t
        return None


class SystemNet:
    """Workflow net with initial marking ``{source}`` and final ``{sink}``."""

    def __init__(self, net: PetriNet, source: str, sink: str):
        self.net = net
        self.source = source
        self.sink = sink
        self.initial = 1 << net.place_index(source)
        self.final = 1 << net.place_index(sink)

    # convenience pass-throughs
    @property
    def places(self):
        return self.net.places

    @property
    def transitions(self):
        return self.net.transitions

    @property
    def alphabet(self):
        return self.net.alphabet

    def marking(self, *places: str) -> int:
        m = 0
        for p in places:
            bit = 1 << self.net.place_index(p)
            if m & bit:
                raise SafetyViolation(f"place {p!r} listed twice in marking")
            m |= bit
        return m

    def places_of(self, m: int) -> tuple[str, ...]:
        return tuple(p for i, p in enumerate(self.net.places) if m >> i & 1)

    def __repr__(self):
        return (f"SystemNet({len(self.places)} places, {len(self.transitions)} transitions, "
                f"source={self.source!r}, sink={self.sink!r})")


def enabled(m: int, sn: SystemNet) -> list[Transition]:
    """Transitions whose preset is covered by ``m``, by transition index."""
    pre = sn.net.pre
    return [t for t in sn.net.transitions if pre[t.index] & m == pre[t.index] and pre[t.index]]


def fire(m: int, t: Transition | int, sn: SystemNet) -> int:
    idx = t if isinstance(t, int) else t.index
    pre = sn.net.pre[idx]
    post = sn.net.post[idx]
    if not pre or pre & m != pre:
        raise FiringError(f"transition {sn.net.transitions[idx].name!r} is not enabled")
    rest = m & ~pre
    if rest & post:
        clash = sn.places_of(rest & post)
        raise SafetyViolation(f"firing {sn.net.transitions[idx].name!r} puts a second token on {clash}")
    return rest | post


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

@dataclass
class ValidationReport:
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, message: str):
        self.violations.append((kind, message))

    def kinds(self) -> set:
        return {k for k, _ in self.violations}


def validate(sn: SystemNet) -> ValidationReport:
    """Check the workflow, free-choice and unique-labelling properties.

    Safety is not decided here; the alignment search reports the first
    unsafe marking it meets.
    """
    net = sn.net
    report = ValidationReport()
    src = net.place_index(sn.source)
    snk = net.place_index(sn.sink)
    if net.place_in[src]:
        report.add("workflow", f"source place {sn.source!r} has incoming arcs")
    if net.place_out[snk]:
        report.add("workflow", f"sink place {sn.sink!r} has outgoing arcs")

    # short-circuit o -> i and test strong connectivity over places+transitions
    n_p = len(net.places)
    nodes = n_p + len(net.transitions)
    succ = [set() for _ in range(nodes)]
    for t in net.transitions:
        for p in range(n_p):
            if net.pre[t.index] >> p & 1:
                succ[p].add(n_p + t.index)
            if net.post[t.index] >> p & 1:
                succ[n_p + t.index].add(p)
    if src != snk:
        succ[snk].add(src)
    pred = [set() for _ in range(nodes)]
    for a, bs in enumerate(succ):
        for b in bs:
            pred[b].add(a)
    if nodes and (_reach(src, succ) != nodes or _reach(src, pred) != nodes):
        report.add("workflow", "net with short-circuit transition is not strongly connected")

    for t in net.transitions:
        if not net.pre[t.index]:
            report.add("workflow", f"transition {t.name!r} has an empty preset")
    for p, outs in enumerate(net.place_out):
        presets = {net.pre[t] for t in outs}
        if len(presets) > 1:
            report.add("free-choice", f"place {net.places[p]!r} feeds transitions with different presets")

    seen = {}
    for t in net.transitions:
        if t.label is None:
            continue
        if t.label in seen:
            report.add("unique-labelling",
                       f"label {t.label!r} on transitions {seen[t.label]!r} and {t.name!r}")
        else:
            seen[t.label] = t.name
    return report


def _reach(start, succ):
    seen = {start}
    stack = [start]
    while stack:
        for b in succ[stack.pop()]:
            if b not in seen:
                seen.add(b)
                stack.append(b)
    return len(seen)


# ---------------------------------------------------------------------------
# PNML
# ---------------------------------------------------------------------------

def _local(tag):
    return tag.rsplit("}", 1)[-1]


def _text_of(elem, child):
    for c in elem:
        if _local(c.tag) == child:
            for t in c.iter():
                if _local(t.tag) == "text":
                    return (t.text or "").strip()
    return None


def parse_pnml(data: bytes | str) -> SystemNet:
    if isinstance(data, str):
        data = data.encode("utf-8")
    try:
        root = ET.fromstring(data)
    except ET.ParseError as exc:
        line, col = exc.position
        raise ModelError(f"malformed PNML at line {line}, column {col}: {exc}") from None
    nets = [e for e in root.iter() if _local(e.tag) == "net"]
    if not nets:
        raise ModelError("no <net> element")
    netel = nets[0]
    places, transitions, arcs = [], [], []
    marked = []
    for el in netel.iter():
        tag = _local(el.tag)
        if tag == "place":
            pid = el.get("id")
            places.append(pid)
            tokens = _text_of(el, "initialMarking")
            if tokens:
                try:
                    n = int(tokens)
                except ValueError:
                    raise ModelError(f"place {pid!r}: bad initialMarking {tokens!r}") from None
                if n > 1:
                    raise SafetyViolation(f"place {pid!r} starts with {n} tokens")
                if n == 1:
                    marked.append(pid)
        elif tag == "transition":
            tid = el.get("id")
            label = _text_of(el, "name") or None
            for ts in el:
                if _local(ts.tag) != "toolspecific":
                    continue
                if ts.get("activity") == "$invisible$" or (ts.get("invisible") or "").lower() == "true":
                    label = None
            transitions.append((tid, label))
        elif tag == "arc":
            arcs.append((el.get("source"), el.get("target")))
    ids = set(places) | {t for t, _ in transitions}
    for s, t in arcs:
        if s not in ids or t not in ids:
            raise ModelError(f"arc {s!r} -> {t!r} references an unknown node")
    net = PetriNet(places, transitions, arcs)

    sources = [p for i, p in enumerate(net.places) if not net.place_in[i]]
    sinks = [p for i, p in enumerate(net.places) if not net.place_out[i]]
    if marked:
        if len(marked) != 1:
            raise ModelError(f"initial marking must mark one place, got {marked}")
        source = marked[0]
    elif len(sources) == 1:
        source = sources[0]
    else:
        raise ModelError(f"expected a unique source place, found {sources}")
    if len(sinks) != 1:
        raise ModelError(f"expected a unique sink place, found {sinks}")
    sn = SystemNet(net, source, sinks[0])
    dup = [m for k, m in validate(sn).violations if k == "unique-labelling"]
    if dup:
        raise ModelError("net is not uniquely labelled: " + "; ".join(dup))
    return sn


def read_pnml(path) -> SystemNet:
    from pathlib import Path

    return parse_pnml(Path(path).read_bytes())


def render_pnml(sn: SystemNet) -> str:
    from xml.sax.saxutils import escape, quoteattr

    out = ['<?xml version="1.0" encoding="UTF-8"?>', "<pnml>",
           '  <net id="net1" type="http://www.pnml.org/version-2009/grammar/pnmlcoremodel">',
           "    <page id=\"p1\">"]
    for p in sn.places:
        mark = "<initialMarking><text>1</text></initialMarking>" if p == sn.source else ""
        out.append(f"      <place id={quoteattr(p)}>{mark}</place>")
    for t in sn.transitions:
        if t.label is None:
            out.append(f"      <transition id={quoteattr(t.name)}><name><text>{escape(t.name)}</text></name>"
                       '<toolspecific tool="ProM" version="6.4" activity="$invisible$"/></transition>')
        else:
            out.append(f"      <transition id={quoteattr(t.name)}><name><text>{escape(t.label)}</text></name></transition>")
    for i, (s, d) in enumerate(sn.net.arcs):
        out.append(f"      <arc id=\"a{i}\" source={quoteattr(s)} target={quoteattr(d)}/>")
    out += ["    </page>", "  </net>", "</pnml>"]
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------

def flower_net(labels) -> SystemNet:
    """Net that accepts any sequence over ``labels`` (including the empty one)."""
    labels = sorted(set(labels))
    places = ["i", "hub", "o"]
    transitions = [("t_start", TAU)] + [(f"t_{a}", a) for a in labels] + [("t_end", TAU)]
    arcs = [("i", "t_start"), ("t_start", "hub"), ("hub", "t_end"), ("t_end", "o")]
    for a in labels:
        arcs += [("hub", f"t_{a}"), (f"t_{a}", "hub")]
    return SystemNet(PetriNet(places, transitions, arcs), "i", "o")


def sequence_net(labels) -> SystemNet:
    labels = list(labels)
    places = [f"p{i}" for i in range(len(labels) + 1)]
    transitions = [(f"t{i}", a) for i, a in enumerate(labels)]
    arcs = []
    for i in range(len(labels)):
        arcs += [(f"p{i}", f"t{i}"), (f"t{i}", f"p{i + 1}")]
    return SystemNet(PetriNet(places, transitions, arcs), places[0], places[-1])


def block_net(tree) -> SystemNet:
    """Build a sound, safe, free-choice net from a block-structured tree.

    ``tree`` is a label string, ``None`` for a silent step, or a tuple
    ``(op, child, ...)`` with ``op`` one of ``"seq"``, ``"xor"``, ``"and"``
    and ``"loop"`` (``("loop", body, redo)``).
    """
    places, transitions, arcs = ["i", "o"], [], []
    counter = itertools.count()

    def place():
        name = f"p{next(counter)}"
        places.append(name)
        return name

    def trans(label):
        name = f"t{next(counter)}" + ("" if label is None else f"_{label}")
        transitions.append((name, label))
        return name

    def build(node, entry, exit_):
        if node is None or isinstance(node, str):
            t = trans(node)
            arcs.extend([(entry, t), (t, exit_)])
            return
        op, *children = node
        if op == "seq":
            cur = entry
            for j, child in enumerate(children):
                nxt = exit_ if j == len(children) - 1 else place()
                build(child, cur, nxt)
                cur = nxt
        elif op == "xor":
            for child in children:
                build(child, entry, exit_)
        elif op == "and":
            split, join = trans(None), trans(None)
            arcs.extend([(entry, split), (join, exit_)])
            for child in children:
                a, b = place(), place()
                arcs.extend([(split, a), (b, join)])
                build(child, a, b)
        elif op == "loop":
            body, redo = children
            start, end = place(), place()
            t_in, t_out = trans(None), trans(None)
            arcs.extend([(entry, t_in), (t_in, start), (end, t_out), (t_out, exit_)])
            build(body, start, end)
            build(redo, end, start)
        else:
            raise ValueError(f"unknown operator {op!r}")

    build(tree, "i", "o")
    return SystemNet(PetriNet(places, transitions, arcs), "i", "o")
