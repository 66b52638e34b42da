"""Aggregation of pattern fulfilments into generalization scores.

All arithmetic is exact (``fractions.Fraction``); values are rendered to six
decimals with round-half-even only when a report is serialized.
"""
from __future__ import annotations

import csv
import io
import json
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from decimal import ROUND_HALF_EVEN, Decimal
from fractions import Fraction
from typing import Optional

from .align import AlignmentTimeout, align
from .concurrency import (ConcurrencyRelation, alpha_oracle, alpha_plus_oracle,
                          directly_follows, explicit_oracle, filter_df)
from .eventlog import EventLog
from .patterns import (DEFAULT_CAP, define_repetitive_patterns,
                       representative_traces_and_patterns, score_concurrent_patterns)
from .petri import SystemNet
from .tandem import extend_log, reduce_log

PHASES = ("tandem", "repetitive", "oracle", "partial-orders", "concurrent", "aggregate")


def aggregate(patterns) -> Fraction:
    """Count-weighted mean of pattern fulfilments; 1 for no patterns."""
    total = 0
    acc = Fraction(0)
    for p in patterns:
        if p.pf is None:
            raise ValueError("pattern fulfilment not computed")
        acc += p.pf * p.weight
        total += p.weight
    return acc / total if total else Fraction(1)


def render(value: Optional[Fraction], digits: int = 6) -> str:
    if value is None:
        return "n/a"
    q = Decimal(value.numerator) / Decimal(value.denominator)
    return str(q.quantize(Decimal(1).scaleb(-digits), rounding=ROUND_HALF_EVEN))


@dataclass
class Config:
    oracle: object = "alpha-plus"  # "alpha", "alpha-plus", "explicit:<path>" or a ConcurrencyRelation
    df_filter: Fraction = Fraction(0)
    matching: str = "interleavings"
    cap: int = DEFAULT_CAP
    timeout: Optional[float] = None
    threads: int = 1

    def __post_init__(self):
        eps = Fraction(str(self.df_filter)) if isinstance(self.df_filter, float) else Fraction(self.df_filter)
        if not 0 <= eps <= 1:
            raise ValueError(f"df filter must lie in [0, 1], got {self.df_filter}")
        self.df_filter = eps
        if self.matching not in ("partial", "interleavings"):
            raise ValueError(f"matching must be 'partial' or 'interleavings', got {self.matching!r}")
        if int(self.cap) < 1:
            raise ValueError("linearization cap must be at least 1")
        if self.timeout is not None and self.timeout < 1:
            raise ValueError("timeout must be at least 1 second")
        if int(self.threads) < 1:
            raise ValueError("thread count must be at least 1")

    def oracle_name(self) -> str:
        if isinstance(self.oracle, ConcurrencyRelation):
            return self.oracle.name
        return str(self.oracle)


@dataclass
class GeneralizationReport:
    g_pattern: Fraction
    g_rep: Optional[Fraction]
    g_conc: Optional[Fraction]
    total_weight: int
    rep_weight: int
    conc_weight: int
    rows: list
    config: dict
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "g_pattern": render(self.g_pattern),
            "g_rep": render(self.g_rep),
            "g_conc": render(self.g_conc),
            "exact": {k: (None if v is None else str(v)) for k, v in
                      (("g_pattern", self.g_pattern), ("g_rep", self.g_rep), ("g_conc", self.g_conc))},
            "weights": {"total": self.total_weight, "repetitive": self.rep_weight,
                        "concurrent": self.conc_weight},
            "config": self.config,
            "diagnostics": self.diagnostics,
            "patterns": self.rows,
        }


class PipelineError(RuntimeError):
    """A phase failed; ``partial`` lists what had completed."""

    def __init__(self, phase: str, cause: BaseException, partial: dict):
        self.phase = phase
        self.cause = cause
        self.partial = partial
        super().__init__(f"phase '{phase}' failed: {cause}")


class PipelineTimeout(PipelineError):
    pass


def build_oracle(log: EventLog, config: Config) -> ConcurrencyRelation:
    sel = config.oracle
    if isinstance(sel, ConcurrencyRelation):
        return sel
    if sel in ("alpha", "alpha-plus"):
        stats = filter_df(directly_follows(log), config.df_filter)
        return alpha_oracle(stats) if sel == "alpha" else alpha_plus_oracle(log, stats)
    if isinstance(sel, str) and sel.startswith("explicit:"):
        return explicit_oracle(sel[len("explicit:"):], log)
    raise ValueError(f"unknown oracle {sel!r}")


def _label_seq(trace) -> str:
    return ",".join(trace)


def generalization(log: EventLog, sn: SystemNet, config: Config | None = None,
                   diagnostics: dict | None = None) -> GeneralizationReport:
    """Run every phase and assemble the report.

    ``diagnostics``, when given, is filled in place as phases complete so a
    caller can still report progress if the run is abandoned.
    """
    config = config or Config()
    deadline = None if config.timeout is None else time.monotonic() + config.timeout
    cache: dict = {}

    def tick():
        if deadline is not None and time.monotonic() > deadline:
            raise AlignmentTimeout("deadline reached")

    def align_fn(trace, net):
        return align(trace, net, deadline=deadline)

    done: list = []
    diagnostics = {} if diagnostics is None else diagnostics
    diagnostics["completed_phases"] = done

    def phase(name, fn):
        if deadline is not None and time.monotonic() > deadline:
            raise PipelineTimeout(name, TimeoutError("deadline reached"), diagnostics)
        try:
            result = fn()
        except AlignmentTimeout as exc:
            raise PipelineTimeout(name, exc, diagnostics) from exc
        except PipelineError:
            raise
        except Exception as exc:
            raise PipelineError(name, exc, diagnostics) from exc
        done.append(name)
        return result

    def prealign(traces):
        todo = [t for t in dict.fromkeys(traces) if t not in cache]
        if config.threads > 1 and len(todo) > 1:
            with ThreadPoolExecutor(config.threads) as pool:
                for t, a in zip(todo, pool.map(lambda t: align_fn(t, sn), todo)):
                    cache[t] = a
        else:
            for t in todo:
                cache[t] = align_fn(t, sn)

    extended = phase("tandem", lambda: extend_log(reduce_log(log, tick=tick)))

    def repetitive():
        prealign(list(extended))
        return define_repetitive_patterns(extended, sn, cache=cache, align_fn=align_fn)

    rep_map = phase("repetitive", repetitive)
    rep_patterns = [p for et in extended for p in rep_map[et]]

    oracle = phase("oracle", lambda: build_oracle(log, config))
    diagnostics["concurrency_pairs"] = [list(p) for p in oracle.sorted_pairs()]
    if oracle.warnings:
        diagnostics["oracle_warnings"] = list(oracle.warnings)

    analyses = phase("partial-orders",
                     lambda: representative_traces_and_patterns(log, oracle, cap=config.cap, strict=False,
                                                                tick=tick))
    capped = [an.error for an in analyses if an.error]
    diagnostics["capped_partial_orders"] = capped
    diagnostics["partial_order_classes"] = len(analyses)

    def concurrent():
        prealign([t for an in analyses if an.patterns for t in an.traces])
        score_concurrent_patterns(analyses, sn, config.matching, cache=cache, align_fn=align_fn)

    phase("concurrent", concurrent)
    conc_patterns = [p for an in analyses for p in an.patterns]

    def finish():
        g_all = aggregate(rep_patterns + conc_patterns)
        g_rep = aggregate(rep_patterns) if rep_patterns else None
        g_conc = aggregate(conc_patterns) if conc_patterns else None
        return g_all, g_rep, g_conc

    g_all, g_rep, g_conc = phase("aggregate", finish)

    rows = []
    for p in rep_patterns:
        rows.append({"type": "repetitive", "trace": _label_seq(p.trace),
                     "repeat_type": _label_seq(p.repeat_type), "positions": list(p.positions),
                     "repetitions": p.repetitions, "weight": p.weight,
                     "pf": render(p.pf), "pf_exact": str(p.pf)})
    for an in analyses:
        for p in an.patterns:
            rows.append({"type": "concurrent", "trace": _label_seq(an.po.trace),
                         "partial_order": an.po.describe(), "representatives": len(an.traces),
                         "positions": list(p.positions), "weight": p.weight,
                         "pf": render(p.pf), "pf_exact": str(p.pf),
                         "pf_partial": str(p.partial), "pf_interleavings": str(p.interleavings)})
    rep_w = sum(p.weight for p in rep_patterns)
    conc_w = sum(p.weight for p in conc_patterns)
    cfg = {"oracle": config.oracle_name(), "df_filter": str(config.df_filter),
           "matching": config.matching, "cap": config.cap}
    return GeneralizationReport(g_all, g_rep, g_conc, rep_w + conc_w, rep_w, conc_w, rows, cfg, diagnostics)


# ---------------------------------------------------------------------------
# serializers
# ---------------------------------------------------------------------------

def to_json(report: GeneralizationReport, breakdown: bool = True) -> str:
    data = report.to_dict()
    if not breakdown:
        data.pop("patterns")
    return json.dumps(data, indent=2) + "\n"


CSV_FIELDS = ("type", "trace", "repeat_type", "positions", "repetitions", "weight", "pf", "pf_exact")


def to_csv(report: GeneralizationReport, breakdown: bool = True) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_FIELDS)
    for row in report.rows if breakdown else []:
        w.writerow([" ".join(map(str, row.get(k, ""))) if k == "positions" else row.get(k, "")
                    for k in CSV_FIELDS])
    w.writerow(["total", "", "", "", "", report.total_weight, render(report.g_pattern), str(report.g_pattern)])
    return buf.getvalue()


def to_text(report: GeneralizationReport, breakdown: bool = False) -> str:
    lines = [
        f"G_pattern  {render(report.g_pattern)}  (weight {report.total_weight})",
        f"G_rep      {render(report.g_rep)}  (weight {report.rep_weight})",
        f"G_conc     {render(report.g_conc)}  (weight {report.conc_weight})",
        f"oracle {report.config['oracle']}, df filter {report.config['df_filter']}, "
        f"matching {report.config['matching']}",
    ]
    capped = report.diagnostics.get("capped_partial_orders")
    if capped:
        lines.append(f"{len(capped)} partial order(s) skipped over the linearization cap")
    if breakdown:
        for row in report.rows:
            pos = "{" + ",".join(map(str, row["positions"])) + "}"
            extra = f" k={row['repetitions']}" if row["type"] == "repetitive" else ""
            lines.append(f"  {row['type']:<10} {row['trace']:<30} {pos:<12}{extra} "
                         f"#t={row['weight']} pf={row['pf_exact']}")
    return "\n".join(lines) + "\n"


def default_threads() -> int:
    raw = os.environ.get("PATGEN_THREADS", "").strip()
    if not raw:
        return 1
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"PATGEN_THREADS must be an integer, got {raw!r}") from None
