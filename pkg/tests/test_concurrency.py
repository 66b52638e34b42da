import json
import random
from fractions import Fraction

import numpy as np
import pytest

from patgen import _kernels
from patgen.concurrency import (ConcurrencyRelation, OracleError, alpha_oracle, alpha_plus_oracle,
                                directly_follows, explicit_oracle, filter_df, isomorphic,
                                to_partial_order, unique_partial_orders)
from patgen.eventlog import EventLog

from oracles import isomorphic_brute, random_po

T = tuple


def test_df_counts(running_log):
    assert directly_follows(EventLog({T("AB"): 3})).count("A", "B") == 3
    st = directly_follows(running_log)
    assert st.count("X", "A") > 0 and st.count("A", "X") > 0
    assert directly_follows(EventLog()).counts == {}


def test_filter_zero_keeps_everything(running_log):
    st = directly_follows(running_log)
    assert filter_df(st, 0).relation == st.relation


def test_filter_one_single_successor():
    # x -> y only, y has another predecessor; threshold reaches dfC(x, y)
    st = directly_follows(EventLog({T("XY"): 4, T("ZY"): 2}))
    assert not filter_df(st, 1).df("X", "Y")


def _eq1_reference(log, eps):
    """Threshold rule evaluated directly from the traces, pair by pair."""
    labels = sorted(log.alphabet())

    def dfc(x, y):
        return sum(c for t, c in log.items() for i in range(len(t) - 1) if t[i] == x and t[i + 1] == y)

    keep = set()
    for x in labels:
        for y in labels:
            c = dfc(x, y)
            if c == 0:
                continue
            outs = sum(dfc(x, z) for z in labels if z != x)
            ins = sum(dfc(z, y) for z in labels if z != y)
            if c > Fraction(eps) * Fraction(outs + ins, 2):
                keep.add((x, y))
    return keep


@pytest.mark.parametrize("eps", ["0.05", "0.3", "0.5", "1"])
def test_filter_matches_reference(running_log, eps):
    assert set(filter_df(directly_follows(running_log), Fraction(eps)).relation) == _eq1_reference(running_log, eps)


def test_filter_rejects_out_of_range():
    with pytest.raises(ValueError):
        filter_df(directly_follows(EventLog()), 1.5)
    with pytest.raises(ValueError):
        filter_df(directly_follows(EventLog()), -0.1)


def test_alpha(running_log):
    assert ("A", "X") in alpha_oracle(directly_follows(running_log)).pairs
    assert alpha_oracle(directly_follows(EventLog({T("AB"): 1}))).pairs == set()
    assert alpha_oracle(directly_follows(EventLog({T("AB"): 1, T("BA"): 1}))).pairs == {("A", "B")}


def test_alpha_plus(running_log):
    st = directly_follows(running_log)
    assert alpha_plus_oracle(running_log, st).pairs == {("A", "B"), ("A", "C"), ("B", "C")}
    assert alpha_plus_oracle(running_log, st).pairs <= alpha_oracle(st).pairs
    log = EventLog({T("ABA"): 1})
    assert alpha_plus_oracle(log, directly_follows(log)).pairs == set()
    log = EventLog({T("AB"): 1, T("BA"): 1})
    assert alpha_plus_oracle(log, directly_follows(log)).pairs == {("A", "B")}


def test_relation_symmetric_and_sentinel(running_log):
    rel = alpha_plus_oracle(running_log, directly_follows(running_log))
    for x in "XABC":
        assert not rel.labels_concurrent(x, None)
        for y in "XABC":
            assert rel.labels_concurrent(x, y) == rel.labels_concurrent(y, x)


def test_explicit_oracle(local_oracle_path, running_log):
    rel = explicit_oracle(local_oracle_path, running_log)
    assert rel.concurrent(T("XABC"), 3, 4)
    assert not rel.concurrent(T("XABC"), 2, 3)
    assert all(rel.concurrent(T("ABC"), i, j) for i, j in [(1, 2), (1, 3), (2, 3)])
    empty = explicit_oracle({})
    assert not empty.concurrent(T("AB"), 1, 2)


def test_explicit_oracle_errors():
    with pytest.raises(OracleError, match="out of range"):
        explicit_oracle({"traces": [{"trace": ["A", "B"], "pairs": [[1, 3]]}]})
    with pytest.raises(OracleError, match="itself"):
        explicit_oracle({"traces": [{"trace": ["A", "B"], "pairs": [[2, 2]]}]})
    with pytest.raises(OracleError, match="JSON"):
        explicit_oracle("{not json")


def test_explicit_oracle_unknown_trace_warns():
    with pytest.warns(UserWarning, match="does not occur"):
        rel = explicit_oracle(json.dumps({"traces": [{"trace": ["Q"], "pairs": []}]}), EventLog({T("A"): 1}))
    assert rel.warnings


def test_po_trace1_alpha_plus(running_log):
    rel = alpha_plus_oracle(running_log, directly_follows(running_log))
    po = to_partial_order(T("XABC"), rel)
    assert sorted(po.arcs()) == [(0, 1), (1, 2), (1, 3), (1, 4), (2, 5), (3, 5), (4, 5)]
    assert isomorphic(po, to_partial_order(T("XACB"), rel))


def test_po_chain_without_concurrency():
    po = to_partial_order(T("ABC"), ConcurrencyRelation())
    assert po.arcs() == [(0, 1), (1, 2), (2, 3), (3, 4)]


def test_unique_partial_orders_local(running_log, local_oracle_path):
    rel = explicit_oracle(local_oracle_path, running_log)
    sub = EventLog({t: running_log[t] for t in [T("XABC"), T("XACB")]})
    assert list(unique_partial_orders(sub, rel).values()) == [2000]
    sub = EventLog({t: running_log[t] for t in [T("ABC"), T("BAC"), T("CAB")]})
    assert list(unique_partial_orders(sub, rel).values()) == [600]
    assert list(unique_partial_orders(EventLog({T("AB"): 9}), rel).values()) == [9]


def _order_checks(po):
    n = len(po.labels)
    o = po.order
    assert not o.diagonal().any()
    assert not (o & o.T).any()
    assert ((o.astype(int) @ o.astype(int) > 0) <= o).all()
    assert o[0, 1:].all() and o[:-1, -1].all()


def test_po_axioms_random():
    rng = random.Random(3)
    for _ in range(120):
        n = rng.randint(0, 10)
        t = tuple(rng.choice("ABC") for _ in range(n))
        pairs = {(i, j) for i in range(1, n + 1) for j in range(i + 1, n + 1) if rng.random() < 0.4}
        rel = ConcurrencyRelation(local={t: frozenset(pairs)})
        po = to_partial_order(t, rel)
        _order_checks(po)
        back = _kernels.transitive_closure(po.cover)
        assert (back == po.order).all()


def test_canonical_form_agrees_with_brute_force():
    rng = random.Random(11)
    pos = [random_po(rng, rng.randint(1, 6), labels="AB", density=rng.choice([0.2, 0.5])) for _ in range(60)]
    for a in pos:
        for b in pos:
            if len(a.labels) == len(b.labels):
                assert isomorphic(a, b) == isomorphic_brute(a, b)


def test_canonical_form_on_symmetric_orders():
    # equal labels in symmetric shapes force individualisation
    rng = random.Random(5)
    for _ in range(40):
        a = random_po(rng, 6, labels="A", density=0.3)
        perm = [0] + rng.sample(range(1, 7), 6) + [7]
        b_order = a.order[np.ix_(perm, perm)]
        from patgen.concurrency import PartialOrder
        b = PartialOrder(a.labels, b_order)
        assert isomorphic(a, b)
