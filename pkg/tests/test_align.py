import random

import pytest

from patgen.align import (LH, MT, RH, Alignment, AlignmentError, AlignmentTimeout, Step, align,
                          brute_force_align, cost, is_proper, trace_projection)
from patgen.petri import PetriNet, SystemNet, block_net, sequence_net

from oracles import random_net, random_trace

T = tuple


def ops(a):
    return [(s.op, s.label) for s in a.steps]


def test_perfect_trace(running_net):
    a = align(T("XABC"), running_net)
    assert ops(a) == [(MT, "X"), (MT, "A"), (MT, "B"), (MT, "C")]
    assert a.cost == 0 and is_proper(a, T("XABC"), running_net)


def test_extended_short_loop_trace(running_net):
    t = T("XA" * 6 + "CB")
    a = align(t, running_net)
    assert ops(a) == [(MT, "X"), (LH, "A")] * 5 + [(MT, "X"), (MT, "A"), (MT, "C"), (MT, "B")]
    assert a.cost == 5
    assert "".join(s.op[0] for s in trace_projection(a)) == "MLMLMLMLMLMMMM"


def test_bac(running_net):
    a = align(T("BAC"), running_net)
    assert ops(a) == [(MT, "B"), (LH, "A"), (MT, "C")]
    assert a.cost == 1


@pytest.mark.parametrize("trace,g", [("XABC", 0), ("XACB", 0), ("ABC", 0), ("ACB", 0), ("BC", 0),
                                     ("BAC", 1), ("BCA", 1), ("CAB", 1), ("CBA", 1)])
def test_running_net_language(running_net, trace, g):
    assert align(T(trace), running_net).cost == g


def test_cost_function():
    a = Alignment(tuple(Step(MT, x) for x in "ABCD"), 0)
    assert cost(a) == 0
    assert cost(Alignment((Step(LH, "A"), Step(RH, "B"), Step(MT, "C")), 2)) == 2


def test_cost_of_published_row7_alignment(running_net):
    # (MT X, MT X, LH A) x 8, MT X, MT X, MT A, LH X, MT B, MT C
    steps = [Step(MT, "X"), Step(MT, "X"), Step(LH, "A")] * 8 + [
        Step(MT, "X"), Step(MT, "X"), Step(MT, "A"), Step(LH, "X"), Step(MT, "B"), Step(MT, "C")]
    assert cost(Alignment(tuple(steps), 9)) == 9
    assert align(T("XXA" * 9 + "XBC"), running_net).cost == 9


def test_empty_trace_all_model_moves():
    sn = sequence_net("ABC")
    a = align((), sn)
    assert a.cost == 3 and all(s.op == RH for s in a.steps)
    assert trace_projection(a) == []


def test_sequence_net_insertion():
    sn = sequence_net("AB")
    assert align(T("AB"), sn).cost == 0
    a = align(T("ACB"), sn)
    assert ops(a) == [(MT, "A"), (LH, "C"), (MT, "B")]
    assert brute_force_align(T("ACB"), sn).cost == 1


def test_label_outside_alphabet(running_net):
    a = align(T("XZABC"), running_net)
    assert a.cost == 1 and (LH, "Z") in ops(a)


def test_unreachable_final_marking():
    net = PetriNet(["i", "p", "o"], [("a", "A")], [("i", "a"), ("a", "p")])
    with pytest.raises(AlignmentError, match="unreachable"):
        align(T("A"), SystemNet(net, "i", "o"))


def test_step_budget(running_net):
    with pytest.raises(AlignmentTimeout):
        align(T("XA" * 30), running_net, max_states=10)


def test_brute_force_bound_error():
    with pytest.raises(AlignmentError):
        brute_force_align(T("A"), sequence_net("ABC"), bound=1)


def test_deterministic(running_net):
    t = T("XXAXXAXBC" * 2)
    assert align(t, running_net) == align(t, running_net)


def test_matches_brute_force_random(jit):
    rng = random.Random(2024)
    for _ in range(200):
        sn = random_net(rng)
        alphabet = sorted(sn.alphabet) + ["Z"]
        t = random_trace(rng, alphabet, 12)
        a = align(t, sn)
        b = brute_force_align(t, sn, jit=jit)
        assert a.cost == b.cost, (t, sn)
        assert is_proper(a, t, sn) and is_proper(b, t, sn)
