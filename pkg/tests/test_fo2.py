import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfinterp.bisim import fo2_bisimilar
from gfinterp.fo2 import (ShrunkModelPair, check_shrink, decide_fo2_joint_consistency, is_scott_form,
                          reduce_arity, scott_expansion, scott_normal_form, shrink, size_bounds, swap_vars)
from gfinterp.instances import even_cycle_witnesses, triangle_definability
from gfinterp.semantics import (Evaluator, PointedStructure, SearchBudget, Structure, check_entailment_bounded,
                                enumerate_structures, holds_at)
from gfinterp.syntax import check_fragment, conj, neg, parse, signature_of
from helpers import random_fo2, random_structure

PHI, THETA, TAU = triangle_definability()


def test_swap_vars():
    assert swap_vars(parse("E y . R(x,y)")) == parse("E x . R(y,x)")


def test_scott_form_shape():
    assert is_scott_form(parse("(A(x) & A x . E y . R(x,y))"))
    chi = parse("(A(x) & A x . E y . (R(x,y) & E x . R(y,x)))")
    sc = scott_normal_form(chi, ["x"])
    assert is_scott_form(sc) and check_fragment(sc, "FO2").ok
    assert scott_normal_form(sc, ["x"]) == sc
    assert not is_scott_form(chi)


def test_scott_form_entails_and_expands_on_a_cycle():
    chi = parse("(A(x) & A x . E y . R(x,y))")
    sc = scott_normal_form(chi, ["x"])
    assert check_entailment_bounded(sc, chi, SearchBudget(3), ("x",)).holds
    s = Structure([0, 1, 2], {"R": [(0, 1), (1, 2), (2, 0)], "A": [(0,)]})
    e = scott_expansion(chi, s, (0,), ["x"])
    assert Evaluator(e)(sc, {"x": 0})


def test_size_bounds():
    b = size_bounds(3)
    assert b.log2_m == 16 and b.log2_k1 == 4 * 3 + 16 and b.log2_k2 == 3 * 3 + 2 * b.log2_k1
    with pytest.raises(ValueError):
        size_bounds(-1)


def test_reduce_arity_rewrites_ternary_atoms():
    red = reduce_arity(parse("E y . (G(x,y,x) & A(y))"), parse("E y . (G(x,y,x) & ~A(y))"), {"G"})
    sig = signature_of(red.phi) | signature_of(red.psi)
    assert max(sig.values()) <= 2 and "G" not in sig
    assert set(red.tau) == {"G_xyx"}
    s = Structure([0, 1], {"G": [(0, 1, 0)], "A": [(1,)]})
    lifted = red.lift(s)
    assert lifted.holds("G_xyx", (0, 1)) and "G" not in lifted.signature
    assert red.lower(lifted) == s


def test_reduce_arity_bridges_swapped_patterns():
    red = reduce_arity(parse("E y . G(x,y,y)"), parse("E y . G(y,x,x)"), {"G"})
    assert len(red.fresh) == 2
    # the lift of any structure satisfies the bridging axioms
    s = Structure([0, 1], {"G": [(0, 1, 1), (1, 0, 0)]})
    assert Evaluator(red.lift(s))(red.axioms["G"], {})


def test_shrink_even_cycle_witnesses():
    phi, chi = conj(PHI, THETA), conj(PHI, neg(THETA))
    left, right = even_cycle_witnesses(2)
    pair = shrink(left, right, TAU, phi, chi)
    assert check_shrink(pair, TAU, phi, chi, ("x",)) == []
    assert holds_at(pair.left, phi, ("x",)) and holds_at(pair.right, chi, ("x",))
    assert fo2_bisimilar(pair.left, pair.right, TAU)


def test_shrink_rejects_non_bisimilar():
    l1, r1 = even_cycle_witnesses(1)
    with pytest.raises(ValueError):
        shrink(l1, r1, TAU)


def test_check_shrink_reports_broken_output():
    left, right = even_cycle_witnesses(2)
    pair = shrink(left, right, TAU)
    s = pair.right.structure
    broken = Structure(s.domain, {n: () if n == "R" else s.relations[n] for n in s.signature}, s.signature)
    bad = ShrunkModelPair(pair.left, PointedStructure(broken, pair.right.point), pair.provenance,
                          pair.table, pair.counts)
    assert check_shrink(bad, TAU)


def test_decide_fo2_small():
    v = decide_fo2_joint_consistency(parse("E y . (R(x,y) & A(y))"), parse("E y . (R(x,y) & ~A(y))"),
                                     {"R"}, SearchBudget(3))
    assert v.outcome == "CONSISTENT" and fo2_bisimilar(*v.pair, ("R",))
    v = decide_fo2_joint_consistency(parse("A(x)"), parse("~A(x)"), {"A"}, SearchBudget(2))
    assert v.outcome == "INCONSISTENT" and v.interpolant is not None


SMALL = [st_ for k in range(1, 4) for st_ in enumerate_structures({"R": 2, "A": 1}, k, iso_prune=True)]


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_scott_form_property(seed):
    rng = random.Random(seed)
    f = random_fo2(rng, {"R": 2, "A": 1}, 3)
    sc = scott_normal_form(f, ["x"])
    assert is_scott_form(sc) and check_fragment(sc, "FO2").ok
    assert check_entailment_bounded(sc, f, SearchBudget(3), ("x",)).holds
    for s in SMALL[::7]:
        ev = Evaluator(s)
        for a in s.domain:
            if ev(f, {"x": a}):
                assert Evaluator(scott_expansion(f, s, (a,), ["x"]))(sc, {"x": a})


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_shrink_random_bisimilar_pairs(seed):
    rng = random.Random(seed)
    sig = {"R": 2, "A": 1}
    A = random_structure(rng, sig, rng.randint(1, 4))
    B = random_structure(rng, sig, rng.randint(1, 4))
    tau = ["R"] if rng.random() < 0.5 else ["A", "R"]
    for a, b in itertools.product(A.domain, B.domain):
        pa, pb = PointedStructure(A, (a,)), PointedStructure(B, (b,))
        if fo2_bisimilar(pa, pb, tau):
            pair = shrink(pa, pb, tau)
            assert check_shrink(pair, tau) == []
            return
