import random

from hypothesis import given, settings
from hypothesis import strategies as st

from gfinterp.bisim import gf_bisimilar, verify_certificate
from gfinterp.instances import cycle, odd_cycle_pair, triangle
from gfinterp.oracle import (FormulaEnumerator, cyclic_lift, enumerate_interpolants, fact_count, lifts,
                             search_model_pair)
from gfinterp.semantics import PointedStructure, SearchBudget, check_entailment_bounded, holds_at
from gfinterp.syntax import Signature, check_fragment, neg, parse, to_text

PHI, PSI = odd_cycle_pair()


def test_cyclic_lift_of_triangle_is_hexagon():
    tri = triangle()
    hexagon = cyclic_lift(tri, 2, (1, 1, 1))
    assert len(hexagon) == 6 and fact_count(hexagon) == 6
    assert gf_bisimilar(PointedStructure(hexagon, ((0, 0),)), PointedStructure(cycle(6), (0,)), {"R"})
    for s in lifts(tri):
        assert gf_bisimilar(PointedStructure(s, ((0, 0),)), PointedStructure(tri, (0,)), {"R"})


def test_enumerator_sizes():
    fs = list(FormulaEnumerator(Signature({"A": 1}), "GF").formulas(("x",), 3))
    assert [to_text(f) for f in fs] == ["true", "false", "A(x)", "~A(x)", "E y . A(y)", "~E y . A(y)"]
    assert len(FormulaEnumerator(Signature({"R": 2}), "FO2").of_size(1, frozenset("xy"))) == 5


def test_enumerated_formulas_stay_in_fragment():
    for logic in ("GF", "FO2"):
        en = FormulaEnumerator(Signature({"R": 2, "A": 1}), logic)
        for f in en.formulas(("x",), 4):
            assert check_fragment(f, logic).ok


def test_interpolant_enumeration():
    r = enumerate_interpolants(parse("(A(x) & B(x))"), parse("(A(x) | C(x))"), ["A"], 3, SearchBudget(3))
    assert r.formula == parse("A(x)")
    assert [t[1] for t in r.transcripts] == ["HOLDS_UP_TO_BUDGET"] * 2
    r = enumerate_interpolants(parse("A(x)"), parse("B(x)"), ["A", "B"], 3, SearchBudget(2))
    assert r.formula is None


def test_model_pair_for_odd_cycles():
    p = search_model_pair(PHI, neg(PSI), ["R"], "GF", SearchBudget(4))
    assert p.found
    assert holds_at(p.left, PHI, ("x",)) and holds_at(p.right, neg(PSI), ("x",))
    assert verify_certificate(p.certificate, p.left, p.right, ["R"])


def test_model_pair_exhausts_when_inconsistent():
    p = search_model_pair(parse("A(x)"), parse("~A(x)"), ["A"], "GF", SearchBudget(3), enumerate_up_to=2)
    assert p.status == "NOT_FOUND"


def test_model_pair_uses_witnesses():
    left = PointedStructure(triangle({"B": range(3)}), (0,))
    right = PointedStructure(cycle(6, {"B": ()}), (0,))
    p = search_model_pair(parse("E y . (R(x,y) & B(y))"), parse("E y . R(x,y)"), ["R"], "GF",
                          SearchBudget(1), witnesses=[(left, right)])
    assert p.found and p.stats["tier"] == "witness"
    assert verify_certificate(p.certificate, p.left, p.right, ["R"])


UNARY = ["A(x)", "B(x)", "~A(x)", "(A(x) & B(x))", "(A(x) | B(x))", "E y . A(y)", "A y . (y=y -> B(y))"]


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_found_interpolants_are_sandwiched(seed):
    rng = random.Random(seed)
    phi, psi = parse(rng.choice(UNARY)), parse(rng.choice(UNARY))
    tau = sorted(rng.sample(["A", "B"], rng.randint(1, 2)))
    r = enumerate_interpolants(phi, psi, tau, 3, SearchBudget(2))
    if r.formula is not None:
        assert check_entailment_bounded(phi, r.formula, SearchBudget(3), ("x",)).holds
        assert check_entailment_bounded(r.formula, psi, SearchBudget(3), ("x",)).holds
        p = search_model_pair(phi, neg(psi), tau, "GF", SearchBudget(3), enumerate_up_to=2)
        assert not p.found
