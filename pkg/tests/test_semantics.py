import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfinterp.instances import odd_cycle_models, odd_cycle_pair
from gfinterp.semantics import (Evaluator, SearchBudget, Structure, check_entailment_bounded,
                                count_structures, disjoint_union, enumerate_structures, eval, find_model,
                                parse_structure, restrict, to_structure_text)
from gfinterp.syntax import conj, free_vars, neg, parse
from helpers import random_gf, random_structure

PHI, PSI = odd_cycle_pair()
TRI, HEX = odd_cycle_models()


def test_eval_on_triangle_and_hexagon():
    assert eval(TRI, {"x": "a"}, PHI)
    assert eval(TRI, {"x": "a"}, parse("x=x"))
    for a in ("b", "h1", "h3"):
        assert eval(HEX, {"x": a}, PSI)
    assert not eval(HEX, {"x": "d"}, PSI)


def test_eval_errors():
    with pytest.raises((KeyError, ValueError)):
        eval(TRI, {}, parse("R(x,y)"))


def test_restrict():
    assert restrict(TRI, TRI.domain) == TRI
    single = restrict(TRI, ["a"])
    assert not single.relations["R"]
    ac = restrict(TRI, ["a", "c"])
    assert ac.relations["R"] == {("a", "c")}
    with pytest.raises(ValueError):
        restrict(TRI, [])


def test_enumerate_counts():
    assert sum(1 for _ in enumerate_structures({"A": 1}, 1)) == 2
    assert sum(1 for _ in enumerate_structures({"R": 2}, 1)) == 2
    assert sum(1 for _ in enumerate_structures({"A": 1, "R": 2}, 2)) == 64
    # directed graphs with loops on three nodes up to isomorphism
    assert sum(1 for _ in enumerate_structures({"R": 2}, 3, iso_prune=True)) == 104
    for sig, k in (({"A": 1, "B": 1}, 3), ({"R": 2}, 2), ({"G": 3}, 1)):
        assert sum(1 for _ in enumerate_structures(sig, k)) == count_structures(sig, k)


def test_find_model():
    r = find_model(parse("A(x)"), SearchBudget(3))
    assert r.found and len(r.witness.structure) == 1
    assert find_model(parse("(A(x) & ~A(x))"), SearchBudget(3)).status == "EXHAUSTED"
    # brute force: the smallest model of psi is a single A-element without edges
    for method in ("sat", "enumerate"):
        r = find_model(PSI, SearchBudget(3), method=method)
        assert r.found and r.sizes_done == 1
    r = find_model(conj(PSI, parse("E y . R(x,y)")), SearchBudget(3), method="enumerate")
    assert r.sizes_done == 2


def test_find_model_timeout_is_unknown():
    f = parse("(A(x) & ~A(x))")
    r = find_model(f, SearchBudget(6, max_candidates=5), method="enumerate")
    assert r.status == "UNKNOWN"


def test_entailment():
    r = check_entailment_bounded(PHI, neg(PSI), SearchBudget(6))
    assert r.status == "HOLDS_UP_TO_BUDGET" and r.max_size == 6
    assert check_entailment_bounded(parse("A(x)"), parse("A(x)"), SearchBudget(3)).holds
    r = check_entailment_bounded(parse("A(x)"), parse("B(x)"), SearchBudget(3))
    assert r.status == "COUNTERMODEL" and len(r.countermodel.structure) == 1


def test_structure_text_roundtrip():
    text = "dom: a b c\nR: (a,b) (b,c)\nA: a c\npoint: a,c\n"
    ps = parse_structure(text)
    assert ps.point == ("a", "c") and ps.structure.holds("R", ("b", "c"))
    again = parse_structure(to_structure_text(ps))
    assert again.structure == ps.structure and again.point == ps.point
    with pytest.raises(ValueError):
        parse_structure("R: (a,b)")
    with pytest.raises(ValueError):
        Structure([1], {"R": [(1, 2)]})


def test_disjoint_union():
    u, maps = disjoint_union(TRI, HEX, tags=("t", "h"))
    assert len(u) == 9
    assert u.holds("R", (maps[0]["a"], maps[0]["c"]))
    assert eval(u, {"x": maps[0]["a"]}, PHI)
    # the triangle breaks the global two-colouring part of psi
    assert not eval(u, {"x": maps[1]["b"]}, PSI)


SIGS = [{"A": 1, "R": 2}, {"A": 1, "B": 1, "G": 3}, {"R": 2, "S": 2}]


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(SIGS), st.integers(1, 4))
def test_eval_invariant_under_isomorphism(seed, sig, n):
    rng = random.Random(seed)
    f = random_gf(rng, sig, ["x"], 3)
    s = random_structure(rng, sig, n)
    perm = list(s.domain)
    rng.shuffle(perm)
    m = {a: f"e{b}" for a, b in zip(s.domain, perm)}
    t = s.rename(m)
    ev, ev2 = Evaluator(s), Evaluator(t)
    for a in s.domain:
        assert ev(f, {"x": a}) == ev2(f, {"x": m[a]})


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(SIGS))
def test_sat_and_enumeration_agree(seed, sig):
    f = random_gf(random.Random(seed), sig, ["x"], 2)
    a = find_model(f, SearchBudget(2), method="sat")
    b = find_model(f, SearchBudget(2), method="enumerate")
    assert a.status == b.status and a.sizes_done == b.sizes_done
    if a.found:
        w = a.witness
        assert Evaluator(w.structure)(f, dict(zip(sorted(free_vars(f)), w.point)))
