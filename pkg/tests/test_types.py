import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfinterp.bisim import GuardedColouring, guarded_sets
from gfinterp.instances import odd_cycle_models, odd_cycle_pair
from gfinterp.semantics import Evaluator, SearchBudget
from gfinterp.syntax import parse
from gfinterp.types import (Closure, TypeComputer, XiType, build_universe, exactness_threshold, instantiate,
                            is_coherent, restrict_type, tp)
from helpers import random_gf, random_structure

PHI, PSI = odd_cycle_pair()
TRI, HEX = odd_cycle_models()


def test_closure_width_and_pool():
    c = Closure(PHI, PSI)
    assert c.width == 3 and c.n == 3
    assert c.pool == tuple(f"x{i}" for i in range(1, 7))
    u = Closure(parse("A(x)"), parse("B(x)"))
    assert u.n == 1 and u.pool == ("x1", "x2")
    texts = {str(t.formula) for t in u.templates}
    assert {"A(f0)", "B(f0)", "E b0 . A(b0)", "E b0 . B(b0)"} <= texts


def test_closure_rejects_unguarded_and_stray_variables():
    with pytest.raises(ValueError):
        Closure(parse("E y . (A(x) & A(y))"))
    with pytest.raises(ValueError):
        Closure(parse("R(x,y)"), xs=["x"])


def test_instantiate_pool_only():
    c = Closure(parse("A(x)"), parse("B(x)"))
    fs = instantiate(c, ["x1"])
    assert parse("A(x1)") in fs and parse("B(x1)") in fs
    with pytest.raises(ValueError):
        instantiate(c, ["y"])


def test_triangle_type_contains_guard_and_edges():
    c = Closure(PHI, PSI)
    t = TypeComputer(c, TRI).tp(["x1", "x2", "x3"], "ace")
    for f in ("G(x1,x2,x3)", "R(x1,x2)", "R(x2,x3)", "R(x3,x1)"):
        inst, pol = c.instance_of(parse(f))
        assert pol and inst in t.members
    inst, _ = c.instance_of(parse("R(x2,x1)"))
    assert inst not in t.members
    assert is_coherent(c, t)


def test_type_errors():
    c = Closure(PHI, PSI)
    tc = TypeComputer(c, TRI)
    with pytest.raises(ValueError):
        tc.tp(["x1", "x2"], ["a", "a"])
    with pytest.raises(ValueError):
        restrict_type(tc.tp(["x1"], ["a"]), ["x2"])


def test_restriction_matches_subtuple():
    c = Closure(PHI, PSI)
    tc = TypeComputer(c, HEX)
    for a, b in itertools.permutations(HEX.domain, 2):
        t = tc.tp(["x1", "x2"], [a, b])
        assert t.restrict(["x1"]) == tc.tp(["x1"], [a])
        assert t.restrict(["x2"]) == tc.tp(["x2"], [b])
        assert t.restrict([]) == tc.tp([], [])


def test_types_are_interned_and_renamable():
    c = Closure(PHI, PSI)
    t = tp(c, TRI, {"x1": "a", "x2": "c"})
    assert t is tp(c, TRI, {"x1": "a", "x2": "c"})
    swapped = t.rename({"x1": "x2", "x2": "x1"})
    assert swapped == tp(c, TRI, {"x2": "a", "x1": "c"})
    assert XiType(t.vars, t.members) is t


def test_universe_counts_for_two_unary_predicates():
    c = Closure(parse("A(x)"), parse("B(x)"))
    thr = exactness_threshold(c.signature, c.n)
    assert thr == 4
    small = build_universe(c, (), SearchBudget(2))
    full = build_universe(c, (), SearchBudget(thr))
    assert not small.exact and full.exact
    # four sentence types; nine element types (atomic type times consistent existence flags)
    assert {k: len(v) for k, v in full.canonical.items()} == {0: 4, 1: 9}
    assert exactness_threshold({"R": 2}, 2) is None


def test_universe_monotone_and_witnessed():
    c = Closure(PHI, PSI)
    u1 = build_universe(c, (), SearchBudget(1))
    u2 = build_universe(c, (), SearchBudget(2))
    for k, d in u1.canonical.items():
        assert set(d) <= set(u2.canonical.get(k, {}))
    seeded = build_universe(c, (), SearchBudget(1), seeds=[TRI])
    t = tp(c, TRI, {"x1": "a", "x2": "c", "x3": "e"})
    assert t in seeded and t not in u1
    idx, elems = seeded.witness(t)
    assert tp(c, seeded.structures[idx], dict(zip(["x1", "x2", "x3"], elems))) == t


SIGS = [{"A": 1, "R": 2}, {"A": 1, "B": 1, "G": 3}, {"R": 2, "S": 2}]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(SIGS))
def test_types_are_coherent_and_agree_with_evaluation(seed, sig):
    rng = random.Random(seed)
    f = random_gf(rng, sig, ["x"], 3)
    c = Closure(f)
    s = random_structure(rng, sig, rng.randint(1, 3))
    tc, ev = TypeComputer(c, s), Evaluator(s)
    for k in range(0, min(c.n, len(s)) + 1):
        for elems in itertools.permutations(s.domain, k):
            xs = list(c.pool[:k])
            t = tc.tp(xs, elems)
            assert is_coherent(c, t)
            v = dict(zip(xs, elems))
            for inst in c.instances(xs):
                assert (inst in t.members) == ev(c.formula_of(inst), v)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(SIGS))
def test_guarded_bisimilar_tuples_share_tau_types(seed, sig):
    rng = random.Random(seed)
    tau = sorted(sig)[: rng.randint(1, len(sig))]
    f = random_gf(rng, {n: sig[n] for n in tau}, ["x"], 3)
    c = Closure(f)
    A = random_structure(rng, sig, rng.randint(1, 3))
    B = random_structure(rng, sig, rng.randint(1, 3))
    col = GuardedColouring([A, B], tau)
    ta, tb = TypeComputer(c, A), TypeComputer(c, B)
    for X in guarded_sets(A, tau):
        for a in itertools.permutations(sorted(X)):
            for b in itertools.permutations(B.domain, len(a)):
                if len(a) <= c.n and col.related(0, a, 1, b):
                    xs = c.pool[:len(a)]
                    assert ta.tp(xs, a) == tb.tp(xs, b)
