"""End-to-end acceptance checks; a summary line per criterion is printed after the run."""
import itertools
import random
import time
from importlib import resources

import pytest

from gfinterp.bisim import (GuardedColouring, TwoVarColouring, fo2_bisimilar, gf_bisimilar, guarded_sets,
                            verify_certificate)
from gfinterp.fo2 import check_shrink, is_scott_form, reduce_arity, scott_expansion, scott_normal_form, shrink
from gfinterp.gfmosaic import (decide_joint_consistency, failing_members, is_bisim_saturated, is_mosaic,
                               is_restriction_closed, is_saturated_set, is_tau_uniform, read_off, unfold)
from gfinterp.hardness import VARIANTS, base_tau, generate, parse_atm
from gfinterp.instances import (even_cycle_witnesses, odd_cycle_models, odd_cycle_mosaic, odd_cycle_pair,
                                triangle_definability)
from gfinterp.interp import explicit_definable, implicitly_definable_bounded, interpolant_exists
from gfinterp.oracle import cyclic_lift, enumerate_interpolants, search_model_pair
from gfinterp.semantics import (Evaluator, PointedStructure, SearchBudget, Structure, check_entailment_bounded,
                                enumerate_structures, holds_at)
from gfinterp.syntax import check_fragment, conj, free_vars, neg, parse, signature_of, subformulas, to_text
from gfinterp.types import Closure, TypeComputer, TypeUniverse, build_universe
from helpers import random_fo2, random_gf, random_structure

PHI, PSI = odd_cycle_pair()
TRI, HEX = odd_cycle_models()
SIGS = [{"A": 1, "R": 2}, {"R": 2, "S": 2}, {"A": 1, "B": 1, "G": 3}, {"A": 1, "B": 1, "R": 2}]

# saturated sets collected for the unfolding check
READ_OFF_SETS: list = []


def _partner(rng, A: Structure, sig: dict, tau: list) -> Structure:
    """A random structure, a copy of A with the symbols outside tau redrawn, or a two-fold cover of A."""
    k = rng.randrange(3)
    if k == 1:
        noise = random_structure(rng, sig, len(A))
        rels = {n: (A.relations[n] if n in tau else noise.relations[n]) for n in sig}
        return Structure(A.domain, rels, sig)
    if k == 2 and len(A) <= 2:
        facts = sum(len(r) for r in A.relations.values())
        lifted = cyclic_lift(A, 2, [rng.randint(0, 1) for _ in range(facts)])
        return lifted.rename({a: i for i, a in enumerate(lifted.domain)})
    return random_structure(rng, sig, rng.randint(1, 4))


def _random_pair(rng):
    sig = rng.choice(SIGS)
    tau = sorted(rng.sample(sorted(sig), rng.randint(1, len(sig))))
    A = random_structure(rng, sig, rng.randint(1, 4))
    return sig, tau, A, _partner(rng, A, sig, tau)


@pytest.mark.criterion(1, "odd-cycle regression: entailment, triangle/hexagon bisimulation, no interpolant")
def test_odd_cycle_regression():
    t = time.perf_counter()
    assert check_entailment_bounded(PHI, neg(PSI), SearchBudget(6)).status == "HOLDS_UP_TO_BUDGET"
    A, B = PointedStructure(TRI, ("a",)), PointedStructure(HEX, ("b",))
    cert = gf_bisimilar(A, B, {"R"})
    assert cert and verify_certificate(cert, A, B, {"R"})
    v = interpolant_exists(PHI, neg(PSI), "GF")
    assert v.outcome == "NOT_EXISTS" and v.certificate.verify(PHI, PSI, ("R",), ("x",))
    assert time.perf_counter() - t < 30


@pytest.mark.criterion(2, "triangle definability regression: not explicitly, but implicitly definable")
def test_triangle_definability_regression():
    t = time.perf_counter()
    phi, theta, tau = triangle_definability()
    v = explicit_definable(phi, theta, tau, "FO2", SearchBudget(3), 2, witnesses=[even_cycle_witnesses(2)])
    assert v.outcome == "NOT_EXISTS"
    c = v.certificate
    assert c.verify(conj(phi, theta), conj(phi, neg(theta)), tau, ("x",))
    assert implicitly_definable_bounded(phi, theta, tau, SearchBudget(8)).status == "HOLDS_UP_TO_BUDGET"
    assert time.perf_counter() - t < 60


@pytest.mark.criterion(3, "bisimilar pairs agree on every instantiated closure formula (200 random pairs)")
def test_bisimulation_invariance():
    rng = random.Random(2024)
    violations, checked_gf, checked_fo2 = 0, 0, 0
    for _ in range(200):
        sig, tau, A, B = _random_pair(rng)
        tsig = {n: sig[n] for n in tau}
        # guarded: tuples of guarded sets, types over a random closure in tau
        c = Closure(random_gf(rng, tsig, ["x"], 3))
        col = GuardedColouring([A, B], tau)
        ta, tb = TypeComputer(c, A), TypeComputer(c, B)
        for X in guarded_sets(A, tau):
            for a in itertools.permutations(sorted(X)):
                if len(a) > c.n:
                    continue
                for b in itertools.permutations(B.domain, len(a)):
                    if col.related(0, a, 1, b):
                        checked_gf += 1
                        xs = c.pool[:len(a)]
                        violations += ta.tp(xs, a) != tb.tp(xs, b)
        # two variables: every subformula of a random formula, at bisimilar elements and pairs
        if max(sig.values()) > 2:
            continue
        f = random_fo2(rng, tsig, 3)
        subs = [g for g in set(subformulas(f)) if free_vars(g) <= {"x", "y"}]
        tv = TwoVarColouring([A, B], tau)
        ea, eb = Evaluator(A), Evaluator(B)
        for k in (1, 2):
            for a in itertools.product(A.domain, repeat=k):
                for b in itertools.product(B.domain, repeat=k):
                    if not tv.related(0, a, 1, b):
                        continue
                    checked_fo2 += 1
                    va = dict(zip(("x", "y"), a if k == 2 else a * 2))
                    vb = dict(zip(("x", "y"), b if k == 2 else b * 2))
                    for g in subs:
                        if k == 1 and free_vars(g) == {"x", "y"}:
                            continue
                        violations += ea(g, va) != eb(g, vb)
    assert violations == 0
    assert checked_gf > 200 and checked_fo2 > 200


@pytest.mark.criterion(4, "read-off from 50 bisimilar pairs yields saturated mosaic sets")
def test_read_off_suite():
    rng = random.Random(7)
    pairs = violations = 0
    while pairs < 50:
        sig = rng.choice([s for s in SIGS if max(s.values()) <= 2])
        tau = sorted(rng.sample(sorted(sig), rng.randint(1, len(sig))))
        A = random_structure(rng, sig, rng.randint(1, 3))
        B = _partner(rng, A, sig, tau)
        if len(B) > 4:
            continue
        hits = [(a, b) for a in A.domain for b in B.domain
                if gf_bisimilar(PointedStructure(A, (a,)), PointedStructure(B, (b,)), tau)]
        if not hits:
            continue
        a, b = rng.choice(hits)
        c = Closure(random_gf(rng, sig, ["x"], 2))
        pa, pb = PointedStructure(A, (a,)), PointedStructure(B, (b,))
        ms, psi, t1, t2 = read_off(pa, pb, tau, c, check=False)
        pairs += 1
        ok = all(is_mosaic(phi, c, tau) for phi in ms) and is_saturated_set(list(ms), c, tau).ok
        ok = ok and t1 in psi and t2 in psi
        violations += not ok
        if ok:
            READ_OFF_SETS.append((c, tau, list(ms), psi, t1, t2, [A, B]))
    assert violations == 0


@pytest.mark.criterion(5, "hand-built mosaic over the odd-cycle closure is a saturated tau-mosaic")
def test_hand_mosaic():
    c, M, top = odd_cycle_mosaic()
    tau = {"R"}
    assert is_tau_uniform(M, c, tau) and is_restriction_closed(M) and is_bisim_saturated(M, c, tau)
    assert is_saturated_set([M], c, tau)


MICRO_SIG = {"A": 1, "B": 1, "C": 1}


def _micro_instances(count):
    rng = random.Random(11)
    out = []
    while len(out) < count:
        free = ["x"] if rng.random() < 0.6 else ["x", "y"]
        phi = random_gf(rng, MICRO_SIG, free, 2)
        chi = random_gf(rng, MICRO_SIG, free, 2)
        xs = tuple(free)
        if not (free_vars(phi) | free_vars(chi)) <= set(xs):
            continue
        tau = sorted(rng.sample(sorted(MICRO_SIG), rng.randint(0, 2)))
        out.append((phi, chi, tau, xs))
    return out


@pytest.mark.criterion(6, "mosaic procedure and brute-force pipelines never conflict on micro instances")
def test_oracle_agreement():
    budget = SearchBudget(3)
    definitive = conflicts = 0
    for phi, chi, tau, xs in _micro_instances(24):
        c = Closure(phi, chi, xs)
        u = build_universe(c, tau, budget)
        mv = decide_joint_consistency(phi, chi, tau, u, budget, xs=xs)
        pair = search_model_pair(phi, chi, tau, "GF", budget, xs, enumerate_up_to=3)
        en = enumerate_interpolants(phi, neg(chi), tau, 4, budget, "GF", xs)
        consistent = mv.outcome == "CONSISTENT" or pair.found
        inconsistent = mv.outcome == "INCONSISTENT" or en.formula is not None
        conflicts += consistent and inconsistent
        definitive += consistent or inconsistent
    assert conflicts == 0
    assert definitive >= 10


@pytest.mark.criterion(7, "shrink outputs on 20 bisimilar two-variable pairs pass every check")
def test_shrink_suite():
    rng = random.Random(5)
    done = violations = 0
    while done < 20:
        sig = rng.choice([{"A": 1, "R": 2}, {"A": 1, "B": 1, "R": 2}, {"R": 2, "S": 2}])
        tau = sorted(rng.sample(sorted(sig), rng.randint(1, len(sig))))
        A = random_structure(rng, sig, rng.randint(1, 5))
        B = _partner(rng, A, sig, tau)
        if len(B) > 5:
            continue
        hits = [(a, b) for a in A.domain for b in B.domain
                if fo2_bisimilar(PointedStructure(A, (a,)), PointedStructure(B, (b,)), tau)]
        if not hits:
            continue
        a, b = rng.choice(hits)
        pa, pb = PointedStructure(A, (a,)), PointedStructure(B, (b,))
        phi, psi = random_fo2(rng, sig, 3), random_fo2(rng, sig, 3)
        phi = phi if holds_at(pa, phi, ("x",)) else neg(phi)
        psi = psi if holds_at(pb, psi, ("x",)) else neg(psi)
        pair = shrink(pa, pb, tau, phi, psi)
        violations += len(check_shrink(pair, tau, phi, psi, ("x",)))
        done += 1
    assert violations == 0


SCOTT_MODELS = None


def _scott_models():
    global SCOTT_MODELS
    if SCOTT_MODELS is None:
        SCOTT_MODELS = [s for k in range(1, 5) for s in enumerate_structures({"R": 2}, k, iso_prune=True)]
    return SCOTT_MODELS


REDUCTION_CASES = [
    ("E y . (G(x,y,x) & A(y))", "E y . (G(x,y,x) & ~A(y))", ["G"]),
    ("G(x,x,x)", "~G(x,x,x)", []),
    ("(A(x) & A x . E y . G(x,y,y))", "(~A(x) & E y . G(y,x,x))", ["G"]),
    ("E y . (G(x,y,x) & G(y,x,y))", "E y . G(x,y,x)", ["G"]),
    ("E y . (G(y,x,y) & A(y))", "E y . (G(y,x,y) & ~A(y))", ["G"]),
    ("G(x,x,x)", "~G(x,x,x)", ["G"]),
]


@pytest.mark.criterion(8, "Scott normal form entails and expands; arity reduction keeps joint consistency")
def test_normal_forms():
    rng = random.Random(3)
    models = _scott_models()
    for _ in range(20):
        f = random_fo2(rng, {"R": 2}, 3)
        sc = scott_normal_form(f, ["x"])
        assert is_scott_form(sc) and check_fragment(sc, "FO2").ok
        assert check_entailment_bounded(sc, f, SearchBudget(4), ("x",)).holds
        for s in models:
            ev = Evaluator(s)
            for a in s.domain:
                if ev(f, {"x": a}):
                    assert Evaluator(scott_expansion(f, s, (a,), ["x"]))(sc, {"x": a})
    consistent = 0
    for p, q, tau in REDUCTION_CASES:
        phi, chi = parse(p), parse(q)
        red = reduce_arity(phi, chi, tau)
        assert max((signature_of(red.phi) | signature_of(red.psi)).values()) <= 2
        a = search_model_pair(phi, chi, tau, "FO2", SearchBudget(2), ("x",))
        b = search_model_pair(red.phi, red.psi, red.tau, "FO2", SearchBudget(2), ("x",))
        assert a.found == b.found
        if a.found:
            consistent += 1
            L = PointedStructure(red.lift(a.left.structure), a.left.point)
            R = PointedStructure(red.lift(a.right.structure), a.right.point)
            assert holds_at(L, red.phi, ("x",)) and holds_at(R, red.psi, ("x",))
            assert verify_certificate(fo2_bisimilar(L, R, red.tau), L, R, red.tau)
            L = PointedStructure(red.lower(b.left.structure), b.left.point)
            R = PointedStructure(red.lower(b.right.structure), b.right.point)
            assert holds_at(L, phi, ("x",)) and holds_at(R, chi, ("x",))
            assert verify_certificate(fo2_bisimilar(L, R, tau), L, R, tau)
    assert consistent >= 5


def _realizers(c, structures):
    u = TypeUniverse(c)
    for s in structures:
        u.add_structure(s)
    return u


@pytest.mark.criterion(9, "unfoldings of saturated sets satisfy every type member up to the depth")
@pytest.mark.parametrize("depth", [1, 2, 3])
def test_unfold_soundness(depth):
    c, M, top = odd_cycle_mosaic()
    cases = [(c, ("R",), [M], M, top, top, [])]
    if not READ_OFF_SETS:
        test_read_off_suite()
    # one read-off set per size tier; larger sets blow the depth-3 node budget
    tiers: dict = {}
    for r in READ_OFF_SETS:
        n = sum(len(m.types) for m in r[2])
        if 5 < n <= 40:
            tiers.setdefault(n, r)
    cases += [tiers[n] for n in sorted(tiers)][::2]
    bad = 0
    for c, tau, ms, psi, t1, t2, structures in cases:
        u = _realizers(c, structures)
        real = {}
        for phi in ms:
            for t in phi.types:
                w = u.witness(t)
                if w is not None:
                    real[t] = w
        un = unfold(ms, psi, t1, t2, depth, c, tau, realizers=real, structures=u.structures)
        for ps, t in zip(un.structures, (t1, t2)):
            bad += len(failing_members(c, ps, t, depth))
    assert bad == 0


@pytest.mark.criterion(10, "reduction generators: fragments, shared signatures and arities, under 5 s")
def test_hardness_generators():
    M = parse_atm(resources.files("gfinterp").joinpath("data/atm2.txt").read_text())
    t = time.perf_counter()
    insts = [(v, n, generate(v, M, n=n)) for v in VARIANTS for n in (1, 2)]
    expected = {"R", "S", "X", "Z", "Ball", "Bex1", "Bex2", "A_a", "A_blank"}
    expected |= {f"A_{q}_{a}" for q in ("q0", "q1") for a in ("a", "blank")}
    assert set(base_tau(M)) == expected
    for v, n, inst in insts:
        assert parse(to_text(inst.phi)) == inst.phi
        assert check_fragment(inst.phi, "FO2" if v.startswith("fo2") else "GF").ok
        sig = signature_of(inst.phi)
        if v == "fo2-sig":
            assert set(inst.tau) == set(sig) - {"A"}
        else:
            assert set(inst.tau) == expected
        if v == "gf-general":
            assert sig["E"] == 4 * n + 4
    assert time.perf_counter() - t < 5
