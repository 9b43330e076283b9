"""Brute-force semi-decision routines: bisimilar model-pair search and interpolant enumeration.

Both are independent of the mosaic machinery and serve as cross-checks for it.
The model-pair search collects candidate tau-structures (reducts of small
models, cyclic covers of those, disjoint unions, and optionally every small
tau-structure), asks a SAT solver which points of each candidate expand to a
model of the left or right formula, and looks for a bisimilar left/right pair.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bisim import GuardedColouring, TwoVarColouring, fo2_bisimilar, gf_bisimilar
from .sat import diverse_models, expand_search
from .semantics import (Evaluator, PointedStructure, SearchBudget, Structure, _Clock,
                        check_entailment_bounded, disjoint_union, enumerate_structures)
from .syntax import (FALSE, TRUE, And, Atom, Eq, Exists, Formula, Not, Or, Signature,
                     check_fragment, free_vars, signature_of, size)


# ---------------------------------------------------------------- candidate structures

def cyclic_lift(s: Structure, k: int, voltage) -> Structure:
    """k-fold cyclic cover: fact i moves from layer j to layer j + voltage[i] after its first position."""
    dom = [(a, j) for j in range(k) for a in s.domain]
    rels: dict = {n: [] for n in s.signature}
    i = 0
    for name in sorted(s.relations):
        for t in sorted(s.relations[name], key=lambda t: tuple(s.index[a] for a in t)):
            v = voltage[i] if len(t) >= 2 else 0
            i += 1
            for j in range(k):
                rels[name].append(tuple((a, j if p == 0 else (j + v) % k) for p, a in enumerate(t)))
    return Structure(dom, rels, s.signature)


def fact_count(s: Structure) -> int:
    return sum(len(r) for r in s.relations.values())


def lifts(s: Structure, folds: Sequence[int] = (2, 3), limit: int = 8) -> list[Structure]:
    """A few cyclic covers of s: one fact shifted by one layer, or every fact shifted."""
    n = fact_count(s)
    out: list[Structure] = []
    if n == 0:
        return out
    for k in folds:
        vols = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)] + [(1,) * n]
        for v in vols:
            out.append(cyclic_lift(s, k, v))
            if len(out) >= limit:
                return out
    return out


def _relabel(s: Structure) -> Structure:
    m = {a: i for i, a in enumerate(s.domain)}
    return s.rename(m)


def _reduct(ps: PointedStructure, tau: Sequence[str], sig: Signature) -> Structure:
    tsig = Signature({n: sig[n] for n in tau if n in sig})
    return ps.structure.reduct(tsig).with_signature(tsig)


# ---------------------------------------------------------------- model-pair search

@dataclass
class PairSearch:
    status: str                      # FOUND | NOT_FOUND | UNKNOWN
    left: PointedStructure | None = None
    right: PointedStructure | None = None
    certificate: object = None
    stats: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == "FOUND"


class _PointBank:
    """Candidate tau-structures with the points at which each side expands."""

    def __init__(self, phi, psi, tau, logic, xs, sig, clock):
        self.phi, self.psi, self.tau, self.logic, self.xs = phi, psi, tau, logic, xs
        self.sig, self.clock = sig, clock
        self.tsig = Signature({n: sig[n] for n in tau if n in sig})
        self.cands: list[Structure] = []
        self.seen: set = set()
        self.points: list[tuple[dict, dict]] = []
        self.sat_calls = 0
        self.pair_checks = 0
        self.timed_out = False
        self.colours = GuardedColouring(tau=tau) if logic == "GF" else TwoVarColouring(tau=tau)
        self._key_cache: dict = {}

    def add(self, s: Structure) -> int | None:
        s = _relabel(s.with_signature(self.tsig))
        fp = s.fingerprint()
        if fp in self.seen:
            return None
        self.seen.add(fp)
        self.cands.append(s)
        left, right = {}, {}
        for p in itertools.product(s.domain, repeat=len(self.xs)):
            for f, store in ((self.phi, left), (self.psi, right)):
                self.sat_calls += 1
                e = expand_search(f, self.xs, s, p, self.tau, self.sig, self.clock)
                if e == "UNKNOWN":
                    self.timed_out = True
                    self.points.append((left, right))
                    self.colours.add(s)
                    return len(self.cands) - 1
                if e is not None:
                    store[p] = e
        self.points.append((left, right))
        self.colours.add(s)
        return len(self.cands) - 1

    def _keys(self, i: int, side: int) -> dict:
        """Bisimulation invariant -> first point of candidate i on the given side."""
        ck = (i, side, self.colours.round)
        hit = self._key_cache.get(ck)
        if hit is None:
            hit = {}
            for p in self.points[i][side]:
                hit.setdefault(self.colours.key(i, p), p)
            self._key_cache[ck] = hit
        return hit

    def related(self, i, p, j, q) -> bool:
        self.pair_checks += 1
        return self.colours.related(i, p, j, q)

    def match(self, new: int):
        """A bisimilar (left, right) pair involving candidate `new` and any earlier one."""
        for i in range(new + 1):
            for a, b in ((new, i), (i, new)):
                left, right = self._keys(a, 0), self._keys(b, 1)
                self.pair_checks += min(len(left), len(right))
                for k, p in left.items():
                    q = right.get(k)
                    if q is not None:
                        return (a, p), (b, q)
        return None


def search_model_pair(phi: Formula, psi: Formula, tau: Iterable[str], logic: str = "GF",
                      budget: SearchBudget = SearchBudget(4), xs: Sequence[str] | None = None,
                      witnesses: Iterable[tuple[PointedStructure, PointedStructure]] = (),
                      per_size: int = 6, enumerate_up_to: int | None = None,
                      max_candidates: int = 400) -> PairSearch:
    """Look for A,a |= phi and B,b |= psi with A,a and B,b tau-bisimilar in the logic.

    FOUND is always backed by a verified bisimulation certificate; NOT_FOUND only
    means the candidate pool was exhausted.  With enumerate_up_to = n every
    tau-structure of size at most n is a candidate, so the search is complete
    for models of that size.
    """
    logic = logic.upper().replace("²", "2")
    tau = tuple(sorted(set(tau)))
    xs = tuple(xs) if xs is not None else tuple(sorted(free_vars(phi) | free_vars(psi)))
    sig = signature_of(phi) | signature_of(psi)
    clock = _Clock(budget)
    stats: dict = {"candidates": 0, "tier": None}

    def certify(A: PointedStructure, B: PointedStructure):
        return gf_bisimilar(A, B, tau) if logic == "GF" else fo2_bisimilar(A, B, tau)

    for A, B in witnesses:
        ev = Evaluator
        if ev(A.structure)(phi, dict(zip(xs, A.point))) and ev(B.structure)(psi, dict(zip(xs, B.point))):
            cert = certify(A, B)
            if cert:
                stats["tier"] = "witness"
                return PairSearch("FOUND", A, B, cert, stats)

    bank = _PointBank(phi, psi, tau, logic, xs, sig, clock)

    def result(hit, tier):
        (i, p), (j, q) = hit
        A = PointedStructure(bank.points[i][0][p], p)
        B = PointedStructure(bank.points[j][1][q], q)
        cert = certify(A, B)
        if not cert:
            raise AssertionError("candidate pair failed certification")
        stats.update(tier=tier, candidates=len(bank.cands), sat_calls=bank.sat_calls,
                     pair_checks=bank.pair_checks)
        return PairSearch("FOUND", A, B, cert, stats)

    def feed(structs, tier):
        for s in structs:
            if len(bank.cands) >= max_candidates:
                return None
            i = bank.add(s)
            if bank.timed_out:
                return "timeout"
            if i is None:
                continue
            hit = bank.match(i)
            if hit:
                return result(hit, tier)
        return None

    def done(r):
        if r == "timeout":
            stats.update(candidates=len(bank.cands), sat_calls=bank.sat_calls, pair_checks=bank.pair_checks)
            return PairSearch("UNKNOWN", stats=stats)
        return r

    # tier 0: reducts of supplied witnesses
    r = feed([_reduct(A, tau, sig) for pair in witnesses for A in pair], "witness-reduct")
    if r:
        return done(r)

    # tier 1: tau-reducts of small models, irreflexive tau first
    bases: list[Structure] = []
    strict = [n for n in tau if sig.get(n, 0) >= 2]
    for k in range(budget.min_size, budget.max_size + 1):
        for f in (phi, psi):
            for st in ((strict, ()) if strict else ((),)):
                ms = diverse_models(f, xs, sig, k, tau, per_size, clock, strict=st)
                bases.extend(_reduct(m, tau, sig) for m in ms)
        r = feed(bases[-4 * per_size:], "reduct")
        if r:
            return done(r)
    if not clock.tick(0):
        return done("timeout")

    # tier 2: cyclic covers of the bases
    r = feed((l for b in bases for l in lifts(b)), "lift")
    if r:
        return done(r)

    # tier 3: a base beside one of its covers, and pairs of bases
    r = feed((disjoint_union(b, l)[0] for b in bases for l in lifts(b, limit=3)), "union-lift")
    if r:
        return done(r)
    r = feed((disjoint_union(b, c)[0] for b, c in itertools.combinations(bases, 2)), "union")
    if r:
        return done(r)

    # tier 4: every small tau-structure
    if enumerate_up_to:
        tsig = Signature({n: sig[n] for n in tau if n in sig})
        for n in range(1, enumerate_up_to + 1):
            r = feed(enumerate_structures(tsig, n, iso_prune=True), "enumeration")
            if r:
                return done(r)
    stats.update(candidates=len(bank.cands), sat_calls=bank.sat_calls, pair_checks=bank.pair_checks)
    return PairSearch("NOT_FOUND", stats=stats)


# ---------------------------------------------------------------- interpolant enumeration

_POOL = ("y", "z", "u", "v", "w", "y1", "z1", "u1", "v1", "w1")


class FormulaEnumerator:
    """Fragment formulas over tau in ascending size.

    Conjunctions and disjunctions are flattened with children in a fixed order
    and without repeats, negations never stack, and truth constants appear only
    at the top.  Coverage is syntactic; equivalent formulas may both appear.
    """

    def __init__(self, tau: Signature, logic: str):
        self.tau = tau
        self.logic = logic.upper().replace("²", "2")
        self.by_size: dict = {}
        self.order: dict = {}

    def _vars(self, V):
        return sorted(V)

    def atoms(self, V: frozenset) -> list[Formula]:
        out: list[Formula] = []
        vs = self._vars(V)
        for name in sorted(self.tau):
            ar = self.tau[name]
            if self.logic == "FO2" and ar > 2:
                continue
            for args in itertools.product(vs, repeat=ar):
                out.append(Atom(name, tuple(args)))
        for u, w in itertools.combinations(vs, 2):
            out.append(Eq(u, w))
        return out

    def of_size(self, n: int, V: frozenset) -> list[Formula]:
        key = (n, V)
        if key in self.by_size:
            return self.by_size[key]
        if n == 1:
            out = self.atoms(V)
        else:
            out = []
            out += [Not(f) for f in self.of_size(n - 1, V) if not isinstance(f, Not)]
            out += self._junctions(n, V, And)
            out += self._junctions(n, V, Or)
            out += self._quantified(n, V)
        self.by_size[key] = out
        idx = self.order.setdefault(V, {})
        for f in out:
            idx.setdefault(f, len(idx))
        return out

    def _junctions(self, n: int, V: frozenset, kind) -> list[Formula]:
        pool = []
        for m in range(1, n - 1):
            pool += [(m, f) for f in self.of_size(m, V) if not isinstance(f, kind)]
        idx = self.order[V]
        pool.sort(key=lambda mf: idx[mf[1]])
        out = []

        def rec(start, left, chosen):
            if left == 0:
                if len(chosen) >= 2:
                    args = tuple(chosen)
                    negs = {a.sub for a in args if isinstance(a, Not)}
                    if not negs & set(args):
                        out.append(kind(args))
                return
            for i in range(start, len(pool)):
                m, f = pool[i]
                if m <= left:
                    rec(i + 1, left - m, chosen + [f])

        rec(0, n - 1, [])
        return out

    def _quantified(self, n: int, V: frozenset) -> list[Formula]:
        out: list[Formula] = []
        if self.logic == "FO2":
            for v in ("x", "y"):
                W = V | {v}
                for body in self.of_size(n - 1, W):
                    if v in free_vars(body) and free_vars(body) <= W:
                        out.append(Exists((v,), body))
            return out
        fresh = [p for p in _POOL if p not in V]
        for name in sorted(self.tau):
            ar = self.tau[name]
            for m in range(1, ar + 1):
                new = fresh[:m]
                W = V | set(new)
                for args in itertools.product(sorted(W), repeat=ar):
                    if not set(new) <= set(args):
                        continue
                    g = Atom(name, args)
                    if n == 2:
                        out.append(Exists(tuple(new), g))
                    elif n >= 4:
                        for body in self.of_size(n - 3, frozenset(W)):
                            fv = free_vars(body)
                            if fv & set(new) and fv <= set(args) and body != g:
                                out.append(Exists(tuple(new), And((g, body))))
        if n >= 4:
            y = fresh[0]
            for body in self.of_size(n - 3, frozenset({y}) | V):
                if free_vars(body) == {y}:
                    out.append(Exists((y,), And((Eq(y, y), body))))
        return out

    def formulas(self, xs: Sequence[str], cap: int):
        V = frozenset(xs)
        yield TRUE
        yield FALSE
        for n in range(1, cap + 1):
            for f in self.of_size(n, V):
                if free_vars(f) <= V:
                    yield f


@dataclass
class InterpolantSearch:
    formula: Formula | None
    transcripts: list = field(default_factory=list)
    qualification: str = "up-to-budget"
    stats: dict = field(default_factory=dict)


def _widen(ps: PointedStructure, sig: Signature) -> PointedStructure:
    """Countermodels only interpret the symbols of their check; the rest are left empty."""
    full = ps.structure.signature | sig
    return PointedStructure(ps.structure.with_signature(full), ps.point)


def _sat_at(f: Formula, ps: PointedStructure, xs, cache: dict) -> bool:
    ev = cache.get(id(ps.structure))
    if ev is None:
        ev = cache[id(ps.structure)] = Evaluator(ps.structure)
    return ev(f, dict(zip(xs, ps.point)))


def enumerate_interpolants(phi: Formula, psi: Formula, tau: Iterable[str], size_cap: int = 4,
                           budget: SearchBudget = SearchBudget(3), logic: str = "GF",
                           xs: Sequence[str] | None = None,
                           positives: Iterable[PointedStructure] = (),
                           negatives: Iterable[PointedStructure] = (),
                           seed_models: int = 3) -> InterpolantSearch:
    """First theta over tau (ascending size) with phi |= theta |= psi up to the model budget.

    Known models of phi (positives) and of not-psi (negatives) prune candidates
    before any entailment check; every countermodel found joins the pools.
    """
    from .syntax import neg

    logic = logic.upper().replace("²", "2")
    xs = tuple(xs) if xs is not None else tuple(sorted(free_vars(phi) | free_vars(psi)))
    sig = signature_of(phi) | signature_of(psi)
    tsig = Signature({n: sig[n] for n in set(tau) if n in sig})
    clock = _Clock(budget)
    pos, negs = list(positives), list(negatives)
    for k in range(1, min(seed_models, budget.max_size) + 1):
        pos += diverse_models(phi, xs, signature_of(phi) | tsig, k, tsig, 2, clock)
        negs += diverse_models(neg(psi), xs, signature_of(psi) | tsig, k, tsig, 2, clock)
    evs: dict = {}
    en = FormulaEnumerator(tsig, logic)
    stats = {"candidates": 0, "entailment_checks": 0, "pool": 0}
    transcripts: list = []
    for theta in en.formulas(xs, size_cap):
        if not clock.tick():
            stats["timed_out"] = True
            break
        stats["candidates"] += 1
        if logic == "GF" and not check_fragment(theta, "GF").ok:
            continue
        if not all(_sat_at(theta, p, xs, evs) for p in pos):
            continue
        if any(_sat_at(theta, p, xs, evs) for p in negs):
            continue
        stats["entailment_checks"] += 1
        left = check_entailment_bounded(phi, theta, budget, xs)
        if left.status == "COUNTERMODEL":
            pos.append(_widen(left.countermodel, sig))
            continue
        right = check_entailment_bounded(theta, psi, budget, xs)
        if right.status == "COUNTERMODEL":
            negs.append(_widen(right.countermodel, sig))
            continue
        transcripts = [("phi |= theta", left.status, left.max_size), ("theta |= psi", right.status, right.max_size)]
        if left.holds and right.holds:
            stats.update(pool=len(pos) + len(negs), size=size(theta))
            return InterpolantSearch(theta, transcripts, "up-to-budget", stats)
    stats["pool"] = len(pos) + len(negs)
    return InterpolantSearch(None, transcripts, "up-to-budget", stats)
