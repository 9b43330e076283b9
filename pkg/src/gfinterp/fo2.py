"""Two-variable logic: arity reduction, normal form, 1-types and link-types,
mosaics with kings and pawns, and the construction that shrinks a pair of
bisimilar models to one built from type and mosaic copies.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .bisim import TwoVarClasses, fo2_bisimilar
from .semantics import Evaluator, PointedStructure, SearchBudget, Structure
from .syntax import (And, Atom, Const, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or,
                     Signature, check_fragment, conj, disj, free_vars, neg, signature_of, size,
                     subformulas)

VARS = ("x", "y")


def swap_vars(f: Formula) -> Formula:
    """Exchange the names x and y everywhere, bound occurrences included."""
    sw = {"x": "y", "y": "x"}
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(sw.get(a, a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(sw.get(f.left, f.left), sw.get(f.right, f.right))
    if isinstance(f, Const):
        return f
    if isinstance(f, Not):
        return Not(swap_vars(f.sub))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(swap_vars(c) for c in f.args))
    if isinstance(f, (Implies, Iff)):
        return type(f)(swap_vars(f.left), swap_vars(f.right))
    if isinstance(f, (Exists, Forall)):
        return type(f)(tuple(sw.get(v, v) for v in f.vars), swap_vars(f.body))
    raise TypeError(f)


def _require_fo2(*fs: Formula) -> None:
    for f in fs:
        rep = check_fragment(f, "FO2")
        if not rep.ok:
            raise ValueError(f"not a two-variable formula: {rep.violations[0][1]}")


# ---------------------------------------------------------------- arity reduction

def _apply(sym: str, pattern: tuple, env: Mapping[str, str]) -> Atom:
    has = [v for v in VARS if v in pattern]
    return Atom(sym, tuple(env[v] for v in has))


@dataclass
class ArityReduction:
    """Result of replacing every atom of arity >= 3 by a fresh symbol of arity <= 2."""
    phi: Formula
    psi: Formula
    tau: Signature
    fresh: dict  # fresh name -> (original symbol, variable pattern)
    axioms: dict  # original symbol -> conjunction of bridging axioms
    source_signature: Signature

    def lift(self, s: Structure) -> Structure:
        """Interpret the fresh symbols by their defining atoms; drop arity >= 3."""
        rels = {n: s.relations.get(n, ()) for n in s.signature if s.signature[n] <= 2}
        sig = {n: a for n, a in s.signature.items() if a <= 2}
        for name, (R, pat) in sorted(self.fresh.items()):
            if R not in s.signature:
                continue
            has = [v for v in VARS if v in pat]
            sig[name] = len(has)
            rows = []
            for combo in itertools.product(s.domain, repeat=len(has)):
                env = dict(zip(has, combo))
                if s.holds(R, tuple(env[v] for v in pat)):
                    rows.append(combo)
            rels[name] = rows
        return Structure(s.domain, rels, sig)

    def lower(self, s: Structure) -> Structure:
        """Rebuild the high-arity symbols from the fresh ones; drop the fresh ones."""
        fresh = set(self.fresh)
        sig = {n: a for n, a in s.signature.items() if n not in fresh}
        rels = {n: s.relations.get(n, ()) for n in sig}
        for name, (R, pat) in sorted(self.fresh.items()):
            if name not in s.signature:
                continue
            has = [v for v in VARS if v in pat]
            sig[R] = len(pat)
            rows = set(rels.get(R, ()))
            for combo in s.relations.get(name, ()):
                env = dict(zip(has, combo))
                rows.add(tuple(env[v] for v in pat))
            rels[R] = rows
        return Structure(s.domain, rels, sig)


def reduce_arity(phi: Formula, psi: Formula, tau: Iterable[str] | Mapping[str, int]) -> ArityReduction:
    _require_fo2(phi, psi)
    sig = signature_of(phi) | signature_of(psi)
    tau_names = set(tau)
    taken = set(sig)
    fresh: dict = {}
    by_atom: dict = {}

    def name_for(R: str, pat: tuple) -> str:
        key = (R, pat)
        if key not in by_atom:
            base = f"{R}_{''.join(pat)}"
            name = base
            while name in taken:
                name += "_"
            taken.add(name)
            by_atom[key] = name
            fresh[name] = key
        return by_atom[key]

    def rewrite(f: Formula) -> Formula:
        if isinstance(f, Atom):
            if len(f.args) < 3:
                return f
            return _apply(name_for(f.pred, f.args), f.args, {"x": "x", "y": "y"})
        if isinstance(f, (Eq, Const)):
            return f
        if isinstance(f, Not):
            return Not(rewrite(f.sub))
        if isinstance(f, (And, Or)):
            return type(f)(tuple(rewrite(c) for c in f.args))
        if isinstance(f, (Implies, Iff)):
            return type(f)(rewrite(f.left), rewrite(f.right))
        return type(f)(f.vars, rewrite(f.body))

    phi1, psi1 = rewrite(phi), rewrite(psi)
    patterns: dict = {}
    for name, (R, pat) in fresh.items():
        patterns.setdefault(R, []).append((pat, name))
    axioms = {}
    ident, swap, diag = {"x": "x", "y": "y"}, {"x": "y", "y": "x"}, {"x": "x", "y": "x"}
    for R, pats in sorted(patterns.items()):
        pats.sort()
        parts = []
        for (p1, n1), (p2, n2) in itertools.combinations(pats, 2):
            if tuple(swap[v] for v in p1) == p2:
                parts.append(Forall(VARS, Iff(_apply(n1, p1, ident), _apply(n2, p2, swap))))
            parts.append(Forall(("x",), Iff(_apply(n1, p1, diag), _apply(n2, p2, diag))))
        axioms[R] = conj(*parts)
    phi_syms, psi_syms = set(signature_of(phi)), set(signature_of(psi))
    phi2 = conj(phi1, *[axioms[R] for R in sorted(axioms) if R in phi_syms])
    psi2 = conj(psi1, *[axioms[R] for R in sorted(axioms) if R in psi_syms])
    new_sig = signature_of(phi2) | signature_of(psi2)
    tau2 = Signature({n: a for n, a in sig.items() if n in tau_names and a <= 2})
    tau2 = tau2 | Signature({n: new_sig[n] for n, (R, _) in fresh.items() if R in tau_names})
    return ArityReduction(phi2, psi2, tau2, fresh, axioms, sig)


# ---------------------------------------------------------------- normal form

def _split_blocks(f: Formula) -> Formula:
    """Q v1 v2 ... body becomes Q v1 (Q v2 ... body)."""
    if len(f.vars) > 1:
        return type(f)((f.vars[0],), type(f)(f.vars[1:], f.body))
    return f


def _is_qf(f: Formula) -> bool:
    return not any(isinstance(g, (Exists, Forall)) for g in subformulas(f))


def is_scott_form(f: Formula) -> bool:
    parts = list(f.args) if isinstance(f, And) else [f]
    if not parts or not isinstance(parts[0], Atom):
        return False
    if set(parts[0].args) != set(free_vars(f)) or len(set(parts[0].args)) != len(parts[0].args):
        return False
    for p in parts[1:]:
        if isinstance(p, Forall) and set(p.vars) == set(VARS) and _is_qf(p.body):
            continue
        if (isinstance(p, Forall) and p.vars == ("x",) and isinstance(p.body, Exists)
                and p.body.vars == ("y",) and _is_qf(p.body.body)):
            continue
        return False
    return True


class _Scott:
    def __init__(self, taken: set[str]):
        self.taken = taken
        self.defs: list = []  # (symbol, arity, kind, body over x,y)
        self.n = 0

    def fresh(self, stem: str) -> str:
        while True:
            self.n += 1
            name = f"{stem}{self.n}"
            if name not in self.taken:
                self.taken.add(name)
                return name

    def abstract(self, f: Formula) -> Formula:
        if isinstance(f, (Atom, Eq, Const)):
            return f
        if isinstance(f, Not):
            return Not(self.abstract(f.sub))
        if isinstance(f, (And, Or)):
            return type(f)(tuple(self.abstract(c) for c in f.args))
        if isinstance(f, (Implies, Iff)):
            return type(f)(self.abstract(f.left), self.abstract(f.right))
        f = _split_blocks(f)
        v = f.vars[0]
        theta = self.abstract(f.body)
        rest = free_vars(theta) - {v}
        u = next(iter(rest)) if rest else None
        if v == "x":
            theta = swap_vars(theta)
        kind = "E" if isinstance(f, Exists) else "A"
        P = self.fresh("P_")
        self.defs.append((P, 1 if u else 0, kind, theta))
        return Atom(P, (u,)) if u else Atom(P, ())

    def build(self, top: Formula, xs: tuple, r0: str) -> Formula:
        alphas = [Implies(Atom(r0, xs), top)]
        betas = []
        for P, ar, kind, theta in self.defs:
            p = Atom(P, ("x",)) if ar else Atom(P, ())
            if kind == "E":
                alphas.append(Implies(theta, p))
                betas.append(disj(neg(p), theta))
            else:
                alphas.append(Implies(p, theta))
                betas.append(disj(p, neg(theta)))
        return conj(Atom(r0, xs), Forall(VARS, conj(*alphas)),
                    *[Forall(("x",), Exists(("y",), b)) for b in betas])


def _scott(chi: Formula, xs: Sequence[str] | None):
    _require_fo2(chi)
    xs = tuple(xs) if xs is not None else tuple(v for v in VARS if v in free_vars(chi))
    taken = set(signature_of(chi))
    sc = _Scott(taken)
    top = sc.abstract(chi)
    r0 = "R0"
    while r0 in taken:
        r0 += "_"
    taken.add(r0)
    return sc, top, xs, r0


def scott_normal_form(chi: Formula, xs: Sequence[str] | None = None) -> Formula:
    """R0(xs) & Ax Ay alpha & conjunction of Ax Ey beta_i, with fresh symbols.

    Every quantified subformula is named by a fresh unary (or nullary)
    symbol whose definition is axiomatized in both directions, so the
    result entails chi and each model of chi has exactly one expansion
    once R0 is fixed to the point.
    """
    if is_scott_form(chi):
        return chi
    sc, top, xs, r0 = _scott(chi, xs)
    return sc.build(top, xs, r0)


def scott_expansion(chi: Formula, s: Structure, point: Sequence, xs: Sequence[str] | None = None) -> Structure:
    """Expand a model of chi at point to a model of scott_normal_form(chi)."""
    if is_scott_form(chi):
        return s
    sc, _, xs, r0 = _scott(chi, xs)
    sig = dict(s.signature)
    rels = {n: set(s.relations.get(n, ())) for n in sig}
    sig[r0] = len(xs)
    rels[r0] = {tuple(point)}
    cur = Structure(s.domain, rels, sig)
    for P, ar, kind, theta in sc.defs:
        q = Exists(("y",), theta) if kind == "E" else Forall(("y",), theta)
        ev = Evaluator(cur)
        if ar:
            rels[P] = {(a,) for a in cur.domain if ev(q, {"x": a})}
        else:
            rels[P] = {()} if ev(q, {}) else set()
        sig[P] = ar
        cur = Structure(s.domain, rels, sig)
    return cur


# ---------------------------------------------------------------- types

class Fo2Closure:
    """Subformulas with at most one free variable (renamed to x), sentences,
    and the atoms R(x), R(x,x) and nullary atoms for every symbol involved.
    Negations are implicit: a 1-type lists the members that hold."""

    def __init__(self, formulas: Iterable[Formula] = (), signature: Mapping[str, int] | None = None):
        formulas = list(formulas)
        _require_fo2(*formulas)
        sig = Signature(signature or {})
        for f in formulas:
            sig = sig | signature_of(f)
        if sig.max_arity() > 2:
            raise ValueError("1-types need symbols of arity at most two; reduce the arity first")
        self.signature = sig
        members: dict = {}
        for name in sorted(sig):
            a = sig[name]
            at = Atom(name, ()) if a == 0 else Atom(name, ("x",) * a)
            members[at] = None
        for f in formulas:
            for g in subformulas(f):
                fv = free_vars(g)
                if len(fv) > 1 or isinstance(g, Not):
                    continue
                if fv == {"y"}:
                    g = swap_vars(g)
                members.setdefault(g, None)
        self.members = tuple(members)

    def one_type(self, s: Structure, a, ev: Evaluator | None = None) -> "OneType":
        ev = ev or Evaluator(s)
        return OneType(frozenset(g for g in self.members if ev(g, {"x": a})))


@dataclass(frozen=True)
class OneType:
    members: frozenset

    def __contains__(self, g) -> bool:
        return g in self.members

    def sort_key(self):
        return tuple(sorted(str(g) for g in self.members))


@dataclass(frozen=True, order=True)
class LinkType:
    """Polarities of R(x,y) and R(y,x) for each binary symbol, in symbol order."""
    symbols: tuple
    bits: tuple

    def swap(self) -> "LinkType":
        return LinkType(self.symbols, tuple((b, a) for a, b in self.bits))

    def restrict(self, names: Iterable[str]) -> "LinkType":
        keep = set(names)
        pairs = [(n, b) for n, b in zip(self.symbols, self.bits) if n in keep]
        return LinkType(tuple(n for n, _ in pairs), tuple(b for _, b in pairs))

    def atoms(self) -> list[Formula]:
        out = []
        for n, (f, b) in zip(self.symbols, self.bits):
            out.append(Atom(n, ("x", "y")) if f else Not(Atom(n, ("x", "y"))))
            out.append(Atom(n, ("y", "x")) if b else Not(Atom(n, ("y", "x"))))
        return out


def binary_symbols(s: Structure) -> tuple:
    return tuple(sorted(n for n, a in s.signature.items() if a == 2))


def link_type(s: Structure, a, b, symbols: Sequence[str] | None = None) -> LinkType:
    if a == b:
        raise ValueError("link-types are defined for distinct elements")
    syms = tuple(symbols) if symbols is not None else binary_symbols(s)
    return LinkType(syms, tuple((s.holds(n, (a, b)), s.holds(n, (b, a))) for n in syms))


def one_type(s: Structure, a, closure: Fo2Closure | None = None) -> OneType:
    c = closure or Fo2Closure((), s.signature)
    return c.one_type(s, a)


# ---------------------------------------------------------------- mosaics

@dataclass
class MosaicTable:
    """Mosaics generated by the elements of two bisimilar structures.

    Elements are addressed as (side, element) with side 0 or 1.  A mosaic is
    a pair of frozensets of 1-type ids, one per side.
    """
    structures: tuple
    tau: tuple
    closure: Fo2Closure
    classes: TwoVarClasses
    types: list  # type id -> OneType
    type_of: dict  # (side, element) -> type id
    mosaics: list  # mosaic id -> (frozenset, frozenset)
    mosaic_of_class: dict  # class id -> mosaic id
    generators: dict  # mosaic id -> sorted class ids
    kings: frozenset  # king mosaic ids

    def cls(self, e) -> int:
        return self.classes.cls[e]

    def mosaic(self, e) -> int:
        return self.mosaic_of_class[self.classes.cls[e]]

    def is_king_mosaic(self, m: int) -> bool:
        return m in self.kings

    def members(self, side: int, klass: int, t: int | None = None) -> list:
        s = self.structures[side]
        return [a for a in s.domain if self.classes.cls[(side, a)] == klass
                and (t is None or self.type_of[(side, a)] == t)]

    def role(self, side: int, m: int, t: int) -> str:
        """'king' or 'pawn' for type t on the given side of mosaic m."""
        if t not in self.mosaics[m][side]:
            raise KeyError("type does not occur in the mosaic")
        if m not in self.kings:
            return "pawn"
        (klass,) = self.generators[m]
        return "king" if len(self.members(side, klass, t)) == 1 else "pawn"


def mosaics_of(A1: Structure, A2: Structure, tau: Iterable[str], closure: Fo2Closure | None = None) -> MosaicTable:
    closure = closure or Fo2Closure((), A1.signature | A2.signature)
    tc = TwoVarClasses([A1, A2], tau)
    if not tc.is_global(0, 1):
        raise ValueError("the structures are not globally two-variable bisimilar")
    raw = {}
    for side, s in enumerate((A1, A2)):
        ev = Evaluator(s)
        for a in s.domain:
            raw[(side, a)] = closure.one_type(s, a, ev)
    types = sorted(set(raw.values()), key=OneType.sort_key)
    tid = {t: i for i, t in enumerate(types)}
    type_of = {e: tid[t] for e, t in raw.items()}
    per_class: dict = {}
    for (side, a), t in type_of.items():
        per_class.setdefault(tc.cls[(side, a)], (set(), set()))[side].add(t)
    shapes = {k: (frozenset(v[0]), frozenset(v[1])) for k, v in per_class.items()}
    mosaics = sorted(set(shapes.values()), key=lambda m: (sorted(m[0]), sorted(m[1])))
    mid = {m: i for i, m in enumerate(mosaics)}
    mosaic_of_class = {k: mid[v] for k, v in shapes.items()}
    generators: dict = {}
    for k in sorted(mosaic_of_class):
        generators.setdefault(mosaic_of_class[k], []).append(k)
    kings = frozenset(m for m, ks in generators.items() if len(ks) == 1)
    return MosaicTable((A1, A2), tc.tau, closure, tc, types, type_of, mosaics, mosaic_of_class, generators, kings)


# ---------------------------------------------------------------- size bounds

@dataclass(frozen=True)
class SizeBounds:
    """Model-size bounds kept as base-2 logarithms; the numbers themselves are astronomically large."""
    s: int
    log2_m: int
    log2_k1: int
    log2_k2: int

    def log2(self) -> dict:
        return {"s": self.s, "log2_m": self.log2_m, "log2_k1": self.log2_k1, "log2_k2": self.log2_k2}

    def within_k1(self, n: int) -> bool:
        return n.bit_length() <= self.log2_k1 or n <= 2 ** self.log2_k1


def size_bounds(s: int) -> SizeBounds:
    if s < 0:
        raise ValueError("input size must be non-negative")
    lm = 2 ** (s + 1)
    lk1 = 4 * s + lm
    return SizeBounds(s, lm, lk1, 3 * s + 2 * lk1)


def input_size(phi: Formula, psi: Formula) -> int:
    return size(phi) + size(psi)


# ---------------------------------------------------------------- shrink

@dataclass
class ShrunkModelPair:
    left: PointedStructure
    right: PointedStructure
    provenance: tuple  # per side: element name -> dict
    table: MosaicTable
    counts: dict
    bounds: SizeBounds | None = None

    def to_json(self) -> dict:
        from .semantics import to_structure_text
        return {"left": to_structure_text(self.left), "right": to_structure_text(self.right),
                "provenance": [dict(sorted(p.items())) for p in self.provenance], "counts": self.counts}


class _Side:
    """Link bookkeeping for one output structure."""

    def __init__(self, side: int, T: MosaicTable):
        self.side, self.T = side, T
        self.A = T.structures[side]
        self.syms = binary_symbols(self.A)
        self.nodes: list[str] = []
        self.info: dict = {}
        self.links: dict = {}
        self._lcache: dict = {}

    def alink(self, a, b) -> LinkType:
        key = (a, b)
        hit = self._lcache.get(key)
        if hit is None:
            hit = self._lcache[key] = link_type(self.A, a, b, self.syms)
        return hit

    def add(self, name: str, **info) -> str:
        self.nodes.append(name)
        self.info[name] = info
        return name

    def set(self, u: str, v: str, l: LinkType) -> None:
        old = self.links.get((u, v))
        if old is not None and old != l:
            raise AssertionError(f"conflicting link-types for {u}, {v}")
        self.links[(u, v)] = l
        self.links[(v, u)] = l.swap()

    def structure(self) -> Structure:
        A = self.A
        sig = dict(A.signature)
        if max(sig.values(), default=0) > 2:
            raise ValueError("shrink needs symbols of arity at most two")
        rels: dict = {n: [] for n in sig}
        for n, a in sig.items():
            if a == 0 and A.holds(n, ()):
                rels[n].append(())
        for u in self.nodes:
            w = self.info[u]["witness"]
            for n, a in sig.items():
                if a in (1, 2) and A.holds(n, (w,) * a):
                    rels[n].append((u,) * a)
        for (u, v), l in self.links.items():
            for n, (f, _) in zip(l.symbols, l.bits):
                if f:
                    rels[n].append((u, v))
        return Structure(self.nodes, rels, sig)


def _chunks(xs: list, k: int) -> list[list]:
    q, r = divmod(len(xs), k)
    out, i = [], 0
    for j in range(k):
        n = q + (1 if j < r else 0)
        out.append(xs[i:i + n])
        i += n
    return out


def _fill(S: _Side, X: list, Y: list, L: list, same: bool) -> None:
    """Assign links between two cells so every copy on either side sees all of L."""
    if not L:
        raise AssertionError("empty link-type set between populated cells")
    if same:
        M11, M21, M12, M22 = _chunks(X, 4)
    else:
        M11, M21 = _chunks(X, 2)
        M12, M22 = _chunks(Y, 2)
    for P, Q in ((M11, M12), (M21, M22)):
        for i, a in enumerate(P):
            for k, l in enumerate(L):
                S.set(a, Q[(i + k) % len(Q)], l)
    for Q, P in ((M12, M21), (M22, M11)):
        for i, b in enumerate(Q):
            for k, l in enumerate(L):
                S.set(P[(i + k) % len(P)], b, l)
    for a in X:
        for b in Y:
            if a != b and (a, b) not in S.links:
                S.set(a, b, L[0])


def shrink(A1: PointedStructure, A2: PointedStructure, tau: Iterable[str], phi: Formula | None = None,
           psi: Formula | None = None) -> ShrunkModelPair:
    """Rebuild a bisimilar pair from copies of 1-types and mosaics.

    Kings keep the links of their unique witnesses; pawns are linked so
    that every copy sees exactly the link-types its cell sees in the
    source.  Copy counts are the smallest the link assignment needs.
    """
    tau = tuple(sorted(set(tau)))
    if len(A1.point) != len(A2.point) or len(A1.point) > 2:
        raise ValueError("distinguished tuples must have equal length at most two")
    if not fo2_bisimilar(A1, A2, tau):
        raise ValueError("the input pair is not two-variable bisimilar")
    forms = [f for f in (phi, psi) if f is not None]
    closure = Fo2Closure(forms, A1.structure.signature | A2.structure.signature)
    T = mosaics_of(A1.structure, A2.structure, tau, closure)
    points = (tuple(A1.point), tuple(A2.point))

    def cell(side, a):
        return (T.type_of[(side, a)], T.mosaic((side, a)))

    # mosaic copies of pawn mosaics are keyed by the generator's class
    kings_by_side, semi_cells, pawn_sel = [], [], set()
    for side in (0, 1):
        kings, semis = [], []
        for m in sorted(T.kings):
            (klass,) = T.generators[m]
            for t in sorted(T.mosaics[m][side]):
                if T.role(side, m, t) == "king":
                    kings.append((t, m, T.members(side, klass, t)[0]))
                else:
                    semis.append((t, m))
        kings_by_side.append(kings)
        semi_cells.append(semis)

    sides = [_Side(0, T), _Side(1, T)]
    # cell-level link sets
    Lmm, Lmg = [{}, {}], [{}, {}]
    for side in (0, 1):
        S, dom = sides[side], T.structures[side].domain
        for a in dom:
            for b in dom:
                if a == b:
                    continue
                l = S.alink(a, b)
                Lmm[side].setdefault((cell(side, a), cell(side, b)), set()).add(l)
                Lmg[side].setdefault((cell(side, a), (T.type_of[(side, b)], T.cls((side, b)))), set()).add(l)

    def need_links(side, X_key, kings, realize):
        """(king, link) pairs that have to be realized into a cell."""
        S = sides[side]
        sel = []
        for t, m, w in kings:
            seen = set()
            for d in realize:
                l = S.alink(w, d)
                if l not in seen:
                    seen.add(l)
                    sel.append(((t, m), l, d))
        return sel

    # generator selection for pawn mosaic copies
    pawn_mosaics = sorted(set(range(len(T.mosaics))) - T.kings)
    for side in (0, 1):
        A = T.structures[side]
        for e in points[side]:
            if T.mosaic((side, e)) not in T.kings:
                pawn_sel.add(T.cls((side, e)))

    semi_nodes = [{}, {}]
    counts = {"king_nodes": [0, 0], "semi_nodes": [0, 0], "full_nodes": [0, 0]}
    for side in (0, 1):
        S, A = sides[side], T.structures[side]
        for t, m, w in kings_by_side[side]:
            S.add(f"K{m}.{t}", tag="new-king", type=t, mosaic=m, mcopy=None, copy=0, witness=w)
        kn = [(f"K{m}.{t}", w) for t, m, w in kings_by_side[side]]
        for u, w1 in kn:
            for v, w2 in kn:
                if u < v:
                    S.set(u, v, S.alink(w1, w2))
        for t, m in semi_cells[side]:
            (klass,) = T.generators[m]
            realize = T.members(side, klass, t)
            sel = need_links(side, (t, m), kings_by_side[side], realize)
            L_same = Lmm[side].get(((t, m), (t, m)), set())
            worst = max([len(v) for (x, y), v in Lmm[side].items() if x == (t, m) and y != (t, m)]
                        + [len(v) for (x, y), v in Lmg[side].items() if x == (t, m)] + [0])
            k = max(len(sel), 4 * len(L_same), 2 * worst, 1)
            names = []
            for c in range(k):
                w = sel[c][2] if c < len(sel) else realize[0]
                names.append(S.add(f"S{m}.{t}.{c}", tag="semi-pawn", type=t, mosaic=m, mcopy=None,
                                   copy=c, witness=w))
            semi_nodes[side][(t, m)] = names
            for u, w1 in kn:
                for v in names:
                    S.set(u, v, S.alink(w1, S.info[v]["witness"]))
        # (M): pawn territory reachable from kings and semi pawns
        for u in list(S.nodes):
            d = S.info[u]["witness"]
            seen = set()
            for d2 in A.domain:
                if d2 == d or T.mosaic((side, d2)) in T.kings:
                    continue
                key = (S.alink(d, d2), T.type_of[(side, d2)])
                if key not in seen:
                    seen.add(key)
                    pawn_sel.add(T.cls((side, d2)))
    for m in pawn_mosaics:
        if not any(T.mosaic_of_class[g] == m for g in pawn_sel):
            pawn_sel.add(T.generators[m][0])
    copies = sorted(pawn_sel)

    full_nodes = [{}, {}]
    for side in (0, 1):
        S = sides[side]
        kn = [(f"K{m}.{t}", w) for t, m, w in kings_by_side[side]]
        for g in copies:
            m = T.mosaic_of_class[g]
            for s_t in sorted(T.mosaics[m][side]):
                realize = T.members(side, g, s_t)
                sel = need_links(side, None, kings_by_side[side], realize)
                L_same = Lmm[side].get(((s_t, m), (s_t, m)), set())
                worst = max([len(v) for (x, y), v in Lmm[side].items() if x == (s_t, m)]
                            + [len(v) for (x, y), v in Lmg[side].items() if y == (s_t, g)] + [0])
                k = max(len(sel), 4 * len(L_same), 2 * worst, 1)
                names = []
                for c in range(k):
                    w = sel[c][2] if c < len(sel) else realize[0]
                    names.append(S.add(f"F{m}.{g}.{s_t}.{c}", tag="full-pawn", type=s_t, mosaic=m, mcopy=g,
                                       copy=c, witness=w, generator=T.generators[m][0]))
                full_nodes[side][(s_t, m, g)] = names
                for u, w1 in kn:
                    for v in names:
                        S.set(u, v, S.alink(w1, S.info[v]["witness"]))
        semis = sorted(semi_nodes[side])
        for i, X in enumerate(semis):
            for Y in semis[i:]:
                L = sorted(Lmm[side].get((X, Y), set()))
                _fill(S, semi_nodes[side][X], semi_nodes[side][Y], L, X == Y)
        fulls = sorted(full_nodes[side])
        for X in semis:
            for F in fulls:
                L = sorted(Lmg[side].get((X, (F[0], F[2])), set()))
                _fill(S, semi_nodes[side][X], full_nodes[side][F], L, False)
        for i, F1 in enumerate(fulls):
            for F2 in fulls[i:]:
                L = sorted(Lmm[side].get(((F1[0], F1[1]), (F2[0], F2[1])), set()))
                _fill(S, full_nodes[side][F1], full_nodes[side][F2], L, F1 == F2)
        counts["king_nodes"][side] = len(kn)
        counts["semi_nodes"][side] = sum(len(v) for v in semi_nodes[side].values())
        counts["full_nodes"][side] = sum(len(v) for v in full_nodes[side].values())
    counts["pawn_mosaic_copies"] = len(copies)
    counts["max_type_copies"] = max([len(v) for d in semi_nodes + full_nodes for v in d.values()] + [1])

    outs = [S.structure() for S in sides]

    def mcopy_of(side, a):
        m = T.mosaic((side, a))
        return None if m in T.kings else T.cls((side, a))

    def candidates(side, a):
        S = sides[side]
        t, m = cell(side, a)
        mc = mcopy_of(side, a)
        found = [u for u in S.nodes if S.info[u]["type"] == t and S.info[u]["mosaic"] == m
                 and S.info[u]["mcopy"] == mc]
        return sorted(found, key=lambda u: (S.info[u]["witness"] != a, S.nodes.index(u)))

    new_points = []
    for side in (0, 1):
        S, pt = sides[side], points[side]
        if not pt:
            new_points.append(())
        elif len(pt) == 1 or pt[0] == pt[1]:
            u = candidates(side, pt[0])[0]
            new_points.append((u,) * len(pt))
        else:
            want = S.alink(pt[0], pt[1])
            pick = next(((u, v) for u in candidates(side, pt[0]) for v in candidates(side, pt[1])
                         if u != v and S.links.get((u, v)) == want), None)
            if pick is None:
                raise AssertionError("no pair of copies carries the link of the distinguished tuple")
            new_points.append(pick)
    bounds = size_bounds(input_size(phi, psi)) if phi is not None and psi is not None else None
    total = max(counts["max_type_copies"], counts["pawn_mosaic_copies"])
    if bounds is not None and not bounds.within_k1(total):
        raise AssertionError("copy counts exceed the size bound")
    return ShrunkModelPair(PointedStructure(outs[0], new_points[0]), PointedStructure(outs[1], new_points[1]),
                           (sides[0].info, sides[1].info), T, counts, bounds)


def check_shrink(pair: ShrunkModelPair, tau: Iterable[str], phi: Formula | None = None,
                 psi: Formula | None = None, xs: Sequence[str] = ()) -> list[str]:
    """All violated properties of a shrink output (empty when everything holds)."""
    T = pair.table
    bad = []
    outs = (pair.left.structure, pair.right.structure)
    # every element realizes its 1-type
    for side, B in enumerate(outs):
        ev = Evaluator(B)
        for u in B.domain:
            t = T.types[pair.provenance[side][u]["type"]]
            for g in T.closure.members:
                if ev(g, {"x": u}) != (g in t):
                    bad.append(f"type mismatch: side {side} element {u} formula {g}")
                    break
    # mosaic copies stay inside single bisimulation classes
    tc = TwoVarClasses(list(outs), tau)
    if not tc.is_global(0, 1):
        bad.append("bisimulation: outputs not globally bisimilar")
    groups: dict = {}
    for side, B in enumerate(outs):
        for u in B.domain:
            info = pair.provenance[side][u]
            groups.setdefault((info["mosaic"], info["mcopy"]), set()).add(tc.cls[(side, u)])
    for key, cl in groups.items():
        if len(cl) > 1:
            bad.append(f"bisimulation: mosaic copy {key} splits into {len(cl)} classes")
    # realizability of link sets per cell
    for side, B in enumerate(outs):
        A = T.structures[side]
        prov = pair.provenance[side]
        syms = binary_symbols(A)

        def cell_of(u):
            i = prov[u]
            return (i["tag"] == "new-king", i["type"], i["mosaic"], i["mcopy"])

        cells: dict = {}
        for u in B.domain:
            cells.setdefault(cell_of(u), []).append(u)
        src: dict = {}
        for a in A.domain:
            for b in A.domain:
                if a != b:
                    src.setdefault((T.type_of[(side, a)], T.mosaic((side, a))), {}).setdefault(
                        (T.type_of[(side, b)], T.mosaic((side, b))), set()).add(link_type(A, a, b, syms))
        src_g: dict = {}
        for a in A.domain:
            for b in A.domain:
                if a != b:
                    ka = (T.type_of[(side, a)], T.mosaic((side, a)))
                    kb = (T.type_of[(side, b)], T.mosaic((side, b)))
                    l = link_type(A, a, b, syms)
                    src_g.setdefault(("cell", ka), {}).setdefault(("class", kb[0], T.cls((side, b))), set()).add(l)
                    src_g.setdefault(("class", ka[0], T.cls((side, a))), {}).setdefault(("cell", kb), set()).add(l)
        for u in B.domain:
            iu = prov[u]
            if iu["tag"] == "new-king":
                continue
            for key, vs in cells.items():
                if key[0]:
                    continue
                got = {link_type(B, u, v, syms) for v in vs if v != u}
                if (iu["mcopy"] is None) == (key[3] is None):
                    want = src.get((iu["type"], iu["mosaic"]), {}).get((key[1], key[2]), set())
                elif iu["mcopy"] is None:
                    want = src_g.get(("cell", (iu["type"], iu["mosaic"])), {}).get(("class", key[1], key[3]), set())
                else:
                    want = src_g.get(("class", iu["type"], iu["mcopy"]), {}).get(("cell", (key[1], key[2])), set())
                if got != want:
                    bad.append(f"link realizability: side {side} element {u} towards cell {key}")
    # distinguished tuples
    from .semantics import holds_at
    if phi is not None and not holds_at(pair.left, phi, xs):
        bad.append("left point does not satisfy the left formula")
    if psi is not None and not holds_at(pair.right, psi, xs):
        bad.append("right point does not satisfy the right formula")
    if not fo2_bisimilar(pair.left, pair.right, tau):
        bad.append("distinguished tuples not bisimilar")
    return bad


# ---------------------------------------------------------------- driver

@dataclass
class Fo2Verdict:
    outcome: str  # CONSISTENT | INCONSISTENT | UNKNOWN
    pair: tuple | None = None  # (left, right) pointed models
    certificate: object = None
    shrunk: ShrunkModelPair | None = None
    interpolant: Formula | None = None
    stats: dict = field(default_factory=dict)


def decide_fo2_joint_consistency(phi: Formula, psi: Formula, tau: Iterable[str],
                                 budget: SearchBudget = SearchBudget(3), xs: Sequence[str] | None = None,
                                 witnesses: Sequence = (), interpolant_cap: int = 3,
                                 normalize: bool = False, enumerate_up_to: int | None = None) -> Fo2Verdict:
    """Two-sided semi-decision: bisimilar model pair or verified interpolant.

    Completeness would need models up to the double-exponential size bound,
    which is reported in stats but never searched.
    """
    from . import oracle

    _require_fo2(phi, psi)
    tau = tuple(sorted(set(tau)))
    xs = tuple(xs) if xs is not None else tuple(v for v in VARS if v in free_vars(phi) | free_vars(psi))
    stats = {"size_bounds": size_bounds(input_size(phi, psi)).log2(), "model_cap": budget.max_size}
    found = oracle.search_model_pair(phi, psi, tau, "FO2", budget, xs=xs, witnesses=witnesses,
                                     enumerate_up_to=enumerate_up_to)
    stats["pair_search"] = found.stats
    if found.status == "FOUND":
        left, right = found.left, found.right
        shrunk = None
        if normalize and max((signature_of(phi) | signature_of(psi)).values(), default=0) <= 2:
            shrunk = shrink(left, right, tau, phi, psi)
        return Fo2Verdict("CONSISTENT", (left, right), found.certificate, shrunk, None, stats)
    theta = oracle.enumerate_interpolants(phi, neg(psi), tau, interpolant_cap, budget, logic="FO2", xs=xs)
    stats["enumeration"] = theta.stats
    if theta.formula is not None:
        return Fo2Verdict("INCONSISTENT", None, None, None, theta.formula, stats)
    return Fo2Verdict("UNKNOWN", None, None, None, None, stats)
