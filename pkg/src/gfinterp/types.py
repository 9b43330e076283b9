"""Closure sets, types over a variable pool, and universes of realized types.

Closure members are stored as templates: canonical formulas whose free
variables are f0, f1, ... in order of first occurrence and whose bound
variables are b0, b1, ... in binding order.  An instantiated closure
formula is a pair (template id, argument tuple) with distinct pool
variables as arguments; identifying arguments yields an instance of a
different template, and the template set is closed under that.

A type over a variable set X stores only its positive members: the
instances over X whose template holds.  Every instance over X is in the
type or has its negation there.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

from .semantics import Evaluator, SearchBudget, Structure, enumerate_structures
from .syntax import (
    And, Atom, Const, Eq, Exists, Formula, Not, check_fragment, core,
    free_vars, quantifier_rank, signature_of, substitute,
)

Instance = tuple  # (tid, args)


def canon(f: Formula) -> tuple[Formula, tuple[str, ...]]:
    """Canonical renaming: returns the template and the original free variables in order."""
    fmap: dict[str, str] = {}
    order: list[str] = []
    counter = [0]

    def name(v, bmap):
        if v in bmap:
            return bmap[v]
        if v not in fmap:
            fmap[v] = f"f{len(fmap)}"
            order.append(v)
        return fmap[v]

    def walk(g, bmap):
        if isinstance(g, Atom):
            return Atom(g.pred, tuple(name(a, bmap) for a in g.args))
        if isinstance(g, Eq):
            return Eq(name(g.left, bmap), name(g.right, bmap))
        if isinstance(g, Const):
            return g
        if isinstance(g, Not):
            return Not(walk(g.sub, bmap))
        if isinstance(g, And):
            return And(tuple(walk(c, bmap) for c in g.args))
        if isinstance(g, Exists):
            inner = dict(bmap)
            new = []
            for v in g.vars:
                inner[v] = f"b{counter[0]}"
                counter[0] += 1
                new.append(inner[v])
            return Exists(tuple(new), walk(g.body, inner))
        raise TypeError(f"closure formulas must be in core form, got {g!r}")

    return walk(f, {}), tuple(order)


@dataclass
class Template:
    tid: int
    formula: Formula
    k: int
    rank: int
    guard_pred: str | None = None   # relation of a guard shape, "=" for f0=f0
    strict: bool = False
    body: tuple | None = None       # (body tid, body argument names) for existentials
    bound: tuple[str, ...] = ()

    @property
    def is_exists(self) -> bool:
        return self.body is not None

    @property
    def vars(self) -> tuple[str, ...]:
        return tuple(f"f{i}" for i in range(self.k))


def _set_partitions(k: int) -> Iterator[tuple[int, ...]]:
    def rec(prefix, blocks):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for b in range(blocks + 1):
            yield from rec(prefix + [b], max(blocks, b + 1))
    yield from rec([], 0)


def _guard_patterns(arity: int) -> Iterator[tuple[str, ...]]:
    """Argument lists over free f* and bound b* names, canonical up to renaming."""
    def rec(prefix, nf, nb):
        if len(prefix) == arity:
            yield tuple(prefix)
            return
        for i in range(nf):
            yield from rec(prefix + [f"f{i}"], nf, nb)
        yield from rec(prefix + [f"f{nf}"], nf + 1, nb)
        for i in range(nb):
            yield from rec(prefix + [f"b{i}"], nf, nb)
        yield from rec(prefix + [f"b{nb}"], nf, nb + 1)
    yield from rec([], 0, 0)


class Closure:
    """The closure of two formulas with a shared free-variable tuple."""

    def __init__(self, phi: Formula, psi: Formula | None = None, xs: Sequence[str] | None = None,
                 check: bool = True):
        psi = psi if psi is not None else phi
        if check:
            for f in (phi, psi):
                rep = check_fragment(f, "GF")
                if not rep.ok:
                    raise ValueError(f"not a guarded formula: {rep.violations[0][1]}")
        self.phi, self.psi = phi, psi
        self.xs = tuple(xs) if xs is not None else tuple(sorted(free_vars(phi) | free_vars(psi)))
        if not (free_vars(phi) | free_vars(psi)) <= set(self.xs):
            raise ValueError("free variables outside the declared tuple")
        self.signature = signature_of(phi) | signature_of(psi)
        self.width = max(self.signature.max_arity(), 1)
        self.fv = len(self.xs)
        self.n = max(self.width, self.fv)
        self.pool = tuple(f"x{i}" for i in range(1, 2 * self.n + 1))
        self.templates: list[Template] = []
        self.index: dict[Formula, int] = {}
        self._ident: dict = {}
        self._build()
        base = dict(zip(self.xs, self.pool))
        self.phi_inst = self.instance_of(substitute(core(phi), base))
        self.psi_inst = self.instance_of(substitute(core(psi), base))

    # -- construction
    def _add(self, f: Formula, work: list) -> int:
        t, _ = canon(f)
        if isinstance(t, Not):
            t, _ = canon(t.sub)
        if t in self.index:
            return self.index[t]
        tid = len(self.templates)
        k = len(free_vars(t))
        tmpl = Template(tid, t, k, quantifier_rank(t))
        self.templates.append(tmpl)
        self.index[t] = tid
        work.append(tid)
        return tid

    def _build(self):
        work: list[int] = []
        for f in (self.phi, self.psi):
            self._add(core(f), work)
        self._add(Eq("u", "v"), work)
        self._add(Eq("u", "u"), work)
        for name, ar in self.signature.items():
            for pat in _guard_patterns(ar):
                bound = tuple(dict.fromkeys(a for a in pat if a.startswith("b")))
                a = Atom(name, pat)
                self._add(Exists(bound, a) if bound else a, work)
        while work:
            tid = work.pop()
            t = self.templates[tid].formula
            for c in t.children():
                self._add(c, work)
            k = self.templates[tid].k
            for part in _set_partitions(k):
                if len(set(part)) == k:
                    continue
                self._add(substitute(t, {f"f{i}": f"f{part[i]}" for i in range(k)}), work)
        for tmpl in self.templates:
            self._classify(tmpl)

    def _classify(self, tmpl: Template):
        f = tmpl.formula
        if isinstance(f, Eq) and f.left == f.right:
            tmpl.guard_pred, tmpl.strict = "=", True
        elif isinstance(f, Atom):
            tmpl.guard_pred, tmpl.strict = f.pred, True
        elif isinstance(f, Exists) and isinstance(f.body, Atom) and set(f.vars) <= set(f.body.args):
            tmpl.guard_pred = f.body.pred
        if isinstance(f, Exists):
            body_t, body_args = canon(f.body)
            pos = body_t.sub if isinstance(body_t, Not) else body_t
            if isinstance(body_t, Not):
                raise ValueError("existential body is a negation")
            tmpl.body = (self.index[canon(pos)[0]], body_args)
            tmpl.bound = f.vars

    # -- instances
    def instance_of(self, f: Formula) -> tuple[Instance, bool]:
        """The (template, args) instance of a formula, with its polarity."""
        pol = True
        if isinstance(f, Not):
            f, pol = f.sub, False
        t, args = canon(f)
        if isinstance(t, Not):
            t, args, pol = canon(t.sub)[0], canon(t.sub)[1], not pol
        return (self.index[t], args), pol

    def ident(self, tid: int, args: tuple[str, ...]) -> Instance:
        """Instance for a template applied to possibly repeated arguments."""
        key = (tid, args)
        hit = self._ident.get(key)
        if hit is None:
            if len(set(args)) == len(args):
                hit = key
            else:
                t = self.templates[tid]
                g = substitute(t.formula, {f"f{i}": a for i, a in enumerate(args)})
                (tid2, args2), pol = self.instance_of(g)
                assert pol
                hit = (tid2, args2)
            self._ident[key] = hit
        return hit

    def instances(self, X: Iterable[str], exact: bool = False) -> list[Instance]:
        """cl[X]: every template under every injective map of its variables into X."""
        xs = sorted(X, key=self.pool_key)
        out = []
        for t in self.templates:
            if t.k > len(xs):
                continue
            for args in itertools.permutations(xs, t.k):
                if exact and set(args) != set(xs):
                    continue
                out.append((t.tid, args))
        return out

    def pool_key(self, v: str) -> tuple:
        return _pool_key(v)

    def formula_of(self, inst: Instance) -> Formula:
        tid, args = inst
        return substitute(self.templates[tid].formula, {f"f{i}": a for i, a in enumerate(args)})

    def guards(self, tau: Iterable[str]) -> set[int]:
        tau = set(tau) | {"="}
        return {t.tid for t in self.templates if t.guard_pred in tau}

    def strict_guards(self, tau: Iterable[str]) -> set[int]:
        tau = set(tau) | {"="}
        return {t.tid for t in self.templates if t.guard_pred in tau and t.strict}

    def __len__(self) -> int:
        return len(self.templates)

    def fingerprint(self) -> str:
        import hashlib
        text = "\n".join(str(t.formula) for t in self.templates) + "|" + ",".join(self.xs)
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def closure(phi: Formula, psi: Formula | None = None, xs: Sequence[str] | None = None) -> Closure:
    return Closure(phi, psi, xs)


def instantiate(c: Closure, xs: Iterable[str]) -> list[Formula]:
    xs = list(xs)
    bad = [x for x in xs if x not in c.pool]
    if bad:
        raise ValueError(f"variables outside the pool: {bad}")
    return [c.formula_of(i) for i in c.instances(xs)]


# ---------------------------------------------------------------- types

_INTERN: dict = {}


class XiType:
    """A type: variable set plus the positive members of the instantiated closure.

    Instances are interned, so equal types are usually the same object.
    """

    __slots__ = ("vars", "members", "_h", "_key", "_rc")

    def __new__(cls, vars: Iterable[str], members: Iterable[Instance]):
        vs, ms = frozenset(vars), frozenset(members)
        key = (vs, ms)
        obj = _INTERN.get(key)
        if obj is None:
            obj = object.__new__(cls)
            obj.vars, obj.members = vs, ms
            obj._h = hash(key)
            obj._key = None
            obj._rc = {}
            if len(_INTERN) > 5_000_000:
                _INTERN.clear()
            _INTERN[key] = obj
        return obj

    def __getnewargs__(self):
        return (self.vars, self.members)

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return self is other or (isinstance(other, XiType) and self._h == other._h and
                                 self.vars == other.vars and self.members == other.members)

    def __repr__(self):
        return f"XiType({sorted(self.vars)}, {len(self.members)} members)"

    def restrict(self, X: Iterable[str]) -> XiType:
        X = frozenset(X) & self.vars
        if X == self.vars:
            return self
        hit = self._rc.get(X)
        if hit is None:
            hit = self._rc[X] = XiType(X, (m for m in self.members if X.issuperset(m[1])))
        return hit

    def rename(self, mapping: Mapping[str, str]) -> XiType:
        return XiType((mapping.get(v, v) for v in self.vars),
                      ((tid, tuple(mapping.get(a, a) for a in args)) for tid, args in self.members))

    def holds(self, inst: Instance, positive: bool = True) -> bool:
        return (inst in self.members) == positive

    def sort_key(self) -> tuple:
        """Deterministic total order, independent of string hashing."""
        if self._key is None:
            self._key = (len(self.vars), tuple(sorted(self.vars, key=_pool_key)), tuple(sorted(self.members)))
        return self._key


def _pool_key(v: str) -> tuple:
    return (0, int(v[1:]), "") if v.startswith("x") and v[1:].isdigit() else (1, 0, v)


def restrict_type(t: XiType, X: Iterable[str]) -> XiType:
    X = frozenset(X)
    if not X <= t.vars:
        raise ValueError("restriction set is not contained in the type's variables")
    return t.restrict(X)


class TypeComputer:
    """Types of tuples in one structure, cached on canonical pool prefixes."""

    def __init__(self, c: Closure, s: Structure):
        self.c = c
        self.s = s.with_signature(s.signature | c.signature) if not c.signature.issubset(s.signature) else s
        self.ev = Evaluator(self.s)
        self._canon: dict = {}

    def canonical(self, elems: tuple) -> XiType:
        hit = self._canon.get(elems)
        if hit is None:
            xs = self.c.pool[:len(elems)]
            v = dict(zip(xs, elems))
            members = []
            for tid, args in self.c.instances(xs):
                t = self.c.templates[tid]
                if self.ev(t.formula, {f"f{i}": v[a] for i, a in enumerate(args)}):
                    members.append((tid, args))
            hit = XiType(xs, members)
            self._canon[elems] = hit
        return hit

    def tp(self, xs: Sequence[str], elems: Sequence) -> XiType:
        elems = tuple(elems)
        if len(set(elems)) != len(elems):
            raise ValueError("types are defined for tuples of distinct elements")
        if len(xs) != len(elems) or len(set(xs)) != len(xs):
            raise ValueError("variables must be distinct and match the tuple")
        base = self.canonical(elems)
        return base.rename(dict(zip(self.c.pool[:len(elems)], xs)))


def tp(c: Closure, s: Structure, v: Mapping[str, object]) -> XiType:
    xs = list(v)
    return TypeComputer(c, s).tp(xs, [v[x] for x in xs])


def is_coherent(c: Closure, t: XiType) -> bool:
    """Boolean coherence, and distinct variables denote distinct elements."""
    eq = c.index.get(Eq("f0", "f1"))
    for tid, args in c.instances(t.vars):
        tmpl = c.templates[tid]
        f = tmpl.formula
        if tid == eq and (tid, args) in t.members:
            return False
        if isinstance(f, Eq) and f.left == f.right and (tid, args) not in t.members:
            return False
        if isinstance(f, And):
            sub = {f"f{i}": a for i, a in enumerate(args)}
            want = True
            for child in f.args:
                inst, pol = c.instance_of(substitute(child, sub))
                if (inst in t.members) != pol:
                    want = False
                    break
            if want != ((tid, args) in t.members):
                return False
        if isinstance(f, Const) and f.value != ((tid, args) in t.members):
            return False
    return True


# ---------------------------------------------------------------- universes

@dataclass
class TypeUniverse:
    """Realized types, stored on canonical variable prefixes.

    exact is True only when every type is known to be realized by one of
    the recorded structures.
    """
    closure: Closure
    canonical: dict[int, dict[XiType, tuple[int, tuple]]] = field(default_factory=dict)
    structures: list[Structure] = field(default_factory=list)
    exact: bool = False
    provenance: dict[int, str] = field(default_factory=dict)

    def add_structure(self, s: Structure, tag: str = "realized") -> int:
        idx = len(self.structures)
        self.structures.append(s)
        self.provenance[idx] = tag
        tc = TypeComputer(self.closure, s)
        for k in range(0, self.closure.n + 1):
            for elems in itertools.permutations(s.domain, k):
                t = tc.canonical(elems)
                self.canonical.setdefault(k, {}).setdefault(t, (idx, elems))
        return idx

    def types_over(self, X: Iterable[str]) -> list[XiType]:
        xs = sorted(X, key=self.closure.pool_key)
        k = len(xs)
        out = set()
        for t in self.canonical.get(k, {}):
            for perm in itertools.permutations(xs):
                out.add(t.rename(dict(zip(self.closure.pool[:k], perm))))
        return sorted(out, key=XiType.sort_key)

    def __contains__(self, t: XiType) -> bool:
        k = len(t.vars)
        xs = sorted(t.vars, key=self.closure.pool_key)
        for perm in itertools.permutations(xs):
            back = dict(zip(perm, self.closure.pool[:k]))
            if t.rename(back) in self.canonical.get(k, {}):
                return True
        return False

    def witness(self, t: XiType):
        """(structure index, elements for the sorted variables) realizing t, or None."""
        k = len(t.vars)
        xs = sorted(t.vars, key=self.closure.pool_key)
        for perm in itertools.permutations(xs):
            back = dict(zip(perm, self.closure.pool[:k]))
            hit = self.canonical.get(k, {}).get(t.rename(back))
            if hit is not None:
                idx, elems = hit
                pos = {p: e for p, e in zip(perm, elems)}
                return idx, tuple(pos[x] for x in xs)
        return None

    def size(self) -> int:
        return sum(len(d) for d in self.canonical.values())


def exactness_threshold(sig: Mapping[str, int], n: int) -> int | None:
    """Domain size that realizes every type, when one is known.

    Over relations of arity at most one, guarded formulas cannot count and
    a tuple's type depends only on the atomic types of its elements and on
    which atomic types occur; 2^s + n - 1 elements cover every case.
    """
    if any(a > 1 for a in sig.values()):
        return None
    s = sum(1 for a in sig.values() if a == 1)
    return 2 ** s + max(n - 1, 0)


def build_universe(c: Closure, tau: Iterable[str] = (), budget: SearchBudget = SearchBudget(3),
                   seeds: Iterable[Structure] = (), enumerate_sizes: bool = True) -> TypeUniverse:
    """Types realized in all structures up to the budget size (iso-pruned) plus seeds."""
    u = TypeUniverse(c)
    count = 0
    capped = False
    if enumerate_sizes:
        for size in range(1, budget.max_size + 1):
            for s in enumerate_structures(c.signature, size, iso_prune=True):
                count += 1
                if count > budget.max_candidates:
                    capped = True
                    break
                u.add_structure(s)
            if capped:
                break
    for s in seeds:
        u.add_structure(s, "seed")
    thr = exactness_threshold(c.signature, c.n)
    u.exact = enumerate_sizes and not capped and thr is not None and budget.max_size >= thr
    return u
