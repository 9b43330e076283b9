"""Finite relational structures, model checking and bounded model search."""
from __future__ import annotations

import hashlib
import itertools
import re
import time
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Hashable, Iterable, Iterator, Mapping, Sequence

from .syntax import (
    And, Atom, Const, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or,
    Signature, conj, free_vars, neg, signature_of,
)

Element = Hashable


class Structure:
    """A finite structure: an ordered domain and one relation per symbol."""

    def __init__(self, domain: Iterable[Element], relations: Mapping[str, Iterable[Sequence[Element]]] = (),
                 signature: Mapping[str, int] | None = None):
        self.domain = tuple(domain)
        if not self.domain:
            raise ValueError("structures need a non-empty domain")
        if len(set(self.domain)) != len(self.domain):
            raise ValueError("repeated domain element")
        self.index = {a: i for i, a in enumerate(self.domain)}
        rels: dict[str, frozenset] = {}
        arities: dict[str, int] = dict(signature or {})
        for name, tuples in dict(relations).items():
            ts = frozenset(tuple(t) for t in tuples)
            for t in ts:
                if arities.setdefault(name, len(t)) != len(t):
                    raise ValueError(f"{name} has tuples of arity {arities[name]} and {len(t)}")
                for a in t:
                    if a not in self.index:
                        raise ValueError(f"{name}{t} mentions {a!r} outside the domain")
            rels[name] = ts
        self.signature = Signature(arities)
        self.relations = {name: rels.get(name, frozenset()) for name in self.signature}
        self._hash = None

    def holds(self, pred: str, args: Sequence[Element]) -> bool:
        try:
            return tuple(args) in self.relations[pred]
        except KeyError:
            raise KeyError(f"unknown relation {pred}") from None

    def __len__(self) -> int:
        return len(self.domain)

    def _key(self):
        return (self.domain, tuple((n, self.signature[n], tuple(sorted(self.relations[n], key=self._tkey)))
                                   for n in self.signature))

    def _tkey(self, t):
        return tuple(self.index[a] for a in t)

    def __eq__(self, other):
        return isinstance(other, Structure) and self._key() == other._key()

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(self._key())
        return self._hash

    def __repr__(self):
        return f"Structure({to_structure_text(self)!r})"

    def with_signature(self, sig: Mapping[str, int]) -> Structure:
        """Expand by empty relations (or drop symbols) to exactly sig."""
        rels = {n: self.relations.get(n, ()) for n in sig}
        return Structure(self.domain, rels, sig)

    def reduct(self, names: Iterable[str]) -> Structure:
        keep = set(names)
        return Structure(self.domain, {n: r for n, r in self.relations.items() if n in keep},
                         {n: a for n, a in self.signature.items() if n in keep})

    def rename(self, mapping: Mapping[Element, Element]) -> Structure:
        return Structure([mapping[a] for a in self.domain],
                         {n: [tuple(mapping[a] for a in t) for t in r] for n, r in self.relations.items()},
                         self.signature)

    def add(self, facts: Mapping[str, Iterable[Sequence[Element]]]) -> Structure:
        rels = {n: set(r) for n, r in self.relations.items()}
        for n, ts in facts.items():
            rels.setdefault(n, set()).update(tuple(t) for t in ts)
        return Structure(self.domain, rels, self.signature | {n: len(next(iter(ts))) for n, ts in
                                                            ((n, rels[n]) for n in facts) if ts})

    def fingerprint(self) -> str:
        return hashlib.sha256(to_structure_text(self).encode()).hexdigest()[:16]


def restrict(s: Structure, X: Iterable[Element]) -> Structure:
    """Induced substructure on X, keeping the domain order of s."""
    keep = set(X)
    if not keep:
        raise ValueError("cannot restrict to the empty set")
    if not keep <= set(s.domain):
        raise ValueError("restriction set is not a subset of the domain")
    return Structure([a for a in s.domain if a in keep],
                     {n: [t for t in r if set(t) <= keep] for n, r in s.relations.items()},
                     s.signature)


def disjoint_union(*parts: Structure, tags: Sequence[Hashable] | None = None) -> tuple[Structure, list[dict]]:
    """Disjoint union with elements renamed to (tag, element); returns the embeddings too."""
    tags = list(tags) if tags is not None else list(range(len(parts)))
    sig = Signature({})
    for p in parts:
        sig = sig | p.signature
    dom, rels, maps = [], {n: [] for n in sig}, []
    for tag, p in zip(tags, parts):
        m = {a: (tag, a) for a in p.domain}
        maps.append(m)
        dom.extend(m[a] for a in p.domain)
        for n, r in p.relations.items():
            rels[n].extend(tuple(m[a] for a in t) for t in r)
    return Structure(dom, rels, sig), maps


@dataclass(frozen=True)
class PointedStructure:
    structure: Structure
    point: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "point", tuple(self.point))
        for a in self.point:
            if a not in self.structure.index:
                raise ValueError(f"point element {a!r} not in the domain")

    def __iter__(self):
        return iter((self.structure, self.point))


@dataclass(frozen=True)
class SearchBudget:
    max_size: int = 4
    max_candidates: int = 10**6
    time_limit: float | None = None
    min_size: int = 1

    def __post_init__(self):
        if self.max_size < 1 or self.max_candidates < 1 or self.min_size < 1:
            raise ValueError("budget limits must be positive")
        if self.time_limit is not None and self.time_limit <= 0:
            raise ValueError("time limit must be positive")


class _Clock:
    def __init__(self, budget: SearchBudget):
        self.deadline = None if budget.time_limit is None else time.monotonic() + budget.time_limit
        self.left = budget.max_candidates

    def tick(self, n: int = 1) -> bool:
        self.left -= n
        if self.left < 0:
            return False
        return self.deadline is None or time.monotonic() < self.deadline


# ---------------------------------------------------------------- evaluation

@lru_cache(maxsize=None)
def _fv(f: Formula) -> tuple[str, ...]:
    return tuple(sorted(free_vars(f)))


def _guard_atom(vs: tuple[str, ...], body: Formula, universal: bool) -> Atom | None:
    if universal:
        if not isinstance(body, Implies):
            return None
        cands = body.left.args if isinstance(body.left, And) else (body.left,)
    else:
        cands = body.args if isinstance(body, And) else (body,)
    need = set(vs)
    for c in cands:
        if isinstance(c, Atom) and need <= set(c.args):
            return c
    return None


class Evaluator:
    """Memoised Tarskian evaluation over one structure."""

    def __init__(self, s: Structure):
        self.s = s
        self.memo: dict = {}

    def __call__(self, f: Formula, v: Mapping[str, Element]) -> bool:
        fv = _fv(f)
        try:
            key = (f, tuple(v[x] for x in fv))
        except KeyError as e:
            raise KeyError(f"assignment undefined on variable {e.args[0]}") from None
        hit = self.memo.get(key)
        if hit is None:
            hit = self._eval(f, v)
            self.memo[key] = hit
        return hit

    def _eval(self, f: Formula, v: Mapping[str, Element]) -> bool:
        s = self.s
        if isinstance(f, Atom):
            return s.holds(f.pred, tuple(v[a] for a in f.args))
        if isinstance(f, Eq):
            return v[f.left] == v[f.right]
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Not):
            return not self(f.sub, v)
        if isinstance(f, And):
            return all(self(c, v) for c in f.args)
        if isinstance(f, Or):
            return any(self(c, v) for c in f.args)
        if isinstance(f, Implies):
            return (not self(f.left, v)) or self(f.right, v)
        if isinstance(f, Iff):
            return self(f.left, v) == self(f.right, v)
        if isinstance(f, (Exists, Forall)):
            universal = isinstance(f, Forall)
            for w in self._assignments(f.vars, f.body, v, universal):
                if self(f.body, w) != universal:
                    return not universal
            return universal
        raise TypeError(f)

    def _assignments(self, vs, body, v, universal) -> Iterator[dict]:
        base = {k: val for k, val in v.items() if k not in vs}
        g = _guard_atom(vs, body, universal)
        if g is not None:
            seen = set()
            for t in self.s.relations.get(g.pred, ()):
                w = dict(base)
                ok = True
                for a, e in zip(g.args, t):
                    if a in vs:
                        if w.setdefault(a, e) != e:
                            ok = False
                            break
                    elif w[a] != e:
                        ok = False
                        break
                if ok:
                    key = tuple(w[x] for x in vs)
                    if key not in seen:
                        seen.add(key)
                        yield w
            return
        for combo in itertools.product(self.s.domain, repeat=len(vs)):
            w = dict(base)
            w.update(zip(vs, combo))
            yield w


def eval(s: Structure, v: Mapping[str, Element], f: Formula) -> bool:  # noqa: A001
    missing = free_vars(f) - set(v)
    if missing:
        raise KeyError(f"assignment undefined on {sorted(missing)}")
    for g in signature_of(f):
        if g not in s.signature:
            raise KeyError(f"unknown relation {g}")
    return Evaluator(s)(f, v)


def holds_at(ps: PointedStructure, f: Formula, xs: Sequence[str]) -> bool:
    return eval(ps.structure, dict(zip(xs, ps.point)), f)


# ---------------------------------------------------------------- enumeration

def count_structures(sig: Mapping[str, int], size: int) -> int:
    return 2 ** sum(size ** a for a in sig.values())


def enumerate_structures(sig: Mapping[str, int], size: int, iso_prune: bool = False,
                         domain: Sequence[Element] | None = None) -> Iterator[Structure]:
    """Every structure over sig with domain 1..size, bitmaps in lexicographic order.

    With iso_prune only the first member of each isomorphism class is emitted.
    """
    if size < 1:
        raise ValueError("size must be at least 1")
    sig = Signature(sig)
    dom = tuple(domain) if domain is not None else tuple(range(1, size + 1))
    slots = [(name, list(itertools.product(dom, repeat=ar))) for name, ar in sig.items()]
    widths = [len(ts) for _, ts in slots]
    perms = list(itertools.permutations(range(size))) if iso_prune else None
    seen: set = set()
    for bits in itertools.product(*(range(2 ** w) for w in widths)):
        rels = {name: [t for j, t in enumerate(ts) if (b >> j) & 1] for (name, ts), b in zip(slots, bits)}
        s = Structure(dom, rels, sig)
        if iso_prune:
            canon = _canonical_key(s, perms)
            if canon in seen:
                continue
            seen.add(canon)
        yield s


def _canonical_key(s: Structure, perms) -> tuple:
    idx = s.index
    best = None
    for p in perms:
        key = tuple(tuple(sorted(tuple(p[idx[a]] for a in t) for t in s.relations[n])) for n in s.signature)
        if best is None or key < best:
            best = key
    return best


# ---------------------------------------------------------------- bounded search

@dataclass(frozen=True)
class SearchResult:
    """Outcome of a budgeted search.

    status is FOUND (a witness is attached), EXHAUSTED (every structure up to
    the size bound was ruled out) or UNKNOWN (a candidate or time limit cut
    the search short).
    """
    status: str
    witness: PointedStructure | None = None
    sizes_done: int = 0
    stats: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == "FOUND"


def equality_patterns(k: int, max_blocks: int) -> Iterator[tuple[int, ...]]:
    """Restricted growth strings: ways to identify k positions."""
    def rec(prefix, blocks):
        if len(prefix) == k:
            yield tuple(prefix)
            return
        for b in range(min(blocks + 1, max_blocks)):
            yield from rec(prefix + [b], max(blocks, b + 1))
    yield from rec([], 0)


def find_model(f: Formula, budget: SearchBudget = SearchBudget(), xs: Sequence[str] | None = None,
               signature: Mapping[str, int] | None = None, method: str = "sat",
               extra_sizes: Iterable[int] = ()) -> SearchResult:
    """Smallest pointed model of f within the budget.

    The point lists the values of xs (default: sorted free variables).  The
    default method grounds f over each domain size and runs a clause solver;
    method="enumerate" walks the bitmap enumeration instead.
    """
    xs = tuple(xs) if xs is not None else _fv(f)
    sig = Signature(signature) if signature is not None else signature_of(f)
    clock = _Clock(budget)
    sizes = list(range(budget.min_size, budget.max_size + 1))
    for k in sizes:
        if method == "enumerate":
            res = _enumerate_model(f, xs, sig, k, clock)
        else:
            from .sat import ground_search
            res = ground_search(f, xs, sig, k, clock)
        if res == "UNKNOWN":
            return SearchResult("UNKNOWN", None, k - 1)
        if res is not None:
            return SearchResult("FOUND", res, k)
    return SearchResult("EXHAUSTED", None, budget.max_size)


def _enumerate_model(f, xs, sig, k, clock):
    for s in enumerate_structures(sig, k):
        ev = Evaluator(s)
        for pat in equality_patterns(len(xs), k):
            if not clock.tick():
                return "UNKNOWN"
            point = tuple(s.domain[i] for i in pat)
            if ev(f, dict(zip(xs, point))):
                return PointedStructure(s, point)
    return None


@dataclass(frozen=True)
class EntailmentResult:
    """HOLDS_UP_TO_BUDGET, COUNTERMODEL (witness attached) or UNKNOWN."""
    status: str
    countermodel: PointedStructure | None = None
    max_size: int = 0

    @property
    def holds(self) -> bool:
        return self.status == "HOLDS_UP_TO_BUDGET"


def check_entailment_bounded(f: Formula, g: Formula, budget: SearchBudget = SearchBudget(),
                             xs: Sequence[str] | None = None, method: str = "sat") -> EntailmentResult:
    """Search for a model of f & ~g; exhaustion up to max_size means HOLDS_UP_TO_BUDGET."""
    if xs is None:
        if free_vars(f) != free_vars(g):
            raise ValueError("entailment needs equal free-variable sets")
        xs = _fv(f)
    sig = signature_of(f) | signature_of(g)
    res = find_model(conj(f, neg(g)), budget, xs, sig, method)
    if res.status == "FOUND":
        return EntailmentResult("COUNTERMODEL", res.witness, res.sizes_done)
    if res.status == "EXHAUSTED":
        return EntailmentResult("HOLDS_UP_TO_BUDGET", None, budget.max_size)
    return EntailmentResult("UNKNOWN", None, res.sizes_done)


# ---------------------------------------------------------------- file format

_TUPLE_RE = re.compile(r"\(([^()]*)\)")


def parse_structure(text: str) -> PointedStructure:
    """Read `dom: a b c`, `R: (a,b) (b,c)`, unary `A: a c`, `point: a,c`.

    A `sig: R/2, A/1` line declares symbols that may have empty extensions.
    """
    dom: list[str] | None = None
    rels: dict[str, list[tuple[str, ...]]] = {}
    declared: dict[str, int] = {}
    point: tuple[str, ...] = ()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key: value'")
        key, rest = key.strip(), rest.strip()
        if key == "dom":
            dom = rest.replace(",", " ").split()
        elif key == "point":
            point = tuple(p for p in rest.replace(",", " ").split())
        elif key == "sig":
            declared.update(Signature.parse(rest))
        elif re.match(r"[A-Z][a-zA-Z0-9_]*\Z", key):
            if "(" in rest:
                tuples = [tuple(p.strip() for p in m.group(1).split(",")) for m in _TUPLE_RE.finditer(rest)]
            else:
                tuples = [(p,) for p in rest.replace(",", " ").split()]
            rels.setdefault(key, []).extend(tuples)
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    if dom is None:
        raise ValueError("missing 'dom:' line")
    for name, ts in rels.items():
        if ts:
            declared.setdefault(name, len(ts[0]))
    return PointedStructure(Structure(dom, rels, declared), point)


def to_structure_text(s: Structure | PointedStructure, point: Sequence = ()) -> str:
    if isinstance(s, PointedStructure):
        s, point = s.structure, s.point
    lines = ["dom: " + " ".join(map(str, s.domain))]
    if s.signature:
        lines.append("sig: " + str(s.signature))
    for name in s.signature:
        ts = sorted(s.relations[name], key=s._tkey)
        if not ts:
            continue
        if s.signature[name] == 1:
            lines.append(f"{name}: " + " ".join(str(t[0]) for t in ts))
        else:
            lines.append(f"{name}: " + " ".join("(" + ",".join(map(str, t)) + ")" for t in ts))
    if point:
        lines.append("point: " + ",".join(map(str, point)))
    return "\n".join(lines) + "\n"
