"""Guarded and two-variable bisimulations between finite structures.

Both computations are greatest fixpoints.  A guarded bisimulation is kept
as a set of partial isomorphisms whose domains are guarded sets; it
stands for its closure under restriction to subsets.  A two-variable
bisimulation is a relation on elements.
"""
from __future__ import annotations

import itertools
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .semantics import PointedStructure, Structure

Pairs = frozenset  # frozenset of (a, b) pairs


def _tau_names(tau) -> list[str]:
    return sorted(tau)


def guarded_sets(s: Structure, tau: Iterable[str]) -> list[frozenset]:
    """Singletons and the element sets of tau-facts, without repeats."""
    out: dict[frozenset, None] = {}
    for a in s.domain:
        out[frozenset([a])] = None
    for name in _tau_names(tau):
        for t in sorted(s.relations.get(name, ()), key=s._tkey):
            if t:
                out[frozenset(t)] = None
    return sorted(out, key=lambda g: (len(g), sorted(s.index[a] for a in g)))


def is_guarded_tuple(s: Structure, tau: Iterable[str], tup: Sequence) -> bool:
    X = set(tup)
    return any(X <= g for g in guarded_sets(s, tau))


def is_partial_iso(mapping: Mapping | Iterable, A: Structure, B: Structure, tau: Iterable[str]) -> bool:
    """Is the element map an isomorphism between the tau-reducts of the induced substructures?"""
    m = dict(mapping)
    if len(set(m.values())) != len(m):
        return False
    if any(a not in A.index for a in m) or any(b not in B.index for b in m.values()):
        return False
    dom, ran = set(m), set(m.values())
    for name in tau:
        ra = A.relations.get(name, frozenset())
        rb = B.relations.get(name, frozenset())
        inside_a = {tuple(m[x] for x in t) for t in ra if set(t) <= dom}
        inside_b = {t for t in rb if set(t) <= ran}
        if inside_a != inside_b:
            return False
    return True


def tuple_map(a: Sequence, b: Sequence) -> dict | None:
    """The map a_i -> b_i, or None when the equality patterns differ."""
    if len(a) != len(b):
        return None
    m: dict = {}
    back: dict = {}
    for x, y in zip(a, b):
        if m.setdefault(x, y) != y or back.setdefault(y, x) != x:
            return None
    return m


def _restrict(p: Pairs, X: frozenset) -> Pairs:
    return frozenset((a, b) for a, b in p if a in X)


def _restrict_back(p: Pairs, Y: frozenset) -> Pairs:
    return frozenset((a, b) for a, b in p if b in Y)


def _subsets(X: frozenset):
    items = sorted(X, key=repr)
    for r in range(len(items) + 1):
        for c in itertools.combinations(items, r):
            yield frozenset(c)


class GuardedBisimulation:
    """The largest guarded tau-bisimulation between two structures.

    ``died`` maps each deleted partial isomorphism to the round in which it
    failed the forth/back conditions.
    """

    def __init__(self, A: Structure, B: Structure, tau: Iterable[str]):
        self.A, self.B = A, B
        self.tau = tuple(_tau_names(set(tau)))
        self.GA = guarded_sets(A, self.tau)
        self.GB = guarded_sets(B, self.tau)
        self.died: dict[Pairs, int] = {}
        self.rounds = 0
        self._build()

    def _sort_key(self, p: Pairs):
        ia, ib = self.A.index, self.B.index
        return sorted((ia[a], ib[b]) for a, b in p)

    def _build(self):
        A, B, tau = self.A, self.B, self.tau
        cands = []
        by_size: dict[int, list] = defaultdict(list)
        for H in self.GB:
            by_size[len(H)].append(H)
        for G in self.GA:
            gs = sorted(G, key=A.index.get)
            for H in by_size[len(G)]:
                for perm in itertools.permutations(sorted(H, key=B.index.get)):
                    m = dict(zip(gs, perm))
                    if is_partial_iso(m, A, B, tau):
                        cands.append(frozenset(m.items()))
        cands.sort(key=self._sort_key)
        alive = set(cands)
        fwd: dict = defaultdict(int)
        bwd: dict = defaultdict(int)
        dom_of = {p: frozenset(a for a, _ in p) for p in cands}
        ran_of = {p: frozenset(b for _, b in p) for p in cands}
        for p in cands:
            for S in _subsets(dom_of[p]):
                fwd[(dom_of[p], _restrict(p, S))] += 1
            for T in _subsets(ran_of[p]):
                bwd[(ran_of[p], _restrict_back(p, T))] += 1
        self._fwd, self._bwd = fwd, bwd
        needs_of = {}
        users: dict = defaultdict(list)
        for p in cands:
            keys = [("f", G, _restrict(p, G)) for G in self.GA] + \
                   [("b", H, _restrict_back(p, H)) for H in self.GB]
            needs_of[p] = keys
            for k in keys:
                users[k].append(p)
        dirty = set(cands)
        rnd = 0
        while dirty:
            rnd += 1
            dead = [p for p in sorted(dirty, key=self._sort_key)
                    if p in alive and not self._ok(needs_of[p])]
            dirty = set()
            if not dead:
                break
            for p in dead:
                alive.discard(p)
                self.died[p] = rnd
            for p in dead:
                for S in _subsets(dom_of[p]):
                    k = (dom_of[p], _restrict(p, S))
                    fwd[k] -= 1
                    if fwd[k] == 0:
                        dirty.update(q for q in users[("f",) + k] if q in alive)
                for T in _subsets(ran_of[p]):
                    k = (ran_of[p], _restrict_back(p, T))
                    bwd[k] -= 1
                    if bwd[k] == 0:
                        dirty.update(q for q in users[("b",) + k] if q in alive)
        self.rounds = rnd
        self.maps = sorted(alive, key=self._sort_key)
        self._alive = alive

    def _ok(self, keys) -> bool:
        for kind, X, r in keys:
            table = self._fwd if kind == "f" else self._bwd
            if table.get((X, r), 0) <= 0:
                return False
        return True

    def check_top(self, a: Sequence, b: Sequence) -> bool:
        m = tuple_map(a, b)
        if m is None or not is_partial_iso(m, self.A, self.B, self.tau):
            return False
        p = frozenset(m.items())
        keys = [("f", G, _restrict(p, G)) for G in self.GA] + \
               [("b", H, _restrict_back(p, H)) for H in self.GB]
        return self._ok(keys)

    def top_death_round(self, a: Sequence, b: Sequence) -> int | None:
        """Round in which the top map lost a witness; None if it survives, 0 if not a partial iso."""
        m = tuple_map(a, b)
        if m is None or not is_partial_iso(m, self.A, self.B, self.tau):
            return 0
        if self.check_top(a, b):
            return None
        p = frozenset(m.items())
        need = [("f", G, _restrict(p, G)) for G in self.GA] + [("b", H, _restrict_back(p, H)) for H in self.GB]
        worst = None
        for kind, X, r in need:
            wits = [q for q in self.died if (frozenset(a for a, _ in q) if kind == "f" else
                                              frozenset(b for _, b in q)) == X and
                    ((_restrict(q, frozenset(a for a, _ in r)) == r) if kind == "f" else
                     (_restrict_back(q, frozenset(b for _, b in r)) == r))]
            if not any(q in self._alive for q in wits):
                rnd = max((self.died[q] for q in wits), default=0)
                worst = rnd if worst is None else min(worst, rnd)
        return worst


@dataclass
class GfBisimCertificate:
    tau: tuple[str, ...]
    maps: list[tuple[tuple, ...]]
    top: tuple[tuple, ...]
    source: str = ""
    target: str = ""
    kind: str = "gf"

    def to_json(self) -> dict:
        return {"kind": "gf", "tau": list(self.tau), "source": self.source, "target": self.target,
                "top": [list(map(str, pr)) for pr in self.top],
                "maps": [[list(map(str, pr)) for pr in m] for m in self.maps]}


@dataclass
class Fo2BisimCertificate:
    tau: tuple[str, ...]
    pairs: list[tuple]
    point_pairs: list[tuple]
    source: str = ""
    target: str = ""
    kind: str = "fo2"

    def to_json(self) -> dict:
        return {"kind": "fo2", "tau": list(self.tau), "source": self.source, "target": self.target,
                "pairs": [list(map(str, pr)) for pr in self.pairs],
                "point_pairs": [list(map(str, pr)) for pr in self.point_pairs]}


@dataclass
class BisimRefusal:
    """Returned instead of a certificate; round is a depth bound for a distinguishing formula."""
    reason: str
    round: int | None = None

    def __bool__(self) -> bool:
        return False


def gf_bisimilar(A: PointedStructure, B: PointedStructure, tau: Iterable[str],
                 _cache: GuardedBisimulation | None = None):
    """Certificate if A,a and B,b are guarded tau-bisimilar, else a falsy refusal."""
    if len(A.point) != len(B.point):
        raise ValueError("pointed tuples have different lengths")
    tau = tuple(sorted(set(tau)))
    gb = _cache or GuardedBisimulation(A.structure, B.structure, tau)
    if gb.check_top(A.point, B.point):
        m = tuple_map(A.point, B.point)
        top = tuple(sorted(m.items(), key=lambda ab: A.structure.index[ab[0]]))
        maps = [tuple(sorted(p, key=lambda ab: A.structure.index[ab[0]])) for p in gb.maps]
        return GfBisimCertificate(tau, maps, top, A.structure.fingerprint(), B.structure.fingerprint())
    rnd = gb.top_death_round(A.point, B.point)
    if rnd == 0:
        return BisimRefusal("the tuple map is not a partial isomorphism", 0)
    return BisimRefusal("the top map loses a forth/back witness", rnd)


class TwoVarBisimulation:
    """The largest two-variable tau-bisimulation between two structures (empty if not global)."""

    def __init__(self, A: Structure, B: Structure, tau: Iterable[str]):
        self.A, self.B = A, B
        self.tau = tuple(sorted(set(tau)))
        self._iso_cache: dict = {}
        S = {(a, b) for a in A.domain for b in B.domain if self._iso(((a, b),))}
        self.rounds = 0
        changed = True
        while changed:
            changed = False
            self.rounds += 1
            dead = []
            for a, b in sorted(S, key=lambda ab: (A.index[ab[0]], B.index[ab[1]])):
                if not self._forth_back(a, b, S):
                    dead.append((a, b))
            if dead:
                S.difference_update(dead)
                changed = True
        self.raw = S
        global_ = ({a for a, _ in S} >= set(A.domain)) and ({b for _, b in S} >= set(B.domain))
        self.is_global = global_
        self.S = S if global_ else set()

    def _iso(self, pairs) -> bool:
        key = tuple(pairs)
        hit = self._iso_cache.get(key)
        if hit is None:
            m = tuple_map([p[0] for p in pairs], [p[1] for p in pairs])
            hit = m is not None and is_partial_iso(m, self.A, self.B, self.tau)
            self._iso_cache[key] = hit
        return hit

    def _forth_back(self, a, b, S) -> bool:
        for a2 in self.A.domain:
            if not any((a2, b2) in S and self._iso(((a, b), (a2, b2))) for b2 in self.B.domain):
                return False
        for b2 in self.B.domain:
            if not any((a2, b2) in S and self._iso(((a, b), (a2, b2))) for a2 in self.A.domain):
                return False
        return True

    def related(self, a: Sequence, b: Sequence) -> bool:
        if len(a) != len(b) or len(a) > 2:
            raise ValueError("two-variable bisimilarity is defined for tuples of length at most 2")
        if not self.is_global:
            return False
        if not self._iso(tuple(zip(a, b))):
            return False
        return all((x, y) in self.S for x, y in zip(a, b))


def _unary_facts(s: Structure, tau: Sequence[str], a) -> tuple:
    facts = []
    for name in tau:
        r = s.signature.get(name)
        if r is None:
            continue
        facts.append((name, s.holds(name, (a,) * r)))
    return tuple(facts)


def _link_facts(s: Structure, tau: Sequence[str], a, b) -> tuple:
    facts = []
    for name in tau:
        r = s.signature.get(name, 0)
        if r < 2:
            continue
        for args in itertools.product((a, b), repeat=r):
            if a in args and b in args:
                facts.append(s.holds(name, args))
    return tuple(facts)


class TwoVarClasses:
    """Coarsest stable partition of the elements of several structures.

    Two elements (of the same or different structures) end up in the same
    class iff they are two-variable tau-bisimilar, provided the structures
    are pairwise globally bisimilar; the signature of an element is the set
    of (link, class) pairs over the other elements of its own structure.
    Runs in O(rounds * n^2), so it scales to a few hundred elements.
    """

    def __init__(self, structures: Sequence[Structure], tau: Iterable[str]):
        self.structures = list(structures)
        self.tau = tuple(sorted(set(tau)))
        self.elements = [(i, a) for i, s in enumerate(self.structures) for a in s.domain]
        self._links = {}
        cls = {}
        for i, s in enumerate(self.structures):
            for a in s.domain:
                cls[(i, a)] = self._unary(s, a)
        self.rounds = 0
        while True:
            self.rounds += 1
            sig = {}
            for i, s in enumerate(self.structures):
                for a in s.domain:
                    sig[(i, a)] = (cls[(i, a)], frozenset(
                        (self._link(i, a, b), cls[(i, b)]) for b in s.domain if b != a))
            ids = {k: n for n, k in enumerate(sorted(set(sig.values()), key=repr))}
            new = {e: ids[sig[e]] for e in self.elements}
            if len(set(new.values())) == len(set(cls.values())):
                cls = new
                break
            cls = new
        self.cls = cls

    def _unary(self, s: Structure, a):
        return _unary_facts(s, self.tau, a)

    def _link(self, i: int, a, b):
        key = (i, a, b)
        hit = self._links.get(key)
        if hit is None:
            hit = self._links[key] = _link_facts(self.structures[i], self.tau, a, b)
        return hit

    def link(self, i: int, a, b):
        """The tau-link between distinct elements a, b of structure i."""
        return self._link(i, a, b)

    def same(self, i: int, a, j: int, b) -> bool:
        return self.cls[(i, a)] == self.cls[(j, b)]

    def is_global(self, i: int, j: int) -> bool:
        ci = {self.cls[(i, a)] for a in self.structures[i].domain}
        cj = {self.cls[(j, b)] for b in self.structures[j].domain}
        return ci == cj

    def related(self, i: int, a: Sequence, j: int, b: Sequence) -> bool:
        if len(a) != len(b) or len(a) > 2:
            raise ValueError("two-variable bisimilarity is defined for tuples of length at most 2")
        if not self.is_global(i, j):
            return False
        m = tuple_map(a, b)
        if m is None or not is_partial_iso(m, self.structures[i], self.structures[j], self.tau):
            return False
        return all(self.same(i, x, j, y) for x, y in zip(a, b))


class _Refinement:
    """Colour refinement over a growing list of structures.

    Each structure has a finite set of objects; an object's next colour is
    its current colour, the set of colours in its structure, and the set of
    (label, colour) pairs of its labelled neighbours.  Colours are interned
    per round in tables shared by all structures, so colours of different
    structures are comparable at equal rounds.  ``round`` always points at
    a round where the partition over all structures added so far is stable.
    """

    def __init__(self, tau: Iterable[str]):
        self.tau = tuple(sorted(set(tau)))
        self.structures: list[Structure] = []
        self._objs: list[list] = []
        self._nbrs: list[dict] = []
        self._cols: list[dict] = []      # current colours per structure
        self._glob: list = []
        self._tables: list[dict] = [{}]  # round -> interning table
        self.round = 0
        self._union: set = set()         # colours in use at the current round
        self._union_prev: set = set()    # and at the round before
        self._dirty = False

    # subclasses supply objects, initial colours and labelled neighbours
    def _objects(self, s: Structure) -> list:
        raise NotImplementedError

    def _initial(self, s: Structure, o):
        raise NotImplementedError

    def _neighbours(self, s: Structure, o) -> list:
        raise NotImplementedError

    def _summary(self, pairs) -> frozenset:
        return frozenset(pairs)

    def _intern(self, rnd: int, key) -> int:
        t = self._tables[rnd]
        hit = t.get(key)
        if hit is None:
            hit = t[key] = len(t)
        return hit

    def _step(self, i: int, rnd: int) -> None:
        """Move structure i from round rnd - 1 to rnd."""
        col, glob = self._cols[i], self._glob[i]
        nb = self._nbrs[i]
        new = {o: self._intern(rnd, (col[o], glob, self._summary((l, col[o2]) for l, o2 in nb[o])))
               for o in self._objs[i]}
        self._cols[i] = new
        self._glob[i] = frozenset(new.values())

    def add(self, s: Structure, settle: bool = True) -> int:
        """Register a structure; with settle=False the joint refinement waits for the next query."""
        i = len(self.structures)
        self.structures.append(s)
        objs = self._objects(s)
        self._objs.append(objs)
        self._nbrs.append({o: self._neighbours(s, o) for o in objs})
        self._cols.append({o: self._intern(0, self._initial(s, o)) for o in objs})
        self._glob.append(frozenset(self._cols[i].values()))
        prev = self._glob[i]
        for rnd in range(1, self.round + 1):
            prev = self._glob[i]
            self._step(i, rnd)
        self._union |= self._glob[i]
        self._union_prev |= prev
        self._dirty = True
        if settle:
            self._settle()
        return i

    def _settle(self) -> None:
        # the union partition is stable once a round adds no colour class
        if not self._dirty:
            return
        self._dirty = False
        if self.round > 0 and len(self._union) == len(self._union_prev):
            return
        while True:
            self.round += 1
            if len(self._tables) <= self.round:
                self._tables.append({})
            for i in range(len(self.structures)):
                self._step(i, self.round)
            self._union_prev = self._union
            self._union = set().union(*self._glob)
            if len(self._union) == len(self._union_prev):
                return

    def colour(self, i: int, o) -> int:
        self._settle()
        return self._cols[i][o]

    def glob(self, i: int) -> frozenset:
        self._settle()
        return self._glob[i]


class GuardedColouring(_Refinement):
    """Guarded tau-bisimilarity classes of tuples across many structures at once.

    Objects are orderings of guarded sets; neighbours are the guarded tuples
    sharing an element, labelled by the positions where they coincide.
    ``key(i, a)`` is equal for two tuples exactly when they are guarded
    bisimilar, which agrees with GuardedBisimulation.check_top.
    """

    def __init__(self, structures: Sequence[Structure] = (), tau: Iterable[str] = ()):
        super().__init__(tau)
        self._facts: list[dict] = []
        self._by_elem: list[dict] = []
        for s in structures:
            self.add(s, settle=False)

    def _objects(self, s: Structure) -> list:
        facts: dict = defaultdict(list)
        for name in self.tau:
            for t in s.relations.get(name, ()):
                for a in set(t):
                    facts[a].append((name, t))
        self._facts.append(facts)
        objs = []
        by_elem: dict = defaultdict(list)
        for G in guarded_sets(s, self.tau):
            for t in itertools.permutations(sorted(G, key=s.index.get)):
                objs.append(t)
                for a in t:
                    by_elem[a].append(t)
        self._by_elem.append(by_elem)
        return objs

    def _atype(self, i: int, a: tuple):
        pos = {}
        for k, x in enumerate(a):
            pos.setdefault(x, k)
        dom = set(a)
        facts = set()
        for x in dom:
            for name, t in self._facts[i].get(x, ()):
                if dom.issuperset(t):
                    facts.add((name, tuple(pos[y] for y in t)))
        return tuple(pos[x] for x in a), frozenset(facts)

    def _overlaps(self, i: int, a: tuple) -> list:
        seen = {}
        for x in set(a):
            for t in self._by_elem[i].get(x, ()):
                seen[t] = None
        return [(tuple(sorted((k, l) for k, x in enumerate(a) for l, y in enumerate(t) if x == y)), t)
                for t in seen]

    def _initial(self, s: Structure, o):
        return self._atype(len(self.structures) - 1, o)

    def _summary(self, pairs) -> frozenset:
        # a response only has to agree on the challenger's overlap, so it may
        # overlap more; per colour only the maximal overlap labels matter
        by_col: dict = defaultdict(set)
        for l, c in pairs:
            by_col[c].add(frozenset(l))
        return frozenset((tuple(sorted(l)), c) for c, ls in by_col.items()
                         for l in ls if not any(l < m for m in ls))

    def _neighbours(self, s: Structure, o) -> list:
        return self._overlaps(len(self.structures) - 1, o)

    def key(self, i: int, a: Sequence) -> tuple:
        """Invariant of the pointed structure (structure i, a) at the current round."""
        a = tuple(a)
        self._settle()
        col = self._cols[i]
        return (self.round, self._atype(i, a), self._glob[i],
                self._summary((l, col[t]) for l, t in self._overlaps(i, a)))

    def related(self, i: int, a: Sequence, j: int, b: Sequence) -> bool:
        return len(a) == len(b) and self.key(i, a) == self.key(j, b)


class TwoVarColouring(_Refinement):
    """Incremental two-variable tau-bisimilarity classes of elements and pairs.

    Elements are the objects; the neighbours of a are the other elements,
    labelled by their link with a.  Colours include the colour set of the
    whole structure, so equal colours imply global bisimilarity.
    """

    def __init__(self, structures: Sequence[Structure] = (), tau: Iterable[str] = ()):
        super().__init__(tau)
        for s in structures:
            self.add(s, settle=False)

    def _objects(self, s: Structure) -> list:
        return list(s.domain)

    def _initial(self, s: Structure, o):
        return _unary_facts(s, self.tau, o)

    def _neighbours(self, s: Structure, o) -> list:
        return [(_link_facts(s, self.tau, o, b), b) for b in s.domain if b != o]

    def key(self, i: int, a: Sequence) -> tuple:
        a = tuple(a)
        if len(a) > 2:
            raise ValueError("two-variable bisimilarity is defined for tuples of length at most 2")
        self._settle()
        col = self._cols[i]
        k = (self.round, self._glob[i], tuple(col[x] for x in a))
        if len(a) == 2:
            k += (a[0] == a[1], None if a[0] == a[1] else _link_facts(self.structures[i], self.tau, *a))
        return k

    def related(self, i: int, a: Sequence, j: int, b: Sequence) -> bool:
        return len(a) == len(b) and self.key(i, a) == self.key(j, b)


def fo2_bisimilar(A: PointedStructure, B: PointedStructure, tau: Iterable[str],
                  _cache: TwoVarBisimulation | None = None, method: str = "refine"):
    if len(A.point) != len(B.point):
        raise ValueError("pointed tuples have different lengths")
    if len(A.point) > 2:
        raise ValueError("two-variable bisimilarity is defined for tuples of length at most 2")
    if _cache is None and method == "refine":
        tc = TwoVarClasses([A.structure, B.structure], tau)
        if not tc.is_global(0, 1):
            return BisimRefusal("the largest bisimulation is not global", tc.rounds)
        if not tc.related(0, A.point, 1, B.point):
            return BisimRefusal("the distinguished tuples are not related", tc.rounds)
        pairs = [(a, b) for a in A.structure.domain for b in B.structure.domain if tc.same(0, a, 1, b)]
        return Fo2BisimCertificate(tc.tau, pairs, list(zip(A.point, B.point)),
                                   A.structure.fingerprint(), B.structure.fingerprint())
    tb = _cache or TwoVarBisimulation(A.structure, B.structure, tau)
    if not tb.is_global:
        return BisimRefusal("the largest bisimulation is not global", tb.rounds)
    if not tb.related(A.point, B.point):
        return BisimRefusal("the distinguished tuples are not related", tb.rounds)
    pairs = sorted(tb.S, key=lambda ab: (A.structure.index[ab[0]], B.structure.index[ab[1]]))
    return Fo2BisimCertificate(tb.tau, pairs, list(zip(A.point, B.point)),
                               A.structure.fingerprint(), B.structure.fingerprint())


# ---------------------------------------------------------------- verification

def verify_certificate(cert, A: PointedStructure, B: PointedStructure, tau: Iterable[str] | None = None) -> bool:
    """Re-check a certificate against the definitions, without the fixpoint code."""
    tau = tuple(sorted(set(tau if tau is not None else cert.tau)))
    if isinstance(cert, GfBisimCertificate):
        return _verify_gf(cert, A, B, tau)
    if isinstance(cert, Fo2BisimCertificate):
        return _verify_fo2(cert, A, B, tau)
    raise TypeError("unknown certificate type")


def _verify_gf(cert, A, B, tau) -> bool:
    SA, SB = A.structure, B.structure
    ga, gb = guarded_sets(SA, tau), guarded_sets(SB, tau)
    maps = []
    for m in cert.maps:
        d = dict(m)
        if any(x not in SA.index for x in d) or any(y not in SB.index for y in d.values()):
            return False
        if not any(set(d) <= g for g in ga) or not any(set(d.values()) <= g for g in gb):
            return False
        if not is_partial_iso(d, SA, SB, tau):
            return False
        maps.append(d)

    def forth(p: dict) -> bool:
        for G in ga:
            if not any(G <= set(q) and all(q[x] == p[x] for x in G if x in p) for q in maps):
                return False
        return True

    def back(p: dict) -> bool:
        pinv = {y: x for x, y in p.items()}
        for H in gb:
            ok = False
            for q in maps:
                qinv = {y: x for x, y in q.items()}
                if H <= set(qinv) and all(qinv[y] == pinv[y] for y in H if y in pinv):
                    ok = True
                    break
            if not ok:
                return False
        return True

    for d in maps:
        if not (forth(d) and back(d)):
            return False
    top = tuple_map(A.point, B.point)
    if top is None or dict(cert.top) != top or not is_partial_iso(top, SA, SB, tau):
        return False
    return forth(top) and back(top)


def _verify_fo2(cert, A, B, tau) -> bool:
    SA, SB = A.structure, B.structure
    S = set(cert.pairs)
    if any(a not in SA.index or b not in SB.index for a, b in S):
        return False
    if {a for a, _ in S} != set(SA.domain) or {b for _, b in S} != set(SB.domain):
        return False

    def iso2(a, a2, b, b2):
        m = tuple_map((a, a2), (b, b2))
        return m is not None and is_partial_iso(m, SA, SB, tau)

    for a, b in S:
        for a2 in SA.domain:
            if not any((a2, b2) in S and iso2(a, a2, b, b2) for b2 in SB.domain):
                return False
        for b2 in SB.domain:
            if not any((a2, b2) in S and iso2(a, a2, b, b2) for a2 in SA.domain):
                return False
    m = tuple_map(A.point, B.point)
    if m is None or not is_partial_iso(m, SA, SB, tau):
        return False
    return all((x, y) in S for x, y in zip(A.point, B.point))


def certificate_from_json(data: dict):
    """Inverse of to_json for both certificate kinds (elements come back as strings)."""
    pair = lambda pr: (pr[0], pr[1])
    tau = tuple(data["tau"])
    if data.get("kind") == "gf":
        return GfBisimCertificate(tau, [tuple(pair(pr) for pr in m) for m in data["maps"]],
                                  tuple(pair(pr) for pr in data["top"]), data.get("source", ""),
                                  data.get("target", ""))
    if data.get("kind") == "fo2":
        return Fo2BisimCertificate(tau, [pair(pr) for pr in data["pairs"]],
                                   [pair(pr) for pr in data["point_pairs"]], data.get("source", ""),
                                   data.get("target", ""))
    raise ValueError(f"unknown certificate kind {data.get('kind')!r}")


def invert(cert):
    """The certificate for the swapped pair of structures."""
    if isinstance(cert, GfBisimCertificate):
        return GfBisimCertificate(cert.tau, [tuple((b, a) for a, b in m) for m in cert.maps],
                                  tuple((b, a) for a, b in cert.top), cert.target, cert.source)
    return Fo2BisimCertificate(cert.tau, [(b, a) for a, b in cert.pairs],
                               [(b, a) for a, b in cert.point_pairs], cert.target, cert.source)


def identity_certificate(A: PointedStructure, tau: Iterable[str]):
    return gf_bisimilar(A, A, tau)
