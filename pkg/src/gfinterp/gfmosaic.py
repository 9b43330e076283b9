"""Mosaics of types and the decision procedure for joint guarded consistency.

A mosaic is a set of types over pool variables.  Mosaic sets are handled
in two forms: explicit mosaics (fixed variable names, used by
certificates and the literal checks) and canonical classes (variables
renamed onto a pool prefix, used by elimination, where every renaming of a
class is implicitly present).
"""
from __future__ import annotations

import itertools
import json
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .bisim import GuardedBisimulation, GuardedColouring
from .semantics import (
    PointedStructure, SearchBudget, Structure, _Clock,
    parse_structure, to_structure_text,
)
from .syntax import Atom, Formula, quantifier_rank
from .types import Closure, TypeComputer, TypeUniverse, XiType, _pool_key, build_universe, is_coherent


@dataclass
class Check:
    ok: bool
    detail: object = None

    def __bool__(self) -> bool:
        return self.ok


def _subsets(xs: Sequence) -> Iterable[frozenset]:
    for r in range(len(xs) + 1):
        for c in itertools.combinations(xs, r):
            yield frozenset(c)


class Mosaic:
    """An explicit set of types.

    trim, when set, marks a mosaic whose types above that many variables
    are the designated ones only; restriction closure is not required above
    the trim.
    """

    __slots__ = ("types", "vars", "trim", "_h", "_restr", "_gsets", "_varsets", "_key")

    def __init__(self, types: Iterable[XiType], trim: int | None = None):
        ts = sorted(set(types), key=XiType.sort_key)
        self.types = tuple(ts)
        self.vars = frozenset().union(*(t.vars for t in ts)) if ts else frozenset()
        self.trim = trim
        self._h = hash(frozenset(ts))
        self._restr: dict = {}
        self._gsets: dict = {}
        self._varsets = frozenset(t.vars for t in ts)
        self._key = None

    def __iter__(self):
        return iter(self.types)

    def __len__(self):
        return len(self.types)

    def __contains__(self, t):
        return t in set(self.types)

    def __hash__(self):
        return self._h

    def __eq__(self, other):
        return isinstance(other, Mosaic) and self._h == other._h and self.types == other.types

    def __repr__(self):
        return f"Mosaic({len(self.types)} types over {sorted(self.vars, key=_pool_key)})"

    def restrict(self, Z: Iterable[str]) -> frozenset:
        Z = frozenset(Z)
        hit = self._restr.get(Z)
        if hit is None:
            hit = self._restr[Z] = frozenset(t.restrict(Z) for t in self.types)
        return hit

    def sub(self, Z: Iterable[str]) -> Mosaic:
        return Mosaic(self.restrict(Z))

    def rename(self, mapping) -> Mosaic:
        return Mosaic((t.rename(mapping) for t in self.types), self.trim)

    def guard_sets(self, gids: frozenset) -> frozenset:
        hit = self._gsets.get(gids)
        if hit is None:
            hit = self._gsets[gids] = frozenset(
                frozenset(args) for t in self.types for tid, args in t.members if tid in gids)
        return hit

    def covers(self, Z: frozenset) -> bool:
        return any(Z <= Y for Y in self._varsets)

    def sort_key(self) -> tuple:
        if self._key is None:
            self._key = tuple(t.sort_key() for t in self.types)
        return self._key

    def canonical(self, pool: Sequence[str]) -> tuple[Mosaic, dict]:
        xs = sorted(self.vars, key=_pool_key)
        best = None
        for perm in itertools.permutations(pool[:len(xs)]):
            m = dict(zip(xs, perm))
            r = self.rename(m)
            if best is None or r.sort_key() < best[0].sort_key():
                best = (r, m)
        return best


# ---------------------------------------------------------------- internal conditions

def _instances(c: Closure, tids: Iterable[int], X: frozenset):
    xs = sorted(X, key=_pool_key)
    for tid in sorted(tids):
        k = c.templates[tid].k
        if k <= len(xs):
            for args in itertools.permutations(xs, k):
                yield (tid, args)


def is_tau_uniform(phi: Mosaic, c: Closure, tau: Iterable[str]) -> Check:
    gids = c.guards(tau)
    seen: dict = {}
    for t in phi.types:
        for inst in _instances(c, gids, t.vars):
            val = inst in t.members
            prev = seen.setdefault(inst, (val, t))
            if prev[0] != val:
                return Check(False, (prev[1], t, c.formula_of(inst)))
    return Check(True)


def is_restriction_closed(phi: Mosaic) -> Check:
    have = set(phi.types)
    for t in phi.types:
        for X in _subsets(sorted(t.vars, key=_pool_key)):
            if X == t.vars or (phi.trim is not None and len(X) > phi.trim):
                continue
            r = t.restrict(X)
            if r not in have:
                return Check(False, (t, sorted(X, key=_pool_key)))
    return Check(True)


def is_bisim_saturated(phi: Mosaic, c: Closure, tau: Iterable[str]) -> Check:
    sg = c.strict_guards(tau)
    guarded = sorted({frozenset(args) for t in phi.types for tid, args in t.members if tid in sg},
                     key=lambda Y: sorted(Y, key=_pool_key))
    by_vars = defaultdict(list)
    for t in phi.types:
        by_vars[t.vars].append(t)
    for Y in guarded:
        for t2 in phi.types:
            if t2.vars <= Y and not any(s.restrict(t2.vars) == t2 for s in by_vars[Y]):
                return Check(False, (sorted(Y, key=_pool_key), t2))
    return Check(True)


def is_mosaic(phi: Mosaic, c: Closure, tau: Iterable[str]) -> Check:
    for name, chk in (("tau-uniform", is_tau_uniform(phi, c, tau)),
                      ("restriction-closed", is_restriction_closed(phi)),
                      ("bisimulation-saturated", is_bisim_saturated(phi, c, tau))):
        if not chk:
            return Check(False, (name, chk.detail))
    return Check(True)


def compatible(p: Mosaic, q: Mosaic, c: Closure, tau: Iterable[str]) -> bool:
    gids = frozenset(c.guards(tau))
    for a, b in ((p, q), (q, p)):
        for t in a.types:
            if not any(t.restrict(t.vars & s.vars) == s.restrict(t.vars & s.vars) for s in b.types):
                return False
        for Z in a.guard_sets(gids):
            if b.covers(Z) and a.restrict(Z) != b.restrict(Z):
                return False
    return True


# ---------------------------------------------------------------- existential saturation

def needs(phi: Mosaic, c: Closure) -> list[tuple[XiType, tuple]]:
    """Pairs (type, existential instance it contains)."""
    out = []
    for t in phi.types:
        for inst in sorted(t.members):
            if c.templates[inst[0]].is_exists:
                out.append((t, inst))
    return out


def _body_candidates(c: Closure, inst, names: Sequence[str]):
    """Instances of the existential's body with its bound variables sent into names."""
    tid, args = inst
    tm = c.templates[tid]
    btid, bargs = tm.body
    fmap = {f"f{i}": a for i, a in enumerate(args)}
    for choice in itertools.product(names, repeat=len(tm.bound)):
        m = dict(fmap)
        m.update(zip(tm.bound, choice))
        yield c.ident(btid, tuple(m[a] for a in bargs))


def body_witnessed(c: Closure, t2: XiType, inst) -> bool:
    if not set(inst[1]) <= t2.vars:
        return False
    names = sorted(t2.vars, key=_pool_key)
    return any(b in t2.members for b in _body_candidates(c, inst, names))


class LiteralIndex:
    """Explicit mosaics indexed by the restrictions of their types."""

    def __init__(self, mosaics: Iterable[Mosaic] = ()):
        self.mosaics: list[Mosaic] = []
        self._by: dict = defaultdict(list)
        self._have: set = set()
        self._filtered: dict = {}
        for q in mosaics:
            self.add(q)

    def add(self, q: Mosaic) -> bool:
        if q in self._have:
            return False
        self._have.add(q)
        self.mosaics.append(q)
        self._filtered.clear()
        for t2 in q.types:
            for X in _subsets(sorted(t2.vars, key=_pool_key)):
                self._by[t2.restrict(X)].append((q, t2))
        return True

    def __contains__(self, q):
        return q in self._have

    def __len__(self):
        return len(self.mosaics)

    def filtered(self, t: XiType, inst, c: Closure):
        """(mosaic, type) pairs whose type coincides with t and contains a body instance."""
        tE = t.restrict(frozenset(inst[1]))
        key = (tE, inst)
        hit = self._filtered.get(key)
        if hit is None:
            hit = self._filtered[key] = [(q, t2) for q, t2 in self._by.get(tE, ()) if body_witnessed(c, t2, inst)]
        for q, t2 in hit:
            shared = t.vars & t2.vars
            if t.restrict(shared) == t2.restrict(shared):
                yield q, t2


def _literal_witness(phi: Mosaic, t: XiType, inst, index: LiteralIndex, c, tau, compat_cache=None):
    failed = set()
    for q, t2 in index.filtered(t, inst, c):
        if q in failed:
            continue
        key = (phi, q)
        if compat_cache is not None and key in compat_cache:
            ok = compat_cache[key]
        else:
            ok = compatible(phi, q, c, tau)
            if compat_cache is not None:
                compat_cache[key] = ok
        if ok:
            return q, t2
        failed.add(q)
    return None


def exist_saturated_in(phi: Mosaic, M: Iterable[Mosaic] | LiteralIndex, c: Closure, tau: Iterable[str],
                       _cache: dict | None = None) -> Check:
    """Literal check: witnesses must occur in M under their given variable names."""
    index = M if isinstance(M, LiteralIndex) else LiteralIndex(M)
    cache = {} if _cache is None else _cache
    for t, inst in needs(phi, c):
        if _literal_witness(phi, t, inst, index, c, tau, cache) is None:
            return Check(False, (t, c.formula_of(inst)))
    return Check(True)


def is_saturated_set(M: Iterable[Mosaic], c: Closure, tau: Iterable[str]) -> Check:
    index = LiteralIndex(M)
    cache: dict = {}
    for phi in index.mosaics:
        chk = exist_saturated_in(phi, index, c, tau, cache)
        if not chk:
            return Check(False, (phi, chk.detail))
    return Check(True)


_POSITIONS = tuple(f"_p{i}" for i in range(16))


class MosaicSpace:
    """Canonical mosaic classes; a class stands for all of its renamings into the pool."""

    def __init__(self, c: Closure, tau: Iterable[str], classes: Sequence[Mosaic]):
        self.c = c
        self.tau = tuple(sorted(set(tau)))
        self.classes = list(classes)
        self._renamed: dict = {}
        self._compat: dict = {}
        self._by_body: dict = {}
        self._ridx: dict = {}

    def renamed(self, cid: int, rho: dict) -> Mosaic:
        key = (cid, tuple(sorted(rho.items())))
        hit = self._renamed.get(key)
        if hit is None:
            if len(self._renamed) > 200_000:
                self._renamed.clear()
            hit = self._renamed[key] = self.classes[cid].rename(rho)
        return hit

    def compat(self, p: Mosaic, q: Mosaic) -> bool:
        key = (p, q)
        hit = self._compat.get(key)
        if hit is None:
            if len(self._compat) > 500_000:
                self._compat.clear()
            hit = self._compat[key] = compatible(p, q, self.c, self.tau)
        return hit

    def _restrict_index(self, k: int) -> dict:
        """Restrictions of class types to k ordered variables, renamed to fixed positions."""
        idx = self._ridx.get(k)
        if idx is None:
            idx = self._ridx[k] = defaultdict(list)
            pos = _POSITIONS[:k]
            for cid, C in enumerate(self.classes):
                for t2c in C.types:
                    if len(t2c.vars) < k:
                        continue
                    names = sorted(t2c.vars, key=_pool_key)
                    for img in itertools.permutations(names, k):
                        r = t2c.restrict(frozenset(img)).rename(dict(zip(img, pos)))
                        idx[r].append((cid, t2c, img, names))
        return idx

    def find_witness(self, phi: Mosaic, t: XiType, inst, alive: Iterable[int]):
        """A renaming of an alive class witnessing inst for t inside phi.

        The renaming keeps the existential's free variables and sends every
        other variable of the class to a pool variable unused by phi; a
        witness with larger overlap exists only if this one does.
        """
        c = self.c
        E = inst[1]
        pos = _POSITIONS[:len(E)]
        key = t.restrict(frozenset(E)).rename(dict(zip(E, pos)))
        fresh = [v for v in c.pool if v not in phi.vars]
        alive = alive if isinstance(alive, (set, frozenset)) else set(alive)
        for cid, t2c, img, names in self._restrict_index(len(E)).get(key, ()):
            if cid not in alive:
                continue
            C = self.classes[cid]
            if not any(b in t2c.members for b in _body_candidates(c, (inst[0], img), names)):
                continue
            back = dict(zip(img, E))
            rest = [v for v in sorted(C.vars, key=_pool_key) if v not in back]
            if len(rest) > len(fresh):
                continue
            rho = dict(back)
            rho.update(zip(rest, fresh))
            q = self.renamed(cid, rho)
            if self.compat(phi, q):
                return q, cid
        return None

    def saturated(self, phi: Mosaic, alive: Sequence[int], literal: Sequence[Mosaic] = ()):
        """(ok, witnessing class ids, first unwitnessed need)."""
        used = set()
        alive = set(alive)
        for t, inst in needs(phi, self.c):
            if literal and _literal_witness(phi, t, inst, LiteralIndex(literal), self.c, self.tau) is not None:
                continue
            w = self.find_witness(phi, t, inst, alive)
            if w is None:
                return False, used, (t, inst)
            used.add(w[1])
        return True, used, None


def eliminate(space: MosaicSpace, ids: Iterable[int] | None = None, clock: _Clock | None = None) -> list[int]:
    """Greatest subset of classes in which every class is existentially saturated."""
    alive = set(range(len(space.classes)) if ids is None else ids)
    dependents: dict[int, set] = defaultdict(set)
    queue = sorted(alive, reverse=True)
    queued = set(queue)
    while queue:
        if clock is not None and not clock.tick():
            raise TimeoutError("elimination budget exhausted")
        cid = queue.pop()
        queued.discard(cid)
        if cid not in alive:
            continue
        ok, used, _ = space.saturated(space.classes[cid], sorted(alive))
        if ok:
            for u in used:
                dependents[u].add(cid)
            continue
        alive.discard(cid)
        for d in sorted(dependents.pop(cid, ())):
            if d in alive and d not in queued:
                queue.append(d)
                queued.add(d)
        queue.sort(reverse=True)
    return sorted(alive)


# ---------------------------------------------------------------- read-off

class ReadOff:
    """Mosaics read off from a collection of structures.

    For a tuple a of distinct elements, Phi(a) collects the types of all
    tuples (in any structure of the collection) that are guarded
    bisimilar to a sub-tuple of a.
    """

    def __init__(self, c: Closure, tau: Iterable[str], structures: Sequence[Structure]):
        self.c = c
        self.tau = tuple(sorted(set(tau)))
        self.structures = list(structures)
        self.tcs = [TypeComputer(c, s) for s in self.structures]
        self._bis: dict = {}
        self.colours = GuardedColouring(self.structures, self.tau)
        self._by_key: dict = {}
        self._phi: dict = {}

    def bisim(self, i: int, j: int) -> GuardedBisimulation:
        hit = self._bis.get((i, j))
        if hit is None:
            hit = self._bis[(i, j)] = GuardedBisimulation(self.structures[i], self.structures[j], self.tau)
        return hit

    def partners(self, i: int, sub: tuple) -> list[tuple[int, tuple]]:
        """Every (j, b) with b guarded bisimilar to sub, found through shared colour keys."""
        k = len(sub)
        table = self._by_key.get(k)
        if table is None:
            table = self._by_key[k] = defaultdict(list)
            for j, s in enumerate(self.structures):
                for b in itertools.permutations(s.domain, k):
                    table[self.colours.key(j, b)].append((j, b))
        return table.get(self.colours.key(i, sub), [])

    def phi(self, i: int, elems: Sequence, xs: Sequence[str] | None = None) -> Mosaic:
        elems = tuple(elems)
        k = len(elems)
        base = self.c.pool[:k]
        hit = self._phi.get((i, elems))
        if hit is None:
            types = set()
            for r in range(k + 1):
                for pos in itertools.combinations(range(k), r):
                    sub = tuple(elems[p] for p in pos)
                    vs = tuple(base[p] for p in pos)
                    for j, b in self.partners(i, sub):
                        types.add(self.tcs[j].tp(vs, b))
            hit = self._phi[(i, elems)] = Mosaic(types)
        if xs is None or tuple(xs) == base:
            return hit
        return hit.rename(dict(zip(base, xs)))

    def classes(self, width: int) -> list[Mosaic]:
        seen = {}
        for i, s in enumerate(self.structures):
            for k in range(width + 1):
                for elems in itertools.permutations(s.domain, k):
                    canon, _ = self.phi(i, elems).canonical(self.c.pool)
                    seen.setdefault(canon, None)
        return sorted(seen, key=Mosaic.sort_key)


def trim_mosaic(phi: Mosaic, keep: Iterable[XiType], width: int) -> Mosaic:
    keep = set(keep)
    return Mosaic((t for t in phi.types if len(t.vars) <= width or t in keep), trim=width)


@dataclass
class MosaicSet:
    mosaics: list[Mosaic]
    saturated: bool = False
    provenance: str = ""

    def __iter__(self):
        return iter(self.mosaics)

    def __len__(self):
        return len(self.mosaics)


def read_off(A: PointedStructure, B: PointedStructure, tau: Iterable[str], c: Closure,
             check: bool = True):
    """Saturated mosaic set and (Psi, t1, t2) read off from a bisimilar pair.

    Every Phi(a, x) with |a| up to the width, for every placement x of the
    tuple on pool variables, plus the trimmed Psi for the distinguished
    tuples when they are longer than the width.
    """
    ro = ReadOff(c, tau, [A.structure, B.structure])
    if len(A.point) != len(B.point) or len(set(A.point)) != len(A.point) or len(set(B.point)) != len(B.point):
        raise ValueError("read-off needs equal-length tuples of distinct elements")
    if not ro.bisim(0, 1).check_top(A.point, B.point):
        raise ValueError("the pointed structures are not guarded bisimilar")
    m = len(A.point)
    x0 = c.pool[:m]
    t1 = ro.tcs[0].tp(x0, A.point)
    t2 = ro.tcs[1].tp(x0, B.point)
    full = ro.phi(0, A.point)
    psi = trim_mosaic(full, (t1, t2), c.width) if m > c.width else full
    out = {}
    for cls in ro.classes(c.width):
        for X in itertools.permutations(c.pool, len(cls.vars)):
            r = cls.rename(dict(zip(sorted(cls.vars, key=_pool_key), X)))
            out.setdefault(r, None)
    out.setdefault(psi, None)
    M = sorted(out, key=Mosaic.sort_key)
    ms = MosaicSet(M, provenance="read-off")
    if check:
        for phi in M:
            chk = is_mosaic(phi, c, tau)
            assert chk, chk.detail
        chk = is_saturated_set(M, c, tau)
        assert chk, chk.detail
        ms.saturated = True
    return ms, psi, t1, t2


# ---------------------------------------------------------------- decision and certificates

@dataclass
class GfCertificate:
    closure: Closure
    tau: tuple[str, ...]
    psi: Mosaic
    t1: XiType
    t2: XiType
    mosaics: list[Mosaic]
    realizers: dict = field(default_factory=dict)    # type -> (structure index, elements)
    structures: list[Structure] = field(default_factory=list)

    def to_json(self) -> dict:
        c = self.closure
        table = sorted({t for phi in self.mosaics for t in phi.types}, key=XiType.sort_key)
        index = {t: i for i, t in enumerate(table)}
        return {
            "kind": "gf-mosaics",
            "closure": c.fingerprint(),
            "templates": [str(t.formula) for t in c.templates],
            "tau": list(self.tau),
            "x0": list(c.pool[:c.fv]),
            "types": [{"vars": sorted(t.vars, key=_pool_key), "members": [[tid, list(a)] for tid, a in sorted(t.members)]}
                      for t in table],
            "mosaics": [[index[t] for t in phi.types] for phi in self.mosaics],
            "psi": self.mosaics.index(self.psi),
            "t1": index[self.t1], "t2": index[self.t2],
            "realizers": {str(index[t]): [i, [str(e) for e in elems]] for t, (i, elems) in self.realizers.items()
                          if t in index},
            "structures": [to_structure_text(s) for s in self.structures],
        }


def certificate_from_json(data: dict, c: Closure) -> GfCertificate:
    if data.get("closure") != c.fingerprint():
        raise ValueError("certificate was produced for a different closure")
    types = [XiType(d["vars"], ((tid, tuple(a)) for tid, a in d["members"])) for d in data["types"]]
    width = c.width
    mos = []
    for k, idxs in enumerate(data["mosaics"]):
        trim = width if k == data["psi"] and c.fv > width else None
        mos.append(Mosaic((types[i] for i in idxs), trim))
    structures = [parse_structure(s).structure for s in data.get("structures", [])]
    realizers = {}
    for key, (i, elems) in data.get("realizers", {}).items():
        s = structures[i]
        by_name = {str(e): e for e in s.domain}
        realizers[types[int(key)]] = (i, tuple(by_name[e] for e in elems))
    return GfCertificate(c, tuple(data["tau"]), mos[data["psi"]], types[data["t1"]], types[data["t2"]], mos,
                         realizers, structures)


def verify_gf_certificate(cert: GfCertificate, c: Closure | None = None, tau: Iterable[str] | None = None) -> Check:
    """Re-check every mosaic condition and saturation directly on the explicit mosaic set."""
    c = c or cert.closure
    tau = tuple(sorted(set(cert.tau if tau is None else tau)))
    if set(tau) != set(cert.tau):
        return Check(False, "tau differs from the certificate")
    x0 = frozenset(c.pool[:c.fv])
    psi, t1, t2 = cert.psi, cert.t1, cert.t2
    if t1 not in psi or t2 not in psi:
        return Check(False, "t1 or t2 missing from Psi")
    if t1.vars != x0 or t2.vars != x0:
        return Check(False, "t1, t2 are not over the free-variable tuple")
    (pi, ppol), (qi, qpol) = c.phi_inst, c.psi_inst
    if (pi in t1.members) != ppol or (qi in t2.members) != qpol:
        return Check(False, "phi or psi not in the designated types")
    for t in psi.types:
        if t not in (t1, t2) and len(t.vars) > c.width:
            return Check(False, "Psi has a wide type besides t1, t2")
    for phi in cert.mosaics:
        if phi is not psi and len(phi.vars) > c.width:
            return Check(False, "mosaic with more than width variables")
        chk = is_mosaic(phi, c, tau)
        if not chk:
            return Check(False, ("internal condition", chk.detail))
        for t in phi.types:
            if not is_coherent(c, t):
                return Check(False, ("incoherent type", t))
    chk = is_saturated_set(cert.mosaics, c, tau)
    if not chk:
        return Check(False, ("not existentially saturated", chk.detail))
    for t, (i, elems) in cert.realizers.items():
        tc = TypeComputer(c, cert.structures[i])
        if tc.tp(sorted(t.vars, key=_pool_key), elems) != t:
            return Check(False, ("realizer mismatch", t))
    return Check(True)


@dataclass
class GfVerdict:
    outcome: str                     # CONSISTENT | NOT_FOUND_WITHIN_UNIVERSE | INCONSISTENT
    certificate: GfCertificate | None = None
    stats: dict = field(default_factory=dict)

    @property
    def consistent(self) -> bool:
        return self.outcome == "CONSISTENT"


def _holds(inst_pol, t: XiType) -> bool:
    inst, pol = inst_pol
    return (inst in t.members) == pol


def materialize(space: MosaicSpace, alive: Sequence[int], psi: Mosaic, limit: int = 20000) -> list[Mosaic]:
    """Explicit saturated set reachable from Psi, reusing already placed mosaics first."""
    c, tau = space.c, space.tau
    alive = set(alive)
    index = LiteralIndex([psi])
    queue = [psi]
    cache: dict = {}
    while queue:
        phi = queue.pop(0)
        for t, inst in needs(phi, c):
            if _literal_witness(phi, t, inst, index, c, tau, cache) is not None:
                continue
            w = space.find_witness(phi, t, inst, alive)
            if w is None:
                raise AssertionError("saturation lost while materializing")
            if index.add(w[0]):
                queue.append(w[0])
                if len(index) > limit:
                    raise RuntimeError("certificate too large")
    return list(index.mosaics)


def decide_joint_consistency(phi: Formula, psi: Formula, tau: Iterable[str],
                             universe: TypeUniverse | None = None,
                             budget: SearchBudget = SearchBudget(3),
                             seeds: Iterable[Structure] = (), xs: Sequence[str] | None = None,
                             search_budget: int = 2000, certificate: bool = True) -> GfVerdict:
    """Search for a saturated mosaic set containing Psi, over mosaics read off from the realized universe."""
    tau = tuple(sorted(set(tau)))
    c = universe.closure if universe is not None else Closure(phi, psi, xs)
    if universe is None:
        universe = build_universe(c, tau, budget, seeds)
    clock = _Clock(budget)
    ro = ReadOff(c, tau, universe.structures)
    classes = ro.classes(c.width)
    space = MosaicSpace(c, tau, classes)
    alive = eliminate(space, clock=clock)
    stats = {"structures": len(universe.structures), "classes": len(classes), "alive": len(alive),
             "exact_universe": universe.exact, "closure_size": len(c)}
    m = c.fv
    x0 = c.pool[:m]
    tried = 0
    for i, s in enumerate(universe.structures):
        for elems in itertools.permutations(s.domain, m):
            t1 = ro.tcs[i].tp(x0, elems)
            if not _holds(c.phi_inst, t1):
                continue
            full = ro.phi(i, elems)
            for t2 in full.types:
                if t2.vars != frozenset(x0) or not _holds(c.psi_inst, t2):
                    continue
                tried += 1
                cand = trim_mosaic(full, (t1, t2), c.width) if m > c.width else full
                if not is_mosaic(cand, c, tau):
                    continue
                ok, _, _ = space.saturated(cand, alive, literal=[cand])
                if ok:
                    stats["candidates_tried"] = tried
                    return GfVerdict("CONSISTENT", _certificate(space, alive, cand, t1, t2, universe, certificate),
                                     stats)
    found = _dfs_psi(space, alive, universe, search_budget, stats)
    if found is not None:
        cand, t1, t2 = found
        return GfVerdict("CONSISTENT", _certificate(space, alive, cand, t1, t2, universe, certificate), stats)
    stats["candidates_tried"] = tried
    return GfVerdict("INCONSISTENT" if universe.exact else "NOT_FOUND_WITHIN_UNIVERSE", None, stats)


def _certificate(space, alive, psi, t1, t2, universe, want: bool):
    if not want:
        return None
    M = materialize(space, alive, psi)
    realizers = {}
    for phi in M:
        for t in phi.types:
            if t not in realizers:
                w = universe.witness(t)
                if w is not None:
                    realizers[t] = w
    return GfCertificate(space.c, space.tau, psi, t1, t2, M, realizers, list(universe.structures))


def _dfs_psi(space: MosaicSpace, alive, universe: TypeUniverse, limit: int, stats: dict):
    """Search supersets of the restriction closure of {t1, t2} built from universe types."""
    c, tau = space.c, space.tau
    m = c.fv
    x0 = c.pool[:m]
    wide = m > c.width
    over_x0 = universe.types_over(x0)
    t1s = [t for t in over_x0 if _holds(c.phi_inst, t)]
    t2s = [t for t in over_x0 if _holds(c.psi_inst, t)]
    extra = []
    for X in _subsets(x0):
        if len(X) <= c.width and X != frozenset(x0):
            extra.extend(universe.types_over(X))
    if not wide:
        extra.extend(over_x0)
    extra = sorted(set(extra), key=XiType.sort_key)
    visited = set()
    count = 0

    def close(S):
        S = set(S)
        trim = c.width if wide else None
        changed = True
        while changed:
            changed = False
            for t in list(S):
                for X in _subsets(sorted(t.vars, key=_pool_key)):
                    if trim is not None and len(X) > trim:
                        continue
                    r = t.restrict(X)
                    if r not in S:
                        S.add(r)
                        changed = True
        return Mosaic(S, trim)

    for t1 in t1s:
        for t2 in t2s:
            stack = [(close({t1, t2}), -1)]
            while stack:
                cand, last = stack.pop()
                if cand in visited:
                    continue
                visited.add(cand)
                count += 1
                if count > limit:
                    stats["dfs_exhausted"] = False
                    return None
                if not is_tau_uniform(cand, c, tau):
                    continue
                bs = is_bisim_saturated(cand, c, tau)
                if not bs:
                    Y, t2p = bs.detail
                    for s in universe.types_over(frozenset(Y)):
                        if s.restrict(t2p.vars) == t2p:
                            stack.append((close(set(cand.types) | {s}), last))
                    continue
                ok, _, _ = space.saturated(cand, alive, literal=[cand])
                if ok:
                    stats["dfs_candidates"] = count
                    return cand, t1, t2
                have = set(cand.types)
                for k in range(len(extra) - 1, last, -1):
                    if extra[k] not in have:
                        stack.append((close(have | {extra[k]}), k))
    stats["dfs_exhausted"] = True
    stats["dfs_candidates"] = count
    return None


# ---------------------------------------------------------------- unfolding

def guarded_rank(f: Formula) -> int:
    return quantifier_rank(f)


def _atoms_of(c: Closure, t: XiType):
    for inst in sorted(t.members):
        f = c.formula_of(inst)
        if isinstance(f, Atom):
            yield f.pred, f.args


@dataclass
class Unfolding:
    structures: tuple[PointedStructure, PointedStructure]
    nodes: int
    depth: int


def unfold(M: Sequence[Mosaic], psi: Mosaic, t1: XiType, t2: XiType, depth: int, c: Closure,
           tau: Iterable[str], max_nodes: int = 200_000, realizers: dict | None = None,
           structures: Sequence[Structure] = ()) -> Unfolding:
    """Bounded tree unfolding of a saturated mosaic set.

    Nodes are sequences of (type, mosaic) pairs starting at the sentence
    type, consecutive mosaics compatible and consecutive types coinciding on
    shared variables; each node's bag holds fresh copies of the variables it
    does not share with its parent.  When realizers are supplied, every node
    at the last level is completed by gluing a copy of a structure realizing
    its type, so its existential members have witnesses.
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    tau = tuple(sorted(set(tau)))
    closed = {}
    for phi in M:
        for X in _subsets(sorted(phi.vars, key=_pool_key)):
            closed.setdefault(phi.sub(X) if X != phi.vars else phi, None)
    pool = sorted(closed, key=Mosaic.sort_key)
    succ_cache: dict = {}

    def successors(t, phi):
        key = (t, phi)
        hit = succ_cache.get(key)
        if hit is None:
            hit = []
            for q in pool:
                if not compatible(phi, q, c, tau):
                    continue
                for t2 in q.types:
                    shared = t.vars & t2.vars
                    if t.restrict(shared) == t2.restrict(shared):
                        hit.append((t2, q))
            succ_cache[key] = hit
        return hit

    out = []
    total = 0
    for target in (t1, t2):
        hat = psi.sub(())
        s0 = target.restrict(())
        facts = defaultdict(set)
        counter = itertools.count()
        dom = []
        leaves = []
        root_val = None
        # (type, mosaic, valuation, level)
        stack = [(s0, hat, {}, 0)]
        while stack:
            t, phi, v, lvl = stack.pop()
            total += 1
            if total > max_nodes:
                raise RuntimeError("unfolding exceeds the node budget")
            for pred, args in _atoms_of(c, t):
                facts[pred].add(tuple(v[a] for a in args))
            if lvl == depth + 1:
                leaves.append((t, v))
                continue
            if lvl == 0:
                nxt = [(target, psi)]
            else:
                nxt = successors(t, phi)
            for t2, q in nxt:
                v2 = {}
                for y in sorted(t2.vars, key=_pool_key):
                    if y in t.vars:
                        v2[y] = v[y]
                    else:
                        e = f"e{next(counter)}"
                        dom.append(e)
                        v2[y] = e
                if lvl == 0:
                    root_val = v2
                stack.append((t2, q, v2, lvl + 1))
        if realizers:
            for t, v in leaves:
                hit = realizers.get(t)
                if hit is None:
                    continue
                i, elems = hit
                s = structures[i]
                xs = sorted(t.vars, key=_pool_key)
                glue = {elems[k]: v[xs[k]] for k in range(len(xs))}
                tag = next(counter)
                for a in s.domain:
                    if a not in glue:
                        glue[a] = f"g{tag}_{a}"
                        dom.append(glue[a])
                for pred, ts in s.relations.items():
                    for tup in ts:
                        facts[pred].add(tuple(glue[a] for a in tup))
        if not dom:
            dom.append("e_")
        sig = {n: a for n, a in c.signature.items()}
        st = Structure(dom, {n: facts.get(n, ()) for n in sig}, sig)
        xs0 = sorted(target.vars, key=_pool_key)
        out.append(PointedStructure(st, tuple(root_val[x] for x in xs0)))
    return Unfolding((out[0], out[1]), total, depth)


def failing_members(c: Closure, ps: PointedStructure, t: XiType, max_rank: int | None = None) -> list:
    """Members of t (with negations) of rank at most max_rank that fail at the point."""
    xs = sorted(t.vars, key=_pool_key)
    v = dict(zip(xs, ps.point))
    bad = []
    from .semantics import Evaluator
    ev = Evaluator(ps.structure)
    for tid, args in c.instances(t.vars):
        tm = c.templates[tid]
        if max_rank is not None and tm.rank > max_rank:
            continue
        want = (tid, args) in t.members
        got = ev(tm.formula, {f"f{i}": v[a] for i, a in enumerate(args)})
        if want != got:
            bad.append((c.formula_of((tid, args)), want))
    return bad


def certificate_json(cert: GfCertificate) -> str:
    return json.dumps(cert.to_json(), sort_keys=True)
