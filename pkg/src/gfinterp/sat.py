"""Grounding over a fixed finite domain and a small CDCL clause solver.

Used by the bounded model search: a formula is grounded over domain
{0..k-1}, translated to clauses with one gate per (subformula, relevant
assignment), and handed to the solver.
"""
from __future__ import annotations

import heapq
import itertools
from typing import Iterable, Mapping, Sequence

from .syntax import And, Atom, Const, Eq, Exists, Forall, Formula, Iff, Implies, Not, Or, free_vars


class Solver:
    """Conflict-driven clause learning with watched literals and restarts."""

    def __init__(self):
        self.nvars = 0
        self.clauses: list[list[int]] = []
        self.watches: dict[int, list[int]] = {}
        self.assign: list[int] = [0]
        self.level: list[int] = [0]
        self.reason: list[int | None] = [None]
        self.activity: list[float] = [0.0]
        self.phase: list[int] = [-1]
        self.trail: list[int] = []
        self.trail_lim: list[int] = []
        self.qhead = 0
        self.heap: list[tuple[float, int]] = []
        self.inc = 1.0
        self.unsat = False
        self.conflicts = 0

    def new_var(self) -> int:
        self.nvars += 1
        self.assign.append(0)
        self.level.append(0)
        self.reason.append(None)
        self.activity.append(0.0)
        self.phase.append(-1)
        heapq.heappush(self.heap, (0.0, self.nvars))
        return self.nvars

    def value(self, lit: int) -> int:
        v = self.assign[abs(lit)]
        return v if lit > 0 else -v

    def add_clause(self, lits) -> None:
        if self.unsat:
            return
        seen = set()
        clause = []
        for lit in lits:
            if -lit in seen:
                return
            if lit not in seen:
                seen.add(lit)
                clause.append(lit)
        if self.trail_lim:
            raise RuntimeError("clauses must be added at decision level 0")
        clause = [l for l in clause if self.value(l) != -1]
        if any(self.value(l) == 1 for l in clause):
            return
        if not clause:
            self.unsat = True
        elif len(clause) == 1:
            self._enqueue(clause[0], None)
            if self._propagate() is not None:
                self.unsat = True
        else:
            self._attach(clause)

    def _attach(self, clause: list[int]) -> int:
        idx = len(self.clauses)
        self.clauses.append(clause)
        self.watches.setdefault(-clause[0], []).append(idx)
        self.watches.setdefault(-clause[1], []).append(idx)
        return idx

    def _enqueue(self, lit: int, reason: int | None) -> None:
        v = abs(lit)
        self.assign[v] = 1 if lit > 0 else -1
        self.level[v] = len(self.trail_lim)
        self.reason[v] = reason
        self.trail.append(lit)

    def _propagate(self) -> int | None:
        while self.qhead < len(self.trail):
            p = self.trail[self.qhead]
            self.qhead += 1
            ws = self.watches.get(p, [])
            i = j = 0
            conflict = None
            while i < len(ws):
                ci = ws[i]
                i += 1
                c = self.clauses[ci]
                if c[0] == -p:
                    c[0], c[1] = c[1], c[0]
                if self.value(c[0]) == 1:
                    ws[j] = ci
                    j += 1
                    continue
                for k in range(2, len(c)):
                    if self.value(c[k]) != -1:
                        c[1], c[k] = c[k], c[1]
                        self.watches.setdefault(-c[1], []).append(ci)
                        break
                else:
                    ws[j] = ci
                    j += 1
                    if self.value(c[0]) == -1:
                        conflict = ci
                        while i < len(ws):
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                    else:
                        self._enqueue(c[0], ci)
            del ws[j:]
            if conflict is not None:
                return conflict
        return None

    def _bump(self, v: int) -> None:
        self.activity[v] += self.inc
        if self.activity[v] > 1e100:
            for u in range(1, self.nvars + 1):
                self.activity[u] *= 1e-100
            self.inc *= 1e-100
            self.heap = [(-self.activity[u], u) for u in range(1, self.nvars + 1) if self.assign[u] == 0]
            heapq.heapify(self.heap)
        elif self.assign[v] == 0:
            heapq.heappush(self.heap, (-self.activity[v], v))

    def _analyze(self, confl: int) -> tuple[list[int], int]:
        seen = set()
        learnt = [0]
        counter = 0
        p = None
        idx = len(self.trail) - 1
        cur = len(self.trail_lim)
        while True:
            for q in self.clauses[confl]:
                if p is not None and q == p:
                    continue
                v = abs(q)
                if v not in seen and self.level[v] > 0:
                    seen.add(v)
                    self._bump(v)
                    if self.level[v] >= cur:
                        counter += 1
                    else:
                        learnt.append(q)
            while abs(self.trail[idx]) not in seen:
                idx -= 1
            p = self.trail[idx]
            idx -= 1
            seen.discard(abs(p))
            counter -= 1
            if counter == 0:
                break
            confl = self.reason[abs(p)]
        learnt[0] = -p
        if len(learnt) == 1:
            return learnt, 0
        best = max(range(1, len(learnt)), key=lambda k: self.level[abs(learnt[k])])
        learnt[1], learnt[best] = learnt[best], learnt[1]
        return learnt, self.level[abs(learnt[1])]

    def _backtrack(self, lvl: int) -> None:
        if len(self.trail_lim) <= lvl:
            return
        stop = self.trail_lim[lvl]
        for lit in self.trail[stop:]:
            v = abs(lit)
            self.phase[v] = 1 if lit > 0 else -1
            self.assign[v] = 0
            self.reason[v] = None
            heapq.heappush(self.heap, (-self.activity[v], v))
        del self.trail[stop:]
        del self.trail_lim[lvl:]
        self.qhead = len(self.trail)

    def _pick(self) -> int | None:
        while self.heap:
            _, v = heapq.heappop(self.heap)
            if self.assign[v] == 0:
                return v
        return None

    def solve(self, max_conflicts: int | None = None, assumptions: Sequence[int] = ()) -> bool | None:
        """True (model in self.assign), False, or None when the conflict limit is hit."""
        if self.unsat:
            return False
        if self._propagate() is not None:
            self.unsat = True
            return False
        restart_base, luby_i = 64, 1
        budget_here = restart_base * _luby(luby_i)
        since_restart = 0
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                since_restart += 1
                if not self.trail_lim:
                    self.unsat = True
                    return False
                learnt, back = self._analyze(confl)
                self._backtrack(back)
                if len(learnt) == 1:
                    self._enqueue(learnt[0], None)
                else:
                    ci = self._attach(learnt)
                    self._enqueue(learnt[0], ci)
                self.inc *= 1.05
                if max_conflicts is not None and self.conflicts >= max_conflicts:
                    self._backtrack(0)
                    return None
                continue
            if since_restart >= budget_here:
                self._backtrack(0)
                luby_i += 1
                budget_here = restart_base * _luby(luby_i)
                since_restart = 0
            lvl = len(self.trail_lim)
            if lvl < len(assumptions):
                lit = assumptions[lvl]
                if self.value(lit) == -1:
                    self._backtrack(0)
                    return False
                self.trail_lim.append(len(self.trail))
                if self.value(lit) == 0:
                    self._enqueue(lit, None)
                continue
            v = self._pick()
            if v is None:
                return True
            self.trail_lim.append(len(self.trail))
            self._enqueue(v if self.phase[v] > 0 else -v, None)


def _luby(i: int) -> int:
    k = 1
    while True:
        if i == (1 << k) - 1:
            return 1 << (k - 1)
        if (1 << (k - 1)) <= i < (1 << k) - 1:
            return _luby(i - (1 << (k - 1)) + 1)
        k += 1


class Grounder:
    """Tseitin translation of formulas over the domain {0..k-1}."""

    def __init__(self, solver: Solver, k: int, signature: Mapping[str, int]):
        self.solver = solver
        self.domain = tuple(range(k))
        self.signature = dict(signature)
        self.atoms: dict[tuple, int] = {}
        self.cache: dict = {}
        self.fv: dict = {}

    def atom_var(self, pred: str, args: tuple) -> int:
        key = (pred, args)
        v = self.atoms.get(key)
        if v is None:
            v = self.atoms[key] = self.solver.new_var()
        return v

    def _free(self, f):
        r = self.fv.get(f)
        if r is None:
            r = self.fv[f] = tuple(sorted(free_vars(f)))
        return r

    def lit(self, f: Formula, env: Mapping[str, int]):
        key = (f, tuple(env[x] for x in self._free(f)))
        r = self.cache.get(key)
        if r is None:
            r = self.cache[key] = self._lit(f, env)
        return r

    def _gate_and(self, lits):
        out = []
        for l in lits:
            if l is False:
                return False
            if l is not True:
                out.append(l)
        out = list(dict.fromkeys(out))
        if not out:
            return True
        if len(out) == 1:
            return out[0]
        if any(-l in out for l in out):
            return False
        g = self.solver.new_var()
        for l in out:
            self.solver.add_clause([-g, l])
        self.solver.add_clause([g] + [-l for l in out])
        return g

    def _lit(self, f: Formula, env):
        if isinstance(f, Atom):
            if self.signature.get(f.pred, len(f.args)) != len(f.args):
                raise ValueError(f"arity mismatch for {f.pred}")
            return self.atom_var(f.pred, tuple(env[a] for a in f.args))
        if isinstance(f, Eq):
            return env[f.left] == env[f.right]
        if isinstance(f, Const):
            return f.value
        if isinstance(f, Not):
            return _neg(self.lit(f.sub, env))
        if isinstance(f, And):
            return self._gate_and([self.lit(c, env) for c in f.args])
        if isinstance(f, Or):
            return _neg(self._gate_and([_neg(self.lit(c, env)) for c in f.args]))
        if isinstance(f, Implies):
            return _neg(self._gate_and([self.lit(f.left, env), _neg(self.lit(f.right, env))]))
        if isinstance(f, Iff):
            a, b = self.lit(f.left, env), self.lit(f.right, env)
            return self._gate_and([_neg(self._gate_and([a, _neg(b)])), _neg(self._gate_and([b, _neg(a)]))])
        if isinstance(f, (Exists, Forall)):
            parts = []
            for combo in itertools.product(self.domain, repeat=len(f.vars)):
                w = dict(env)
                w.update(zip(f.vars, combo))
                parts.append(self.lit(f.body, w))
            if isinstance(f, Forall):
                return self._gate_and(parts)
            return _neg(self._gate_and([_neg(p) for p in parts]))
        raise TypeError(f)

    def assert_formula(self, f: Formula, env: Mapping[str, int]) -> None:
        l = self.lit(f, env)
        if l is False:
            self.solver.add_clause([])
        elif l is not True:
            self.solver.add_clause([l])

    def model(self) -> dict[str, list[tuple]]:
        rels: dict[str, list[tuple]] = {n: [] for n in self.signature}
        for (pred, args), v in self.atoms.items():
            if self.solver.assign[v] == 1:
                rels.setdefault(pred, []).append(args)
        return rels


def _neg(l):
    if l is True:
        return False
    if l is False:
        return True
    return -l


def ground_search(f: Formula, xs: Sequence[str], sig: Mapping[str, int], k: int, clock):
    """A pointed model of f with domain size k, None if there is none, or "UNKNOWN"."""
    from .semantics import PointedStructure, Structure, equality_patterns

    for pat in equality_patterns(len(xs), k):
        solver = Solver()
        gr = Grounder(solver, k, sig)
        env = {x: p for x, p in zip(xs, pat)}
        gr.assert_formula(f, env)
        while True:
            if not clock.tick():
                return "UNKNOWN"
            res = solver.solve(max_conflicts=solver.conflicts + 2000)
            if res is None:
                continue
            break
        if res:
            s = Structure(range(k), gr.model(), sig)
            return PointedStructure(s, tuple(env[x] for x in xs))
    return None


def expand_search(f: Formula, xs: Sequence[str], base, point: Sequence, fixed: Iterable[str],
                  sig: Mapping[str, int], clock=None, extra: Sequence[Formula] = ()):
    """Interpret the non-fixed symbols of sig over base's domain so that f holds at point.

    Facts of the symbols in `fixed` are copied from base and frozen.  Returns
    the expanded Structure, None when no expansion exists, or "UNKNOWN".
    """
    from .semantics import Structure

    dom = list(base.domain)
    idx = {a: i for i, a in enumerate(dom)}
    fixed = set(fixed)
    full = dict(sig)
    for name in fixed:
        if name in base.signature:
            full[name] = base.signature[name]
    solver = Solver()
    gr = Grounder(solver, len(dom), full)
    for name in sorted(fixed & set(full)):
        true = {tuple(idx[a] for a in t) for t in base.relations.get(name, ())}
        for args in itertools.product(range(len(dom)), repeat=full[name]):
            v = gr.atom_var(name, args)
            solver.add_clause([v] if args in true else [-v])
    env = {x: idx[a] for x, a in zip(xs, point)}
    gr.assert_formula(f, env)
    for g in extra:
        gr.assert_formula(g, {})
    while True:
        if clock is not None and not clock.tick():
            return "UNKNOWN"
        res = solver.solve(max_conflicts=solver.conflicts + 2000)
        if res is not None:
            break
    if not res:
        return None
    rels = {name: [tuple(dom[i] for i in t) for t in ts] for name, ts in gr.model().items()}
    return Structure(dom, rels, full)


def diverse_models(f: Formula, xs: Sequence[str], sig: Mapping[str, int], k: int, vary: Iterable[str],
                   limit: int, clock=None, strict: Iterable[str] = ()):
    """Up to `limit` pointed models of size k whose reducts to `vary` pairwise differ.

    Symbols in `strict` are forced to hold only of tuples of distinct elements.
    """
    from .semantics import PointedStructure, Structure, equality_patterns

    vary = sorted(set(vary) & set(sig))
    out = []
    for pat in equality_patterns(len(xs), k):
        solver = Solver()
        gr = Grounder(solver, k, sig)
        env = {x: p for x, p in zip(xs, pat)}
        gr.assert_formula(f, env)
        for name in strict:
            if name in sig and sig[name] >= 2:
                for args in itertools.product(range(k), repeat=sig[name]):
                    if len(set(args)) < len(args):
                        solver.add_clause([-gr.atom_var(name, args)])
        keys = [(n, a) for n in vary for a in itertools.product(range(k), repeat=sig[n])]
        lits = [gr.atom_var(n, a) for n, a in keys]
        while len(out) < limit:
            if clock is not None and not clock.tick():
                return out
            res = solver.solve(max_conflicts=solver.conflicts + 5000)
            if not res:
                break
            s = Structure(range(k), gr.model(), sig)
            out.append(PointedStructure(s, tuple(env[x] for x in xs)))
            block = [-l if solver.assign[l] == 1 else l for l in lits]
            solver._backtrack(0)
            if not block:
                break
            solver.add_clause(block)
        if len(out) >= limit:
            break
    return out
