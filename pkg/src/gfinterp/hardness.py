"""Reduction instances from space-bounded alternating Turing machines.

Each generator returns a sentence phi and a signature tau such that the machine
accepts the input word iff phi & A(x) and phi & ~A(x) are jointly consistent
over tau (for the pair variant, A(x,xp)).  The instances are a syntactic
stress corpus: they parse, print, and pass their fragment checks, but nobody
expects the decision procedures to solve them.

Sentences are built over "points": a single variable in the bounded-arity and
two-variable variants, a pair of variables in the general variant, where every
unary symbol becomes binary and every binary one 4-ary.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Sequence

from .syntax import (Atom, Eq, Exists, Forall, Formula, Iff, Implies, Not, conj, disj,
                     signature_of, size)

VARIANTS = ("gf-bounded", "gf-general", "fo2", "fo2-sig")


# ---------------------------------------------------------------- machines

@dataclass(frozen=True)
class AtmSpec:
    exists_states: tuple[str, ...]
    forall_states: tuple[str, ...]
    input_alphabet: tuple[str, ...]
    tape_alphabet: tuple[str, ...]
    blank: str
    start: str
    delta: dict = field(hash=False)  # (q, a) -> [(q1, a1, move), (q2, a2, move)] or []

    @property
    def states(self) -> tuple[str, ...]:
        return self.forall_states + self.exists_states

    def validate(self) -> None:
        Q = set(self.states)
        if set(self.exists_states) & set(self.forall_states):
            raise ValueError("a state is both existential and universal")
        if self.start not in self.forall_states:
            raise ValueError("the start state must be universal")
        if self.blank not in self.tape_alphabet or self.blank in self.input_alphabet:
            raise ValueError("the blank must be a tape symbol outside the input alphabet")
        if not set(self.input_alphabet) <= set(self.tape_alphabet):
            raise ValueError("input symbols must be tape symbols")
        for q in Q:
            for a in self.tape_alphabet:
                moves = self.delta.get((q, a), [])
                if len(moves) not in (0, 2):
                    raise ValueError(f"delta({q},{a}) must have zero or two elements")
                for q1, a1, d in moves:
                    if q1 not in Q or a1 not in self.tape_alphabet or d not in ("L", "R"):
                        raise ValueError(f"bad transition from ({q},{a})")
                    if (q in self.exists_states) == (q1 in self.exists_states):
                        raise ValueError(f"transition ({q},{a}) -> {q1} does not alternate")
        for k in self.delta:
            if k[0] not in Q or k[1] not in self.tape_alphabet:
                raise ValueError(f"delta defined on unknown pair {k}")


_DELTA_RE = re.compile(r"\(\s*(\w+)\s*,\s*(\S+?)\s*\)\s*->\s*(.*)")
_MOVE_RE = re.compile(r"\(\s*(\w+)\s*,\s*(\S+?)\s*,\s*([LR])\s*\)")


def parse_atm(text: str) -> AtmSpec:
    """Read `states:`, `exists:`, `forall:`, `input_alphabet:`, `tape_alphabet:`, `start:`,
    optional `blank:`, and any number of `delta: (q,a)->(q1,a1,L)|(q2,a2,R)` lines."""
    fields: dict[str, list[str]] = {}
    delta: dict = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, rest = line.partition(":")
        if not sep:
            raise ValueError(f"line {lineno}: expected 'key: value'")
        key = key.strip()
        if key == "delta":
            m = _DELTA_RE.fullmatch(rest.strip())
            if not m:
                raise ValueError(f"line {lineno}: malformed transition")
            moves = [(q, a, d) for q, a, d in _MOVE_RE.findall(m.group(3))]
            if len(moves) != len([p for p in m.group(3).split("|") if p.strip()]):
                raise ValueError(f"line {lineno}: malformed transition target")
            delta[(m.group(1), m.group(2))] = moves
        elif key in ("states", "exists", "forall", "input_alphabet", "tape_alphabet", "start", "blank"):
            fields[key] = rest.replace(",", " ").split()
        else:
            raise ValueError(f"line {lineno}: unknown key {key!r}")
    for key in ("exists", "forall", "input_alphabet", "tape_alphabet", "start"):
        if key not in fields:
            raise ValueError(f"missing {key!r}")
    tape = tuple(fields["tape_alphabet"])
    inp = tuple(fields["input_alphabet"])
    if "blank" in fields:
        blank = fields["blank"][0]
    else:
        extra = [a for a in tape if a not in inp]
        if len(extra) != 1:
            raise ValueError("cannot infer the blank; add a 'blank:' line")
        blank = extra[0]
    machine = AtmSpec(tuple(fields["exists"]), tuple(fields["forall"]), inp, tape, blank,
                       fields["start"][0], delta)
    if "states" in fields and set(fields["states"]) != set(machine.states):
        raise ValueError("states must be the union of the existential and universal states")
    machine.validate()
    return machine


# ---------------------------------------------------------------- symbol names

class _Names:
    """Relation-symbol names for tape contents and markers."""

    def __init__(self, M: AtmSpec):
        self.M = M
        self.tok = {}
        for i, a in enumerate(M.tape_alphabet):
            if a == M.blank:
                self.tok[a] = "blank"
            elif re.fullmatch(r"[A-Za-z0-9]+", a):
                self.tok[a] = a
            else:
                self.tok[a] = f"g{i}"
        self.sigmas: list = list(M.tape_alphabet) + [(q, a) for q in M.states for a in M.tape_alphabet]

    def _s(self, s) -> str:
        return f"{s[0]}_{self.tok[s[1]]}" if isinstance(s, tuple) else self.tok[s]

    def cell(self, s) -> str:
        return f"A_{self._s(s)}"

    def mark(self, i: int, s) -> str:
        return f"M{i}_{self._s(s)}"

    def carry(self, s) -> str:
        return f"Mp_{self._s(s)}"


def next_middle(M: AtmSpec, left, mid, right, i: int):
    """Content of the middle cell in the i-th successor (i in 1, 2); None if undefined.

    left or right is None at the border of a configuration.
    """
    heads = [c for c in (left, mid, right) if isinstance(c, tuple)]
    if len(heads) > 1:
        return None
    if isinstance(mid, tuple):
        moves = M.delta.get(mid, [])
        return moves[i - 1][1] if moves else None
    if isinstance(left, tuple):
        moves = M.delta.get(left, [])
        if not moves:
            return None
        q1, _, d = moves[i - 1]
        return (q1, mid) if d == "R" else mid
    if isinstance(right, tuple):
        moves = M.delta.get(right, [])
        if not moves:
            return None
        q1, _, d = moves[i - 1]
        return (q1, mid) if d == "L" else mid
    return mid


# ---------------------------------------------------------------- point language

class _Points:
    """Atoms and quantifiers over points (variable tuples of length `width`)."""

    def __init__(self, width: int, n: int):
        self.width, self.n = width, n
        self.X = ("x", "xp")[:width]
        self.Y = ("y", "yp")[:width]
        self.Z = ("z", "zp")[:width]

    def other(self, p):
        return self.Y if p == self.X else self.X

    def un(self, P: str, p) -> Atom:
        return Atom(P, tuple(p))

    def bi(self, R: str, p, q) -> Atom:
        return Atom(R, tuple(p) + tuple(q))

    def all(self, p, guard: Formula, body: Formula) -> Formula:
        return Forall(tuple(p), Implies(guard, body))

    def ex(self, p, guard: Formula, body: Formula | None = None) -> Formula:
        return Exists(tuple(p), guard if body is None else conj(guard, body))

    def all2(self, guard: Formula, body: Formula) -> Formula:
        return Forall(self.X + self.Y, Implies(guard, body))

    def box_s(self, k: int, p, make) -> Formula:
        """Every S^k successor of p satisfies make(point)."""
        if k == 0:
            return make(p)
        q = self.other(p)
        return self.all(q, self.bi("S", p, q), self.box_s(k - 1, q, make))

    # counters: bit i of counter C at point p
    def bits(self, C: str, p) -> list[Formula]:
        if self.width == 1:
            return [Atom(f"{C}{i}", tuple(p)) for i in range(1, self.n + 1)]
        # rank order on {x,xp}^n: x < xp, last position most significant
        out = []
        for t in itertools.product((0, 1), repeat=self.n):
            out.append((sum(b << j for j, b in enumerate(t)), Atom(f"D_{C}", tuple(p[b] for b in t))))
        return [a for _, a in sorted(out, key=lambda ra: ra[0])]

    def min_c(self, C, p):
        return conj(*[Not(b) for b in self.bits(C, p)])

    def max_c(self, C, p):
        return conj(*self.bits(C, p))

    def same(self, C1, C2, p) -> Formula:
        return conj(*[Iff(a, b) for a, b in zip(self.bits(C1, p), self.bits(C2, p))])

    def eq(self, C, p, q) -> Formula:
        if self.width == 2:
            return self._eq_pairs(C, p, q)
        return conj(*[Iff(a, b) for a, b in zip(self.bits(C, p), self.bits(C, q))])

    def succ(self, C, p, q) -> Formula:
        """q's counter is p's plus one, wrapping from the maximum to zero."""
        if self.width == 2:
            core = self._succ_pairs(C, p, q)
        else:
            bp, bq = self.bits(C, p), self.bits(C, q)
            alts = []
            for i in range(self.n):
                alts.append(conj(bq[i], Not(bp[i]),
                                 *[conj(Not(bq[j]), bp[j]) for j in range(i)],
                                 *[Iff(bq[j], bp[j]) for j in range(i + 1, self.n)]))
            core = disj(*alts)
        return disj(core, conj(self.max_c(C, p), self.min_c(C, q)))

    # pair counters through the position-matching predicate E
    def _tuples(self, stem: str):
        return tuple(f"{stem}{i}" for i in range(self.n))

    def _E(self, xs, xs2, p, ys, ys2, q) -> Atom:
        return Atom("E", tuple(xs) + tuple(xs2) + tuple(p) + tuple(ys) + tuple(ys2) + tuple(q))

    def _less(self, a, b, p) -> Formula:
        """Position a comes before position b in the rank order over p."""
        alts = []
        for i in range(self.n):
            alts.append(conj(Eq(b[i], p[1]), Eq(a[i], p[0]),
                             *[Eq(a[j], b[j]) for j in range(i + 1, self.n)]))
        return disj(*alts)

    def _eq_pairs(self, C, p, q) -> Formula:
        xs, ys, xs2, ys2 = self._tuples("u"), self._tuples("v"), self._tuples("uq"), self._tuples("vq")
        D = f"D_{C}"
        return Forall(xs + xs2 + ys + ys2, Implies(self._E(xs, xs2, p, ys, ys2, q),
                                                   Iff(Atom(D, xs), Atom(D, ys))))

    def _succ_pairs(self, C, p, q) -> Formula:
        xs, ys, xs2, ys2 = self._tuples("u"), self._tuples("v"), self._tuples("uq"), self._tuples("vq")
        D = f"D_{C}"
        inner = Forall(xs2 + ys2, Implies(
            self._E(xs, xs2, p, ys, ys2, q),
            conj(Implies(self._less(xs2, xs, p), conj(Atom(D, xs2), Not(Atom(D, ys2)))),
                 Implies(self._less(xs, xs2, p), Iff(Atom(D, xs2), Atom(D, ys2))))))
        return Exists(xs + ys, conj(self._E(xs, xs, p, ys, ys, q), Not(Atom(D, xs)), Atom(D, ys), inner))


# ---------------------------------------------------------------- instances

@dataclass
class GeneratedInstance:
    phi: Formula
    tau: tuple[str, ...]
    distinguished: Formula
    variant: str
    conjuncts: tuple[tuple[str, Formula], ...] = ()

    @property
    def xs(self) -> tuple[str, ...]:
        return self.distinguished.args

    def signature(self):
        return signature_of(self.phi)

    def problem_text(self) -> str:
        from .syntax import to_text
        logic = "fo2" if self.variant.startswith("fo2") else "gf"
        return (f"# {self.variant} reduction instance\nlogic: {logic}\nphi: {to_text(self.phi)}\n"
                f"theta: {to_text(self.distinguished)}\ntau: {' '.join(self.tau)}\n")


def base_tau(M: AtmSpec) -> tuple[str, ...]:
    names = _Names(M)
    return tuple(sorted({"R", "S", "X", "Z", "Ball", "Bex1", "Bex2"} | {names.cell(s) for s in names.sigmas}))


def _word(M: AtmSpec, w: Sequence[str] | None, n: int | None) -> list[str]:
    if w is None:
        if not n or n < 1:
            raise ValueError("give an input word or a length n >= 1")
        w = [M.input_alphabet[0]] * n
    w = list(w)
    if not w:
        raise ValueError("the input word must be non-empty")
    bad = [a for a in w if a not in M.input_alphabet]
    if bad:
        raise ValueError(f"input symbols {bad} not in the input alphabet")
    return w


def _families(M: AtmSpec, w: list[str], P: _Points) -> list[tuple[str, Formula]]:
    """Every conjunct except the loop-forcing one, keyed by family name."""
    names = _Names(M)
    n = len(w)
    x, y = P.X, P.Y
    u, b = P.un, P.bi
    I, X, Z = (lambda p: u("I", p)), (lambda p: u("X", p)), (lambda p: u("Z", p))
    out: list[tuple[str, Formula]] = []

    def add(fam, f):
        out.append((fam, f))

    # counter along R
    add("path", P.all2(b("R", x, y), Implies(conj(Not(u("A", x)), X(x)), I(x))))
    add("path", P.all2(b("R", x, y), Iff(I(x), I(y))))
    add("path", P.all2(conj(b("R", x, y), I(x), Not(X(y))), P.eq("A", x, y)))
    add("path", P.all2(conj(b("R", x, y), I(x), X(y)), P.succ("A", x, y)))
    # S-trees with U and V counters
    if P.width == 1:
        add("tree", Forall(x, Implies(Eq(x[0], x[0]), P.ex(y, b("S", x, y)))))
    else:
        add("tree", P.all(x, X(x), P.ex(y, b("S", x, y))))
        add("tree", P.all2(b("S", x, y), P.ex(x, b("S", y, x))))
    add("tree", P.all2(b("S", x, y), Iff(I(x), I(y))))
    add("tree", P.all(x, conj(I(x), X(x)), P.min_c("U", x)))
    add("tree", P.all(x, conj(I(x), X(x)), P.same("V", "A", x)))
    # U and V increment along S the same way the A-counter does
    for C in ("U", "V"):
        add("tree", P.all2(conj(b("S", x, y), I(x)), P.succ(C, x, y)))
    # configuration kinds and branching
    Ba, B1, B2 = (lambda p: u("Ball", p)), (lambda p: u("Bex1", p)), (lambda p: u("Bex2", p))
    add("kind", P.all(x, conj(I(x), X(x)), Ba(x)))
    add("kind", P.all2(conj(b("S", x, y), I(x), Not(P.max_c("U", x))), Iff(Ba(x), Ba(y))))
    add("kind", P.all2(conj(b("S", x, y), I(x), Not(P.max_c("U", x))), conj(Iff(B1(x), B1(y)), Iff(B2(x), B2(y)))))
    add("kind", P.all2(conj(b("S", x, y), I(x), P.max_c("U", x)), Iff(Ba(x), Not(Ba(y)))))
    add("kind", P.all(x, conj(I(x), P.max_c("U", x)),
                      conj(P.ex(y, b("S", x, y), Z(y)), P.ex(y, b("S", x, y), Not(Z(y))))))
    add("kind", P.all(x, conj(I(x), Not(Ba(x))), Iff(B1(x), Not(B2(x)))))
    # initial configuration
    cell = lambda s, p: u(names.cell(s), p)
    blank = lambda p: u("Blank", p)
    add("init", P.all(x, conj(I(x), X(x)), cell((M.start, w[0]), x)))
    for k in range(1, n):
        add("init", P.all(x, conj(I(x), X(x)), P.box_s(k, x, lambda p, a=w[k]: cell(a, p))))
    add("init", P.all(x, conj(I(x), X(x)), P.box_s(n, x, blank)))
    add("init", P.all(x, blank(x), cell(M.blank, x)))
    add("init", P.all(x, conj(blank(x), Not(P.max_c("U", x))), P.all(y, b("S", x, y), blank(y))))
    # coordination of successive configurations
    mark = lambda i, s, p: u(names.mark(i, s), p)

    def psi(s1, s2, s3, p):
        q = P.other(p)
        parts = [cell(s2, p)]
        if s1 is not None:
            parts.append(P.ex(q, b("S", q, p), cell(s1, q)))
        if s3 is not None:
            parts.append(P.ex(q, b("S", p, q), cell(s3, q)))
        return conj(*parts)

    sig = names.sigmas
    triples = [(s1, s2, s3, conj(Not(P.min_c("U", x)), Not(P.max_c("U", x))))
               for s1, s2, s3 in itertools.product(sig, repeat=3)]
    triples += [(None, s2, s3, P.min_c("U", x)) for s2, s3 in itertools.product(sig, repeat=2)]
    triples += [(s1, s2, None, P.max_c("U", x)) for s1, s2 in itertools.product(sig, repeat=2)]
    for s1, s2, s3, where in triples:
        f1, f2 = (next_middle(M, s1, s2, s3, i) for i in (1, 2))
        fam = "coord" if s1 is not None and s3 is not None else "coord-border"
        ctx = [I(x), P.min_c("V", x), where]
        if f1 is not None and f2 is not None:
            add(fam, P.all(x, conj(*ctx, Ba(x)), Implies(psi(s1, s2, s3, x), conj(mark(1, f1, x), mark(2, f2, x)))))
        for i, f in ((1, f1), (2, f2)):
            if f is not None:
                add(fam, P.all(x, conj(*ctx, (B1 if i == 1 else B2)(x)), Implies(psi(s1, s2, s3, x), mark(i, f, x))))
    # propagation of markers
    carry = lambda s, p: u(names.carry(s), p)
    for s in sig:
        for i in (1, 2):
            add("carry", P.all(x, conj(Not(P.max_c("U", x)), mark(i, s, x)), P.all(y, b("S", x, y), mark(i, s, y))))
        add("carry", P.all(x, conj(P.max_c("U", x), Ba(x), mark(1, s, x)),
                           P.all(y, b("S", x, y), Implies(Z(y), carry(s, y)))))
        add("carry", P.all(x, conj(P.max_c("U", x), Ba(x), mark(2, s, x)),
                           P.all(y, b("S", x, y), Implies(Not(Z(y)), carry(s, y)))))
        for i in (1, 2):
            add("carry", P.all(x, conj(P.max_c("U", x), (B1 if i == 1 else B2)(x), mark(i, s, x)),
                               P.all(y, b("S", x, y), carry(s, y))))
        add("carry", P.all(x, conj(Not(P.max_c("V", x)), carry(s, x)), P.all(y, b("S", x, y), carry(s, y))))
        add("carry", P.all(x, conj(P.max_c("V", x), carry(s, x)), P.all(y, b("S", x, y), cell(s, y))))
    # halting configurations never occur
    for q in M.states:
        for a in M.tape_alphabet:
            if not M.delta.get((q, a)):
                add("halt", Forall(x, Not(cell((q, a), x))))
    return out


def _loop(P: _Points) -> Formula:
    x, y, z = P.X, P.Y, P.Z
    body = conj(P.un("X", x), Not(P.un("X", y)), Not(P.un("X", z)),
                P.bi("R", x, y), P.bi("R", y, z), P.bi("R", z, x))
    return P.all(x, P.un("A", x), Exists(y + z, conj(Atom("G", x + y + z), body)))


def gen_gf_bounded(M: AtmSpec, w: Sequence[str] | None = None, n: int | None = None) -> GeneratedInstance:
    M.validate()
    w = _word(M, w, n)
    P = _Points(1, len(w))
    parts = [("loop", _loop(P))] + _families(M, w, P)
    return GeneratedInstance(conj(*[f for _, f in parts]), base_tau(M), Atom("A", ("x",)), "gf-bounded",
                             tuple(parts))


def _e_axioms(P: _Points) -> list[Formula]:
    n = P.n
    x, y = P.X, P.Y
    us = tuple(f"u{i}" for i in range(2 * n))
    vs = tuple(f"v{i}" for i in range(2 * n))
    E = lambda a, p, c, q: Atom("E", tuple(a) + tuple(p) + tuple(c) + tuple(q))
    out = []
    for rel in ("R", "S"):
        out.append(P.all2(P.bi(rel, x, y), E((x[0],) * (2 * n), x, (y[0],) * (2 * n), y)))
    subs = []
    for i in range(2 * n):
        for a, c in ((x[0], y[0]), (x[1], y[1])):
            subs.append(E(us[:i] + (a,) + us[i + 1:], x, vs[:i] + (c,) + vs[i + 1:], y))
    every = us + x + vs + y
    out.append(Forall(every, Implies(E(us, x, vs, y), conj(*subs))))
    pos = [disj(conj(Eq(us[i], x[0]), Eq(vs[i], y[0])), conj(Eq(us[i], x[1]), Eq(vs[i], y[1])))
           for i in range(2 * n)]
    out.append(Forall(every, Implies(E(us, x, vs, y), conj(*pos))))
    return out


def gen_gf_general(M: AtmSpec, w: Sequence[str] | None = None, n: int | None = None) -> GeneratedInstance:
    """Pair version: R,S 4-ary, other tau symbols binary, counters in n-ary D_C via the (4n+4)-ary E."""
    M.validate()
    w = _word(M, w, n)
    P = _Points(2, len(w))
    parts = [("loop", _loop(P))] + [("position", f) for f in _e_axioms(P)] + _families(M, w, P)
    return GeneratedInstance(conj(*[f for _, f in parts]), base_tau(M), Atom("A", ("x", "xp")), "gf-general",
                             tuple(parts))


def _fo2_loop() -> Formula:
    from .instances import _path
    x, y = "x", "y"
    first = Forall((x,), Implies(Atom("Y", (x,)), conj(Atom("X", (x,)), _path(3, True),
                                                      Forall((y,), Implies(Atom("Y", (y,)), Eq(x, y))))))
    return conj(first, Forall((x,), Implies(Atom("A", (x,)), Atom("Y", (x,)))))


def gen_fo2(M: AtmSpec, w: Sequence[str] | None = None, n: int | None = None) -> GeneratedInstance:
    """The bounded instance with the ternary loop replaced by a Y-marked R-path of length three."""
    M.validate()
    w = _word(M, w, n)
    P = _Points(1, len(w))
    parts = [("loop", _fo2_loop())] + _families(M, w, P)
    return GeneratedInstance(conj(*[f for _, f in parts]), base_tau(M), Atom("A", ("x",)), "fo2", tuple(parts))


def _replace_unary(f: Formula, repl: dict) -> Formula:
    if isinstance(f, Atom):
        if f.pred in repl and len(f.args) == 1:
            return repl[f.pred](f.args[0])
        return f
    if isinstance(f, Not):
        return Not(_replace_unary(f.sub, repl))
    if isinstance(f, (Implies, Iff)):
        return type(f)(_replace_unary(f.left, repl), _replace_unary(f.right, repl))
    if isinstance(f, (Exists, Forall)):
        return type(f)(f.vars, _replace_unary(f.body, repl))
    if hasattr(f, "args") and not isinstance(f, Eq):
        return type(f)(tuple(_replace_unary(c, repl) for c in f.args))
    return f


def chi(E: str, v: str) -> Formula:
    """E(v) encoded through a fresh binary R_E and the shared N: v reaches an A element via R_E N N."""
    o = "y" if v == "x" else "x"
    return Exists((o,), conj(Atom(f"R_{E}", (v, o)),
                             Exists((v,), conj(Atom("N", (o, v)),
                                               Exists((o,), conj(Atom("N", (v, o)), Atom("A", (o,))))))))


def gen_fo2_sigvariant(M: AtmSpec, w: Sequence[str] | None = None, n: int | None = None) -> GeneratedInstance:
    """Every unary symbol outside tau and A becomes a reachability test through fresh binary symbols.

    The shared signature is then everything except A.
    """
    base = gen_fo2(M, w, n)
    sig = base.signature()
    tau = set(base.tau)
    replaced = sorted(s for s, ar in sig.items() if ar == 1 and s not in tau and s != "A")
    taken = set(sig)
    for s in replaced:
        if f"R_{s}" in taken:
            raise ValueError(f"fresh symbol R_{s} collides with an existing symbol")
    if "N" in taken:
        raise ValueError("fresh symbol N collides with an existing symbol")
    repl = {s: (lambda v, s=s: chi(s, v)) for s in replaced}
    parts = tuple((fam, _replace_unary(f, repl)) for fam, f in base.conjuncts)
    phi = conj(*[f for _, f in parts])
    new_tau = tuple(sorted(s for s in signature_of(phi) if s != "A"))
    inst = GeneratedInstance(phi, new_tau, base.distinguished, "fo2-sig", parts)
    inst.replaced = tuple(replaced)
    return inst


GENERATORS = {"gf-bounded": gen_gf_bounded, "gf-general": gen_gf_general, "fo2": gen_fo2,
              "fo2-sig": gen_fo2_sigvariant}


def generate(variant: str, M: AtmSpec, w: Sequence[str] | None = None, n: int | None = None) -> GeneratedInstance:
    if variant not in GENERATORS:
        raise ValueError(f"unknown variant {variant!r}; choose from {', '.join(VARIANTS)}")
    return GENERATORS[variant](M, w, n)


def strict_guards(f: Formula) -> Formula:
    """Pull the guard atom out of guard conjunctions.

    The generators write A v (G & C -> D) and E v (G & C & D); the strict
    shapes A v (G -> (C -> D)) and E v (G & (C & D)) are equivalent.
    """
    from .syntax import And, find_guard

    if isinstance(f, (Exists, Forall)):
        body = f.body
        if isinstance(f, Forall) and isinstance(body, Implies) and isinstance(body.left, And):
            g = find_guard(f.vars, body, universal=True)
            if g is not None:
                rest = [c for c in body.left.args if c is not g]
                return Forall(f.vars, Implies(g, Implies(conj(*rest), strict_guards(body.right))))
        if isinstance(f, Exists) and isinstance(body, And):
            g = find_guard(f.vars, body)
            if g is not None:
                rest = [strict_guards(c) for c in body.args if c is not g]
                return Exists(f.vars, And((g, conj(*rest))))
        return type(f)(f.vars, strict_guards(body))
    if isinstance(f, Not):
        return Not(strict_guards(f.sub))
    if isinstance(f, (Implies, Iff)):
        return type(f)(strict_guards(f.left), strict_guards(f.right))
    if isinstance(f, (Atom, Eq)) or not hasattr(f, "args"):
        return f
    return type(f)(tuple(strict_guards(c) for c in f.args))


def instance_size(inst: GeneratedInstance) -> int:
    return size(inst.phi)
