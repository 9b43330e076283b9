"""Formula trees, the text front-end, and purely syntactic operations.

Formulas are immutable and hashable.  Conjunction and disjunction are
n-ary; implication and biconditional are binary; quantifiers bind a
non-empty tuple of variables.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping

VAR_RE = re.compile(r"[a-z][a-zA-Z0-9_]*\Z")
NAME_RE = re.compile(r"[A-Z][a-zA-Z0-9_]*\Z")


class ParseError(ValueError):
    def __init__(self, message: str, line: int = 0, col: int = 0):
        super().__init__(f"{message} at line {line}, column {col}")
        self.message = message
        self.line = line
        self.col = col


class ArityError(ValueError):
    pass


class Signature(Mapping[str, int]):
    """Relation symbols with fixed arities.  Immutable and hashable."""

    def __init__(self, symbols: Mapping[str, int] | Iterable[tuple[str, int]] = ()):
        items = symbols.items() if isinstance(symbols, Mapping) else symbols
        table: dict[str, int] = {}
        for name, arity in items:
            if not NAME_RE.match(name):
                raise ValueError(f"bad relation name {name!r}")
            if arity < 0:
                raise ValueError(f"negative arity for {name}")
            if table.get(name, arity) != arity:
                raise ArityError(f"{name} used with arities {table[name]} and {arity}")
            table[name] = int(arity)
        self._symbols = dict(sorted(table.items()))
        self._hash = hash(tuple(self._symbols.items()))

    @classmethod
    def parse(cls, text: str) -> Signature:
        items = []
        for part in text.replace(";", ",").split(","):
            part = part.strip()
            if not part:
                continue
            name, _, arity = part.partition("/")
            if not arity:
                raise ValueError(f"missing arity in {part!r}")
            items.append((name.strip(), int(arity)))
        return cls(items)

    def __getitem__(self, name: str) -> int:
        return self._symbols[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._symbols)

    def __len__(self) -> int:
        return len(self._symbols)

    def __hash__(self) -> int:
        return self._hash

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Signature):
            return self._symbols == other._symbols
        if isinstance(other, Mapping):
            return self._symbols == dict(other)
        return NotImplemented

    def __or__(self, other: Mapping[str, int]) -> Signature:
        return Signature(list(self.items()) + list(other.items()))

    def __and__(self, other: Mapping[str, int]) -> Signature:
        out = []
        for name, arity in self.items():
            if name in other:
                if other[name] != arity:
                    raise ArityError(f"{name} has arity {arity} and {other[name]}")
                out.append((name, arity))
        return Signature(out)

    def __sub__(self, other: Iterable[str]) -> Signature:
        drop = set(other)
        return Signature([(n, a) for n, a in self.items() if n not in drop])

    def issubset(self, other: Mapping[str, int]) -> bool:
        return all(other.get(n) == a for n, a in self.items())

    def max_arity(self) -> int:
        return max(self._symbols.values(), default=0)

    def __repr__(self) -> str:
        return f"Signature({self})"

    def __str__(self) -> str:
        return ", ".join(f"{n}/{a}" for n, a in self.items())


# ---------------------------------------------------------------- formulas

class Formula:
    __slots__ = ()

    def __and__(self, other: Formula) -> Formula:
        return conj(self, other)

    def __or__(self, other: Formula) -> Formula:
        return disj(self, other)

    def __invert__(self) -> Formula:
        return Not(self)

    def __str__(self) -> str:
        return to_text(self)

    def children(self) -> tuple[Formula, ...]:
        return ()


def _hashed(cls):
    """Give a frozen dataclass a hash computed once at construction."""
    orig_init = cls.__init__

    def __init__(self, *args, **kwargs):
        orig_init(self, *args, **kwargs)
        object.__setattr__(self, "_h", hash((cls.__name__,) + self._key()))

    cls.__init__ = __init__
    cls.__hash__ = lambda self: self._h
    return cls


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class Const(Formula):
    value: bool
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return (self.value,)

    def __repr__(self):
        return f"Const({self.value})"


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class Atom(Formula):
    pred: str
    args: tuple[str, ...]
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return (self.pred, self.args)

    def __repr__(self):
        return f"Atom({self.pred!r}, {self.args!r})"


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class Eq(Formula):
    left: str
    right: str
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return (self.left, self.right)

    @property
    def args(self) -> tuple[str, str]:
        return (self.left, self.right)

    def __repr__(self):
        return f"Eq({self.left!r}, {self.right!r})"


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class Not(Formula):
    sub: Formula
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return (self.sub,)

    def children(self):
        return (self.sub,)

    def __repr__(self):
        return f"Not({self.sub!r})"


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class And(Formula):
    args: tuple[Formula, ...]
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return self.args

    def children(self):
        return self.args

    def __repr__(self):
        return f"And{self.args!r}"


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class Or(Formula):
    args: tuple[Formula, ...]
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return self.args

    def children(self):
        return self.args

    def __repr__(self):
        return f"Or{self.args!r}"


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"Implies({self.left!r}, {self.right!r})"


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class Iff(Formula):
    left: Formula
    right: Formula
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return (self.left, self.right)

    def children(self):
        return (self.left, self.right)

    def __repr__(self):
        return f"Iff({self.left!r}, {self.right!r})"


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class Exists(Formula):
    vars: tuple[str, ...]
    body: Formula
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return (self.vars, self.body)

    def children(self):
        return (self.body,)

    def __repr__(self):
        return f"Exists({self.vars!r}, {self.body!r})"


@_hashed
@dataclass(frozen=True, eq=True, repr=False)
class Forall(Formula):
    vars: tuple[str, ...]
    body: Formula
    _h: int = field(default=0, init=False, compare=False)

    def _key(self):
        return (self.vars, self.body)

    def children(self):
        return (self.body,)

    def __repr__(self):
        return f"Forall({self.vars!r}, {self.body!r})"


TRUE = Const(True)
FALSE = Const(False)


def conj(*parts: Formula) -> Formula:
    """Flattening conjunction; the empty conjunction is true."""
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, And):
            flat.extend(p.args)
        elif p != TRUE:
            flat.append(p)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def disj(*parts: Formula) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if isinstance(p, Or):
            flat.extend(p.args)
        elif p != FALSE:
            flat.append(p)
    if not flat:
        return FALSE
    return flat[0] if len(flat) == 1 else Or(tuple(flat))


def neg(f: Formula) -> Formula:
    """Single negation: strips an outer negation instead of stacking one."""
    if isinstance(f, Not):
        return f.sub
    if isinstance(f, Const):
        return Const(not f.value)
    return Not(f)


def exists(vs: Iterable[str] | str, body: Formula) -> Formula:
    vs = tuple(vs.split()) if isinstance(vs, str) else tuple(vs)
    return Exists(vs, body) if vs else body


def forall(vs: Iterable[str] | str, body: Formula) -> Formula:
    vs = tuple(vs.split()) if isinstance(vs, str) else tuple(vs)
    return Forall(vs, body) if vs else body


def atom(pred: str, *args: str) -> Atom:
    return Atom(pred, tuple(args))


# ---------------------------------------------------------------- parsing

_TOKEN_RE = re.compile(
    r"""(?P<ws>[ \t\r\n]+)
      | (?P<iff><->|↔)
      | (?P<imp>->|→)
      | (?P<punct>[()~&|=.,¬∧∨])
      | (?P<quant>[∃∀])
      | (?P<word>[A-Za-z][A-Za-z0-9_]*)
    """,
    re.VERBOSE,
)

_UNICODE = {"¬": "~", "∧": "&", "∨": "|", "↔": "<->", "→": "->", "∃": "E", "∀": "A"}


@dataclass
class _Tok:
    kind: str
    text: str
    line: int
    col: int


def _tokenize(text: str) -> list[_Tok]:
    toks: list[_Tok] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        val = m.group()
        col = pos - line_start + 1
        if kind == "ws":
            for i, ch in enumerate(val):
                if ch == "\n":
                    line += 1
                    line_start = pos + i + 1
        else:
            val = _UNICODE.get(val, val)
            if kind in ("iff", "imp", "punct"):
                kind = "op"
            elif kind == "quant":
                kind = "quant"
            toks.append(_Tok(kind, val, line, col))
        pos = m.end()
    toks.append(_Tok("eof", "", line, pos - line_start + 1))
    return toks


class _Parser:
    def __init__(self, text: str, signature: Mapping[str, int] | None):
        self.toks = _tokenize(text)
        self.i = 0
        self.declared = signature
        self.seen: dict[str, int] = {}

    def peek(self, k: int = 0) -> _Tok:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def next(self) -> _Tok:
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def fail(self, msg: str, tok: _Tok | None = None):
        tok = tok or self.peek()
        raise ParseError(msg, tok.line, tok.col)

    def expect(self, text: str) -> _Tok:
        tok = self.next()
        if tok.text != text or tok.kind not in ("op",):
            self.fail(f"expected {text!r} but found {tok.text or 'end of input'!r}", tok)
        return tok

    def var(self) -> str:
        tok = self.next()
        if tok.kind != "word" or not VAR_RE.match(tok.text):
            self.fail(f"expected a variable but found {tok.text or 'end of input'!r}", tok)
        return tok.text

    def formula(self) -> Formula:
        tok = self.peek()
        if tok.kind == "op" and tok.text == "~":
            self.next()
            return Not(self.formula())
        if tok.kind == "op" and tok.text == "(":
            return self.paren()
        if tok.kind == "quant" or (
            tok.kind == "word" and tok.text in ("E", "A")
            and self.peek(1).kind == "word" and VAR_RE.match(self.peek(1).text)
        ):
            self.next()
            vs = [self.var()]
            while True:
                nxt = self.peek()
                if nxt.kind == "op" and nxt.text == ",":
                    self.next()
                    vs.append(self.var())
                elif nxt.kind == "word" and VAR_RE.match(nxt.text):
                    vs.append(self.var())
                else:
                    break
            self.expect(".")
            body = self.formula()
            return (Exists if tok.text == "E" else Forall)(tuple(vs), body)
        if tok.kind == "word":
            if tok.text == "true":
                self.next()
                return TRUE
            if tok.text == "false":
                self.next()
                return FALSE
            if NAME_RE.match(tok.text):
                return self.atom()
            if VAR_RE.match(tok.text):
                left = self.var()
                self.expect("=")
                return Eq(left, self.var())
        self.fail(f"unexpected {tok.text or 'end of input'!r}", tok)

    def atom(self) -> Formula:
        tok = self.next()
        self.expect("(")
        args = [self.var()]
        while self.peek().text == ",":
            self.next()
            args.append(self.var())
        self.expect(")")
        name, arity = tok.text, len(args)
        if self.declared is not None and name in self.declared and self.declared[name] != arity:
            self.fail(f"{name} declared with arity {self.declared[name]} but used with {arity}", tok)
        if self.seen.setdefault(name, arity) != arity:
            self.fail(f"{name} used with arities {self.seen[name]} and {arity}", tok)
        return Atom(name, tuple(args))

    def paren(self) -> Formula:
        open_tok = self.expect("(")
        first = self.formula()
        tok = self.peek()
        if tok.kind == "op" and tok.text == ")":
            self.next()
            return first
        if not (tok.kind == "op" and tok.text in ("&", "|", "->", "<->")):
            self.fail(f"expected a connective or ')' but found {tok.text or 'end of input'!r}", tok)
        op = tok.text
        parts = [first]
        while self.peek().kind == "op" and self.peek().text == op:
            self.next()
            parts.append(self.formula())
        tok = self.peek()
        if tok.kind == "op" and tok.text in ("&", "|", "->", "<->"):
            self.fail(f"mixed connectives {op!r} and {tok.text!r} need parentheses", tok)
        if not (tok.kind == "op" and tok.text == ")"):
            self.fail(f"unclosed '(' opened at line {open_tok.line}, column {open_tok.col}", tok)
        self.next()
        if op == "&":
            return And(tuple(parts))
        if op == "|":
            return Or(tuple(parts))
        if len(parts) != 2:
            self.fail(f"{op!r} is binary; add parentheses", tok)
        return (Implies if op == "->" else Iff)(parts[0], parts[1])


def parse(text: str, signature: Mapping[str, int] | None = None) -> Formula:
    """Parse one formula.  Raises ParseError with a line and column."""
    p = _Parser(text, signature)
    f = p.formula()
    if p.peek().kind != "eof":
        p.fail(f"trailing input {p.peek().text!r}")
    return f


# ---------------------------------------------------------------- printing

def to_text(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f"{f.pred}({','.join(f.args)})"
    if isinstance(f, Eq):
        return f"{f.left}={f.right}"
    if isinstance(f, Not):
        return "~" + to_text(f.sub)
    if isinstance(f, And):
        return "(" + " & ".join(map(to_text, f.args)) + ")"
    if isinstance(f, Or):
        return "(" + " | ".join(map(to_text, f.args)) + ")"
    if isinstance(f, Implies):
        return f"({to_text(f.left)} -> {to_text(f.right)})"
    if isinstance(f, Iff):
        return f"({to_text(f.left)} <-> {to_text(f.right)})"
    if isinstance(f, (Exists, Forall)):
        q = "E" if isinstance(f, Exists) else "A"
        return f"{q} {' '.join(f.vars)} . {to_text(f.body)}"
    raise TypeError(f)


# ---------------------------------------------------------------- queries

def free_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, Const):
        return frozenset()
    if isinstance(f, (Atom, Eq)):
        return frozenset(f.args)
    if isinstance(f, (Exists, Forall)):
        return free_vars(f.body) - set(f.vars)
    out: frozenset[str] = frozenset()
    for c in f.children():
        out |= free_vars(c)
    return out


def all_vars(f: Formula) -> frozenset[str]:
    if isinstance(f, (Atom, Eq)):
        return frozenset(f.args)
    out = frozenset(f.vars) if isinstance(f, (Exists, Forall)) else frozenset()
    for c in f.children():
        out |= all_vars(c)
    return out


def subformulas(f: Formula) -> Iterator[Formula]:
    """Pre-order walk over all subformula occurrences."""
    stack = [f]
    while stack:
        g = stack.pop()
        yield g
        stack.extend(reversed(g.children()))


def signature_of(f: Formula) -> Signature:
    return Signature([(g.pred, len(g.args)) for g in subformulas(f) if isinstance(g, Atom)])


def size(f: Formula) -> int:
    return sum(1 for _ in subformulas(f))


def quantifier_rank(f: Formula) -> int:
    """Nesting depth of quantifier blocks."""
    if isinstance(f, (Exists, Forall)):
        return 1 + quantifier_rank(f.body)
    return max((quantifier_rank(c) for c in f.children()), default=0)


# ---------------------------------------------------------------- fragments

@dataclass(frozen=True)
class FragmentReport:
    fragment: str
    violations: tuple[tuple[str, str], ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return self.ok


def _merge_blocks(f: Formula) -> Formula:
    """Merge directly nested quantifiers of the same kind into one block."""
    if isinstance(f, (Exists, Forall)):
        vs, body = list(f.vars), f.body
        while type(body) is type(f):
            vs += [v for v in body.vars if v not in vs]
            body = body.body
        return type(f)(tuple(vs), body)
    return f


def find_guard(vs: tuple[str, ...], body: Formula, universal: bool = False) -> Formula | None:
    """The guard atom of a quantified body, or None when the body is unguarded.

    Existential bodies are an atom or a conjunction containing the guard;
    universal bodies are an implication from the guard or a negated guard.
    """
    need = set(vs) | free_vars(body)
    if universal:
        if isinstance(body, Implies):
            cands = list(body.left.args) if isinstance(body.left, And) else [body.left]
        elif isinstance(body, Not):
            cands = [body.sub]
        else:
            return None
    else:
        cands = list(body.args) if isinstance(body, And) else [body]
    for c in cands:
        if isinstance(c, (Atom, Eq)) and need <= set(c.args):
            return c
    return None


def check_fragment(f: Formula, which: str) -> FragmentReport:
    which = which.upper().replace("²", "2")
    violations: list[tuple[str, str]] = []
    if which in ("FO2",):
        extra = sorted(all_vars(f) - {"x", "y"})
        if extra:
            violations.append(("/", f"variables other than x,y: {', '.join(extra)}"))
        return FragmentReport("FO2", tuple(violations))
    if which != "GF":
        raise ValueError(f"unknown fragment {which!r}")

    def walk(g: Formula, path: str):
        g = _merge_blocks(g)
        if isinstance(g, (Exists, Forall)):
            guard = find_guard(g.vars, g.body, universal=isinstance(g, Forall))
            if guard is None:
                violations.append((path, f"unguarded quantifier over {' '.join(g.vars)}: {to_text(g)}"))
            walk(g.body, path + "/0")
            return
        for i, c in enumerate(g.children()):
            walk(c, f"{path}/{i}")

    walk(f, "")
    return FragmentReport("GF", tuple(violations))


def fragment_of(f: Formula) -> str:
    if check_fragment(f, "GF").ok:
        return "GF"
    if check_fragment(f, "FO2").ok:
        return "FO2"
    return "FO"


# ---------------------------------------------------------------- rewriting

def fresh_var(base: str, avoid: set[str] | frozenset[str]) -> str:
    stem = base.rstrip("0123456789_") or "v"
    i = 1
    while f"{stem}_{i}" in avoid:
        i += 1
    return f"{stem}_{i}"


def substitute(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Capture-avoiding substitution of free variables.

    The map must be defined on every free variable; it may identify variables.
    """
    missing = free_vars(f) - set(mapping)
    if missing:
        raise KeyError(f"substitution undefined on {sorted(missing)}")
    return _subst(f, dict(mapping))


def _subst(f: Formula, m: dict[str, str]) -> Formula:
    if isinstance(f, Const):
        return f
    if isinstance(f, Atom):
        return Atom(f.pred, tuple(m.get(a, a) for a in f.args))
    if isinstance(f, Eq):
        return Eq(m.get(f.left, f.left), m.get(f.right, f.right))
    if isinstance(f, Not):
        return Not(_subst(f.sub, m))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(_subst(c, m) for c in f.args))
    if isinstance(f, (Implies, Iff)):
        return type(f)(_subst(f.left, m), _subst(f.right, m))
    if isinstance(f, (Exists, Forall)):
        inner = {k: v for k, v in m.items() if k not in f.vars}
        body_free = free_vars(f.body) - set(f.vars)
        targets = {inner.get(v, v) for v in body_free}
        new_vars = []
        avoid = set(targets) | all_vars(f.body) | set(inner.values())
        for v in f.vars:
            if v in targets:
                w = fresh_var(v, avoid)
                avoid.add(w)
                inner[v] = w
                new_vars.append(w)
            else:
                new_vars.append(v)
        return type(f)(tuple(new_vars), _subst(f.body, inner))
    raise TypeError(f)


def rename_symbols(f: Formula, mapping: Mapping[str, str]) -> Formula:
    if isinstance(f, Atom):
        return Atom(mapping.get(f.pred, f.pred), f.args)
    if isinstance(f, (Const, Eq)):
        return f
    if isinstance(f, Not):
        return Not(rename_symbols(f.sub, mapping))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(rename_symbols(c, mapping) for c in f.args))
    if isinstance(f, (Implies, Iff)):
        return type(f)(rename_symbols(f.left, mapping), rename_symbols(f.right, mapping))
    return type(f)(f.vars, rename_symbols(f.body, mapping))


def priming_map(symbols: Iterable[str], tau: Iterable[str], avoid: Iterable[str] = ()) -> dict[str, str]:
    """Deterministic fresh names R -> R_p (R_p2, R_p3, ... on collision)."""
    symbols = sorted(set(symbols))
    tau = set(tau)
    taken = set(symbols) | tau | set(avoid)
    out = {}
    for name in symbols:
        if name in tau:
            continue
        cand, k = f"{name}_p", 1
        while cand in taken:
            k += 1
            cand = f"{name}_p{k}"
        taken.add(cand)
        out[name] = cand
    return out


def rename_non_tau(f: Formula, tau: Iterable[str], avoid: Iterable[str] = ()) -> Formula:
    """Replace every relation symbol outside tau by a fresh primed copy."""
    return rename_symbols(f, priming_map(signature_of(f), tau, avoid))


def normalize_quantifiers(f: Formula) -> Formula:
    """Rewrite every universal block as a negated existential block.

    A(ys).(g -> p) becomes ~E(ys).(g & ~p), keeping the guard in front.
    """
    if isinstance(f, (Const, Atom, Eq)):
        return f
    if isinstance(f, Not):
        return Not(normalize_quantifiers(f.sub))
    if isinstance(f, (And, Or)):
        return type(f)(tuple(normalize_quantifiers(c) for c in f.args))
    if isinstance(f, (Implies, Iff)):
        return type(f)(normalize_quantifiers(f.left), normalize_quantifiers(f.right))
    if isinstance(f, Exists):
        return Exists(f.vars, normalize_quantifiers(f.body))
    body = normalize_quantifiers(f.body)
    if isinstance(body, Implies):
        return Not(Exists(f.vars, conj(body.left, neg(body.right))))
    return Not(Exists(f.vars, neg(body)))


def core(f: Formula) -> Formula:
    """Equivalent formula over true/false, atoms, =, ~, n-ary & and E only.

    Double negations are removed and nested existential blocks merged.
    Guards of guarded quantifiers stay first in their conjunctions.
    """
    if isinstance(f, (Const, Atom, Eq)):
        return f
    if isinstance(f, Not):
        return neg(core(f.sub))
    if isinstance(f, And):
        return _core_and([core(c) for c in f.args])
    if isinstance(f, Or):
        return neg(_core_and([neg(core(c)) for c in f.args]))
    if isinstance(f, Implies):
        return neg(_core_and([core(f.left), neg(core(f.right))]))
    if isinstance(f, Iff):
        a, b = core(f.left), core(f.right)
        return _core_and([neg(_core_and([a, neg(b)])), neg(_core_and([b, neg(a)]))])
    if isinstance(f, Exists):
        return _core_exists(f.vars, core(f.body))
    body = f.body
    if isinstance(body, Implies):
        inner = _core_and([core(body.left), neg(core(body.right))])
    else:
        inner = neg(core(body))
    return neg(_core_exists(f.vars, inner))


def _core_and(parts: list[Formula]) -> Formula:
    flat: list[Formula] = []
    for p in parts:
        if p == FALSE:
            return FALSE
        if isinstance(p, And):
            flat.extend(p.args)
        elif p != TRUE:
            flat.append(p)
    if not flat:
        return TRUE
    return flat[0] if len(flat) == 1 else And(tuple(flat))


def _core_exists(vs: tuple[str, ...], body: Formula) -> Formula:
    vs = tuple(v for v in vs if v in free_vars(body))
    if not vs:
        return body
    if isinstance(body, Exists):
        return Exists(vs + tuple(v for v in body.vars if v not in vs), body.body)
    return Exists(vs, body)
