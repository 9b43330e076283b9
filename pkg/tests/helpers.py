"""Random formulas and structures for property tests."""
from __future__ import annotations

import random

from gfinterp.semantics import Structure
from gfinterp.syntax import And, Atom, Const, Eq, Exists, Forall, Implies, Not, Or


def random_structure(rng: random.Random, sig: dict, size: int, density: float = 0.4) -> Structure:
    dom = list(range(size))
    rels = {}
    for name, ar in sig.items():
        tuples = []
        for idx in range(size ** ar):
            t = []
            for _ in range(ar):
                t.append(idx % size)
                idx //= size
            if rng.random() < density:
                tuples.append(tuple(t))
        rels[name] = tuples
    return Structure(dom, rels, sig)


def random_gf(rng: random.Random, sig: dict, free: list[str], depth: int, fresh=None):
    """A guarded formula whose free variables are among free."""
    fresh = fresh if fresh is not None else iter(f"v{i}" for i in range(10 ** 6))
    names = sorted(sig)
    leaf = depth <= 0 or rng.random() < 0.3
    if leaf:
        choices = [n for n in names if sig[n] == 0 or free]
        if free and rng.random() < 0.15:
            return Eq(rng.choice(free), rng.choice(free))
        if not choices:
            return Const(rng.random() < 0.5)
        n = rng.choice(choices)
        return Atom(n, tuple(rng.choice(free) for _ in range(sig[n])))
    k = rng.randrange(6)
    if k == 0:
        return Not(random_gf(rng, sig, free, depth - 1, fresh))
    if k in (1, 2):
        cls = And if k == 1 else Or
        return cls((random_gf(rng, sig, free, depth - 1, fresh), random_gf(rng, sig, free, depth - 1, fresh)))
    # guarded quantifier
    rels = [n for n in names if sig[n] >= 1]
    new = [next(fresh) for _ in range(rng.randint(1, 2))]
    if not rels or rng.random() < 0.2:
        y = new[0]
        guard, gv = Eq(y, y), [y]
        new = [y]
    else:
        n = rng.choice(rels)
        ar = sig[n]
        new = new[:ar]
        pool = free + new
        args = [rng.choice(pool) for _ in range(ar)]
        for i, y in enumerate(new):
            if y not in args:
                args[rng.randrange(ar)] = y
        new = [y for y in new if y in args]
        if not new:
            args[0] = y = next(fresh)
            new = [y]
        guard, gv = Atom(n, tuple(args)), sorted(set(args))
    body = random_gf(rng, sig, gv, depth - 1, fresh)
    if rng.random() < 0.5:
        return Exists(tuple(new), And((guard, body)))
    return Forall(tuple(new), Implies(guard, body))


def random_fo2(rng: random.Random, sig: dict, depth: int, free=("x",)):
    """A formula over the variables x and y, free variables among free."""
    names = sorted(sig)
    if depth <= 0 or rng.random() < 0.25:
        if len(free) == 2 and rng.random() < 0.15:
            return Eq(free[0], free[1])
        n = rng.choice(names)
        if not free:
            return Const(rng.random() < 0.5)
        return Atom(n, tuple(rng.choice(free) for _ in range(sig[n])))
    k = rng.randrange(5)
    if k == 0:
        return Not(random_fo2(rng, sig, depth - 1, free))
    if k in (1, 2):
        cls = And if k == 1 else Or
        return cls((random_fo2(rng, sig, depth - 1, free), random_fo2(rng, sig, depth - 1, free)))
    others = [v for v in ("x", "y") if v not in free]
    v = others[0] if others and rng.random() < 0.8 else rng.choice(("x", "y"))
    body_free = tuple(sorted(set(free) | {v}))
    q = Exists if k == 3 else Forall
    return q((v,), random_fo2(rng, sig, depth - 1, body_free))
