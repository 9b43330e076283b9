"""Named problem instances used by the tests, demos and command line."""
from __future__ import annotations

from .semantics import PointedStructure, Structure, disjoint_union
from .syntax import Eq, Formula, Iff, Implies, Not, atom, conj, disj, exists, forall, parse


def odd_cycle_pair() -> tuple[Formula, Formula]:
    """phi(x): x starts a G-marked R-triangle; psi(x): A(x) and R properly 2-colours A.

    phi entails not-psi, yet no guarded formula over {R} separates them.
    """
    phi = parse("E y z . (G(x,y,z) & R(x,y) & R(y,z) & R(z,x))")
    psi = parse("(A(x) & A y z . (R(y,z) -> (A(y) <-> ~A(z))))")
    return phi, psi


def odd_cycle_models() -> tuple[Structure, Structure]:
    """A G-marked R-triangle a,c,e and an R-hexagon whose A-elements alternate.

    The triangle satisfies phi at a, the hexagon satisfies psi at b, and the
    two are guarded {R}-bisimilar at those points.
    """
    A = Structure("ace", {"R": [("a", "c"), ("c", "e"), ("e", "a")], "G": [("a", "c", "e")]})
    hexagon = ["b", "d", "h1", "h2", "h3", "g"]
    B = Structure(hexagon, {"R": [(hexagon[i], hexagon[(i + 1) % 6]) for i in range(6)],
                            "A": [("b",), ("h1",), ("h3",)]})
    return A, B


def odd_cycle_mosaic():
    """A hand-built mosaic over the odd-cycle pair's closure.

    It holds the type of the triangle a,c,e, the types of the hexagon edges
    g,b and b,d placed on each pair of the triangle's variables, and every
    restriction of these.  Returns (closure, mosaic, triangle type).
    """
    import itertools

    from .gfmosaic import Mosaic
    from .types import Closure, TypeComputer

    phi, psi = odd_cycle_pair()
    c = Closure(phi, psi)
    A, B = odd_cycle_models()
    ta, tb = TypeComputer(c, A), TypeComputer(c, B)
    x1, x2, x3 = c.pool[:3]
    top = ta.tp((x1, x2, x3), "ace")
    types = [top] + [tb.tp(xs, edge) for xs in ((x1, x2), (x2, x3), (x3, x1))
                     for edge in (("g", "b"), ("b", "d"))]
    closed = set()
    for t in types:
        vs = sorted(t.vars)
        for r in range(len(vs) + 1):
            for X in itertools.combinations(vs, r):
                closed.add(t.restrict(X))
    return c, Mosaic(closed), top


def triangle(labels: dict | None = None) -> Structure:
    rels = {"R": [(0, 1), (1, 2), (2, 0)]}
    for name, elems in (labels or {}).items():
        rels[name] = [(a,) for a in elems]
    return Structure(range(3), rels)


def cycle(n: int, labels: dict | None = None) -> Structure:
    rels = {"R": [(i, (i + 1) % n) for i in range(n)]}
    for name, elems in (labels or {}).items():
        rels[name] = [(a,) for a in elems]
    return Structure(range(n), rels)


def _path(i: int, forward: bool, v: str = "x") -> Formula:
    """An R-path of length i from (forward) or to v ending in a Y element, using x and y only."""
    if i == 0:
        return atom("Y", v)
    o = "y" if v == "x" else "x"
    step = atom("R", v, o) if forward else atom("R", o, v)
    return exists(o, conj(step, _path(i - 1, forward, o)))


def triangle_definability() -> tuple[Formula, Formula, tuple[str, ...]]:
    """(phi, Z(x), {R}): Z marks the R-triangle through the unique Y element.

    Z is implicitly but not explicitly definable from R in two-variable logic.
    """
    unique_y = forall(("x", "y"), Implies(conj(atom("Y", "x"), atom("Y", "y")), Eq("x", "y")))
    on_triangle = forall("x", Implies(atom("Z", "x"),
                                      disj(*[conj(_path(i, True), _path(3 - i, False)) for i in range(4)])))
    outside = forall(("x", "y"), Implies(conj(atom("R", "x", "y"), Not(atom("Z", "x"))), atom("I", "x")))
    spread = forall(("x", "y"), Implies(atom("R", "x", "y"), Iff(atom("I", "x"), atom("I", "y"))))
    colour = forall(("x", "y"), Implies(atom("R", "x", "y"),
                                        Implies(atom("I", "x"), Iff(atom("A", "x"), Not(atom("A", "y"))))))
    phi = conj(unique_y, on_triangle, outside, spread, colour)
    return phi, atom("Z", "x"), ("R",)


def even_cycle_witnesses(k: int) -> tuple[PointedStructure, PointedStructure]:
    """Finite models for the triangle definability instance built from a 2k-cycle.

    Right: the 2k-cycle with I everywhere and A on even positions, pointed at 0.
    Left: that cycle beside a Z-triangle with Y at the distinguished corner.
    """
    n = 2 * k
    right = cycle(n, {"I": range(n), "A": range(0, n, 2)})
    tri = triangle({"Z": range(3), "Y": [0]})
    left, maps = disjoint_union(tri, right, tags=("t", "c"))
    sig = {"R": 2, "A": 1, "I": 1, "Y": 1, "Z": 1}
    return (PointedStructure(left.with_signature(sig), (maps[0][0],)),
            PointedStructure(right.with_signature(sig), (0,)))
