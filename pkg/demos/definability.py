"""Implicit but not explicit definability in two-variable logic."""
from gfinterp.instances import even_cycle_witnesses, triangle_definability
from gfinterp.interp import explicit_definable, implicitly_definable_bounded
from gfinterp.semantics import SearchBudget
from gfinterp.syntax import conj, neg, to_text

phi, theta, tau = triangle_definability()
print("phi   =", to_text(phi))
print("theta =", to_text(theta), " tau =", sorted(tau))

# any two expansions of the same tau-reduct agree on theta
print("implicit, up to size 8:", implicitly_definable_bounded(phi, theta, tau, SearchBudget(8)).status)

# but no two-variable formula over tau defines it: even-cycle models are two-variable bisimilar
v = explicit_definable(phi, theta, tau, "FO2", SearchBudget(3), 2, witnesses=[even_cycle_witnesses(2)])
print("explicit:", v.outcome)
c = v.certificate
print("sizes of the witness pair:", len(c.left.structure), len(c.right.structure))
print("re-verified:", c.verify(conj(phi, theta), conj(phi, neg(theta)), tau, v.xs))

# a definable case for contrast
from gfinterp.syntax import parse
v = explicit_definable(parse("A x . (P(x) <-> (Q(x) & S(x)))"), parse("P(x)"), {"Q", "S"}, "FO2")
print("P from Q, S:", v.outcome, to_text(v.interpolant))
