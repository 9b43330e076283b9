"""Guarded interpolation can fail: a triangle and a hexagon that the guarded fragment cannot tell apart."""
from gfinterp.bisim import gf_bisimilar, verify_certificate
from gfinterp.instances import odd_cycle_models, odd_cycle_pair
from gfinterp.interp import interpolant_exists
from gfinterp.semantics import PointedStructure, SearchBudget, check_entailment_bounded, to_structure_text
from gfinterp.syntax import neg, to_text

phi, psi = odd_cycle_pair()
print("phi =", to_text(phi))   # x sits on a guarded R-triangle
print("psi =", to_text(psi))   # x is in a properly two-coloured R-graph

# phi |= not psi: an odd cycle has no two-colouring
print("entailment up to size 6:", check_entailment_bounded(phi, neg(psi), SearchBudget(6)).status)

tri, hexagon = odd_cycle_models()
A, B = PointedStructure(tri, ("a",)), PointedStructure(hexagon, ("b",))
cert = gf_bisimilar(A, B, {"R"})
print("triangle ~ hexagon over {R}:", bool(cert), verify_certificate(cert, A, B, {"R"}))

v = interpolant_exists(phi, neg(psi), "GF")
print("interpolant over", v.tau, "->", v.outcome)
print("left model:\n" + to_structure_text(v.certificate.left.structure, v.certificate.left.point))
print("right model:\n" + to_structure_text(v.certificate.right.structure, v.certificate.right.point))
print("certificate re-verified:", v.certificate.verify(phi, psi, v.tau, v.xs))
