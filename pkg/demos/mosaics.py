"""Mosaics: read off from bisimilar models, checked for saturation, unfolded back into models."""
from gfinterp.gfmosaic import (failing_members, is_bisim_saturated, is_restriction_closed, is_saturated_set,
                               is_tau_uniform, read_off, unfold)
from gfinterp.instances import odd_cycle_models, odd_cycle_mosaic, odd_cycle_pair
from gfinterp.semantics import PointedStructure
from gfinterp.syntax import neg
from gfinterp.types import Closure

c, M, top = odd_cycle_mosaic()
print("hand mosaic:", len(M.types), "types")
print("  uniform", bool(is_tau_uniform(M, c, {"R"})), "closed", bool(is_restriction_closed(M)),
      "saturated", bool(is_bisim_saturated(M, c, {"R"})))
print("  saturated set:", bool(is_saturated_set([M], c, {"R"})))

for d in (1, 2, 3):
    u = unfold([M], M, top, top, d, c, {"R"})
    left, right = u.structures
    print(f"depth {d}: {len(left.structure)} elements, failures", failing_members(c, left, top, d))

# the same construction starting from the triangle and the hexagon
phi, psi = odd_cycle_pair()
tri, hexagon = odd_cycle_models()
c2 = Closure(phi, neg(psi), ("x",))
ms, psi_m, t1, t2 = read_off(PointedStructure(tri, ("a",)), PointedStructure(hexagon, ("b",)), {"R"}, c2)
print("read off:", len(ms.mosaics), "mosaics, saturated", ms.saturated)
