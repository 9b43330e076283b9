"""Generate the reduction instances from a small alternating machine and report their shape."""
from importlib import resources

from gfinterp.hardness import VARIANTS, generate, instance_size, parse_atm
from gfinterp.syntax import check_fragment, signature_of

machine = parse_atm(resources.files("gfinterp").joinpath("data/atm2.txt").read_text())
for variant in VARIANTS:
    for n in (1, 2):
        inst = generate(variant, machine, n=n)
        logic = "FO2" if variant.startswith("fo2") else "GF"
        sig = signature_of(inst.phi)
        print(f"{variant:10s} n={n} size={instance_size(inst):6d} {logic}:{check_fragment(inst.phi, logic).ok}"
              f" symbols={len(sig)} max arity={max(sig.values())}")
