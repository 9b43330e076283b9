import random
import time
from importlib import resources

import pytest

from gfinterp.hardness import (VARIANTS, AtmSpec, generate, instance_size, parse_atm, strict_guards)
from gfinterp.semantics import Evaluator
from gfinterp.syntax import check_fragment, parse, signature_of, to_text
from helpers import random_structure


@pytest.fixture(scope="module")
def machine():
    return parse_atm(resources.files("gfinterp").joinpath("data/atm2.txt").read_text())


def test_parse_atm(machine):
    assert machine.start == "q0" and machine.blank == "_"
    assert machine.exists_states == ("q1",) and machine.forall_states == ("q0",)
    assert len(machine.delta[("q0", "a")]) == 2


def test_parse_atm_rejects_bad_machines():
    base = "forall: q0\nexists: q1\ninput_alphabet: a\ntape_alphabet: a _\nstart: q0\n"
    with pytest.raises(ValueError):
        parse_atm(base + "delta: (q0,a)->(q1,a,R)\n")              # one successor
    with pytest.raises(ValueError):
        parse_atm(base + "delta: (q0,a)->(q0,a,R)|(q1,a,L)\n")     # no alternation
    with pytest.raises(ValueError):
        parse_atm(base.replace("start: q0", "start: q1"))
    with pytest.raises(ValueError):
        parse_atm(base + "colour: red\n")


def expected_tau(M: AtmSpec) -> set:
    tok = {"a": "a", "_": "blank"}
    cells = {f"A_{tok[a]}" for a in M.tape_alphabet}
    cells |= {f"A_{q}_{tok[a]}" for q in M.states for a in M.tape_alphabet}
    return {"R", "S", "X", "Z", "Ball", "Bex1", "Bex2"} | cells


@pytest.mark.parametrize("variant", VARIANTS)
@pytest.mark.parametrize("n", [1, 2])
def test_instances_parse_and_pass_fragment(machine, variant, n):
    inst = generate(variant, machine, n=n)
    frag = "FO2" if variant.startswith("fo2") else "GF"
    assert check_fragment(inst.phi, frag).ok
    assert parse(to_text(inst.phi)) == inst.phi
    sig = signature_of(inst.phi)
    if variant == "fo2-sig":
        assert set(inst.tau) == set(sig) - {"A"}
        assert sig["N"] == 2 and len(inst.replaced) == sum(1 for s in sig if s.startswith("R_"))
    else:
        assert set(inst.tau) == expected_tau(machine) and set(inst.tau) <= set(sig)
    if variant == "gf-general":
        assert sig["E"] == 4 * n + 4 and sig["R"] == 4 and sig["S"] == 4
        assert all(sig[t] == 2 for t in inst.tau if t not in ("R", "S"))


def test_fo2_shares_all_but_the_loop(machine):
    gf, fo = generate("gf-bounded", machine, n=1), generate("fo2", machine, n=1)
    assert gf.conjuncts[1:] == fo.conjuncts[1:]
    y_users = [fam for fam, f in fo.conjuncts if "Y" in signature_of(f)]
    assert y_users == ["loop"]


def test_size_grows_with_n(machine):
    for variant in VARIANTS:
        sizes = [instance_size(generate(variant, machine, n=n)) for n in (1, 2, 3)]
        assert sizes == sorted(sizes) and sizes[0] < sizes[2]


def test_generation_is_fast(machine):
    t = time.perf_counter()
    for variant in VARIANTS:
        for n in (1, 2):
            generate(variant, machine, n=n)
    assert time.perf_counter() - t < 5


def test_halting_machine_smoke():
    M = parse_atm("forall: q0\nexists: q1\ninput_alphabet: a\ntape_alphabet: a _\nstart: q0\n")
    inst = generate("gf-bounded", M, n=1)
    halts = [to_text(f) for fam, f in inst.conjuncts if fam == "halt"]
    assert "A x . ~A_q0_a(x)" in halts and len(halts) == 4


def test_strict_guard_rewriting_is_equivalent(machine):
    rng = random.Random(7)
    inst = generate("gf-bounded", machine, n=1)
    assert any(strict_guards(f) != f for _, f in inst.conjuncts)
    for fam, f in inst.conjuncts:
        g = strict_guards(f)
        assert check_fragment(g, "GF").ok
        sig = dict(signature_of(f))
        for size in (1, 2, 3):
            for _ in range(3):
                s = random_structure(rng, sig, size, density=0.5)
                assert Evaluator(s)(f, {}) == Evaluator(s)(g, {})
