import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gfinterp.bisim import gf_bisimilar
from gfinterp.gfmosaic import (Mosaic, certificate_from_json, certificate_json, compatible,
                               decide_joint_consistency, failing_members, is_bisim_saturated, is_mosaic,
                               is_restriction_closed, is_saturated_set, is_tau_uniform, read_off, unfold,
                               verify_gf_certificate)
from gfinterp.instances import odd_cycle_models, odd_cycle_mosaic, odd_cycle_pair
from gfinterp.semantics import PointedStructure, SearchBudget
from gfinterp.syntax import neg, parse
from gfinterp.types import Closure, build_universe
from helpers import random_gf, random_structure

PHI, PSI = odd_cycle_pair()
TRI, HEX = odd_cycle_models()


@pytest.fixture(scope="module")
def hand_mosaic():
    return odd_cycle_mosaic()


@pytest.fixture(scope="module")
def odd_verdict():
    c = Closure(PHI, neg(PSI))
    u = build_universe(c, {"R"}, SearchBudget(1), seeds=[TRI, HEX])
    return c, decide_joint_consistency(PHI, neg(PSI), {"R"}, u)


def test_hand_mosaic_conditions(hand_mosaic):
    c, M, top = hand_mosaic
    assert is_tau_uniform(M, c, {"R"}) and is_restriction_closed(M) and is_bisim_saturated(M, c, {"R"})
    assert is_saturated_set([M], c, {"R"})
    # G is not shared, so the triangle's guard has no partner under a larger tau
    assert not is_tau_uniform(M, c, {"R", "G"})


def test_hand_mosaic_breaks_without_pieces(hand_mosaic):
    c, M, top = hand_mosaic
    pair = top.restrict(["x1", "x2"])
    assert not is_bisim_saturated(Mosaic(t for t in M if t != pair), c, {"R"})
    single = top.restrict(["x1"])
    assert not is_restriction_closed(Mosaic(t for t in M if t != single))


def test_compatible_is_symmetric(hand_mosaic):
    c, M, _ = hand_mosaic
    subs = [M.sub(X) for X in (["x1", "x2"], ["x2", "x3"], ["x1"], [])]
    for p in subs:
        for q in subs:
            assert compatible(p, q, c, {"R"}) == compatible(q, p, c, {"R"})
        assert compatible(p, p, c, {"R"})


def test_read_off_triangle_hexagon():
    c = Closure(PHI, neg(PSI))
    ms, psi, t1, t2 = read_off(PointedStructure(TRI, ("a",)), PointedStructure(HEX, ("b",)), {"R"}, c)
    assert ms.saturated and t1 in psi and t2 in psi
    assert all(is_mosaic(phi, c, {"R"}) for phi in ms)
    with pytest.raises(ValueError):
        read_off(PointedStructure(TRI, ("a",)), PointedStructure(HEX, ("b",)), {"R", "G"}, c)


def test_decide_odd_cycle_consistent(odd_verdict):
    c, v = odd_verdict
    assert v.outcome == "CONSISTENT"
    assert verify_gf_certificate(v.certificate)
    again = certificate_from_json(json.loads(certificate_json(v.certificate)), c)
    assert verify_gf_certificate(again)


def test_tampered_certificate_rejected(odd_verdict):
    c, v = odd_verdict
    data = json.loads(certificate_json(v.certificate))
    psi = data["psi"]
    empty = [i for i in data["mosaics"][psi] if not data["types"][i]["vars"]]
    data["mosaics"][psi] = [i for i in data["mosaics"][psi] if i not in empty]
    assert not verify_gf_certificate(certificate_from_json(data, c))
    data = json.loads(certificate_json(v.certificate))
    tid, args = c.phi_inst[0]
    wrong = [i for i, t in enumerate(data["types"])
             if t["vars"] == ["x1"] and [tid, list(args)] not in t["members"]]
    data["t1"] = wrong[0]
    assert not verify_gf_certificate(certificate_from_json(data, c))
    data = json.loads(certificate_json(v.certificate))
    data["tau"] = ["G", "R"]
    assert not verify_gf_certificate(certificate_from_json(data, c), tau={"R"})
    with pytest.raises(ValueError):
        certificate_from_json(data, Closure(parse("A(x)")))


def test_decide_exact_inconsistent():
    c = Closure(parse("A(x)"), parse("~A(x)"))
    u = build_universe(c, {"A"}, SearchBudget(2))
    assert u.exact
    assert decide_joint_consistency(parse("A(x)"), parse("~A(x)"), {"A"}, u).outcome == "INCONSISTENT"
    # without A in tau the two points are indistinguishable
    v = decide_joint_consistency(parse("A(x)"), parse("~A(x)"), (), u)
    assert v.outcome == "CONSISTENT" and verify_gf_certificate(v.certificate)


def test_unfold_depth_one(odd_verdict):
    c, v = odd_verdict
    cert = v.certificate
    u = unfold(cert.mosaics, cert.psi, cert.t1, cert.t2, 1, c, cert.tau,
               realizers=cert.realizers, structures=cert.structures)
    assert gf_bisimilar(*u.structures, cert.tau)
    for ps, t in zip(u.structures, (cert.t1, cert.t2)):
        assert failing_members(c, ps, t, 1) == []
    with pytest.raises(ValueError):
        unfold(cert.mosaics, cert.psi, cert.t1, cert.t2, 0, c, cert.tau)


SIGS = [{"A": 1, "R": 2}, {"A": 1, "B": 1}, {"R": 2}]


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10 ** 6), st.sampled_from(SIGS))
def test_read_off_on_random_bisimilar_points(seed, sig):
    rng = random.Random(seed)
    tau = sorted(sig)
    c = Closure(random_gf(rng, sig, ["x"], 2))
    A = random_structure(rng, sig, rng.randint(1, 3))
    B = random_structure(rng, sig, rng.randint(1, 3))
    for a in A.domain:
        for b in B.domain:
            pa, pb = PointedStructure(A, (a,)), PointedStructure(B, (b,))
            if gf_bisimilar(pa, pb, tau):
                ms, psi, t1, t2 = read_off(pa, pb, tau, c)
                assert ms.saturated and t1 in psi and t2 in psi
                return
