import json

import pytest

from gfinterp.bisim import fo2_bisimilar
from gfinterp.instances import even_cycle_witnesses, odd_cycle_pair, triangle_definability
from gfinterp.interp import (JointCertificate, def_to_interp, explicit_definable, implicitly_definable_bounded,
                             interpolant_exists, shared_signature)
from gfinterp.semantics import SearchBudget, check_entailment_bounded
from gfinterp.syntax import neg, parse, signature_of

PHI, PSI = odd_cycle_pair()


def test_shared_signature():
    assert shared_signature(PHI, PSI) == ("R",)
    assert shared_signature(parse("R(x,x)"), parse("E y . R(x,y)")) == ("R",)


def test_interpolant_found_up_to_budget():
    v = interpolant_exists(parse("(A(x) & B(x))"), parse("(A(x) | C(x))"), "GF", SearchBudget(3), 3)
    assert v.outcome == "EXISTS" and v.interpolant == parse("A(x)")
    assert v.qualification == "up-to-budget"
    assert [t[1] for t in v.transcripts] == ["HOLDS_UP_TO_BUDGET"] * 2


def test_interpolant_exact_when_universe_is_complete():
    v = interpolant_exists(parse("A(x)"), parse("A(x)"), "GF", SearchBudget(3), 3)
    assert v.outcome == "EXISTS" and v.qualification == "exact"


def test_odd_cycle_has_no_interpolant():
    v = interpolant_exists(PHI, neg(PSI), "GF", SearchBudget(4), 3)
    assert v.outcome == "NOT_EXISTS"
    cert = v.certificate
    assert cert.verify(PHI, PSI, ("R",), ("x",))
    again = JointCertificate.from_json(json.loads(json.dumps(cert.to_json())))
    assert again.verify(PHI, PSI, ("R",), ("x",))
    data = v.to_json()
    assert data["outcome"] == "NOT_EXISTS" and data["certificate"]["logic"] == "GF"


def test_input_validation():
    with pytest.raises(ValueError):
        interpolant_exists(parse("E y . (A(x) & A(y))"), parse("A(x)"), "GF")
    with pytest.raises(ValueError):
        interpolant_exists(parse("A(x)"), parse("A(y)"), "GF")
    with pytest.raises(ValueError):
        interpolant_exists(parse("A(x)"), parse("A(x)"), "FO3")
    with pytest.raises(ValueError):
        explicit_definable(parse("A(x)"), parse("A(x)"), ["A"])


def test_def_to_interp_primes_hidden_symbols():
    phi, theta, tau = triangle_definability()
    left, right = def_to_interp(phi, theta, tau)
    assert set(signature_of(left)) & set(signature_of(right)) == {"R"}


def test_triangle_not_explicitly_definable():
    phi, theta, tau = triangle_definability()
    v = explicit_definable(phi, theta, tau, "FO2", SearchBudget(3), 2, witnesses=[even_cycle_witnesses(2)])
    assert v.outcome == "NOT_EXISTS"
    c = v.certificate
    assert fo2_bisimilar(c.left, c.right, tau)
    assert implicitly_definable_bounded(phi, theta, tau, SearchBudget(4)).status == "HOLDS_UP_TO_BUDGET"


def test_unary_copy_is_definable():
    phi = parse("A x . (x=x -> (B(x) <-> A(x)))")
    assert implicitly_definable_bounded(phi, parse("B(x)"), ["A"], SearchBudget(3)).status == "HOLDS_UP_TO_BUDGET"
    v = explicit_definable(phi, parse("B(x)"), ["A"], "GF", SearchBudget(3), 3)
    assert v.outcome == "EXISTS"
    assert check_entailment_bounded(phi, parse("(B(x) <-> A(x))"), SearchBudget(3), ("x",)).holds
    assert v.interpolant == parse("A(x)")


def test_free_symbol_is_not_implicitly_definable():
    r = implicitly_definable_bounded(parse("A x . (x=x -> A(x))"), parse("B(x)"), ["A"], SearchBudget(2))
    assert r.status == "COUNTERMODEL"
