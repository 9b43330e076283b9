"""Interpolant existence and explicit definability.

Both problems reduce to joint consistency: phi and psi have no interpolant
over their shared signature exactly when phi and not-psi have models whose
distinguished tuples are bisimilar in the logic.  Two independent routes run
on every query: a search for such a model pair (plus the mosaic procedure in
GF), and a bounded enumeration of candidate interpolants.  Their verdicts are
cross-checked on every run.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from . import oracle
from .bisim import verify_certificate
from .oracle import enumerate_interpolants
from .semantics import (Evaluator, PointedStructure, SearchBudget, check_entailment_bounded,
                        count_structures, to_structure_text)
from .syntax import (Formula, Iff, Implies, check_fragment, conj, free_vars, neg, priming_map,
                     rename_symbols, signature_of, to_text)

__all__ = ["InterpVerdict", "JointCertificate", "interpolant_exists", "enumerate_interpolants",
           "explicit_definable", "def_to_interp", "implicitly_definable_bounded", "ImplicitResult"]


@dataclass
class JointCertificate:
    """Pointed models of the two formulas and a bisimulation between them."""
    left: PointedStructure
    right: PointedStructure
    bisimulation: object
    logic: str
    mosaic: object = None

    def verify(self, phi: Formula, chi: Formula, tau: Iterable[str], xs: Sequence[str]) -> bool:
        """phi at the left point, chi at the right point, and the bisimulation re-checked."""
        ok_l = Evaluator(self.left.structure)(phi, dict(zip(xs, self.left.point)))
        ok_r = Evaluator(self.right.structure)(chi, dict(zip(xs, self.right.point)))
        return ok_l and ok_r and verify_certificate(self.bisimulation, self.left, self.right, tau)

    def relabeled(self, tau: Iterable[str]) -> JointCertificate:
        """The same certificate over structures whose elements are plain strings e0, e1, ..."""
        from .bisim import fo2_bisimilar, gf_bisimilar

        def rn(ps: PointedStructure) -> PointedStructure:
            m = {a: f"e{i}" for i, a in enumerate(ps.structure.domain)}
            return PointedStructure(ps.structure.rename(m), tuple(m[a] for a in ps.point))

        left, right = rn(self.left), rn(self.right)
        cert = (gf_bisimilar if self.logic == "GF" else fo2_bisimilar)(left, right, tau)
        if not cert:
            raise AssertionError("relabelling broke the bisimulation")
        return JointCertificate(left, right, cert, self.logic, self.mosaic)

    @classmethod
    def from_json(cls, data: dict) -> JointCertificate:
        from .bisim import certificate_from_json
        from .semantics import parse_structure
        return cls(parse_structure(data["left"]), parse_structure(data["right"]),
                   certificate_from_json(data["bisimulation"]), data["logic"])

    def to_json(self) -> dict:
        out = {"logic": self.logic,
               "left": to_structure_text(self.left.structure, self.left.point),
               "right": to_structure_text(self.right.structure, self.right.point),
               "bisimulation": self.bisimulation.to_json()}
        if self.mosaic is not None:
            out["mosaic"] = self.mosaic.to_json()
        return out


@dataclass
class InterpVerdict:
    outcome: str                      # EXISTS | NOT_EXISTS | UNKNOWN
    logic: str
    tau: tuple[str, ...]
    xs: tuple[str, ...] = ()
    interpolant: Formula | None = None
    qualification: str | None = None  # exact | up-to-budget
    transcripts: list = field(default_factory=list)
    certificate: object = None      # JointCertificate, or a mosaic certificate alone
    stats: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"outcome": self.outcome, "logic": self.logic, "tau": list(self.tau), "xs": list(self.xs),
                "interpolant": None if self.interpolant is None else to_text(self.interpolant),
                "qualification": self.qualification,
                "transcripts": [list(t) for t in self.transcripts],
                "certificate": None if self.certificate is None else self.certificate.to_json(),
                "stats": self.stats}


def _logic(logic: str) -> str:
    logic = logic.upper().replace("²", "2")
    if logic not in ("GF", "FO2"):
        raise ValueError(f"unknown logic {logic!r}")
    return logic


def _require(logic: str, *fs: Formula) -> None:
    for f in fs:
        rep = check_fragment(f, logic)
        if not rep.ok:
            raise ValueError(f"not in {logic}: {rep.violations[0][1]}")


def _mosaic_route(phi, chi, tau, xs, budget, seeds, enum_limit):
    from .gfmosaic import decide_joint_consistency
    from .types import Closure, build_universe

    c = Closure(phi, chi, xs)
    seeds = [s.rename({a: i for i, a in enumerate(s.domain)}) for s in seeds]
    total = sum(count_structures(c.signature, k) for k in range(1, budget.max_size + 1))
    universe = build_universe(c, tau, budget, seeds, enumerate_sizes=total <= enum_limit)
    return decide_joint_consistency(phi, chi, tau, universe, budget, xs=xs)


def decide_joint(phi: Formula, chi: Formula, tau: Iterable[str], logic: str = "GF",
                 budget: SearchBudget = SearchBudget(4), size_cap: int = 4,
                 xs: Sequence[str] | None = None, witnesses: Sequence = (),
                 enumerate_up_to: int | None = None, mosaic: bool = True,
                 enum_limit: int = 5000) -> InterpVerdict:
    """Joint consistency of phi and chi over tau, reported as interpolant existence for phi, not-chi."""
    logic = _logic(logic)
    tau = tuple(sorted(set(tau)))
    xs = tuple(xs) if xs is not None else tuple(sorted(free_vars(phi) | free_vars(chi)))
    stats: dict = {"model_cap": budget.max_size, "interpolant_cap": size_cap}

    cert = mosaic_cert = None
    exact_inconsistent = False
    if logic == "GF":
        pair = oracle.search_model_pair(phi, chi, tau, "GF", budget, xs, witnesses,
                                        enumerate_up_to=enumerate_up_to)
        stats["pair_search"] = pair.stats | {"status": pair.status}
        if pair.found:
            cert = JointCertificate(pair.left, pair.right, pair.certificate, logic)
        if mosaic:
            seeds = [pair.left.structure, pair.right.structure] if pair.found else []
            seeds += [p.structure for w in witnesses for p in w]
            mv = _mosaic_route(phi, chi, tau, xs, budget, seeds, enum_limit)
            stats["mosaic"] = mv.stats | {"outcome": mv.outcome}
            if mv.outcome == "INCONSISTENT":
                exact_inconsistent = True
                if cert is not None:
                    raise AssertionError("mosaic route refutes a verified bisimilar model pair")
            elif mv.outcome == "CONSISTENT" and cert is not None:
                cert.mosaic = mv.certificate
            elif mv.outcome == "CONSISTENT":
                stats["mosaic_only"] = True
                mosaic_cert = mv.certificate
    else:
        from .fo2 import decide_fo2_joint_consistency

        fv = decide_fo2_joint_consistency(phi, chi, tau, budget, xs, witnesses, interpolant_cap=0,
                                          enumerate_up_to=enumerate_up_to)
        stats["pair_search"] = fv.stats.get("pair_search", {})
        stats["size_bounds_log2"] = fv.stats.get("size_bounds")
        if fv.outcome == "CONSISTENT":
            cert = JointCertificate(fv.pair[0], fv.pair[1], fv.certificate, logic)

    pos = [cert.left] if cert else []
    negs = [cert.right] if cert else []
    en = enumerate_interpolants(phi, neg(chi), tau, size_cap, budget, logic, xs, pos, negs)
    stats["enumeration"] = en.stats
    theta = en.formula
    consistent = cert is not None or stats.get("mosaic_only", False)
    if theta is not None and consistent:
        raise AssertionError(f"interpolant {to_text(theta)} found for a jointly consistent pair")
    if cert is not None:
        cert = cert.relabeled(tau)
    if cert is not None and not cert.verify(phi, chi, tau, xs):
        raise AssertionError("model-pair certificate failed re-verification")

    if consistent:
        return InterpVerdict("NOT_EXISTS", logic, tau, xs, certificate=cert or mosaic_cert, stats=stats)
    if theta is not None or exact_inconsistent:
        qual = "exact" if exact_inconsistent else "up-to-budget"
        return InterpVerdict("EXISTS", logic, tau, xs, theta, qual, en.transcripts, stats=stats)
    return InterpVerdict("UNKNOWN", logic, tau, xs, stats=stats)


def shared_signature(phi: Formula, psi: Formula) -> tuple[str, ...]:
    a, b = signature_of(phi), signature_of(psi)
    return tuple(sorted(n for n in a if n in b and a[n] == b[n]))


def interpolant_exists(phi: Formula, psi: Formula, logic: str = "GF",
                       budget: SearchBudget = SearchBudget(4), size_cap: int = 4,
                       xs: Sequence[str] | None = None, witnesses: Sequence = (),
                       enumerate_up_to: int | None = None, mosaic: bool = True) -> InterpVerdict:
    """Is there theta over the shared signature with phi |= theta |= psi?"""
    logic = _logic(logic)
    _require(logic, phi, psi)
    if xs is None and free_vars(phi) != free_vars(psi):
        raise ValueError("phi and psi must have the same free variables")
    tau = shared_signature(phi, psi)
    return decide_joint(phi, neg(psi), tau, logic, budget, size_cap, xs, witnesses,
                        enumerate_up_to, mosaic)


def explicit_definable(phi: Formula, theta: Formula, tau: Iterable[str], logic: str = "GF",
                       budget: SearchBudget = SearchBudget(4), size_cap: int = 4,
                       xs: Sequence[str] | None = None, witnesses: Sequence = (),
                       enumerate_up_to: int | None = None, mosaic: bool = True) -> InterpVerdict:
    """Is theta equivalent under phi to a formula over tau?  EXISTS carries the definition found."""
    logic = _logic(logic)
    if free_vars(phi):
        raise ValueError("phi must be a sentence")
    _require(logic, phi, theta)
    xs = tuple(xs) if xs is not None else tuple(sorted(free_vars(theta)))
    return decide_joint(conj(phi, theta), conj(phi, neg(theta)), tau, logic, budget, size_cap, xs,
                        witnesses, enumerate_up_to, mosaic)


def def_to_interp(phi: Formula, theta: Formula, tau: Iterable[str]) -> tuple[Formula, Formula]:
    """The pair (phi & theta, phi' -> theta') with every symbol outside tau primed on the right."""
    tau = set(tau)
    sig = signature_of(phi) | signature_of(theta)
    m = priming_map(sig, tau)
    return conj(phi, theta), Implies(rename_symbols(phi, m), rename_symbols(theta, m))


@dataclass
class ImplicitResult:
    status: str                    # HOLDS_UP_TO_BUDGET | COUNTERMODEL | UNKNOWN
    countermodel: PointedStructure | None = None
    max_size: int = 0


def implicitly_definable_bounded(phi: Formula, theta: Formula, tau: Iterable[str],
                                 budget: SearchBudget = SearchBudget(4),
                                 xs: Sequence[str] | None = None) -> ImplicitResult:
    """Check phi & phi' |= theta <-> theta' on models up to the budget size."""
    tau = set(tau)
    m = priming_map(signature_of(phi) | signature_of(theta), tau)
    xs = tuple(xs) if xs is not None else tuple(sorted(free_vars(theta)))
    lhs = conj(phi, rename_symbols(phi, m))
    rhs = Iff(theta, rename_symbols(theta, m))
    r = check_entailment_bounded(lhs, rhs, budget, xs)
    return ImplicitResult(r.status, r.countermodel, r.max_size)
