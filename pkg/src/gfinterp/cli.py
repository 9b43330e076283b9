"""Command-line front end: ``python -m gfinterp.cli <command> ...``.

Problem files hold ``key: value`` lines; a line starting with whitespace
continues the previous value.  Keys: ``logic`` (gf or fo2), ``phi`` (alias
``left``), ``psi`` (alias ``right``), ``theta``, ``tau`` (names, optionally
written ``R/2``), ``xs`` (alias ``freevars``; free variables in order).

Reports are JSON with a schema version.  Exit status: 0 for a definitive
verdict, 2 for UNKNOWN, 1 for errors (including failed verification).
"""
from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .semantics import SearchBudget, parse_structure, to_structure_text
from .syntax import ParseError, conj, free_vars, neg, parse, signature_of, to_text

SCHEMA = 1


class CliError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    inputs: list[str]
    max_model_size: int = 4
    max_interpolant_size: int = 4
    timeout_s: float | None = None
    tau: list[str] | None = None
    logic: str | None = None
    seed: int = 0
    cert_out: str | None = None
    depth: int = 2
    out: str | None = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.max_model_size < 1 or self.max_interpolant_size < 0 or self.depth < 1:
            raise CliError("budgets must be positive")
        if self.timeout_s is not None and self.timeout_s <= 0:
            raise CliError("--timeout-s must be positive")

    def budget(self) -> SearchBudget:
        return SearchBudget(max_size=self.max_model_size, time_limit=self.timeout_s)

    def record(self) -> dict:
        return {"max_model_size": self.max_model_size, "max_interpolant_size": self.max_interpolant_size,
                "timeout_s": self.timeout_s, "seed": self.seed, "depth": self.depth}


# ---------------------------------------------------------------- input files

@dataclass
class Problem:
    logic: str = "gf"
    phi: object = None
    psi: object = None
    theta: object = None
    tau: tuple[str, ...] | None = None
    xs: tuple[str, ...] | None = None


_ALIASES = {"left": "phi", "right": "psi", "freevars": "xs"}


def parse_problem(text: str) -> Problem:
    fields: dict[str, str] = {}
    last = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        if line[0] in " \t" and last is not None:
            fields[last] += " " + line.strip()
            continue
        key, sep, rest = line.partition(":")
        key = _ALIASES.get(key.strip(), key.strip())
        if not sep or key not in ("logic", "phi", "psi", "theta", "tau", "xs"):
            raise CliError(f"problem line {lineno}: expected one of logic/phi/psi/theta/tau/xs")
        fields[key] = rest.strip()
        last = key
    p = Problem()
    p.logic = fields.get("logic", "gf").lower()
    for key in ("phi", "psi", "theta"):
        if key in fields:
            try:
                setattr(p, key, parse(fields[key]))
            except ParseError as e:
                raise CliError(f"{key}: {e}") from e
    if "tau" in fields:
        p.tau = tuple(t.split("/")[0] for t in fields["tau"].replace(",", " ").split())
    if "xs" in fields:
        p.xs = tuple(fields["xs"].replace(",", " ").split())
    return p


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise CliError(f"cannot read {path}: {e.strerror}") from e


def _joint(left, right, tau, xs) -> dict:
    """The two formulas whose joint consistency a certificate witnesses."""
    return {"left": to_text(left), "right": to_text(right), "tau": list(tau), "xs": list(xs)}


def _need(p: Problem, *keys: str) -> None:
    missing = [k for k in keys if getattr(p, k) is None]
    if missing:
        raise CliError(f"problem file lacks {', '.join(missing)}")


def _logic(cfg: RunConfig, p: Problem | None = None) -> str:
    return (cfg.logic or (p.logic if p else "gf")).upper().replace("²", "2")


# ---------------------------------------------------------------- commands

def cmd_interpolant(cfg: RunConfig) -> dict:
    from .interp import interpolant_exists
    p = parse_problem(_read(cfg.inputs[0]))
    _need(p, "phi", "psi")
    if cfg.tau is not None:
        raise CliError("interpolation always uses the shared signature; --tau is not accepted here")
    v = interpolant_exists(p.phi, p.psi, _logic(cfg, p), cfg.budget(), cfg.max_interpolant_size, p.xs)
    out = v.to_json()
    out["problem"] = {"phi": to_text(p.phi), "psi": to_text(p.psi)}
    out["joint"] = _joint(p.phi, neg(p.psi), v.tau, v.xs)
    out["verdict"] = v.outcome
    return out


def cmd_definability(cfg: RunConfig) -> dict:
    from .interp import explicit_definable, implicitly_definable_bounded
    p = parse_problem(_read(cfg.inputs[0]))
    _need(p, "phi", "theta")
    tau = tuple(cfg.tau) if cfg.tau is not None else p.tau
    if tau is None:
        raise CliError("definability needs tau (problem file or --tau)")
    v = explicit_definable(p.phi, p.theta, tau, _logic(cfg, p), cfg.budget(), cfg.max_interpolant_size, p.xs)
    imp = implicitly_definable_bounded(p.phi, p.theta, tau, cfg.budget(), p.xs)
    out = v.to_json()
    out["problem"] = {"phi": to_text(p.phi), "theta": to_text(p.theta), "tau": list(tau)}
    out["implicit"] = {"status": imp.status, "max_size": imp.max_size}
    out["joint"] = _joint(conj(p.phi, p.theta), conj(p.phi, neg(p.theta)), v.tau, v.xs)
    out["verdict"] = v.outcome
    return out


def _structures(cfg: RunConfig):
    if len(cfg.inputs) != 2:
        raise CliError("expected two structure files")
    try:
        return parse_structure(_read(cfg.inputs[0])), parse_structure(_read(cfg.inputs[1]))
    except ValueError as e:
        raise CliError(str(e)) from e


def _tau_for(cfg: RunConfig, A, B) -> tuple[str, ...]:
    if cfg.tau is not None:
        return tuple(cfg.tau)
    return tuple(sorted(set(A.structure.signature) & set(B.structure.signature)))


def cmd_bisim(cfg: RunConfig) -> dict:
    from .bisim import fo2_bisimilar, gf_bisimilar
    A, B = _structures(cfg)
    tau = _tau_for(cfg, A, B)
    logic = _logic(cfg)
    cert = (gf_bisimilar if logic == "GF" else fo2_bisimilar)(A, B, tau)
    out = {"verdict": "BISIMILAR" if cert else "NOT_BISIMILAR", "logic": logic, "tau": list(tau)}
    if cert:
        out["certificate"] = {"logic": logic, "left": to_structure_text(A), "right": to_structure_text(B),
                              "bisimulation": cert.to_json()}
    else:
        out["refusal"] = {"reason": cert.reason, "round": cert.round}
    return out


def _joint_problem(cfg: RunConfig):
    p = parse_problem(_read(cfg.inputs[0]))
    _need(p, "phi", "psi")
    tau = tuple(cfg.tau) if cfg.tau is not None else p.tau
    if tau is None:
        tau = tuple(sorted(set(signature_of(p.phi)) & set(signature_of(p.psi))))
    xs = p.xs or tuple(sorted(free_vars(p.phi) | free_vars(p.psi)))
    return p, tau, xs


def _mosaic_verdict(cfg, p, tau, xs):
    from .gfmosaic import decide_joint_consistency
    from .oracle import search_model_pair
    from .types import Closure, build_universe
    from .semantics import count_structures

    budget = cfg.budget()
    pair = search_model_pair(p.phi, p.psi, tau, "GF", budget, xs)
    seeds = [s.structure.rename({a: i for i, a in enumerate(s.structure.domain)})
             for s in ((pair.left, pair.right) if pair.found else ())]
    c = Closure(p.phi, p.psi, xs)
    total = sum(count_structures(c.signature, k) for k in range(1, budget.max_size + 1))
    u = build_universe(c, tau, budget, seeds, enumerate_sizes=total <= 5000)
    return c, decide_joint_consistency(p.phi, p.psi, tau, u, budget, xs=xs)


def cmd_mosaic_check(cfg: RunConfig) -> dict:
    """Joint consistency of phi and psi (as given) by the mosaic procedure alone."""
    from .gfmosaic import verify_gf_certificate
    p, tau, xs = _joint_problem(cfg)
    c, v = _mosaic_verdict(cfg, p, tau, xs)
    out = {"verdict": v.outcome, "tau": list(tau), "stats": v.stats, "joint": _joint(p.phi, p.psi, tau, xs)}
    if v.certificate is not None:
        chk = verify_gf_certificate(v.certificate, c, tau)
        out["certificate_check"] = bool(chk)
        out["certificate"] = v.certificate.to_json()
    return out


def cmd_readoff(cfg: RunConfig) -> dict:
    """Mosaics read off from two bisimilar pointed structures, with all conditions re-checked."""
    from .gfmosaic import is_mosaic, is_saturated_set, read_off
    from .types import Closure
    if len(cfg.inputs) != 3:
        raise CliError("readoff needs a problem file and two structure files")
    p = parse_problem(_read(cfg.inputs[0]))
    _need(p, "phi", "psi")
    cfg2 = RunConfig(cfg.command, cfg.inputs[1:], tau=cfg.tau)
    A, B = _structures(cfg2)
    tau = tuple(cfg.tau) if cfg.tau is not None else (p.tau or _tau_for(cfg2, A, B))
    xs = p.xs or tuple(sorted(free_vars(p.phi) | free_vars(p.psi)))
    c = Closure(p.phi, p.psi, xs)
    try:
        ms, psi, _, _ = read_off(A, B, tau, c, check=False)
    except ValueError as e:
        raise CliError(str(e)) from e
    bad = [i for i, m in enumerate(ms.mosaics) if not is_mosaic(m, c, tau)]
    sat = is_saturated_set(ms.mosaics, c, tau)
    return {"verdict": "OK" if not bad and sat else "VIOLATION", "mosaics": len(ms.mosaics),
            "types": len({t for m in ms.mosaics for t in m.types}), "non_mosaics": bad,
            "saturated": bool(sat), "tau": list(tau)}


def cmd_unfold(cfg: RunConfig) -> dict:
    from .gfmosaic import failing_members, unfold
    p, tau, xs = _joint_problem(cfg)
    c, v = _mosaic_verdict(cfg, p, tau, xs)
    if v.certificate is None:
        return {"verdict": "UNKNOWN", "reason": f"mosaic procedure returned {v.outcome}"}
    cert = v.certificate
    u = unfold(cert.mosaics, cert.psi, cert.t1, cert.t2, cfg.depth, c, tau, realizers=cert.realizers,
               structures=cert.structures)
    bad = [len(failing_members(c, ps, t, cfg.depth)) for ps, t in zip(u.structures, (cert.t1, cert.t2))]
    return {"verdict": "OK" if not any(bad) else "VIOLATION", "depth": cfg.depth, "nodes": u.nodes,
            "sizes": [len(ps.structure) for ps in u.structures], "failing_members": bad}


def cmd_shrink(cfg: RunConfig) -> dict:
    from .fo2 import check_shrink, shrink
    A, B = _structures(cfg)
    tau = _tau_for(cfg, A, B)
    try:
        pair = shrink(A, B, tau)
    except ValueError as e:
        raise CliError(str(e)) from e
    bad = check_shrink(pair, tau)
    return {"verdict": "OK" if not bad else "VIOLATION", "violations": bad, "tau": list(tau),
            "counts": pair.counts, "left": to_structure_text(pair.left), "right": to_structure_text(pair.right)}


def cmd_normalize(cfg: RunConfig) -> dict:
    """Scott normal form of phi; with psi present and a symbol of arity above two, the arity reduction first."""
    from .fo2 import reduce_arity, scott_normal_form
    p = parse_problem(_read(cfg.inputs[0]))
    _need(p, "phi")
    out = {"verdict": "OK"}
    phi = p.phi
    wide = [f for f in (p.phi, p.psi) if f is not None and signature_of(f).max_arity() > 2]
    if wide:
        _need(p, "psi")
        tau = tuple(cfg.tau) if cfg.tau is not None else (p.tau or ())
        red = reduce_arity(p.phi, p.psi, tau)
        out["reduced"] = {"phi": to_text(red.phi), "psi": to_text(red.psi), "tau": dict(red.tau)}
        phi = red.phi
    out["scott"] = to_text(scott_normal_form(phi, p.xs))
    return out


def cmd_gen_hardness(cfg: RunConfig) -> dict:
    from .hardness import generate, instance_size, parse_atm
    try:
        M = parse_atm(_read(cfg.inputs[0]))
    except ValueError as e:
        raise CliError(f"machine file: {e}") from e
    word = cfg.extra.get("word")
    inst = generate(cfg.extra["variant"], M, list(word) if word else None, cfg.extra.get("n"))
    text = inst.problem_text()
    target = cfg.extra.get("problem_out")
    if target:
        Path(target).write_text(text)
    else:
        sys.stdout.write(text)
    return {"verdict": "GENERATED", "variant": inst.variant, "tau": list(inst.tau), "size": instance_size(inst),
            "signature": dict(signature_of(inst.phi)), "problem_file": target}


def _verify_mosaic(cert: dict, joint: dict) -> tuple[bool, str]:
    from .gfmosaic import certificate_from_json, verify_gf_certificate
    from .types import Closure
    c = Closure(parse(joint["left"]), parse(joint["right"]), tuple(joint["xs"]))
    gc = certificate_from_json(cert, c)
    chk = verify_gf_certificate(gc, c, joint["tau"])
    return bool(chk), "mosaic certificate" + ("" if chk else f": {chk.detail}")


def _verify_report(data: dict) -> tuple[bool, str]:
    from .bisim import verify_certificate
    from .interp import JointCertificate
    cert = data.get("certificate")
    if cert is None:
        return False, "no certificate in report"
    joint = data.get("joint")
    if cert.get("kind") == "gf-mosaics":
        if joint is None:
            raise CliError("a mosaic certificate needs the report's joint block")
        return _verify_mosaic(cert, joint)
    jc = JointCertificate.from_json(cert)
    if joint is None:
        tau = data.get("tau", cert["bisimulation"].get("tau"))
        return verify_certificate(jc.bisimulation, jc.left, jc.right, tau), "bisimulation certificate"
    ok = jc.verify(parse(joint["left"]), parse(joint["right"]), joint["tau"], tuple(joint["xs"]))
    what = "model pair with bisimulation"
    if ok and "mosaic" in cert:
        ok, extra = _verify_mosaic(cert["mosaic"], joint)
        what += " and " + extra
    return ok, what


def cmd_verify_cert(cfg: RunConfig) -> dict:
    try:
        data = json.loads(_read(cfg.inputs[0]))
    except json.JSONDecodeError as e:
        raise CliError(f"not JSON: {e}") from e
    if "certificate" not in data and "kind" in data:
        data = {"certificate": data}
    ok, what = _verify_report(data)
    return {"verdict": "VALID" if ok else "INVALID", "checked": what}


COMMANDS = {
    "interpolant": cmd_interpolant, "definability": cmd_definability, "bisim": cmd_bisim,
    "mosaic-check": cmd_mosaic_check, "readoff": cmd_readoff, "unfold": cmd_unfold, "shrink": cmd_shrink,
    "normalize": cmd_normalize, "gen-hardness": cmd_gen_hardness, "verify-cert": cmd_verify_cert,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="gfinterp", description="Interpolant and definition existence for GF and FO2.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-model-size", type=int, default=4)
    common.add_argument("--max-interpolant-size", type=int, default=4)
    common.add_argument("--timeout-s", type=float, default=None)
    common.add_argument("--tau", type=lambda s: s.replace(",", " ").split(), default=None,
                        help="comma- or space-separated symbols")
    common.add_argument("--logic", choices=["gf", "fo2"], default=None)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--cert-out", default=None, help="also write the certificate to this file")
    common.add_argument("--depth", type=int, default=2, help="unfolding depth")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")
    sub = ap.add_subparsers(dest="command", required=True)
    sub.add_parser("interpolant", parents=[common]).add_argument("problem")
    sub.add_parser("definability", parents=[common]).add_argument("problem")
    p = sub.add_parser("bisim", parents=[common])
    p.add_argument("left")
    p.add_argument("right")
    sub.add_parser("mosaic-check", parents=[common]).add_argument("problem")
    p = sub.add_parser("readoff", parents=[common])
    p.add_argument("problem")
    p.add_argument("left")
    p.add_argument("right")
    sub.add_parser("unfold", parents=[common]).add_argument("problem")
    p = sub.add_parser("shrink", parents=[common])
    p.add_argument("left")
    p.add_argument("right")
    sub.add_parser("normalize", parents=[common]).add_argument("problem")
    p = sub.add_parser("gen-hardness", parents=[common])
    p.add_argument("atm")
    p.add_argument("--variant", choices=["gf-bounded", "gf-general", "fo2", "fo2-sig"], required=True)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--word", default=None, help="input word, one character per symbol")
    p.add_argument("--problem-out", default=None)
    sub.add_parser("verify-cert", parents=[common]).add_argument("report")
    return ap


def config_from_args(ns: argparse.Namespace) -> RunConfig:
    inputs = [getattr(ns, k) for k in ("problem", "left", "right", "atm", "report") if getattr(ns, k, None)]
    extra = {k: getattr(ns, k) for k in ("variant", "n", "word", "problem_out") if hasattr(ns, k)}
    return RunConfig(ns.command, inputs, ns.max_model_size, ns.max_interpolant_size, ns.timeout_s, ns.tau,
                     ns.logic, ns.seed, ns.cert_out, ns.depth, ns.out, extra)


def run(cfg: RunConfig) -> tuple[int, dict]:
    cfg.validate()
    random.seed(cfg.seed)
    report = COMMANDS[cfg.command](cfg)
    report = {"schema": SCHEMA, "command": cfg.command, "config": cfg.record(), **report}
    verdict = report.get("verdict")
    if verdict in ("UNKNOWN", "NOT_FOUND_WITHIN_UNIVERSE"):
        code = 2
    elif verdict in ("INVALID", "VIOLATION"):
        code = 1
    else:
        code = 0
    return code, report


def main(argv: list[str] | None = None) -> int:
    ns = build_parser().parse_args(argv)
    cfg = config_from_args(ns)
    try:
        code, report = run(cfg)
    except (CliError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    text = json.dumps(report, indent=2, sort_keys=True, default=str) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    elif cfg.command != "gen-hardness" or cfg.extra.get("problem_out"):
        try:
            sys.stdout.write(text)
            sys.stdout.flush()
        except BrokenPipeError:
            # reader went away (e.g. piped into head); keep the exit code
            sys.stdout = None
    if cfg.cert_out and report.get("certificate") is not None:
        Path(cfg.cert_out).write_text(json.dumps(report["certificate"], indent=2, sort_keys=True) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
