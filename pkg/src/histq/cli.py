"""``histq`` command line.

Exit codes: 0 success, 2 invalid input, 3 consistency refusal, 4 numerical
failure. ``--json PATH`` writes the machine-readable report (``-`` for
stdout); a short human summary always goes to stdout.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction

import numpy as np

from . import __version__
from .decoherence import MEDIUM, WEAK, consistency_check, d_matrix, probability_measure
from .effect_sums import FullDPoset, OrderKFamily, full_dposet_prob, orderk_additivity_residual
from .effects import AlphaParam, dposet_axioms
from .errors import ConsistencyError, HistqError, NotConsistent, NumericalError, ScenarioError, ValidationError
from .logic import build_algebra, implies
from .scenario import UNIT_NAME, Scenario, digest, grid, load, resolve_tolerance

EXIT_OK, EXIT_INVALID, EXIT_REFUSED, EXIT_NUMERIC = 0, 2, 3, 4

COMMANDS = ("validate", "decoherence", "consistency", "probs", "implies", "full-dposet", "orderk", "dposet-laws")


class Refusal(Exception):
    """Consistency refusal that still carries a report payload."""

    def __init__(self, payload: dict, message: str):
        super().__init__(message)
        self.payload = payload


def _family(sc: Scenario, name):
    fname, members = sc.family(name)
    return fname, members, [sc.history(m) for m in members]


def _all_projector(hs) -> bool:
    return all(h.is_projector_history() for h in hs)


def cmd_validate(sc: Scenario, args, tol) -> dict:
    return {
        "valid": True,
        "dim": sc.dim,
        "effects": sorted(sc.effects),
        "histories": sorted(sc.histories),
        "families": sorted(sc.families),
    }


def cmd_decoherence(sc: Scenario, args, tol) -> dict:
    fname, members, hs = _family(sc, args.family)
    dm = d_matrix(sc.state, hs, sc.ctx)
    return {"family": fname, "histories": members, "d": grid(dm.gram)}


def cmd_consistency(sc: Scenario, args, tol) -> dict:
    fname, members, hs = _family(sc, args.family)
    dm = d_matrix(sc.state, hs, sc.ctx)
    disjoint_only = _all_projector(hs)
    rep = consistency_check(dm, args.mode, tol, disjoint_only=disjoint_only)
    return {
        "family": fname,
        "mode": rep.mode,
        "disjoint_only": disjoint_only,
        "passed": rep.passed,
        "violations": [
            {"i": v.i, "j": v.j, "pair": [members[v.i], members[v.j]], "residual": v.residual}
            for v in rep.violations
        ],
    }


def cmd_probs(sc: Scenario, args, tol) -> dict:
    fname, members, hs = _family(sc, args.family)
    if UNIT_NAME not in members:
        members, hs = members + [UNIT_NAME], hs + [sc.history(UNIT_NAME)]
    unit = members.index(UNIT_NAME)
    dm = d_matrix(sc.state, hs, sc.ctx)
    base = {"family": fname, "histories": members, "unit_index": unit}
    try:
        p = probability_measure(dm, unit, tol)
    except NotConsistent as exc:
        worst = max(exc.violations, key=lambda v: v.residual)
        violations = [
            {"i": v.i, "j": v.j, "pair": [members[v.i], members[v.j]], "re_d": float(dm.gram[v.i, v.j].real)}
            for v in exc.violations
        ]
        if args.force:
            diag = dm.diagonal()
            return {
                **base,
                "status": "forced",
                "label": "not a probability measure",
                "values": [float(x) for x in diag / diag[unit]],
                "violations": violations,
                "max_abs_re_d": worst.residual,
            }
        payload = {**base, "status": "refused", "violations": violations, "max_abs_re_d": worst.residual}
        raise Refusal(payload, str(exc)) from exc
    return {**base, "status": "ok", "probabilities": p}


def cmd_implies(sc: Scenario, args, tol) -> dict:
    out = []
    for item in sc.section("implications"):
        fname, members, hs = _family(sc, item.get("family", args.family))
        alg = build_algebra(hs, 1, sc.ctx, sc.state, members)
        left = alg.element(item["left"])
        right = alg.element(item["right"])
        res = implies(alg, left, right, tol)
        out.append({"family": fname, "left": list(item["left"]), "right": list(item["right"]), **res.as_dict()})
    return {"implications": out}


def cmd_full_dposet(sc: Scenario, args, tol) -> dict:
    sec = sc.section("full_dposet")
    fd = FullDPoset(sc.history(sec.get("base", UNIT_NAME)), float(sec["t_star"]), sc.ctx, sc.state)
    names = list(sec["effects"])
    rows = []
    for n in names:
        e = sc.effect(n)
        rows.append({"effect": n, "p": full_dposet_prob(fd, e), "reduced": fd.reduced_prob(e)})
    d = np.array([[fd.d(sc.effect(a), sc.effect(b)) for b in names] for a in names])
    return {"base": sec.get("base", UNIT_NAME), "t_star": fd.t_star, "table": rows, "d": grid(d)}


def cmd_orderk(sc: Scenario, args, tol) -> dict:
    sec = sc.section("orderk")
    base = sc.history(sec.get("base", UNIT_NAME))
    k = int(sec["k"])
    out = []
    for inst in sec["instances"]:
        rest = [sc.effect(n) for n in inst["rest"]]
        fam = OrderKFamily.grid(base, k, len(rest), sc.ctx, sc.state, float(sec.get("half_width", 0.5)))
        r = orderk_additivity_residual(
            fam, int(inst["block"]), sc.effect(inst["E"]), sc.effect(inst["D"]), rest,
            [sc.effect(n) for n in inst["probe"]],
        )
        out.append({**inst, "residual": r, "passed": r <= tol})
    return {"k": k, "alpha": str(Fraction(2, k)), "instances": out}


def cmd_dposet_laws(sc: Scenario, args, tol) -> dict:
    sec = sc.section("dposet_laws")
    alphas = [args.alpha] if args.alpha else [str(a) for a in sec.get("alphas", [str(sc.alpha)])]
    out = []
    for triple in sec["triples"]:
        a, b, c = (sc.effect(n) for n in triple)
        for al in alphas:
            rep = dposet_axioms(a, b, c, AlphaParam.parse(al), tol)
            out.append({
                "triple": list(triple),
                "alpha": rep.alpha,
                "passed": rep.passed,
                "axioms": rep.by_axiom(),
                "max_residual": rep.max_residual(),
            })
    return {"checks": out}


HANDLERS = {
    "validate": cmd_validate,
    "decoherence": cmd_decoherence,
    "consistency": cmd_consistency,
    "probs": cmd_probs,
    "implies": cmd_implies,
    "full-dposet": cmd_full_dposet,
    "orderk": cmd_orderk,
    "dposet-laws": cmd_dposet_laws,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="histq", description="Decoherence functionals and effect-history logic.")
    p.add_argument("command", choices=COMMANDS)
    p.add_argument("--scenario", required=True, help="scenario JSON file")
    p.add_argument("--tolerance", type=float, default=None, help="consistency tolerance")
    p.add_argument("--alpha", default=None, help="alpha as p/q (dposet-laws)")
    p.add_argument("--family", default=None, help="family name from the scenario")
    p.add_argument("--mode", choices=(WEAK, MEDIUM), default=WEAK)
    p.add_argument("--json", dest="json_out", default=None, help="write the report here ('-' for stdout)")
    p.add_argument("--force", action="store_true", help="probs: emit raw values on inconsistent families")
    p.add_argument("--version", action="version", version=f"histq {__version__}")
    return p


def make_report(command: str, sc: Scenario, args, tol: float, payload: dict) -> dict:
    flags = {
        "command": command,
        "tolerance": tol,
        "alpha": args.alpha,
        "family": args.family,
        "mode": args.mode,
        "force": args.force,
    }
    return {
        "schema": 1,
        "command": command,
        "version": __version__,
        "inputs_digest": digest(sc.raw, flags),
        "tolerance": tol,
        "payload": payload,
    }


def dumps(report: dict) -> str:
    return json.dumps(report, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _emit(report: dict, dest: str | None) -> None:
    if dest is None:
        return
    text = dumps(report)
    if dest == "-":
        sys.stdout.write(text)
    else:
        with open(dest, "w", encoding="utf-8") as fh:
            fh.write(text)


def _summary(command: str, payload: dict) -> str:
    if command == "probs" and payload.get("status") == "ok":
        return "\n".join(f"p({h}) = {p:.12g}" for h, p in zip(payload["histories"], payload["probabilities"]))
    if command == "consistency":
        return f"{payload['mode']} consistency: {'passed' if payload['passed'] else 'failed'}"
    return f"{command}: ok"


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.alpha is not None:
            AlphaParam.parse(args.alpha)
        sc = load(args.scenario)
        tol = resolve_tolerance(args.tolerance, sc, os.environ.get("HISTQ_TOLERANCE"))
        if not tol > 0:
            raise ScenarioError("tolerance must be positive")
        try:
            payload = HANDLERS[args.command](sc, args, tol)
        except (HistqError, Refusal):
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ScenarioError(f"malformed {args.command} section: {exc}") from exc
    except Refusal as ref:
        _emit(make_report(args.command, sc, args, tol, ref.payload), args.json_out)
        print(f"refused: {ref}", file=sys.stderr)
        return EXIT_REFUSED
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConsistencyError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except HistqError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    report = make_report(args.command, sc, args, tol, payload)
    _emit(report, args.json_out)
    if args.json_out != "-":
        print(_summary(args.command, payload))
    return EXIT_OK


def main() -> None:
    sys.exit(run())
