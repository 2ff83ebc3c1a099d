"""Command line interface: ``ppg <command> <input> [options]``.

``<input>`` is a DSL file or a family shorthand such as ``family:f1(3,1,2)``.
Results are printed as JSON (sorted keys, no timings) so repeated runs are
byte-identical; wall-clock timings go to the optional ``--manifest`` file.

Exit codes: 0 ok, 1 a FAIL verdict (or INCONCLUSIVE under ``--strict``),
2 usage or input error, 3 internal error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
import traceback
from importlib import metadata
from pathlib import Path

from .cache import default_cache, cached_rewrite
from .cohomology import cohomology_report
from .graded import initial_forms, koszul_check, lie_presentation_report, mildness_check, named_order
from .kummer import CycloStatus, KummerStatus, candidate_orientation, cyclotomicity_search, is_kummerian
from .linalg import DEFAULT_PRECISION
from .massey import DEFAULT_BUDGET, MasseyStatus, massey_verdict, parse_chars, strong_vanishing_scan
from .presentations import Orientation, parse_dsl, parse_family_spec, to_dsl
from .subgroups import abelianization, restrict_orientation

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_INTERNAL = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def load_input(text: str):
    """Return ``(presentation, orientation or None, sha256 of the source)``."""
    if text.startswith("family:"):
        pres, theta = parse_family_spec(text)
        return pres, theta, hashlib.sha256(text.encode()).hexdigest()
    path = Path(text)
    if not path.is_file():
        raise UsageError(f"no such input file: {text}")
    source = path.read_text(encoding="utf-8")
    pres, theta = parse_dsl(source)
    return pres, theta, hashlib.sha256(source.encode()).hexdigest()


def _precision(args) -> int:
    if args.precision is not None:
        return args.precision
    env = os.environ.get("PPG_PRECISION")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"PPG_PRECISION must be an integer, got {env!r}") from None
    return DEFAULT_PRECISION


def _orientation(pres, theta):
    if theta is not None:
        return theta, "given"
    cand, why = candidate_orientation(pres)
    if cand is None:
        return Orientation.trivial(pres), f"trivial ({why})"
    return cand, "candidate"


def _kernel(text: str, pres) -> tuple[int, ...]:
    chars = parse_chars(text, pres)
    if len(chars) != 1:
        raise UsageError("--kernel takes a single character")
    if not any(chars[0]):
        raise UsageError("--kernel character must be nonzero")
    return chars[0]


# -- commands: each returns (payload, outcome) with outcome in {"ok", "fail", "inconclusive"} --

def cmd_cohomology(args, pres, theta):
    return cohomology_report(pres), "ok"


def cmd_abelianization(args, pres, theta):
    inv = abelianization(pres)
    return {"free_rank": inv.free_rank, "torsion": list(inv.torsion), "display": str(inv),
            "torsion_free": inv.torsion_free}, "ok"


def cmd_subgroup(args, pres, theta):
    phi = _kernel(args.kernel, pres)
    sub = cached_rewrite(pres, phi, default_cache())
    inv = abelianization(sub)
    payload = {"parent": pres.name, "parent_digest": pres.digest(), "phi": list(phi),
               "transversal": sub.transversal, "generators": list(sub.generators),
               "relators": [str(r) for r in sub.relators],
               "schreier_generators": {g: str(w) for g, w in zip(sub.generators, sub.expressions)},
               "abelianization": {"free_rank": inv.free_rank, "torsion": list(inv.torsion),
                                  "display": str(inv)}}
    if args.out:
        sub_theta = restrict_orientation(theta, sub) if theta is not None else None
        comment = (f"index-{pres.p} subgroup rewritten by ppg {_version()}\n"
                   f"parent: {pres.name} sha256 {pres.digest()}\n"
                   f"phi: {','.join(map(str, phi))}\ntransversal: {sub.transversal}")
        Path(args.out).write_text(to_dsl(sub.presentation, sub_theta, comment), encoding="utf-8")
        payload["written"] = str(args.out)
    return payload, "ok"


def cmd_kummerian(args, pres, theta):
    theta, source = _orientation(pres, theta)
    v = is_kummerian(pres, theta, _precision(args))
    out = v.as_json()
    out["orientation"] = {"source": source, "values": {g: str(x) for g, x in sorted(theta.values.items())}}
    return out, "inconclusive" if v.status is KummerStatus.INCONCLUSIVE else "ok"


def cmd_cyclotomic(args, pres, theta):
    theta, source = _orientation(pres, theta)
    res = cyclotomicity_search(pres, theta, depth=args.depth, N=_precision(args),
                               jobs=args.jobs, exhaustive=args.exhaustive)
    out = res.as_json()
    out["orientation"] = {"source": source, "values": {g: str(x) for g, x in sorted(theta.values.items())}}
    return out, "inconclusive" if res.status is CycloStatus.PARTIAL or res.inconclusive else "ok"


def cmd_massey(args, pres, theta):
    chars = parse_chars(args.chars, pres)
    if args.n not in (None, "auto") and int(args.n) != len(chars):
        raise UsageError(f"--n {args.n} does not match {len(chars)} characters")
    v = massey_verdict(pres, chars, args.budget)
    return v.as_json(), "inconclusive" if v.status is MasseyStatus.UNKNOWN else "ok"


def cmd_massey_scan(args, pres, theta):
    sample = None if args.all else args.sample
    rep = strong_vanishing_scan(pres, args.n, sample=sample, budget=args.budget,
                                seed=args.seed, jobs=args.jobs)
    outcome = "ok"
    if not rep.certificates_verified:
        outcome = "fail"
    elif rep.counts.get(MasseyStatus.UNKNOWN.value):
        outcome = "inconclusive"
    return rep.as_json(), outcome


def cmd_graded(args, pres, theta):
    orders = ("decl", "rev", "paired") if args.order == "auto" else (args.order,)
    m = mildness_check(pres, args.degree, orders)
    out = m.as_json()
    out["lie_presentation"] = lie_presentation_report(pres)
    return out, "ok"


def cmd_koszul(args, pres, theta):
    A = initial_forms(pres)
    kv = koszul_check(A, args.degree, named_order(args.order, pres.generators))
    out = kv.as_json()
    out["note"] = "numerical necessary condition; Koszulity itself is not certified"
    return out, "ok" if kv.consistent else "fail"


def cmd_report(args, pres, theta):
    from .report import ClaimStatus, ReportOptions, build_report, render_figures
    opts = ReportOptions(full=args.full, precision=_precision(args), budget=args.budget,
                         sample=args.sample, seed=args.seed, jobs=args.jobs, degree=args.degree)
    doc, artifacts = build_report(pres, theta, opts)
    args._timings.update(opts.timings)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        doc["figures"] = render_figures(doc, artifacts, out)
        (out / "report.json").write_text(json.dumps(doc, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    summary = doc["summary"]
    if summary[ClaimStatus.FAIL.value]:
        return doc, "fail"
    return doc, "inconclusive" if summary[ClaimStatus.INCONCLUSIVE.value] else "ok"


COMMANDS = {
    "cohomology": (cmd_cohomology, "dimensions of H^1, H^2 and the cup-product table"),
    "abelianization": (cmd_abelianization, "pro-p abelianization G^ab"),
    "subgroup": (cmd_subgroup, "Reidemeister-Schreier rewrite of an index-p subgroup"),
    "kummerian": (cmd_kummerian, "decide Kummerianity of (G, theta)"),
    "cyclotomic": (cmd_cyclotomic, "search index-p subgroup chains for a non-Kummerian witness"),
    "massey": (cmd_massey, "Massey product verdict for one tuple of characters"),
    "massey-scan": (cmd_massey_scan, "Massey verdicts over cup-chain admissible tuples"),
    "graded": (cmd_graded, "Hilbert series of the graded algebra and mildness"),
    "koszul": (cmd_koszul, "quadratic dual and the Koszul numerical identity"),
    "report": (cmd_report, "all claims for a family group, with figures"),
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ppg", description="Computations with finitely presented pro-p groups.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {_version()}")
    sub = parser.add_subparsers(dest="command", metavar="command")
    sub.required = True
    default_jobs = os.cpu_count() or 1
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text, description=help_text)
        p.add_argument("input", help="DSL file or family:<kind>(<params>)")
        p.add_argument("--manifest", metavar="FILE", help="write a run manifest (inputs, flags, timings)")
        p.add_argument("--strict", action="store_true", help="exit 1 on INCONCLUSIVE verdicts")
        p.add_argument("--indent", type=int, default=2, help="JSON indent; 0 for one line")
        if name in ("kummerian", "cyclotomic", "report"):
            p.add_argument("--precision", type=int, default=None,
                           help=f"p-adic precision N (env PPG_PRECISION, default {DEFAULT_PRECISION})")
        if name in ("cyclotomic", "massey-scan", "report"):
            p.add_argument("--jobs", type=int, default=default_jobs, help="worker processes")
        if name in ("massey", "massey-scan", "report"):
            p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="search nodes per tuple")
        if name in ("massey-scan", "report"):
            p.add_argument("--seed", type=int, default=0)
        if name in ("graded", "koszul", "report"):
            p.add_argument("--degree", type=int, default=8)
    P = sub.choices
    P["subgroup"].add_argument("--kernel", required=True, help='character as digits, e.g. "0,1,0,0"')
    P["subgroup"].add_argument("--out", help="write the rewritten presentation as DSL")
    P["cyclotomic"].add_argument("--depth", type=int, default=1)
    P["cyclotomic"].add_argument("--exhaustive", action="store_true", help="continue past the first witness")
    P["massey"].add_argument("--chars", required=True, help='tuples separated by ";", e.g. "0,1,0,0;1,0,0,0"')
    P["massey"].add_argument("--n", default="auto")
    P["massey-scan"].add_argument("--n", type=int, default=3)
    group = P["massey-scan"].add_mutually_exclusive_group()
    group.add_argument("--all", action="store_true", help="every orbit representative (default)")
    group.add_argument("--sample", type=int, default=None, help="deterministic sample of S representatives")
    P["graded"].add_argument("--order", choices=("decl", "rev", "paired", "auto"), default="auto")
    P["koszul"].add_argument("--order", choices=("decl", "rev", "paired"), default="decl")
    P["report"].add_argument("--out", metavar="DIR", help="directory for report.json and PNG figures")
    P["report"].add_argument("--full", action="store_true", help="exhaustive scans and deeper searches")
    P["report"].add_argument("--sample", type=int, default=500, help="Massey sample size without --full")
    return parser


def _manifest(args, digest: str, payload: dict, outcome: str, timings: dict) -> dict:
    flags = {k: v for k, v in sorted(vars(args).items())
             if not k.startswith("_") and k not in ("command", "input", "manifest")}
    return {"tool": "ppg", "version": _version(), "command": args.command, "input": args.input,
            "input_sha256": digest, "flags": flags,
            "precision": _precision(args) if hasattr(args, "precision") else None,
            "budget": getattr(args, "budget", None), "outcome": outcome,
            "verdicts": _summary(payload), "timings": timings,
            "output_sha256": hashlib.sha256(_dump(payload, args.indent).encode()).hexdigest()}


def _summary(payload: dict):
    for key in ("summary", "status", "verdict_counts"):
        if key in payload:
            return payload[key]
    return None


def _dump(payload, indent) -> str:
    return json.dumps(payload, sort_keys=True, indent=indent if indent and indent > 0 else None, default=str)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    args._timings = {}
    fn = COMMANDS[args.command][0]
    try:
        t0 = time.perf_counter()
        pres, theta, digest = load_input(args.input)
        args._timings["parse"] = round(time.perf_counter() - t0, 3)
        t1 = time.perf_counter()
        payload, outcome = fn(args, pres, theta)
        args._timings["total"] = round(time.perf_counter() - t1, 3)
    except (UsageError, ValueError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # noqa: BLE001 - reported, not swallowed
        traceback.print_exc(file=sys.stderr)
        print(json.dumps({"error": "internal", "message": str(exc)}, sort_keys=True), file=sys.stderr)
        return EXIT_INTERNAL
    print(_dump(payload, args.indent))
    if args.manifest:
        Path(args.manifest).write_text(
            _dump(_manifest(args, digest, payload, outcome, args._timings), 2) + "\n", encoding="utf-8")
    if outcome == "fail" or (outcome == "inconclusive" and args.strict):
        return EXIT_FAIL
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
