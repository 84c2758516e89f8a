"""Command-line front end.

Reports are single JSON documents on stdout; human-readable summaries and
errors (single-line JSON) go to stderr.  Exit codes: 0 affirmative or
verified, 1 negative / counterexample / none, 2 usage or format error,
3 budget exhausted or inconclusive.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import List, Optional

from liftcsp import classify as classify_mod
from liftcsp import duality as duality_mod
from liftcsp import families as families_mod
from liftcsp import sparse as sparse_mod
from liftcsp.errors import (
    BudgetExceededError,
    FormatError,
    LiftcspError,
    SearchBoundsError,
    SignatureMismatchError,
    SparsificationError,
    ValidationError,
)
from liftcsp.hom import DEFAULT_BUDGET, core, find_hom
from liftcsp.lifts import (
    family_from_json,
    family_to_json,
    parse_family,
    shadow_member,
)
from liftcsp.structures import (
    enumerate_structures,
    parse_structure,
    serialize_structure,
    structure_to_json,
)

EXIT_OK = 0
EXIT_NEGATIVE = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3


def _read(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _load_structure(path: str, fmt: str):
    return parse_structure(_read(path), fmt)


def _load_family(path: str, variant: str):
    return parse_family(_read(path), variant)


def _emit(obj) -> None:
    sys.stdout.write(json.dumps(obj) + "\n")


def _note(msg: str) -> None:
    sys.stderr.write(msg + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="liftcsp",
        description="Homomorphisms, lifts and shadows, finite dualities, "
                    "forbidden-pattern classification.")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                   help="search-node limit per search")
    p.add_argument("--nmax", type=int, default=4,
                   help="exhaustive oracle bound (universe size)")
    p.add_argument("--format", choices=["json", "arclist"], default="json")
    p.add_argument("--variant", choices=["standard", "injective", "full"],
                   default="standard")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel workers for verification sweeps")
    sub = p.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("hom", help="find a homomorphism A -> B")
    sp.add_argument("source")
    sp.add_argument("target")

    sp = sub.add_parser("core", help="core and retraction of a structure")
    sp.add_argument("structure")

    sp = sub.add_parser("member", help="shadow membership: color a structure "
                                       "against a forbidden-lift family")
    sp.add_argument("structure")
    sp.add_argument("family")

    sp = sub.add_parser("classify", help="CSP / not-a-finite-union decision")
    sp.add_argument("family")
    sp.add_argument("--nmax-lifted", type=int, default=3)

    sp = sub.add_parser("dual", help="dual of a tree")
    sp.add_argument("tree")
    sp.add_argument("--mode", choices=["auto", "construct", "search"],
                    default="auto")

    sp = sub.add_parser("verify-duality", help="check Forb(F) = CSP(D) "
                                               "exhaustively up to --nmax")
    sp.add_argument("forbidden", help="JSON array of structures")
    sp.add_argument("duals", help="JSON array of structures")

    sp = sub.add_parser("verify-shadow-duality",
                        help="check shadow membership = CSP membership")
    sp.add_argument("family", help="family JSON (array of lifts)")
    sp.add_argument("duals", help="JSON array of structures")

    sp = sub.add_parser("sparsify", help="high-girth equivalent structure")
    sp.add_argument("structure")
    sp.add_argument("--k", type=int, required=True)
    sp.add_argument("--girth", type=int, required=True)
    sp.add_argument("--copies", type=int, default=None)
    sp.add_argument("--p", type=float, default=None)
    sp.add_argument("--max-retries", type=int, default=30)

    sp = sub.add_parser("gen", help="generate a worked family")
    gsub = sp.add_subparsers(dest="family_kind", required=True)
    gk = gsub.add_parser("k-coloring")
    gk.add_argument("--k", type=int, required=True)
    gl = gsub.add_parser("local-coloring")
    gl.add_argument("--a", type=int, required=True)
    gl.add_argument("--b", type=int, required=True)

    sp = sub.add_parser("enum", help="stream canonical structures")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--signature", choices=["digraph", "graph"],
                    default="digraph")
    sp.add_argument("--labelled", action="store_true")

    return p


def _structures_array(text: str):
    data = json.loads(text)
    if not isinstance(data, list):
        raise FormatError("expected a JSON array of structures")
    from liftcsp.structures import structure_from_json
    return [structure_from_json(item) for item in data]


def _cmd_hom(args) -> int:
    a = _load_structure(args.source, args.format)
    b = _load_structure(args.target, args.format)
    h = find_hom(a, b, args.variant, args.budget)
    if h is None:
        _emit(None)
        _note("none")
        return EXIT_NEGATIVE
    _emit({"witness": list(h.map), "variant": args.variant})
    _note(f"homomorphism found ({args.variant})")
    return EXIT_OK


def _cmd_core(args) -> int:
    a = _load_structure(args.structure, args.format)
    res = core(a, args.budget)
    _emit({
        "core": structure_to_json(res.core),
        "vertices": list(res.vertices),
        "retraction": list(res.retraction_map),
    })
    _note(f"core has {res.core.n} of {a.n} elements")
    return EXIT_OK


def _cmd_member(args) -> int:
    a = _load_structure(args.structure, args.format)
    family = _load_family(args.family, args.variant)
    witness = shadow_member(a, family, args.budget)
    if witness is None:
        _emit(None)
        _note("none")
        return EXIT_NEGATIVE
    _emit({"coloring": witness})
    _note("coloring found")
    return EXIT_OK


def _cmd_classify(args) -> int:
    family = _load_family(args.family, args.variant)
    bounds = classify_mod.ClassifyBounds(
        n_max_shadow=args.nmax, n_max_lifted=args.nmax_lifted,
        budget=args.budget)
    report = classify_mod.classify(family, bounds)
    _emit(report.to_json())
    _note(f"outcome: {report.outcome}")
    if report.outcome == "csp":
        return EXIT_OK
    if report.outcome == "not_finite_union_csp":
        return EXIT_NEGATIVE
    return EXIT_BUDGET


def _cmd_dual(args) -> int:
    tree = _load_structure(args.tree, args.format)
    bounds = duality_mod.DualBounds(n_max=args.nmax, budget=args.budget)
    cand = duality_mod.dual_of_tree(tree, bounds, args.mode)
    _emit(cand.to_json())
    _note(f"dual verified to {cand.verified_to} elements ({cand.provenance})")
    return EXIT_OK


def _cmd_verify_duality(args) -> int:
    forbidden = _structures_array(_read(args.forbidden))
    duals = _structures_array(_read(args.duals))
    report = duality_mod.verify_duality(forbidden, duals, args.nmax,
                                        args.budget, args.jobs)
    _emit(report.to_json())
    _note(f"status: {report.status}")
    if report.status == "verified":
        return EXIT_OK
    if report.status == "counterexample":
        return EXIT_NEGATIVE
    return EXIT_BUDGET


def _cmd_verify_shadow_duality(args) -> int:
    family = _load_family(args.family, args.variant)
    duals = _structures_array(_read(args.duals))
    report = duality_mod.verify_shadow_duality(family, duals, args.nmax,
                                               args.budget, args.jobs)
    _emit(report.to_json())
    _note(f"status: {report.status}")
    if report.status == "verified":
        return EXIT_OK
    if report.status == "counterexample":
        return EXIT_NEGATIVE
    return EXIT_BUDGET


def _cmd_sparsify(args) -> int:
    a = _load_structure(args.structure, args.format)
    req = sparse_mod.SparseRequest(
        a, k=args.k, girth=args.girth, copies=args.copies,
        tuple_probability=args.p, max_retries=args.max_retries,
        seed=args.seed, budget=args.budget)
    result = sparse_mod.sparsify(req)
    _emit(result.to_json())
    _note(f"girth {result.girth_achieved}, {result.retries_used} retries, "
          f"seed {result.seed}")
    return EXIT_OK


def _cmd_gen(args) -> int:
    if args.family_kind == "k-coloring":
        family = families_mod.k_coloring_family(args.k)
    else:
        family = families_mod.local_coloring_family(args.a, args.b)
        if args.a >= 3 and args.b >= 3:
            _note("note: the corresponding CSP is NP-complete for a,b >= 3")
    _emit(family_to_json(family))
    _note(f"{len(family.members)} members, {len(family.gamma)} colors")
    return EXIT_OK


def _cmd_enum(args) -> int:
    from liftcsp.structures import DIGRAPH, GRAPH
    sig = DIGRAPH if args.signature == "digraph" else GRAPH
    count = 0
    for s in enumerate_structures(sig, args.n, up_to_iso=not args.labelled):
        sys.stdout.write(json.dumps(structure_to_json(s)) + "\n")
        count += 1
    _note(f"{count} structures")
    return EXIT_OK


_COMMANDS = {
    "hom": _cmd_hom,
    "core": _cmd_core,
    "member": _cmd_member,
    "classify": _cmd_classify,
    "dual": _cmd_dual,
    "verify-duality": _cmd_verify_duality,
    "verify-shadow-duality": _cmd_verify_shadow_duality,
    "sparsify": _cmd_sparsify,
    "gen": _cmd_gen,
    "enum": _cmd_enum,
}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return _COMMANDS[args.command](args)
    except (FormatError, ValidationError, SignatureMismatchError,
            FileNotFoundError, json.JSONDecodeError) as exc:
        _note(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_USAGE
    except (BudgetExceededError, SearchBoundsError, SparsificationError) as exc:
        _note(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_BUDGET
    except LiftcspError as exc:
        _note(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
