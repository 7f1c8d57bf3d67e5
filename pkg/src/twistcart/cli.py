"""Command-line front end: loads models, runs computations, emits reports.

Reports go to stdout as JSON (sorted keys, so exact commands are
byte-identical across runs); ``--table`` renders a plain-text summary
instead.  Exit codes: 0 pass, 1 a computation succeeded but a checked
property failed, 2 input or validation error, 3 window instability.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

from .errors import InputError, TwistcartError, UnstableWindow
from .linalg import SparseMatrix
from . import serialize
from .cartan import (CDGAModel, Twisting, build_cartan, twisted_cohomology,
                     untwisted_graded_dims)
from .spectral import (make_filtration, pages, convergence_check,
                       cofinality_check, pages_report_json)
from . import gc as gclib
from . import elliptic, corpus

SCHEMA = "twistcart-report/1"


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def _resolve_model(arg: str):
    """A model file path, or the name of a shipped corpus model."""
    p = Path(arg)
    if p.exists():
        obj = corpus.load_model_file(p)
        return CDGAModel.from_json(obj), obj, p
    names = [e["name"] for e in corpus.manifest()["models"]]
    if arg in names:
        path = corpus.corpus_dir() / corpus._entry("models", arg)["file"]
        obj = corpus.load_model_file(path)
        return CDGAModel.from_json(obj), obj, path
    raise InputError(f"{arg!r} is neither a file nor a corpus model name "
                     f"(known: {', '.join(names)})")


def _resolve_eta(arg: str, complex_):
    p = Path(arg)
    if not p.exists():
        names = [e["name"] for e in corpus.manifest()["twistings"]]
        if arg in names:
            p = corpus.corpus_dir() / corpus._entry("twistings", arg)["file"]
        else:
            raise InputError(f"{arg!r} is neither a file nor a corpus "
                             f"twisting name (known: {', '.join(names)})")
    obj = corpus.load_model_file(p)
    return Twisting(complex_, complex_.element_from_json(obj["element"])), p


def _report(command, inputs, results, window=None, stability=None,
            identities=()):
    rep = {
        "schema": SCHEMA,
        "command": command,
        "inputs": [{"path": str(p), "sha256": _sha256(Path(p))}
                   for p in inputs],
        "results": results,
    }
    if window is not None:
        rep["window"] = window
    if stability is not None:
        rep["stability"] = stability
    if identities:
        rep["identities"] = sorted(identities)
    return rep


def _emit(report, table: bool) -> None:
    if not table:
        print(json.dumps(report, sort_keys=True, indent=2))
        return
    print(f"command: {report['command']}")
    for inp in report["inputs"]:
        print(f"input:   {inp['path']}")
    if "window" in report:
        print(f"window:  {report['window']}")

    def walk(prefix, obj):
        if isinstance(obj, dict):
            for k in sorted(obj, key=str):
                walk(f"{prefix}{k}.", obj[k])
        elif isinstance(obj, list):
            print(f"{prefix[:-1]}: {obj}")
        else:
            print(f"{prefix[:-1]}: {obj}")

    walk("", report["results"])


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_cohomology(args) -> int:
    model, obj, path = _resolve_model(args.model)
    rank = obj.get("rank", 0) if args.rank is None else args.rank
    cap = obj.get("polyCap", 0) if args.polycap is None else args.polycap
    c = build_cartan(model, rank, cap)
    inputs = [path]
    results = {
        "graded_dims": {str(n): d
                        for n, d in untwisted_graded_dims(c).items()},
        "rank": rank,
        "polyCap": cap,
    }
    stability = None
    identities = ["d_G_squared_zero"]
    if args.eta:
        eta, eta_path = _resolve_eta(args.eta, c)
        inputs.append(eta_path)
        tc = twisted_cohomology(c, eta, strict=True)
        results["twisted"] = {
            "even": tc.even_dim,
            "odd": tc.odd_dim,
            "per_degree": {str(n): d for n, d in tc.per_degree.items()},
        }
        if rank == 0:
            stability = {"stable": True, "mode": "exact"}
        else:
            stability = {"stable": tc.stable, "cap_pair": [cap, cap + 2]}
        identities.append("twisted_differential_squares_to_zero")
    report = _report("cohomology", inputs, results,
                     window=c.window, stability=stability,
                     identities=identities)
    _emit(report, args.table)
    return 0


def cmd_spectral(args) -> int:
    model, obj, path = _resolve_model(args.model)
    rank = obj.get("rank", 0) if args.rank is None else args.rank
    cap = obj.get("polyCap", 0) if args.polycap is None else args.polycap
    c = build_cartan(model, rank, cap)
    eta, eta_path = _resolve_eta(args.eta, c)
    filt = make_filtration(c, eta, args.filtration)
    page_list = pages(filt, args.maxpage)
    conv = convergence_check(filt)
    cof = cofinality_check(c, eta)
    results = {
        "pages": pages_report_json(filt, page_list),
        "convergence": {
            "einf": {str(p): d for p, d in conv.einf.items()},
            "graded_twisted": {str(p): d
                               for p, d in conv.graded_twisted.items()},
            "twisted_dims": list(conv.twisted_dims),
            "matches": conv.matches,
        },
        "cofinality": {"holds": cof["holds"],
                       "form_degree_bound": cof["form_degree_bound"]},
    }
    report = _report("spectral", [path, eta_path], results,
                     window=c.window,
                     identities=["page_recursion_consistency",
                                 "filtration_interleaving"])
    _emit(report, args.table)
    return 0 if (conv.matches and cof["holds"]) else 1


def cmd_gc(args) -> int:
    path = Path(args.data)
    if not path.exists():
        names = [e["name"] for e in corpus.manifest()["gc"]]
        if args.data in names:
            path = corpus.corpus_dir() / corpus._entry("gc", args.data)["file"]
        else:
            raise InputError(f"{args.data!r} is neither a file nor a corpus "
                             f"gc entry (known: {', '.join(names)})")
    obj = corpus.load_model_file(path)
    ok = True
    if args.operation == "check":
        n = int(obj["n"])
        m = SparseMatrix.from_dense(serialize.matrix_from_json(obj["J"]))
        rep = gclib.is_gc(gclib.SplitSpace(n), m)
        results = {"ok": rep["ok"], "failed": rep["failed"]}
        ok = rep["ok"]
        idents = ["square_is_minus_one", "pairing_orthogonality"]
    elif args.operation == "eigen":
        data = corpus.load_gc_file(path)
        j = data["data"].j if data["kind"] == "point-data" else None
        if j is None:
            raise InputError("eigen expects point-data input")
        ls = gclib.i_eigenspace(j)
        back = gclib.gc_from_isotropic(j.space, ls.basis)
        round_trip = back.matrix == j.matrix
        results = {
            "dim": len(ls.basis),
            "round_trip_exact": round_trip,
            "basis": [[serialize.scalar_to_json(x) for x in v]
                      for v in ls.basis],
        }
        ok = round_trip
        idents = ["eigenspace_round_trip", "maximal_isotropy"]
    elif args.operation == "gk":
        data = corpus.load_gc_file(path)
        if data["kind"] != "triple":
            raise InputError("gk expects a triple input")
        j1, j2 = gclib.gk_from_triple(data["data"])
        back = gclib.extract_bihermitian(j1, j2)
        t = data["data"]
        recovered = (back.g == t.g and back.i_plus == t.i_plus
                     and back.i_minus == t.i_minus and back.b == t.b)
        results = {"pair_valid": True, "bihermitian_recovered": recovered}
        ok = recovered
        idents = ["pair_commutes", "metric_positive_definite",
                  "bihermitian_round_trip"]
    elif args.operation == "moment":
        data = corpus.load_gc_file(path)
        if data["kind"] != "point-data":
            raise InputError("moment expects point-data input")
        res = gclib.moment_residual(data["data"])
        results = {"directions": [
            {"zero": r["zero"],
             "primary": [serialize.scalar_to_json(x) for x in r["primary"]],
             "secondary": [serialize.scalar_to_json(x) for x in r["secondary"]]}
            for r in res]}
        ok = all(r["zero"] for r in res)
        idents = ["moment_condition", "poisson_moment_relation"]
    elif args.operation == "bracket":
        data = corpus.load_gc_file(path)
        if data["kind"] != "bracket":
            raise InputError("bracket expects bracket input")
        d = data["data"]
        vec, cov = gclib.courant_bracket_const(
            d["n"], d["X"], d["xi"], d["Y"], d["zeta"], d["H"])
        results = {"vector": [serialize.scalar_to_json(x) for x in vec],
                   "covector": [serialize.scalar_to_json(x) for x in cov]}
        idents = ["constant_section_bracket"]
    else:
        raise InputError(f"unknown gc operation {args.operation!r}")
    report = _report(f"gc {args.operation}", [path], results,
                     identities=idents)
    _emit(report, args.table)
    return 0 if ok else 1


def cmd_elliptic(args) -> int:
    if args.grid:
        grid, fields = elliptic.read_grid_file(args.grid)
        inputs = [Path(args.grid)]
        jf = (elliptic.AlmostComplexField(grid, fields["J"])
              if "J" in fields else elliptic.constant_j_field(grid))
        fg = elliptic.ScalarPairField(grid, fields["f"], fields["g"])
    else:
        grid = elliptic.square_grid(args.h, args.extent)
        jf = elliptic.constant_j_field(grid)
        fg = elliptic.sample_pair(args.sample, grid)
        inputs = []
    ok = True
    if args.operation == "rc":
        res = elliptic.rc_residual(jf, fg)
        results = {"residuals": res, "h": grid.h,
                   "shape": list(grid.shape), "sample": args.sample}
        idents = ["first_order_system_residual"]
    elif args.operation == "coeffs":
        co = elliptic.elliptic_coefficients(jf)
        import numpy as np
        a = co["a"]
        d = grid.dim
        two_eye_dev = float(np.max(np.abs(a - 2.0 * np.eye(d))))
        asym = float(np.max(np.abs(a - np.swapaxes(a, -1, -2))))
        bmax = float(np.max(np.abs(co["b"])))
        center = tuple(s // 2 for s in grid.shape)
        results = {
            "a_center": [[float(v) for v in row] for row in a[center]],
            "max_deviation_from_2I": two_eye_dev,
            "max_asymmetry": asym,
            "max_first_order_coefficient": bmax,
            "h": grid.h,
        }
        idents = ["coefficient_symmetry", "standard_structure_gives_2I"]
    elif args.operation == "maxcheck":
        center = tuple(s // 2 for s in grid.shape)
        radius = args.radius or (min(grid.shape) // 2 - 2)
        rep = elliptic.max_principle_check(fg.f, grid, center, radius)
        results = {"ball_radius": radius, **rep, "sample": args.sample}
        ok = rep["pass"]
        idents = ["interior_extrema_on_boundary"]
    else:
        raise InputError(f"unknown elliptic operation {args.operation!r}")
    report = _report(f"elliptic {args.operation}", inputs, results,
                     identities=idents)
    _emit(report, args.table)
    return 0 if ok else 1


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="twistcart",
        description="Exact workbench for twisted Cartan-model cohomology, "
                    "generalized complex linear algebra, and grid checks "
                    "of pseudo-holomorphic pairs.")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("cohomology", help="graded and twisted dimensions")
    p.add_argument("model", help="model JSON path or corpus model name")
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--polycap", type=int, default=None)
    p.add_argument("--eta", default=None,
                   help="twisting JSON path or corpus twisting name")
    p.add_argument("--table", action="store_true")
    p.set_defaults(func=cmd_cohomology)

    p = sub.add_parser("spectral", help="filtration pages and convergence")
    p.add_argument("model")
    p.add_argument("eta")
    p.add_argument("--rank", type=int, default=None)
    p.add_argument("--polycap", type=int, default=None)
    p.add_argument("--filtration", choices=("F", "L"), default="F")
    p.add_argument("--maxpage", type=int, default=6)
    p.add_argument("--table", action="store_true")
    p.set_defaults(func=cmd_spectral)

    p = sub.add_parser("gc", help="generalized complex linear algebra")
    p.add_argument("operation",
                   choices=("check", "eigen", "gk", "moment", "bracket"))
    p.add_argument("data", help="data JSON path or corpus gc entry name")
    p.add_argument("--table", action="store_true")
    p.set_defaults(func=cmd_gc)

    p = sub.add_parser("elliptic", help="finite-difference grid checks")
    p.add_argument("operation", choices=("rc", "coeffs", "maxcheck"))
    p.add_argument("--sample", default="z2",
                   help="built-in sample pair (z2, z3, expz, linear-x, bump)")
    p.add_argument("--grid", default=None,
                   help="grid field file (JSON header + CSV rows)")
    p.add_argument("--h", type=float, default=1.0 / 64)
    p.add_argument("--extent", type=float, default=1.0)
    p.add_argument("--radius", type=int, default=None)
    p.add_argument("--table", action="store_true")
    p.set_defaults(func=cmd_elliptic)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UnstableWindow as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (InputError, json.JSONDecodeError, OSError, KeyError,
            ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TwistcartError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
