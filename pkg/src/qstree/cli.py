"""Command-line front end: ``qstree <subcommand> ...``."""
from __future__ import annotations

import argparse
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__, serialize
from .csst import render_svg
from .errors import NoFeasibleDelta, QsTreeError, SchemaError
from .exact import parse_rational

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CALIBRATION = 2
EXIT_ISOMORPHISM = 3
EXIT_PROPERTIES = 4
EXIT_IMAGE_QV = 5
EXIT_VERIFY = 6
EXIT_SCHEMA = 7

CLI_BUDGET_LEVEL = 8

STAGE_EXIT = {"isomorphism": EXIT_ISOMORPHISM, "refinement-properties": EXIT_PROPERTIES,
              "image-quasivisual": EXIT_IMAGE_QV}


def _grid(text: str) -> list[Fraction]:
    return [parse_rational(s.strip()) for s in text.split(",") if s.strip()]


def load_tree(args):
    """Tree from ``--tree FILE`` or ``--model SPEC`` (jn:N, perturbed:N[:LO,HI], random:SIZE)."""
    from .generators import make_model

    if getattr(args, "tree", None):
        return serialize.tree_from_json(serialize.read(args.tree, "tree"))
    spec = args.model
    kind, _, rest = spec.partition(":")
    parts = rest.split(":") if rest else []
    budget = args.budget_words
    if kind == "jn":
        return make_model("jn", n=int(parts[0]), budget_level=budget)
    if kind == "perturbed":
        lo, hi = (parse_rational(x) for x in (parts[1].split(",") if len(parts) > 1 else ("1", "2")))
        return make_model("perturbed", n=int(parts[0]), factor_range=(lo, hi), seed=args.seed,
                          budget_level=budget)
    if kind == "random":
        return make_model("random_trivalent", size=int(parts[0]), seed=args.seed)
    raise SystemExit(f"unknown model {spec!r}")


def _inputs(args) -> list[str]:
    return [args.tree] if getattr(args, "tree", None) else [f"model:{args.model}"]


def _emit(doc, out: str | None):
    text = serialize.dumps(doc)
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _manifest(args, subcommand: str, inputs, outputs, status, started) -> dict:
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func",)}
    return {
        "kind": "manifest",
        "subcommand": subcommand,
        "inputs": list(inputs),
        "config": config,
        "outputs": list(outputs),
        "version": __version__,
        "status": status,
        "wall_clock_seconds": round(time.monotonic() - started, 3),
    }


# ---- subcommands ------------------------------------------------------------------------


def cmd_render(args) -> int:
    svg = render_svg(args.level, args.budget_words)
    if args.out:
        Path(args.out).write_text(svg)
    else:
        sys.stdout.write(svg)
    return EXIT_OK


def cmd_subdivide(args) -> int:
    from .subdivision import SubdivisionConfig, build_levels, calibrate_delta, verify_decomposition_properties

    tree = load_tree(args)
    if args.delta:
        seq = build_levels(tree, SubdivisionConfig(parse_rational(args.delta), args.levels))
        rep = verify_decomposition_properties(seq)
    else:
        try:
            cal = calibrate_delta(tree, args.levels, _grid(args.delta_grid))
        except NoFeasibleDelta as exc:
            print(f"calibration failed: {exc}", file=sys.stderr)
            return EXIT_CALIBRATION
        seq, rep = cal.sequence, cal.report
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
        serialize.write(out / "tree.json", serialize.tree_to_json(tree))
        serialize.write(out / "subdivision.json", serialize.subdivision_to_json(seq, "tree.json"))
        serialize.write(out / "decomposition_report.json", rep.to_json())
    else:
        _emit(rep.to_json(), None)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_verify_qv(args) -> int:
    from .quasivisual import WordCover, check_quasivisual, check_visual
    from .subdivision import SubdivisionConfig, build_levels

    if args.csst_levels is not None:
        cover = WordCover.uniform(args.csst_levels)
        scale = Fraction(1)
    else:
        tree = load_tree(args)
        seq = build_levels(tree, SubdivisionConfig(parse_rational(args.delta or "1/2"), args.levels))
        cover = seq.cover()
        scale = seq.unit
    rep = check_quasivisual(cover)
    doc = serialize.report_doc("qv_report", rep.to_json())
    if args.delta:
        doc["visual"] = check_visual(cover, parse_rational(args.delta), scale=scale).to_json()
    _emit(doc, args.out)
    return EXIT_OK if rep.ok else EXIT_VERIFY


def cmd_homeo(args) -> int:
    from .homeo import evaluate, refine_homeo, verify_isomorphism
    from .subdivision import calibrate_delta

    tree = load_tree(args)
    try:
        cal = calibrate_delta(tree, args.levels, _grid(args.delta_grid))
    except NoFeasibleDelta as exc:
        print(f"calibration failed: {exc}", file=sys.stderr)
        return EXIT_CALIBRATION
    homeo = refine_homeo(cal.sequence, args.levels, cal.report)
    iso = verify_isomorphism(cal.sequence, homeo)
    if args.evaluate is not None:
        depth = args.depth if args.depth is not None else homeo.depth
        _emit(evaluate(homeo, args.evaluate, depth).to_json(), args.out)
        return EXIT_OK
    doc = serialize.homeo_to_json(homeo)
    doc_out = {"homeomorphism": doc, "isomorphism": iso.to_json()}
    _emit(doc_out if not args.out else doc, args.out)
    return EXIT_OK if iso.passed else EXIT_ISOMORPHISM


def cmd_pipeline(args) -> int:
    from .homeo import end_to_end

    started = time.monotonic()
    out = Path(args.out or "qstree-run")
    out.mkdir(parents=True, exist_ok=True)
    tree = load_tree(args)
    outputs = ["tree.json"]
    serialize.write(out / "tree.json", serialize.tree_to_json(tree))
    status: dict = {}
    code = EXIT_OK
    try:
        res = end_to_end(tree, _grid(args.delta_grid), args.levels, budget=args.triples, seed=args.seed)
    except NoFeasibleDelta as exc:
        status = {"stage": "calibration", "pass": False, "message": str(exc)}
        code = EXIT_CALIBRATION
    else:
        files = {
            "subdivision.json": serialize.subdivision_to_json(res.sequence, "tree.json"),
            "decomposition_report.json": res.calibration.report.to_json(),
            "homeomorphism.json": serialize.homeo_to_json(res.homeo, "subdivision.json"),
            "isomorphism_report.json": {"isomorphism": res.isomorphism.to_json(),
                                        "refinement_properties": res.properties.to_json()},
            "qv_report.json": serialize.report_doc("qv_report", res.image_qv.to_json()),
            "distortion_fit.json": serialize.report_doc("distortion_fit", res.distortion.to_json()),
        }
        for name, doc in files.items():
            serialize.write(out / name, doc)
            outputs.append(name)
        stage = res.failing_stage()
        status = {"stage": stage or "done", "pass": res.ok, "delta": str(res.calibration.delta)}
        code = STAGE_EXIT.get(stage, EXIT_OK) if stage else EXIT_OK
    outputs.append("manifest.json")
    serialize.write(out / "manifest.json", _manifest(args, "pipeline", _inputs(args), outputs, status, started))
    if code != EXIT_OK:
        print(f"pipeline failed at stage {status.get('stage')}", file=sys.stderr)
    return code


def cmd_eta(args) -> int:
    from .exact import Surd
    from .quasivisual import fit_distortion

    tree = load_tree(args)
    pts = list(tree.branch_points) if args.points == "branch" else list(tree.ids)
    d1 = tree.distance
    if args.compare == "euclidean":
        if tree.positions is None:
            raise SystemExit("tree has no positions")

        def d2(x, y):
            return Surd(tree._pos_dist_sq(x, y))
    else:
        power = parse_rational(args.power)

        def d2(x, y):
            return float(tree.distance(x, y)) ** float(power)
    fit = fit_distortion(pts, d1, d2, budget=args.triples, seed=args.seed)
    _emit(serialize.report_doc("distortion_fit", fit.to_json()), args.out)
    return EXIT_OK


def _crt_one(m: int, seed: int, eps: str):
    from .generators import brownian_excursion, crt_quotient
    from .tree_core import geometric_constants

    ex = brownian_excursion(m, seed)
    tree = crt_quotient(ex, parse_rational(eps))
    gc = geometric_constants(tree, seed=seed)
    degs = sorted({tree.degree(v) for v in tree.ids})
    return ex, tree, {
        "seed": seed,
        "m": m,
        "vertices": len(tree),
        "branch_points": len(tree.branch_points),
        "max_degree": degs[-1],
        "separation": None if gc.separation is None else str(gc.separation),
        "separation_decimal": None if gc.separation is None else f"{float(gc.separation):.6g}",
        "doubling_estimate": gc.doubling_estimate,
    }


def cmd_crt(args) -> int:
    seeds = list(range(args.seed, args.seed + args.seeds))
    out = Path(args.out) if args.out else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    if args.jobs > 1 and len(seeds) > 1:
        with ProcessPoolExecutor(args.jobs) as pool:
            results = list(pool.map(_crt_one, [args.m] * len(seeds), seeds, [args.eps] * len(seeds)))
    else:
        results = [_crt_one(args.m, s, args.eps) for s in seeds]
    rows = []
    for ex, tree, row in results:
        rows.append(row)
        if out:
            (out / f"excursion_{row['seed']}.csv").write_text(ex.to_csv())
            serialize.write(out / f"crt_tree_{row['seed']}.json", serialize.tree_to_json(tree))
    doc = {"m": args.m, "eps": args.eps, "samples": rows}
    _emit(doc, str(out / "crt_constants.json") if out else None)
    return EXIT_OK


def cmd_verify(args) -> int:
    from .homeo import check_refinement_properties, verify_isomorphism
    from .subdivision import verify_decomposition_properties

    path = Path(args.path)
    base = path if path.is_dir() else path.parent
    report: dict = {}
    ok = True
    try:
        if path.is_dir():
            targets = [p for p in ("subdivision.json", "homeomorphism.json", "qv_report.json",
                                   "distortion_fit.json", "manifest.json") if (path / p).exists()]
            docs = {p: serialize.read(path / p) for p in targets}
        else:
            doc = serialize.read(path)
            docs = {path.name: doc}
        kinds = {d["kind"]: d for d in docs.values()}
        seq = None
        sub = kinds.get("subdivision")
        homeo_doc = kinds.get("homeomorphism")
        if homeo_doc is not None and sub is None:
            ref = homeo_doc.get("subdivision_file", "subdivision.json")
            sub = serialize.read(base / ref, "subdivision")
        if sub is not None:
            tree = serialize.tree_from_json(serialize.read(base / sub.get("tree_file", "tree.json"), "tree"))
            seq, mism = serialize.subdivision_from_json(sub, tree)
            rep = verify_decomposition_properties(seq)
            report["subdivision"] = {"stored_matches_rebuild": not mism, "mismatches": mism,
                                     "properties": {k: v.passed for k, v in rep.properties.items()}}
            ok &= not mism and rep.ok
        if homeo_doc is not None:
            homeo = serialize.homeo_from_json(homeo_doc, seq)
            iso = verify_isomorphism(seq, homeo)
            props = check_refinement_properties(seq, homeo, rep.N)
            report["homeomorphism"] = {"isomorphism": iso.to_json(), "refinement_properties": props.to_json()}
            ok &= iso.passed and props.passed
        if "qv_report" in kinds:
            report["qv_report"] = {"schema": "ok", "pass": kinds["qv_report"]["pass"]}
            if homeo_doc is not None:
                from .quasivisual import check_quasivisual

                fresh = check_quasivisual(homeo.image_cover())
                same = fresh.to_json() == {k: v for k, v in kinds["qv_report"].items() if k != "kind"}
                report["qv_report"].update({"replayed_pass": fresh.ok, "matches_replay": same})
                ok &= fresh.ok and same
            else:
                ok &= bool(kinds["qv_report"]["pass"])
        for k in ("distortion_fit", "manifest"):
            if k in kinds:
                report[k] = {"schema": "ok"}
    except SchemaError as exc:
        print(json.dumps({"schema_error": str(exc), "pointer": exc.pointer}))
        return EXIT_SCHEMA
    report["pass"] = bool(ok)
    sys.stdout.write(serialize.dumps(report))
    return EXIT_OK if ok else EXIT_VERIFY


# ---- parser ------------------------------------------------------------------------------


def _add_tree_args(p):
    g = p.add_mutually_exclusive_group()
    g.add_argument("--tree", help="tree JSON file")
    g.add_argument("--model", default="jn:8", help="jn:N, perturbed:N[:LO,HI] or random:SIZE (default jn:8)")


def _add_common(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget-words", type=int, default=CLI_BUDGET_LEVEL,
                   help=f"largest word level any model may build (default {CLI_BUDGET_LEVEL})")
    p.add_argument("--out")
    p.add_argument("--jobs", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qstree", description=__doc__)
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("render", help="SVG of the approximant J_n")
    p.add_argument("--level", type=int, required=True)
    _add_common(p)
    p.set_defaults(func=cmd_render)

    for name, func, hlp in (("subdivide", cmd_subdivide, "height-graded subdivision and its properties"),
                            ("homeo", cmd_homeo, "tile-homeomorphism onto word tiles"),
                            ("pipeline", cmd_pipeline, "calibrate, subdivide, map, verify and fit")):
        p = sub.add_parser(name, help=hlp)
        _add_tree_args(p)
        p.add_argument("--delta-grid", default="1/2,1/4,1/8,1/16")
        p.add_argument("--levels", type=int, default=3)
        p.add_argument("--triples", type=int, default=5000, help="triples sampled by the distortion fit")
        _add_common(p)
        if name == "subdivide":
            p.add_argument("--delta", help="use this delta instead of calibrating")
        if name == "homeo":
            p.add_argument("--evaluate", type=int, help="vertex id to evaluate")
            p.add_argument("--depth", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("verify-qv", help="quasi-visual conditions of a level cover")
    _add_tree_args(p)
    p.add_argument("--delta", help="delta for the subdivision and the visual check")
    p.add_argument("--levels", type=int, default=3)
    p.add_argument("--csst-levels", type=int, help="check the word-tile cover of levels 0..N instead")
    _add_common(p)
    p.set_defaults(func=cmd_verify_qv)

    p = sub.add_parser("eta", help="fit a power distortion between two metrics on one tree")
    _add_tree_args(p)
    p.add_argument("--compare", choices=("euclidean", "snowflake"), default="euclidean")
    p.add_argument("--power", default="1/2", help="exponent for --compare snowflake")
    p.add_argument("--points", choices=("branch", "all"), default="branch")
    p.add_argument("--triples", type=int, default=5000)
    _add_common(p)
    p.set_defaults(func=cmd_eta)

    p = sub.add_parser("crt", help="discretized Brownian excursion trees and their constants")
    p.add_argument("--m", type=int, default=1024)
    p.add_argument("--seeds", type=int, default=1, help="number of consecutive seeds from --seed")
    p.add_argument("--eps", default="0")
    _add_common(p)
    p.set_defaults(func=cmd_crt)

    p = sub.add_parser("verify", help="re-verify a stored artifact file or pipeline directory")
    p.add_argument("path")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SchemaError as exc:
        print(json.dumps({"schema_error": str(exc), "pointer": exc.pointer}))
        return EXIT_SCHEMA
    except QsTreeError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
