"""JSON artifacts: trees, subdivisions, homeomorphisms and reports, with schema validation."""
from __future__ import annotations

import json
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema

from .csst import apply_word
from .errors import SchemaError
from .exact import ZERO, format_dyadic, format_rational, parse_rational
from .tree_core import SimplicialMetricTree

KINDS = ("tree", "subdivision", "homeomorphism", "qv_report", "distortion_fit", "manifest")
_SCHEMA_FILE = {"homeomorphism": "homeomorphism.json"}


@lru_cache(maxsize=None)
def schema(kind: str) -> dict:
    name = _SCHEMA_FILE.get(kind, f"{kind}.json")
    return json.loads(resources.files("qstree").joinpath("schemas", name).read_text())


def validate(doc, kind: str | None = None) -> str:
    """Check ``doc`` against its schema; returns the kind.  Raises SchemaError with a JSON pointer."""
    if kind is None:
        if not isinstance(doc, dict) or doc.get("kind") not in KINDS:
            raise SchemaError("document has no recognised 'kind'", "/kind")
        kind = doc["kind"]
    validator = jsonschema.Draft202012Validator(schema(kind))
    errors = sorted(validator.iter_errors(doc), key=lambda e: list(e.absolute_path))
    if errors:
        e = errors[0]
        pointer = "/" + "/".join(str(p) for p in e.absolute_path)
        raise SchemaError(e.message, pointer)
    return kind


def dumps(doc) -> str:
    return json.dumps(doc, indent=1, ensure_ascii=False) + "\n"


def write(path, doc) -> None:
    Path(path).write_text(dumps(doc))


def read(path, kind: str | None = None) -> dict:
    try:
        doc = json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"invalid JSON: {exc}", "") from exc
    validate(doc, kind)
    return doc


def _fmt_coordinate(x: Fraction) -> str:
    d = x.denominator
    return format_dyadic(x) if d & (d - 1) == 0 else format_rational(x)


def tree_to_json(tree: SimplicialMetricTree) -> dict:
    verts = []
    for v in tree.ids:
        rec: dict = {"id": v}
        if tree.positions is not None:
            x, y = tree.positions[v]
            rec["pos"] = [_fmt_coordinate(x), _fmt_coordinate(y)]
        if v in tree.labels:
            rec["label"] = str(tree.labels[v])
        verts.append(rec)
    edges = []
    for k, e in enumerate(tree.edges):
        rec = {"u": e.u, "v": e.v, "length": format_rational(e.length)}
        if tree.edge_labels is not None:
            lab = tree.edge_labels[k]
            rec["label"] = list(lab) if isinstance(lab, (tuple, list)) else [lab]
        edges.append(rec)
    doc = {"kind": "tree", "metric": tree.metric, "vertices": verts, "edges": edges}
    if tree.marks:
        doc["marks"] = list(tree.marks)
    return doc


def tree_from_json(doc: dict) -> SimplicialMetricTree:
    validate(doc, "tree")
    ids = [r["id"] for r in doc["vertices"]]
    pos = None
    if all("pos" in r for r in doc["vertices"]):
        pos = {r["id"]: (parse_rational(r["pos"][0]), parse_rational(r["pos"][1])) for r in doc["vertices"]}
    labels = {r["id"]: r["label"] for r in doc["vertices"] if "label" in r}
    edges = [(r["u"], r["v"], parse_rational(r["length"])) for r in doc["edges"]]
    elabels = None
    if doc["edges"] and all("label" in r for r in doc["edges"]):
        elabels = [tuple(r["label"]) if len(r["label"]) > 1 else r["label"][0] for r in doc["edges"]]
    return SimplicialMetricTree(ids, edges, doc["metric"], pos, doc.get("marks", ()), labels, elabels)


def subdivision_to_json(seq, tree_file: str | None = None) -> dict:
    doc = {"kind": "subdivision"}
    if tree_file:
        doc["tree_file"] = tree_file
    doc.update(seq.to_json())
    return doc


def subdivision_from_json(doc: dict, tree: SimplicialMetricTree):
    """Rebuild the sequence from the input tree and the stored configuration.

    Returns ``(sequence, mismatches)``; mismatches list the levels whose stored
    cut sets or tiles differ from the rebuilt ones.
    """
    from .subdivision import SubdivisionConfig, build_levels

    validate(doc, "subdivision")
    seq = build_levels(tree, SubdivisionConfig(parse_rational(doc["delta"]), doc["n_max"]))
    fresh = seq.to_json()["levels"]
    mismatches = []
    if len(fresh) != len(doc["levels"]):
        mismatches.append({"pointer": "/levels", "reason": "level count differs"})
    for n, (a, b) in enumerate(zip(doc["levels"], fresh)):
        if sorted(a["V"]) != b["V"]:
            mismatches.append({"pointer": f"/levels/{n}/V", "reason": "cut set differs"})
        if a["tiles"] != b["tiles"]:
            mismatches.append({"pointer": f"/levels/{n}/tiles", "reason": "tiles differ"})
    return seq, mismatches


def homeo_to_json(homeo, subdivision_file: str | None = None) -> dict:
    doc = {"kind": "homeomorphism"}
    if subdivision_file:
        doc["subdivision_file"] = subdivision_file
    doc.update(homeo.to_json())
    return doc


def homeo_from_json(doc: dict, seq):
    from .homeo import TileHomeomorphism

    validate(doc, "homeomorphism")
    words = []
    vwords = []
    images = {}
    for n, lvl in enumerate(doc["levels"]):
        ws = [None] * len(lvl["tiles"])
        for rec in lvl["tiles"]:
            k = rec["tile_id"]
            if k >= len(ws) or ws[k] is not None:
                raise SchemaError(f"tile ids of level {n} are not a permutation", f"/levels/{n}/tiles")
            ws[k] = rec["word"]
        words.append(ws)
        vw = {rec["v"]: rec["word_of_g0"] for rec in lvl["vertices"]}
        vwords.append(vw)
        for v, u in vw.items():
            images[v] = apply_word(u, ZERO)
    return TileHomeomorphism(seq, words, vwords, images, [])


def report_doc(kind: str, payload: dict) -> dict:
    doc = {"kind": kind}
    doc.update(payload)
    return doc
