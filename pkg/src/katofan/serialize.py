"""Structured (``katofan/1``) and Graphviz output, and re-ingestion.

A structured document is ``{"format": "katofan/1", "command": ..., "result": R}``
where ``R`` carries a ``kind`` field: ``monoid``, ``group``, ``faces``,
``fan``, ``hom``, ``snf``, ``membership``, ``report`` or ``list``.
"""

from __future__ import annotations

import json

import jsonschema

from .abelian import FGAbelianGroup
from .fan import Fan, face_label
from .monoid import FineMonoid, MonoidHom, groupify

FORMAT = "katofan/1"

_VEC = {"type": "array", "items": {"type": "integer"}}
_GROUP = {
    "type": "object",
    "required": ["kind", "rank", "torsion"],
    "properties": {"kind": {"const": "group"}, "rank": {"type": "integer", "minimum": 0},
                   "torsion": {"type": "array", "items": {"type": "integer", "minimum": 2}}},
}
_MONOID = {
    "type": "object",
    "required": ["kind", "ambient", "generators"],
    "properties": {"kind": {"const": "monoid"}, "ambient": {"$ref": "#/$defs/group"},
                   "generators": {"type": "array", "items": _VEC}},
}
SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["format", "command", "result"],
    "properties": {
        "format": {"const": FORMAT},
        "command": {"type": "string"},
        "result": {"$ref": "#/$defs/result"},
    },
    "$defs": {
        "group": _GROUP,
        "monoid": _MONOID,
        "hom": {
            "type": "object",
            "required": ["kind", "source", "target", "images"],
            "properties": {"kind": {"const": "hom"}, "source": {"$ref": "#/$defs/monoid"},
                           "target": {"$ref": "#/$defs/monoid"}, "images": {"type": "array", "items": _VEC}},
        },
        "faces": {
            "type": "object",
            "required": ["kind", "monoid", "faces", "order"],
            "properties": {
                "kind": {"const": "faces"},
                "monoid": {"$ref": "#/$defs/monoid"},
                "faces": {"type": "array", "items": {
                    "type": "object", "required": ["indices", "generators"],
                    "properties": {"indices": _VEC, "generators": {"type": "array", "items": _VEC}}}},
                "order": {"type": "array", "items": {"type": "array", "items": {"type": "integer"},
                                                     "minItems": 2, "maxItems": 2}},
            },
        },
        "fan": {
            "type": "object",
            "required": ["kind", "points", "order", "stalks", "genmaps"],
            "properties": {
                "kind": {"const": "fan"},
                "points": {"type": "array", "items": {"type": "string"}},
                "order": {"type": "array", "items": {"type": "array", "items": {"type": "integer"},
                                                     "minItems": 2, "maxItems": 2}},
                "stalks": {"type": "array", "items": {"$ref": "#/$defs/monoid"}},
                "genmaps": {"type": "array", "items": {
                    "type": "object", "required": ["from", "to", "images"],
                    "properties": {"from": {"type": "integer"}, "to": {"type": "integer"},
                                   "images": {"type": "array", "items": _VEC}}}},
            },
        },
        "snf": {
            "type": "object",
            "required": ["kind", "U", "D", "V"],
            "properties": {"kind": {"const": "snf"}, "U": {"type": "array"}, "D": {"type": "array"},
                           "V": {"type": "array"}},
        },
        "membership": {
            "type": "object",
            "required": ["kind", "element", "status"],
            "properties": {"kind": {"const": "membership"}, "element": _VEC,
                           "status": {"enum": ["true", "false", "unknown"]},
                           "certificate": {"anyOf": [_VEC, {"type": "null"}]},
                           "bound": {"anyOf": [{"type": "integer"}, {"type": "null"}]}},
        },
        "report": {
            "type": "object",
            "required": ["kind", "flags", "verdict"],
            "properties": {"kind": {"const": "report"}, "flags": {"type": "object"},
                           "verdict": {"type": "string"}},
        },
        "list": {
            "type": "object",
            "required": ["kind", "items"],
            "properties": {"kind": {"const": "list"}, "items": {"type": "array",
                                                               "items": {"$ref": "#/$defs/result"}}},
        },
        "result": {"anyOf": [{"$ref": f"#/$defs/{k}"} for k in
                             ("group", "monoid", "hom", "faces", "fan", "snf", "membership", "report", "list")]},
    },
}


def validate(doc: dict):
    jsonschema.validate(doc, SCHEMA)


# -- to trees --------------------------------------------------------------------------------

def group_tree(g: FGAbelianGroup) -> dict:
    return {"kind": "group", "rank": g.rank, "torsion": list(g.torsion)}


def monoid_tree(m: FineMonoid) -> dict:
    return {"kind": "monoid", "ambient": group_tree(m.ambient), "generators": [list(g) for g in m.generators]}


def hom_tree(h: MonoidHom) -> dict:
    return {"kind": "hom", "source": monoid_tree(h.source), "target": monoid_tree(h.target),
            "images": [list(x) for x in h.images]}


def faces_tree(m: FineMonoid) -> dict:
    fs = list(m.faces)
    order = [[i, j] for i, f in enumerate(fs) for j, g in enumerate(fs) if i != j and f <= g]
    return {"kind": "faces", "monoid": monoid_tree(m),
            "faces": [{"indices": list(face_label(f)), "generators": [list(g) for g in f.generators]} for f in fs],
            "order": order}


def point_name(p) -> str:
    return json.dumps(p, default=repr) if not isinstance(p, str) else p


def fan_tree(x: Fan) -> dict:
    pts = x.canonical_order()
    idx = {p: i for i, p in enumerate(pts)}
    pairs = sorted((idx[u], idx[v]) for u, v in x.genmaps)
    return {"kind": "fan", "points": [point_name(p) for p in pts],
            "order": [list(p) for p in pairs],
            "stalks": [monoid_tree(x.stalks[p]) for p in pts],
            "genmaps": [{"from": i, "to": j, "images": [list(v) for v in x.genmaps[(pts[i], pts[j])].images]}
                        for i, j in pairs]}


def report_tree(flags: dict, verdict: str) -> dict:
    return {"kind": "report", "flags": flags, "verdict": verdict}


def document(command: str, result: dict) -> dict:
    doc = {"format": FORMAT, "command": command, "result": result}
    validate(doc)
    return doc


# -- from trees ------------------------------------------------------------------------------

def ingest(tree: dict):
    """Rebuild a library object from a result tree (monoid, group, hom, faces, fan)."""
    if "format" in tree:
        if tree["format"] != FORMAT:
            raise ValueError(f"unsupported format {tree['format']!r}")
        validate(tree)
        tree = tree["result"]
    kind = tree.get("kind")
    if kind == "group":
        return FGAbelianGroup(tree["rank"], tuple(tree["torsion"]))
    if kind == "monoid":
        return FineMonoid(ingest(tree["ambient"]), [tuple(g) for g in tree["generators"]])
    if kind == "hom":
        return MonoidHom(ingest(tree["source"]), ingest(tree["target"]), [tuple(x) for x in tree["images"]])
    if kind == "faces":
        return ingest(tree["monoid"])
    if kind == "fan":
        pts = tree["points"]
        stalks = {p: ingest(s) for p, s in zip(pts, tree["stalks"])}
        gm = {}
        for g in tree["genmaps"]:
            u, v = pts[g["from"]], pts[g["to"]]
            gm[(u, v)] = MonoidHom(stalks[u], stalks[v], [tuple(x) for x in g["images"]], check=False)
        return Fan(pts, stalks, gm)
    raise ValueError(f"cannot ingest a result of kind {kind!r}")


# -- dot -------------------------------------------------------------------------------------

def _dot(name: str, labels: list[str], edges: list[tuple[int, int]]) -> str:
    lines = [f"digraph {json.dumps(name)} {{", "  rankdir=BT;"]
    for i, lab in enumerate(labels):
        lines.append(f"  n{i} [label={json.dumps(lab)}];")
    for i, j in edges:
        lines.append(f"  n{i} -> n{j};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _hasse(n: int, less) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(n)
            if i != j and less(i, j) and not any(less(i, k) and less(k, j) for k in range(n) if k not in (i, j))]


def faces_dot(m: FineMonoid, name: str = "faces") -> str:
    fs = list(m.faces)
    labels = ["{" + ", ".join(str(g) for g in f.generators) + "}" for f in fs]
    return _dot(name, labels, _hasse(len(fs), lambda i, j: fs[i] <= fs[j] and fs[i] != fs[j]))


def fan_dot(x: Fan, name: str = "fan") -> str:
    pts = x.canonical_order()
    idx = {p: i for i, p in enumerate(pts)}
    labels = [f"{point_name(p)}\n{groupify(x.stalks[p])}" for p in pts]
    return _dot(name, labels, sorted((idx[u], idx[v]) for u, v in x.covers()))
