"""Canonical JSON files for covering surfaces.

Keys are sorted, reals are written with 17 significant digits and every
top-level section sits on its own line, so saving a loaded file reproduces
it byte for byte and a truncated file still tells which section is missing.
"""
from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .sphgeo import Circle, CircularArc, SpecialSet, SpherePoint
from .surface import CoveringSurface
from .triangulate import BetaPath, SphereTriangulation

VERSION = "1"
SECTIONS = ("beta", "boundary", "cells", "meta", "special", "sphere")


class FileFormatError(ValueError):
    pass


# -- canonical text --------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, dict):
        return "{" + ",".join(json.dumps(str(k)) + ":" + _fmt(x[k]) for k in sorted(x)) + "}"
    if isinstance(x, (list, tuple)):
        return "[" + ",".join(_fmt(v) for v in x) + "]"
    if isinstance(x, (bool, np.bool_)) or x is None:
        return json.dumps(None if x is None else bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % float(x)
    if isinstance(x, str):
        return json.dumps(x)
    raise TypeError(f"cannot serialise {type(x).__name__}")


def dumps(doc: dict) -> str:
    lines = [json.dumps(k) + ":" + _fmt(doc[k]) for k in sorted(doc)]
    return "{\n" + ",\n".join(lines) + "\n}\n"


# -- encoding ------------------------------------------------------------------

def _pt(p: SpherePoint) -> list[float]:
    return [p.x, p.y, p.z]


def _arc(a: CircularArc) -> dict:
    return {"axis": list(a.circle.axis), "height": a.circle.height, "orientation": a.orientation,
            "full": a.full_circle, "start": _pt(a.start), "end": _pt(a.end)}


def to_document(S: CoveringSurface, E: SpecialSet | None = None) -> dict:
    B = S.base
    sphere = {
        "vertices": [_pt(p) for p in B.vertices],
        "edges": [[u, v, list(a.circle.axis), a.circle.height, a.orientation, a.full_circle]
                  for u, v, a in B.edges],
        "faces": B.faces.tolist(),
        "face_edges": B.face_edges.tolist(),
        "constraint_edges": [list(c) for c in B.constraint_edges],
        "constraint_arcs": [_arc(a) for a in B.constraint_arcs],
        "stats": {k: int(v) for k, v in B.stats.items()},
    }
    beta = {"segments": [list(s) for s in B.beta_segment_edges], "path": None}
    if B.beta is not None:
        beta["path"] = {"ordering": list(B.beta.ordering), "segments": [_arc(a) for a in B.beta.segments],
                        "axis_pair": [_pt(p) for p in B.beta.axis_pair], "points": [_pt(p) for p in B.beta.points]}
    special = {"vertices": list(B.special_vertices),
               "order": list(B.beta.ordering) if B.beta is not None else list(range(len(B.special_vertices))),
               "points": None if E is None else [_pt(p) for p in E.points]}
    cells = {"label": S.label.tolist(), "twin": S.twin.tolist(),
             "slots": None if S.slots is None else S.slots.tolist()}
    cycle = S.boundary_cycle if S.topology == "disk" else []
    boundary = {"cycle": [int(h) for h in cycle], "marks": list(S.marks), "arc_assignment": list(S.arc_assignment)}
    meta = {"version": VERSION, "topology": S.topology}
    for k, v in S.meta.items():
        if isinstance(v, (int, float, str, bool, np.integer, np.floating)):
            meta[k] = v.item() if hasattr(v, "item") else v
    return {"sphere": sphere, "special": special, "beta": beta, "cells": cells, "boundary": boundary, "meta": meta}


def save(S: CoveringSurface, path, E: SpecialSet | None = None) -> None:
    Path(path).write_text(dumps(to_document(S, E)), encoding="utf-8")


# -- decoding ------------------------------------------------------------------

def _point(v) -> SpherePoint:
    return SpherePoint(float(v[0]), float(v[1]), float(v[2]))


def _circle(axis, h) -> Circle:
    return Circle((float(axis[0]), float(axis[1]), float(axis[2])), float(h))


def _arc_from(d: dict) -> CircularArc:
    return CircularArc(_circle(d["axis"], d["height"]), _point(d["start"]), _point(d["end"]),
                       int(d["orientation"]), bool(d["full"]))


def _parse(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        complete = set()
        for line in text.splitlines()[1:]:
            try:
                complete.update(json.loads("{" + line.rstrip().rstrip(",") + "}"))
            except json.JSONDecodeError:
                break
        missing = [s for s in SECTIONS if s not in complete]
        where = f"line {exc.lineno}, column {exc.colno}"
        if missing:
            raise FileFormatError(f"missing section '{missing[0]}' ({where}: {exc.msg})") from None
        raise FileFormatError(f"malformed file at {where}: {exc.msg}") from None
    if not isinstance(doc, dict):
        raise FileFormatError("top level is not an object")
    for s in SECTIONS:
        if s not in doc:
            raise FileFormatError(f"missing section '{s}'")
    return doc


def _field(doc: dict, section: str, key: str):
    try:
        return doc[section][key]
    except (KeyError, TypeError):
        raise FileFormatError(f"section '{section}' lacks field '{key}'") from None


def from_document(doc: dict) -> tuple[CoveringSurface, SpecialSet | None]:
    version = _field(doc, "meta", "version")
    if version != VERSION:
        raise FileFormatError(f"version mismatch: file has {version!r}, reader expects {VERSION!r}")
    try:
        verts = [_point(v) for v in _field(doc, "sphere", "vertices")]
        edges = [(int(u), int(v), CircularArc(_circle(ax, h), verts[int(u)], verts[int(v)], int(o), bool(full)))
                 for u, v, ax, h, o, full in _field(doc, "sphere", "edges")]
        path = _field(doc, "beta", "path")
        beta = None
        if path is not None:
            beta = BetaPath(tuple(int(i) for i in path["ordering"]), tuple(_arc_from(a) for a in path["segments"]),
                            tuple(_point(p) for p in path["axis_pair"]), tuple(_point(p) for p in path["points"]))
        B = SphereTriangulation(
            vertices=verts, edges=edges,
            faces=np.array(_field(doc, "sphere", "faces"), dtype=np.int64),
            face_edges=np.array(_field(doc, "sphere", "face_edges"), dtype=np.int64),
            special_vertices=[int(i) for i in _field(doc, "special", "vertices")],
            beta_segment_edges=[[int(e) for e in s] for s in _field(doc, "beta", "segments")],
            constraint_edges=[[int(e) for e in c] for c in _field(doc, "sphere", "constraint_edges")],
            constraint_arcs=[_arc_from(a) for a in _field(doc, "sphere", "constraint_arcs")],
            beta=beta, stats={k: int(v) for k, v in _field(doc, "sphere", "stats").items()},
        )
        slots = _field(doc, "cells", "slots")
        meta = {k: v for k, v in doc["meta"].items() if k not in ("version", "topology")}
        S = CoveringSurface(B, str(_field(doc, "meta", "topology")),
                            np.array(_field(doc, "cells", "label"), dtype=np.int64),
                            np.array(_field(doc, "cells", "twin"), dtype=np.int64),
                            None if slots is None else np.array(slots, dtype=np.int64),
                            tuple(int(h) for h in _field(doc, "boundary", "marks")),
                            tuple(int(c) for c in _field(doc, "boundary", "arc_assignment")), meta)
    except FileFormatError:
        raise
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise FileFormatError(f"schema violation: {exc}") from None
    pts = _field(doc, "special", "points")
    E = None if pts is None else SpecialSet([_point(p) for p in pts])
    return S, E


def loads(text: str) -> tuple[CoveringSurface, SpecialSet | None]:
    return from_document(_parse(text))


def load_with_special(path) -> tuple[CoveringSurface, SpecialSet | None]:
    return loads(Path(path).read_text(encoding="utf-8"))


def load(path) -> CoveringSurface:
    return load_with_special(path)[0]
