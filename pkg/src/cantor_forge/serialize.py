"""Canonical JSON/CSV serialization for the toolkit's file formats.

PointSet JSON uses arbitrary-precision integers as decimal strings:
    {"dim": d, "points": [[["num","den"], ...], ...], "labels": [...]}
Graph JSON stores edges as id pairs; squared lengths are recomputed on load,
never trusted. All writers emit byte-stable output (sorted keys, fixed
separators) so identical inputs produce identical artifact files.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .geometry import PointSet


def dumps_canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def write_json(path: str, obj) -> None:
    with open(path, "w") as fh:
        fh.write(dumps_canonical(obj))


def read_json(path: str):
    with open(path) as fh:
        return json.load(fh)


def frac_pair(x: Fraction) -> list[str]:
    return [str(x.numerator), str(x.denominator)]


def frac_from_pair(pair) -> Fraction:
    return Fraction(int(pair[0]), int(pair[1]))


def pointset_to_dict(ps: PointSet) -> dict:
    doc = {
        "dim": ps.dim,
        "points": [[frac_pair(c) for c in p] for p in ps.points],
    }
    if ps.labels is not None:
        doc["labels"] = ps.labels
    return doc


def pointset_from_dict(doc) -> PointSet:
    points = [tuple(frac_from_pair(c) for c in p) for p in doc["points"]]
    return PointSet(int(doc["dim"]), points, doc.get("labels"))


def pointset_to_csv(ps: PointSet) -> str:
    lines = []
    for i, p in enumerate(ps.points):
        row = [f"{c.numerator}/{c.denominator}" for c in p]
        if ps.labels is not None:
            row.append(ps.labels[i])
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def pointset_from_csv(text: str, dim: int | None = None) -> PointSet:
    points = []
    labels = []
    has_labels = False
    for line in text.strip().splitlines():
        cells = line.split(",")
        if dim is None:
            # label column present iff last cell is not a fraction
            try:
                Fraction(cells[-1])
                dim = len(cells)
            except ValueError:
                dim = len(cells) - 1
                has_labels = True
        coord_cells = cells[:dim]
        points.append(tuple(Fraction(c) for c in coord_cells))
        if has_labels or len(cells) > dim:
            has_labels = True
            labels.append(cells[dim])
    return PointSet(dim, points, labels if has_labels else None)


def graph_to_dict(points: PointSet, edges) -> dict:
    return {
        "points": pointset_to_dict(points),
        "edges": [[int(u), int(v)] for u, v in edges],
    }


def graph_from_dict(doc):
    ps = pointset_from_dict(doc["points"])
    edges = [(int(u), int(v)) for u, v in doc["edges"]]
    return ps, edges
