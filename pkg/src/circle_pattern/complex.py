"""Weighted cellular decompositions: the face/edge incidence data model.

Only the face-edge incidence and the edge weights enter any computation.
Vertices are carried as optional metadata.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping

import jsonschema
import numpy as np

HALF_PI = math.pi / 2

COMPLEX_SCHEMA = {
    "type": "object",
    "required": ["num_faces", "edges"],
    "properties": {
        "num_faces": {"type": "integer", "minimum": 1},
        "vertex_count": {"type": "integer", "minimum": 0},
        "edges": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "required": ["id", "faces", "weight"],
                "properties": {
                    "id": {"type": "integer", "minimum": 0},
                    "faces": {
                        "type": "array",
                        "items": {"type": "integer"},
                        "minItems": 2,
                        "maxItems": 2,
                    },
                    "weight": {"type": "number"},
                },
                "additionalProperties": False,
            },
        },
    },
    "additionalProperties": False,
}


class ComplexError(ValueError):
    """Raised for malformed or invalid cell complex documents."""


@dataclass(frozen=True)
class WeightedEdge:
    id: int
    face_a: int
    face_b: int
    weight: float

    @property
    def is_self_adjacent(self) -> bool:
        return self.face_a == self.face_b


@dataclass(frozen=True)
class CellComplex:
    """Faces ``0..num_faces-1`` glued along weighted edges.

    Each edge separates two faces (possibly the same face twice) and carries
    the intersection angle of the two disks meeting across it.  Edges are
    stored sorted by id; every per-face sum runs in that order.

    ``incidence[f]`` lists ``(edge_id, side)`` pairs, side 0 meaning the
    edge's ``face_a`` slot and side 1 its ``face_b`` slot.  A self-adjacent
    edge therefore appears twice in its face's list.
    """

    num_faces: int
    edges: tuple[WeightedEdge, ...]
    vertex_count: int | None = None
    incidence: tuple[tuple[tuple[int, int], ...], ...] = field(
        init=False, repr=False, compare=False
    )

    def __post_init__(self):
        edges = tuple(sorted(self.edges, key=lambda e: e.id))
        object.__setattr__(self, "edges", edges)
        _validate(self.num_faces, edges)
        object.__setattr__(self, "incidence", build_incidence(self.num_faces, edges))
        object.__setattr__(self, "_index", {e.id: i for i, e in enumerate(edges)})
        fa = np.array([e.face_a for e in edges], dtype=np.intp)
        fb = np.array([e.face_b for e in edges], dtype=np.intp)
        w = np.array([e.weight for e in edges], dtype=float)
        cos_w, sin_w = np.cos(w), np.sin(w)
        # bigon sides interleaved by edge: entry 2j is the face_a side of edge j,
        # 2j + 1 its face_b side, so per-face sums run in edge id order
        side_face = np.column_stack([fa, fb]).ravel()
        side_other = np.column_stack([fb, fa]).ravel()
        side_cos, side_sin = np.repeat(cos_w, 2), np.repeat(sin_w, 2)
        for arr in (fa, fb, w, cos_w, sin_w, side_face, side_other, side_cos, side_sin):
            arr.setflags(write=False)
        object.__setattr__(self, "face_a", fa)
        object.__setattr__(self, "face_b", fb)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "cos_w", cos_w)
        object.__setattr__(self, "sin_w", sin_w)
        object.__setattr__(self, "side_face", side_face)
        object.__setattr__(self, "side_other", side_other)
        object.__setattr__(self, "side_cos", side_cos)
        object.__setattr__(self, "side_sin", side_sin)

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    @property
    def edge_ids(self) -> tuple[int, ...]:
        return tuple(e.id for e in self.edges)

    def edge(self, edge_id: int) -> WeightedEdge:
        return self.edges[self._index[edge_id]]

    def edge_set_of(self, faces: Iterable[int]) -> frozenset[int]:
        """Ids of the edges touching at least one face in ``faces``."""
        out: set[int] = set()
        for f in faces:
            if not 0 <= f < self.num_faces:
                raise ComplexError(f"face {f} out of range [0, {self.num_faces})")
            out.update(eid for eid, _ in self.incidence[f])
        return frozenset(out)

    def weight_sum(self, edge_ids: Iterable[int]) -> float:
        return math.fsum(self.edge(eid).weight for eid in edge_ids)

    def face_edge_weight_sums(self) -> np.ndarray:
        """Per face, the weight sum over its distinct incident edges."""
        return np.array(
            [self.weight_sum(self.edge_set_of([f])) for f in range(self.num_faces)]
        )

    def to_dict(self) -> dict:
        doc: dict = {"num_faces": self.num_faces}
        if self.vertex_count is not None:
            doc["vertex_count"] = self.vertex_count
        doc["edges"] = [
            {"id": e.id, "faces": [e.face_a, e.face_b], "weight": e.weight}
            for e in self.edges
        ]
        return doc

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def build_incidence(num_faces: int, edges: Iterable[WeightedEdge]):
    inc: list[list[tuple[int, int]]] = [[] for _ in range(num_faces)]
    for e in edges:
        inc[e.face_a].append((e.id, 0))
        inc[e.face_b].append((e.id, 1))
    return tuple(tuple(lst) for lst in inc)


def _validate(num_faces: int, edges: tuple[WeightedEdge, ...]) -> None:
    if num_faces < 1:
        raise ComplexError("num_faces must be positive")
    seen = set()
    touched = set()
    for e in edges:
        if e.id in seen:
            raise ComplexError(f"duplicate edge id {e.id}")
        seen.add(e.id)
        for f in (e.face_a, e.face_b):
            if not 0 <= f < num_faces:
                raise ComplexError(f"edge {e.id}: dangling face id {f}")
            touched.add(f)
        w = e.weight
        # strict bounds, no tolerance
        if not (isinstance(w, (int, float)) and math.isfinite(w) and 0.0 < w < HALF_PI):
            raise ComplexError(f"edge {e.id}: weight out of range (0, pi/2): {w!r}")
    isolated = sorted(set(range(num_faces)) - touched)
    if isolated:
        raise ComplexError(f"isolated face(s): {isolated}")


def parse_complex(document: str | bytes | Mapping) -> CellComplex:
    """Parse and validate a complex from JSON text or an already-decoded mapping."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ComplexError(f"malformed document: {exc}") from exc
    try:
        jsonschema.validate(document, COMPLEX_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = "/".join(str(p) for p in exc.absolute_path)
        raise ComplexError(f"malformed document at '{path}': {exc.message}") from exc
    edges = [
        WeightedEdge(
            id=int(e["id"]),
            face_a=int(e["faces"][0]),
            face_b=int(e["faces"][1]),
            weight=float(e["weight"]),
        )
        for e in document["edges"]
    ]
    return CellComplex(
        num_faces=int(document["num_faces"]),
        edges=tuple(edges),
        vertex_count=document.get("vertex_count"),
    )


def load_complex(path: str | Path) -> CellComplex:
    return parse_complex(Path(path).read_text(encoding="utf-8"))


def edge_set_of(complex: CellComplex, faces: Iterable[int]) -> frozenset[int]:
    return complex.edge_set_of(faces)


def beach_ball(weight: float = math.pi / 3) -> CellComplex:
    """Two faces glued along two edges: the smallest closed pattern."""
    return CellComplex(
        num_faces=2,
        edges=(WeightedEdge(0, 0, 1, weight), WeightedEdge(1, 0, 1, weight)),
    )
