"""Weighted bipartite graphs embedded on the torus.

A graph is a combinatorial map: every vertex carries the counterclockwise
cyclic order of its incident edge-ends, and every edge carries a Z^2
displacement (the deck transformation of its black-to-white lift) plus the
labels of the faces on its left and right, read while walking from the
black endpoint to the white one.

Faces are recovered by tracing: a directed edge-use keeps its face on the
left, and the next use departs along the predecessor of the arrival end in
the counterclockwise rotation.  Non-contractible faces are allowed; they
simply own more than one traced boundary cycle, which is why faces are
encoded on edges rather than as cycle lists.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .algebra import LaurentPoly, laurent_div_exact

BLACK = "black"
WHITE = "white"

FaceLabel = object  # int or str
EdgeEnd = tuple[int, str]  # (edge id, "black" | "white")
Side = tuple[int, str]  # (edge id, "bw" | "wb"): a directed edge-use

FWD = "bw"
REV = "wb"

OrientedLoop = tuple[Side, ...]


class GraphStructureError(ValueError):
    """Raised for malformed graphs where an operation cannot proceed."""


class FaceLabelError(GraphStructureError):
    """Raised when traced boundary cycles see inconsistent face labels."""


@dataclass(frozen=True)
class Edge:
    black: int
    white: int
    dx: int
    dy: int
    face_left: FaceLabel
    face_right: FaceLabel

    def endpoint(self, end: str) -> int:
        return self.black if end == BLACK else self.white

    def other(self, vertex: int) -> int:
        if vertex == self.black:
            return self.white
        if vertex == self.white:
            return self.black
        raise ValueError(f"vertex {vertex} not on edge")

    def displacement(self) -> tuple[int, int]:
        return (self.dx, self.dy)


FROZEN = "frozen"


@dataclass(frozen=True)
class TorusGraph:
    """Immutable bipartite torus graph.

    vertices:  id -> color
    edges:     id -> Edge
    rotations: id -> tuple of (edge id, end) in counterclockwise order
    faces:     label -> weight-variable index, or the FROZEN marker
    """

    vertices: Mapping[int, str]
    edges: Mapping[int, Edge]
    rotations: Mapping[int, tuple[EdgeEnd, ...]]
    faces: Mapping[FaceLabel, object]

    # -- basic queries -------------------------------------------------------

    def color(self, v: int) -> str:
        return self.vertices[v]

    def degree(self, v: int) -> int:
        return len(self.rotations[v])

    def frozen_faces(self) -> set:
        return {f for f, m in self.faces.items() if m == FROZEN}

    def face_var(self, label: FaceLabel):
        m = self.faces[label]
        return None if m == FROZEN else m

    def incident_edges(self, v: int) -> list[int]:
        return [eid for eid, _end in self.rotations[v]]

    def side_face(self, side: Side) -> FaceLabel:
        eid, d = side
        e = self.edges[eid]
        return e.face_left if d == FWD else e.face_right

    def side_tail(self, side: Side) -> int:
        eid, d = side
        e = self.edges[eid]
        return e.black if d == FWD else e.white

    def side_head(self, side: Side) -> int:
        eid, d = side
        e = self.edges[eid]
        return e.white if d == FWD else e.black

    def all_sides(self) -> list[Side]:
        out = []
        for eid in sorted(self.edges):
            out.append((eid, FWD))
            out.append((eid, REV))
        return out

    def next_side_left(self, side: Side) -> Side:
        """Successor along the boundary of the face on this side's left."""
        eid, d = side
        v = self.side_head(side)
        arrival: EdgeEnd = (eid, WHITE if d == FWD else BLACK)
        rot = self.rotations[v]
        i = rot.index(arrival)
        dep_eid, dep_end = rot[(i - 1) % len(rot)]
        return (dep_eid, FWD if dep_end == BLACK else REV)

    # -- construction helpers -------------------------------------------------

    def replace(self, **kw) -> "TorusGraph":
        data = {
            "vertices": dict(self.vertices),
            "edges": dict(self.edges),
            "rotations": dict(self.rotations),
            "faces": dict(self.faces),
        }
        data.update(kw)
        return TorusGraph(**data)


# ---------------------------------------------------------------------------
# face tracing and validation
# ---------------------------------------------------------------------------


def canonical_loop(loop: Iterable[Side]) -> OrientedLoop:
    """Lexicographically least rotation; fixes the starting side."""
    seq = tuple(loop)
    if not seq:
        return seq
    best = min(range(len(seq)), key=lambda i: seq[i:] + seq[:i])
    return seq[best:] + seq[:best]


def trace_faces(g: TorusGraph) -> list[tuple[FaceLabel, OrientedLoop]]:
    """All boundary cycles with their (constant) face label.

    Every directed edge-use lies on exactly one cycle.  Raises
    FaceLabelError if the labels read from the edges disagree along a cycle.
    """
    seen: set[Side] = set()
    cycles: list[tuple[FaceLabel, OrientedLoop]] = []
    for start in g.all_sides():
        if start in seen:
            continue
        cyc = []
        side = start
        label = g.side_face(side)
        while True:
            if g.side_face(side) != label:
                raise FaceLabelError(
                    f"face label changes from {label!r} to {g.side_face(side)!r} along a cycle"
                )
            cyc.append(side)
            seen.add(side)
            side = g.next_side_left(side)
            if side == start:
                break
            if side in seen:
                raise GraphStructureError("face tracing revisited a side without closing")
        cycles.append((label, canonical_loop(cyc)))
    cycles.sort(key=lambda lc: (str(lc[0]), lc[1]))
    return cycles


@dataclass(frozen=True)
class ValidationReport:
    violations: tuple[str, ...]
    vertex_count: int
    edge_count: int
    traced_cycle_count: int
    euler_characteristic: int

    @property
    def valid(self) -> bool:
        return not self.violations

    @property
    def euler_warning(self) -> bool:
        return self.euler_characteristic != 0


def validate(g: TorusGraph) -> ValidationReport:
    """Structural checks; reports violations instead of raising."""
    violations = []
    for eid, e in g.edges.items():
        if g.vertices.get(e.black) != BLACK or g.vertices.get(e.white) != WHITE:
            violations.append(f"edge {eid} does not join a black vertex to a white vertex")
        for f in (e.face_left, e.face_right):
            if f not in g.faces:
                violations.append(f"edge {eid} references unknown face {f!r}")
    expected_ends: dict[int, list[EdgeEnd]] = {v: [] for v in g.vertices}
    for eid, e in g.edges.items():
        if e.black in expected_ends:
            expected_ends[e.black].append((eid, BLACK))
        if e.white in expected_ends:
            expected_ends[e.white].append((eid, WHITE))
    for v in g.vertices:
        rot = list(g.rotations.get(v, ()))
        if sorted(rot) != sorted(expected_ends[v]):
            violations.append(f"rotation at vertex {v} does not list its incident edge-ends")
    n_cycles = 0
    if not violations:
        try:
            cycles = trace_faces(g)
            n_cycles = len(cycles)
            traced_labels = {label for label, _ in cycles}
            declared = set(g.faces)
            if traced_labels != declared:
                violations.append(
                    f"face labels declared {sorted(map(str, declared))} but traced {sorted(map(str, traced_labels))}"
                )
        except (FaceLabelError, GraphStructureError) as exc:
            violations.append(str(exc))
    chi = len(g.vertices) - len(g.edges) + n_cycles
    return ValidationReport(tuple(violations), len(g.vertices), len(g.edges), n_cycles, chi)


# ---------------------------------------------------------------------------
# quiver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Quiver:
    labels: tuple
    matrix: tuple[tuple[int, ...], ...]  # net arrow counts after 2-cycle cancellation
    has_one_cycles: bool

    def entry(self, i_label, j_label) -> int:
        i = self.labels.index(i_label)
        j = self.labels.index(j_label)
        return self.matrix[i][j]

    def is_skew_symmetric(self) -> bool:
        n = len(self.labels)
        return all(self.matrix[i][j] == -self.matrix[j][i] for i in range(n) for j in range(n))


def face_label_sort_key(label):
    return (0, label, "") if isinstance(label, int) else (1, 0, str(label))


def quiver_from_graph(g: TorusGraph) -> Quiver:
    """One arrow per edge, running face_right -> face_left for the
    black-to-white orientation; 2-cycles cancel in the net count and
    1-cycles are flagged rather than counted."""
    labels = tuple(sorted(g.faces, key=face_label_sort_key))
    index = {f: i for i, f in enumerate(labels)}
    n = len(labels)
    b = [[0] * n for _ in range(n)]
    one_cycles = False
    for e in g.edges.values():
        i = index[e.face_right]
        j = index[e.face_left]
        if i == j:
            one_cycles = True
            continue
        b[i][j] += 1
        b[j][i] -= 1
    return Quiver(labels, tuple(tuple(r) for r in b), one_cycles)


# ---------------------------------------------------------------------------
# weights, homology, loops
# ---------------------------------------------------------------------------


def weight_var_name(index) -> str:
    return f"A{index}"


def symbolic_weights(g: TorusGraph) -> dict:
    """Canonical symbolic weights: variable index i carries the symbol A{i}."""
    return {
        m: LaurentPoly.var(weight_var_name(m))
        for m in sorted({v for v in g.faces.values() if v != FROZEN}, key=str)
    }


def face_weight_value(g: TorusGraph, weights: Mapping, label: FaceLabel):
    """Weight of a face; frozen faces weigh 1 in the ambient value domain."""
    var = g.face_var(label)
    if var is None:
        sample = next(iter(weights.values()), Fraction(1))
        if isinstance(sample, LaurentPoly):
            return LaurentPoly.const(1, sample.variables)
        return Fraction(1)
    return weights[var]


def loop_homology(g: TorusGraph, loop: Iterable[Side]) -> tuple[int, int]:
    hx = hy = 0
    for eid, d in loop:
        e = g.edges[eid]
        s = 1 if d == FWD else -1
        hx += s * e.dx
        hy += s * e.dy
    return (hx, hy)


def check_closed_walk(g: TorusGraph, loop: OrientedLoop) -> None:
    if not loop:
        return
    for a, b in zip(loop, loop[1:] + loop[:1]):
        if g.side_head(a) != g.side_tail(b):
            raise GraphStructureError("loop steps do not share endpoints")


def loop_weight(g: TorusGraph, weights: Mapping, loop: Iterable[Side]) -> LaurentPoly:
    """Product over directed edge-uses of (A_i A_j)^(-1) for black-to-white
    uses and (A_i A_j) for white-to-black ones."""
    num = LaurentPoly.const(1)
    den = LaurentPoly.const(1)
    for eid, d in loop:
        e = g.edges[eid]
        f = face_weight_value(g, weights, e.face_left) * face_weight_value(g, weights, e.face_right)
        if d == FWD:
            den = den * f
        else:
            num = num * f
    return laurent_div_exact(num, den)


def loop_vertices(g: TorusGraph, loop: Iterable[Side]) -> set[int]:
    vs: set[int] = set()
    for side in loop:
        vs.add(g.side_tail(side))
        vs.add(g.side_head(side))
    return vs


# ---------------------------------------------------------------------------
# zig-zag loops
# ---------------------------------------------------------------------------


def _zigzag_next(g: TorusGraph, side: Side) -> Side:
    """Turn maximally left at white vertices, maximally right at black."""
    eid, d = side
    v = g.side_head(side)
    arrival: EdgeEnd = (eid, WHITE if d == FWD else BLACK)
    rot = g.rotations[v]
    i = rot.index(arrival)
    step = 1 if g.color(v) == WHITE else -1
    dep_eid, dep_end = rot[(i + step) % len(rot)]
    return (dep_eid, FWD if dep_end == BLACK else REV)


def zigzag_loops(g: TorusGraph) -> list[OrientedLoop]:
    """Zig-zag loops; each directed edge-use lies on exactly one of them."""
    for v in g.vertices:
        if g.degree(v) < 2:
            raise GraphStructureError(f"vertex {v} has degree < 2; zig-zag paths undefined")
    seen: set[Side] = set()
    loops = []
    for start in g.all_sides():
        if start in seen:
            continue
        cyc = []
        side = start
        while True:
            cyc.append(side)
            seen.add(side)
            side = _zigzag_next(g, side)
            if side == start:
                break
            if side in seen:
                raise GraphStructureError("zig-zag walk revisited a side without closing")
        loops.append(canonical_loop(cyc))
    loops.sort()
    return loops


# ---------------------------------------------------------------------------
# gauge transformations
# ---------------------------------------------------------------------------


def gauge_transform(g: TorusGraph, v: int, d: tuple[int, int]) -> TorusGraph:
    """Displacement chart change at one vertex; all loop homology is unchanged."""
    if v not in g.vertices:
        raise GraphStructureError(f"no vertex {v}")
    dx, dy = d
    if (dx, dy) == (0, 0):
        return g
    sign = 1 if g.color(v) == BLACK else -1
    edges = dict(g.edges)
    for eid, _end in g.rotations[v]:
        e = edges[eid]
        edges[eid] = Edge(
            e.black, e.white, e.dx + sign * dx, e.dy + sign * dy, e.face_left, e.face_right
        )
    return g.replace(edges=edges)


# ---------------------------------------------------------------------------
# JSON round trip
# ---------------------------------------------------------------------------


def _label_to_json(label):
    return label


def _label_from_json(label):
    return label


def graph_to_json_dict(g: TorusGraph) -> dict:
    return {
        "vertices": [{"id": v, "color": g.vertices[v]} for v in sorted(g.vertices)],
        "edges": [
            {
                "id": eid,
                "black": e.black,
                "white": e.white,
                "dx": e.dx,
                "dy": e.dy,
                "face_left": _label_to_json(e.face_left),
                "face_right": _label_to_json(e.face_right),
            }
            for eid, e in sorted(g.edges.items())
        ],
        "rotations": {
            str(v): [{"edge": eid, "end": end} for eid, end in g.rotations[v]]
            for v in sorted(g.rotations)
        },
        "faces": {
            str(label): ({"frozen": True} if marker == FROZEN else {"var": marker})
            for label, marker in sorted(g.faces.items(), key=lambda kv: str(kv[0]))
        },
    }


def _parse_face_key(key: str):
    try:
        return int(key)
    except ValueError:
        return key


def graph_from_json_dict(data: dict) -> TorusGraph:
    for key in ("vertices", "edges", "rotations", "faces"):
        if key not in data:
            raise KeyError(key)
    vertices = {int(v["id"]): v["color"] for v in data["vertices"]}
    edges = {}
    for e in data["edges"]:
        edges[int(e["id"])] = Edge(
            int(e["black"]),
            int(e["white"]),
            int(e["dx"]),
            int(e["dy"]),
            _label_from_json(e["face_left"]),
            _label_from_json(e["face_right"]),
        )
    rotations = {
        int(v): tuple((int(x["edge"]), x["end"]) for x in ends)
        for v, ends in data["rotations"].items()
    }
    faces = {}
    for key, marker in data["faces"].items():
        label = _parse_face_key(key)
        faces[label] = FROZEN if marker.get("frozen") else marker["var"]
    return TorusGraph(vertices, edges, rotations, faces)


def graph_to_json(g: TorusGraph) -> str:
    return json.dumps(graph_to_json_dict(g), sort_keys=True, separators=(",", ":"))


def graph_fingerprint(g: TorusGraph) -> str:
    return hashlib.sha256(graph_to_json(g).encode()).hexdigest()[:16]
