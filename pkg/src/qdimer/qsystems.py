"""Q-system recurrences and the certified torus-graph builders.

Types A and B are implemented straight from the explicit recurrences; for
type B the boundary node evolves at doubled speed.  The builders assemble
the bipartite torus graphs whose face-weight dynamics realizes the
recurrence: a horizontal chain of two-vertex columns for type A, and for
type B the same chain with two four-vertex columns at the fold seam, where
the doubled labels meet.

A builder is correct exactly when its certification passes:

(a) the reference matching is perfect and meets every mutated face in
    exactly one side at the moment it is mutated;
(b) the quiver matches the target exchange matrix (frozen-extended, and
    double-covered for type B), and every graph mutation stays synchronized
    with the corresponding cluster-seed mutation;
(c) the relabeled mutated graph is isomorphic to the original, carrying the
    reference matching onto itself;
(d) the face weights after the relabeled mutation sequence are exactly the
    one-step-evolved weights, as Laurent polynomials in the phase symbols.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .algebra import LaurentPoly, laurent_div_exact
from .cluster import ClusterSeed, exchange_matrix, mutate_matrix, mutate_seed
from .graph import (
    BLACK,
    FROZEN,
    WHITE,
    Edge,
    TorusGraph,
    face_label_sort_key,
    quiver_from_graph,
    validate,
    weight_var_name,
)
from .hamiltonians import HamiltonianTable, hamiltonian_table
from .matchings import is_perfect_matching
from .moves import InductionError, induce_matching, mutate_graph, renewal_preconditions


class BuilderDefect(AssertionError):
    """A builder certification check failed."""


class SingularOrbitError(ArithmeticError):
    pass


# ---------------------------------------------------------------------------
# Cartan data and Q-system recurrences
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CartanSpec:
    type: str  # "A" | "B"
    rank: int

    def __post_init__(self):
        if self.type not in ("A", "B"):
            raise ValueError("type must be A or B")
        if self.rank < 1 or (self.type == "B" and self.rank < 2):
            raise ValueError(f"rank {self.rank} invalid for type {self.type}")

    def cartan_matrix(self) -> tuple[tuple[int, ...], ...]:
        r = self.rank
        c = [[0] * r for _ in range(r)]
        for i in range(r):
            c[i][i] = 2
            if i + 1 < r:
                c[i][i + 1] = -1
                c[i + 1][i] = -1
        if self.type == "B" and r >= 2:
            c[r - 2][r - 1] = -2  # long-to-short entry; symmetrizer t_r = 2
        return tuple(tuple(row) for row in c)

    def symmetrizers(self) -> tuple[int, ...]:
        t = [1] * self.rank
        if self.type == "B":
            t[-1] = 2
        return tuple(t)

    def phase_dim(self) -> int:
        return 2 * self.rank


def qsystem_exchange_matrix(spec: CartanSpec):
    """Exchange matrix of the Q-system seed on the 2r phase variables.

    For type A this is [[0, C], [-C, 0]].  For type B the block form that
    drives the recurrence is [[C^T - C, C], [-C^T, 0]]; it is the unique
    skew-symmetric matrix making the mutation sequence reproduce the
    recurrence and return to itself after the relabeling.
    """
    r = spec.rank
    c = spec.cartan_matrix()
    n = 2 * r
    b = [[0] * n for _ in range(n)]
    for i in range(r):
        for j in range(r):
            b[i][j] = c[j][i] - c[i][j]
            b[i][r + j] = c[i][j]
            b[r + i][j] = -c[j][i]
    return exchange_matrix(b)


@dataclass(frozen=True)
class QState:
    """One window of the recurrence: values Q_{a,k} and Q_{a,k+1} for each
    node (for type B the boundary node stores Q_{r,2k} and Q_{r,2k+1})."""

    spec: CartanSpec
    step: int
    values: Mapping[tuple[int, int], object]  # (node a, layer 0 | 1) -> value

    def value(self, a: int, layer: int):
        if a == 0 or a == self.spec.rank + 1:
            return _one_like_value(next(iter(self.values.values())))
        return self.values[(a, layer)]

    def check_nonzero(self):
        for key, v in self.values.items():
            if isinstance(v, Fraction) and v == 0:
                raise SingularOrbitError(f"zero value at {key}")


def _one_like_value(sample):
    if isinstance(sample, LaurentPoly):
        return LaurentPoly.const(1)
    return Fraction(1)


def _div_values(num, den):
    if isinstance(num, LaurentPoly) or isinstance(den, LaurentPoly):
        if not isinstance(num, LaurentPoly):
            num = LaurentPoly.const(num)
        if not isinstance(den, LaurentPoly):
            den = LaurentPoly.const(den)
        return laurent_div_exact(num, den)
    if den == 0:
        raise SingularOrbitError("division by zero in the recurrence")
    return num / den


def initial_state(spec: CartanSpec, values: Mapping[tuple[int, int], object] | None = None) -> QState:
    if values is None:
        values = {(a, layer): Fraction(1) for a in range(1, spec.rank + 1) for layer in (0, 1)}
    state = QState(spec, 0, dict(values))
    expected = {(a, layer) for a in range(1, spec.rank + 1) for layer in (0, 1)}
    if set(state.values) != expected:
        raise ValueError("initial state must assign exactly the 2r window values")
    state.check_nonzero()
    return state


def q_step(state: QState) -> QState:
    """One forward evolution step (type B advances the boundary node twice)."""
    spec = state.spec
    r = spec.rank
    state.check_nonzero()
    new: dict[tuple[int, int], object] = {}
    if spec.type == "A":
        for a in range(1, r + 1):
            new[(a, 0)] = state.value(a, 1)
        for a in range(1, r + 1):
            num = state.value(a, 1) ** 2 + state.value(a - 1, 1) * state.value(a + 1, 1)
            new[(a, 1)] = _div_values(num, state.value(a, 0))
    else:
        # Q_{r,2k+2} from the boundary relation at odd time 2k+1
        xr = _div_values(
            state.value(r, 1) ** 2 + state.value(r - 1, 0) * state.value(r - 1, 1),
            state.value(r, 0),
        )
        for a in range(1, r):
            new[(a, 0)] = state.value(a, 1)
        new[(r, 0)] = xr
        for a in range(1, r):
            upper = xr if a + 1 == r else state.value(a + 1, 1)
            lower = _one_like_value(xr) if a - 1 == 0 else state.value(a - 1, 1)
            num = state.value(a, 1) ** 2 + lower * upper
            new[(a, 1)] = _div_values(num, state.value(a, 0))
        # Q_{r,2k+3} from the boundary relation at even time 2k+2
        new[(r, 1)] = _div_values(xr**2 + state.value(r - 1, 1) ** 2, state.value(r, 1))
    return QState(spec, state.step + 1, new)


def phase_point(state: QState) -> dict[str, object]:
    """Assignment of the 2r phase symbols A1..A2r from the current window."""
    r = state.spec.rank
    point = {}
    for a in range(1, r + 1):
        point[weight_var_name(a)] = state.values[(a, 0)]
        point[weight_var_name(r + a)] = state.values[(a, 1)]
    return point


def symbolic_state(spec: CartanSpec) -> QState:
    values = {}
    for a in range(1, spec.rank + 1):
        values[(a, 0)] = LaurentPoly.var(weight_var_name(a))
        values[(a, 1)] = LaurentPoly.var(weight_var_name(spec.rank + a))
    return QState(spec, 0, values)


def gamma_closed_form_A(r: int) -> list[LaurentPoly]:
    """Closed-form simple-loop weights for type A, as monomials in A1..A2r.

    The boundary values Q_{0,*} and Q_{r+1,*} are 1 and contribute nothing.
    """
    if r < 1:
        raise ValueError("rank must be >= 1")
    out = []
    for idx in range(1, 2 * r + 2):
        exps: dict[str, int] = {}

        def bump(node, layer, e):
            if 1 <= node <= r:
                name = weight_var_name(node if layer == 0 else r + node)
                exps[name] = exps.get(name, 0) + e

        if idx % 2 == 1:
            a = (idx + 1) // 2  # gamma_{2a-1} = Q_{a-1,k} Q_{a,k+1} / (Q_{a,k} Q_{a-1,k+1})
            bump(a - 1, 0, 1)
            bump(a, 1, 1)
            bump(a, 0, -1)
            bump(a - 1, 1, -1)
        else:
            a = idx // 2  # gamma_{2a} = Q_{a-1,k} Q_{a+1,k+1} / (Q_{a,k} Q_{a,k+1})
            bump(a - 1, 0, 1)
            bump(a + 1, 1, 1)
            bump(a, 0, -1)
            bump(a, 1, -1)
        out.append(LaurentPoly.monomial(1, exps))
    return out


# ---------------------------------------------------------------------------
# builders
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BuilderOutput:
    spec: CartanSpec
    graph: TorusGraph
    m0: frozenset
    weights: dict  # var index -> LaurentPoly in the phase symbols
    mutation_faces: tuple[tuple, ...]  # groups of face labels, mutated in order
    sigma: dict  # phase-index relabeling on [1, 2r]
    pair_of_label: dict  # face label -> phase index in [1, 2r]
    certificate: "BuilderCertificate" = None

    def hamiltonians(self) -> HamiltonianTable:
        return hamiltonian_table(self.graph, self.weights, self.m0)


@dataclass(frozen=True)
class BuilderCertificate:
    mutation_checks: int
    seed_synchronized: bool
    quiver_matches_target: bool
    iso_found: bool
    weights_step: bool


def _sigma_map(spec: CartanSpec) -> dict:
    r = spec.rank
    sigma = {}
    for i in range(1, 2 * r + 1):
        if spec.type == "B" and i in (r, 2 * r):
            sigma[i] = i
        else:
            sigma[i] = (i + r - 1) % (2 * r) + 1
    return sigma


def build_A(r: int, certify: bool = True) -> BuilderOutput:
    """Type-A builder: columns 0..r of two vertices, two chords per gap,
    and the non-contractible frozen face in the leftover strip."""
    if r < 1:
        raise ValueError("rank must be >= 1")
    spec = CartanSpec("A", r)

    def b(p):
        return 2 * p

    def w(p):
        return 2 * p + 1

    def d(p):
        return 4 * p

    def u(p):
        return 4 * p + 1

    def c(p):
        return 4 * p + 2

    def cp(p):
        return 4 * p + 3

    vertices = {}
    for p in range(r + 1):
        vertices[b(p)] = BLACK
        vertices[w(p)] = WHITE

    def lo(gap):  # face label below the chord pair of a gap, or frozen
        return gap if 1 <= gap <= r else 0

    def hi(gap):
        return r + gap if 1 <= gap <= r else 0

    edges = {}
    for p in range(r + 1):
        edges[d(p)] = Edge(b(p), w(p), 0, 0, lo(p + 1), hi(p))
        edges[u(p)] = Edge(b(p), w(p), 0, -1, lo(p), hi(p + 1))
    for p in range(r):
        edges[c(p)] = Edge(b(p), w(p + 1), 0, 0, hi(p + 1), lo(p + 1))
        edges[cp(p)] = Edge(b(p + 1), w(p), 0, -1, hi(p + 1), lo(p + 1))

    rotations = {}
    for p in range(r + 1):
        rot_b = [(u(p), BLACK)]
        if p >= 1:
            rot_b.append((cp(p - 1), BLACK))
        rot_b.append((d(p), BLACK))
        if p < r:
            rot_b.append((c(p), BLACK))
        rotations[b(p)] = tuple(rot_b)
        rot_w = [(d(p), WHITE)]
        if p >= 1:
            rot_w.append((c(p - 1), WHITE))
        rot_w.append((u(p), WHITE))
        if p < r:
            rot_w.append((cp(p), WHITE))
        rotations[w(p)] = tuple(rot_w)

    faces = {0: FROZEN}
    for label in range(1, 2 * r + 1):
        faces[label] = label
    graph = TorusGraph(vertices, edges, rotations, faces)
    m0 = frozenset(u(p) for p in range(r + 1))
    weights = {label: LaurentPoly.var(weight_var_name(label)) for label in range(1, 2 * r + 1)}
    mutation_faces = tuple((k,) for k in range(1, r + 1))
    pair_of_label = {label: label for label in range(1, 2 * r + 1)}
    out = BuilderOutput(spec, graph, m0, weights, mutation_faces, _sigma_map(spec), pair_of_label)
    if certify:
        out = certify_builder(out)
    return out


def target_exchange_matrix_A(r: int):
    """Frozen-extended target for the type-A quiver, labels ordered 0..2r."""
    spec = CartanSpec("A", r)
    core = qsystem_exchange_matrix(spec)
    n = 2 * r + 1
    b = [[0] * n for _ in range(n)]
    for i in range(2 * r):
        for j in range(2 * r):
            b[i + 1][j + 1] = core[i][j]

    def add(i, j, val):
        b[i][j] += val
        b[j][i] -= val

    add(0, 1, 1)
    add(0, r, 1)
    add(0, r + 1, -1)
    add(0, 2 * r, -1)
    return exchange_matrix(b)


def build_B(r: int, certify: bool = True) -> BuilderOutput:
    """Type-B builder: the double-cover chain with two four-vertex columns
    at the fold seam; labels 1..2r are the first copies, 2r+1..4r the
    second, both copies of index i carrying the phase symbol A_i."""
    if r < 2:
        raise ValueError("type B needs rank >= 2")
    spec = CartanSpec("B", r)
    ncols = 2 * r
    h4 = {r - 1, r}

    names_v: list = []
    for j in range(ncols):
        if j in h4:
            names_v += [(j, "bt"), (j, "wt"), (j, "bb"), (j, "wb")]
        else:
            names_v += [(j, "b"), (j, "w")]
    vid = {name: i for i, name in enumerate(names_v)}
    vertices = {vid[name]: (BLACK if name[1].startswith("b") else WHITE) for name in names_v}

    def lo(gap):
        if gap < 1 or gap > 2 * r - 1:
            return 0
        if gap <= r - 1:
            return gap
        if gap == r:
            raise ValueError("the middle has no single gap label")
        return (2 * r - gap) + 2 * r

    def hi(gap):
        if gap < 1 or gap > 2 * r - 1:
            return 0
        if gap <= r - 1:
            return r + gap
        if gap == r:
            raise ValueError("the middle has no single gap label")
        return r + (2 * r - gap) + 2 * r

    W, E = r - 1, r
    hex1, hi1 = lo(r - 1), hi(r - 1)
    hex2, hi2 = lo(r + 1), hi(r + 1)
    R1, S1, R2, S2 = r, 2 * r, 3 * r, 4 * r

    names_e: list = []
    for j in range(ncols):
        if j in h4:
            names_e += [(j, "dt"), (j, "m"), (j, "db"), (j, "u")]
        else:
            names_e += [(j, "d"), (j, "u")]
    for g in range(1, 2 * r):
        if g == r:
            continue
        names_e += [("c", g), ("cp", g)]
    names_e += [("mc", t) for t in ("a", "b", "c", "d")]
    eid = {name: i for i, name in enumerate(names_e)}

    edges = {}
    for j in range(ncols):
        if j in h4:
            continue
        edges[eid[(j, "d")]] = Edge(vid[(j, "b")], vid[(j, "w")], 0, 0, lo(j + 1), hi(j))
        edges[eid[(j, "u")]] = Edge(vid[(j, "b")], vid[(j, "w")], 0, -1, lo(j), hi(j + 1))
    # column W = r-1
    edges[eid[(W, "dt")]] = Edge(vid[(W, "bt")], vid[(W, "wt")], 0, 0, R1, hex1)
    edges[eid[(W, "m")]] = Edge(vid[(W, "bb")], vid[(W, "wt")], 0, 0, hex1, S1)
    edges[eid[(W, "db")]] = Edge(vid[(W, "bb")], vid[(W, "wb")], 0, 0, R2, hi1)
    edges[eid[(W, "u")]] = Edge(vid[(W, "bt")], vid[(W, "wb")], 0, -1, hex1, S2)
    # column E = r
    edges[eid[(E, "dt")]] = Edge(vid[(E, "bt")], vid[(E, "wt")], 0, 0, hex2, S1)
    edges[eid[(E, "m")]] = Edge(vid[(E, "bb")], vid[(E, "wt")], 0, 0, R2, hex2)
    edges[eid[(E, "db")]] = Edge(vid[(E, "bb")], vid[(E, "wb")], 0, 0, hex2, S2)
    edges[eid[(E, "u")]] = Edge(vid[(E, "bt")], vid[(E, "wb")], 0, -1, R1, hi2)
    # ordinary gap chords (both endpoints adapt to column heights)
    for g in range(1, 2 * r):
        if g == r:
            continue
        west, east = g - 1, g
        tail = (west, "b") if west not in h4 else (west, "bt" if west == E else "bb")
        head = (east, "w") if east not in h4 else (east, "wb")
        if west in h4:  # gap r+1: tail bt_E
            tail = (west, "bt")
        edges[eid[("c", g)]] = Edge(vid[tail], vid[head], 0, 0, hi(g), lo(g))
        tail2 = (east, "b") if east not in h4 else (east, "bb")
        head2 = (west, "w") if west not in h4 else (west, "wb")
        edges[eid[("cp", g)]] = Edge(vid[tail2], vid[head2], 0, -1, hi(g), lo(g))
    # middle chords
    edges[eid[("mc", "a")]] = Edge(vid[(E, "bt")], vid[(W, "wt")], 0, 0, S1, R1)
    edges[eid[("mc", "b")]] = Edge(vid[(W, "bt")], vid[(E, "wb")], 0, -1, S2, R1)
    edges[eid[("mc", "c")]] = Edge(vid[(E, "bb")], vid[(W, "wb")], 0, 0, S2, R2)
    edges[eid[("mc", "d")]] = Edge(vid[(W, "bb")], vid[(E, "wt")], 0, 0, S1, R2)

    # rotations from the angular slot model: [N, NW, S, SE]
    def col_of_vertex(name):
        return name[0]

    slot_lists: dict[int, dict[str, tuple[int, str]]] = {v: {} for v in vertices}

    def set_slot(vertex_name, slot, edge_name):
        v = vid[vertex_name]
        e = eid[edge_name]
        end = BLACK if edges[e].black == v else WHITE
        if slot in slot_lists[v]:
            raise BuilderDefect(f"slot collision at {vertex_name}: {slot}")
        slot_lists[v][slot] = (e, end)

    for j in range(ncols):
        if j in h4:
            set_slot((j, "bt"), "N", (j, "u"))
            set_slot((j, "bt"), "S", (j, "dt"))
            set_slot((j, "wt"), "N", (j, "dt"))
            set_slot((j, "wt"), "S", (j, "m"))
            set_slot((j, "bb"), "N", (j, "m"))
            set_slot((j, "bb"), "S", (j, "db"))
            set_slot((j, "wb"), "N", (j, "db"))
            set_slot((j, "wb"), "S", (j, "u"))
        else:
            set_slot((j, "b"), "N", (j, "u"))
            set_slot((j, "b"), "S", (j, "d"))
            set_slot((j, "w"), "N", (j, "d"))
            set_slot((j, "w"), "S", (j, "u"))
    for name in names_e:
        if name[0] in ("c", "cp", "mc"):
            e = edges[eid[name]]
            bname = names_v[e.black]
            wname = names_v[e.white]
            bcol, wcol = col_of_vertex(bname), col_of_vertex(wname)
            set_slot(bname, "SE" if wcol > bcol else "NW", name)
            set_slot(wname, "NW" if wcol > bcol else "SE", name)

    rotations = {}
    for v, slots in slot_lists.items():
        rotations[v] = tuple(slots[s] for s in ("N", "NW", "S", "SE") if s in slots)

    faces = {0: FROZEN}
    for label in range(1, 4 * r + 1):
        faces[label] = label
    graph = TorusGraph(vertices, edges, rotations, faces)

    m0 = set()
    for j in range(ncols):
        if j in h4:
            m0.add(eid[(j, "m")])
            m0.add(eid[(j, "u")])
        else:
            m0.add(eid[(j, "u")])
    m0 = frozenset(m0)

    def pair(label):
        return label if label <= 2 * r else label - 2 * r

    weights = {
        label: LaurentPoly.var(weight_var_name(pair(label))) for label in range(1, 4 * r + 1)
    }
    groups = [(r, 3 * r)]
    groups += [(i, 2 * r + i) for i in range(1, r)]
    groups += [(2 * r, 4 * r)]
    pair_of_label = {label: pair(label) for label in range(1, 4 * r + 1)}
    out = BuilderOutput(
        spec, graph, m0, weights, tuple(groups), _sigma_map(spec), pair_of_label
    )
    if certify:
        out = certify_builder(out)
    return out


def build(spec: CartanSpec, certify: bool = True) -> BuilderOutput:
    if spec.type == "A":
        return build_A(spec.rank, certify=certify)
    return build_B(spec.rank, certify=certify)


# ---------------------------------------------------------------------------
# graph isomorphism of combinatorial maps (rigid dart propagation)
# ---------------------------------------------------------------------------


def _darts(g: TorusGraph):
    out = []
    for e in sorted(g.edges):
        out.append((e, BLACK))
        out.append((e, WHITE))
    return out


def _dart_vertex(g, dart):
    e, end = dart
    return g.edges[e].endpoint(end)


def _dart_alpha(dart):
    e, end = dart
    return (e, WHITE if end == BLACK else BLACK)


def _dart_sigma(g, dart):
    v = _dart_vertex(g, dart)
    rot = g.rotations[v]
    i = rot.index(dart)
    return rot[(i + 1) % len(rot)]


def _edge_holonomy(g: TorusGraph) -> dict[int, tuple[int, int]]:
    """Gauge-invariant cycle data: spanning-tree potentials make tree edges
    zero; the rest report their fundamental-cycle homology class."""
    pot: dict[int, tuple[int, int]] = {}
    tree: set[int] = set()
    for root in sorted(g.vertices):
        if root in pot:
            continue
        pot[root] = (0, 0)
        stack = [root]
        while stack:
            v = stack.pop()
            for e, _end in g.rotations[v]:
                edge = g.edges[e]
                u = edge.other(v)
                if u in pot:
                    continue
                if edge.black == v:
                    pot[u] = (pot[v][0] + edge.dx, pot[v][1] + edge.dy)
                else:
                    pot[u] = (pot[v][0] - edge.dx, pot[v][1] - edge.dy)
                tree.add(e)
                stack.append(u)
    hol = {}
    for e, edge in g.edges.items():
        hol[e] = (
            edge.dx - (pot[edge.white][0] - pot[edge.black][0]),
            edge.dy - (pot[edge.white][1] - pot[edge.black][1]),
        )
    return hol


def map_isomorphisms(g1: TorusGraph, g2: TorusGraph, m1=None, m2=None):
    """Yield dart bijections g1 -> g2 preserving rotations, colors, the
    optional matchings, and all loop homology (up to gauge)."""
    darts1 = _darts(g1)
    if not darts1 or len(g1.edges) != len(g2.edges) or len(g1.vertices) != len(g2.vertices):
        return
    d0 = darts1[0]
    for t0 in _darts(g2):
        phi: dict = {d0: t0}
        stack = [d0]
        ok = True
        while stack and ok:
            d = stack.pop()
            t = phi[d]
            if g1.color(_dart_vertex(g1, d)) != g2.color(_dart_vertex(g2, t)):
                ok = False
                break
            if m1 is not None and ((d[0] in m1) != (t[0] in m2)):
                ok = False
                break
            for nd, nt in ((_dart_alpha(d), _dart_alpha(t)), (_dart_sigma(g1, d), _dart_sigma(g2, t))):
                if nd in phi:
                    if phi[nd] != nt:
                        ok = False
                        break
                else:
                    phi[nd] = nt
                    stack.append(nd)
        if not ok or len(phi) != len(darts1):
            continue
        if len(set(phi.values())) != len(phi):
            continue
        edge_map = {}
        consistent = True
        for (e, end), (e2, end2) in phi.items():
            if e in edge_map and edge_map[e] != e2:
                consistent = False
                break
            edge_map[e] = e2
        if not consistent:
            continue
        if not _holonomy_compatible(g1, g2, edge_map):
            continue
        yield phi, edge_map


def _holonomy_compatible(g1, g2, edge_map) -> bool:
    """Cycle classes agree: check the potential difference is a gauge."""
    # Build potentials on g2 pulled back through the map and compare classes
    # of fundamental cycles of g1 against their images.
    pot1: dict[int, tuple[int, int]] = {}
    pot2: dict[int, tuple[int, int]] = {}
    root = sorted(g1.vertices)[0]
    pot1[root] = (0, 0)
    # map vertices through any dart
    vmap = {}
    for e1, e2 in edge_map.items():
        vmap[g1.edges[e1].black] = g2.edges[e2].black
        vmap[g1.edges[e1].white] = g2.edges[e2].white
    pot2[vmap[root]] = (0, 0)
    stack = [root]
    seen = {root}
    while stack:
        v = stack.pop()
        for e, _end in g1.rotations[v]:
            edge1 = g1.edges[e]
            u = edge1.other(v)
            if u in seen:
                continue
            seen.add(u)
            sign = 1 if edge1.black == v else -1
            pot1[u] = (pot1[v][0] + sign * edge1.dx, pot1[v][1] + sign * edge1.dy)
            edge2 = g2.edges[edge_map[e]]
            pot2[vmap[u]] = (
                pot2[vmap[v]][0] + sign * edge2.dx,
                pot2[vmap[v]][1] + sign * edge2.dy,
            )
            stack.append(u)
    for e, edge1 in g1.edges.items():
        edge2 = g2.edges[edge_map[e]]
        c1 = (
            edge1.dx - (pot1[edge1.white][0] - pot1[edge1.black][0]),
            edge1.dy - (pot1[edge1.white][1] - pot1[edge1.black][1]),
        )
        c2 = (
            edge2.dx - (pot2[edge2.white][0] - pot2[edge2.black][0]),
            edge2.dy - (pot2[edge2.white][1] - pot2[edge2.black][1]),
        )
        if c1 != c2:
            return False
    return True


def induced_face_map(g1: TorusGraph, g2: TorusGraph, edge_map) -> dict | None:
    """Face-label correspondence induced by an edge bijection, if single-valued."""
    fmap: dict = {}
    for e1, e2 in edge_map.items():
        for f1, f2 in (
            (g1.edges[e1].face_left, g2.edges[e2].face_left),
            (g1.edges[e1].face_right, g2.edges[e2].face_right),
        ):
            if f1 in fmap and fmap[f1] != f2:
                return None
            fmap[f1] = f2
    return fmap


# ---------------------------------------------------------------------------
# certification
# ---------------------------------------------------------------------------


def run_mutation_program(out: BuilderOutput, check=True):
    """Apply the builder's mutation sequence, enforcing the hypotheses at
    every step and keeping the cluster seed synchronized with the graph.

    Faces of a group share a phase symbol; their replacement weights are
    computed independently and asserted equal.
    """
    g = out.graph
    weights = dict(out.weights)
    m = out.m0
    quiver = quiver_from_graph(g)
    labels = quiver.labels
    pos = {label: i for i, label in enumerate(labels)}
    seed_vars = tuple(
        LaurentPoly.const(1) if g.faces[label] == FROZEN else weights[g.face_var(label)]
        for label in labels
    )
    seed = ClusterSeed(quiver.matrix, seed_vars, frozenset({pos[0]}))
    checks = 0
    sync = True
    for group in out.mutation_faces:
        group_values = []
        for k in group:
            diag = renewal_preconditions(g, k)
            if check and diag is not None:
                raise BuilderDefect(f"mutation at face {k}: {diag}")
            face_edges = {eid for lab, cyc in _face_cycles(g, k) for eid, _d in cyc}
            hits = [eid for eid in face_edges if eid in m]
            if check and len(hits) != 1:
                raise BuilderDefect(
                    f"reference matching meets face {k} in {len(hits)} sides at its mutation"
                )
            g, weights, records = mutate_graph(g, weights, k)
            rec = records[0]
            if check and rec.warning is not None:
                raise BuilderDefect(f"mutation at face {k}: {rec.warning}")
            new_value = weights[g.face_var(k)]
            group_values.append(new_value)
            if check and not (new_value == group_values[0]):
                raise BuilderDefect(f"face group {group} produced different replacement weights")
            try:
                m = induce_matching(m, records)
            except InductionError as exc:
                raise BuilderDefect(str(exc)) from exc
            if check and not is_perfect_matching(g, m):
                raise BuilderDefect(f"induced matching not perfect after face {k}")
            seed = mutate_seed(seed, pos[k])
            if check and not (seed.variables[pos[k]] == new_value):
                raise BuilderDefect(f"face {k}: graph weight differs from seed exchange")
            q2 = quiver_from_graph(g)
            if q2.labels != labels or q2.matrix != seed.b:
                sync = False
                if check:
                    raise BuilderDefect(f"quiver desynchronized from seed at face {k}")
            checks += 1
    return g, weights, m, seed, checks, sync


def _face_cycles(g, label):
    from .graph import trace_faces

    return [(lab, cyc) for lab, cyc in trace_faces(g) if lab == label]


def relabel_faces(g: TorusGraph, label_map: Mapping) -> TorusGraph:
    """Rename face labels (and their variable indices, which equal labels)."""
    edges = {
        eid: Edge(
            e.black,
            e.white,
            e.dx,
            e.dy,
            label_map.get(e.face_left, e.face_left),
            label_map.get(e.face_right, e.face_right),
        )
        for eid, e in g.edges.items()
    }
    faces = {}
    for label, marker in g.faces.items():
        new = label_map.get(label, label)
        faces[new] = FROZEN if marker == FROZEN else new
    return g.replace(edges=edges, faces=faces)


def certify_builder(out: BuilderOutput) -> BuilderOutput:
    """Run the four certification checks; raise BuilderDefect on failure."""
    report = validate(out.graph)
    if not report.valid:
        raise BuilderDefect(f"builder graph invalid: {report.violations}")
    if not is_perfect_matching(out.graph, out.m0):
        raise BuilderDefect("reference matching is not perfect")

    quiver = quiver_from_graph(out.graph)
    if quiver.has_one_cycles or not quiver.is_skew_symmetric():
        raise BuilderDefect("builder quiver has 1-cycles or is not skew-symmetric")
    if not _quiver_matches_target(out, quiver):
        raise BuilderDefect("builder quiver does not match the target exchange matrix")

    g2, w2, m2, _seed, checks, sync = run_mutation_program(out)

    sigma = out.sigma
    pair = out.pair_of_label
    phase1 = phase_point(q_step(symbolic_state(out.spec)))

    found = False
    for _phi, edge_map in map_isomorphisms(g2, out.graph, m2, out.m0):
        fmap = induced_face_map(g2, out.graph, edge_map)
        if fmap is None:
            continue
        if fmap.get(0) != 0:
            continue
        if any(
            pair[fmap[label]] != sigma[pair[label]] for label in pair if label in fmap
        ):
            continue
        ok = True
        for label in pair:
            expected = phase1[weight_var_name(sigma[pair[label]])]
            if not (w2[label] == expected):
                ok = False
                break
        if ok:
            found = True
            break
    if not found:
        raise BuilderDefect("no relabeling isomorphism matches the evolved weights")

    cert = BuilderCertificate(
        mutation_checks=checks,
        seed_synchronized=sync,
        quiver_matches_target=True,
        iso_found=True,
        weights_step=True,
    )
    return BuilderOutput(
        out.spec,
        out.graph,
        out.m0,
        out.weights,
        out.mutation_faces,
        out.sigma,
        out.pair_of_label,
        cert,
    )


def _quiver_matches_target(out: BuilderOutput, quiver) -> bool:
    spec = out.spec
    if spec.type == "A":
        return quiver.labels == tuple(range(2 * spec.rank + 1)) and quiver.matrix == (
            target_exchange_matrix_A(spec.rank)
        )
    # type B: double-cover projection of the Q-system matrix plus the frozen
    # column touching only the two label-1 copies
    r = spec.rank
    core = qsystem_exchange_matrix(spec)
    labels = quiver.labels
    if labels != tuple(range(4 * r + 1)):
        return False
    pair = out.pair_of_label

    def block_sum(i, j):
        total = 0
        for li in labels[1:]:
            for lj in labels[1:]:
                if pair[li] == i and pair[lj] == j:
                    total += quiver.entry(li, lj)
        return total

    for i in range(1, 2 * r + 1):
        for j in range(1, 2 * r + 1):
            if block_sum(i, j) != 2 * core[i - 1][j - 1]:
                return False
    frozen_row = [quiver.entry(0, lj) for lj in labels[1:]]
    touched = {pair[labels[1:][j]] for j, v in enumerate(frozen_row) if v}
    return touched == {1, r + 1}


# ---------------------------------------------------------------------------
# conservation harness
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConservationReport:
    spec: CartanSpec
    steps: int
    classes: tuple
    values: Mapping  # class -> tuple of per-step Fractions
    conserved: bool
    failures: tuple = ()


def conservation_check(
    spec: CartanSpec,
    initial: QState,
    steps: int,
    builder: BuilderOutput | None = None,
    table: HamiltonianTable | None = None,
) -> ConservationReport:
    """Evaluate the full Hamiltonian table along the orbit and require exact
    equality across steps for every homology class."""
    if steps < 1:
        raise ValueError("need at least one step")
    if builder is None:
        builder = build(spec)
    if table is None:
        table = builder.hamiltonians()
    state = initial
    per_step = []
    for _ in range(steps + 1):
        point = phase_point(state)
        per_step.append({cls: p.evaluate(point) for cls, p in table.entries.items()})
        state = q_step(state)
    classes = tuple(sorted(table.entries))
    values = {cls: tuple(row[cls] for row in per_step) for cls in classes}
    failures = tuple(
        (cls, k)
        for cls in classes
        for k in range(1, steps + 1)
        if values[cls][k] != values[cls][0]
    )
    return ConservationReport(spec, steps, classes, values, not failures, failures)
