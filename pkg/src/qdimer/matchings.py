"""Perfect matchings, their weights, and matching differences.

The difference of two perfect matchings decomposes into vertex-disjoint
simple loops: edges of the first matching run black to white, edges of the
second run white to black.  The loop weights multiply to the ratio of the
matching weights, and the total homology class grades the Hamiltonians.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

from .algebra import LaurentPoly, laurent_div_exact
from .graph import (
    FWD,
    REV,
    OrientedLoop,
    TorusGraph,
    canonical_loop,
    face_weight_value,
    loop_homology,
)

PerfectMatching = frozenset  # of edge ids


class MatchingError(ValueError):
    pass


def is_perfect_matching(g: TorusGraph, m: Iterable[int]) -> bool:
    m = set(m)
    if not m <= set(g.edges):
        return False
    covered: set[int] = set()
    for eid in m:
        e = g.edges[eid]
        if e.black in covered or e.white in covered:
            return False
        covered.add(e.black)
        covered.add(e.white)
    return covered == set(g.vertices)


def enumerate_matchings(g: TorusGraph) -> list[PerfectMatching]:
    """All perfect matchings by backtracking over vertices in id order.

    The output is duplicate-free and sorted by the sorted edge-id tuple, so
    it is reproducible across runs.
    """
    order = sorted(g.vertices)
    incident = {v: sorted(g.incident_edges(v)) for v in order}
    out: list[frozenset[int]] = []
    covered: set[int] = set()
    chosen: list[int] = []

    def rec(i: int) -> None:
        while i < len(order) and order[i] in covered:
            i += 1
        if i == len(order):
            out.append(frozenset(chosen))
            return
        v = order[i]
        for eid in incident[v]:
            e = g.edges[eid]
            u = e.other(v)
            if u in covered:
                continue
            covered.add(v)
            covered.add(u)
            chosen.append(eid)
            rec(i + 1)
            chosen.pop()
            covered.discard(v)
            covered.discard(u)

    rec(0)
    out = sorted(set(out), key=lambda m: tuple(sorted(m)))
    return out


def matching_weight(g: TorusGraph, weights: Mapping, m: Iterable[int]) -> LaurentPoly:
    """Product over matched edges of (A_i A_j)^(-1); frozen faces weigh 1."""
    den = LaurentPoly.const(1)
    for eid in sorted(m):
        e = g.edges[eid]
        den = den * face_weight_value(g, weights, e.face_left)
        den = den * face_weight_value(g, weights, e.face_right)
    return laurent_div_exact(LaurentPoly.const(1), den)


@dataclass(frozen=True)
class RelativeCycle:
    components: tuple[OrientedLoop, ...]
    homology: tuple[int, int]


def relative_cycle(g: TorusGraph, m: Iterable[int], m0: Iterable[int]) -> RelativeCycle:
    """Decompose [M] - [M0] into vertex-disjoint oriented simple loops."""
    m = set(m)
    m0 = set(m0)
    if not is_perfect_matching(g, m) or not is_perfect_matching(g, m0):
        raise MatchingError("relative_cycle needs two perfect matchings")
    only_m = sorted(m - m0)
    only_m0 = m0 - m
    # vertex -> the matching edge covering it, per side
    cover_m = {}
    for eid in only_m:
        e = g.edges[eid]
        cover_m[e.black] = eid
        cover_m[e.white] = eid
    cover_m0 = {}
    for eid in only_m0:
        e = g.edges[eid]
        cover_m0[e.black] = eid
        cover_m0[e.white] = eid
    used: set[int] = set()
    components = []
    for start in only_m:
        if start in used:
            continue
        loop: list = []
        eid = start
        while True:
            used.add(eid)
            loop.append((eid, FWD))
            w = g.edges[eid].white
            back = cover_m0[w]
            loop.append((back, REV))
            b = g.edges[back].black
            eid = cover_m[b]
            if eid == start:
                break
        components.append(canonical_loop(loop))
    components.sort()
    total = (0, 0)
    for comp in components:
        h = loop_homology(g, comp)
        total = (total[0] + h[0], total[1] + h[1])
    return RelativeCycle(tuple(components), total)


def matching_to_json_dict(m: Iterable[int]) -> dict:
    return {"edges": sorted(m)}


def relative_cycle_to_json_dict(rc: RelativeCycle) -> dict:
    return {
        "components": [[{"edge": eid, "dir": d} for eid, d in comp] for comp in rc.components],
        "homology": list(rc.homology),
    }
