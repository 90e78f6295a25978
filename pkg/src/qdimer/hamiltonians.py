"""Homology-graded Hamiltonians: partition functions of perfect matchings.

The table maps a homology class (i, j) to the exact Laurent polynomial
summing w(M)/w(M0) over perfect matchings M whose difference with the
reference matching M0 has class (i, j).  Equality of tables is equality of
canonical forms; there are no tolerances anywhere.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

from .algebra import LaurentFrac, LaurentPoly, laurent_div_exact
from .graph import TorusGraph, face_weight_value, graph_fingerprint
from .matchings import (
    MatchingError,
    enumerate_matchings,
    is_perfect_matching,
    matching_weight,
    relative_cycle,
)
from .moves import InductionError, induce_matching, mutate_graph, renewal_preconditions


@dataclass(frozen=True)
class HamiltonianTable:
    entries: Mapping[tuple[int, int], LaurentPoly]
    reference: frozenset
    fingerprint: str

    def classes(self) -> list[tuple[int, int]]:
        return sorted(self.entries)

    def __eq__(self, other) -> bool:
        if not isinstance(other, HamiltonianTable):
            return NotImplemented
        if set(self.entries) != set(other.entries):
            return False
        return all(self.entries[c] == other.entries[c] for c in self.entries)

    def __hash__(self):
        return hash(self.fingerprint)

    def to_json_dict(self) -> dict:
        return {f"({i},{j})": p.canonical_str() for (i, j), p in sorted(self.entries.items())}


def _ratio_fractions(g: TorusGraph, weights, m, m0):
    """w(M)/w(M0) as a formal Laurent fraction, valid for any face values."""
    num = LaurentPoly.const(1)
    den = LaurentPoly.const(1)
    for eid in sorted(set(m0) - set(m)):
        e = g.edges[eid]
        num = num * _face_product(g, weights, e)
    for eid in sorted(set(m) - set(m0)):
        e = g.edges[eid]
        den = den * _face_product(g, weights, e)
    return LaurentFrac(num, den)


def _face_product(g, weights, e):
    val = face_weight_value(g, weights, e.face_left) * face_weight_value(g, weights, e.face_right)
    if not isinstance(val, LaurentPoly):
        val = LaurentPoly.const(val)
    return val


def _table_fractions(g: TorusGraph, weights, m0) -> dict[tuple[int, int], LaurentFrac]:
    if not is_perfect_matching(g, m0):
        raise MatchingError("reference matching is not perfect")
    grouped: dict[tuple[int, int], LaurentFrac] = {}
    for m in enumerate_matchings(g):
        cls = relative_cycle(g, m, m0).homology
        term = _ratio_fractions(g, weights, m, m0)
        grouped[cls] = term if cls not in grouped else grouped[cls] + term
    return grouped


def hamiltonian_table(g: TorusGraph, weights, m0) -> HamiltonianTable:
    """Enumerate matchings, group by relative homology, sum weight ratios."""
    grouped = _table_fractions(g, weights, m0)
    entries = {}
    for cls, frac in grouped.items():
        entries[cls] = laurent_div_exact(frac.num, frac.den)
    return HamiltonianTable(entries, frozenset(m0), graph_fingerprint(g))


@dataclass(frozen=True)
class MoveInvarianceReport:
    status: str  # "verified" | "skipped" | "failed"
    diagnostic: str
    face: object
    table_before: HamiltonianTable | None = None

    @property
    def verified(self) -> bool:
        return self.status == "verified"


def check_move_invariance(g: TorusGraph, weights, m0, k) -> MoveInvarianceReport:
    """Compare the table before and after the mutation at face k.

    Hypothesis violations (non-quadrilateral, non-contractible, frozen, or a
    reference matching not meeting the face in exactly one side) are
    reported as skipped, never silently computed.
    """
    diag = renewal_preconditions(g, k)
    if diag is not None:
        return MoveInvarianceReport("skipped", diag, k)
    if not is_perfect_matching(g, m0):
        return MoveInvarianceReport("skipped", "reference matching is not perfect", k)
    before = hamiltonian_table(g, weights, m0)
    try:
        g2, w2, records = mutate_graph(g, weights, k)
        m2 = induce_matching(m0, records)
    except InductionError as exc:
        return MoveInvarianceReport("skipped", str(exc), k)
    if not is_perfect_matching(g2, m2):
        return MoveInvarianceReport("failed", "induced matching is not perfect", k, before)
    after = _table_fractions(g2, w2, m2)
    if set(after) != set(before.entries):
        return MoveInvarianceReport(
            "failed",
            f"class sets differ: {sorted(before.entries)} vs {sorted(after)}",
            k,
            before,
        )
    for cls, frac in after.items():
        if not (frac == LaurentFrac(before.entries[cls])):
            return MoveInvarianceReport("failed", f"entry at {cls} changed", k, before)
    return MoveInvarianceReport("verified", "tables equal entry-by-entry", k, before)


def table_term_counts(t: HamiltonianTable) -> dict[tuple[int, int], int]:
    return {cls: p.num_terms() for cls, p in t.entries.items()}


def table_at_units(t: HamiltonianTable):
    from fractions import Fraction

    return {
        cls: p.evaluate({v: Fraction(1) for v in p.variables}) for cls, p in t.entries.items()
    }


def matching_count_check(g: TorusGraph, weights, m0) -> bool:
    """Sum of unit-weight entries equals the number of perfect matchings."""
    t = hamiltonian_table(g, weights, m0)
    total = sum(table_at_units(t).values())
    return total == len(enumerate_matchings(g))


__all__ = [
    "HamiltonianTable",
    "hamiltonian_table",
    "check_move_invariance",
    "MoveInvarianceReport",
    "table_term_counts",
    "table_at_units",
    "matching_count_check",
    "matching_weight",
]
