"""Log-canonical Poisson brackets and commutation checks.

The bracket on the 2r phase variables is {A_i, A_j} = Omega_ij A_i A_j with
Omega the inverse transpose of the exchange matrix; for monomials with
exponent vectors a and b this gives {m_a, m_b} = (a^T Omega b) m_a m_b,
extended bilinearly.  The intersection pairing of two loops is computed
through the exponent vectors of their weights; for type B the paper-side
local rule is unavailable (the doubled faces make the bracket non-local),
so only the Omega-based bracket is offered there and commutation results
are reported as conjecture evidence, never as a verified theorem.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .algebra import LaurentPoly, RationalMatrix, matrix_inverse
from .graph import TorusGraph, loop_weight, trace_faces, weight_var_name, zigzag_loops
from .qsystems import CartanSpec, qsystem_exchange_matrix


class BracketDomainError(ValueError):
    pass


@dataclass(frozen=True)
class PoissonStructure:
    variables: tuple[str, ...]
    omega: RationalMatrix

    def dim(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class PairingValue:
    value: Fraction


def poisson_from_cartan(spec: CartanSpec) -> PoissonStructure:
    """Omega = (B^T)^{-1} = -B^{-1} on the 2r phase variables."""
    b = qsystem_exchange_matrix(spec)
    bt = RationalMatrix.from_rows([[b[j][i] for j in range(len(b))] for i in range(len(b))])
    omega = matrix_inverse(bt)
    names = tuple(weight_var_name(i) for i in range(1, 2 * spec.rank + 1))
    return PoissonStructure(names, omega)


def _exponent_vector(p: LaurentPoly, exp, ps: PoissonStructure):
    vec = [0] * ps.dim()
    pos = {v: i for i, v in enumerate(ps.variables)}
    for v, e in zip(p.variables, exp):
        if e == 0:
            continue
        if v not in pos:
            raise BracketDomainError(f"variable {v} is not a phase variable")
        vec[pos[v]] = e
    return vec


def _pairing(avec, bvec, ps: PoissonStructure) -> Fraction:
    total = Fraction(0)
    for i, ai in enumerate(avec):
        if not ai:
            continue
        for j, bj in enumerate(bvec):
            if bj:
                total += ai * ps.omega[i, j] * bj
    return total


def bracket(p: LaurentPoly, q: LaurentPoly, ps: PoissonStructure) -> LaurentPoly:
    """Bilinear extension of {m_a, m_b} = (a^T Omega b) m_a m_b."""
    out = LaurentPoly.zero()
    for aexp, acoeff in p.terms.items():
        avec = _exponent_vector(p, aexp, ps)
        ma = LaurentPoly(p.variables, {aexp: acoeff})
        for bexp, bcoeff in q.terms.items():
            bvec = _exponent_vector(q, bexp, ps)
            eps = _pairing(avec, bvec, ps)
            if eps == 0:
                continue
            mb = LaurentPoly(q.variables, {bexp: bcoeff})
            out = out + LaurentPoly.const(eps) * ma * mb
    return out


def monomial_exponents(p: LaurentPoly, ps: PoissonStructure):
    if not p.is_monomial():
        raise BracketDomainError(f"not a monomial: {p.canonical_str()}")
    ((exp, _coeff),) = p.terms.items()
    return _exponent_vector(p, exp, ps)


def epsilon_pairing(loop1, loop2, g: TorusGraph, weights, ps: PoissonStructure) -> PairingValue:
    """epsilon with {w1, w2} = epsilon * w1 * w2, from exponent vectors."""
    w1 = loop_weight(g, weights, loop1)
    w2 = loop_weight(g, weights, loop2)
    return PairingValue(_pairing(monomial_exponents(w1, ps), monomial_exponents(w2, ps), ps))


@dataclass(frozen=True)
class CommutationReport:
    classes: tuple
    vanishing: tuple[tuple[int, int], ...]  # index pairs whose bracket is 0
    nonvanishing: dict  # index pair -> canonical string of the bracket
    conjecture_only: bool  # True for type B (evidence for the conjecture)

    @property
    def all_commute(self) -> bool:
        return not self.nonvanishing


def commutation_check(table, ps: PoissonStructure, conjecture_only: bool = False) -> CommutationReport:
    classes = tuple(sorted(table.entries))
    vanishing = []
    nonvanishing = {}
    for i in range(len(classes)):
        for j in range(i, len(classes)):
            br = bracket(table.entries[classes[i]], table.entries[classes[j]], ps)
            if br.is_zero():
                vanishing.append((i, j))
            else:
                nonvanishing[(i, j)] = br.canonical_str()
    return CommutationReport(classes, tuple(vanishing), nonvanishing, conjecture_only)


@dataclass(frozen=True)
class CasimirReport:
    zigzag_count: int
    product_is_one: bool
    central: bool
    nonzero_brackets: tuple

    @property
    def verified(self) -> bool:
        return self.product_is_one and self.central


def face_loops(g: TorusGraph):
    """Counterclockwise boundary loops of the contractible faces, keyed by label."""
    loops = {}
    for label, cyc in trace_faces(g):
        loops.setdefault(label, []).append(cyc)
    return {label: cycs[0] for label, cycs in loops.items() if len(cycs) == 1}


def casimir_check(g: TorusGraph, weights, ps: PoissonStructure) -> CasimirReport:
    """Product of zig-zag weights is 1 and each is central for the bracket."""
    zz = zigzag_loops(g)
    zweights = [loop_weight(g, weights, lp) for lp in zz]
    prod = LaurentPoly.const(1)
    for wz in zweights:
        prod = prod * wz
    nonzero = []
    for label, cyc in sorted(face_loops(g).items(), key=lambda kv: str(kv[0])):
        y = loop_weight(g, weights, cyc)
        for idx, wz in enumerate(zweights):
            br = bracket(wz, y, ps)
            if not br.is_zero():
                nonzero.append((idx, label, br.canonical_str()))
    return CasimirReport(len(zz), prod.is_one(), not nonzero, tuple(nonzero))
