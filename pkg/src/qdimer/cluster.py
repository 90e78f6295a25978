"""Cluster seeds, Y-seeds, mutations, and tau coordinates.

Seeds are value-generic: cluster variables may be Laurent polynomials
(symbolic runs) or Fractions (long numeric evolutions); both share the same
mutation code path.  Y-seeds additionally admit formal Laurent fractions,
since Y-seed mutation introduces (1 + y_k) denominators.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .algebra import DivisibilityError, LaurentFrac, LaurentPoly, laurent_div_exact

ExchangeMatrix = tuple[tuple[int, ...], ...]


class FrozenMutationError(ValueError):
    pass


class SingularMutationError(ArithmeticError):
    pass


def exchange_matrix(rows) -> ExchangeMatrix:
    b = tuple(tuple(int(x) for x in row) for row in rows)
    n = len(b)
    if any(len(row) != n for row in b):
        raise ValueError("exchange matrix must be square")
    return b


def is_skew_symmetric(b: ExchangeMatrix) -> bool:
    n = len(b)
    return all(b[i][j] == -b[j][i] for i in range(n) for j in range(n))


def mutate_matrix(b: ExchangeMatrix, k: int) -> ExchangeMatrix:
    n = len(b)
    out = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            if i == k or j == k:
                out[i][j] = -b[i][j]
            else:
                out[i][j] = b[i][j] + (abs(b[i][k]) * b[k][j] + b[i][k] * abs(b[k][j])) // 2
    return tuple(tuple(r) for r in out)


@dataclass(frozen=True)
class ClusterSeed:
    b: ExchangeMatrix
    variables: tuple
    frozen: frozenset[int] = frozenset()

    def __post_init__(self):
        if len(self.variables) != len(self.b):
            raise ValueError("variable count must match the exchange matrix rank")


@dataclass(frozen=True)
class YSeed:
    b: ExchangeMatrix
    y: tuple

    def __post_init__(self):
        if len(self.y) != len(self.b):
            raise ValueError("y count must match the exchange matrix rank")


def _divide(numerator, denominator):
    if isinstance(numerator, LaurentPoly) or isinstance(denominator, LaurentPoly):
        if not isinstance(numerator, LaurentPoly):
            numerator = LaurentPoly.const(numerator)
        if not isinstance(denominator, LaurentPoly):
            denominator = LaurentPoly.const(denominator)
        return laurent_div_exact(numerator, denominator)
    if denominator == 0:
        raise SingularMutationError("division by a zero cluster variable")
    return numerator / denominator


def exchange_value(b: ExchangeMatrix, variables: Sequence, k: int):
    """The exchange binomial at k divided by the old variable."""
    pos = None
    neg = None
    for j, a in enumerate(variables):
        c = b[j][k]
        if c > 0:
            pos = a**c if pos is None else pos * a**c
        elif c < 0:
            neg = a ** (-c) if neg is None else neg * a ** (-c)
    one = _one_like(variables[k])
    pos = one if pos is None else pos
    neg = one if neg is None else neg
    return _divide(pos + neg, variables[k])


def _one_like(value):
    if isinstance(value, LaurentPoly):
        return LaurentPoly.const(1, value.variables)
    if isinstance(value, LaurentFrac):
        return LaurentFrac(LaurentPoly.const(1))
    return Fraction(1)


def mutate_seed(s: ClusterSeed, k: int) -> ClusterSeed:
    if k in s.frozen:
        raise FrozenMutationError(f"index {k} is frozen")
    try:
        new_var = exchange_value(s.b, s.variables, k)
    except DivisibilityError as exc:
        raise DivisibilityError(f"exchange at {k} is not an exact Laurent division: {exc}") from exc
    variables = tuple(new_var if i == k else a for i, a in enumerate(s.variables))
    return ClusterSeed(mutate_matrix(s.b, k), variables, s.frozen)


def mutate_yseed(s: YSeed, k: int) -> YSeed:
    yk = s.y[k]
    one = _one_like(yk)
    base = one + yk
    if isinstance(base, Fraction) and base == 0:
        raise SingularMutationError("y_k = -1 makes the Y-seed mutation singular")
    new = []
    for i, yi in enumerate(s.y):
        if i == k:
            new.append(yk ** (-1))
            continue
        bki = s.b[k][i]
        val = yi * yk ** max(bki, 0)
        val = val * base ** (-bki)
        new.append(val)
    return YSeed(mutate_matrix(s.b, k), tuple(new))


def tau(s: ClusterSeed) -> YSeed:
    """Monomial map to y-variables: y_j = prod_i A_i^{B_ij}."""
    n = len(s.b)
    symbolic = any(isinstance(a, LaurentPoly) for a in s.variables)
    ys = []
    for j in range(n):
        if symbolic:
            num = LaurentPoly.const(1)
            den = LaurentPoly.const(1)
            for i in range(n):
                c = s.b[i][j]
                a = s.variables[i]
                if not isinstance(a, LaurentPoly):
                    a = LaurentPoly.const(a)
                if c > 0:
                    num = num * a**c
                elif c < 0:
                    den = den * a ** (-c)
            ys.append(LaurentFrac(num, den))
        else:
            val = Fraction(1)
            for i in range(n):
                c = s.b[i][j]
                if c:
                    val *= Fraction(s.variables[i]) ** c
            ys.append(val)
    return YSeed(s.b, tuple(ys))


def seed_to_json_dict(s: ClusterSeed) -> dict:
    def render(a):
        if isinstance(a, LaurentPoly):
            return a.canonical_str()
        return str(a)

    return {
        "B": [list(row) for row in s.b],
        "vars": [render(a) for a in s.variables],
        "frozen": sorted(s.frozen),
    }
