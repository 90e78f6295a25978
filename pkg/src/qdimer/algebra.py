"""Exact rational and multivariate Laurent-polynomial arithmetic.

A Laurent polynomial is stored as a mapping from integer exponent tuples
(one entry per variable, entries may be negative) to nonzero ``Fraction``
coefficients.  The zero polynomial has an empty term mapping.  Two
polynomials over different variable lists are compared and combined after
aligning onto the sorted union of their variable names, so every binary
operation is total.

The canonical string form sorts terms by exponent tuple and renders each
term as ``coeff*Var^exp*...``; golden files and JSON output rely on it.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping

Rational = Fraction

Exponent = tuple[int, ...]


class AlignmentError(ValueError):
    """Raised when two polynomials cannot be aligned (never for name unions)."""


class DivisibilityError(ArithmeticError):
    """Raised when an exact Laurent division has a nonzero remainder."""


class EvaluationError(ArithmeticError):
    """Raised when a variable with negative exponent is evaluated at zero."""


class SingularMatrixError(ArithmeticError):
    """Raised when inverting a singular rational matrix."""


def _as_fraction(c) -> Fraction:
    if isinstance(c, Fraction):
        return c
    if isinstance(c, int):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise TypeError(f"not an exact rational: {c!r}")


class LaurentPoly:
    """Immutable multivariate Laurent polynomial with Fraction coefficients."""

    __slots__ = ("variables", "terms")

    def __init__(self, variables: Iterable[str], terms: Mapping[Exponent, Fraction] | None = None):
        vs = tuple(variables)
        if len(set(vs)) != len(vs):
            raise ValueError(f"duplicate variable names: {vs}")
        clean: dict[Exponent, Fraction] = {}
        for exp, coeff in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != len(vs):
                raise ValueError(f"exponent {exp} has wrong length for variables {vs}")
            c = _as_fraction(coeff)
            if c != 0:
                clean[exp] = c
        object.__setattr__(self, "variables", vs)
        object.__setattr__(self, "terms", clean)

    def __setattr__(self, name, value):
        raise AttributeError("LaurentPoly is immutable")

    # -- constructors ------------------------------------------------------

    @staticmethod
    def zero(variables: Iterable[str] = ()) -> "LaurentPoly":
        return LaurentPoly(variables, {})

    @staticmethod
    def const(value, variables: Iterable[str] = ()) -> "LaurentPoly":
        vs = tuple(variables)
        return LaurentPoly(vs, {(0,) * len(vs): _as_fraction(value)})

    @staticmethod
    def var(name: str) -> "LaurentPoly":
        return LaurentPoly((name,), {(1,): Fraction(1)})

    @staticmethod
    def monomial(coeff, exps: Mapping[str, int]) -> "LaurentPoly":
        vs = tuple(sorted(exps))
        return LaurentPoly(vs, {tuple(exps[v] for v in vs): _as_fraction(coeff)})

    # -- structure ---------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def is_one(self) -> bool:
        return len(self.terms) == 1 and next(iter(self.terms.items())) == ((0,) * len(self.variables), 1)

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def num_terms(self) -> int:
        return len(self.terms)

    def constant_value(self) -> Fraction:
        """Value of a constant polynomial (zero or a single degree-0 term)."""
        if not self.terms:
            return Fraction(0)
        ((exp, coeff),) = self.terms.items()
        if any(exp):
            raise ValueError(f"not a constant: {self}")
        return coeff

    # -- alignment ---------------------------------------------------------

    def on_variables(self, variables: Iterable[str]) -> "LaurentPoly":
        """Reindex onto a superset of the current variables."""
        vs = tuple(variables)
        pos = {v: i for i, v in enumerate(vs)}
        missing = [v for v, e in self._support_by_name() if v not in pos and e]
        if missing:
            raise AlignmentError(f"target variables {vs} drop used names {missing}")
        n = len(vs)
        terms: dict[Exponent, Fraction] = {}
        for exp, coeff in self.terms.items():
            new = [0] * n
            for v, e in zip(self.variables, exp):
                if e:
                    new[pos[v]] = e
            key = tuple(new)
            terms[key] = terms.get(key, Fraction(0)) + coeff
        return LaurentPoly(vs, terms)

    def _support_by_name(self):
        for i, v in enumerate(self.variables):
            yield v, any(exp[i] for exp in self.terms)

    @staticmethod
    def aligned(a: "LaurentPoly", b: "LaurentPoly") -> tuple["LaurentPoly", "LaurentPoly"]:
        if a.variables == b.variables:
            return a, b
        union = tuple(sorted(set(a.variables) | set(b.variables)))
        return a.on_variables(union), b.on_variables(union)

    def dropped_unused(self) -> "LaurentPoly":
        """Project away variables that appear in no term."""
        used = tuple(v for v, u in self._support_by_name() if u)
        return self.on_variables(used)

    # -- arithmetic --------------------------------------------------------

    def _coerce(self, other) -> "LaurentPoly":
        if isinstance(other, LaurentPoly):
            return other
        return LaurentPoly.const(other, self.variables)

    def __add__(self, other) -> "LaurentPoly":
        a, b = LaurentPoly.aligned(self, self._coerce(other))
        terms = dict(a.terms)
        for exp, coeff in b.terms.items():
            terms[exp] = terms.get(exp, Fraction(0)) + coeff
        return LaurentPoly(a.variables, terms)

    __radd__ = __add__

    def __neg__(self) -> "LaurentPoly":
        return LaurentPoly(self.variables, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "LaurentPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "LaurentPoly":
        return self._coerce(other) - self

    def __mul__(self, other) -> "LaurentPoly":
        a, b = LaurentPoly.aligned(self, self._coerce(other))
        n = len(a.variables)
        terms: dict[Exponent, Fraction] = {}
        for e1, c1 in a.terms.items():
            for e2, c2 in b.terms.items():
                key = tuple(e1[i] + e2[i] for i in range(n))
                c = terms.get(key, Fraction(0)) + c1 * c2
                if c:
                    terms[key] = c
                elif key in terms:
                    del terms[key]
        return LaurentPoly(a.variables, terms)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "LaurentPoly":
        if not isinstance(n, int):
            raise TypeError("exponent must be an integer")
        if n < 0:
            if not self.is_monomial():
                raise DivisibilityError(f"negative power of a non-monomial: {self}")
            ((exp, coeff),) = self.terms.items()
            inv = LaurentPoly(self.variables, {tuple(-e for e in exp): 1 / coeff})
            return inv ** (-n)
        result = LaurentPoly.const(1, self.variables)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base
            n >>= 1
        return result

    def __truediv__(self, other) -> "LaurentPoly":
        return laurent_div_exact(self, self._coerce(other))

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = LaurentPoly.const(other, self.variables)
        if not isinstance(other, LaurentPoly):
            return NotImplemented
        a, b = LaurentPoly.aligned(self.dropped_unused(), other.dropped_unused())
        return a.terms == b.terms

    def __hash__(self):
        a = self.dropped_unused()
        return hash((a.variables, frozenset(a.terms.items())))

    # -- canonical form ----------------------------------------------------

    def canonical_str(self) -> str:
        """Deterministic rendering: terms sorted by exponent tuple."""
        a = self.dropped_unused()
        if not a.terms:
            return "0"
        parts = []
        for exp in sorted(a.terms):
            coeff = a.terms[exp]
            factors = [str(coeff)]
            for v, e in zip(a.variables, exp):
                if e == 1:
                    factors.append(v)
                elif e != 0:
                    factors.append(f"{v}^{e}")
            parts.append("*".join(factors))
        return " + ".join(parts)

    def __repr__(self):
        return f"LaurentPoly({self.canonical_str()!r})"

    # -- evaluation and substitution ----------------------------------------

    def evaluate(self, point: Mapping[str, Fraction]) -> Fraction:
        """Exact value at a point assigning a nonzero rational to each variable."""
        total = Fraction(0)
        for exp, coeff in self.terms.items():
            val = coeff
            for v, e in zip(self.variables, exp):
                if e == 0:
                    continue
                if v not in point:
                    raise EvaluationError(f"no value for variable {v}")
                x = _as_fraction(point[v])
                if x == 0 and e < 0:
                    raise EvaluationError(f"zero value for {v} raised to {e}")
                val *= x ** e
            total += val
        return total

    def substitute(self, values: Mapping[str, "LaurentPoly"]) -> "LaurentPoly":
        """Compose with Laurent-polynomial values (exact; negative exponents
        require the substituted value to be a monomial or exactly divide)."""
        result = LaurentPoly.zero()
        for exp, coeff in self.terms.items():
            term = LaurentPoly.const(coeff)
            for v, e in zip(self.variables, exp):
                if e == 0:
                    continue
                val = values.get(v)
                if val is None:
                    val = LaurentPoly.var(v)
                if e > 0:
                    term = term * val ** e
                else:
                    term = laurent_div_exact(term, val ** (-e))
            result = result + term
        return result


def laurent_arith(a: LaurentPoly, b: LaurentPoly, op: str) -> LaurentPoly:
    """Dispatch form used by the CLI: op is one of add, sub, mul."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown op {op!r}")


def _shift_to_poly(p: LaurentPoly) -> tuple[dict[Exponent, Fraction], Exponent]:
    """Multiply by a monomial so all exponents are nonnegative."""
    n = len(p.variables)
    if not p.terms:
        return {}, (0,) * n
    mins = [min(exp[i] for exp in p.terms) for i in range(n)]
    shift = tuple(min(m, 0) for m in mins)
    return {tuple(e - s for e, s in zip(exp, shift)): c for exp, c in p.terms.items()}, shift


def laurent_div_exact(a: LaurentPoly, b: LaurentPoly) -> LaurentPoly:
    """Exact quotient q with q*b == a in the Laurent ring.

    Divisions by monomials are exponent shifts.  General divisors use
    leading-term reduction in lex order, which terminates with remainder
    zero exactly when b divides a.
    """
    av, bv = LaurentPoly.aligned(a, b)
    if bv.is_zero():
        raise DivisibilityError("division by zero polynomial")
    if av.is_zero():
        return LaurentPoly.zero(av.variables)
    n = len(av.variables)
    if bv.is_monomial():
        ((bexp, bcoeff),) = bv.terms.items()
        terms = {
            tuple(e - be for e, be in zip(exp, bexp)): c / bcoeff
            for exp, c in av.terms.items()
        }
        return LaurentPoly(av.variables, terms)
    num, nshift = _shift_to_poly(av)
    den, dshift = _shift_to_poly(bv)
    lead = max(den)
    lead_c = den[lead]
    quo: dict[Exponent, Fraction] = {}
    rem = dict(num)
    while rem:
        rlead = max(rem)
        qexp = tuple(r - l for r, l in zip(rlead, lead))
        if any(e < 0 for e in qexp):
            raise DivisibilityError("non-exact Laurent division")
        qcoeff = rem[rlead] / lead_c
        quo[qexp] = quo.get(qexp, Fraction(0)) + qcoeff
        for dexp, dcoeff in den.items():
            key = tuple(q + d for q, d in zip(qexp, dexp))
            c = rem.get(key, Fraction(0)) - qcoeff * dcoeff
            if c:
                rem[key] = c
            elif key in rem:
                del rem[key]
    total_shift = tuple(ns - ds for ns, ds in zip(nshift, dshift))
    return LaurentPoly(
        av.variables,
        {tuple(e + s for e, s in zip(exp, total_shift)): c for exp, c in quo.items()},
    )


def laurent_eval(a: LaurentPoly, point: Mapping[str, Fraction]) -> Fraction:
    return a.evaluate(point)


class LaurentFrac:
    """Formal quotient of Laurent polynomials.

    Only what Y-seed mutations need: products, integer powers of either
    sign, and addition of integers.  Equality is by cross-multiplication,
    so no gcd machinery is required.
    """

    __slots__ = ("num", "den")

    def __init__(self, num: LaurentPoly, den: LaurentPoly | None = None):
        if den is None:
            den = LaurentPoly.const(1, num.variables)
        if den.is_zero():
            raise ZeroDivisionError("LaurentFrac with zero denominator")
        self.num = num
        self.den = den

    @staticmethod
    def from_poly(p: LaurentPoly) -> "LaurentFrac":
        return LaurentFrac(p)

    def __mul__(self, other) -> "LaurentFrac":
        other = _as_laurent_frac(other)
        return LaurentFrac(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __add__(self, other) -> "LaurentFrac":
        other = _as_laurent_frac(other)
        return LaurentFrac(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __pow__(self, n: int) -> "LaurentFrac":
        if n >= 0:
            return LaurentFrac(self.num ** n, self.den ** n)
        return LaurentFrac(self.den ** (-n), self.num ** (-n))

    def inverse(self) -> "LaurentFrac":
        return self ** (-1)

    def __eq__(self, other) -> bool:
        other = _as_laurent_frac(other)
        return self.num * other.den == other.num * self.den

    def __hash__(self):
        raise TypeError("LaurentFrac is unhashable (equality is by cross product)")

    def __repr__(self):
        return f"LaurentFrac(({self.num.canonical_str()}) / ({self.den.canonical_str()}))"


def _as_laurent_frac(x) -> LaurentFrac:
    if isinstance(x, LaurentFrac):
        return x
    if isinstance(x, LaurentPoly):
        return LaurentFrac(x)
    return LaurentFrac(LaurentPoly.const(x))


class RationalMatrix:
    """Dense exact rational matrix; only what the Poisson module needs."""

    __slots__ = ("rows", "cols", "entries")

    def __init__(self, rows: int, cols: int, entries: Iterable):
        es = tuple(_as_fraction(e) for e in entries)
        if len(es) != rows * cols:
            raise ValueError(f"expected {rows * cols} entries, got {len(es)}")
        self.rows = rows
        self.cols = cols
        self.entries = es

    @staticmethod
    def from_rows(rows: Iterable[Iterable]) -> "RationalMatrix":
        rs = [list(r) for r in rows]
        if not rs:
            return RationalMatrix(0, 0, ())
        ncols = len(rs[0])
        if any(len(r) != ncols for r in rs):
            raise ValueError("ragged rows")
        return RationalMatrix(len(rs), ncols, [e for r in rs for e in r])

    @staticmethod
    def identity(n: int) -> "RationalMatrix":
        return RationalMatrix(n, n, [Fraction(int(i == j)) for i in range(n) for j in range(n)])

    def __getitem__(self, ij: tuple[int, int]) -> Fraction:
        i, j = ij
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def transpose(self) -> "RationalMatrix":
        return RationalMatrix(
            self.cols, self.rows, [self[i, j] for j in range(self.cols) for i in range(self.rows)]
        )

    def __mul__(self, other: "RationalMatrix") -> "RationalMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        for i in range(self.rows):
            for j in range(other.cols):
                out.append(sum((self[i, k] * other[k, j] for k in range(self.cols)), Fraction(0)))
        return RationalMatrix(self.rows, other.cols, out)

    def __neg__(self) -> "RationalMatrix":
        return RationalMatrix(self.rows, self.cols, [-e for e in self.entries])

    def __eq__(self, other) -> bool:
        if not isinstance(other, RationalMatrix):
            return NotImplemented
        return (self.rows, self.cols, self.entries) == (other.rows, other.cols, other.entries)

    def __hash__(self):
        return hash((self.rows, self.cols, self.entries))

    def __repr__(self):
        return f"RationalMatrix({self.to_rows()!r})"


def matrix_inverse(m: RationalMatrix) -> RationalMatrix:
    """Exact inverse by Gauss-Jordan elimination with partial pivoting."""
    if m.rows != m.cols:
        raise SingularMatrixError("only square matrices are invertible")
    n = m.rows
    a = [list(m.row(i)) + [Fraction(int(i == j)) for j in range(n)] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            raise SingularMatrixError("singular matrix")
        a[col], a[pivot] = a[pivot], a[col]
        pv = a[col][col]
        a[col] = [x / pv for x in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [x - f * y for x, y in zip(a[r], a[col])]
    return RationalMatrix.from_rows([row[n:] for row in a])
