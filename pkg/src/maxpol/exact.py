"""Exact rational arithmetic: dense linear solves and hypercube sums.

``Rational`` is the standard library ``fractions.Fraction``, which already
stores values reduced with a positive denominator and zero as ``0/1``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

Rational = Fraction

__all__ = [
    "Rational",
    "RationalMatrix",
    "SingularMatrix",
    "as_rational",
    "factorial",
    "hypercube_sum",
    "solve_linear_exact",
]


class SingularMatrix(ArithmeticError):
    """Raised when exact elimination finds no usable pivot."""


def as_rational(value) -> Fraction:
    """Convert ints, Fractions and ``"p/q"`` strings to a Fraction.

    Floats are rejected because they almost never mean what the caller wants
    in an exact computation.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational value")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot convert {type(value).__name__} to an exact rational")


@dataclass(frozen=True)
class RationalMatrix:
    """Dense row-major matrix of Fractions."""

    rows: int
    cols: int
    entries: tuple[Fraction, ...]

    def __post_init__(self):
        if len(self.entries) != self.rows * self.cols:
            raise ValueError(
                f"expected {self.rows * self.cols} entries, got {len(self.entries)}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence]) -> "RationalMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        if any(len(r) != ncols for r in rows):
            raise ValueError("ragged rows")
        entries = tuple(as_rational(v) for r in rows for v in r)
        return cls(len(rows), ncols, entries)

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls.from_rows([[int(i == j) for j in range(n)] for i in range(n)])

    def __getitem__(self, idx: tuple[int, int]) -> Fraction:
        i, j = idx
        return self.entries[i * self.cols + j]

    def row(self, i: int) -> tuple[Fraction, ...]:
        return self.entries[i * self.cols:(i + 1) * self.cols]

    def tolist(self) -> list[list[Fraction]]:
        return [list(self.row(i)) for i in range(self.rows)]

    def matvec(self, x: Sequence[Fraction]) -> list[Fraction]:
        if len(x) != self.cols:
            raise ValueError("dimension mismatch")
        return [sum((a * b for a, b in zip(self.row(i), x)), Fraction(0))
                for i in range(self.rows)]


def factorial(m: int) -> int:
    if m < 0:
        raise ValueError("factorial of a negative number")
    return math.factorial(m)


def _integer_rows(A: RationalMatrix, b: Sequence[Fraction]) -> list[list[int]]:
    # Scale each augmented row by the lcm of its denominators; solutions are unchanged.
    out = []
    for i in range(A.rows):
        row = list(A.row(i)) + [as_rational(b[i])]
        scale = math.lcm(*(v.denominator for v in row))
        out.append([v.numerator * (scale // v.denominator) for v in row])
    return out


def solve_linear_exact(A: RationalMatrix, b: Sequence) -> list[Fraction]:
    """Solve ``A x = b`` exactly.

    Uses fraction-free (Bareiss) elimination on the row-scaled integer system
    with partial pivoting on the largest magnitude, followed by rational back
    substitution. The result satisfies ``A x == b`` with no rounding.

    Raises
    ------
    SingularMatrix
        If a column has no non-zero pivot.
    """
    n = A.rows
    if A.cols != n:
        raise ValueError(f"matrix must be square, got {A.rows}x{A.cols}")
    if len(b) != n:
        raise ValueError(f"right side has length {len(b)}, expected {n}")
    if n == 0:
        return []

    M = _integer_rows(A, b)
    prev = 1
    for k in range(n):
        piv = max(range(k, n), key=lambda r: abs(M[r][k]))
        if M[piv][k] == 0:
            raise SingularMatrix(f"no pivot in column {k}")
        if piv != k:
            M[k], M[piv] = M[piv], M[k]
        pk = M[k]
        akk = pk[k]
        for i in range(k + 1, n):
            ri = M[i]
            aik = ri[k]
            for j in range(k + 1, n + 1):
                ri[j] = (akk * ri[j] - aik * pk[j]) // prev
            ri[k] = 0
        prev = akk

    x = [Fraction(0)] * n
    for i in range(n - 1, -1, -1):
        acc = Fraction(M[i][n])
        for j in range(i + 1, n):
            if M[i][j]:
                acc -= M[i][j] * x[j]
        x[i] = acc / M[i][i]
    return x


def hypercube_sum(values: Mapping[object, Fraction] | Iterable[Fraction], n: int) -> Fraction:
    """Sum of ``prod(C[r] for r in subset)`` over all ``n``-element subsets.

    Evaluated with the n-step recursion

        C_i(r) = C(r) * (S_{i-1} - (n - i) * C_{i-1}(r)),   S_i = sum_r C_i(r)

    starting from ``C_0 = C``; the unordered sum is ``S_{n-1} / n!``.

    An index count of zero gives the empty product 1; a pool smaller than
    ``n`` gives the empty sum 0.

    Examples
    --------
    >>> hypercube_sum({1: 1, 2: 2, 3: 3}, 2)
    Fraction(11, 1)
    """
    if isinstance(values, Mapping):
        base = [as_rational(v) for v in values.values()]
    else:
        base = [as_rational(v) for v in values]
    if n < 0:
        raise ValueError("n must be non-negative")
    if n == 0:
        return Fraction(1)
    if len(base) < n:
        return Fraction(0)

    cur = list(base)
    total = sum(cur, Fraction(0))
    for i in range(1, n):
        cur = [c * (total - (n - i) * ci) for c, ci in zip(base, cur)]
        total = sum(cur, Fraction(0))
    return total / math.factorial(n)
