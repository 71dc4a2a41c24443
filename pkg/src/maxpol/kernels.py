"""MaxPol kernel specifications and their exact solutions.

A kernel approximates the n-th derivative at an evaluation point from
samples at offsets ``x_k``.  Accuracy is fixed by matching the ideal
response ``(i w)^n`` to degree ``P`` at ``w = 0``; the remaining degrees of
freedom make the response maximally flat (zero to degree ``Q``) at
``w = pi``.  With ``P`` at its maximum the kernel is fullband and the
closed forms in :func:`fullband_closed_form` apply.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .exact import RationalMatrix, hypercube_sum, solve_linear_exact

__all__ = [
    "InvalidSpec",
    "Kernel",
    "KernelSpec",
    "Scheme",
    "assemble_maxpol_system",
    "design_kernel",
    "fullband_closed_form",
    "kernel_moments",
    "lambda_pivot",
    "solve_kernel",
    "stencil_offsets",
]

# Boundary-shifted fullband kernels lose accuracy (Runge) beyond this half-length.
RECOMMENDED_MAX_L = 8


class InvalidSpec(ValueError):
    pass


class Scheme(str, enum.Enum):
    CENTRALIZED = "centralized"
    STAGGERED = "staggered"


@dataclass(frozen=True)
class KernelSpec:
    """Request for an n-th order derivative stencil.

    Parameters
    ----------
    scheme : Scheme or str
        ``centralized`` (2l+1 taps, evaluated on a node) or ``staggered``
        (2l taps, evaluated half a step between nodes).
    n : int
        Derivative order.
    l : int
        Half tap-length.
    shift : int
        Side shift; 0 is the interior stencil, positive values lean the
        stencil right (left boundary), negative values lean it left.
    P : int, optional
        Accuracy degree, ``n <= P <= Pmax``.  Defaults to ``Pmax`` (fullband).
    """

    scheme: Scheme
    n: int
    l: int
    shift: int = 0
    P: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "scheme", Scheme(self.scheme))
        if self.n < 0:
            raise InvalidSpec(f"derivative order must be >= 0, got {self.n}")
        if self.l < 1:
            raise InvalidSpec(f"half tap-length must be >= 1, got {self.l}")
        if abs(self.shift) > self.l:
            raise InvalidSpec(f"|shift| must be <= l={self.l}, got {self.shift}")
        if self.P is None:
            object.__setattr__(self, "P", self.pmax)
        if self.P > self.pmax:
            raise InvalidSpec(f"P={self.P} exceeds Pmax={self.pmax}")
        if self.P < self.n:
            raise InvalidSpec(f"P={self.P} is below the derivative order n={self.n}")

    @property
    def taps(self) -> int:
        return 2 * self.l + 1 if self.scheme is Scheme.CENTRALIZED else 2 * self.l

    @property
    def pmax(self) -> int:
        return self.taps - 1

    @property
    def Q(self) -> int:
        """Flatness degree at pi; negative means no lowpass rows."""
        return self.taps - self.P - 2

    @property
    def fullband(self) -> bool:
        return self.P == self.pmax


@dataclass(frozen=True)
class Kernel:
    spec: KernelSpec
    offsets: tuple[Fraction, ...]
    coeffs_exact: tuple[Fraction, ...]
    coeffs_float: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def from_exact(cls, spec: KernelSpec, offsets, coeffs) -> "Kernel":
        coeffs = tuple(coeffs)
        # int/int true division is correctly rounded, so this is nearest binary64.
        floats = np.array([float(c) for c in coeffs], dtype=float)
        floats.setflags(write=False)
        return cls(spec, tuple(offsets), coeffs, floats)

    @property
    def offsets_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.offsets])

    def __len__(self) -> int:
        return len(self.coeffs_exact)


def stencil_offsets(spec: KernelSpec) -> tuple[Fraction, ...]:
    """Sample positions relative to the evaluation point, ascending."""
    l, s = spec.l, spec.shift
    if spec.scheme is Scheme.CENTRALIZED:
        return tuple(Fraction(k - l - 1 + s) for k in range(1, 2 * l + 2))
    return tuple(Fraction(2 * (k - l + s) - 1, 2) for k in range(1, 2 * l + 1))


def assemble_maxpol_system(spec: KernelSpec) -> tuple[RationalMatrix, list[Fraction]]:
    """Stack the P+1 moment rows and Q+1 sign-alternating flatness rows."""
    if spec.P < spec.n:
        raise InvalidSpec("P must be at least n")
    x = stencil_offsets(spec)
    rows = [[xk ** p for xk in x] for p in range(spec.P + 1)]
    signs = [(-1) ** k for k in range(1, spec.taps + 1)]
    rows += [[sg * xk ** q for sg, xk in zip(signs, x)] for q in range(spec.Q + 1)]
    rhs = [Fraction(0)] * spec.taps
    rhs[spec.n] = Fraction(math.factorial(spec.n))
    return RationalMatrix.from_rows(rows), rhs


def solve_kernel(spec: KernelSpec) -> Kernel:
    """Solve the MaxPol system exactly; works for lowpass and fullband."""
    A, rhs = assemble_maxpol_system(spec)
    return Kernel.from_exact(spec, stencil_offsets(spec), solve_linear_exact(A, rhs))


def lambda_pivot(k: int, N: int) -> int:
    """``prod_{j != k} (k - j)`` over ``j = 1..N``."""
    if not 1 <= k <= N:
        raise ValueError(f"k={k} outside 1..{N}")
    # Equals (-1)^(N-k) (k-1)! (N-k)!; the product is the definition.
    return math.prod(k - j for j in range(1, N + 1) if j != k)


def fullband_closed_form(spec: KernelSpec) -> Kernel:
    """Fullband coefficients from the partial-fraction closed forms.

    Staggered::

        c(k) = (-1)^(n+1) n! / lambda(k) * prod_{j!=k} x_j * e_n({1/x_j : j != k})

    Centralized (``c`` the tap at offset 0)::

        c(k) = (-1)^n n! / lambda(k) * prod_{j!=k,c} x_j * e_{n-1}({1/x_j : j != k,c})

    with the centre tap fixed by the zeroth moment.  ``e_m`` is the unordered
    sum over m distinct indices, evaluated by :func:`hypercube_sum`.
    """
    if not spec.fullband:
        raise InvalidSpec(f"closed form needs P=Pmax={spec.pmax}, got P={spec.P}")
    x = stencil_offsets(spec)
    N = spec.taps
    n = spec.n
    nfact = math.factorial(n)
    coeffs: list[Fraction] = [Fraction(0)] * N

    if spec.scheme is Scheme.STAGGERED:
        for k in range(1, N + 1):
            others = [x[j - 1] for j in range(1, N + 1) if j != k]
            e = hypercube_sum([1 / xj for xj in others], n)
            coeffs[k - 1] = (-1) ** (n + 1) * nfact * math.prod(others) * e / lambda_pivot(k, N)
        return Kernel.from_exact(spec, x, coeffs)

    centre = x.index(0) + 1
    for k in range(1, N + 1):
        if k == centre:
            continue
        others = [x[j - 1] for j in range(1, N + 1) if j not in (k, centre)]
        e = hypercube_sum([1 / xj for xj in others], n - 1) if n >= 1 else Fraction(0)
        coeffs[k - 1] = (-1) ** n * nfact * math.prod(others) * e / lambda_pivot(k, N)
    coeffs[centre - 1] = (nfact if n == 0 else 0) - sum(coeffs, Fraction(0))
    return Kernel.from_exact(spec, x, coeffs)


def kernel_moments(kernel: Kernel, pmax: int) -> list[Fraction]:
    """Exact moments ``sum_k x_k^p c_k`` for ``p = 0..pmax``."""
    return [sum((xk ** p * ck for xk, ck in zip(kernel.offsets, kernel.coeffs_exact)),
                Fraction(0)) for p in range(pmax + 1)]


@lru_cache(maxsize=4096)
def design_kernel(spec: KernelSpec) -> Kernel:
    """Kernel for ``spec``: closed form when fullband, exact solve otherwise."""
    if spec.fullband:
        if spec.shift != 0 and spec.l >= RECOMMENDED_MAX_L:
            warnings.warn(
                f"boundary-shifted fullband kernel with l={spec.l} >= {RECOMMENDED_MAX_L} "
                "may have a poorly behaved response",
                RuntimeWarning,
                stacklevel=2,
            )
        return fullband_closed_form(spec)
    return solve_kernel(spec)
