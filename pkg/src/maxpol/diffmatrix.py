"""Square derivative matrices with boundary blocks of side-shifted kernels."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .kernels import Kernel, KernelSpec, Scheme, design_kernel

__all__ = [
    "DerivMatrix",
    "DimensionMismatch",
    "InvalidScheme",
    "MatrixScheme",
    "MatrixTooSmall",
    "apply",
    "build_matrix",
    "flip_direction",
]


class MatrixTooSmall(ValueError):
    pass


class InvalidScheme(ValueError):
    pass


class DimensionMismatch(ValueError):
    pass


class MatrixScheme(str, enum.Enum):
    CENTRALIZED = "centralized"
    STAGGERED_FORWARD = "staggered_forward"
    STAGGERED_BACKWARD = "staggered_backward"

    @property
    def kernel_scheme(self) -> Scheme:
        return Scheme.CENTRALIZED if self is MatrixScheme.CENTRALIZED else Scheme.STAGGERED


@dataclass(frozen=True)
class RowStencil:
    """Kernel placed in a row: ``D[row, first_col + t] = sign * kernel[t]`` (taps
    reversed when ``reversed_taps``)."""

    kernel: Kernel
    first_col: int
    sign: int = 1
    reversed_taps: bool = False

    def values(self) -> np.ndarray:
        c = self.kernel.coeffs_float
        c = c[::-1] if self.reversed_taps else c
        return self.sign * c


@dataclass(frozen=True)
class DerivMatrix:
    scheme: MatrixScheme
    n: int
    l: int
    N: int
    P: int
    rows: tuple[RowStencil, ...] = field(repr=False)
    matrix: sp.csr_matrix = field(repr=False, compare=False)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.N, self.N)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def exact_rows(self) -> list[list[Fraction]]:
        """Dense matrix with the exact rational kernel coefficients."""
        out = [[Fraction(0)] * self.N for _ in range(self.N)]
        for i, st in enumerate(self.rows):
            c = st.kernel.coeffs_exact
            if st.reversed_taps:
                c = c[::-1]
            for t, v in enumerate(c):
                out[i][st.first_col + t] = st.sign * v
        return out

    def triplets(self) -> list[tuple[int, int, float]]:
        """Non-zero entries sorted by (row, col)."""
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[i]), int(coo.col[i]), float(coo.data[i])) for i in order]

    def eval_nodes(self) -> np.ndarray:
        """Positions (in sample units) where each row estimates the derivative."""
        j = np.arange(self.N, dtype=float)
        if self.scheme is MatrixScheme.STAGGERED_FORWARD:
            return j + 0.5
        if self.scheme is MatrixScheme.STAGGERED_BACKWARD:
            return j - 0.5
        return j

    def __matmul__(self, other):
        return self.matrix @ other


def _assemble(N: int, rows: tuple[RowStencil, ...]) -> sp.csr_matrix:
    r, c, v = [], [], []
    for i, st in enumerate(rows):
        vals = st.values()
        keep = vals != 0
        cols = st.first_col + np.arange(len(vals))
        r.append(np.full(int(keep.sum()), i))
        c.append(cols[keep])
        v.append(vals[keep])
    m = sp.csr_matrix(
        (np.concatenate(v), (np.concatenate(r), np.concatenate(c))), shape=(N, N)
    )
    m.sort_indices()
    return m


def build_matrix(scheme, n: int, l: int, N: int, P: int | None = None) -> DerivMatrix:
    """Derivative matrix ``D_n`` of size ``N x N``.

    Interior rows use the zero-shift kernel in a Toeplitz band; the first and
    last rows use kernels shifted so their stencils stay inside ``0..N-1``.
    Centralized rows estimate at node ``j``, staggered forward rows at
    ``j + 1/2``.  The last forward row extrapolates to ``N - 1/2``.
    """
    scheme = MatrixScheme(scheme)
    if scheme is MatrixScheme.STAGGERED_BACKWARD:
        return flip_direction(build_matrix(MatrixScheme.STAGGERED_FORWARD, n, l, N, P))

    ks = scheme.kernel_scheme
    taps = 2 * l + 1 if ks is Scheme.CENTRALIZED else 2 * l
    if N < taps:
        raise MatrixTooSmall(f"N={N} is below the stencil width {taps}")

    def kernel(shift):
        return design_kernel(KernelSpec(ks, n, l, shift, P))

    rows = []
    if ks is Scheme.CENTRALIZED:
        for j in range(N):
            if j < l:
                rows.append(RowStencil(kernel(l - j), 0))
            elif j <= N - 1 - l:
                rows.append(RowStencil(kernel(0), j - l))
            else:
                rows.append(RowStencil(kernel(-(j - (N - 1 - l))), N - 1 - 2 * l))
    else:
        for j in range(N):
            if j < l - 1:
                rows.append(RowStencil(kernel(l - 1 - j), 0))
            elif j <= N - 1 - l:
                rows.append(RowStencil(kernel(0), j - l + 1))
            else:
                rows.append(RowStencil(kernel(-(j - (N - 1 - l))), N - 2 * l))
    rows = tuple(rows)
    Pval = rows[0].kernel.spec.P
    return DerivMatrix(scheme, n, l, N, Pval, rows, _assemble(N, rows))


def flip_direction(D: DerivMatrix) -> DerivMatrix:
    """Switch a staggered matrix between forward and backward.

    Returns ``(-1)^n J D J`` with ``J`` the anti-identity, so rows that
    estimated at ``j + 1/2`` now estimate at ``j - 1/2``.  For odd ``n``
    this is ``-J D J``.
    """
    if D.scheme is MatrixScheme.CENTRALIZED:
        raise InvalidScheme("flip_direction applies to staggered matrices only")
    target = (MatrixScheme.STAGGERED_BACKWARD if D.scheme is MatrixScheme.STAGGERED_FORWARD
              else MatrixScheme.STAGGERED_FORWARD)
    sign = -1 if D.n % 2 else 1
    N = D.N
    rows = []
    for st in reversed(D.rows):
        width = len(st.kernel)
        rows.append(RowStencil(st.kernel, N - st.first_col - width, sign * st.sign,
                               not st.reversed_taps))
    rows = tuple(rows)
    return DerivMatrix(target, D.n, D.l, N, D.P, rows, _assemble(N, rows))


def apply(D: DerivMatrix, f) -> np.ndarray:
    """``D @ f`` for a length-N vector."""
    f = np.asarray(f, dtype=float)
    if f.shape != (D.N,):
        raise DimensionMismatch(f"expected a vector of length {D.N}, got shape {f.shape}")
    return D.matrix @ f
