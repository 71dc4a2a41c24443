"""Surface recovery from gradient samples via the Sylvester normal equations.

Minimising ``||phi Dx^T - gx||^2 + ||Dy phi - gy||^2`` over ``phi`` gives

    (Dy^T Dy) phi + phi (Dx^T Dx) = Dy^T gy + gx Dx,

solved here by Bartels-Stewart.  First-order derivative matrices annihilate
constants, so the pair of zero eigenvalues is deflated and the free constant
is fixed afterwards by prescribing the mean.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.linalg

from .diffmatrix import DerivMatrix, DimensionMismatch, MatrixScheme, build_matrix

__all__ = [
    "GradientField",
    "IllPosed",
    "RecoverySettings",
    "SchurFailure",
    "SylvesterSolver",
    "assemble_sylvester",
    "recovery_matrices",
    "recover_surface",
    "residual",
    "solve_sylvester",
]


class SchurFailure(RuntimeError):
    pass


class IllPosed(RuntimeError):
    pass


@dataclass(frozen=True)
class GradientField:
    gx: np.ndarray
    gy: np.ndarray

    def __post_init__(self):
        gx = np.asarray(self.gx, dtype=float)
        gy = np.asarray(self.gy, dtype=float)
        if gx.ndim != 2 or gx.shape != gy.shape:
            raise DimensionMismatch(f"gx {gx.shape} and gy {gy.shape} must be equal 2D shapes")
        object.__setattr__(self, "gx", gx)
        object.__setattr__(self, "gy", gy)

    @property
    def shape(self) -> tuple[int, int]:
        return self.gx.shape


@dataclass(frozen=True)
class RecoverySettings:
    """``scheme`` is ``"centralized"`` or ``"staggered"`` (forward matrices on
    both axes).  ``tau=None`` means 1e-10 times the largest Schur diagonal."""

    scheme: str = "staggered"
    l: int = 5
    P: int | None = None
    tau: float | None = None
    anchor_mean: float = 0.0

    def __post_init__(self):
        if self.scheme not in ("centralized", "staggered"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.tau is not None and not self.tau > 0:
            raise ValueError("tau must be positive")

    @property
    def matrix_scheme(self) -> MatrixScheme:
        return (MatrixScheme.CENTRALIZED if self.scheme == "centralized"
                else MatrixScheme.STAGGERED_FORWARD)


def assemble_sylvester(field: GradientField, Dx: DerivMatrix, Dy: DerivMatrix):
    """Return ``(A, B, C)`` with ``A phi + phi B = C`` the normal equations."""
    N1, N2 = field.shape
    if Dx.N != N2 or Dy.N != N1:
        raise DimensionMismatch(
            f"field is {N1}x{N2}, Dy is {Dy.N}x{Dy.N}, Dx is {Dx.N}x{Dx.N}")
    A = (Dy.matrix.T @ Dy.matrix).toarray()
    B = (Dx.matrix.T @ Dx.matrix).toarray()
    C = np.asarray(Dy.matrix.T @ field.gy) + np.asarray((Dx.matrix.T @ field.gx.T).T)
    return A, B, C


class SylvesterSolver:
    """Bartels-Stewart solver for ``A X + X B = C`` with fixed ``A`` and ``B``.

    Both matrices are reduced once to (complex) Schur form; each :meth:`solve`
    then costs two similarity transforms and one triangular sweep per column.
    Any diagonal pair with ``|tA_ii + tB_jj| < tau`` is treated as singular and
    its transformed unknown set to zero.
    """

    def __init__(self, A, B, tau: float | None = None, max_deflated: int | None = 1):
        A = np.asarray(A)
        B = np.asarray(B)
        if A.ndim != 2 or A.shape[0] != A.shape[1] or B.ndim != 2 or B.shape[0] != B.shape[1]:
            raise DimensionMismatch("A and B must be square")
        self.real = np.isrealobj(A) and np.isrealobj(B)
        try:
            self.TA, self.U = scipy.linalg.schur(A, output="complex")
            self.TB, self.V = scipy.linalg.schur(B, output="complex")
        except (np.linalg.LinAlgError, ValueError) as exc:
            raise SchurFailure(str(exc)) from exc
        da, db = np.diag(self.TA), np.diag(self.TB)
        if tau is None:
            scale = max(np.abs(da).max(initial=0.0), np.abs(db).max(initial=0.0))
            tau = 1e-10 * scale if scale > 0 else np.finfo(float).tiny
        self.tau = float(tau)
        self.diag_sum = da[:, None] + db[None, :]
        self.singular = np.abs(self.diag_sum) < self.tau
        self.n_deflated = int(self.singular.sum())
        if max_deflated is not None and self.n_deflated > max_deflated:
            raise IllPosed(
                f"{self.n_deflated} singular modes (at most {max_deflated} allowed); "
                "the nullspace is larger than the constant mode")

    @property
    def shape(self) -> tuple[int, int]:
        return (self.TA.shape[0], self.TB.shape[0])

    def solve(self, C) -> np.ndarray:
        C = np.asarray(C)
        if C.shape != self.shape:
            raise DimensionMismatch(f"C has shape {C.shape}, expected {self.shape}")
        F = self.U.conj().T @ C @ self.V
        TA, TB = self.TA, self.TB
        m, n = self.shape
        Y = np.zeros((m, n), dtype=complex)
        eye = np.eye(m)
        for j in range(n):
            rhs = F[:, j] - Y[:, :j] @ TB[:j, j]
            if not self.singular[:, j].any():
                Y[:, j] = scipy.linalg.solve_triangular(TA + TB[j, j] * eye, rhs)
                continue
            y = Y[:, j]
            for i in range(m - 1, -1, -1):
                if self.singular[i, j]:
                    y[i] = 0.0
                else:
                    y[i] = (rhs[i] - TA[i, i + 1:] @ y[i + 1:]) / self.diag_sum[i, j]
        X = self.U @ Y @ self.V.conj().T
        return X.real if (self.real and np.isrealobj(C)) else X


def solve_sylvester(A, B, C, tau: float | None = None) -> np.ndarray:
    """Solve ``A X + X B = C``; see :class:`SylvesterSolver`."""
    return SylvesterSolver(A, B, tau).solve(C)


@lru_cache(maxsize=64)
def recovery_matrices(scheme: str, l: int, P: int | None, N1: int, N2: int):
    ms = RecoverySettings(scheme, l, P).matrix_scheme
    Dx = build_matrix(ms, 1, l, N2, P)
    Dy = Dx if N1 == N2 else build_matrix(ms, 1, l, N1, P)
    return Dx, Dy


@lru_cache(maxsize=64)
def _solver(scheme: str, l: int, P: int | None, N1: int, N2: int, tau: float | None):
    Dx, Dy = recovery_matrices(scheme, l, P, N1, N2)
    A = (Dy.matrix.T @ Dy.matrix).toarray()
    B = (Dx.matrix.T @ Dx.matrix).toarray()
    return SylvesterSolver(A, B, tau)


def recover_surface(field: GradientField, settings: RecoverySettings = RecoverySettings()):
    """Least-squares surface whose gradients best match ``field``, shifted to
    have mean ``settings.anchor_mean``."""
    N1, N2 = field.shape
    Dx, Dy = recovery_matrices(settings.scheme, settings.l, settings.P, N1, N2)
    _, _, C = assemble_sylvester(field, Dx, Dy)
    solver = _solver(settings.scheme, settings.l, settings.P, N1, N2, settings.tau)
    phi = solver.solve(C)
    return phi + (settings.anchor_mean - phi.mean())


def residual(phi, field: GradientField, Dx: DerivMatrix, Dy: DerivMatrix) -> float:
    """Relative misfit of ``phi``'s gradients against ``field``."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != field.shape or Dx.N != phi.shape[1] or Dy.N != phi.shape[0]:
        raise DimensionMismatch("phi, field and matrices disagree in size")
    ry = np.asarray(Dy.matrix @ phi) - field.gy
    rx = np.asarray((Dx.matrix @ phi.T).T) - field.gx
    num = np.sum(ry ** 2) + np.sum(rx ** 2)
    den = np.sum(field.gy ** 2) + np.sum(field.gx ** 2) + 1e-300
    return float(np.sqrt(num / den))
