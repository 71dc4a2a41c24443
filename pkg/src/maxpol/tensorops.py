"""Separable differentiation of 2D grids and m-D tensors.

Grids follow image convention: ``x`` runs along columns, ``y`` along rows.
Tensors use mode-1 (first index fastest) vectorization, so the operator for
mode ``j`` is ``I ⊗ ... ⊗ D ⊗ ... ⊗ I`` with ``D`` in position ``j`` counted
from the right.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp

from .diffmatrix import DerivMatrix, DimensionMismatch

__all__ = [
    "InvalidMode",
    "kronecker_operator",
    "mixed_partial",
    "mode_apply",
    "partial_x",
    "partial_y",
    "vec",
    "unvec",
]


class InvalidMode(ValueError):
    pass


def _grid(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim != 2:
        raise DimensionMismatch(f"expected a 2D grid, got {X.ndim} dimensions")
    return X


def partial_x(X, D: DerivMatrix) -> np.ndarray:
    """``X @ D.T``: derivative along columns."""
    X = _grid(X)
    if D.N != X.shape[1]:
        raise DimensionMismatch(f"D is {D.N}x{D.N} but the grid has {X.shape[1]} columns")
    return np.asarray((D.matrix @ X.T).T)


def partial_y(X, D: DerivMatrix) -> np.ndarray:
    """``D @ X``: derivative along rows."""
    X = _grid(X)
    if D.N != X.shape[0]:
        raise DimensionMismatch(f"D is {D.N}x{D.N} but the grid has {X.shape[0]} rows")
    return np.asarray(D.matrix @ X)


def mixed_partial(X, Dy: DerivMatrix, Dx: DerivMatrix) -> np.ndarray:
    """``Dy @ X @ Dx.T``."""
    return partial_y(partial_x(X, Dx), Dy)


def vec(T) -> np.ndarray:
    """Mode-1 vectorization (first index fastest)."""
    return np.asarray(T).reshape(-1, order="F")


def unvec(v, dims) -> np.ndarray:
    return np.asarray(v).reshape(tuple(dims), order="F")


def mode_apply(T, mode: int, D: DerivMatrix) -> np.ndarray:
    """Apply ``D`` along axis ``mode`` (0-based) of an m-D array."""
    T = np.asarray(T, dtype=float)
    if not 0 <= mode < T.ndim:
        raise InvalidMode(f"mode {mode} outside 0..{T.ndim - 1}")
    if D.N != T.shape[mode]:
        raise DimensionMismatch(f"D is {D.N}x{D.N} but axis {mode} has length {T.shape[mode]}")
    moved = np.moveaxis(T, mode, 0)
    flat = moved.reshape(T.shape[mode], -1)
    out = np.asarray(D.matrix @ flat).reshape(moved.shape)
    return np.moveaxis(out, 0, mode)


def kronecker_operator(dims, mats: dict[int, DerivMatrix]) -> sp.csr_matrix:
    """Explicit ``D_m ⊗ ... ⊗ D_1`` acting on mode-1 vectorizations.

    Modes missing from ``mats`` get an identity.  Only meant for small
    tensors; :func:`mode_apply` is the working path.
    """
    op = sp.identity(1, format="csr")
    for j, nj in enumerate(dims):
        factor = mats[j].matrix if j in mats else sp.identity(nj, format="csr")
        if factor.shape != (nj, nj):
            raise DimensionMismatch(f"operator for mode {j} does not match length {nj}")
        op = sp.kron(factor, op, format="csr")
    return op
