"""Eigenvalue distribution and stability case of derivative matrices."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import flint
import numpy as np
import scipy.linalg

from .diffmatrix import DerivMatrix, MatrixScheme, build_matrix

__all__ = [
    "Case",
    "ConvergenceFailure",
    "SpectralReport",
    "bounds_sweep",
    "classify_case",
    "eigenvalues",
    "gershgorin",
    "gershgorin_contains",
    "match_multisets",
    "spectral_report",
]

DENSE_LIMIT = 1024


class ConvergenceFailure(RuntimeError):
    pass


class Case(str, enum.Enum):
    I = "I"      # staggered, odd order
    II = "II"    # centralized, odd order
    III = "III"  # staggered, even order
    IV = "IV"    # centralized, even order


def classify_case(scheme, n: int) -> Case:
    if n < 1:
        raise ValueError("derivative order must be at least 1")
    centralized = str(getattr(scheme, "value", scheme)) == "centralized"
    if n % 2:
        return Case.II if centralized else Case.I
    return Case.IV if centralized else Case.III


def _dense(D) -> np.ndarray:
    return D.to_dense() if isinstance(D, DerivMatrix) else np.asarray(D, dtype=float)


def _sorted(ev: np.ndarray) -> np.ndarray:
    ev = np.asarray(ev, dtype=complex)
    return ev[np.lexsort((ev.imag, ev.real))]


def _exact_eigenvalues(D: DerivMatrix, prec: int) -> np.ndarray:
    # D is nilpotent on polynomials of degree <= P and strongly non-normal, so
    # work from the exact characteristic polynomial: irreducible factors are
    # squarefree, arb isolates their roots, the factorization gives multiplicities.
    A = flint.fmpq_mat([[flint.fmpq(v.numerator, v.denominator) for v in row]
                        for row in D.exact_rows()])
    _, factors = A.charpoly().factor()
    old = flint.ctx.prec
    flint.ctx.prec = prec
    try:
        out = []
        for f, mult in factors:
            for root, m in f.complex_roots():
                out.extend([complex(root)] * (m * mult))
    finally:
        flint.ctx.prec = old
    return np.array(out, dtype=complex)


def eigenvalues(D, dense_limit: int = DENSE_LIMIT, method: str = "lapack",
                prec: int = 128) -> np.ndarray:
    """All eigenvalues, sorted by (real, imag).

    ``method="lapack"`` runs ``geev``: orthogonal reduction to Hessenberg form
    followed by the shifted QR iteration, in binary64.
    ``method="exact"`` works from the exact rational entries of a
    :class:`DerivMatrix` and returns roots certified to ``prec`` bits.
    """
    if method == "exact":
        if not isinstance(D, DerivMatrix):
            raise TypeError("exact eigenvalues need a DerivMatrix")
        if D.N > dense_limit:
            raise ValueError(f"N={D.N} exceeds the dense limit {dense_limit}")
        return _sorted(_exact_eigenvalues(D, prec))
    if method != "lapack":
        raise ValueError(f"unknown method {method!r}")
    A = _dense(D)
    if A.shape[0] > dense_limit:
        raise ValueError(f"N={A.shape[0]} exceeds the dense limit {dense_limit}")
    try:
        ev = scipy.linalg.eigvals(A, check_finite=True)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(str(exc)) from exc
    return _sorted(ev)


def gershgorin(D) -> list[tuple[complex, float]]:
    """Row discs: centre is the diagonal entry, radius the off-diagonal l1 norm."""
    A = _dense(D)
    diag = np.diag(A)
    radii = np.abs(A).sum(axis=1) - np.abs(diag)
    return [(complex(c), float(max(r, 0.0))) for c, r in zip(diag, radii)]


def gershgorin_contains(discs, ev, slack: float = 0.0) -> np.ndarray:
    """Per-eigenvalue flag: inside the union of discs (with ``slack``)."""
    centres = np.array([c for c, _ in discs])
    radii = np.array([r for _, r in discs])
    dist = np.abs(np.asarray(ev)[:, None] - centres[None, :])
    return np.any(dist <= radii[None, :] + slack, axis=1)


def match_multisets(a, b, tol: float) -> bool:
    """Greedy nearest matching of two complex multisets within ``tol``."""
    a = list(np.asarray(a, dtype=complex))
    b = list(np.asarray(b, dtype=complex))
    if len(a) != len(b):
        return False
    for z in a:
        k = int(np.argmin(np.abs(np.array(b) - z)))
        if abs(b[k] - z) > tol:
            return False
        b.pop(k)
    return True


@dataclass(frozen=True)
class SpectralReport:
    eigenvalues: np.ndarray
    spectral_radius: float
    max_real: float
    min_real: float
    max_abs_imag: float
    max_imag: float
    min_imag: float
    gershgorin_discs: tuple[tuple[complex, float], ...]
    case_label: Case | None
    params: dict
    method: str = "lapack"

    def gershgorin_ok(self, rel_slack: float = 1e-8) -> bool:
        slack = rel_slack * max(self.spectral_radius, 1.0)
        return bool(np.all(gershgorin_contains(self.gershgorin_discs, self.eigenvalues, slack)))

    def to_json_dict(self) -> dict:
        return {
            "params": self.params,
            "eigenvalues": [[float(z.real), float(z.imag)] for z in self.eigenvalues],
            "max_real": self.max_real,
            "spectral_radius": self.spectral_radius,
            "case": self.case_label.value if self.case_label else None,
            "method": self.method,
        }


def spectral_report(D: DerivMatrix, method: str = "lapack") -> SpectralReport:
    ev = eigenvalues(D, method=method)
    return SpectralReport(
        eigenvalues=ev,
        spectral_radius=float(np.max(np.abs(ev))),
        max_real=float(ev.real.max()),
        min_real=float(ev.real.min()),
        max_abs_imag=float(np.abs(ev.imag).max()),
        max_imag=float(ev.imag.max()),
        min_imag=float(ev.imag.min()),
        gershgorin_discs=tuple(gershgorin(D)),
        case_label=classify_case(D.scheme, D.n) if D.n >= 1 else None,
        params={"scheme": D.scheme.value, "n": D.n, "l": D.l, "N": D.N, "P": D.P},
        method=method,
    )


def bounds_sweep(scheme, n: int, l: int, Ns, P: int | None = None,
                 method: str = "lapack") -> list[dict]:
    """Extent of the spectrum for each matrix size, in the order given."""
    scheme = MatrixScheme(scheme)
    table = []
    for N in Ns:
        rep = spectral_report(build_matrix(scheme, n, l, N, P), method=method)
        table.append({
            "N": N,
            "max_real": rep.max_real,
            "min_real": rep.min_real,
            "max_imag": rep.max_imag,
            "min_imag": rep.min_imag,
        })
    return table
