"""Frequency responses of kernels and flatness checks at w = 0 and w = pi."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .kernels import Kernel

__all__ = [
    "FlatnessReport",
    "FrequencyResponse",
    "default_omegas",
    "eval_response",
    "flatness_report",
    "ideal_derivative_response",
    "response_derivative_at",
]

DEFAULT_SAMPLES = 1024
FLATNESS_RTOL = 1e-9


@dataclass(frozen=True)
class FrequencyResponse:
    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.omegas.shape != self.values.shape:
            raise ValueError("omegas and values must have the same length")

    @property
    def magnitude(self) -> np.ndarray:
        return np.abs(self.values)


def default_omegas(samples: int = DEFAULT_SAMPLES) -> np.ndarray:
    return np.linspace(0.0, np.pi, samples)


def eval_response(kernel: Kernel, omegas=None) -> FrequencyResponse:
    """``H(w) = sum_k c_k exp(i x_k w)`` with offsets relative to the evaluation point."""
    w = default_omegas() if omegas is None else np.atleast_1d(np.asarray(omegas, dtype=float))
    x = kernel.offsets_float
    H = np.exp(1j * np.outer(w, x)) @ kernel.coeffs_float
    return FrequencyResponse(w, H)


def response_derivative_at(kernel: Kernel, omega0: float, p: int) -> complex:
    """p-th derivative of ``H`` with respect to w, evaluated at ``omega0``."""
    if p < 0:
        raise ValueError("p must be non-negative")
    x = kernel.offsets_float
    terms = kernel.coeffs_float * (1j * x) ** p * np.exp(1j * x * omega0)
    return complex(terms.sum())


def ideal_derivative_response(n: int, omega: float, p: int = 0) -> complex:
    """p-th w-derivative of the ideal response ``(i w)^n``."""
    if p < 0:
        raise ValueError("p must be non-negative")
    if p > n:
        return 0j
    return (1j) ** n * (math.factorial(n) / math.factorial(n - p)) * omega ** (n - p)


@dataclass(frozen=True)
class FlatnessReport:
    """Highest degrees verified; -1 means not even degree 0 holds."""

    p_at_zero: int
    q_at_pi: int
    p_tolerances: tuple[float, ...]
    q_tolerances: tuple[float, ...]


def flatness_report(kernel: Kernel, max_degree: int | None = None) -> FlatnessReport:
    """Largest consecutive degrees for which the float kernel matches the ideal
    response at 0 and vanishes at pi.

    Tolerances are relative to the magnitude of the moment being tested,
    ``sum |c_k| |x_k|^p``, because for large offsets that sum dwarfs ``n!``
    and the float export is the only rounding step.
    """
    n = kernel.spec.n
    top = len(kernel) if max_degree is None else max_degree
    absx = np.abs(kernel.offsets_float)
    absc = np.abs(kernel.coeffs_float)

    p_ok, p_tols = -1, []
    for p in range(top + 1):
        scale = float(np.sum(absc * absx ** p))
        tol = FLATNESS_RTOL * max(1.0, math.factorial(n), scale)
        p_tols.append(tol)
        err = abs(response_derivative_at(kernel, 0.0, p) - ideal_derivative_response(n, 0.0, p))
        if err > tol:
            break
        p_ok = p

    q_ok, q_tols = -1, []
    for q in range(top + 1):
        tol = FLATNESS_RTOL * float(np.sum(absc * absx ** q))
        q_tols.append(tol)
        if abs(response_derivative_at(kernel, np.pi, q)) > tol:
            break
        q_ok = q

    return FlatnessReport(p_ok, q_ok, tuple(p_tols), tuple(q_tols))
