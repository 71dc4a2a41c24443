from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxpol.diffmatrix import (
    DimensionMismatch,
    InvalidScheme,
    MatrixScheme,
    MatrixTooSmall,
    apply,
    build_matrix,
    flip_direction,
)
from maxpol.kernels import kernel_moments

F = Fraction
CEN = MatrixScheme.CENTRALIZED
FWD = MatrixScheme.STAGGERED_FORWARD
BWD = MatrixScheme.STAGGERED_BACKWARD
ALL = [CEN, FWD, BWD]


def monomial_check(D, p):
    x = np.arange(D.N, dtype=float)
    t = D.eval_nodes()
    got = D.matrix @ x ** p
    if p < D.n:
        want = np.zeros(D.N)
    else:
        want = factorial(p) / factorial(p - D.n) * t ** (p - D.n)
    return got, want


class TestBuild:
    def test_forward_bidiagonal(self):
        D = build_matrix(FWD, 1, 1, 4)
        expect = np.array([[-1, 1, 0, 0], [0, -1, 1, 0], [0, 0, -1, 1], [0, 0, -1, 1]], float)
        # the last row extrapolates with the same pair on the last two samples
        assert np.array_equal(D.to_dense(), expect)

    def test_centralized_boundary_row(self):
        D = build_matrix(CEN, 1, 1, 4)
        assert D.exact_rows()[0] == [F(-3, 2), 2, F(-1, 2), 0]

    def test_laplacian_interior(self):
        D = build_matrix(CEN, 2, 1, 5)
        assert D.exact_rows()[2] == [0, 1, -2, 1, 0]

    @pytest.mark.parametrize("scheme,N", [(CEN, 4), (FWD, 3), (BWD, 3)])
    def test_too_small(self, scheme, N):
        with pytest.raises(MatrixTooSmall):
            build_matrix(scheme, 1, 2, N)

    def test_minimum_sizes(self):
        assert build_matrix(CEN, 1, 2, 5).N == 5
        assert build_matrix(FWD, 1, 2, 4).N == 4

    def test_scheme_strings(self):
        assert build_matrix("staggered_forward", 1, 1, 4).scheme is FWD

    def test_triplets_sorted_and_in_range(self):
        D = build_matrix(CEN, 2, 3, 12)
        trip = D.triplets()
        assert trip == sorted(trip)
        assert all(0 <= r < 12 and 0 <= c < 12 and v != 0 for r, c, v in trip)

    def test_lowpass_matrix_keeps_P(self):
        D = build_matrix(FWD, 1, 3, 10, P=2)
        assert D.P == 2
        assert all(st.kernel.spec.P == 2 for st in D.rows)


class TestInvariants:
    @pytest.mark.parametrize("scheme", ALL)
    @pytest.mark.parametrize("n,l", [(1, 1), (1, 3), (2, 2), (3, 3), (2, 5)])
    def test_row_sums_vanish(self, scheme, n, l):
        D = build_matrix(scheme, n, l, 20)
        assert np.max(np.abs(D.to_dense().sum(axis=1))) <= 1e-12 * max(1, np.abs(D.to_dense()).max())

    @pytest.mark.parametrize("n,l", [(1, 2), (2, 3), (3, 4)])
    def test_interior_toeplitz(self, n, l):
        N = 20
        D = build_matrix(CEN, n, l, N).to_dense()
        ref = D[l, 0:2 * l + 1]
        for j in range(l, N - l):
            assert np.array_equal(D[j, j - l:j + l + 1], ref)
            assert not np.any(np.delete(D[j], range(j - l, j + l + 1)))

    @pytest.mark.parametrize("scheme", ALL)
    def test_rows_are_valid_kernels(self, scheme):
        D = build_matrix(scheme, 2, 3, 16)
        for st in D.rows:
            mom = kernel_moments(st.kernel, st.kernel.spec.P)
            assert mom == [F(2) if p == 2 else 0 for p in range(len(mom))]

    @pytest.mark.parametrize("scheme", ALL)
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("l", [1, 3, 5])
    def test_polynomial_reproduction_every_row(self, scheme, n, l):
        if n > (2 * l if scheme is CEN else 2 * l - 1):
            pytest.skip("order above Pmax")
        D = build_matrix(scheme, n, l, 32)
        for p in range(0, D.P + 1):
            got, want = monomial_check(D, p)
            if p < n:
                assert np.max(np.abs(got)) <= 1e-10 * np.max(np.abs(np.arange(32.0) ** p))
            else:
                assert np.max(np.abs(got - want)) <= 1e-8 * np.max(np.abs(want))


class TestFlip:
    def test_lower_bidiagonal(self):
        D = flip_direction(build_matrix(FWD, 1, 1, 3))
        assert np.array_equal(D.to_dense(), [[-1, 1, 0], [-1, 1, 0], [0, -1, 1]])

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 4), st.integers(1, 4), st.integers(0, 6))
    def test_involution_bit_exact(self, n, l, extra):
        if n > 2 * l - 1:
            return
        D = build_matrix(FWD, n, l, 2 * l + extra)
        DD = flip_direction(flip_direction(D))
        assert DD.scheme is FWD
        assert (DD.matrix != D.matrix).nnz == 0
        assert DD.exact_rows() == D.exact_rows()

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_signed_reflection(self, n):
        N = 9
        D = build_matrix(FWD, n, 2, N).to_dense()
        J = np.eye(N)[::-1]
        assert np.array_equal(flip_direction(build_matrix(FWD, n, 2, N)).to_dense(),
                              (-1) ** n * J @ D @ J)

    def test_even_order_row_sums(self):
        B = flip_direction(build_matrix(FWD, 2, 2, 6))
        assert np.allclose(B.to_dense().sum(axis=1), 0, atol=1e-13)

    def test_backward_nodes(self):
        B = build_matrix(BWD, 1, 3, 12)
        assert np.allclose(B.eval_nodes(), np.arange(12) - 0.5)
        got, want = monomial_check(B, 3)
        assert np.max(np.abs(got - want)) <= 1e-8 * np.max(np.abs(want))

    def test_centralized_rejected(self):
        with pytest.raises(InvalidScheme):
            flip_direction(build_matrix(CEN, 1, 1, 4))


class TestApply:
    def test_constant(self):
        D = build_matrix(CEN, 1, 2, 16)
        assert np.max(np.abs(apply(D, np.ones(16)))) <= 1e-13

    def test_ramp(self):
        D = build_matrix(CEN, 1, 2, 16)
        assert np.max(np.abs(apply(D, np.arange(16.0)) - 1)) <= 1e-10

    def test_quadratic(self):
        D = build_matrix(CEN, 2, 1, 8)
        assert np.max(np.abs(apply(D, np.arange(8.0) ** 2) - 2)) <= 1e-10

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            apply(build_matrix(CEN, 1, 1, 4), np.ones(5))
