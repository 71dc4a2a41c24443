import math
import warnings
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from maxpol.exact import solve_linear_exact
from maxpol.kernels import (
    InvalidSpec,
    KernelSpec,
    Scheme,
    assemble_maxpol_system,
    design_kernel,
    fullband_closed_form,
    kernel_moments,
    lambda_pivot,
    solve_kernel,
    stencil_offsets,
)

F = Fraction
C, S = Scheme.CENTRALIZED, Scheme.STAGGERED


def expected_moments(n, P):
    return [F(math.factorial(n)) if p == n else F(0) for p in range(P + 1)]


def flatness_sums(kernel, Q):
    return [sum(((-1) ** k * x ** q * c for k, (x, c) in
                 enumerate(zip(kernel.offsets, kernel.coeffs_exact), start=1)), F(0))
            for q in range(Q + 1)]


@st.composite
def specs(draw, max_l=6, max_n=4, fullband=None):
    scheme = draw(st.sampled_from([C, S]))
    l = draw(st.integers(1, max_l))
    pmax = 2 * l if scheme is C else 2 * l - 1
    n = draw(st.integers(0, min(max_n, pmax)))
    shift = draw(st.integers(-l, l))
    if fullband is True:
        P = pmax
    else:
        P = draw(st.integers(n, pmax))
    return KernelSpec(scheme, n, l, shift, P)


class TestSpec:
    def test_defaults_to_fullband(self):
        s = KernelSpec(C, 1, 2)
        assert s.P == 4 and s.fullband and s.taps == 5 and s.Q == -1

    def test_staggered_counts(self):
        s = KernelSpec("staggered", 1, 3, 0, 2)
        assert s.taps == 6 and s.pmax == 5 and s.Q == 2
        assert (s.P + 1) + (s.Q + 1) == s.taps

    @pytest.mark.parametrize("kw", [
        dict(n=-1, l=1), dict(n=1, l=0), dict(n=1, l=1, shift=2),
        dict(n=1, l=1, P=3), dict(n=2, l=1, P=1),
    ])
    def test_invalid(self, kw):
        with pytest.raises(InvalidSpec):
            KernelSpec(C, **kw)

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            KernelSpec("diagonal", 1, 1)


class TestOffsets:
    def test_centralized_interior(self):
        assert stencil_offsets(KernelSpec(C, 1, 2)) == (-2, -1, 0, 1, 2)

    def test_centralized_left_boundary(self):
        assert stencil_offsets(KernelSpec(C, 1, 1, 1)) == (0, 1, 2)

    def test_staggered_interior(self):
        assert stencil_offsets(KernelSpec(S, 1, 2)) == (F(-3, 2), F(-1, 2), F(1, 2), F(3, 2))

    def test_staggered_right_boundary_mirrors_left(self):
        left = stencil_offsets(KernelSpec(S, 1, 3, 2))
        right = stencil_offsets(KernelSpec(S, 1, 3, -2))
        assert tuple(-x for x in reversed(left)) == right


class TestSystem:
    def test_fullband_is_pure_vandermonde(self):
        A, b = assemble_maxpol_system(KernelSpec(C, 1, 1, 0, 2))
        assert A.tolist() == [[1, 1, 1], [-1, 0, 1], [1, 0, 1]]
        assert b == [0, 1, 0]

    def test_smoothing_rows(self):
        A, b = assemble_maxpol_system(KernelSpec(C, 0, 1, 0, 0))
        assert A.tolist() == [[1, 1, 1], [-1, 1, -1], [1, 0, -1]]
        assert b == [1, 0, 0]

    def test_staggered_two_by_two(self):
        A, b = assemble_maxpol_system(KernelSpec(S, 1, 1, 0, 1))
        assert A.tolist() == [[1, 1], [F(-1, 2), F(1, 2)]]
        assert b == [0, 1]

    def test_factorial_in_rhs(self):
        _, b = assemble_maxpol_system(KernelSpec(C, 3, 3))
        assert b[3] == 6 and sum(b) == 6


class TestSolveKernel:
    @pytest.mark.parametrize("spec,expected", [
        (KernelSpec(C, 0, 1, 0, 0), (F(1, 4), F(1, 2), F(1, 4))),
        (KernelSpec(S, 1, 2, 0, 1), (F(-1, 4), F(-1, 4), F(1, 4), F(1, 4))),
        (KernelSpec(C, 1, 1, 0, 2), (F(-1, 2), 0, F(1, 2))),
        (KernelSpec(C, 2, 1), (1, -2, 1)),
        (KernelSpec(C, 1, 2), (F(1, 12), F(-2, 3), 0, F(2, 3), F(-1, 12))),
        (KernelSpec(S, 1, 1), (-1, 1)),
        (KernelSpec(S, 1, 2), (F(1, 24), F(-9, 8), F(9, 8), F(-1, 24))),
        (KernelSpec(C, 1, 1, 1), (F(-3, 2), 2, F(-1, 2))),
    ])
    def test_known_stencils(self, spec, expected):
        assert solve_kernel(spec).coeffs_exact == tuple(F(v) for v in expected)

    def test_float_export_is_nearest(self):
        k = solve_kernel(KernelSpec(C, 1, 2))
        assert list(k.coeffs_float) == [1 / 12, -2 / 3, 0.0, 2 / 3, -1 / 12]
        with pytest.raises(ValueError):
            k.coeffs_float[0] = 1.0

    @settings(max_examples=80, deadline=None)
    @given(specs(max_l=8))
    def test_moment_and_flatness_exact(self, spec):
        k = solve_kernel(spec)
        assert kernel_moments(k, spec.P) == expected_moments(spec.n, spec.P)
        if spec.Q >= 0:
            assert flatness_sums(k, spec.Q) == [0] * (spec.Q + 1)


class TestLambda:
    @pytest.mark.parametrize("k,N,expected", [(1, 2, -1), (2, 3, -1), (1, 3, 2)])
    def test_values(self, k, N, expected):
        assert lambda_pivot(k, N) == expected

    @pytest.mark.parametrize("N", range(1, 9))
    def test_factorial_form(self, N):
        for k in range(1, N + 1):
            assert lambda_pivot(k, N) == (-1) ** (N - k) * math.factorial(k - 1) * math.factorial(N - k)

    def test_range(self):
        with pytest.raises(ValueError):
            lambda_pivot(0, 3)


class TestClosedForm:
    @pytest.mark.parametrize("spec,expected", [
        (KernelSpec(S, 1, 1), (-1, 1)),
        (KernelSpec(C, 1, 1), (F(-1, 2), 0, F(1, 2))),
        (KernelSpec(C, 3, 2), (F(-1, 2), 1, 0, -1, F(1, 2))),
    ])
    def test_hand_values(self, spec, expected):
        assert fullband_closed_form(spec).coeffs_exact == tuple(F(v) for v in expected)

    def test_requires_fullband(self):
        with pytest.raises(InvalidSpec):
            fullband_closed_form(KernelSpec(C, 1, 2, 0, 2))

    @settings(max_examples=80, deadline=None)
    @given(specs(max_l=6, fullband=True))
    def test_equals_exact_solver(self, spec):
        assert fullband_closed_form(spec).coeffs_exact == solve_kernel(spec).coeffs_exact

    @pytest.mark.parametrize("n", range(0, 5))
    @pytest.mark.parametrize("l", range(1, 6))
    def test_zero_shift_symmetry(self, n, l):
        if n > 2 * l:
            pytest.skip("order above Pmax")
        c = design_kernel(KernelSpec(C, n, l)).coeffs_exact
        T = len(c)
        assert all(c[k] == (-1) ** n * c[T - 1 - k] for k in range(T))


class TestMoments:
    def test_direct(self):
        k = solve_kernel(KernelSpec(C, 1, 1))
        assert kernel_moments(k, 2) == [0, 1, 0]

    def test_laplacian(self):
        k = solve_kernel(KernelSpec(C, 2, 1))
        assert kernel_moments(k, 3) == [0, 0, 2, 0]

    @settings(max_examples=40, deadline=None)
    @given(specs(max_l=5))
    def test_translation_covariance(self, spec):
        # Moments about a point moved by d follow from the binomial expansion.
        k = solve_kernel(spec)
        d = F(1)
        shifted = [sum(((x + d) ** p * c for x, c in zip(k.offsets, k.coeffs_exact)), F(0))
                   for p in range(spec.P + 1)]
        base = kernel_moments(k, spec.P)
        expanded = [sum((math.comb(p, j) * d ** (p - j) * base[j] for j in range(p + 1)), F(0))
                    for p in range(spec.P + 1)]
        assert shifted == expanded


class TestDesign:
    def test_cache_and_dispatch(self):
        s = KernelSpec(S, 2, 3, 1)
        assert design_kernel(s) is design_kernel(s)
        assert design_kernel(s).coeffs_exact == solve_kernel(s).coeffs_exact

    def test_lowpass_uses_solver(self):
        s = KernelSpec(C, 1, 3, 0, 2)
        assert design_kernel(s).coeffs_exact == solve_kernel(s).coeffs_exact

    def test_large_shifted_warns(self):
        with pytest.warns(RuntimeWarning):
            design_kernel(KernelSpec(C, 1, 8, 3))

    def test_interior_does_not_warn(self):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            design_kernel(KernelSpec(C, 1, 9, 0))
