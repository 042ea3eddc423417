import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from rotkit import fourier as fr
from rotkit.errors import ConfigurationError, DegenerateInputError

from conftest import random_real_series

TWO_PI = 2.0 * math.pi


def naive_dft_1d(samples):
    """Independent DFT oracle: direct O(N^2) sum, no FFT."""
    N = len(samples)
    ks = np.arange(N)
    out = np.empty(N, dtype=complex)
    for k in range(N):
        out[k] = np.sum(samples * np.exp(-2j * math.pi * k * ks / N)) / N
    return out


class TestFromGrid:
    def test_zero_function(self):
        f = fr.from_grid(np.zeros(16, dtype=complex), order=3)
        assert np.all(f.coeffs == 0)

    def test_single_mode_exact(self):
        x = TWO_PI * np.arange(8) / 8
        f = fr.from_grid(np.exp(1j * x), order=2)
        assert abs(f.mode(1) - 1.0) < 1e-14
        for k in (-2, -1, 0, 2):
            assert abs(f.mode(k)) < 1e-14

    def test_sin_against_naive_dft(self):
        # oracle: direct DFT of the 16 samples, checked against the
        # identity sin z = (e^{iz} - e^{-iz}) / (2i)
        x = TWO_PI * np.arange(16) / 16
        samples = np.sin(x)
        oracle = naive_dft_1d(samples)
        f = fr.from_grid(samples.astype(complex), order=4)
        for k in range(-4, 5):
            assert abs(f.mode(k) - oracle[k % 16]) < 1e-14
        assert abs(f.mode(1) - (-0.5j)) < 1e-14
        assert abs(f.mode(-1) - 0.5j) < 1e-14

    def test_grid_too_small_rejected(self):
        with pytest.raises(ConfigurationError):
            fr.from_grid(np.zeros(8, dtype=complex), order=3)

    def test_non_square_rejected(self):
        with pytest.raises(ConfigurationError):
            fr.from_grid(np.zeros((8, 16), dtype=complex), order=1, dim=2)


class TestToGrid:
    def test_zero_series(self):
        f = fr.zeros(1, 4)
        assert np.all(fr.to_grid(f, 32) == 0)

    def test_single_mode_inverse(self):
        f = fr.from_modes(1, 2, {1: 1.0})
        N = 16
        x = TWO_PI * np.arange(N) / N
        assert np.abs(fr.to_grid(f, N) - np.exp(1j * x)).max() < 1e-14

    def test_round_trip_random(self):
        for seed in range(5):
            f = random_real_series(1, 8, 0.3, seed)
            g = fr.from_grid(fr.to_grid(f, 64), 8)
            assert np.abs(g.coeffs - f.coeffs).max() < 1e-12

    def test_round_trip_2d(self):
        f = random_real_series(2, 5, 0.4, 11)
        g = fr.from_grid(fr.to_grid(f, 24), 5, dim=2)
        assert np.abs(g.coeffs - f.coeffs).max() < 1e-12


class TestMajorant:
    def test_zero(self):
        assert fr.majorant_norm(fr.zeros(1, 3), 1.0).value == 0.0

    def test_single_mode(self):
        f = fr.from_modes(2, 3, {(2, -1): 0.7})
        got = fr.majorant_norm(f, 0.4).value
        assert abs(got - 0.7 * math.exp(0.4 * 3)) < 1e-14

    def test_sin_closed_form(self):
        f = fr.from_modes(1, 4, {1: -0.5j, -1: 0.5j})
        assert abs(fr.majorant_norm(f, 0.5).value - math.exp(0.5)) < 1e-12

    def test_dominates_real_sup(self, rng):
        f = random_real_series(1, 10, 0.2, 3)
        x = rng.uniform(0, TWO_PI, size=1024)
        sup = np.abs(fr.eval_at(f, x).real).max()
        assert fr.majorant_norm(f, 0.0).value >= sup - 1e-12

    def test_vector_takes_max(self):
        f = fr.stack([fr.from_modes(2, 2, {(1, 0): 1.0, (-1, 0): 1.0}),
                      fr.from_modes(2, 2, {(0, 0): 0.5})])
        assert abs(fr.majorant_norm(f, 0.0).value - 2.0) < 1e-15

    @settings(max_examples=25, deadline=None)
    @given(st.floats(min_value=0.0, max_value=1.0), st.floats(min_value=0.0, max_value=1.0))
    def test_monotone_in_radius(self, r1, r2):
        f = random_real_series(1, 6, 0.5, 42)
        lo, hi = sorted([r1, r2])
        assert fr.majorant_norm(f, lo).value <= fr.majorant_norm(f, hi).value * (1 + 1e-12)


class TestDecayFit:
    def test_exact_exponential(self):
        ks = np.arange(-10, 11)
        f = fr.FourierSeries(np.exp(-np.abs(ks)).astype(complex), 1)
        M, r = fr.decay_fit(f)
        assert abs(M - 1.0) < 1e-9
        assert abs(r - 1.0) < 1e-9

    def test_zero_series_degenerate(self):
        with pytest.raises(DegenerateInputError):
            fr.decay_fit(fr.zeros(1, 5))

    def test_single_shell_degenerate(self):
        with pytest.raises(DegenerateInputError):
            fr.decay_fit(fr.from_modes(1, 4, {1: -0.5j, -1: 0.5j}))

    def test_poisson_kernel_rate(self):
        # brute-force coefficient oracle by quadrature: the function
        # 1/(2 - cos x) has |c_k| decaying at the exact rate log(2+sqrt(3))
        def func(x):
            return 1.0 / (2.0 - np.cos(x))

        K = 32
        for k in (0, 1, 5, 10):
            re, _ = quad(lambda x: func(x) * math.cos(k * x), 0, TWO_PI)
            oracle_ck = re / TWO_PI
            rho = 2.0 - math.sqrt(3.0)
            closed = (2.0 * rho / (1.0 - rho**2)) * rho**k
            assert abs(oracle_ck - closed) < 1e-12

        N = 256
        x = TWO_PI * np.arange(N) / N
        f = fr.from_grid(func(x).astype(complex), K)
        _, r = fr.decay_fit(f)
        target = math.log(2.0 + math.sqrt(3.0))
        assert abs(r - target) / target < 0.10

    def test_envelope_dominates(self):
        f = random_real_series(1, 12, 0.7, 9)
        M, r = fr.decay_fit(f)
        ks = np.abs(np.arange(-12, 13))
        assert np.all(np.abs(f.coeffs[0]) <= M * np.exp(-r * ks) * (1 + 1e-12))


class TestCompose:
    def test_identity(self):
        p = random_real_series(1, 6, 0.5, 1)
        out = fr.compose_displacement(p, None, shift=[0.0])
        assert np.abs(out.coeffs - p.coeffs).max() == 0.0

    def test_shift_theorem(self):
        p = fr.from_modes(1, 2, {1: 1.0})
        mu = 0.3
        out = fr.compose_displacement(p, None, shift=[TWO_PI * mu])
        assert abs(out.mode(1) - np.exp(2j * math.pi * mu)) < 1e-15

    def test_pointwise_oracle(self):
        # oracle: direct evaluation of sin(x + 0.1*sin(x)) at 256 nodes
        p = fr.from_modes(1, 32, {1: -0.5j, -1: 0.5j})
        h = fr.from_modes(1, 32, {1: -0.05j, -1: 0.05j})
        out = fr.compose_displacement(p, h)
        x = TWO_PI * np.arange(256) / 256
        got = fr.eval_at(out, x).real
        oracle = np.sin(x + 0.1 * np.sin(x))
        assert np.abs(got - oracle).max() < 1e-10

    def test_shift_and_composition_2d(self):
        # the composition is not band-limited, so compare coefficients
        # against the projection of an independently sampled oracle
        p = random_real_series(2, 6, 0.8, 5)
        h = random_real_series(2, 4, 0.8, 6, value_dim=2, scale=0.02)
        shift = np.array([0.3, -0.7])
        K_out = 12
        out = fr.compose_displacement(p, h, shift=shift, order=K_out)
        N = 96
        nodes = fr.grid_nodes(2, N)
        hv = fr.to_grid(h, N).real
        pts = nodes + shift.reshape(2, 1, 1) + hv
        oracle = fr.from_grid(fr.eval_at(p, pts).real.astype(complex), K_out, dim=2)
        assert np.abs(out.coeffs - oracle.coeffs).max() < 1e-12

    def test_real_symmetry_preserved(self):
        p = random_real_series(1, 8, 0.6, 2)
        h = random_real_series(1, 8, 0.6, 3, scale=0.05)
        out = fr.compose_displacement(p, h, shift=[1.1])
        assert out.is_real_symmetric(1e-12)


class TestCoefficientOps:
    def test_mean_and_remove(self):
        f = fr.from_modes(1, 4, {0: 3.0, 1: -0.5j, -1: 0.5j})
        assert fr.mean(f) == 3.0
        g = fr.remove_mean(f)
        assert fr.mean(g) == 0.0
        assert abs(g.mode(1) - (-0.5j)) < 1e-15

    def test_derivative_sin_is_cos(self):
        f = fr.from_modes(1, 4, {1: -0.5j, -1: 0.5j})
        d = fr.derivative(f, 0)
        assert abs(d.mode(1) - 0.5) < 1e-15
        assert abs(d.mode(-1) - 0.5) < 1e-15

    def test_derivative_mixed_mode(self):
        f = fr.from_modes(2, 3, {(2, -1): 1.0})
        d = fr.derivative(f, 0)
        assert abs(d.mode((2, -1)) - 2j) < 1e-15
        d2 = fr.derivative(f, 1)
        assert abs(d2.mode((2, -1)) - (-1j)) < 1e-15

    def test_symmetry_through_ops(self):
        f = random_real_series(2, 4, 0.5, 8)
        assert fr.remove_mean(f).is_real_symmetric(1e-14)
        assert fr.derivative(f, 1).is_real_symmetric(1e-14)
        assert fr.shifted(f, [0.4, 2.2]).is_real_symmetric(1e-12)


def _strip_bounded_functions():
    """Analytic test functions with certified strip bounds.

    Each entry: (dim, sampler over grid nodes, M, r) where
    sup_{|Im z| <= r} |f| <= M holds by closed form.
    """
    cases = []
    for a in (0.5, 1.0):
        for r in (0.5, 1.0):
            cases.append((1, lambda x, _a=a: np.exp(_a * np.cos(x)),
                          math.exp(a * math.cosh(r)), r))
    for b in (2.0, 3.0):
        r = 0.5 * math.acosh(b)
        cases.append((1, lambda x, _b=b: 1.0 / (_b - np.cos(x)),
                      1.0 / (b - math.cosh(r)), r))
    cases.append((1, lambda x: np.sin(x) + 0.25 * np.sin(2 * x),
                  math.cosh(0.5) + 0.25 * math.cosh(1.0), 0.5))
    for a in (0.4, 0.8):
        cases.append((2, lambda z1, z2, _a=a: np.exp(_a * np.cos(z1)) * np.cos(z2),
                      math.exp(a * math.cosh(0.5)) * math.cosh(0.5), 0.5))
        cases.append((2, lambda z1, z2, _a=a: np.sin(z1 + z2) * _a,
                      a * math.cosh(1.0), 0.5))
    cases.append((2, lambda z1, z2: 1.0 / (3.0 - np.cos(z1)) / (3.0 - np.cos(z2)),
                  1.0 / (3.0 - math.cosh(0.6)) ** 2, 0.6))
    return cases


class TestAnalyticDecayBounds:
    @pytest.mark.parametrize("case", _strip_bounded_functions())
    def test_coefficient_decay(self, case):
        # |c_k| <= M exp(-|k|_1 r) up to the aliasing allowance at 4x
        # oversampling
        dim, func, M, r = case
        K = 16 if dim == 1 else 8
        N = 4 * (2 * K + 1)
        nodes = fr.grid_nodes(dim, N)
        samples = func(*nodes)
        f = fr.from_grid(samples.astype(complex), K, dim=dim)
        absk = np.zeros((2 * K + 1,) * dim)
        ax = np.abs(np.arange(-K, K + 1)).astype(float)
        for axis in range(dim):
            shape = [1] * dim
            shape[axis] = 2 * K + 1
            absk = absk + ax.reshape(shape)
        bound = M * np.exp(-absk * r) * (1 + 1e-6)
        assert np.all(np.abs(f.coeffs[0]) <= bound)

    @pytest.mark.parametrize("case", _strip_bounded_functions())
    def test_reconstruction_bound(self, case):
        # if |c_k| <= M exp(-|k| r) then the majorant at radius r-delta
        # stays below 8 ((4m-4)/e)^(m-1) M delta^-m
        dim, func, M, r = case
        K = 16 if dim == 1 else 8
        N = 4 * (2 * K + 1)
        nodes = fr.grid_nodes(dim, N)
        f = fr.from_grid(func(*nodes).astype(complex), K, dim=dim)
        for delta in (0.1, 0.2, 0.4):
            if not 0 < delta < min(1.0, r):
                continue
            lhs = fr.majorant_norm(f, r - delta).value
            rhs = fr.reconstruction_bound(M, r, delta, dim)
            assert lhs <= rhs * (1 + 1e-9)


class TestSerialization:
    def test_flat_round_trip(self):
        f = random_real_series(2, 3, 0.5, 4, value_dim=2)
        rec = fr.to_flat(f)
        g = fr.from_flat(rec)
        assert g.dim == f.dim and g.order == f.order and g.value_dim == f.value_dim
        assert np.abs(g.coeffs - f.coeffs).max() == 0.0

    def test_header(self):
        f = fr.from_modes(1, 1, {1: 0.5 - 0.25j, -1: 0.5 + 0.25j})
        rec = fr.to_flat(f)
        assert rec[:3] == [1.0, 1.0, 1.0]
        assert len(rec) == 3 + 3 * 2
