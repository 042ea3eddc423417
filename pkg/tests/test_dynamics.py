import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rotkit import dynamics as dyn
from rotkit.dynamics import (
    TWO_PI,
    BernoulliShift,
    CircleLift,
    TorusRotation,
    displacement_spread,
    iid_lift,
    iterate,
    make_arnold_family,
    make_conjugated_rotation,
    make_skew_sine,
    step,
)
from rotkit.errors import NonInvertibleError, ValidationError

from conftest import GOLDEN, SILVER


class TestStep:
    def test_pure_rotation(self):
        lift = CircleLift(0.25, None)
        x1, w1 = step(lift, None, (0.0, None))
        assert abs(x1 - math.pi / 2) < 1e-15

    def test_bernoulli_symbol_selects_map(self):
        maps = [CircleLift(0.1, None), CircleLift(0.2, None)]
        lift = iid_lift(maps)
        # symbol 1 (second map) drawn: displacement is 2*pi*0.2 = 0.4*pi
        assert abs(lift(1.0, 1) - (1.0 + 0.4 * math.pi)) < 1e-15
        assert abs(lift(1.0, 0) - (1.0 + 0.2 * math.pi)) < 1e-15

    def test_half_plus_sine_period_two(self):
        # phi(x) = x + pi + 0.5 sin x sends 0 -> pi -> 2*pi
        lift = make_arnold_family(0.5, 0.5)
        x1, _ = step(lift, None, (0.0, None))
        assert abs(x1 - math.pi) < 1e-15
        x2, _ = step(lift, None, (x1, None))
        assert abs(x2 - TWO_PI) < 1e-13


class TestIterate:
    def test_zero_steps_identity(self):
        lift = make_arnold_family(0.3, 0.4)
        t = iterate(lift, None, 1.234, None, 0)
        assert t.x == 1.234
        assert t.n == 0

    def test_pure_rotation_exact(self):
        lift = CircleLift(GOLDEN, None)
        for n in (1, 10, 1000):
            t = iterate(lift, None, 0.5, None, n)
            assert abs(t.x - (0.5 + TWO_PI * GOLDEN * n)) < 1e-9 * n

    def test_batch_matches_scalar(self):
        lift = make_arnold_family(0.37, 0.6)
        xs = np.array([0.0, 1.0, 2.5])
        batch = iterate(lift, None, xs, None, 257)
        for i, x0 in enumerate(xs):
            solo = iterate(lift, None, float(x0), None, 257)
            assert batch.x[i] == solo.x

    @pytest.mark.parametrize("driver_kind", ["trivial", "torus", "bernoulli"])
    def test_cocycle_split(self, driver_kind):
        # iterate(s+t) equals iterate(t) continued from iterate(s)
        rng = np.random.default_rng(5)
        if driver_kind == "trivial":
            driver = None
            lift = make_arnold_family(0.29, 0.55)
        elif driver_kind == "torus":
            driver = TorusRotation((SILVER,))
            lift = make_skew_sine(1.9, 0.4)
        else:
            driver = BernoulliShift((0.3, 0.7), seed=99)
            lift = iid_lift([make_conjugated_rotation(0.1), make_conjugated_rotation(0.2)])
        for _ in range(10):
            s = int(rng.integers(0, 65))
            t = int(rng.integers(0, 65))
            whole = iterate(lift, driver, 0.3, None, s + t)
            part = iterate(lift, driver, 0.3, None, s)
            part.advance(t)
            assert abs(whole.x - part.x) < 1e-10

    def test_determinism_bit_for_bit(self):
        driver = BernoulliShift((0.4, 0.6), seed=1234)
        lift = iid_lift([make_conjugated_rotation(0.15), make_conjugated_rotation(0.35)])
        a = iterate(lift, driver, 0.0, None, 5000).x
        b = iterate(lift, BernoulliShift((0.4, 0.6), seed=1234), 0.0, None, 5000).x
        assert a == b

    def test_distinct_seeds_differ(self):
        lift = iid_lift([CircleLift(0.1, None), CircleLift(0.2, None)])
        a = iterate(lift, BernoulliShift((0.5, 0.5), seed=1), 0.0, None, 1000).x
        b = iterate(lift, BernoulliShift((0.5, 0.5), seed=2), 0.0, None, 1000).x
        assert a != b


class TestDegreeOneMonotone:
    @pytest.mark.parametrize("n", [1, 7, 32])
    def test_composite_degree_one(self, n):
        lift = make_arnold_family(0.23, 0.8)
        x = TWO_PI * np.arange(64) / 64
        a = iterate(lift, None, x, None, n).x
        b = iterate(lift, None, x + TWO_PI, None, n).x
        assert np.abs(b - a - TWO_PI).max() < 1e-10

    @pytest.mark.parametrize("n", [1, 7, 32])
    def test_composite_monotone(self, n):
        lift = make_arnold_family(0.23, 0.8)
        x = np.sort(np.random.default_rng(3).uniform(0, TWO_PI, 128))
        vals = iterate(lift, None, x, None, n).x
        assert np.all(np.diff(vals) >= -1e-12)


class TestSpread:
    def test_pure_rotation_zero_spread(self):
        sup, inf = displacement_spread(CircleLift(0.4, None))
        assert abs(sup - inf) < 1e-12
        assert abs(sup - TWO_PI * 0.4) < 1e-12

    def test_sine_spread_is_one(self):
        lift = CircleLift(0.0, lambda x, w=None: 0.5 * np.sin(x))
        sup, inf = displacement_spread(lift, grid=256)
        assert abs((sup - inf) - 1.0) < 1e-3

    @settings(max_examples=20, deadline=None)
    @given(
        st.integers(min_value=0, max_value=2**32 - 1),
        st.integers(min_value=1, max_value=24),
    )
    def test_composite_spread_below_full_turn(self, seed, n):
        # sup_x(phi(n)x - x) - inf_x(phi(n)x - x) <= 2*pi for any
        # composite of monotone degree-one lifts
        rng = np.random.default_rng(seed)
        lift = make_arnold_family(rng.uniform(0, 1), rng.uniform(-0.9, 0.9))
        sup, inf = displacement_spread(lift, grid=64, n=n)
        assert sup - inf <= TWO_PI + 1e-9

    def test_grid_minimum(self):
        with pytest.raises(ValidationError):
            displacement_spread(CircleLift(0.1, None), grid=8)


class TestFamilies:
    def test_arnold_eps_zero_is_rigid(self):
        lift = make_arnold_family(0.7, 0.0)
        assert lift.displacement is None

    def test_arnold_invertibility_guard(self):
        with pytest.raises(NonInvertibleError):
            make_arnold_family(0.5, 1.2)
        with pytest.raises(NonInvertibleError):
            make_arnold_family(0.5, -1.0)

    def test_conjugated_rotation_inverse_accuracy(self):
        lift = make_conjugated_rotation(0.37, 0.3)
        # g^-1(g(x) + s) composed back: displacement consistency on a grid
        x = np.linspace(0, TWO_PI, 65)
        y = lift(x, None)
        g = lambda u: u + 0.3 * np.sin(u)
        assert np.abs(g(y) - (g(x) + TWO_PI * 0.37)).max() < 1e-12

    def test_skew_sine_scalar_vs_array(self):
        lift = make_skew_sine(2.0, 0.3)
        xs = np.array([0.3, 1.7])
        ws = np.array([0.5, 0.5])
        arr = lift(xs, ws)
        for i in range(2):
            assert arr[i] == lift(float(xs[i]), float(ws[i]))

    def test_check_lift_accepts_valid(self):
        dyn.check_lift(make_arnold_family(0.3, 0.9))

    def test_check_lift_rejects_non_monotone(self):
        bad = CircleLift(0.0, lambda x, w=None: 1.5 * np.sin(x))
        with pytest.raises(ValidationError):
            dyn.check_lift(bad)


class TestDrivers:
    def test_bernoulli_probs_validation(self):
        with pytest.raises(ValidationError):
            BernoulliShift((0.5, 0.6), seed=1)
        with pytest.raises(ValidationError):
            BernoulliShift((1.0, 0.0), seed=1)

    def test_bernoulli_frequencies(self):
        drv = BernoulliShift((0.3, 0.7), seed=77)
        syms = drv.payloads(0, 200_000)
        freq = np.bincount(syms, minlength=2) / len(syms)
        assert abs(freq[0] - 0.3) < 5e-3

    def test_bernoulli_random_access(self):
        drv = BernoulliShift((0.25, 0.25, 0.5), seed=5)
        block = drv.payloads(1000, 50)
        singles = [drv.payload(1000 + i) for i in range(50)]
        assert list(block) == singles

    def test_torus_rotation_advance_consistency(self):
        drv = TorusRotation((GOLDEN, SILVER))
        s = drv.initial_state()
        one_by_one = drv.advance(drv.advance(drv.advance(s)))
        at_once = drv.advance(s, 3)
        assert np.abs(one_by_one - at_once).max() < 1e-12

    def test_almost_periodic_path(self):
        u = dyn.AlmostPeriodicPath((1.0, math.sqrt(2.0)), ((1.0, 0.5),))
        val = u(0.7)
        assert abs(val - (math.cos(0.7) + 0.5 * math.cos(math.sqrt(2) * 0.7))) < 1e-14
