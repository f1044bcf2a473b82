import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from patcs.eigenbasis import ball_eigen
from patcs.riesz import (
    FDDispersion,
    IllConditionedError,
    NoBoundError,
    RieszSystem,
    StableSet,
    combine_sides,
    frame_recover,
    gram_cos,
    lbar_max,
    lower_bound_cos,
    recover_ball,
    recover_disk,
    recover_square_side,
    separation,
    square_row_frequencies,
    trapezoid_weights,
)
from patcs.eigenbasis import CoeffGrid
from patcs.specfun import bessel_zeros
from patcs.wavesim import MeasurementSet, synth_measurements

# smallest tail-Gram eigenvalue observed over l in {1, 4, 16, 64} (64 modes, T = 3)
TAIL_GRAM_FLOOR = 1.03


def _l2sq(g, t):
    return float(np.sum(trapezoid_weights(t) * g * g))


class TestBounds:
    def test_separation(self):
        assert separation([1.0, 3.0, 3.5]) == 0.5
        assert separation([0.2, 5.0]) == pytest.approx(0.4)

    def test_limit(self):
        lam = np.pi * np.arange(1, 6)
        assert lower_bound_cos(lam, 1e8) == pytest.approx(1 / (2 * math.pi))

    def test_closed_form(self):
        lam = [3.115, 6.23]
        want = (1 - (math.pi / (1.01 * 3.115)) ** 2) / (2 * math.pi)
        assert lower_bound_cos(lam, 1.01) == pytest.approx(want, rel=1e-14)
        assert want == pytest.approx(4.6075e-4, rel=1e-4)

    def test_no_bound(self):
        with pytest.raises(NoBoundError):
            lower_bound_cos([1.0, 2.0], 3.0)
        assert RieszSystem(np.array([1.0, 2.0]), 3.0).lower_bound is None

    @pytest.mark.parametrize("l", [0, 1, 5, 20])
    def test_disk_constant(self, l):
        lam = bessel_zeros(l, 40).zeros
        A = lower_bound_cos(lam, 3.0)
        assert A >= (1 - 1.018 / 9) / (2 * math.pi)
        assert np.linalg.eigvalsh(gram_cos(lam, 3.0))[0] >= A


class TestGram:
    def test_harmonic(self):
        np.testing.assert_allclose(gram_cos(np.pi * np.arange(1, 8), 2.0), np.eye(7), atol=1e-14)

    def test_quadrature(self):
        lam = np.array([1.0, 2.0, 4.0])
        t = np.linspace(0, 3, 1_000_001)
        w = trapezoid_weights(t)
        C = np.cos(np.outer(lam, t))
        np.testing.assert_allclose(gram_cos(lam, 3.0), (C * w) @ C.T, atol=1e-9)

    def test_distinct(self):
        with pytest.raises(ValueError):
            gram_cos([1.0, 1.0], 2.0)

    def test_conditioning_degrades_with_l(self):
        conds = []
        for l in range(1, 31):
            lam = np.pi * np.hypot(np.arange(1, 33), l)
            ev = np.linalg.eigvalsh(gram_cos(lam, 3.0))
            conds.append(ev[-1] / ev[0])
        assert np.all(np.diff(conds) > 0)

    @pytest.mark.parametrize("l", [1, 4, 16, 64])
    def test_tail_floor(self, l):
        n = np.arange(l, l + 64)
        lam = np.pi * np.hypot(n, l)
        assert np.linalg.eigvalsh(gram_cos(lam, 3.0))[0] >= TAIL_GRAM_FLOOR


class TestFrameRecover:
    t = np.linspace(0, 3, 3001)
    lam = np.pi * np.arange(1, 11) * 0.75

    def test_single(self):
        a = frame_recover(np.cos(self.lam[1] * self.t), self.lam, times=self.t)
        np.testing.assert_allclose(a, np.eye(10)[1], atol=1e-8)

    @pytest.mark.parametrize("gram", ["discrete", "exact"])
    def test_round_trip(self, gram):
        a = np.random.default_rng(0).standard_normal(10)
        g = a @ np.cos(np.outer(self.lam, self.t))
        got = frame_recover(g, self.lam, times=self.t, gram=gram)
        tol = 1e-8 if gram == "discrete" else 1e-5
        assert np.linalg.norm(got - a) / np.linalg.norm(a) < tol

    def test_uniform_default_grid(self):
        a = np.random.default_rng(1).standard_normal(10)
        g = a @ np.cos(np.outer(self.lam, self.t))
        np.testing.assert_allclose(frame_recover(g, self.lam, T=3.0), a, atol=1e-9)

    def test_rows(self):
        A = np.random.default_rng(2).standard_normal((3, 10))
        G = A @ np.cos(np.outer(self.lam, self.t))
        np.testing.assert_allclose(frame_recover(G, self.lam, times=self.t), A, atol=1e-9)

    def test_noise_stability(self):
        rng = np.random.default_rng(3)
        A = lower_bound_cos(self.lam, 3.0)
        for _ in range(20):
            a = rng.standard_normal(10)
            noise = 0.05 * rng.standard_normal(self.t.size)
            g = a @ np.cos(np.outer(self.lam, self.t)) + noise
            err = np.linalg.norm(frame_recover(g, self.lam, times=self.t) - a)
            assert err <= math.sqrt(_l2sq(noise, self.t) / A)

    def test_singular(self):
        lam = np.array([1.0, 1.0 + 1e-9, 3.0])
        g = np.cos(self.t)
        with pytest.raises(IllConditionedError) as exc:
            frame_recover(g, lam, times=self.t)
        assert exc.value.cond > 1e12
        a, cond = frame_recover(g, lam, times=self.t, truncate=True, return_cond=True)
        assert cond > 1e12 and np.all(np.isfinite(a))

    def test_argument_checks(self):
        with pytest.raises(ValueError):
            frame_recover(np.zeros(5), [1.0])
        with pytest.raises(ValueError):
            frame_recover(np.zeros(3), [1.0, 2.0, 3.0, 4.0], T=1.0)
        with pytest.raises(ValueError):
            frame_recover(np.zeros(30), [1.0], T=1.0, gram="bogus")


class TestLbar:
    def test_values(self):
        assert lbar_max(3.0)[0] == 4
        assert lbar_max(1.22)[0] == 1
        assert (math.sqrt(20) + math.sqrt(17)) / 3 < 3 < (math.sqrt(29) + math.sqrt(26)) / 3

    def test_constant(self):
        s = (math.sqrt(20) + math.sqrt(17)) / 3
        assert lbar_max(3.0)[1] == pytest.approx(2 * math.pi / (1 - (s / 3) ** 2))

    def test_too_short(self):
        with pytest.raises(ValueError):
            lbar_max(1.0)


class TestStableSet:
    def test_presets(self):
        assert StableSet.for_noise("right", 1e-4).b == 20
        assert StableSet.for_noise("right", 0.05).b == 15
        assert StableSet.for_noise("top", 0.25).b == 8
        assert StableSet.for_noise("top", 0.5).b == 8

    def test_masks(self):
        r = StableSet("right").mask(4)
        assert r[3, 0] and not r[0, 3] and r[2, 2]
        np.testing.assert_array_equal(StableSet("top").mask(4), r.T)
        assert StableSet("right", b=2, tail=False).mask(4).sum() == 4
        with pytest.raises(ValueError):
            StableSet("left").mask(3)


def _square_ms(C, side, L, t):
    return MeasurementSet(side, np.array([synth_measurements(C, l, t, side=side) for l in range(1, L + 1)]), t)


class TestSquareRecovery:
    t = np.linspace(0, 3, 6001)

    def test_single_mode(self):
        C = np.zeros((16, 16))
        C[1, 2] = 1.0
        G = _square_ms(C, "right", 16, self.t)
        out = recover_square_side(G, StableSet.for_noise("right", 1e-4))
        assert out.coeffs[1, 2] == pytest.approx(1.0, abs=1e-8)
        rest = out.masked().copy()
        rest[1, 2] = 0
        assert np.max(np.abs(rest)) < 1e-8

    def test_zero(self):
        G = MeasurementSet("right", np.zeros((8, self.t.size)), self.t)
        out = recover_square_side(G)
        assert np.all(out.coeffs == 0)
        np.testing.assert_array_equal(out.valid, StableSet("right").mask(8))

    def test_two_sides(self):
        C = np.random.default_rng(4).standard_normal((16, 16))
        right = recover_square_side(_square_ms(C, "right", 16, self.t))
        top = recover_square_side(_square_ms(C, "top", 16, self.t))
        comb = combine_sides(top, right)
        assert comb.valid.all()
        assert np.max(np.abs(comb.coeffs - C)) < 1e-6

    def test_short_time(self):
        t = np.linspace(0, 0.5, 100)
        with pytest.raises(ValueError):
            recover_square_side(MeasurementSet("right", np.zeros((2, 100)), t))
        with pytest.raises(ValueError):
            recover_square_side(MeasurementSet("left", np.zeros((2, self.t.size)), self.t))

    def test_dispersion(self):
        h, dt = 1 / 64, 1 / 128
        disp = FDDispersion(h, dt)
        lam, wt = square_row_frequencies(3, 5, disp)
        lam0, wt0 = square_row_frequencies(3, 5)
        assert np.all(lam < lam0) and np.allclose(lam, lam0, rtol=1e-2)
        # one-sided stencil weight is n pi (1 + (n pi h)^2 / 3 + ...)
        x = np.pi * np.arange(1, 6) * h
        np.testing.assert_allclose(wt / wt0, 1 + x**2 / 3, rtol=2e-3)


class TestCombine:
    def test_identical(self):
        g = CoeffGrid(np.arange(9.0).reshape(3, 3))
        np.testing.assert_array_equal(combine_sides(g, g).coeffs, g.coeffs)

    def test_disjoint(self):
        lower = np.tril(np.ones((4, 4), bool), -1)
        C = np.random.default_rng(5).standard_normal((4, 4))
        right = CoeffGrid(C, lower)
        top = CoeffGrid(C + 10, ~lower)
        out = combine_sides(top, right)
        np.testing.assert_array_equal(out.coeffs, np.where(lower, C, C + 10))
        assert out.valid.all()

    def test_diagonal_average(self):
        out = combine_sides(CoeffGrid(np.full((3, 3), 2.0)), CoeffGrid(np.zeros((3, 3))))
        np.testing.assert_array_equal(np.diag(out.coeffs), [1.0, 1.0, 1.0])
        assert out.coeffs[0, 2] == 2.0 and out.coeffs[2, 0] == 0.0

    def test_shape(self):
        with pytest.raises(ValueError):
            combine_sides(CoeffGrid(np.zeros((2, 2))), CoeffGrid(np.zeros((3, 3))))


class TestDisk:
    t = np.linspace(0, 3, 4001)

    def _ms(self, C, ls):
        return MeasurementSet("circle", np.array([synth_measurements(C, l, self.t, model="disk") for l in ls]),
                              self.t, rows=np.array(ls))

    def test_single_mode(self):
        C = np.zeros((4, 12))
        C[1, 1] = 1.0
        out = recover_disk(self._ms(C, [0, 1, 2]), 12)
        want = np.zeros((3, 12))
        want[1, 1] = 1.0
        assert np.max(np.abs(out.coeffs - want)) < 1e-8

    def test_negative_rows(self):
        C = np.random.default_rng(6).standard_normal((4, 10))
        out = recover_disk(self._ms(C, [-3, 3]), 10)
        np.testing.assert_allclose(out.coeffs, C[[3, 3]], atol=1e-8)

    def test_stability_bound(self):
        rng = np.random.default_rng(7)
        T = 3.0
        bound = 0.55 * T * T / (T * T - 1.018)
        for l in (0, 2, 7):
            C = np.zeros((8, 20))
            C[l] = rng.standard_normal(20) / np.arange(1, 21)
            g = synth_measurements(C, l, self.t, model="disk")
            assert np.sum(C[l] ** 2) <= bound * _l2sq(g, self.t)

    def test_short(self):
        t = np.linspace(0, 1.0, 200)
        with pytest.raises(ValueError):
            recover_disk(MeasurementSet("circle", np.zeros((1, 200)), t), 4)


class TestBall:
    t = np.linspace(0, 3, 4001)

    def _row(self, m, a):
        lam = np.array([ball_eigen(m, k, 0).eigenvalue for k in range(1, len(a) + 1)])
        c = np.array([ball_eigen(m, k, 0).boundary_weight for k in range(1, len(a) + 1)])
        return (c * a) @ np.cos(np.outer(lam, self.t))

    def test_harmonic_gram(self):
        lam = bessel_zeros(0.5, 6).zeros
        G = gram_cos(lam, 2.0)
        np.testing.assert_allclose(G, np.diag(np.diag(G)), atol=1e-12)

    def test_single_mode(self):
        a = np.zeros(6)
        a[2] = 1.0
        out = recover_ball({(0, 0): self._row(0, a)}, self.t, 6)
        np.testing.assert_allclose(out[(0, 0)], a, atol=1e-10)

    def test_random(self):
        rng = np.random.default_rng(8)
        rows, truth = {}, {}
        for m, p in [(0, 0), (1, -1), (3, 2)]:
            truth[(m, p)] = rng.standard_normal(8)
            rows[(m, p)] = self._row(m, truth[(m, p)])
        out = recover_ball(rows, self.t, 8)
        for key in rows:
            assert np.linalg.norm(out[key] - truth[key]) / np.linalg.norm(truth[key]) < 1e-8

    def test_stability_bound(self):
        rng = np.random.default_rng(9)
        T = 3.0
        for m in (0, 2, 5):
            a = rng.standard_normal(12)
            g = self._row(m, a)
            assert np.sum(a * a) <= (T * T / (T * T - 1)) / math.pi * _l2sq(g, self.t)

    def test_checks(self):
        with pytest.raises(ValueError):
            recover_ball({(1, 2): np.zeros(self.t.size)}, self.t, 3)
        with pytest.raises(ValueError):
            recover_ball({(0, 0): np.zeros(10)}, np.linspace(0, 1, 10), 3)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-5, 5), min_size=6, max_size=6))
def test_round_trip_property(a):
    a = np.array(a)
    t = np.linspace(0, 3, 1501)
    lam = bessel_zeros(1, 6).zeros
    g = a @ np.cos(np.outer(lam, t))
    np.testing.assert_allclose(frame_recover(g, lam, times=t), a, atol=1e-8)
