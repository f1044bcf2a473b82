import math

import numpy as np
import pytest

from patcs.freespace import (
    BoundaryTrace,
    PaddedField,
    ball_mode,
    ball_recover,
    circle_exponential_integral,
    circle_trace,
    disk_recover,
    g_hat,
    g_hat_derivative,
    iter_propagate,
    padded_field,
    probe_function,
    propagate_free,
    required_radius,
    sine_formula,
    sphere_trace,
)
from patcs.specfun import bessel_j
from patcs.wavesim import SimConfig, simulate


def _bump(x, y):
    return np.clip(1 - (x * x + y * y), 0, None) ** 4


class TestPropagation:
    f0 = padded_field(_bump, 64, 3.0)

    def test_identity_at_zero(self):
        p = propagate_free(self.f0, [0.0])[0]
        assert np.array_equal(p.values, self.f0.values)

    def test_even(self):
        a, b = propagate_free(self.f0, [1.3, -1.3])
        np.testing.assert_allclose(a.values, b.values, atol=1e-14)

    def test_norm_non_increasing(self):
        n0 = np.linalg.norm(self.f0.values)
        for p in iter_propagate(self.f0, [0.5, 1.0, 1.9]):
            assert np.linalg.norm(p.values) <= n0 * (1 + 1e-12)

    def test_spectral_energy(self):
        # |f^ cos|^2 + |f^ sin|^2 = |f|^2 through the propagator at t and a quarter period shift
        f = self.f0.values
        p = propagate_free(self.f0, [0.7])[0].values
        fh = np.fft.fftn(f)
        k = np.fft.fftfreq(64, d=self.f0.h)
        rho = np.hypot(*np.meshgrid(k, k, indexing="ij"))
        q = np.fft.ifftn(fh * np.sin(2 * np.pi * rho * 0.7)).real
        assert np.sum(p**2) + np.sum(q**2) == pytest.approx(np.sum(f**2), rel=1e-10)

    def test_padding_check(self):
        with pytest.raises(ValueError):
            propagate_free(self.f0, [2.5])
        assert required_radius(8) == 9.25

    def test_complex(self):
        f = PaddedField(self.f0.values * (1 + 2j), 3.0)
        p = propagate_free(f, [1.0])[0].values
        q = propagate_free(self.f0, [1.0])[0].values
        np.testing.assert_allclose(p, q * (1 + 2j), atol=1e-13)

    def test_matches_fd(self):
        # FD on [-4, 4]^2 (mapped to the unit square, speed 1/8) vs spectral, before boundary influence
        J = 255
        t = 2.5
        x = -4 + 8 * np.arange(1, J + 1) / (J + 1)
        X, Y = np.meshgrid(x, x, indexing="ij")
        fd = simulate(_bump(X, Y), SimConfig(J, t / 8), snapshot_steps=[160], sides=())
        R = 4 * J / (J + 1)
        sp = propagate_free(padded_field(_bump, J, R), [t])[0].values
        ref = fd.snapshots[160]
        assert np.linalg.norm(sp - ref) / np.linalg.norm(ref) < 1e-2


class TestCircleTrace:
    def _field(self, fn, M=512, R=2.0):
        from patcs.eigenbasis import box_grid

        (X, Y), _ = box_grid(M, R)
        return PaddedField(fn(X, Y), R)

    def test_constant(self):
        tr = circle_trace([self._field(lambda x, y: np.ones_like(x))], [0.0], 4)
        assert tr.row(0)[0] == pytest.approx(2 * math.pi, rel=1e-12)
        assert np.max(np.abs(np.delete(tr.g[:, 0], 4))) < 1e-12

    def test_cos3(self):
        tr = circle_trace([self._field(lambda x, y: x**3 - 3 * x * y * y)], [0.0], 5)
        assert tr.row(3)[0] == pytest.approx(math.pi, rel=1e-3)
        assert tr.row(-3)[0] == pytest.approx(math.pi, rel=1e-3)
        others = [abs(tr.row(l)[0]) for l in range(-5, 6) if abs(l) != 3]
        assert max(others) < 1e-3

    def test_checks(self):
        with pytest.raises(ValueError):
            circle_trace([], [], 10, n_theta=16)
        with pytest.raises(KeyError):
            circle_trace([], [], 2).row(7)


class TestSphereTrace:
    def _field(self, fn, M=64, R=1.5):
        from patcs.eigenbasis import box_grid

        axes, _ = box_grid(M, R, 3)
        return PaddedField(fn(*axes), R)

    def test_constant(self):
        tr = sphere_trace([self._field(lambda x, y, z: np.ones_like(x))], [0.0], 3)
        assert tr.row((0, 0))[0] == pytest.approx(4 * math.pi, rel=1e-12)
        assert np.max(np.abs(tr.g[1:, 0])) < 1e-12

    def test_y21(self):
        fld = self._field(lambda x, y, z: -3 * z * (x + 1j * y), M=96)
        tr = sphere_trace([fld], [0.0], 3)
        want = 4 * math.pi / 5 * math.factorial(3) / math.factorial(1)
        assert tr.row((2, 1))[0] == pytest.approx(want, rel=1e-2)
        rest = [abs(tr.g[i, 0]) for i, key in enumerate(tr.index) if key != (2, 1)]
        assert max(rest) < 1e-2 * want

    def test_grid_refinement(self):
        fld = self._field(lambda x, y, z: np.exp(0.7 * x - 0.4 * y + 0.2 * z))
        a = sphere_trace([fld], [0.0], 4)
        b = sphere_trace([fld], [0.0], 4, n_theta=48, n_phi=96)
        assert np.max(np.abs(a.g - b.g)) < 1e-3 * np.max(np.abs(b.g))


class TestFormulas:
    def test_sine_zero(self):
        assert sine_formula(np.zeros(50), 2.0, T=3.0) == 0

    def test_sine_closed_form(self):
        lam, T = 2.7, 3.0
        t = np.linspace(0, T, 20001)
        want = -(T / 2 - math.sin(2 * lam * T) / (4 * lam)) / lam
        assert sine_formula(np.sin(lam * t), lam, t) == pytest.approx(want, rel=1e-7)

    def test_sine_bad(self):
        with pytest.raises(ValueError):
            sine_formula(np.ones(3), 0.0, T=1.0)
        with pytest.raises(ValueError):
            sine_formula(np.ones(3), 1.0)

    def test_g_hat(self):
        t = np.linspace(0, 2, 401)
        g = np.exp(-((t - 0.6) ** 2) * 20)
        rho, gh = g_hat(g, t)
        w = np.full(t.size, t[1])
        w[[0, -1]] /= 2
        for r in (0.0, 0.8, 3.1):
            i = int(round(r / (rho[1] - rho[0])))
            direct = 2 * np.sum(w * g * np.cos(2 * np.pi * rho[i] * t))
            assert gh[i] == pytest.approx(direct, abs=1e-12)

    def test_g_hat_uniform(self):
        with pytest.raises(ValueError):
            g_hat(np.ones(3), [0.0, 0.1, 0.5])

    def test_g_hat_derivative(self):
        t = np.linspace(0, 3, 601)
        g = np.exp(-((t - 1.0) ** 2) * 8)
        r0 = 0.37
        eps = 1e-6
        w = np.full(t.size, t[1])
        w[[0, -1]] /= 2
        exact = lambda r: 2 * np.sum(w * g * np.cos(2 * np.pi * r * t))
        want = (exact(r0 + eps) - exact(r0 - eps)) / (2 * eps)
        assert g_hat_derivative(g, t, r0) == pytest.approx(want, rel=1e-4, abs=1e-8)
        with pytest.raises(ValueError):
            g_hat_derivative(g, t, r0, oversample=2)

    def test_zero_traces(self):
        t = np.linspace(0, 3, 101)
        tr = BoundaryTrace(np.zeros((5, 101)), t, list(range(-2, 3)))
        assert disk_recover(tr, 2, 1) == 0
        tr3 = BoundaryTrace(np.zeros((4, 101)), t, [(0, 0), (1, -1), (1, 0), (1, 1)], "sphere")
        assert ball_recover(tr3, 1, 0, 2) == 0
        with pytest.raises(ValueError):
            disk_recover(tr, 1, 1, method="bogus")


class TestProbe:
    nodes_theta = 2 * np.pi * np.arange(256) / 256
    nodes = np.vstack([np.cos(nodes_theta), np.sin(nodes_theta)])
    weights = np.full(256, 2 * np.pi / 256)

    @pytest.mark.parametrize("l,rho", [(0, 0.7), (2, 1.3), (-3, 2.2)])
    def test_closed_form(self, l, rho):
        mask = np.exp(1j * l * self.nodes_theta)
        r, nu = 0.45, 0.8
        y = np.array([r * math.cos(nu), r * math.sin(nu)])
        got = probe_function(mask, self.nodes, self.weights, rho, y)
        sgn = (-1) ** l if l < 0 else 1
        Jl = lambda x: sgn * bessel_j(abs(l), x)
        want = 2 * math.pi**2 * rho * Jl(2 * math.pi * rho) * np.exp(1j * l * nu) * Jl(2 * math.pi * rho * r)
        assert abs(got - want) < 1e-6

    def test_zero_rho(self):
        assert probe_function(np.ones(256), self.nodes, self.weights, 0.0, np.zeros(2)) == 0

    def test_checks(self):
        with pytest.raises(ValueError):
            probe_function(np.ones(256), self.nodes, self.weights, 1.0, np.array([1.0, 0.0]))
        with pytest.raises(ValueError):
            probe_function(np.ones(256), self.nodes, self.weights, -1.0, np.zeros(2))

    @pytest.mark.parametrize("l", [0, 1, 4, -2])
    def test_exponential_integral(self, l):
        zeta = np.array([0.6, -0.9])
        mag, alpha = np.hypot(*zeta), math.atan2(zeta[1], zeta[0])
        sgn = (-1) ** l if l < 0 else 1
        want = 2 * math.pi * (-1j) ** l * np.exp(1j * l * alpha) * sgn * bessel_j(abs(l), 2 * math.pi * mag)
        assert abs(circle_exponential_integral(zeta, l) - want) < 1e-8


@pytest.mark.slow
def test_ball_dipole_mode():
    # f = psit_{1,0,1}: its own coefficient equals its quadrature norm, neighbours vanish
    M, T = 96, 3.0
    R = required_radius(T)
    f0 = padded_field(ball_mode(1, 0, 1), M, R, d=3)
    times = np.linspace(0, T, 301)
    tr = sphere_trace(iter_propagate(f0, times), times, 2)
    norm2 = np.sum(f0.values**2) * f0.h**3
    got = ball_recover(tr, 1, 0, 1).real
    assert got == pytest.approx(norm2, rel=5e-2)
    assert abs(ball_recover(tr, 1, 0, 2)) < 5e-2 * norm2
    assert abs(ball_recover(tr, 2, 0, 1)) < 5e-2 * norm2
