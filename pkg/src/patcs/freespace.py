"""Free-space acquisition on the unit circle / sphere.

Wave propagation is spectral on a periodic padded box ``[-R, R]^d``:
``p^(xi, t) = f^(xi) cos(2 pi |xi| t)``.  Traces are projections of ``p``
on the acquisition surface onto angular masks, and coefficients against the
(unnormalised) Dirichlet eigenfunctions

    2D:  psit_{l,n}(r, theta)  = J_l(j_{l,n} r) e^{i l theta}
    3D:  psit_{l,m,n}(y)       = j_l(j_{l+1/2,n} |y|) Y_l^m(y / |y|)

are recovered either with the sine formula or from the derivative of the
time Fourier transform ``g^(rho) = int g(t) e^{-2 pi i rho t} dt`` of the
evenly extended trace.  All inner products here use Lebesgue measure.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np
import scipy.fft
from numpy.polynomial.legendre import leggauss
from scipy.ndimage import map_coordinates

from . import specfun
from ._threads import workers
from .eigenbasis import _signed_bessel, _signed_bessel_prime, box_grid

__all__ = [
    "PaddedField",
    "BoundaryTrace",
    "padded_field",
    "required_radius",
    "propagate_free",
    "iter_propagate",
    "circle_trace",
    "sphere_trace",
    "sine_formula",
    "g_hat",
    "g_hat_derivative",
    "disk_recover",
    "ball_recover",
    "probe_function",
    "circle_exponential_integral",
    "moment_g_hat",
    "disk_mode",
    "ball_mode",
]


@dataclass(frozen=True)
class PaddedField:
    """Samples on the cell-centred grid of ``[-R, R]^d`` with ``M`` cells per axis."""

    values: np.ndarray
    R: float

    @property
    def M(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.ndim

    @property
    def h(self) -> float:
        return 2.0 * self.R / self.M

    def axes(self):
        return box_grid(self.M, self.R, self.d)[0]


@dataclass
class BoundaryTrace:
    """Rows ``g[i, :]`` of the trace for angular index ``index[i]`` (``l`` in 2D, ``(l, m)`` in 3D)."""

    g: np.ndarray
    times: np.ndarray
    index: list
    convention: str = "circle"

    def row(self, key) -> np.ndarray:
        try:
            return self.g[self.index.index(key)]
        except ValueError:
            raise KeyError(f"trace has no row {key!r}") from None


def required_radius(T: float, margin: float = 0.25) -> float:
    return 1.0 + T + margin


def padded_field(fn: Callable, M: int, R: float, d: int = 2) -> PaddedField:
    """Sample ``fn(*coords)`` on the padded grid, zero outside the unit ball."""
    axes, _ = box_grid(M, R, d)
    r = np.sqrt(sum(a * a for a in axes))
    vals = np.where(r < 1.0, fn(*axes), 0.0)
    return PaddedField(vals, R)


def _check_padding(f0: PaddedField, tmax: float):
    if f0.R < 1.0 + tmax:
        raise ValueError(
            f"padding radius R = {f0.R} too small for t = {tmax}; need R >= {1.0 + tmax} "
            f"(recommended {required_radius(tmax)})"
        )


def _wavenumber(f0: PaddedField, real: bool):
    k = [scipy.fft.fftfreq(f0.M, d=f0.h)] * f0.d
    if real:
        k[-1] = scipy.fft.rfftfreq(f0.M, d=f0.h)
    grids = np.meshgrid(*k, indexing="ij", sparse=True)
    return np.sqrt(sum(g * g for g in grids))


def iter_propagate(f0: PaddedField, times: Iterable[float]):
    """Yield ``p(., t)`` for each ``t`` (lazy; snapshots are not retained)."""
    times = np.asarray(list(times), dtype=float)
    if times.size:
        _check_padding(f0, float(np.max(np.abs(times))))
    real = not np.iscomplexobj(f0.values)
    nw = workers()
    if real:
        fh = scipy.fft.rfftn(f0.values, workers=nw)
        inv = lambda a: scipy.fft.irfftn(a, s=f0.values.shape, workers=nw)
    else:
        fh = scipy.fft.fftn(f0.values, workers=nw)
        inv = lambda a: scipy.fft.ifftn(a, workers=nw)
    rho = _wavenumber(f0, real)
    for t in times:
        if t == 0:
            yield PaddedField(f0.values.copy(), f0.R)
        else:
            yield PaddedField(inv(fh * np.cos(2.0 * np.pi * rho * t)), f0.R)


def propagate_free(f0: PaddedField, times) -> list:
    """Snapshots ``p(., t)``; ``p`` is even in ``t`` and ``p(., 0) = f0``."""
    return list(iter_propagate(f0, times))


def _interp(field: PaddedField, pts: np.ndarray) -> np.ndarray:
    # pts: (d, P) physical coordinates -> index coordinates of the cell-centred grid
    idx = (pts + field.R) / field.h - 0.5
    v = field.values
    order = 1
    if np.iscomplexobj(v):
        return (map_coordinates(v.real, idx, order=order, mode="nearest")
                + 1j * map_coordinates(v.imag, idx, order=order, mode="nearest"))
    return map_coordinates(v, idx, order=order, mode="nearest")


def circle_trace(fields, times, L_max: int, n_theta: int = 512) -> BoundaryTrace:
    """``g_l(t) = int_0^{2 pi} p(e^{i theta}, t) e^{-i l theta} d theta`` for ``|l| <= L_max``.

    ``p`` is bilinearly interpolated onto ``n_theta`` uniform angles and
    the angular integral is taken with the FFT.
    """
    if n_theta <= 2 * L_max:
        raise ValueError("n_theta must exceed 2 L_max")
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    pts = np.vstack([np.cos(theta), np.sin(theta)])
    ls = list(range(-L_max, L_max + 1))
    rows = []
    for fld in fields:
        vals = _interp(fld, pts)
        c = np.fft.fft(vals) * (2.0 * np.pi / n_theta)
        rows.append(c[np.array(ls) % n_theta])
    g = np.array(rows).T if rows else np.zeros((len(ls), 0), dtype=complex)
    return BoundaryTrace(g, np.asarray(times, dtype=float), ls, "circle")


def _sphere_grid(n_theta: int, n_phi: int):
    x, w = leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    TH, PH = np.meshgrid(theta, phi, indexing="ij")
    W = np.outer(w, np.full(n_phi, 2.0 * np.pi / n_phi))
    pts = np.vstack([(np.sin(TH) * np.cos(PH)).ravel(), (np.sin(TH) * np.sin(PH)).ravel(), np.cos(TH).ravel()])
    return TH, PH, W, pts


def sphere_trace(fields, times, L_max: int, n_theta: int = 24, n_phi: int = 48) -> BoundaryTrace:
    """``g_{l,m}(t) = int_{S^2} p(x, t) conj(Y_l^m(x)) d sigma`` with unnormalised ``Y_l^m``.

    Trilinear interpolation onto a Gauss-Legendre (in ``cos theta``) x uniform
    (in ``phi``) grid; rows are ordered ``(0,0), (1,-1), (1,0), (1,1), ...``.
    """
    TH, PH, W, pts = _sphere_grid(n_theta, n_phi)
    index = [(l, m) for l in range(L_max + 1) for m in range(-l, l + 1)]
    Y = np.array([np.conj(specfun.spherical_harmonic(l, m, TH, PH)) * W for l, m in index])
    Y = Y.reshape(len(index), -1)
    rows = []
    for fld in fields:
        rows.append(Y @ _interp(fld, pts))
    g = np.array(rows).T if rows else np.zeros((len(index), 0), dtype=complex)
    return BoundaryTrace(g, np.asarray(times, dtype=float), index, "sphere")


def _trapezoid(y, t):
    return np.trapezoid(y, t) if hasattr(np, "trapezoid") else np.trapz(y, t)


def sine_formula(g, lam: float, times=None, T: float | None = None):
    """``-(1/lam) int_0^T g(t) sin(lam t) dt`` by the trapezoid rule."""
    if lam <= 0:
        raise ValueError("frequency must be positive")
    g = np.asarray(g)
    if times is None:
        if T is None:
            raise ValueError("need times or T")
        times = np.linspace(0.0, T, g.shape[-1])
    t = np.asarray(times, dtype=float)
    return -_trapezoid(g * np.sin(lam * t), t) / lam


def g_hat(g, times, oversample: int = 8):
    """Fourier transform of the evenly extended trace on a dense grid.

    Returns ``(rho, ghat)`` with ``ghat(rho) = 2 int_0^T g(t) cos(2 pi rho t) dt``
    (trapezoid rule), evaluated through a zero-padded FFT whose frequency
    spacing is ``1 / (oversample * 2 T)``.
    """
    g = np.asarray(g)
    t = np.asarray(times, dtype=float)
    dt = t[1] - t[0]
    if not np.allclose(np.diff(t), dt, rtol=1e-9, atol=1e-12):
        raise ValueError("g_hat needs uniformly spaced times")
    N = t.size - 1
    P = int(oversample) * 2 * N
    e = np.zeros(P, dtype=g.dtype)
    e[: N + 1] = g
    e[N] *= 0.5
    e[P - N:] = g[N:0:-1]
    e[P - N] *= 0.5
    ghat = dt * scipy.fft.fft(e, workers=workers())
    rho = scipy.fft.fftfreq(P, d=dt)
    half = P // 2
    return rho[:half], ghat[:half]


def g_hat_derivative(g, times, rho0: float, oversample: int = 8) -> complex:
    """``(g^)'(rho0)`` from 5-point central differences on the dense FFT grid,
    cubically interpolated to ``rho0``."""
    t = np.asarray(times, dtype=float)
    T = t[-1] - t[0]
    rho, gh = g_hat(g, t, oversample)
    drho = rho[1] - rho[0]
    if drho > 1.0 / (8.0 * T) * (1 + 1e-12):
        raise ValueError(f"derivative grid too coarse: spacing {drho:.4g} > 1/(8T) = {1 / (8 * T):.4g}")
    d = np.zeros_like(gh)
    d[2:-2] = (gh[:-4] - 8 * gh[1:-3] + 8 * gh[3:-1] - gh[4:]) / (12 * drho)
    i = int(np.floor(rho0 / drho))
    if i < 3 or i + 3 >= rho.size:
        raise ValueError("rho0 outside the resolved band")
    xs = rho[i - 1:i + 3]
    ys = d[i - 1:i + 3]
    out = 0.0
    for a in range(4):
        wgt = 1.0
        for b in range(4):
            if b != a:
                wgt *= (rho0 - xs[b]) / (xs[a] - xs[b])
        out = out + wgt * ys[a]
    return out


def disk_recover(trace: BoundaryTrace, l: int, n: int, method: str = "sine", oversample: int = 8):
    """``(f, psit_{l,n})`` from the circle trace row ``l``."""
    g = trace.row(l)
    j = float(specfun.bessel_zeros(abs(l), n).zeros[n - 1])
    jp = float(_signed_bessel_prime(l, j))
    if method == "sine":
        return jp * j * sine_formula(g, j, trace.times)
    if method in ("hankel", "hankel-derivative"):
        dg = g_hat_derivative(g, trace.times, j / (2 * np.pi), oversample)
        return dg / (2 * np.pi**2 * j * jp)
    raise ValueError(f"unknown method {method!r}")


def ball_recover(trace: BoundaryTrace, l: int, m: int, n: int, method: str = "sine", oversample: int = 8):
    """``(f, psit_{l,m,n})`` from the sphere trace row ``(l, m)``."""
    g = trace.row((l, m))
    lam = float(specfun.bessel_zeros(l + 0.5, n).zeros[n - 1])
    jp = float(specfun.spherical_jn_prime(l, lam))
    if method == "sine":
        return jp * lam * sine_formula(g, lam, trace.times)
    if method in ("hankel", "hankel-derivative"):
        dg = g_hat_derivative(g, trace.times, lam / (2 * np.pi), oversample)
        return dg / (4 * np.pi * lam**2 * jp)
    raise ValueError(f"unknown method {method!r}")


def probe_function(mask_values, nodes, weights, rho: float, y, d: int = 2):
    """Quadrature of ``psi_rho(y) = pi rho^{d/2} int Phi(x) |x-y|^{1-d/2} J_{d/2-1}(2 pi rho |x-y|) d sigma(x)``.

    Parameters
    ----------
    mask_values : (Q,) array
        ``Phi`` at the quadrature nodes.
    nodes : (d, Q) array
        Points on the unit sphere ``S^{d-1}``.
    weights : (Q,) array
        Surface quadrature weights.
    y : (d,) or (d, P) array
        Evaluation points, strictly inside the unit ball.
    """
    nodes = np.asarray(nodes, dtype=float)
    y = np.asarray(y, dtype=float)
    single = y.ndim == 1
    if single:
        y = y[:, None]
    if np.any(np.sum(y * y, axis=0) >= 1.0):
        raise ValueError("evaluation points must lie strictly inside the unit ball")
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if rho == 0:
        out = np.zeros(y.shape[1], dtype=complex)
        return out[0] if single else out
    dist = np.sqrt(((nodes[:, :, None] - y[:, None, :]) ** 2).sum(axis=0))  # (Q, P)
    nu = d / 2.0 - 1.0
    K = np.asarray(specfun.bessel_j(nu, 2.0 * np.pi * rho * dist.ravel())).reshape(dist.shape)
    if nu != 0:
        K = K * dist ** (-nu)
    out = np.pi * rho ** (d / 2.0) * ((np.asarray(mask_values) * np.asarray(weights)) @ K)
    return out[0] if single else out


def circle_exponential_integral(zeta, l: int, n_nodes: int = 256) -> complex:
    """Trapezoid value of ``int_0^{2 pi} exp(-2 pi i zeta . e_theta) e^{i l theta} d theta``.

    The closed form is ``2 pi (-i)^l e^{i l alpha} J_l(2 pi |zeta|)`` with
    ``zeta = |zeta| e_alpha``.
    """
    theta = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
    z1, z2 = zeta
    vals = np.exp(-2j * np.pi * (z1 * np.cos(theta) + z2 * np.sin(theta)) + 1j * l * theta)
    return complex(vals.sum() * 2.0 * np.pi / n_nodes)


def moment_g_hat(f_values, axes, h: float, mask: Callable, rho: float,
                 n_omega: int = 256, n_theta: int = 256) -> complex:
    """Fourier-side evaluation of ``g^(rho)`` for a circle mask (2D).

    ``g^(rho) = rho/2 int_{S^1} f^(rho w) c(rho w) d sigma(w)`` with
    ``c(xi) = int_{S^1} conj(Phi(x)) e^{2 pi i xi . x} d sigma(x)``; ``f^`` is a
    direct quadrature over the supplied grid.  Used to check the moment
    identity independently of any time integration.
    """
    alpha = 2.0 * np.pi * np.arange(n_omega) / n_omega
    theta = 2.0 * np.pi * np.arange(n_theta) / n_theta
    X, Y = axes
    inside = np.abs(f_values) > 0
    fx, fy, fv = X[inside], Y[inside], f_values[inside]
    conj_mask = np.conj(mask(theta))
    total = 0.0 + 0.0j
    for a in alpha:
        w = np.array([np.cos(a), np.sin(a)])
        fhat = h * h * np.sum(fv * np.exp(-2j * np.pi * rho * (w[0] * fx + w[1] * fy)))
        c = (2 * np.pi / n_theta) * np.sum(conj_mask * np.exp(2j * np.pi * rho * (w[0] * np.cos(theta) + w[1] * np.sin(theta))))
        total += fhat * c
    return 0.5 * rho * total * (2 * np.pi / n_omega)


def disk_mode(l: int, n: int):
    """Sampler ``(x, y) -> J_l(j_{l,n} r) e^{i l theta}`` of the free-space disk mode, zero outside."""
    j = float(specfun.bessel_zeros(abs(l), n).zeros[n - 1])

    def fn(x, y):
        r = np.hypot(x, y)
        inside = r < 1.0
        return np.where(inside, _signed_bessel(l, np.where(inside, r, 0.0) * j), 0.0) * np.exp(1j * l * np.arctan2(y, x))

    return fn


def ball_mode(l: int, m: int, n: int):
    """Sampler ``(x, y, z) -> j_l(lam r) Y_l^m`` (unnormalised), zero outside the unit ball."""
    lam = float(specfun.bessel_zeros(l + 0.5, n).zeros[n - 1])

    def fn(x, y, z):
        r = np.sqrt(x * x + y * y + z * z)
        inside = r < 1.0
        rr = np.where(inside, r, 0.0)
        radial = np.asarray(specfun.spherical_jn(l, rr * lam))
        th = np.arccos(np.clip(np.where(rr > 0, z / np.where(rr > 0, rr, 1.0), 1.0), -1.0, 1.0))
        ph = np.arctan2(y, x)
        Y = specfun.spherical_harmonic(l, m, th, ph)
        val = radial * Y
        if m == 0:
            val = np.real(val)
        return np.where(inside, val, 0.0)

    return fn
