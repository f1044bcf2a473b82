"""Dirichlet-Laplacian eigenpairs on the unit square, disk and ball, the 2D
discrete sine transform, partial-sum synthesis and the Shepp-Logan phantom.

Grid convention for the square: a field of size ``J x J`` holds samples at the
interior nodes ``x_i = i / (J + 1)``, ``i = 1..J``, first axis ``x1``, second
axis ``x2``.  With this convention the continuum coefficients of a band-limited
field satisfy::

    (f, phi_{n,k}) = dst2(F)[n-1, k-1] / (J + 1)
    F              = (J + 1) * dst2(C)

Inner products for the disk use the normalised measure ``dx / (2 pi)`` (and
``d theta / (2 pi)`` on the circle), which makes the disk eigenfunctions
orthonormal.  Ball eigenfunctions use orthonormal spherical harmonics and the
Lebesgue measure.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from . import specfun

__all__ = [
    "ScalarField",
    "CoeffGrid",
    "Eigenpair",
    "square_eigen",
    "disk_eigen",
    "ball_eigen",
    "dst1",
    "dst2",
    "idst2",
    "synthesize",
    "analyze",
    "interior_nodes",
    "box_grid",
    "shepp_logan",
    "SHEPP_LOGAN_ELLIPSES",
]


@dataclass(frozen=True)
class ScalarField:
    """Samples of a real function on a uniform grid.

    ``domain`` is one of ``"square"`` (interior nodes of ``[0,1]^d``),
    ``"box"`` (cell centres of ``[-R, R]^d``), ``"disk"`` or ``"ball"``
    (bounding boxes ``[-1, 1]^d`` with an inside mask).
    """

    values: np.ndarray
    domain: str = "square"
    h: float | None = None

    def __post_init__(self):
        v = np.asarray(self.values)
        if not np.all(np.isfinite(v)):
            raise ValueError("field values must be finite")
        object.__setattr__(self, "values", v)
        if self.h is None:
            object.__setattr__(self, "h", 1.0 / (v.shape[0] + 1))

    @property
    def shape(self):
        return self.values.shape


@dataclass
class CoeffGrid:
    """Generalised Fourier coefficients ``coeffs[n-1, k-1] = (f, phi_{n,k})``
    with a validity mask; invalid entries are kept at exactly zero.

    Square grids are ``J x J``; disk grids hold one row per angular index.
    """

    coeffs: np.ndarray
    valid: np.ndarray | None = None

    def __post_init__(self):
        self.coeffs = np.array(self.coeffs, dtype=float)
        if self.coeffs.ndim != 2:
            raise ValueError(f"coefficient grid must be 2D, got shape {self.coeffs.shape}")
        if self.valid is None:
            self.valid = np.ones(self.coeffs.shape, dtype=bool)
        self.valid = np.asarray(self.valid, dtype=bool)
        if self.valid.shape != self.coeffs.shape:
            raise ValueError("valid mask and coefficients differ in shape")
        self.coeffs[~self.valid] = 0.0

    @property
    def J(self) -> int:
        return self.coeffs.shape[0]

    def masked(self) -> np.ndarray:
        return np.where(self.valid, self.coeffs, 0.0)


class Eigenpair(NamedTuple):
    eigenvalue: float
    sampler: Callable
    boundary_weight: float | None = None


# ---------------------------------------------------------------------------
# eigenfunctions
# ---------------------------------------------------------------------------

def square_eigen(n: int, k: int) -> Eigenpair:
    """``lambda = pi sqrt(n^2 + k^2)`` and ``phi(x1, x2) = 2 sin(n pi x1) sin(k pi x2)``."""
    if n < 1 or k < 1:
        raise ValueError(f"square eigen-indices must be >= 1, got ({n}, {k})")

    def sampler(x1, x2):
        return 2.0 * np.sin(n * np.pi * np.asarray(x1)) * np.sin(k * np.pi * np.asarray(x2))

    return Eigenpair(np.pi * math.hypot(n, k), sampler, None)


def _signed_bessel(n: int, x):
    """``J_n`` for any integer ``n`` via ``J_{-n} = (-1)^n J_n``."""
    sign = (-1) ** n if n < 0 else 1
    return sign * np.asarray(specfun.bessel_j(abs(n), x))


def _signed_bessel_prime(n: int, x):
    sign = (-1) ** n if n < 0 else 1
    return sign * np.asarray(specfun.bessel_j_prime(abs(n), x))


def disk_eigen(n: int, k: int) -> Eigenpair:
    """Disk eigenpair ``phi = sqrt(2)/|J_n'(j)| J_n(j rho) e^{i n theta}``, ``lambda = j = j_{|n|,k}``.

    The boundary weight ``c_{n,k} = sqrt(2) j sign(J_n'(j))`` satisfies
    ``d_nu phi = c_{n,k} e^{i n theta}`` on the unit circle.
    """
    if k < 1:
        raise ValueError(f"radial index must be >= 1, got {k}")
    j = float(specfun.bessel_zeros(abs(n), k).zeros[k - 1])
    jp = float(_signed_bessel_prime(n, j))
    amp = math.sqrt(2.0) / abs(jp)

    def sampler(rho, theta):
        rho = np.asarray(rho, dtype=float)
        inside = rho <= 1.0
        radial = amp * _signed_bessel(n, np.where(inside, rho, 1.0) * j)
        return np.where(inside, radial, 0.0) * np.exp(1j * n * np.asarray(theta, dtype=float))

    return Eigenpair(j, sampler, math.sqrt(2.0) * j * math.copysign(1.0, jp))


def ball_eigen(n: int, k: int, l: int) -> Eigenpair:
    """Ball eigenpair ``phi = sqrt(2)/|j_n'(lam)| j_n(lam rho) Y_n^l`` with ``lam = j_{n+1/2,k}``.

    ``Y_n^l`` is the orthonormal spherical harmonic, so the family is
    orthonormal in ``L^2`` of the ball.  The boundary weight is
    ``c_{n,k} = sqrt(2) lam sign(j_n'(lam))``.
    """
    if k < 1 or n < 0 or abs(l) > n:
        raise ValueError(f"invalid ball index (n={n}, k={k}, l={l})")
    lam = float(specfun.bessel_zeros(n + 0.5, k).zeros[k - 1])
    jp = float(specfun.spherical_jn_prime(n, lam))
    amp = math.sqrt(2.0) / abs(jp)

    def sampler(rho, theta, phi):
        rho = np.asarray(rho, dtype=float)
        inside = rho <= 1.0
        radial = amp * np.asarray(specfun.spherical_jn(n, np.where(inside, rho, 1.0) * lam))
        return np.where(inside, radial, 0.0) * specfun.spherical_harmonic(n, l, theta, phi, normalized=True)

    return Eigenpair(lam, sampler, math.sqrt(2.0) * lam * math.copysign(1.0, jp))


# ---------------------------------------------------------------------------
# discrete sine transform
# ---------------------------------------------------------------------------

def dst1(a: np.ndarray, axis: int = -1) -> np.ndarray:
    """Unnormalised DST-I ``sum_m a_m sin(pi n m / (J+1))`` along ``axis``.

    Realised as minus the imaginary part of a zero-padded FFT of length
    ``2 (J + 1)``.
    """
    a = np.asarray(a, dtype=float)
    J = a.shape[axis]
    a = np.moveaxis(a, axis, -1)
    padded = np.zeros(a.shape[:-1] + (2 * (J + 1),))
    padded[..., 1:J + 1] = a
    out = -np.fft.rfft(padded, axis=-1).imag[..., 1:J + 1]
    return np.moveaxis(out, -1, axis)


# below this size two BLAS products beat the FFT, whose length 2(J+1) is often awkward
_DENSE_DST_MAX = 512


@functools.lru_cache(maxsize=4)
def _dst_matrix(J: int) -> np.ndarray:
    n = np.arange(1, J + 1)
    # reduce n*m modulo the period so the sine argument stays small
    S = np.sqrt(2.0 / (J + 1)) * np.sin(np.pi * (np.outer(n, n) % (2 * (J + 1))) / (J + 1))
    S.flags.writeable = False
    return S


def dst2(F: np.ndarray) -> np.ndarray:
    """2D DST-I with the ``2 / (J+1)`` normalisation; orthogonal and its own inverse."""
    F = np.asarray(F, dtype=float)
    if F.ndim != 2 or F.shape[0] != F.shape[1]:
        raise ValueError(f"dst2 needs a square array, got shape {F.shape}")
    J = F.shape[0]
    if J <= _DENSE_DST_MAX:
        S = _dst_matrix(J)
        return S @ F @ S
    return (2.0 / (J + 1)) * dst1(dst1(F, axis=0), axis=1)


idst2 = dst2


def interior_nodes(J: int) -> np.ndarray:
    return np.arange(1, J + 1) / (J + 1.0)


def synthesize(coeffs, resolution: int | None = None) -> ScalarField:
    """Partial sum ``sum_{valid (n,k)} c_{n,k} phi_{n,k}`` on ``resolution`` interior nodes per axis."""
    if isinstance(coeffs, CoeffGrid):
        C = coeffs.masked()
    else:
        C = np.asarray(coeffs, dtype=float)
    J = C.shape[0]
    R = J if resolution is None else int(resolution)
    if R >= J:
        padded = np.zeros((R, R))
        padded[:J, :J] = C
        vals = (R + 1) * dst2(padded)
    else:
        x = interior_nodes(R)
        S = np.sin(np.pi * np.outer(x, np.arange(1, J + 1)))
        vals = 2.0 * S @ C @ S.T
    return ScalarField(vals, "square", 1.0 / (R + 1))


def analyze(field, J: int | None = None) -> np.ndarray:
    """Discrete coefficients ``h^2 sum F phi_{n,k}`` of a square field, first ``J`` modes."""
    F = field.values if isinstance(field, ScalarField) else np.asarray(field, dtype=float)
    R = F.shape[0]
    C = dst2(F) / (R + 1)
    if J is not None:
        C = C[:J, :J]
    return C


# ---------------------------------------------------------------------------
# grids and phantom
# ---------------------------------------------------------------------------

def box_grid(M: int, radius: float = 1.0, dim: int = 2):
    """Cell-centred grid on ``[-radius, radius]^dim``; returns ``(axes, h)``.

    ``axes`` is a tuple of ``dim`` arrays from :func:`numpy.meshgrid` with
    ``indexing='ij'``.
    """
    h = 2.0 * radius / M
    x = -radius + h * (np.arange(M) + 0.5)
    return np.meshgrid(*([x] * dim), indexing="ij"), h


# (intensity, semi-axis a, semi-axis b, centre x, centre y, rotation in degrees)
# modified ("Toft") Shepp-Logan table on [-1, 1]^2
SHEPP_LOGAN_ELLIPSES = (
    (1.0, 0.6900, 0.9200, 0.00, 0.0000, 0.0),
    (-0.8, 0.6624, 0.8740, 0.00, -0.0184, 0.0),
    (-0.2, 0.1100, 0.3100, 0.22, 0.0000, -18.0),
    (-0.2, 0.1600, 0.4100, -0.22, 0.0000, 18.0),
    (0.1, 0.2100, 0.2500, 0.00, 0.3500, 0.0),
    (0.1, 0.0460, 0.0460, 0.00, 0.1000, 0.0),
    (0.1, 0.0460, 0.0460, 0.00, -0.1000, 0.0),
    (0.1, 0.0460, 0.0230, -0.08, -0.6050, 0.0),
    (0.1, 0.0230, 0.0230, 0.00, -0.6060, 0.0),
    (0.1, 0.0230, 0.0460, 0.06, -0.6050, 0.0),
)


def shepp_logan(J: int = 256, ellipses=SHEPP_LOGAN_ELLIPSES) -> ScalarField:
    """Modified Shepp-Logan phantom sampled on the ``J x J`` interior nodes of ``[0,1]^2``.

    The phantom's reference square ``[-1, 1]^2`` is mapped onto ``[0, 1]^2``;
    axis 0 carries ``x1`` (phantom abscissa) and axis 1 carries ``x2``.
    """
    if J < 16:
        raise ValueError("shepp_logan needs J >= 16")
    u = 2.0 * interior_nodes(J) - 1.0
    X, Y = np.meshgrid(u, u, indexing="ij")
    F = np.zeros((J, J))
    for value, a, b, x0, y0, deg in ellipses:
        phi = np.deg2rad(deg)
        c, s = np.cos(phi), np.sin(phi)
        xr = (X - x0) * c + (Y - y0) * s
        yr = -(X - x0) * s + (Y - y0) * c
        F[(xr / a) ** 2 + (yr / b) ** 2 <= 1.0] += value
    # ellipse boundaries coincide in places; clamp round-off such as 1 - 0.8 - 0.2
    F[np.abs(F) < 1e-12] = 0.0
    return ScalarField(F, "square", 1.0 / (J + 1))
