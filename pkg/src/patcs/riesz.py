"""Nonharmonic cosine families on ``[0, T]`` and coefficient recovery.

For increasing frequencies ``lambda_k`` with separation
``gamma = min(min gap, 2 lambda_1) > pi / T`` the family ``cos(lambda_k t)`` is a
Riesz sequence on ``[0, T]`` with lower bound
``A = (1 / 2 pi) (1 - (pi / (T gamma))^2)``.  Recovery inverts the finite
section of the frame operator, i.e. solves the normal equations of the
weighted least-squares fit of a measured row by the cosines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from . import specfun
from .eigenbasis import CoeffGrid
from .wavesim import MeasurementSet, fd_frequencies, fd_normal_weight, square_weight

__all__ = [
    "NoBoundError",
    "IllConditionedError",
    "RieszSystem",
    "StableSet",
    "FDDispersion",
    "separation",
    "lower_bound_cos",
    "gram_cos",
    "trapezoid_weights",
    "frame_recover",
    "lbar_max",
    "square_row_frequencies",
    "recover_square_side",
    "combine_sides",
    "recover_disk",
    "recover_ball",
    "COND_LIMIT",
]

COND_LIMIT = 1e12


class NoBoundError(ValueError):
    """The separation condition ``gamma > pi / T`` fails."""


class IllConditionedError(np.linalg.LinAlgError):
    def __init__(self, cond):
        super().__init__(f"Gram matrix is numerically singular (condition ~ {cond:.3e})")
        self.cond = cond


def separation(lambdas) -> float:
    """``gamma = min(inf_k (lambda_{k+1} - lambda_k), 2 lambda_1)``."""
    lam = np.asarray(lambdas, dtype=float)
    gaps = np.diff(lam)
    g = 2.0 * lam[0]
    if gaps.size:
        g = min(g, float(gaps.min()))
    return float(g)


def lower_bound_cos(lambdas, T: float) -> float:
    """Riesz lower bound of ``{cos(lambda_k t)}`` on ``[0, T]`` from the gap criterion."""
    gamma = separation(lambdas)
    if gamma <= math.pi / T:
        raise NoBoundError(f"no bound available: gamma = {gamma:.6g} <= pi/T = {math.pi / T:.6g}")
    return (1.0 - (math.pi / (T * gamma)) ** 2) / (2.0 * math.pi)


def gram_cos(lambdas, T: float) -> np.ndarray:
    """Exact Gram matrix ``int_0^T cos(lambda_j t) cos(lambda_k t) dt``."""
    lam = np.asarray(lambdas, dtype=float)
    if np.unique(lam).size != lam.size:
        raise ValueError("frequencies must be distinct")
    d = lam[:, None] - lam[None, :]
    s = lam[:, None] + lam[None, :]
    # np.sinc(x) = sin(pi x)/(pi x), so T/2 sinc(dT/pi) = sin(dT)/(2d)
    return 0.5 * T * (np.sinc(d * T / np.pi) + np.sinc(s * T / np.pi))


@dataclass(frozen=True)
class RieszSystem:
    lambdas: np.ndarray
    T: float

    @property
    def gamma(self) -> float:
        return separation(self.lambdas)

    @property
    def lower_bound(self) -> float | None:
        try:
            return lower_bound_cos(self.lambdas, self.T)
        except NoBoundError:
            return None

    def gram(self) -> np.ndarray:
        return gram_cos(self.lambdas, self.T)


def trapezoid_weights(times) -> np.ndarray:
    t = np.asarray(times, dtype=float)
    w = np.zeros_like(t)
    dt = np.diff(t)
    w[:-1] += dt / 2
    w[1:] += dt / 2
    return w


def _solve_spd(M, b, cond_limit=COND_LIMIT, truncate=False):
    ev, V = np.linalg.eigh(M)
    top = ev[-1]
    cond = np.inf if ev[0] <= 0 else top / ev[0]
    if cond > cond_limit:
        if not truncate:
            raise IllConditionedError(cond)
        keep = ev > top / cond_limit
        proj = V[:, keep].T @ b
        proj = proj / (ev[keep][:, None] if proj.ndim == 2 else ev[keep])
        return V[:, keep] @ proj, cond
    L = np.linalg.cholesky(M)
    y = np.linalg.solve(L, b)
    return np.linalg.solve(L.T, y), cond


def frame_recover(g, lambdas, T: float | None = None, times=None, gram: str = "discrete",
                  cond_limit: float = COND_LIMIT, truncate: bool = False, return_cond: bool = False):
    """Coefficients ``a`` with ``g(t) ~ sum_k a_k cos(lambda_k t)`` on ``[0, T]``.

    Parameters
    ----------
    g : array_like
        Samples on ``times`` (default: uniform grid over ``[0, T]``).  A 2D
        array is treated as several rows sharing the same frequencies.
    lambdas : array_like
        Distinct positive frequencies.
    gram : {"discrete", "exact"}
        ``discrete`` builds the Gram matrix with the same trapezoid weights as
        the moments ``b_k = (g, cos(lambda_k .))``, which makes the solve the
        weighted least-squares fit and exact for data in the span.  ``exact``
        uses the closed-form integrals of :func:`gram_cos`.
    truncate : bool
        Instead of raising on a singular Gram matrix, drop eigen-directions
        below ``max_eig / cond_limit`` (minimum-norm solution).

    Raises
    ------
    IllConditionedError
        Condition number above ``cond_limit`` and ``truncate`` is false.
    """
    g = np.asarray(g, dtype=float)
    lam = np.asarray(lambdas, dtype=float)
    if times is None:
        if T is None:
            raise ValueError("need T or times")
        times = np.linspace(0.0, T, g.shape[-1])
    t = np.asarray(times, dtype=float)
    if T is None:
        T = float(t[-1])
    if lam.size > t.size:
        raise ValueError("more frequencies than time samples")
    w = trapezoid_weights(t)
    A = np.cos(np.outer(lam, t))
    b = (A * w) @ g.T
    if gram == "discrete":
        M = (A * w) @ A.T
    elif gram == "exact":
        M = gram_cos(lam, T)
    else:
        raise ValueError(f"unknown gram mode {gram!r}")
    a, cond = _solve_spd(M, b, cond_limit, truncate)
    a = a.T
    return (a, cond) if return_cond else a


def _lbar_threshold(lb: int) -> float:
    return (math.sqrt(lb * lb + 4) + math.sqrt(lb * lb + 1)) / 3.0


def lbar_max(T: float):
    """Largest ``lbar`` whose one-side tail condition holds for ``T``, with its stability constant.

    Returns ``(lbar, C)`` with ``C = 2 pi / (1 - (s / T)^2)`` and
    ``s = (sqrt(lbar^2 + 4) + sqrt(lbar^2 + 1)) / 3``.
    """
    if _lbar_threshold(1) >= T:
        raise ValueError(f"T = {T} is below the threshold (sqrt 5 + sqrt 2)/3 = {_lbar_threshold(1):.6f}")
    lb = 1
    while _lbar_threshold(lb + 1) < T:
        lb += 1
    s = _lbar_threshold(lb)
    return lb, 2.0 * math.pi / (1.0 - (s / T) ** 2)


@dataclass(frozen=True)
class StableSet:
    """Which recovered entries of one side are trusted.

    The tail rule keeps entries whose mask index does not exceed the other
    index; ``b`` additionally keeps the low block ``{1..b}^2``.
    """

    side: str = "right"
    b: int = 0
    tail: bool = True

    PRESETS = ((1e-4, 20), (0.05, 15), (0.25, 8))

    @classmethod
    def for_noise(cls, side: str, delta: float) -> "StableSet":
        """Low-block presets: 20 for tiny noise, 15 up to 5 %, 8 beyond."""
        for level, b in cls.PRESETS:
            if delta <= level * (1 + 1e-9):
                return cls(side, b)
        return cls(side, cls.PRESETS[-1][1])

    def mask(self, J: int) -> np.ndarray:
        idx = np.arange(1, J + 1)
        first, second = np.meshgrid(idx, idx, indexing="ij")
        if self.side == "right":
            m = second <= first          # mask index l is the second one
        elif self.side == "top":
            m = first <= second
        else:
            raise ValueError(f"unknown side {self.side!r}")
        if not self.tail:
            m = np.zeros_like(m)
        if self.b:
            m |= (first <= self.b) & (second <= self.b)
        return m


@dataclass(frozen=True)
class FDDispersion:
    """Frequencies and boundary weights of the leapfrog / 5-point scheme with spacing ``h`` and step ``dt``."""

    h: float
    dt: float

    def frequencies(self, n, l):
        return fd_frequencies(n, l, self.h, self.dt)

    def weights(self, n):
        return fd_normal_weight(n, self.h)


def square_row_frequencies(l: int, K: int, dispersion: FDDispersion | None = None, start: int = 1):
    n = np.arange(start, start + K)
    if dispersion is None:
        return np.pi * np.hypot(n, l), square_weight(n)
    return dispersion.frequencies(n, l), dispersion.weights(n)


def recover_square_side(G: MeasurementSet, stable: StableSet | None = None, J: int | None = None,
                        modes: int | None = None, dispersion: FDDispersion | None = None,
                        cond_limit: float = COND_LIMIT) -> CoeffGrid:
    """Per-mask recovery of ``(f, phi_{n,k})`` from one side of the square.

    Row ``l`` is fitted by ``modes`` cosines (default ``J``) with frequencies
    ``pi sqrt(n^2 + l^2)`` (or the scheme's ``dispersion``); the ``n``-th
    coefficient is divided by the boundary weight.  A row whose Gram matrix
    is numerically singular is solved in the well-conditioned eigen-subspace
    and only its tail entries are kept.
    """
    if G.side not in ("right", "top"):
        raise ValueError(f"square recovery needs a 'right' or 'top' measurement set, got {G.side!r}")
    if G.T < 1.0:
        raise ValueError(f"observation time T = {G.T} < 1")
    stable = stable or StableSet(G.side)
    J = J or G.L_max
    K = max(modes or J, J)
    est = np.zeros((J, J))
    valid = stable.mask(J)
    for l, row in zip(G.rows, G.G):
        l = int(l)
        if l > J:
            continue
        lam, wt = square_row_frequencies(l, K, dispersion)
        try:
            a, cond = frame_recover(row, lam, times=G.times, cond_limit=cond_limit, truncate=True,
                                    return_cond=True)
        except np.linalg.LinAlgError:
            if G.side == "right":
                valid[:, l - 1] = False
            else:
                valid[l - 1, :] = False
            continue
        coef = (a / wt)[:J]
        if G.side == "right":
            est[:, l - 1] = coef
            if cond > cond_limit:
                valid[:l - 1, l - 1] = False
        else:
            est[l - 1, :] = coef
            if cond > cond_limit:
                valid[l - 1, :l - 1] = False
    # rows that were never measured carry no information
    measured = np.zeros(J, dtype=bool)
    measured[[int(l) - 1 for l in G.rows if int(l) <= J]] = True
    if G.side == "right":
        valid &= measured[None, :]
    else:
        valid &= measured[:, None]
    return CoeffGrid(est, valid)


def combine_sides(C_top: CoeffGrid, C_right: CoeffGrid) -> CoeffGrid:
    """Merge two one-side grids.

    Entries below the diagonal come from the right side, entries above it
    from the top side, each falling back to the other side where the
    preferred one is invalid.  Diagonal entries valid on both sides are
    averaged.
    """
    if C_top.coeffs.shape != C_right.coeffs.shape:
        raise ValueError(f"shape mismatch {C_top.coeffs.shape} vs {C_right.coeffs.shape}")
    J = C_top.coeffs.shape[0]
    lower = np.tril(np.ones((J, J), dtype=bool), -1)
    pref_right = lower.copy()
    np.fill_diagonal(pref_right, True)
    pv = np.where(pref_right, C_right.valid, C_top.valid)
    pc = np.where(pref_right, C_right.coeffs, C_top.coeffs)
    oc = np.where(pref_right, C_top.coeffs, C_right.coeffs)
    out = np.where(pv, pc, oc)
    both = C_top.valid & C_right.valid
    diag = np.eye(J, dtype=bool) & both
    out[diag] = 0.5 * (C_top.coeffs[diag] + C_right.coeffs[diag])
    return CoeffGrid(out, C_top.valid | C_right.valid)


def _disk_weights(l: int, K: int):
    m = abs(l)
    z = specfun.bessel_zeros(m, K).zeros
    jp = np.asarray(specfun.bessel_j_prime(m, z))
    if l < 0 and m % 2:
        jp = -jp
    return z, math.sqrt(2.0) * z * np.sign(jp)


def recover_disk(G: MeasurementSet, K: int, T: float | None = None) -> CoeffGrid:
    """Recover ``(f, phi_{l,k})``, ``k = 1..K``, from disk-boundary rows ``l = G.rows``.

    Returns a grid with one row per measured ``l`` (in ``G.rows`` order);
    every entry is valid because the Bessel-zero family is uniformly stable.
    """
    T = G.T if T is None else T
    if T < 1.01:
        raise ValueError(f"disk recovery needs T >= 1.01, got {T}")
    out = np.zeros((G.L_max, K))
    for i, (l, row) in enumerate(zip(G.rows, G.G)):
        z, c = _disk_weights(int(l), K)
        out[i] = frame_recover(row, z, times=G.times) / c
    return CoeffGrid(out, np.ones_like(out, dtype=bool))


def _ball_weights(m: int, K: int):
    z = specfun.bessel_zeros(m + 0.5, K).zeros
    jp = np.asarray(specfun.spherical_jn_prime(m, z))
    return z, math.sqrt(2.0) * z * np.sign(jp)


def recover_ball(rows: Mapping, times, K: int, T: float | None = None) -> dict:
    """Recover ``(f, phi_{m,k,p})``, ``k = 1..K``, for every ``(m, p)`` row.

    ``rows`` maps ``(m, p)`` to a sampled row ``g_{m,p}``; the result maps
    ``(m, p)`` to the length-``K`` coefficient vector.
    """
    times = np.asarray(times, dtype=float)
    T = float(times[-1]) if T is None else T
    if T <= 1.0:
        raise ValueError(f"ball recovery needs T > 1, got {T}")
    out = {}
    for (m, p), g in rows.items():
        if abs(p) > m:
            raise ValueError(f"invalid angular index ({m}, {p})")
        z, c = _ball_weights(int(m), K)
        out[(m, p)] = frame_recover(np.asarray(g), z, times=times) / c
    return out
