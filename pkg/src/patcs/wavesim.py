"""Bounded-domain forward model on the unit square.

Leapfrog in time, 5-point Laplacian in space, homogeneous Dirichlet data.
The boundary trace is the outward normal derivative, estimated with the
one-sided 3-point stencil, and the measurements are its projections onto the
sine masks ``Phi_l(s) = sqrt(2) sin(l pi s)``.

Side names: ``right`` is ``{x1 = 1}``, ``left`` ``{x1 = 0}``, ``top``
``{x2 = 1}`` and ``bottom`` ``{x2 = 0}``.  On ``right`` the mask variable is
``x2`` and mode ``(n, l)`` oscillates with weight ``(-1)^n sqrt(2) pi n``; on
``top`` the roles of the two indices are swapped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .eigenbasis import ScalarField, interior_nodes

__all__ = [
    "CFLError",
    "SimConfig",
    "TraceStream",
    "MeasurementSet",
    "simulate",
    "measure",
    "synth_measurements",
    "add_noise",
    "noise_ratio",
    "fd_frequencies",
    "fd_normal_weight",
    "square_weight",
    "SIDES",
]

SIDES = ("right", "left", "top", "bottom")


class CFLError(ValueError):
    """Time step violates the 2D stability bound ``dt <= h / sqrt(2)``."""


@dataclass(frozen=True)
class SimConfig:
    """Leapfrog configuration; ``dt`` defaults to ``h / 2``."""

    J_grid: int = 255
    T: float = 3.0
    dt: float | None = None

    def __post_init__(self):
        if self.J_grid < 3:
            raise ValueError("J_grid must be at least 3")
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.dt is None:
            object.__setattr__(self, "dt", self.h / 2.0)
        if self.dt <= 0:
            raise ValueError("dt must be positive")

    @property
    def h(self) -> float:
        return 1.0 / (self.J_grid + 1)

    @property
    def cfl_bound(self) -> float:
        return self.h / math.sqrt(2.0)

    @property
    def N(self) -> int:
        # the rounding guards against T/dt landing a hair above an integer
        return int(math.ceil(round(self.T / self.dt, 9)))

    @property
    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.N + 1)

    def check(self):
        if self.dt > self.cfl_bound * (1 + 1e-12):
            raise CFLError(f"dt = {self.dt:.6g} exceeds the CFL bound h/sqrt(2) = {self.cfl_bound:.6g}")


@dataclass
class TraceStream:
    """Normal-derivative traces, ``sides[name][i, j]`` at time ``t_i`` and boundary node ``j``."""

    times: np.ndarray
    sides: dict
    h: float
    snapshots: dict = field(default_factory=dict)


@dataclass(frozen=True)
class MeasurementSet:
    """Rows ``G[l-1, i] = g_l(t_i)`` for one acquisition surface."""

    side: str
    G: np.ndarray
    times: np.ndarray
    noise_level: float = 0.0
    seed: int | None = None
    rows: np.ndarray | None = None

    def __post_init__(self):
        G = np.asarray(self.G)
        if G.ndim != 2 or G.shape[1] != len(self.times):
            raise ValueError(f"G of shape {G.shape} does not match {len(self.times)} time samples")
        object.__setattr__(self, "G", G)
        if self.rows is None:
            object.__setattr__(self, "rows", np.arange(1, G.shape[0] + 1))

    @property
    def L_max(self) -> int:
        return self.G.shape[0]

    @property
    def T(self) -> float:
        return float(self.times[-1])


def _laplacian(p: np.ndarray, h: float) -> np.ndarray:
    out = -4.0 * p
    out[1:, :] += p[:-1, :]
    out[:-1, :] += p[1:, :]
    out[:, 1:] += p[:, :-1]
    out[:, :-1] += p[:, 1:]
    return out / (h * h)


def _normal_derivatives(p: np.ndarray, h: float) -> dict:
    # outward one-sided stencil with the boundary value 0: (3*0 - 4 p_1 + p_2) / 2h
    s = 1.0 / (2.0 * h)
    return {
        "right": (p[-2, :] - 4.0 * p[-1, :]) * s,
        "left": (p[1, :] - 4.0 * p[0, :]) * s,
        "top": (p[:, -2] - 4.0 * p[:, -1]) * s,
        "bottom": (p[:, 1] - 4.0 * p[:, 0]) * s,
    }


def simulate(f0, cfg: SimConfig, snapshot_steps=(), sides=SIDES) -> TraceStream:
    """Run the leapfrog scheme from ``p(0) = f0``, ``p_t(0) = 0``.

    The first step uses the symmetric start ``p^{-1} = p^{1}``, i.e.
    ``p^1 = p^0 + dt^2/2 Lap_h p^0``; with it every discrete sine mode
    evolves exactly as ``cos(omega_h t_i)`` (see :func:`fd_frequencies`).

    Parameters
    ----------
    f0 : ScalarField or ndarray
        ``J_grid x J_grid`` samples on interior nodes.
    cfg : SimConfig
    snapshot_steps : iterable of int
        Step indices whose full field is kept in ``snapshots``.
    sides : iterable of str
        Which traces to record.
    """
    cfg.check()
    F = f0.values if isinstance(f0, ScalarField) else np.asarray(f0, dtype=float)
    if F.shape != (cfg.J_grid, cfg.J_grid):
        raise ValueError(f"initial field has shape {F.shape}, expected {(cfg.J_grid,) * 2}")
    h, dt, N = cfg.h, cfg.dt, cfg.N
    sides = tuple(sides)
    traces = {s: np.empty((N + 1, cfg.J_grid)) for s in sides}
    keep = set(int(s) for s in snapshot_steps)
    snaps = {}

    def record(i, p):
        nd = _normal_derivatives(p, h)
        for s in sides:
            traces[s][i] = nd[s]
        if i in keep:
            snaps[i] = p.copy()

    prev = F.astype(float, copy=True)
    record(0, prev)
    if N == 0:
        return TraceStream(cfg.times, traces, h, snaps)
    c2 = dt * dt
    cur = prev + 0.5 * c2 * _laplacian(prev, h)
    record(1, cur)
    for i in range(2, N + 1):
        nxt = 2.0 * cur - prev + c2 * _laplacian(cur, h)
        prev, cur = cur, nxt
        record(i, cur)
    return TraceStream(cfg.times, traces, h, snaps)


def discrete_energy(p_prev: np.ndarray, p_cur: np.ndarray, h: float, dt: float) -> float:
    """Conserved leapfrog energy ``|D_t p|^2 + <-Lap_h p^{n+1}, p^n>`` (grid-weighted)."""
    v = (p_cur - p_prev) / dt
    return float(h * h * (np.sum(v * v) - np.sum(_laplacian(p_cur, h) * p_prev)))


def _masks(L_max: int, J: int) -> np.ndarray:
    s = interior_nodes(J)
    return math.sqrt(2.0) * np.sin(np.pi * np.outer(np.arange(1, L_max + 1), s))


def measure(stream: TraceStream, side: str, L_max: int) -> MeasurementSet:
    """Project the ``side`` trace onto the first ``L_max`` sine masks (midpoint rule on boundary nodes)."""
    if side not in stream.sides:
        raise KeyError(f"no trace recorded for side {side!r}")
    tr = stream.sides[side]
    J = tr.shape[1]
    if L_max > J:
        raise ValueError(f"L_max = {L_max} exceeds the {J} boundary nodes (masks would alias)")
    G = stream.h * (_masks(L_max, J) @ tr.T)
    return MeasurementSet(side, G, np.asarray(stream.times))


def square_weight(n):
    """Continuum boundary weight ``(-1)^n sqrt(2) pi n``."""
    n = np.asarray(n)
    return np.where(n % 2 == 0, 1.0, -1.0) * math.sqrt(2.0) * np.pi * n


def fd_normal_weight(n, h: float):
    """Boundary weight the discrete scheme actually produces for mode index ``n``.

    The one-sided stencil applied to ``sin(n pi x)`` at ``x = 1`` gives
    ``(-1)^n (4 sin(n pi h) - sin(2 n pi h)) / (2h)``, which tends to
    ``(-1)^n n pi`` as ``h -> 0``.
    """
    n = np.asarray(n, dtype=float)
    sign = np.where(np.asarray(n, dtype=int) % 2 == 0, 1.0, -1.0)
    d = (4.0 * np.sin(n * np.pi * h) - np.sin(2.0 * n * np.pi * h)) / (2.0 * h)
    return sign * math.sqrt(2.0) * d


def fd_frequencies(n, l, h: float, dt: float):
    """Angular frequency of mode ``(n, l)`` under the leapfrog / 5-point scheme.

    ``cos(omega dt) = 1 - dt^2 mu / 2`` with ``mu`` the 5-point eigenvalue
    ``4/h^2 (sin^2(n pi h/2) + sin^2(l pi h/2))``.
    """
    n = np.asarray(n, dtype=float)
    l = np.asarray(l, dtype=float)
    mu = 4.0 / h**2 * (np.sin(n * np.pi * h / 2) ** 2 + np.sin(l * np.pi * h / 2) ** 2)
    return np.arccos(np.clip(1.0 - 0.5 * dt * dt * mu, -1.0, 1.0)) / dt


def synth_measurements(coeffs, l: int, times, model: str = "square-side", side: str = "right"):
    """Exact truncated-series measurement row ``g_l(t)``.

    ``square-side``: ``coeffs`` is a ``J x J`` grid indexed ``[n-1, k-1]``;
    on ``right`` ``g_l = sum_n (-1)^n sqrt(2) pi n C[n,l] cos(pi sqrt(n^2+l^2) t)``,
    on ``top`` the sum runs over the second index.

    ``disk``: ``coeffs`` has rows indexed by ``|l|`` and columns by
    ``k - 1``; ``g_l = sum_k c_{l,k} C[l,k] cos(j_{l,k} t)``.
    """
    from . import specfun

    C = getattr(coeffs, "coeffs", coeffs)
    C = np.asarray(C)
    t = np.asarray(times, dtype=float)
    if model == "square-side":
        J = C.shape[0]
        if not 1 <= l <= C.shape[1]:
            return np.zeros_like(t)
        if side == "right":
            a = C[:, l - 1]
        elif side == "top":
            a = C[l - 1, :]
        else:
            raise ValueError(f"unknown square side {side!r}")
        n = np.arange(1, J + 1)
        nz = np.nonzero(a)[0]
        if nz.size == 0:
            return np.zeros_like(t)
        lam = np.pi * np.hypot(n[nz], l)
        return (square_weight(n[nz]) * a[nz]) @ np.cos(np.outer(lam, t))
    if model == "disk":
        m = abs(int(l))
        if m >= C.shape[0]:
            return np.zeros_like(t)
        a = C[m]
        K = a.shape[0]
        if not np.any(a):
            return np.zeros_like(t)
        z = specfun.bessel_zeros(m, K).zeros
        jp = np.array([specfun.bessel_j_prime(m, x) for x in z])
        if l < 0 and m % 2:
            jp = -jp
        c = math.sqrt(2.0) * z * np.sign(jp)
        return (c * a) @ np.cos(np.outer(z, t))
    raise ValueError(f"unknown measurement model {model!r}")


def noise_ratio(G_noisy, G) -> float:
    """Relative max-norm perturbation ``max|G~ - G| / max|G|``."""
    G = np.asarray(G)
    top = np.max(np.abs(G))
    if top == 0:
        return 0.0
    return float(np.max(np.abs(np.asarray(G_noisy) - G)) / top)


def add_noise(ms: MeasurementSet, delta: float, seed=None) -> MeasurementSet:
    """Add seeded Gaussian noise scaled so the realised max-ratio equals ``delta``.

    The standard normal draw ``Z`` is rescaled by ``delta max|G| / max|Z|``,
    so the realised ratio matches the target up to round-off.
    """
    if delta < 0:
        raise ValueError("noise level must be non-negative")
    G = ms.G
    top = np.max(np.abs(G))
    if delta == 0 or top == 0:
        return replace(ms, G=G.copy(), noise_level=0.0, seed=seed)
    Z = np.random.default_rng(seed).standard_normal(G.shape)
    sigma = delta * top / np.max(np.abs(Z))
    noisy = G + sigma * Z
    return replace(ms, G=noisy, noise_level=noise_ratio(noisy, G), seed=seed)
