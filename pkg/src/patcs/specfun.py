"""Bessel functions of integer and half-integer order, their zeros, associated
Legendre functions and spherical harmonics.

All evaluators accept scalars or numpy arrays for the argument and are pure.
Orders are restricted to ``nu = twice_order / 2`` with ``twice_order >= 0``.

Evaluation strategy for ``J_nu(x)``:

* ascending power series when ``(x/2)**2 <= nu + 1`` (no cancellation there);
* half-integer orders below the argument: upward recurrence from the closed
  forms of ``J_{1/2}`` and ``J_{-1/2}``;
* everything else: Miller backward recurrence, normalised with
  ``1 = J_0 + 2 sum J_{2k}`` (integer orders) or
  ``J_{1/2}**2 + J_{-1/2}**2 = 2/(pi x)`` (half-integer orders).

Associated Legendre functions carry the Condon-Shortley phase, so
``P_1^1(x) = -sqrt(1 - x**2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "BesselOrder",
    "ZeroTable",
    "bessel_j",
    "bessel_j_prime",
    "bessel_zeros",
    "spherical_jn",
    "spherical_jn_prime",
    "assoc_legendre",
    "sph_harm_norm",
    "spherical_harmonic",
    "mcmahon_zero",
]

_RESCALE = 1e250


@dataclass(frozen=True)
class BesselOrder:
    """Order ``nu = twice_order / 2`` of a Bessel function."""

    twice_order: int

    def __post_init__(self):
        if int(self.twice_order) != self.twice_order or self.twice_order < 0:
            raise ValueError(f"twice_order must be a non-negative integer, got {self.twice_order!r}")

    @classmethod
    def of(cls, nu) -> "BesselOrder":
        if isinstance(nu, BesselOrder):
            return nu
        two = 2.0 * float(nu)
        if two != round(two):
            raise ValueError(f"only integer and half-integer orders are supported, got {nu!r}")
        return cls(int(round(two)))

    @property
    def nu(self) -> float:
        return 0.5 * self.twice_order

    @property
    def is_half_integer(self) -> bool:
        return self.twice_order % 2 == 1


@dataclass(frozen=True)
class ZeroTable:
    """First positive zeros ``j_{nu,1} < j_{nu,2} < ...`` of ``J_nu``."""

    order: BesselOrder
    zeros: np.ndarray = field(repr=False)

    def __post_init__(self):
        z = np.array(self.zeros, dtype=float)
        z.setflags(write=False)
        object.__setattr__(self, "zeros", z)

    def __len__(self):
        return len(self.zeros)

    def __getitem__(self, k):
        return self.zeros[k]

    def gaps(self) -> np.ndarray:
        return np.diff(self.zeros)


# ---------------------------------------------------------------------------
# evaluation kernels (twice_order may be -1 internally, for J_{-1/2})
# ---------------------------------------------------------------------------

def _series(nu: float, x: np.ndarray) -> np.ndarray:
    q = -0.25 * x * x
    term = np.ones_like(x)
    total = np.ones_like(x)
    k = 1
    while True:
        term = term * q / (k * (nu + k))
        total = total + term
        if k > 4 and np.all(np.abs(term) <= 1e-17 * np.abs(total)):
            break
        k += 1
        if k > 500:  # pragma: no cover - series region is chosen so this never happens
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        logpre = nu * np.log(0.5 * x) - math.lgamma(nu + 1.0)
    pre = np.where(x > 0, np.exp(logpre), 1.0 if nu == 0 else 0.0)
    return pre * total


def _upward_half(n: int, x: np.ndarray) -> np.ndarray:
    """``J_{n+1/2}`` by upward recurrence; stable for ``n + 1/2 <= x``."""
    amp = np.sqrt(2.0 / (np.pi * x))
    jm = amp * np.cos(x)  # J_{-1/2}
    j0 = amp * np.sin(x)  # J_{1/2}
    for k in range(n):
        mu = k + 0.5
        jm, j0 = j0, (2.0 * mu / x) * j0 - jm
    return j0


def _miller_start(nu: float, xmax: float) -> int:
    top = max(nu, xmax)
    n = int(top + 10.0 * np.cbrt(max(xmax, 1.0)) + 40.0)
    return n + (n % 2)


def _miller_integer(n: int, x: np.ndarray) -> np.ndarray:
    big = _miller_start(n, float(np.max(x)))
    up = np.zeros_like(x)  # order m+1
    cur = np.full_like(x, 1e-300)  # order m
    norm = np.zeros_like(x)
    target = np.zeros_like(x)
    for m in range(big, 0, -1):
        if m == n:
            target = cur.copy()
        if m % 2 == 0:
            norm = norm + 2.0 * cur
        down = (2.0 * m / x) * cur - up
        up, cur = cur, down
        huge = np.abs(cur) > _RESCALE
        if np.any(huge):
            s = np.where(huge, 1.0 / _RESCALE, 1.0)
            up, cur, norm, target = up * s, cur * s, norm * s, target * s
    # cur now holds order 0
    if n == 0:
        target = cur
    norm = norm + cur
    return target / norm


def _miller_half(n: int, x: np.ndarray) -> np.ndarray:
    """``J_{n+1/2}`` (``n >= -1``) by backward recurrence."""
    big = _miller_start(n + 0.5, float(np.max(x)))
    up = np.zeros_like(x)
    cur = np.full_like(x, 1e-300)  # order big + 1/2
    target = np.zeros_like(x)
    half = None
    for m in range(big, -1, -1):  # cur has order m + 1/2
        if m == n:
            target = cur.copy()
        if m == 0:
            half = cur.copy()
        mu = m + 0.5
        down = (2.0 * mu / x) * cur - up
        up, cur = cur, down
        huge = np.abs(cur) > _RESCALE
        if np.any(huge):
            s = np.where(huge, 1.0 / _RESCALE, 1.0)
            up, cur, target = up * s, cur * s, target * s
            half = half * s if half is not None else None
    minus_half = cur
    if n == -1:
        target = minus_half
    amp = np.sqrt(2.0 / (np.pi * x))
    s, c = np.sin(x), np.cos(x)
    use_sin = np.abs(s) >= np.abs(c)
    scale = np.where(use_sin, amp * s / np.where(use_sin, half, 1.0),
                     amp * c / np.where(use_sin, 1.0, minus_half))
    return target * scale


def _jv(twice_order: int, x) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("bessel_j is defined here for x >= 0 only")
    out = np.empty_like(x)
    flat_x = x.reshape(-1)
    flat_out = out.reshape(-1)
    nu = 0.5 * twice_order
    if twice_order == -1:
        with np.errstate(divide="ignore"):
            flat_out[:] = np.where(flat_x > 0, np.sqrt(2.0 / (np.pi * np.where(flat_x > 0, flat_x, 1.0)))
                                   * np.cos(flat_x), np.inf)
        return out
    in_series = (0.5 * flat_x) ** 2 <= nu + 1.0
    if np.any(in_series):
        flat_out[in_series] = _series(nu, flat_x[in_series])
    rest = ~in_series
    if np.any(rest):
        xr = flat_x[rest]
        res = np.empty_like(xr)
        if twice_order % 2 == 0:
            res[:] = _miller_integer(twice_order // 2, xr)
        else:
            n = (twice_order - 1) // 2
            upward = xr >= nu
            if np.any(upward):
                res[upward] = _upward_half(n, xr[upward])
            if np.any(~upward):
                res[~upward] = _miller_half(n, xr[~upward])
        flat_out[rest] = res
    return out


def _as_output(value, x):
    return float(value) if np.ndim(x) == 0 else value


def bessel_j(order, x):
    """Bessel function of the first kind ``J_nu(x)`` for ``x >= 0``.

    Parameters
    ----------
    order : float or BesselOrder
        Integer or half-integer order ``nu >= 0``.
    x : float or array_like
        Non-negative argument(s).
    """
    o = BesselOrder.of(order)
    return _as_output(_jv(o.twice_order, x), x)


def bessel_j_prime(order, x):
    """Derivative ``J_nu'(x) = (J_{nu-1}(x) - J_{nu+1}(x)) / 2`` (``-J_1`` for ``nu = 0``)."""
    o = BesselOrder.of(order)
    xa = np.asarray(x, dtype=float)
    if np.any(xa < 0):
        raise ValueError("bessel_j_prime is defined here for x >= 0 only")
    if o.twice_order == 0:
        val = -_jv(2, xa)
    else:
        with np.errstate(invalid="ignore"):
            val = 0.5 * (_jv(o.twice_order - 2, xa) - _jv(o.twice_order + 2, xa))
    return _as_output(val, x)


def spherical_jn(n: int, x):
    """Spherical Bessel function ``j_n(x) = sqrt(pi/(2x)) J_{n+1/2}(x)``, with ``j_n(0)`` as a limit."""
    xa = np.asarray(x, dtype=float)
    safe = np.where(xa > 0, xa, 1.0)
    val = np.sqrt(np.pi / (2.0 * safe)) * _jv(2 * n + 1, safe)
    val = np.where(xa > 0, val, 1.0 if n == 0 else 0.0)
    return _as_output(val, x)


def spherical_jn_prime(n: int, x):
    """Derivative of :func:`spherical_jn`."""
    xa = np.asarray(x, dtype=float)
    safe = np.where(xa > 0, xa, 1.0)
    amp = np.sqrt(np.pi / (2.0 * safe))
    jp = 0.5 * (_jv(2 * n - 1, safe) - _jv(2 * n + 3, safe))
    val = amp * (jp - _jv(2 * n + 1, safe) / (2.0 * safe))
    val = np.where(xa > 0, val, 1.0 / 3.0 if n == 1 else 0.0)
    return _as_output(val, x)


# ---------------------------------------------------------------------------
# zeros
# ---------------------------------------------------------------------------

def mcmahon_zero(nu: float, k):
    """McMahon asymptotic estimate of ``j_{nu,k}``; accurate for ``k >> nu``."""
    mu = 4.0 * nu * nu
    beta = (np.asarray(k, dtype=float) + 0.5 * nu - 0.25) * np.pi
    b8 = 8.0 * beta
    return (beta - (mu - 1.0) / b8 - 4.0 * (mu - 1.0) * (7.0 * mu - 31.0) / (3.0 * b8 ** 3)
            - 32.0 * (mu - 1.0) * (83.0 * mu ** 2 - 982.0 * mu + 3779.0) / (15.0 * b8 ** 5))


def bessel_zeros(order, count: int, tol: float = 1e-13) -> ZeroTable:
    """First ``count`` positive zeros of ``J_nu``.

    Consecutive zeros of ``J_nu`` (``nu >= 0``) are more than 3 apart, so a
    sign-change scan with step 0.5 brackets each zero exactly once.  The scan
    horizon comes from McMahon's expansion and each bracket is refined by
    Newton's method, falling back to bisection whenever a step leaves the
    bracket.
    """
    o = BesselOrder.of(order)
    nu = o.nu
    if count < 1:
        raise ValueError("count must be >= 1")
    step = 0.5
    lo = max(nu, 0.25)
    hi = max(float(mcmahon_zero(nu, count)), lo) + 4.0
    brackets: list[tuple[float, float]] = []
    while len(brackets) < count:
        grid = np.arange(lo, hi + step, step)
        vals = _jv(o.twice_order, grid)
        sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
        for i in sign_change:
            brackets.append((grid[i], grid[i + 1]))
        exact = np.nonzero(vals == 0.0)[0]
        for i in exact:  # pragma: no cover - exact grid hits are measure-zero
            brackets.append((grid[i], grid[i]))
        lo = grid[-1]
        hi = lo + 0.5 * np.pi * (count - len(brackets)) + 8.0
    brackets = sorted(brackets)[:count]
    a = np.array([b[0] for b in brackets])
    b = np.array([b[1] for b in brackets])
    fa = _jv(o.twice_order, a)
    x = 0.5 * (a + b)
    guess = mcmahon_zero(nu, np.arange(1, count + 1))
    inside = (guess > a) & (guess < b)
    x = np.where(inside, guess, x)
    converged = a == b
    for _ in range(200):
        fx = _jv(o.twice_order, x)
        dfx = np.asarray(bessel_j_prime(o, x))
        same = np.sign(fx) == np.sign(fa)
        a = np.where(same, x, a)
        fa = np.where(same, fx, fa)
        b = np.where(same, b, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            newton = x - fx / dfx
        ok = np.isfinite(newton) & (newton >= np.minimum(a, b)) & (newton <= np.maximum(a, b))
        x_new = np.where(ok, newton, 0.5 * (a + b))
        x_new = np.where(converged, x, x_new)
        dx = np.abs(x_new - x)
        x = x_new
        converged |= (dx <= tol * np.maximum(1.0, np.abs(x))) | (fx == 0.0)
        if np.all(converged):
            break
    else:
        bad = np.nonzero(~converged)[0] + 1
        raise RuntimeError(f"zero refinement for J_{nu} did not converge for k = {bad.tolist()}")
    return ZeroTable(o, x)


# ---------------------------------------------------------------------------
# Legendre functions and spherical harmonics
# ---------------------------------------------------------------------------

def assoc_legendre(l: int, m: int, x):
    """Associated Legendre function ``P_l^m(x)`` with the Condon-Shortley phase."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"need 0 <= |m| <= l, got l={l}, m={m}")
    xa = np.asarray(x, dtype=float)
    if np.any(np.abs(xa) > 1.0 + 1e-14):
        raise ValueError("assoc_legendre requires |x| <= 1")
    xa = np.clip(xa, -1.0, 1.0)
    am = abs(m)
    pmm = np.ones_like(xa)
    if am > 0:
        root = np.sqrt((1.0 - xa) * (1.0 + xa))
        fact = 1.0
        for _ in range(am):
            pmm = -pmm * fact * root
            fact += 2.0
    if l == am:
        val = pmm
    else:
        p_prev, p = pmm, xa * (2 * am + 1) * pmm
        for ll in range(am + 2, l + 1):
            p_prev, p = p, ((2 * ll - 1) * xa * p - (ll + am - 1) * p_prev) / (ll - am)
        val = p
    if m < 0:
        val = (-1) ** am * math.exp(math.lgamma(l - am + 1) - math.lgamma(l + am + 1)) * val
    return _as_output(val, x)


def sph_harm_norm(l: int, m: int) -> float:
    """Factor turning the unnormalised ``P_l^m(cos t) e^{i m p}`` into an orthonormal harmonic."""
    if l < 0 or abs(m) > l:
        raise ValueError(f"need 0 <= |m| <= l, got l={l}, m={m}")
    return math.sqrt((2 * l + 1) / (4.0 * math.pi) * math.exp(math.lgamma(l - m + 1) - math.lgamma(l + m + 1)))


def spherical_harmonic(l: int, m: int, theta, phi, normalized: bool = False):
    """Spherical harmonic ``Y_l^m(theta, phi) = P_l^m(cos theta) e^{i m phi}``.

    ``theta`` is the polar angle in ``[0, pi]`` and ``phi`` the azimuth.  With
    ``normalized=True`` the result is scaled by :func:`sph_harm_norm`, giving an
    orthonormal family on the unit sphere.
    """
    val = np.asarray(assoc_legendre(l, m, np.cos(theta))) * np.exp(1j * m * np.asarray(phi, dtype=float))
    if normalized:
        val = val * sph_harm_norm(l, m)
    if np.ndim(val) == 0:
        return complex(val)
    return val
