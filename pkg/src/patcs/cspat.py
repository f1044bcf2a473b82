"""Structured subsampling of sine-transform coefficients and TV recovery.

A two-level pattern keeps every coefficient with a low index
(``min(n, k) <= J0``) plus randomly chosen half-lines
``{n} x {n..J}`` and ``{k..J} x {k}``; these are exactly the entries a
one-side acquisition delivers stably for the selected masks.

Images are recovered by

    min ||F||_TV   subject to   dst2(F)[n, k] = values[n, k],  (n, k) in Theta

with a log-barrier method on the second-order-cone form
``|(DF)_ij| <= t_ij``.  The equality constraints are eliminated exactly:
``F = dst2(Y)`` with ``Y`` fixed on ``Theta`` and free elsewhere, which is
possible because the normalised DST-I is an orthogonal involution.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .eigenbasis import dst2

__all__ = [
    "SamplingPattern",
    "TVOptions",
    "TVResult",
    "NonConvergenceError",
    "two_level_pattern",
    "full_pattern",
    "tv_norm",
    "grad",
    "grad_adjoint",
    "tv_min",
    "min_energy",
    "tensor_reduce",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class SamplingPattern:
    """Index set ``Theta`` (1-based ``(n, k)``) stored as a boolean ``J x J`` mask."""

    J: int
    J0: int
    lines_n: tuple = ()
    lines_k: tuple = ()
    seed: int | None = None
    density: str = "log"
    mask: np.ndarray = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.mask is None:
            object.__setattr__(self, "mask", _materialise(self.J, self.J0, self.lines_n, self.lines_k))
        self.mask.setflags(write=False)

    @property
    def theta(self):
        n, k = np.nonzero(self.mask)
        return list(zip((n + 1).tolist(), (k + 1).tolist()))

    @property
    def fraction(self) -> float:
        return float(self.mask.sum()) / self.J**2

    @property
    def masks_per_side(self) -> int:
        """Masks a side must activate: the ``J0`` low ones plus the sampled lines."""
        return self.J0 + max(len(self.lines_n), len(self.lines_k))

    def restrict(self, coeffs) -> np.ndarray:
        """Values on ``Theta`` in row-major order of the mask."""
        return np.asarray(coeffs)[self.mask]

    def scatter(self, values) -> np.ndarray:
        out = np.zeros((self.J, self.J))
        out[self.mask] = values
        return out


def _materialise(J, J0, lines_n, lines_k):
    idx = np.arange(1, J + 1)
    n, k = np.meshgrid(idx, idx, indexing="ij")
    m = np.minimum(n, k) <= J0
    for a in lines_n:
        m[a - 1, a - 1:] = True
    for b in lines_k:
        m[b - 1:, b - 1] = True
    return m


def full_pattern(J: int) -> SamplingPattern:
    return SamplingPattern(J, J)


def two_level_pattern(J: int, J0: int, lines_per_side: int, seed=None, density: str = "log") -> SamplingPattern:
    """Full low band ``min(n, k) <= J0`` plus random half-lines in ``{J0+1..J}``.

    Line indices are drawn without replacement with probability
    proportional to ``1/index`` (``log``) or ``1/index^2`` (``quadratic``),
    independently for the two families.
    """
    if not 0 <= J0 <= J:
        raise ValueError(f"need 0 <= J0 <= J, got J0={J0}, J={J}")
    if lines_per_side > J - J0:
        raise ValueError(f"cannot draw {lines_per_side} lines from {J - J0} candidate indices")
    cand = np.arange(J0 + 1, J + 1)
    if density == "log":
        p = 1.0 / cand
    elif density == "quadratic":
        p = 1.0 / cand.astype(float) ** 2
    else:
        raise ValueError(f"unknown density {density!r}")
    p = p / p.sum() if p.size else p
    rng = np.random.default_rng(seed)
    if lines_per_side and cand.size:
        ln = np.sort(rng.choice(cand, lines_per_side, replace=False, p=p))
        lk = np.sort(rng.choice(cand, lines_per_side, replace=False, p=p))
    else:
        ln = lk = np.array([], dtype=int)
    return SamplingPattern(J, J0, tuple(int(i) for i in ln), tuple(int(i) for i in lk), seed, density)


# ---------------------------------------------------------------------------
# total variation
# ---------------------------------------------------------------------------

def grad(F: np.ndarray):
    """Backward differences with zero padding: ``(D1 F)_{n,k} = F_{n,k} - F_{n-1,k}``, ``F_{0,k} = 0``."""
    d1 = F.copy()
    d1[1:, :] -= F[:-1, :]
    d2 = F.copy()
    d2[:, 1:] -= F[:, :-1]
    return d1, d2


def grad_adjoint(d1: np.ndarray, d2: np.ndarray) -> np.ndarray:
    out = d1.copy()
    out[:-1, :] -= d1[1:, :]
    out += d2
    out[:, :-1] -= d2[:, 1:]
    return out


def tv_norm(F) -> float:
    """Isotropic TV ``sum sqrt((D1 F)^2 + (D2 F)^2)`` with Dirichlet padding."""
    d1, d2 = grad(np.asarray(F, dtype=float))
    return float(np.sum(np.sqrt(d1 * d1 + d2 * d2)))


def min_energy(pattern: SamplingPattern, values) -> np.ndarray:
    """Zero-fill the unsampled coefficients and invert the DST."""
    return dst2(_as_grid(pattern, values))


def _as_grid(pattern, values, indices=None):
    values = np.asarray(values, dtype=float)
    J = pattern.J
    if indices is not None:
        idx = np.asarray(indices, dtype=int).reshape(-1, 2)
        if idx.shape[0] != values.size:
            raise ValueError("indices and values differ in length")
        grid = np.zeros((J, J))
        seen = {}
        for (n, k), v in zip(idx.tolist(), values.ravel().tolist()):
            if not pattern.mask[n - 1, k - 1]:
                raise ValueError(f"index ({n}, {k}) is not in the pattern")
            if (n, k) in seen and seen[(n, k)] != v:
                raise ValueError(f"inconsistent duplicate constraint at ({n}, {k})")
            seen[(n, k)] = v
            grid[n - 1, k - 1] = v
        if len(seen) != int(pattern.mask.sum()):
            raise ValueError("every index of the pattern needs a value")
        return grid
    if values.shape == (J, J):
        return np.where(pattern.mask, values, 0.0)
    if values.ndim == 1 and values.size == int(pattern.mask.sum()):
        return pattern.scatter(values)
    raise ValueError(f"values of shape {values.shape} do not match the pattern")


@dataclass
class TVOptions:
    eq_tol: float = 1e-8
    gap_tol: float = 1e-6
    mu: float = 10.0            # barrier growth per stage
    max_barrier: int = 30
    newton_tol: float = 1e-8
    max_newton: int = 50
    cg_tol: float = 1e-8
    cg_maxiter: int = 400
    precondition: bool = True


@dataclass
class TVResult:
    F: np.ndarray
    tv: float
    gap: float
    eq_violation: float
    barrier_iters: int
    newton_iters: int
    cg_iters: int


class NonConvergenceError(RuntimeError):
    def __init__(self, msg, gap):
        super().__init__(msg)
        self.gap = gap


def _cg(apply, b, tol, maxiter, precond=None):
    """Preconditioned CG; ``precond`` is the diagonal of the inverse preconditioner."""
    x = np.zeros_like(b)
    r = b.copy()
    z = r if precond is None else precond * r
    p = z.copy()
    rz = float(np.vdot(r, z))
    rr = float(np.vdot(r, r))
    stop = (tol * np.sqrt(float(np.vdot(b, b)))) ** 2
    best, best_rr = x.copy(), rr
    it = 0
    while it < maxiter and rr > stop:
        Ap = apply(p)
        alpha = rz / float(np.vdot(p, Ap))
        x += alpha * p
        r -= alpha * Ap
        rr = float(np.vdot(r, r))
        it += 1
        if rr < best_rr:
            best, best_rr = x.copy(), rr
        z = r if precond is None else precond * r
        rz_new = float(np.vdot(r, z))
        p = z + (rz_new / rz) * p
        rz = rz_new
    return (x if rr <= stop else best), it


def tv_min(pattern: SamplingPattern, values, opts: TVOptions | None = None, indices=None,
           return_info: bool = False):
    """TV-minimal image whose DST agrees with ``values`` on ``pattern``.

    Parameters
    ----------
    pattern : SamplingPattern
    values : array_like
        ``J x J`` grid (entries off the pattern are ignored), a vector in
        mask order, or a vector aligned with ``indices``.
    opts : TVOptions
    indices : (m, 2) int array, optional
        Explicit 1-based ``(n, k)`` list for ``values``; duplicates must agree.

    Raises
    ------
    NonConvergenceError
        The barrier gap did not reach ``opts.gap_tol`` in ``opts.max_barrier`` stages.
    """
    opts = opts or TVOptions()
    Y0 = _as_grid(pattern, values, indices)
    if not np.all(np.isfinite(Y0)):
        raise ValueError("values must be finite")
    free = ~pattern.mask
    x = dst2(Y0)
    if not free.any():
        info = TVResult(x, tv_norm(x), 0.0, 0.0, 0, 0, 0)
        return (x, info) if return_info else x

    Y = Y0.copy()
    u, v = grad(x)
    mag = np.sqrt(u * u + v * v)
    t = 0.95 * mag + 0.1 * mag.max() + 1e-12
    m = x.size
    tau = max((2 * m + 1) / max(mag.sum(), 1e-12), 1.0)
    total_newton = total_cg = 0

    def barrier_value(tt, uu, vv, tau_):
        Fv = tt * tt - uu * uu - vv * vv
        if np.any(Fv <= 0):
            return np.inf
        return tau_ * tt.sum() - np.log(Fv).sum()

    # D^T D is close to the DST-diagonal Laplacian, which gives a cheap Jacobi-like preconditioner
    J = x.shape[0]
    lam = 4.0 * np.sin(np.pi * np.arange(1, J + 1) / (2 * (J + 1))) ** 2
    lam1, lam2 = np.meshgrid(lam, lam, indexing="ij")
    lam1, lam2 = lam1[free], lam2[free]

    gap = m / tau
    for stage in range(1, opts.max_barrier + 1):
        for it in range(opts.max_newton):
            Fv = t * t - u * u - v * v
            iF = 1.0 / Fv
            # gradient of tau*sum(t) - sum log(t^2 - u^2 - v^2)
            gt = tau - 2.0 * t * iF
            gu, gv = 2.0 * u * iF, 2.0 * v * iF
            # per-pixel Hessian blocks
            iF2 = iF * iF
            huu = 2.0 * iF + 4.0 * u * u * iF2
            hvv = 2.0 * iF + 4.0 * v * v * iF2
            huv = 4.0 * u * v * iF2
            hut = -4.0 * u * t * iF2
            hvt = -4.0 * v * t * iF2
            htt = -2.0 * iF + 4.0 * t * t * iF2
            # eliminate dt
            suu = huu - hut * hut / htt
            svv = hvv - hvt * hvt / htt
            suv = huv - hut * hvt / htt
            ru = gu - hut * gt / htt
            rv = gv - hvt * gt / htt
            rhs_full = -dst2(grad_adjoint(ru, rv))
            rhs = rhs_full[free]

            def apply(z):
                Z = np.zeros_like(x)
                Z[free] = z
                dx = dst2(Z)
                a, b = grad(dx)
                out = dst2(grad_adjoint(suu * a + suv * b, suv * a + svv * b))
                return out[free]

            pre = None
            if opts.precondition:
                pre = 1.0 / (lam1 * suu.mean() + lam2 * svv.mean())
            dz, ncg = _cg(apply, rhs, opts.cg_tol, opts.cg_maxiter, pre)
            total_cg += ncg
            Z = np.zeros_like(x)
            Z[free] = dz
            dx = dst2(Z)
            du, dv = grad(dx)
            dt = -(gt + hut * du + hvt * dv) / htt
            decrement = -(float(np.sum(gu * du + gv * dv)) + float(np.sum(gt * dt)))
            # largest step keeping the cone constraints strictly feasible
            f0 = barrier_value(t, u, v, tau)
            s = 1.0
            slope = -decrement
            for _ in range(60):
                tn, un, vn = t + s * dt, u + s * du, v + s * dv
                if np.all(tn * tn - un * un - vn * vn > 0):
                    break
                s *= 0.5
            s *= 0.99 if s < 1.0 else 1.0
            for _ in range(60):
                tn, un, vn = t + s * dt, u + s * du, v + s * dv
                if barrier_value(tn, un, vn, tau) <= f0 + 0.01 * s * slope:
                    break
                s *= 0.5
            Y[free] += s * dz
            x = x + s * dx
            t, u, v = tn, un, vn
            total_newton += 1
            if decrement / 2 < opts.newton_tol or s < 1e-12:
                break
        gap = m / tau
        obj = tv_norm(x)
        log.debug("barrier stage %d: tau=%.3e gap=%.3e tv=%.6g", stage, tau, gap, obj)
        if gap < opts.gap_tol * max(obj, 1e-300):
            break
        tau *= opts.mu
    else:
        raise NonConvergenceError(f"log-barrier did not converge: last gap {gap:.3e}", gap)
    # x was updated incrementally; re-derive it from Y so the constraints hold to round-off
    x = dst2(Y)
    viol = float(np.max(np.abs(dst2(x)[pattern.mask] - Y0[pattern.mask])))
    info = TVResult(x, tv_norm(x), gap, viol, stage, total_newton, total_cg)
    return (x, info) if return_info else x


# ---------------------------------------------------------------------------
# tensorised reduction
# ---------------------------------------------------------------------------

def tensor_reduce(samples, basis_change, L=None) -> np.ndarray:
    """Right-hand sides of the per-row one-dimensional CS problems.

    Parameters
    ----------
    samples : (J, |L|) array
        ``samples[l1 - 1, i] = (f, psi_{l1, L[i]})`` for every ``l1``.
    basis_change : (J, J) array
        Orthonormal ``B[l1 - 1, j1 - 1] = (psi_{l1}, phi_{j1})``.
    L : sequence of int, optional
        Second indices (only used for validation of the shape).

    Returns
    -------
    (J, |L|) array whose row ``j1 - 1`` is
    ``(sum_{l1} (f, psi_{l1,l2}) (psi_{l1}, phi_{j1}))_{l2 in L}``.
    """
    B = np.asarray(basis_change)
    S = np.asarray(samples)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ValueError("basis change must be square")
    if not np.allclose(B.conj().T @ B, np.eye(B.shape[0]), atol=1e-10, rtol=0):
        raise ValueError("basis change is not orthonormal (tolerance 1e-10)")
    if S.shape[0] != B.shape[0]:
        raise ValueError(f"samples have {S.shape[0]} rows, basis change has {B.shape[0]}")
    if L is not None and S.shape[1] != len(L):
        raise ValueError("samples and L disagree in length")
    return B.T @ S
