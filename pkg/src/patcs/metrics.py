"""Reconstruction quality metrics."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .wavesim import noise_ratio

__all__ = ["MetricsReport", "relative_error", "psnr", "compare"]


def relative_error(reference, candidate) -> float:
    """``||candidate - reference||_2 / ||reference||_2`` (``inf`` for a zero reference with nonzero error)."""
    r = np.asarray(reference, dtype=float)
    c = np.asarray(candidate, dtype=float)
    if r.shape != c.shape:
        raise ValueError(f"shape mismatch {r.shape} vs {c.shape}")
    num = float(np.linalg.norm(c - r))
    den = float(np.linalg.norm(r))
    if den == 0:
        return 0.0 if num == 0 else math.inf
    return num / den


def psnr(reference, candidate) -> float:
    """Peak signal-to-noise ratio in dB, peak = ``max|reference|``; identical inputs give ``inf``."""
    r = np.asarray(reference, dtype=float)
    c = np.asarray(candidate, dtype=float)
    mse = float(np.mean((c - r) ** 2))
    if mse == 0:
        return math.inf
    peak = float(np.max(np.abs(r)))
    if peak == 0:
        return -math.inf
    return 10.0 * math.log10(peak * peak / mse)


@dataclass
class MetricsReport:
    relative_l2: float
    psnr: float
    noise_delta: float | None = None
    constraint_violation: float | None = None
    timings: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {"relative_l2": self.relative_l2, "psnr": self.psnr}
        if self.noise_delta is not None:
            out["noise_delta"] = self.noise_delta
        if self.constraint_violation is not None:
            out["constraint_violation"] = self.constraint_violation
        for k, v in self.timings.items():
            out[f"time_{k}"] = v
        return out


def compare(reference, candidate, **extra) -> MetricsReport:
    return MetricsReport(relative_error(reference, candidate), psnr(reference, candidate), **extra)


def measured_delta(G_noisy, G_clean) -> float:
    return noise_ratio(G_noisy, G_clean)
