"""Seeded surrogate generator for a second network's demand series.

A moving-block bootstrap of a reference series with optional Gaussian jitter.
It keeps short-range temporal structure and the marginal distribution of the
reference without any model training.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ingest import PrbSeries


class SynthError(ValueError):
    pass


@dataclass(frozen=True)
class SynthConfig:
    seed: int
    block_len: int
    jitter_std: float = 0.0
    target_len: int = 1

    def __post_init__(self):
        if self.block_len < 1:
            raise SynthError("block_len must be >= 1")
        if self.jitter_std < 0:
            raise SynthError("jitter_std must be >= 0")
        if self.target_len < 1:
            raise SynthError("target_len must be >= 1")


def generate_surrogate(reference: PrbSeries, config: SynthConfig, label: str = "NR") -> PrbSeries:
    x = reference.as_array()
    n, b = len(x), config.block_len
    if n < b:
        raise SynthError(f"reference length {n} shorter than block_len {b}")
    rng = np.random.default_rng(config.seed)
    n_blocks = -(-config.target_len // b)
    starts = rng.integers(0, n - b + 1, size=n_blocks)
    out = np.concatenate([x[s:s + b] for s in starts])[: config.target_len]
    if config.jitter_std > 0:
        out = out + rng.normal(0.0, config.jitter_std, size=out.shape)
    out = np.maximum(out, 0.0)
    return PrbSeries(
        start_time_ms=reference.start_time_ms,
        granularity_ms=reference.granularity_ms,
        values=tuple(out),
        label=label,
    )


@dataclass(frozen=True)
class SimilarityReport:
    mean_a: float
    mean_b: float
    var_a: float
    var_b: float
    max_a: float
    max_b: float
    ks_statistic: float
    cdf_grid: tuple = ()
    cdf_a: tuple = ()
    cdf_b: tuple = ()

    def to_dict(self) -> dict:
        return {
            "mean_a": self.mean_a, "mean_b": self.mean_b,
            "var_a": self.var_a, "var_b": self.var_b,
            "max_a": self.max_a, "max_b": self.max_b,
            "ks_statistic": self.ks_statistic,
        }


def ks_statistic(a, b) -> float:
    """Two-sample Kolmogorov-Smirnov distance (largest empirical CDF gap)."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    grid = np.concatenate([a, b])
    fa = np.searchsorted(a, grid, side="right") / len(a)
    fb = np.searchsorted(b, grid, side="right") / len(b)
    return float(np.max(np.abs(fa - fb)))


def similarity_report(a: PrbSeries, b: PrbSeries, n_bins: int = 50) -> SimilarityReport:
    """Moments, maxima and KS distance between two series, plus binned CDFs for plotting."""
    xa, xb = np.asarray(a.values, dtype=float), np.asarray(b.values, dtype=float)
    if xa.size == 0 or xb.size == 0:
        raise SynthError("similarity_report needs non-empty series")
    if n_bins < 1:
        raise SynthError("n_bins must be >= 1")
    lo = min(xa.min(), xb.min())
    hi = max(xa.max(), xb.max())
    grid = np.linspace(lo, hi, n_bins + 1)
    cdf_a = np.searchsorted(np.sort(xa), grid, side="right") / xa.size
    cdf_b = np.searchsorted(np.sort(xb), grid, side="right") / xb.size
    return SimilarityReport(
        mean_a=float(xa.mean()), mean_b=float(xb.mean()),
        var_a=float(xa.var()), var_b=float(xb.var()),
        max_a=float(xa.max()), max_b=float(xb.max()),
        ks_statistic=ks_statistic(xa, xb),
        cdf_grid=tuple(grid), cdf_a=tuple(cdf_a), cdf_b=tuple(cdf_b),
    )
