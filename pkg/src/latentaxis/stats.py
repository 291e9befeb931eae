"""Per-class score statistics, edit bounds, and distances between Gaussian fits.

Class distributions bound the realistic editing range: targets outside
``mu +/- 2 sigma`` of the subject's class are rejected by the edit engine.
Gaussian fits plus the Fréchet distance give the distributional-similarity
core used to compare two feature sets.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .core import Sex

__all__ = [
    "ClassDistribution",
    "GaussianFit",
    "fit_distribution",
    "fit_gaussian",
    "frechet_distance",
    "save_distribution",
    "load_distribution",
    "write_histogram_csv",
]


@dataclass(frozen=True)
class ClassDistribution:
    """Score statistics of one class; editing bounds sit two standard deviations out."""

    label: Sex
    mu: float
    sigma: float
    n: int

    def __post_init__(self) -> None:
        if self.n <= 0:
            raise ValueError("n must be positive")
        if not np.isfinite(self.mu):
            raise ValueError("mu must be finite")
        if not (np.isfinite(self.sigma) and self.sigma >= 0.0):
            raise ValueError("sigma must be finite and >= 0")

    @property
    def lower(self) -> float:
        return self.mu - 2.0 * self.sigma

    @property
    def upper(self) -> float:
        return self.mu + 2.0 * self.sigma

    @property
    def degenerate(self) -> bool:
        """True when every fitted score was identical; the bounds collapse to a point."""
        return self.sigma == 0.0


def fit_distribution(scores: Sequence[float], label: Sex) -> ClassDistribution:
    """Fit mean and population standard deviation (divide by n) of one class's scores."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"scores must be 1-D, got shape {arr.shape}")
    if arr.size < 2:
        raise ValueError("need at least two scores to fit a distribution")
    if not np.all(np.isfinite(arr)):
        raise ValueError("scores must be finite")
    return ClassDistribution(label=label, mu=float(arr.mean()), sigma=float(arr.std()), n=int(arr.size))


def _distribution_doc(dist: ClassDistribution, axis_fingerprint: str | None) -> dict:
    return {
        "label": dist.label.json_value,
        "mu": dist.mu,
        "sigma": dist.sigma,
        "lower": dist.lower,
        "upper": dist.upper,
        "n": dist.n,
        "axis_fingerprint": axis_fingerprint,
    }


def save_distribution(path, dist: ClassDistribution, axis_fingerprint: str | None = None) -> None:
    doc = _distribution_doc(dist, axis_fingerprint)
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_distribution(path) -> tuple[ClassDistribution, str | None]:
    doc = json.loads(Path(path).read_text())
    dist = ClassDistribution(
        label=Sex.from_json(doc["label"]),
        mu=float(doc["mu"]),
        sigma=float(doc["sigma"]),
        n=int(doc["n"]),
    )
    # stored bounds are redundant; reject documents edited out of consistency
    if abs(float(doc["lower"]) - dist.lower) > 1e-9 or abs(float(doc["upper"]) - dist.upper) > 1e-9:
        raise ValueError(f"{path}: stored bounds disagree with mu +/- 2 sigma")
    return dist, doc.get("axis_fingerprint")


@dataclass(frozen=True, eq=False)
class GaussianFit:
    """Mean vector and covariance matrix summarizing a feature set."""

    mean: np.ndarray
    covariance: np.ndarray

    def __post_init__(self) -> None:
        mean = np.array(self.mean, dtype=np.float64, copy=True)
        cov = np.array(self.covariance, dtype=np.float64, copy=True)
        if mean.ndim != 1:
            raise ValueError(f"mean must be 1-D, got shape {mean.shape}")
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"covariance shape {cov.shape} does not match mean of dim {mean.size}")
        if not (np.all(np.isfinite(mean)) and np.all(np.isfinite(cov))):
            raise ValueError("mean and covariance must be finite")
        if not np.allclose(cov, cov.T, rtol=1e-9, atol=1e-9):
            raise ValueError("covariance must be symmetric")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "covariance", cov)

    @property
    def dim(self) -> int:
        return self.mean.shape[0]


def fit_gaussian(features) -> GaussianFit:
    """Sample mean and sample covariance (divide by n - 1) of an (n, d) feature set."""
    X = np.asarray(features, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError(f"features must be an (n, d) array, got shape {X.shape}")
    if X.shape[0] < 2:
        raise ValueError("need at least two feature vectors")
    mean = X.mean(axis=0)
    centered = X - mean
    cov = centered.T @ centered / (X.shape[0] - 1)
    cov = (cov + cov.T) / 2.0
    return GaussianFit(mean, cov)


def _sqrtm_psd(mat: np.ndarray) -> np.ndarray:
    # symmetric square root; eigenvalues slightly below zero (sampling noise) clamp to 0
    eigval, eigvec = np.linalg.eigh(mat)
    eigval = np.clip(eigval, 0.0, None)
    return (eigvec * np.sqrt(eigval)) @ eigvec.T


def frechet_distance(a: GaussianFit, b: GaussianFit) -> float:
    """Fréchet distance between two Gaussian fits.

    Computes ``||mu_a - mu_b||^2 + Tr(S_a + S_b - 2 (S_a S_b)^(1/2))``.  The
    product ``S_a S_b`` is not symmetric, so the cross term is evaluated as
    ``Tr sqrt(A S_b A)`` with ``A = sqrt(S_a)``, which needs only symmetric
    eigendecompositions.  Small negative results from rounding are clamped to
    zero.
    """
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    root_a = _sqrtm_psd(a.covariance)
    cross = _sqrtm_psd(root_a @ b.covariance @ root_a)
    diff = a.mean - b.mean
    value = float(diff @ diff + np.trace(a.covariance) + np.trace(b.covariance) - 2.0 * np.trace(cross))
    return max(value, 0.0)


def write_histogram_csv(path, scores_by_label: Mapping[Sex, Sequence[float]], bins: int = 60,
                        value_range: tuple[float, float] | None = None) -> None:
    """Export per-class score histograms as (bin_center, count, label) rows.

    All classes share one binning so the rows can be overlaid directly.
    """
    arrays = {label: np.asarray(s, dtype=np.float64) for label, s in scores_by_label.items()}
    if value_range is None:
        pooled = np.concatenate([a for a in arrays.values() if a.size]) if arrays else np.array([])
        if pooled.size == 0:
            raise ValueError("cannot build a histogram from empty score sets")
        value_range = (float(pooled.min()), float(pooled.max()))
    edges = np.histogram_bin_edges([], bins=bins, range=value_range)
    centers = (edges[:-1] + edges[1:]) / 2.0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["bin_center", "count", "label"])
        for label in sorted(arrays, key=lambda s: s.value):
            counts, _ = np.histogram(arrays[label], bins=edges)
            for center, count in zip(centers, counts):
                writer.writerow([repr(float(center)), int(count), label.json_value])
