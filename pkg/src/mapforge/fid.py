"""Fréchet distance between Gaussian summaries of feature sets.

fid = ||mu_a - mu_b||^2 + Tr(sigma_a + sigma_b - 2 (sigma_a^1/2 sigma_b sigma_a^1/2)^1/2)

The square roots run through a symmetric eigendecomposition so every
intermediate stays symmetric positive semidefinite; tiny negative
eigenvalues from rank-deficient covariances are clamped. The trace
term is added, not subtracted: the subtracted variant can go negative,
which contradicts a distance whose lower values mean more similar.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ValidationError
from .fvec import FeatureSet, read_feature_file

SYMMETRY_RTOL = 1e-8
EIGEN_CLAMP_RTOL = 1e-8
NEGATIVE_TOL = 1e-6


@dataclass
class GaussianSummary:
    mu: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        self.mu = np.asarray(self.mu, dtype=np.float64).reshape(-1)
        self.sigma = np.asarray(self.sigma, dtype=np.float64)
        d = self.mu.shape[0]
        if self.sigma.shape != (d, d):
            raise ValidationError(f"sigma shape {self.sigma.shape} does not match mu dimension {d}")


def summarize_features(fs: FeatureSet) -> GaussianSummary:
    """Column means and unbiased (n-1) sample covariance, symmetrized."""
    data = fs.data
    mu = data.mean(axis=0)
    centered = data - mu
    sigma = centered.T @ centered / (fs.n - 1)
    sigma = (sigma + sigma.T) / 2.0
    return GaussianSummary(mu, sigma)


def sqrtm_psd(m: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root via eigendecomposition.

    Rejects matrices that are asymmetric or have eigenvalues below
    -EIGEN_CLAMP_RTOL * max|eigenvalue|; smaller negative eigenvalues
    are treated as rounding noise and clamped to zero.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValidationError("matrix square root needs a square matrix")
    scale = max(1.0, float(np.abs(m).max()) if m.size else 0.0)
    asym = float(np.abs(m - m.T).max()) if m.size else 0.0
    if asym > SYMMETRY_RTOL * scale:
        raise ValidationError(f"matrix asymmetry {asym:.3e} exceeds tolerance")
    sym = (m + m.T) / 2.0
    eigenvalues, q = np.linalg.eigh(sym)
    lam_max = float(np.abs(eigenvalues).max()) if eigenvalues.size else 0.0
    floor = -EIGEN_CLAMP_RTOL * lam_max
    if (eigenvalues < floor).any():
        worst = float(eigenvalues.min())
        raise ValidationError(f"matrix is not positive semidefinite: eigenvalue {worst:.3e}")
    clamped = np.where(eigenvalues < 0.0, 0.0, eigenvalues)
    root = (q * np.sqrt(clamped)) @ q.T
    return (root + root.T) / 2.0


def fid(a: GaussianSummary, b: GaussianSummary) -> float:
    """Non-negative distance; 0 means identical summaries."""
    if a.mu.shape != b.mu.shape:
        raise ValidationError(
            f"summary dimensions differ: {a.mu.shape[0]} vs {b.mu.shape[0]}"
        )
    diff = a.mu - b.mu
    root_a = sqrtm_psd(a.sigma)
    inner = root_a @ b.sigma @ root_a
    cross = sqrtm_psd((inner + inner.T) / 2.0)
    value = float(diff @ diff + np.trace(a.sigma) + np.trace(b.sigma) - 2.0 * np.trace(cross))
    if value < -NEGATIVE_TOL:
        raise ValidationError(f"fid computed as {value:.3e}, beyond numerical tolerance")
    return 0.0 if value < 0.0 else value


def fid_between_sets(a: FeatureSet, b: FeatureSet) -> float:
    return fid(summarize_features(a), summarize_features(b))


# --- deterministic stand-in embedder -----------------------------------------

EMBED_DIM = 64
_COLOR_BINS = 16  # per channel, 48 total
_GRADIENT_BINS = 16  # bin 0 counts zero-gradient pixels, 1..15 orientation


def toy_embedder(image: np.ndarray) -> np.ndarray:
    """64-d image descriptor: 48 color bins + 16 gradient bins, L1-normalized.

    Color: per-channel histogram of value // 16. Gradient: central
    differences of the integer gray image (r+g+b)//3 over interior
    pixels; zero-gradient pixels count into bin 0, the rest weight
    their magnitude into one of 15 orientation sectors.
    """
    image = np.asarray(image)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValidationError("embedder expects an (H, W, 3) image")
    if image.shape[0] == 0 or image.shape[1] == 0:
        raise ValidationError("embedder expects a nonempty image")
    vec = np.zeros(EMBED_DIM, dtype=np.float64)
    for c in range(3):
        hist = np.bincount((image[:, :, c].astype(np.int64) // 16).ravel(), minlength=_COLOR_BINS)
        vec[c * _COLOR_BINS : (c + 1) * _COLOR_BINS] = hist[:_COLOR_BINS]

    gray = (image[:, :, 0].astype(np.int64) + image[:, :, 1] + image[:, :, 2]) // 3
    if gray.shape[0] >= 3 and gray.shape[1] >= 3:
        gx = (gray[1:-1, 2:] - gray[1:-1, :-2]).astype(np.float64)
        gy = (gray[2:, 1:-1] - gray[:-2, 1:-1]).astype(np.float64)
        mag = np.sqrt(gx * gx + gy * gy)
        zero = mag == 0.0
        base = 3 * _COLOR_BINS
        vec[base] = float(zero.sum())
        if (~zero).any():
            theta = np.arctan2(gy[~zero], gx[~zero])
            sector = np.minimum(
                14, np.floor((theta + np.pi) / (2.0 * np.pi) * 15.0).astype(np.int64)
            )
            vec[base + 1 :] = np.bincount(sector, weights=mag[~zero], minlength=15)
    total = vec.sum()
    return vec / total if total > 0 else vec


def embed_directory(path) -> FeatureSet:
    """Embed every .png under path (sorted by name) with the toy embedder."""
    from .pngio import read_map_png

    files = sorted(Path(path).glob("*.png"))
    if len(files) < 2:
        raise ValidationError(f"need at least 2 .png files in {path}, found {len(files)}")
    rows = [toy_embedder(read_map_png(f)) for f in files]
    return FeatureSet(np.stack(rows))


def load_features(path) -> FeatureSet:
    """FVEC file or directory of PNGs, whichever the path points at."""
    p = Path(path)
    if p.is_dir():
        return embed_directory(p)
    return read_feature_file(p)
