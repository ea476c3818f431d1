"""Histogram comparison metrics and the Gaussian Bhattacharyya distance."""

from __future__ import annotations

import numpy as np

from ..errors import BinMismatch, NonPositiveDefinite


def _pair(h1, h2) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(getattr(h1, "bins", h1), dtype=float).ravel()
    b = np.asarray(getattr(h2, "bins", h2), dtype=float).ravel()
    if a.size != b.size:
        raise BinMismatch(f"{a.size} bins vs {b.size} bins")
    return a, b


def hist_bhattacharyya(h1, h2) -> float:
    """Hellinger-style distance with mean-bin normalization, in [0, 1]."""
    a, b = _pair(h1, h2)
    n = a.size
    denom = np.sqrt(a.mean() * b.mean() * n * n)
    if denom == 0:
        return 1.0
    bc = np.sum(np.sqrt(a * b)) / denom
    return float(np.sqrt(max(0.0, 1.0 - bc)))


def hist_correlation(h1, h2) -> float:
    a, b = _pair(h1, h2)
    da, db = a - a.mean(), b - b.mean()
    denom = np.sqrt(np.sum(da * da) * np.sum(db * db))
    if denom == 0:
        return 0.0
    return float(np.clip(np.sum(da * db) / denom, -1.0, 1.0))


def hist_intersection(h1, h2) -> float:
    """Overlap of the two histograms after normalizing each to unit mass."""
    a, b = _pair(h1, h2)
    sa, sb = a.sum(), b.sum()
    if sa == 0 or sb == 0:
        return 0.0
    return float(np.sum(np.minimum(a / sa, b / sb)))


def _spd(cov, dim) -> np.ndarray:
    c = np.atleast_2d(np.asarray(cov, dtype=float))
    if c.shape != (dim, dim):
        raise ValueError(f"covariance shape {c.shape} does not match mean of length {dim}")
    c = (c + c.T) / 2.0
    eig = np.linalg.eigvalsh(c)
    if eig.min() <= 1e-12 * max(1.0, abs(eig.max())):
        c = c + 1e-9 * np.eye(dim)
        if np.linalg.eigvalsh(c).min() <= 0:
            raise NonPositiveDefinite("covariance is not positive definite after ridge")
    return c


def gaussian_bhattacharyya(mu1, cov1, mu2, cov2) -> float:
    """Bhattacharyya distance between two (multivariate) normals, averaged-covariance form."""
    m1 = np.atleast_1d(np.asarray(mu1, dtype=float))
    m2 = np.atleast_1d(np.asarray(mu2, dtype=float))
    d = m1.size
    s1, s2 = _spd(cov1, d), _spd(cov2, d)
    s = (s1 + s2) / 2.0
    dm = m1 - m2
    term1 = 0.125 * float(dm @ np.linalg.solve(s, dm))
    _, ld = np.linalg.slogdet(s)
    _, ld1 = np.linalg.slogdet(s1)
    _, ld2 = np.linalg.slogdet(s2)
    term2 = 0.5 * (ld - 0.5 * (ld1 + ld2))
    return max(0.0, term1 + term2)
