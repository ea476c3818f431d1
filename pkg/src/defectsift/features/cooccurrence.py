"""Six co-occurrence style matrices and five metrics on each."""

from __future__ import annotations

import math

import numpy as np

from ..imaging import LAPLACIAN, GrayImage, convolve2d
from .config import ExtractorConfig
from .filters import gradients

MATRICES = ("glcm", "ogcm", "glrm", "flcm", "hogc", "hgcm")
METRICS = ("correlation", "energy", "entropy", "homogeneity", "variance")
# Metrics of a matrix concentrated in a single cell; also used when no pair exists.
CONSTANT_METRICS = (0.0, 1.0, 0.0, 1.0, 0.0)

# (row, col) offsets at distance 1 for 0, 45, 90 and 135 degrees.
GLCM_OFFSETS = ((0, 1), (-1, 1), (-1, 0), (-1, -1))
OGCM_OFFSETS = ((0, 1), (-1, 0))
HOGC_BINS = 16


def radial_offsets(r: int) -> list[tuple[int, int]]:
    """Eight directions at radius ``r``, rounded to the integer grid."""
    out = []
    for k in range(8):
        a = k * math.pi / 4
        out.append((int(round(-r * math.sin(a))), int(round(r * math.cos(a)))))
    return out


def quantize(u: np.ndarray, levels: int, bit_depth: int) -> np.ndarray:
    return np.minimum((np.asarray(u, dtype=np.int64) * levels) >> bit_depth, levels - 1)


def requantize(v: np.ndarray, levels: int) -> np.ndarray:
    """Min-max rescale of real values onto ``levels`` integer bins (constant -> 0)."""
    v = np.asarray(v, dtype=float)
    lo, hi = v.min(), v.max()
    if hi <= lo:
        return np.zeros(v.shape, dtype=np.int64)
    return np.minimum(np.floor((v - lo) / (hi - lo) * levels).astype(np.int64), levels - 1)


def glcm(q: np.ndarray, offsets, levels: int) -> np.ndarray | None:
    """Symmetrized, normalized co-occurrence counts over the given offsets."""
    q = np.asarray(q, dtype=np.int64)
    H, W = q.shape
    P = np.zeros(levels * levels, dtype=float)
    for dr, dc in offsets:
        r0, r1 = max(0, -dr), min(H, H - dr)
        c0, c1 = max(0, -dc), min(W, W - dc)
        if r1 <= r0 or c1 <= c0:
            continue
        a = q[r0:r1, c0:c1]
        b = q[r0 + dr : r1 + dr, c0 + dc : c1 + dc]
        P += np.bincount((a * levels + b).ravel(), minlength=levels * levels)
    return normalize_matrix(P.reshape(levels, levels))


def normalize_matrix(P: np.ndarray) -> np.ndarray | None:
    P = P + P.T
    total = P.sum()
    return P / total if total > 0 else None


def matrix_metrics(p: np.ndarray | None) -> list[float]:
    if p is None:
        return list(CONSTANT_METRICS)
    n = p.shape[0]
    i = np.arange(n, dtype=float)[:, None]
    j = np.arange(n, dtype=float)[None, :]
    px, py = p.sum(axis=1), p.sum(axis=0)
    idx = np.arange(n, dtype=float)
    mx, my = float(idx @ px), float(idx @ py)
    sx = math.sqrt(max(float(((idx - mx) ** 2) @ px), 0.0))
    sy = math.sqrt(max(float(((idx - my) ** 2) @ py), 0.0))
    cov = float(np.sum((i - mx) * (j - my) * p))
    corr = cov / (sx * sy) if sx * sy > 1e-12 else 0.0
    nz = p[p > 0]
    return [
        corr,
        float(np.sum(p * p)),
        float(0.0 - np.sum(nz * np.log2(nz))),
        float(np.sum(p / (1.0 + np.abs(i - j)))),
        float(np.sum((i - mx) ** 2 * p)),
    ]


def hog_complex(gx: np.ndarray, gy: np.ndarray, bins: int = HOGC_BINS) -> np.ndarray | None:
    """Joint magnitude x angle histogram, magnitude over [0, max], angle over [0, 2 pi)."""
    mag = np.hypot(gx, gy)
    ang = np.mod(np.arctan2(gy, gx), 2 * math.pi)
    mi = requantize_range(mag, bins)
    ai = np.minimum((ang * bins / (2 * math.pi)).astype(np.int64), bins - 1)
    P = np.bincount((mi * bins + ai).ravel(), minlength=bins * bins).astype(float)
    return normalize_matrix(P.reshape(bins, bins))


def requantize_range(v: np.ndarray, levels: int) -> np.ndarray:
    """Bins over ``[0, max(v)]``; all-zero input falls in bin 0."""
    hi = float(v.max()) if v.size else 0.0
    if hi <= 0:
        return np.zeros(v.shape, dtype=np.int64)
    return np.minimum(np.floor(v / hi * levels).astype(np.int64), levels - 1)


def cooccurrence_matrices(img: GrayImage, cfg: ExtractorConfig) -> dict:
    lv = cfg.cooc_levels
    q = quantize(img.pixels, lv, img.bit_depth)
    gx, gy = gradients(img)
    mag = np.hypot(gx, gy)
    return {
        "glcm": glcm(q, GLCM_OFFSETS, lv),
        "ogcm": glcm(q, OGCM_OFFSETS, lv),
        "glrm": glcm(q, radial_offsets(1) + radial_offsets(2), lv),
        "flcm": glcm(requantize(convolve2d(img, LAPLACIAN), lv), [(0, 1)], lv),
        "hogc": hog_complex(gx, gy),
        "hgcm": glcm(requantize_range(mag, lv), [(0, 1)], lv),
    }


def f_cooccurrence(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    mats = cooccurrence_matrices(img, cfg)
    out = []
    for name in MATRICES:
        out += matrix_metrics(mats[name])
    return out
