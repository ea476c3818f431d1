"""Basic features: neighbour SSIM, summary statistics and histogram texture."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from ..imaging import LAPLACIAN, GrayImage, Roi, convolve2d, histogram
from ..stats import summary_stats

SSIM_SIGMA = 1.5
SSIM_WINDOW = 11
# Neighbours keeping less than this fraction of the ROI area are skipped.
MIN_NEIGHBOR_FRAC = 0.5
CRLF_FLOOR = 1e-9


def _gauss(a: np.ndarray) -> np.ndarray:
    radius = SSIM_WINDOW // 2
    return ndimage.gaussian_filter(a, SSIM_SIGMA, mode="nearest", truncate=radius / SSIM_SIGMA)


def ssim(x, y, max_value: float) -> float:
    """Mean SSIM with Gaussian-window statistics and unit exponents."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    c1, c2 = (0.01 * max_value) ** 2, (0.03 * max_value) ** 2
    mx, my = _gauss(x), _gauss(y)
    vx = _gauss(x * x) - mx * mx
    vy = _gauss(y * y) - my * my
    cxy = _gauss(x * y) - mx * my
    # With C3 = C2/2 the contrast and structure terms merge into one factor.
    num = (2 * mx * my + c1) * (2 * cxy + c2)
    den = (mx * mx + my * my + c1) * (vx + vy + c2)
    return float(np.mean(num / den))


def neighbor_pairs(img: GrayImage, roi: Roi):
    """Yield ``(roi_part, neighbour)`` arrays for each usable edge neighbour.

    A neighbour clipped by the image border is compared with the equally sized
    strip of the ROI that touches it.
    """
    u = img.pixels
    x, y, w, h = roi.x, roi.y, roi.w, roi.h
    H, W = u.shape
    min_area = MIN_NEIGHBOR_FRAC * w * h
    # left, right, top, bottom
    left = min(w, x)
    if left * h >= min_area and left > 0:
        yield u[y : y + h, x : x + left], u[y : y + h, x - left : x]
    right = min(w, W - (x + w))
    if right * h >= min_area and right > 0:
        yield u[y : y + h, x + w - right : x + w], u[y : y + h, x + w : x + w + right]
    top = min(h, y)
    if top * w >= min_area and top > 0:
        yield u[y : y + top, x : x + w], u[y - top : y, x : x + w]
    bottom = min(h, H - (y + h))
    if bottom * w >= min_area and bottom > 0:
        yield u[y + h - bottom : y + h, x : x + w], u[y + h : y + h + bottom, x : x + w]


def f_ssim_neighbors(img: GrayImage, roi: Roi | None = None) -> list[float]:
    roi = (roi or Roi.full(img)).clip(img.width, img.height)
    scores = [ssim(a, b, img.max_value) for a, b in neighbor_pairs(img, roi)]
    return [max(scores) if scores else 0.0]


def mean_abs_column_cov(u: np.ndarray) -> float:
    """Mean |covariance| over distinct column pairs (population form)."""
    u = np.asarray(u, dtype=float)
    c = u - u.mean(axis=0)
    cov = c.T @ c / u.shape[0]
    if cov.shape[0] < 2:
        return float(np.abs(np.diag(cov)).mean())
    iu = np.triu_indices(cov.shape[0], k=1)
    return float(np.abs(cov[iu]).mean())


def crlf(img: GrayImage) -> float:
    num = mean_abs_column_cov(img.pixels)
    den = mean_abs_column_cov(convolve2d(img, LAPLACIAN))
    return num / max(den, CRLF_FLOOR)


def f_basic_stats(img: GrayImage) -> list[float]:
    """Dynamic range, mean, mode, median, max, variance, CV and CRLF.

    Intensity-valued outputs are divided by the maximum level ``L`` (variance
    by ``L^2``) so different bit depths are comparable.
    """
    L = float(img.max_value)
    s = summary_stats(img.pixels.ravel())
    return [
        (s.max - s.min) / L,
        s.mean / L,
        s.mode / L,
        s.median / L,
        s.max / L,
        s.variance / (L * L),
        s.cv,
        crlf(img),
    ]


def shannon_entropy(p: np.ndarray) -> float:
    p = p[p > 0]
    # -sum() of zero terms is -0.0; adding 0.0 keeps the printed value "0.0".
    return float(0.0 - np.sum(p * np.log2(p))) if p.size else 0.0


def f_texture(img: GrayImage, n_bins: int = 256) -> list[float]:
    """Histogram entropy (bits), normalized energy, modal homogeneity, contrast, kurtosis."""
    L = float(img.max_value)
    p = histogram(img, n_bins).normalized()
    u = img.pixels.astype(float)
    mode_bin = int(np.argmax(p))
    homogeneity = float(np.sum(p / (1.0 + np.abs(np.arange(p.size) - mode_bin))))
    energy = float(np.sum(u * u)) / (u.size * L * L)
    s = summary_stats(u.ravel())
    return [shannon_entropy(p), energy, homogeneity, s.std / L, s.kurtosis]
