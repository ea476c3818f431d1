"""Filter-bank features: Gabor energy, homomorphic entropy, HOG vector field, LBP."""

from __future__ import annotations

import math

import numpy as np

from ..imaging import LAPLACIAN, SOBEL_X, SOBEL_Y, GrayImage, clahe, convolve2d
from .basic import shannon_entropy
from .config import ExtractorConfig

GABOR_THETAS = (0.0, math.pi / 4, math.pi / 2, 3 * math.pi / 4)


# --------------------------------------------------------------------------- #
# Gabor
# --------------------------------------------------------------------------- #


def gabor_kernel(theta: float, lam: float, sigma: float, gamma: float, psi: float) -> np.ndarray:
    """Real, zero-mean Gabor kernel; ``theta`` is the orientation of the stripes it matches.

    At theta = 0 the carrier runs along rows, so horizontal stripes respond most.
    """
    half = int(math.floor(2 * sigma))
    yy, xx = np.mgrid[-half : half + 1, -half : half + 1].astype(float)
    along = xx * math.cos(theta) + yy * math.sin(theta)
    across = -xx * math.sin(theta) + yy * math.cos(theta)
    g = np.exp(-(across**2 + gamma**2 * along**2) / (2 * sigma**2)) * np.cos(2 * math.pi * across / lam + psi)
    return g - g.mean()


def gabor_responses(img: GrayImage, cfg: ExtractorConfig) -> list[np.ndarray]:
    sigma = cfg.gabor_sigma_ratio * cfg.gabor_lambda
    return [
        convolve2d(img, gabor_kernel(t, cfg.gabor_lambda, sigma, cfg.gabor_gamma, cfg.gabor_psi))
        for t in GABOR_THETAS
    ]


def f_gabor(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    acc = np.sum([np.abs(r) for r in gabor_responses(img, cfg)], axis=0)
    L2 = float(img.max_value) ** 2
    return [float(np.mean(acc * acc)) / L2, float(acc.var()) / L2]


# --------------------------------------------------------------------------- #
# Homomorphic filtering
# --------------------------------------------------------------------------- #


def homomorphic_filter(img: GrayImage, cfg: ExtractorConfig) -> np.ndarray:
    u = img.pixels.astype(float)
    M, N = u.shape
    ku = np.fft.fftfreq(M) * M
    kv = np.fft.fftfreq(N) * N
    d2 = ku[:, None] ** 2 + kv[None, :] ** 2
    d0 = cfg.homo_cutoff_frac * min(M, N)
    gl, gh = cfg.homo_gamma_low, cfg.homo_gamma_high
    H = gl + (gh - gl) * (1.0 - np.exp(-d2 / (2.0 * d0 * d0)))
    out = np.real(np.fft.ifft2(H * np.fft.fft2(np.log1p(u))))
    return np.expm1(out)


def f_homomorphic(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    v = homomorphic_filter(img, cfg)
    lo, hi = float(v.min()), float(v.max())
    # FFT round-off leaves ripples on flat inputs; treat them as constant.
    if hi - lo <= 1e-9 * max(1.0, abs(hi)):
        return [0.0]
    L = float(img.max_value)
    scaled = (v - lo) / (hi - lo) * L
    idx = np.clip(np.floor(scaled * 256 / (L + 1)).astype(np.int64), 0, 255)
    p = np.bincount(idx.ravel(), minlength=256) / idx.size
    return [shannon_entropy(p)]


# --------------------------------------------------------------------------- #
# HOG vector field
# --------------------------------------------------------------------------- #


def gradients(img: GrayImage) -> tuple[np.ndarray, np.ndarray]:
    return convolve2d(img, SOBEL_X), convolve2d(img, SOBEL_Y)


def hog_field(img: GrayImage, cfg: ExtractorConfig):
    """Per-cell dominant-orientation vectors ``(fx, fy, angles, magnitudes)``.

    Each cell's vector points along the centre of its strongest unsigned
    orientation bin, with length equal to the mean gradient magnitude / L.
    Returns ``None`` when the image is smaller than one cell.
    """
    c = cfg.hog_cell
    ny, nx = img.height // c, img.width // c
    if ny == 0 or nx == 0:
        return None
    gx, gy = gradients(img)
    gx, gy = gx[: ny * c, : nx * c], gy[: ny * c, : nx * c]
    mag = np.hypot(gx, gy)
    ang = np.mod(np.arctan2(gy, gx), math.pi)
    bins = np.minimum((ang * cfg.hog_bins / math.pi).astype(np.int64), cfg.hog_bins - 1)
    # cell index of each pixel, then a (cells, bins) magnitude-weighted histogram
    cell = (np.arange(ny * c)[:, None] // c) * nx + (np.arange(nx * c)[None, :] // c)
    hist = np.bincount((cell * cfg.hog_bins + bins).ravel(), weights=mag.ravel(),
                       minlength=ny * nx * cfg.hog_bins).reshape(ny * nx, cfg.hog_bins)
    dom = np.argmax(hist, axis=1)
    phi = (dom + 0.5) * math.pi / cfg.hog_bins
    m = mag.reshape(ny, c, nx, c).mean(axis=(1, 3)).ravel() / float(img.max_value)
    fx = (m * np.cos(phi)).reshape(ny, nx)
    fy = (m * np.sin(phi)).reshape(ny, nx)
    return fx, fy, phi.reshape(ny, nx), m.reshape(ny, nx)


def field_laplacian(fx: np.ndarray, fy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Laplacian of each field component (highlights abrupt orientation changes)."""
    return convolve2d(fx, LAPLACIAN), convolve2d(fy, LAPLACIAN)


def orientation_variance(phi: np.ndarray, m: np.ndarray) -> float:
    """Circular variance of unsigned angles (doubled-angle form) over non-empty cells."""
    live = m > 0
    if not np.any(live):
        return 0.0
    z = np.exp(2j * phi[live])
    return float(1.0 - abs(z.mean()))


def field_features(fx: np.ndarray, fy: np.ndarray) -> list[float]:
    """L1/L2 norms of divergence and curl, divided by the number of cells."""
    fx = np.asarray(fx, dtype=float)
    fy = np.asarray(fy, dtype=float)
    # Round trip through the frequency domain before differentiating.
    F = np.fft.ifft2(np.fft.fft2(fx + 1j * fy))
    fx, fy = F.real, F.imag
    kx, ky = SOBEL_X / 8.0, SOBEL_Y / 8.0
    div = convolve2d(fx, kx) + convolve2d(fy, ky)
    curl = convolve2d(fy, kx) - convolve2d(fx, ky)
    n = fx.size
    return [
        float(np.abs(div).sum()) / n,
        float(np.sqrt(np.sum(div * div))) / n,
        float(np.abs(curl).sum()) / n,
        float(np.sqrt(np.sum(curl * curl))) / n,
    ]


def f_hog_field(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    field = hog_field(img, cfg)
    if field is None:
        return [0.0] * 5
    fx, fy, phi, m = field
    return [orientation_variance(phi, m)] + field_features(fx, fy)


# --------------------------------------------------------------------------- #
# LBP
# --------------------------------------------------------------------------- #

# Neighbour offsets (row, col), clockwise from the top-left; bit n has weight 2^n.
LBP_OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))


def lbp_codes(u: np.ndarray) -> np.ndarray:
    """8-neighbour radius-1 codes of interior pixels (neighbour >= centre sets the bit)."""
    u = np.asarray(u)
    H, W = u.shape
    if H < 3 or W < 3:
        return np.zeros((0, 0), dtype=np.int64)
    centre = u[1:-1, 1:-1]
    codes = np.zeros(centre.shape, dtype=np.int64)
    for n, (dr, dc) in enumerate(LBP_OFFSETS):
        codes |= (u[1 + dr : H - 1 + dr, 1 + dc : W - 1 + dc] >= centre).astype(np.int64) << n
    return codes


def f_lbp(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    eq = clahe(img, cfg.clahe_clip, (cfg.clahe_tiles, cfg.clahe_tiles))
    codes = lbp_codes(eq.pixels)
    if codes.size == 0:
        return [0.0]
    p = np.bincount(codes.ravel(), minlength=256) / codes.size
    return [shannon_entropy(p)]
