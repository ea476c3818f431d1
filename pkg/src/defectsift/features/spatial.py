"""Features computed from the lost-pixel mask: counts, uniformity, proximity,
connectivity, centroid, total variation and point-loss spread."""

from __future__ import annotations

import math

import numpy as np
from scipy import ndimage

from ..imaging import GrayImage, lost_mask
from ..stats import (
    ContingencyTable,
    chi_square_uniformity,
    fisher_exact_pvalue,
    monte_carlo_poisson_pvalue,
)
from .config import ExtractorConfig

STRUCT_4 = ndimage.generate_binary_structure(2, 1)
STRUCT_8 = ndimage.generate_binary_structure(2, 2)


def mask_of(img: GrayImage, cfg: ExtractorConfig) -> np.ndarray:
    return lost_mask(img, cfg.lost_threshold(img.bit_depth))


def diagonal(shape) -> float:
    return math.hypot(shape[0], shape[1])


# --------------------------------------------------------------------------- #
# Pixel loss
# --------------------------------------------------------------------------- #


def pixel_loss_loglik_ratio(a0: float, loss_moments) -> float:
    """Log-ratio of the defect and noise normal likelihoods of a lost-pixel count.

    Each class likelihood is ``exp(-(a0 - (mu + var))^2 / (2 var))``, with the
    class expectation taken as mean plus variance.
    """
    mu_d, var_d, mu_n, var_n = (float(v) for v in loss_moments)
    var_d, var_n = max(var_d, 1.0), max(var_n, 1.0)
    ll_d = -((a0 - (mu_d + var_d)) ** 2) / (2.0 * var_d)
    ll_n = -((a0 - (mu_n + var_n)) ** 2) / (2.0 * var_n)
    return ll_d - ll_n


def f_pixel_loss(img: GrayImage, ref, cfg: ExtractorConfig) -> list[float]:
    mask = mask_of(img, cfg)
    a0 = int(mask.sum())
    ratio = a0 / mask.size
    hard = 1.0 if a0 >= cfg.loss_lambda else 0.0
    llr = 0.0 if ref is None else pixel_loss_loglik_ratio(a0, ref.loss_moments)
    return [ratio, hard, llr]


# --------------------------------------------------------------------------- #
# Patch uniformity
# --------------------------------------------------------------------------- #


def patch_counts(mask: np.ndarray, grid: int) -> np.ndarray:
    """Black-pixel count of each of ``grid x grid`` near-equal patches (row-major)."""
    H, W = mask.shape
    rows = np.minimum(np.arange(H) * grid // H, grid - 1)
    cols = np.minimum(np.arange(W) * grid // W, grid - 1)
    idx = (rows[:, None] * grid + cols[None, :])[mask]
    return np.bincount(idx, minlength=grid * grid)


def f_uniformity(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    b = patch_counts(mask_of(img, cfg), cfg.patch_grid)
    black = b >= cfg.patch_min_black
    counts = np.where(black, b, 0)
    if counts.sum() == 0:
        return [1.0, 1.0, 1.0]
    _, chi2_p = chi_square_uniformity(counts)
    mc_p = monte_carlo_poisson_pvalue(counts, cfg.mc_sims, cfg.seed)
    defect = b > np.median(b)
    table = ContingencyTable(
        int(np.sum(black & defect)),
        int(np.sum(black & ~defect)),
        int(np.sum(~black & defect)),
        int(np.sum(~black & ~defect)),
    )
    return [chi2_p, mc_p, fisher_exact_pvalue(table)]


# --------------------------------------------------------------------------- #
# Pairwise proximity
# --------------------------------------------------------------------------- #


def _pair_index(n: int, max_pairs: int, rng: np.random.Generator):
    if n * (n - 1) // 2 <= max_pairs:
        return np.triu_indices(n, k=1)
    i = rng.integers(n, size=max_pairs)
    j = rng.integers(n - 1, size=max_pairs)
    j = j + (j >= i)
    return i, j


def f_proximity(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    mask = mask_of(img, cfg)
    n = int(mask.sum())
    if n < 2:
        return [0.0, 0.0, 0.0, 1.0]
    H, W = mask.shape
    diag = diagonal(mask.shape)
    rng = np.random.default_rng(cfg.seed)
    rows, cols = np.nonzero(mask)
    i, j = _pair_index(n, cfg.proximity_max_pairs, rng)
    dy = np.abs(rows[i] - rows[j]).astype(float)
    dx = np.abs(cols[i] - cols[j]).astype(float)
    eu = np.sqrt(dx * dx + dy * dy)
    observed = eu.mean()

    sims = np.empty(cfg.proximity_sims)
    for s in range(cfg.proximity_sims):
        flat = rng.choice(H * W, size=n, replace=False)
        r, c = np.divmod(flat, W)
        sims[s] = np.mean(np.hypot(r[i] - r[j], c[i] - c[j]))
    # Lower tail: a small value means lost pixels sit closer together than chance.
    p = float(np.mean(sims <= observed + 1e-12 * observed))
    return [observed / diag, float((dx + dy).mean()) / diag, float(np.maximum(dx, dy).mean()) / diag, p]


# --------------------------------------------------------------------------- #
# Connected components
# --------------------------------------------------------------------------- #


def component_sizes(mask: np.ndarray, connectivity: int = 8) -> np.ndarray:
    labels, n = ndimage.label(mask, structure=STRUCT_8 if connectivity == 8 else STRUCT_4)
    if n == 0:
        return np.zeros(0, dtype=np.int64)
    return np.bincount(labels.ravel(), minlength=n + 1)[1:]


def isolation_ratio(mask: np.ndarray, connectivity: int, a_min: int) -> tuple[float, int]:
    """``n_isolated / n_components / (M N)`` and the number of significant components."""
    sizes = component_sizes(mask, connectivity)
    n_iso = int(np.sum(sizes == 1))
    n_comp = int(np.sum(sizes >= a_min))
    if n_comp == 0:
        return 0.0, 0
    return n_iso / n_comp / mask.size, n_comp


def f_connectivity(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    mask = mask_of(img, cfg)
    r4, _ = isolation_ratio(mask, 4, cfg.conn_A_min)
    r8, n8 = isolation_ratio(mask, 8, cfg.conn_A_min)
    return [r4, r8, n8 / mask.size]


# --------------------------------------------------------------------------- #
# Centroid and spread
# --------------------------------------------------------------------------- #


def f_centroid(img: GrayImage, cfg: ExtractorConfig | None = None) -> list[float]:
    mask = mask_of(img, cfg or ExtractorConfig())
    if not mask.any():
        return [0.5, 0.5, 0.0]
    H, W = mask.shape
    rows, cols = np.nonzero(mask)
    # Offsets from the bounding-box corner make the spread exactly shift-invariant.
    r0, c0 = rows.min(), cols.min()
    dr, dc = rows - r0, cols - c0
    my, mx = dr.mean(), dc.mean()
    spread = np.mean(np.hypot(dr - my, dc - mx)) / diagonal(mask.shape)
    return [(c0 + mx + 0.5) / W, (r0 + my + 0.5) / H, float(spread)]


def f_pointloss_spread(img: GrayImage, cfg: ExtractorConfig | None = None) -> list[float]:
    mask = mask_of(img, cfg or ExtractorConfig())
    if not mask.any():
        return [0.0]
    rows, cols = np.nonzero(mask)
    rows, cols = rows - rows.min(), cols - cols.min()
    return [float(math.sqrt(rows.var() + cols.var()) / diagonal(mask.shape))]


# --------------------------------------------------------------------------- #
# Total variation / integral clustering metrics
# --------------------------------------------------------------------------- #


def oriented_sums(mask: np.ndarray):
    """Row, column, main-diagonal and anti-diagonal black-pixel sums."""
    H, W = mask.shape
    rows, cols = np.nonzero(mask)
    r = np.bincount(rows, minlength=H).astype(float)
    c = np.bincount(cols, minlength=W).astype(float)
    d_main = np.bincount(cols - rows + H - 1, minlength=H + W - 1).astype(float)
    d_anti = np.bincount(cols + rows, minlength=H + W - 1).astype(float)
    return r, c, d_main, d_anti


def total_variation(f: np.ndarray) -> float:
    return float(np.sum(np.abs(np.diff(f))))


def f_tv(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    mask = mask_of(img, cfg)
    B = int(mask.sum())
    if B == 0:
        return [0.0] * 9
    r, c, dm, da = oriented_sums(mask)
    tv_row = total_variation(r) / B
    tv_col = total_variation(c) / B
    tv_diag = 0.5 * (total_variation(dm) + total_variation(da)) / B
    int_row, int_col = r.mean(), c.mean()
    int_diag = 0.5 * (dm.mean() + da.mean())
    tv_comb = math.sqrt(tv_row**2 + tv_col**2 + tv_diag**2)
    int_comb = math.sqrt(int_row**2 + int_col**2 + int_diag**2)
    d_comb = cfg.tv_alpha * tv_comb + cfg.tv_beta * int_comb
    return [tv_row, tv_col, tv_diag, float(int_row), float(int_col), float(int_diag), tv_comb, int_comb, d_comb]
