"""Intensity-distribution features: IQR outliers, GMM posteriors, reference
likelihoods and histogram distances."""

from __future__ import annotations

import numpy as np
from scipy.special import softmax

from ..imaging import GrayImage, histogram, local_mean_var
from ..stats import (
    FAMILIES,
    hist_bhattacharyya,
    hist_correlation,
    hist_intersection,
    pdf_loglik,
    rank_quantile,
)
from .config import ExtractorConfig


def iqr_classes(img: GrayImage, cfg: ExtractorConfig):
    """Per-pixel outlier map ``O`` and local-variance map ``L``.

    ``O`` combines the (non-strict) IQR fences with a deviation test: the
    squared deviation of the pixel from its local mean must exceed the noise
    threshold. ``L`` flags a local variance below the same threshold.
    """
    u = img.pixels.astype(float)
    s = np.sort(u.ravel())
    q1, q3 = rank_quantile(s, 0.25), rank_quantile(s, 0.75)
    iqr = q3 - q1
    c1, c2 = cfg.iqr_a * 1.5 * iqr, cfg.iqr_b * 1.5 * iqr
    lam = cfg.noise_threshold(img.bit_depth)
    mean, var = local_mean_var(u, cfg.local_var_window)
    fence = (u <= q1 - c1) | (u >= q3 + c2)
    outlier = fence & ((u - mean) ** 2 > lam)
    low_var = var < lam
    return outlier, low_var


def f_iqr(img: GrayImage, cfg: ExtractorConfig) -> list[float]:
    o, low = iqr_classes(img, cfg)
    n = o.size
    noise = int(np.sum(o & low))
    defect = int(np.sum(o & ~low))
    return [(noise + defect) / n, noise / n, defect / n]


def f_gmm_posterior(img: GrayImage, ref, cfg: ExtractorConfig) -> list[float]:
    """Prior-adjusted class posteriors from the mean per-pixel GMM log-likelihood."""
    if ref is None:
        return [0.5, 0.5]
    x = img.pixels.ravel().astype(float)
    ll_noise = float(np.mean(pdf_loglik(ref.fp_pdfs["gmm"], x)))
    ll_defect = float(np.mean(pdf_loglik(ref.tp_pdfs["gmm"], x)))
    p_noise, p_defect = cfg.priors if cfg.priors is not None else ref.priors
    post = softmax([ll_noise + np.log(p_noise), ll_defect + np.log(p_defect)])
    return [float(post[0]), float(1.0 - post[0])]


def _normalized_loglik(ll: np.ndarray) -> np.ndarray:
    total = ll.sum()
    return ll / total if total != 0 else np.zeros_like(ll)


def f_hist_likelihood(img: GrayImage, ref, cfg: ExtractorConfig | None = None) -> list[float]:
    """Reference-likelihood features: N_TP fraction, six cubed sums (per pixel), best class."""
    if ref is None:
        return [0.0] * 7 + [0.5]
    x = img.pixels.ravel().astype(float)
    n = x.size
    ll_tp = {f: pdf_loglik(ref.tp_pdfs[f], x) for f in FAMILIES}
    ll_fp = {f: pdf_loglik(ref.fp_pdfs[f], x) for f in FAMILIES}
    s_tp = {f: float(np.sum(ll_tp[f] ** 3)) / n for f in FAMILIES}
    s_fp = {f: float(np.sum(ll_fp[f] ** 3)) / n for f in FAMILIES}
    n_tp = int(np.sum(_normalized_loglik(ll_tp[ref.tp_best]) > _normalized_loglik(ll_fp[ref.fp_best])))
    a, b = s_tp[ref.tp_best], s_fp[ref.fp_best]
    best = 1.0 if a > b else 0.0 if a < b else 0.5
    out = [n_tp / n]
    for f in FAMILIES:
        out += [s_tp[f], s_fp[f]]
    return out + [best]


def f_hist_distance(img: GrayImage, ref, cfg: ExtractorConfig | None = None) -> list[float]:
    if ref is None:
        return [0.5] * 6
    h = histogram(img, ref.tp_median_hist.n_bins).bins
    tp, fp = ref.tp_median_hist.bins, ref.fp_median_hist.bins
    return [
        hist_bhattacharyya(h, tp),
        hist_bhattacharyya(h, fp),
        hist_correlation(h, tp),
        hist_correlation(h, fp),
        hist_intersection(h, tp),
        hist_intersection(h, fp),
    ]
