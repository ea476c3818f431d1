"""Feature registry: stable names and order, and the extraction driver."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import NumericError
from ..imaging import GrayImage, Roi, downsample
from . import basic, cooccurrence, distribution, filters, spatial
from .config import DEFAULT_CATEGORIES, ExtractorConfig

REGISTRY_VERSION = "1"

# Category -> (section tag, feature names). Order within a category is the
# extractor's output order.
CATEGORY_FEATURES = {
    "pixel_loss": ("pixel-loss", ("a0_ratio", "hard_class", "loglik_ratio")),
    "uniformity": ("patch-uniformity", ("chi2_p", "mc_p", "fisher_p")),
    "iqr": ("iqr-local-variance", ("outlier_ratio", "noise_ratio", "defect_ratio")),
    "gmm_posterior": ("gmm-posterior", ("post_noise", "post_defect")),
    "proximity": ("pairwise-proximity",
                  ("mean_d_euclid", "mean_d_manhattan", "mean_d_chebyshev", "uniform_p")),
    "connectivity": ("connectivity", ("r_isolated_4", "r_isolated_8", "n_components_ratio")),
    "hist_likelihood": ("histogram-likelihood",
                        ("n_tp_frac", "s_tp_w", "s_fp_w", "s_tp_g", "s_fp_g", "s_tp_m", "s_fp_m",
                         "best_class")),
    "centroid": ("centroid", ("cx_norm", "cy_norm", "spread_norm")),
    "tv": ("total-variation",
           ("tv_row", "tv_col", "tv_diag", "int_row", "int_col", "int_diag", "tv_combined",
            "int_combined", "d_combined")),
    "hist_distance": ("histogram-distance",
                      ("bhat_tp", "bhat_fp", "corr_tp", "corr_fp", "inter_tp", "inter_fp")),
    "pointloss_spread": ("point-loss", ("pointloss_spread",)),
    "ssim_neighbors": ("ssim", ("ssim_max",)),
    "basic_stats": ("basic-stats",
                    ("dynamic_range", "mean", "mode", "median", "max", "variance", "cv", "crlf")),
    "texture": ("texture", ("entropy", "energy", "homogeneity", "contrast", "kurtosis")),
    "gabor": ("gabor", ("gabor_energy", "gabor_variance")),
    "homomorphic": ("homomorphic", ("hf_entropy",)),
    "hog_field": ("hog-field", ("orient_variance", "div_l1", "div_l2", "curl_l1", "curl_l2")),
    "lbp": ("lbp", ("lbp_entropy",)),
    "cooccurrence": ("matrix-texture",
                     tuple(f"{m}_{k}" for m in cooccurrence.MATRICES for k in cooccurrence.METRICS)),
}


@dataclass(frozen=True)
class FeatureDescriptor:
    index: int
    name: str
    category: str
    paper_section: str


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    names: tuple
    registry_version: str = REGISTRY_VERSION

    def __len__(self) -> int:
        return self.values.size

    def as_dict(self) -> dict:
        return {n: float(v) for n, v in zip(self.names, self.values)}


def registry(cfg: ExtractorConfig | None = None) -> list[FeatureDescriptor]:
    cats = (cfg or ExtractorConfig()).categories
    out = []
    for cat in cats:
        section, names = CATEGORY_FEATURES[cat]
        for name in names:
            out.append(FeatureDescriptor(len(out), name, cat, section))
    return out


def feature_names(cfg: ExtractorConfig | None = None) -> list[str]:
    return [d.name for d in registry(cfg)]


def prepare(img: GrayImage, roi: Roi | None, cfg: ExtractorConfig) -> GrayImage:
    """Crop to the (clipped) ROI and optionally resample to ``cfg.resample``."""
    out = img if roi is None else img.crop(roi.clip(img.width, img.height))
    if cfg.resample is not None:
        w, h = cfg.resample
        # ROIs already at or below the target size are left as they are.
        if w <= out.width and h <= out.height and (w, h) != (out.width, out.height):
            out = downsample(out, w, h)
    return out


def _run(cat: str, img: GrayImage, roi_img: GrayImage, roi: Roi, ref, cfg: ExtractorConfig):
    if cat == "pixel_loss":
        return spatial.f_pixel_loss(roi_img, ref, cfg)
    if cat == "uniformity":
        return spatial.f_uniformity(roi_img, cfg)
    if cat == "iqr":
        return distribution.f_iqr(roi_img, cfg)
    if cat == "gmm_posterior":
        return distribution.f_gmm_posterior(roi_img, ref, cfg)
    if cat == "proximity":
        return spatial.f_proximity(roi_img, cfg)
    if cat == "connectivity":
        return spatial.f_connectivity(roi_img, cfg)
    if cat == "hist_likelihood":
        return distribution.f_hist_likelihood(roi_img, ref, cfg)
    if cat == "centroid":
        return spatial.f_centroid(roi_img, cfg)
    if cat == "tv":
        return spatial.f_tv(roi_img, cfg)
    if cat == "hist_distance":
        return distribution.f_hist_distance(roi_img, ref, cfg)
    if cat == "pointloss_spread":
        return spatial.f_pointloss_spread(roi_img, cfg)
    if cat == "ssim_neighbors":
        # Neighbours live in the parent image, so SSIM sees the uncropped frame.
        return basic.f_ssim_neighbors(img, roi)
    if cat == "basic_stats":
        return basic.f_basic_stats(roi_img)
    if cat == "texture":
        return basic.f_texture(roi_img, cfg.hist_bins)
    if cat == "gabor":
        return filters.f_gabor(roi_img, cfg)
    if cat == "homomorphic":
        return filters.f_homomorphic(roi_img, cfg)
    if cat == "hog_field":
        return filters.f_hog_field(roi_img, cfg)
    if cat == "lbp":
        return filters.f_lbp(roi_img, cfg)
    if cat == "cooccurrence":
        return cooccurrence.f_cooccurrence(roi_img, cfg)
    raise KeyError(cat)


def extract_all(img: GrayImage, roi: Roi | None = None, ref=None,
                cfg: ExtractorConfig | None = None) -> FeatureVector:
    """All registry features of ``img`` restricted to ``roi`` (default: whole image)."""
    cfg = cfg or ExtractorConfig()
    roi = (roi or Roi.full(img)).clip(img.width, img.height)
    roi_img = prepare(img, roi, cfg)
    values = []
    for cat in cfg.categories:
        out = _run(cat, img, roi_img, roi, ref, cfg)
        if len(out) != len(CATEGORY_FEATURES[cat][1]):
            raise AssertionError(f"{cat} returned {len(out)} values")
        values.extend(out)
    v = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(v)):
        bad = [n for n, x in zip(feature_names(cfg), v) if not np.isfinite(x)]
        raise NumericError(f"non-finite features: {bad}")
    return FeatureVector(v, tuple(feature_names(cfg)))
