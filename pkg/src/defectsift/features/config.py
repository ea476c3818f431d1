"""Extractor configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace

DEFAULT_CATEGORIES = (
    "pixel_loss",
    "uniformity",
    "iqr",
    "gmm_posterior",
    "proximity",
    "connectivity",
    "hist_likelihood",
    "centroid",
    "tv",
    "hist_distance",
    "pointloss_spread",
    "ssim_neighbors",
    "basic_stats",
    "texture",
    "gabor",
    "homomorphic",
    "hog_field",
    "lbp",
    "cooccurrence",
)


@dataclass(frozen=True)
class ExtractorConfig:
    """Parameters of every extractor.

    Intensity-valued thresholds are given at 8-bit scale and rescaled for
    16-bit images (``lost_thresh`` linearly, ``lambda_noise`` quadratically).
    """

    lost_thresh: float = 8.0
    # Lost-pixel count at or above which the hard pixel-loss decision says "defect".
    loss_lambda: float = 32.0
    patch_grid: int = 4
    patch_min_black: int = 1
    mc_sims: int = 500
    iqr_a: float = 1.0
    iqr_b: float = 1.0
    local_var_window: int = 5
    lambda_noise: float = 1000.0
    gmm_K: int = 3
    proximity_sims: int = 200
    proximity_max_pairs: int = 10_000
    conn_A_min: int = 1
    tv_alpha: float = 1.0
    tv_beta: float = 1.0
    gabor_lambda: float = 8.0
    gabor_sigma_ratio: float = 0.56
    gabor_gamma: float = 0.5
    gabor_psi: float = 0.0
    homo_gamma_low: float = 0.5
    homo_gamma_high: float = 1.5
    homo_cutoff_frac: float = 0.1
    hog_cell: int = 8
    hog_bins: int = 9
    clahe_clip: float = 2.0
    clahe_tiles: int = 8
    cooc_levels: int = 32
    hist_bins: int = 256
    # Optional (P_noise, P_defect) override of the reference-model priors.
    priors: tuple | None = None
    resample: tuple | None = None
    categories: tuple = field(default=DEFAULT_CATEGORIES)
    seed: int = 0

    def __post_init__(self):
        if self.patch_grid not in (4, 8):
            raise ValueError("patch_grid must be 4 or 8")
        if self.local_var_window < 1 or self.local_var_window % 2 == 0:
            raise ValueError("local_var_window must be odd")
        for name in ("gmm_K", "proximity_sims", "proximity_max_pairs", "hog_cell", "hog_bins",
                     "cooc_levels", "clahe_tiles", "mc_sims"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.conn_A_min < 1 or self.patch_min_black < 1:
            raise ValueError("conn_A_min and patch_min_black must be >= 1")
        if self.priors is not None:
            p = tuple(float(v) for v in self.priors)
            if len(p) != 2 or min(p) <= 0 or abs(sum(p) - 1.0) > 1e-9:
                raise ValueError("priors must be two positive numbers summing to 1")
            object.__setattr__(self, "priors", p)
        if self.resample is not None:
            object.__setattr__(self, "resample", tuple(int(v) for v in self.resample))
        cats = tuple(self.categories)
        unknown = sorted(set(cats) - set(DEFAULT_CATEGORIES))
        if unknown or len(set(cats)) != len(cats):
            raise ValueError(f"invalid categories: {unknown or 'duplicates'}")
        object.__setattr__(self, "categories", cats)

    def depth_scale(self, bit_depth: int) -> float:
        return float(1 << (bit_depth - 8))

    def lost_threshold(self, bit_depth: int) -> float:
        return self.lost_thresh * self.depth_scale(bit_depth)

    def noise_threshold(self, bit_depth: int) -> float:
        return self.lambda_noise * self.depth_scale(bit_depth) ** 2

    def to_dict(self) -> dict:
        d = asdict(self)
        d["categories"] = list(self.categories)
        for key in ("priors", "resample"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExtractorConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise KeyError(f"unknown extractor config keys: {unknown}")
        d = dict(d)
        for key in ("categories", "priors", "resample"):
            if d.get(key) is not None:
                d[key] = tuple(d[key])
        return cls(**d)

    def with_(self, **kw) -> "ExtractorConfig":
        return replace(self, **kw)
