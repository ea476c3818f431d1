"""Per-class reference models learned from a labeled image set."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyClass, TooFewSamples
from ..imaging import Histogram, histogram, lost_mask
from ..stats import (
    FAMILIES,
    EMConfig,
    FittedPdf,
    gmm_fit,
    gumbel_fit,
    pdf_loglik,
    weibull_fit,
)
from .config import ExtractorConfig

DEFAULT_PRIORS = (0.35, 0.65)
# Intensity offset that moves zero-valued pixels into the Weibull support.
WEIBULL_SHIFT = 1.0
# Sample budget used when a median histogram is too sparse to reconstitute.
MIN_RECONSTITUTED = 8
FALLBACK_BUDGET = 1000

LABEL_NOISE, LABEL_DEFECT = 0, 1


@dataclass(frozen=True, eq=False)
class ReferenceModels:
    """Class references: TP = defect (label 1), FP = noise (label 0).

    ``loss_moments`` is ``(mu_D, var_D, mu_N, var_N)`` of lost-pixel counts and
    ``priors`` is ``(P_noise, P_defect)``. ``tp_best``/``fp_best`` name the
    family with the highest total log-likelihood on that class's samples.
    """

    tp_median_hist: Histogram
    fp_median_hist: Histogram
    tp_pdfs: dict
    fp_pdfs: dict
    tp_best: str
    fp_best: str
    loss_moments: tuple
    priors: tuple = DEFAULT_PRIORS

    def __post_init__(self):
        if self.tp_median_hist.n_bins != self.fp_median_hist.n_bins:
            raise ValueError("median histograms must have identical bin counts")
        p = tuple(float(v) for v in self.priors)
        if len(p) != 2 or min(p) <= 0 or abs(sum(p) - 1.0) > 1e-9:
            raise ValueError("priors must be positive and sum to 1")
        object.__setattr__(self, "priors", p)
        object.__setattr__(self, "loss_moments", tuple(float(v) for v in self.loss_moments))

    def to_dict(self) -> dict:
        def hist(h: Histogram):
            return {"bins": [float(v) for v in h.bins], "lo": float(h.lo), "hi": float(h.hi)}

        return {
            "tp_median_hist": hist(self.tp_median_hist),
            "fp_median_hist": hist(self.fp_median_hist),
            "tp_pdfs": {f: self.tp_pdfs[f].to_dict() for f in FAMILIES},
            "fp_pdfs": {f: self.fp_pdfs[f].to_dict() for f in FAMILIES},
            "tp_best": self.tp_best,
            "fp_best": self.fp_best,
            "loss_moments": list(self.loss_moments),
            "priors": list(self.priors),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ReferenceModels":
        def hist(h):
            return Histogram(np.array(h["bins"], dtype=float), h["lo"], h["hi"])

        return cls(
            hist(d["tp_median_hist"]),
            hist(d["fp_median_hist"]),
            {f: FittedPdf.from_dict(d["tp_pdfs"][f]) for f in FAMILIES},
            {f: FittedPdf.from_dict(d["fp_pdfs"][f]) for f in FAMILIES},
            d["tp_best"],
            d["fp_best"],
            tuple(d["loss_moments"]),
            tuple(d["priors"]),
        )


def median_histogram(hists: list[Histogram]) -> Histogram:
    """Bin-wise median; falls back to the bin-wise mean when the median is nearly empty."""
    stack = np.stack([h.bins for h in hists])
    bins = np.median(stack, axis=0)
    if bins.sum() < MIN_RECONSTITUTED:
        bins = stack.mean(axis=0)
    return Histogram(bins, hists[0].lo, hists[0].hi)


def reconstitute(h: Histogram) -> np.ndarray:
    """Samples obtained by repeating each bin centre ``round(count)`` times."""
    counts = np.rint(h.bins).astype(np.int64)
    if counts.sum() < MIN_RECONSTITUTED:
        counts = np.rint(h.normalized() * FALLBACK_BUDGET).astype(np.int64)
    return np.repeat(h.centers(), counts)


def fit_families(samples: np.ndarray, cfg: ExtractorConfig) -> tuple[dict, str]:
    if samples.size < MIN_RECONSTITUTED:
        raise TooFewSamples("median histogram holds too few samples to fit")
    pdfs = {
        "weibull": weibull_fit(samples, shift=WEIBULL_SHIFT),
        "gumbel": gumbel_fit(samples),
        "gmm": gmm_fit(samples, cfg.gmm_K, EMConfig(seed=cfg.seed)),
    }
    totals = {f: float(np.sum(pdf_loglik(pdfs[f], samples))) for f in FAMILIES}
    # First family wins ties, following the fixed family order.
    best = max(FAMILIES, key=lambda f: totals[f])
    return pdfs, best


def build_reference_models(dataset, cfg: ExtractorConfig | None = None) -> ReferenceModels:
    """Build class references from ``(GrayImage, label)`` pairs (1 = defect, 0 = noise).

    Images should already be cropped/resampled the way extraction sees them.
    """
    cfg = cfg or ExtractorConfig()
    hists = {LABEL_NOISE: [], LABEL_DEFECT: []}
    losses = {LABEL_NOISE: [], LABEL_DEFECT: []}
    for img, label in dataset:
        label = int(label)
        if label not in hists:
            raise ValueError(f"labels must be 0 or 1, got {label}")
        hists[label].append(histogram(img, cfg.hist_bins))
        losses[label].append(int(lost_mask(img, cfg.lost_threshold(img.bit_depth)).sum()))
    for label, name in ((LABEL_DEFECT, "defect"), (LABEL_NOISE, "noise")):
        if not hists[label]:
            raise EmptyClass(f"no {name} images in the reference set")

    tp_hist = median_histogram(hists[LABEL_DEFECT])
    fp_hist = median_histogram(hists[LABEL_NOISE])
    tp_pdfs, tp_best = fit_families(reconstitute(tp_hist), cfg)
    fp_pdfs, fp_best = fit_families(reconstitute(fp_hist), cfg)
    ld = np.asarray(losses[LABEL_DEFECT], dtype=float)
    ln = np.asarray(losses[LABEL_NOISE], dtype=float)
    moments = (ld.mean(), ld.var(), ln.mean(), ln.var())
    return ReferenceModels(
        tp_hist, fp_hist, tp_pdfs, fp_pdfs, tp_best, fp_best, moments,
        cfg.priors if cfg.priors is not None else DEFAULT_PRIORS,
    )

