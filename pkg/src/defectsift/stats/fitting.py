"""Weibull / Gumbel / GMM fits of intensity data and their log-densities."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..errors import NonPositiveSamples, TooFewSamples
from .mixture import EMConfig, GaussianMixture, gmm_fit_em

EULER_GAMMA = 0.5772156649015329
# Log-density reported outside a model's support.
OUT_OF_SUPPORT = -1e30
FAMILIES = ("weibull", "gumbel", "gmm")


@dataclass(frozen=True, eq=False)
class FittedPdf:
    """A fitted density.

    ``params`` holds ``k``, ``lam``, ``shift`` (weibull), ``mu``, ``beta``
    (gumbel) or the mixture arrays (gmm). Weibull models are evaluated at
    ``x + shift``.
    """

    family: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "weibull" and not (self.params["k"] > 0 and self.params["lam"] > 0):
            raise ValueError("Weibull k and lambda must be positive")
        if self.family == "gumbel" and not self.params["beta"] > 0:
            raise ValueError("Gumbel beta must be positive")

    @property
    def mixture(self) -> GaussianMixture:
        return GaussianMixture.from_dict(self.params)

    def to_dict(self) -> dict:
        return {"family": self.family, "params": {k: self.params[k] for k in sorted(self.params)}}

    @classmethod
    def from_dict(cls, d: dict) -> "FittedPdf":
        return cls(d["family"], dict(d["params"]))

    @classmethod
    def from_mixture(cls, gm: GaussianMixture) -> "FittedPdf":
        return cls("gmm", gm.to_dict())


def weibull_fit(samples, shift: float = 0.0, tol: float = 1e-8, max_iter: int = 200) -> FittedPdf:
    """Maximum-likelihood Weibull fit of ``samples + shift``.

    The shape solves ``1/k = sum(x^k ln x)/sum(x^k) - mean(ln x)``; the
    fixed-point map is averaged with the current iterate, which keeps it
    contractive. The start comes from the coefficient of variation.
    """
    x = np.asarray(samples, dtype=float).ravel() + shift
    if x.size < 8:
        raise TooFewSamples(f"Weibull fit needs n >= 8, got {x.size}")
    if np.any(x <= 0):
        raise NonPositiveSamples("Weibull support is x > 0")
    # Rescaling by the mean keeps x^k in range for large intensities.
    scale = x.mean()
    z = x / scale
    lz = np.log(z)
    mean_lz = lz.mean()
    cv = z.std() / z.mean()
    k = cv**-1.086 if cv > 0 else 100.0
    k = min(max(k, 0.05), 1e3)
    if cv > 0:
        for _ in range(max_iter):
            zk = z**k
            g = np.sum(zk * lz) / np.sum(zk) - mean_lz
            if g <= 0:
                break
            k_new = 0.5 * (k + 1.0 / g)
            if abs(k_new - k) <= tol * k:
                k = k_new
                break
            k = k_new
    lam = scale * float(np.mean(z**k)) ** (1.0 / k)
    return FittedPdf("weibull", {"k": float(k), "lam": float(lam), "shift": float(shift)})


def gumbel_fit(samples) -> FittedPdf:
    """Method-of-moments Gumbel (maximum) fit."""
    x = np.asarray(samples, dtype=float).ravel()
    if x.size < 8:
        raise TooFewSamples(f"Gumbel fit needs n >= 8, got {x.size}")
    beta = float(x.std() * math.sqrt(6.0) / math.pi)
    beta = max(beta, 1e-12 * max(1.0, abs(float(x.mean()))))
    mu = float(x.mean() - EULER_GAMMA * beta)
    return FittedPdf("gumbel", {"mu": mu, "beta": beta})


def gmm_fit(samples, K: int = 3, cfg: EMConfig | None = None) -> FittedPdf:
    return FittedPdf.from_mixture(gmm_fit_em(samples, K, cfg))


def pdf_loglik(model, x):
    """Natural-log density of ``model`` at ``x`` (scalar or array)."""
    scalar = np.ndim(x) == 0
    v = np.asarray(x, dtype=float).ravel()
    if isinstance(model, GaussianMixture):
        out = model.logpdf(v)
    elif model.family == "gmm":
        out = model.mixture.logpdf(v)
    elif model.family == "weibull":
        k, lam = model.params["k"], model.params["lam"]
        z = (v + model.params.get("shift", 0.0)) / lam
        out = np.full(v.shape, OUT_OF_SUPPORT)
        ok = z > 0
        out[ok] = math.log(k / lam) + (k - 1.0) * np.log(z[ok]) - z[ok] ** k
    else:
        mu, beta = model.params["mu"], model.params["beta"]
        z = (v - mu) / beta
        # exp(-z) overflows far in the left tail; such points are effectively outside the support.
        with np.errstate(over="ignore"):
            out = -math.log(beta) - z - np.exp(-z)
    out = np.where(np.isfinite(out), out, OUT_OF_SUPPORT)
    out = np.maximum(out, OUT_OF_SUPPORT)
    return float(out[0]) if scalar else out
