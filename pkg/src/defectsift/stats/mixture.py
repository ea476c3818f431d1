"""One-dimensional Gaussian mixtures fitted by expectation-maximization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp

from ..errors import TooFewSamples

LOG_2PI = float(np.log(2.0 * np.pi))


@dataclass(frozen=True)
class EMConfig:
    max_iter: int = 500
    tol: float = 1e-6
    var_floor_frac: float = 1e-6
    seed: int = 0


@dataclass(frozen=True, eq=False)
class GaussianMixture:
    weights: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    log_likelihood: list = field(default_factory=list, repr=False)
    n_iter: int = 0

    @property
    def K(self) -> int:
        return int(np.asarray(self.weights).size)

    def component_logpdf(self, x) -> np.ndarray:
        """Log of ``w_k N(x | mu_k, var_k)`` for each sample (rows) and component (columns)."""
        x = np.asarray(x, dtype=float).reshape(-1, 1)
        var = np.asarray(self.variances, dtype=float)
        with np.errstate(divide="ignore"):
            logw = np.log(np.asarray(self.weights, dtype=float))
        return logw - 0.5 * (LOG_2PI + np.log(var) + (x - self.means) ** 2 / var)

    def logpdf(self, x) -> np.ndarray:
        return logsumexp(self.component_logpdf(x), axis=1)

    def responsibilities(self, x) -> np.ndarray:
        lp = self.component_logpdf(x)
        return np.exp(lp - logsumexp(lp, axis=1, keepdims=True))

    def sample(self, n: int, rng: np.random.Generator) -> np.ndarray:
        comp = rng.choice(self.K, size=n, p=np.asarray(self.weights) / np.sum(self.weights))
        return rng.normal(np.asarray(self.means)[comp], np.sqrt(np.asarray(self.variances)[comp]))

    def to_dict(self) -> dict:
        return {
            "weights": [float(v) for v in self.weights],
            "means": [float(v) for v in self.means],
            "variances": [float(v) for v in self.variances],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "GaussianMixture":
        return cls(np.array(d["weights"]), np.array(d["means"]), np.array(d["variances"]))


def _kmeanspp_means(x: np.ndarray, K: int, rng: np.random.Generator) -> np.ndarray:
    centers = [x[rng.integers(x.size)]]
    for _ in range(1, K):
        d2 = np.min((x[:, None] - np.array(centers)[None, :]) ** 2, axis=1)
        total = d2.sum()
        if total <= 0:
            centers.append(x[rng.integers(x.size)])
        else:
            centers.append(x[rng.choice(x.size, p=d2 / total)])
    return np.sort(np.array(centers, dtype=float))


def gmm_fit_em(samples, K: int = 3, cfg: EMConfig | None = None) -> GaussianMixture:
    """Fit a K-component mixture by EM.

    Means start from k-means++ seeding, weights are equal and every variance
    starts at the pooled sample variance. Variances never drop below
    ``var_floor_frac * sample variance``; the floored update is still the
    constrained maximizer, so the log-likelihood stays nondecreasing.
    Iteration stops when the relative log-likelihood change falls below ``tol``.
    """
    cfg = cfg or EMConfig()
    x = np.asarray(samples, dtype=float).ravel()
    n = x.size
    if K < 1 or n < K:
        raise TooFewSamples(f"need n >= K >= 1, got n={n}, K={K}")
    rng = np.random.default_rng(cfg.seed)
    pooled = float(x.var())
    floor = max(cfg.var_floor_frac * pooled, 1e-12)

    means = _kmeanspp_means(x, K, rng)
    weights = np.full(K, 1.0 / K)
    variances = np.full(K, max(pooled, floor))
    history = []
    it = 0
    prev = -np.inf
    for it in range(1, cfg.max_iter + 1):
        model = GaussianMixture(weights, means, variances)
        lp = model.component_logpdf(x)
        norm = logsumexp(lp, axis=1, keepdims=True)
        ll = float(norm.sum())
        history.append(ll)
        if np.isfinite(prev) and abs(ll - prev) <= cfg.tol * abs(prev):
            break
        prev = ll
        resp = np.exp(lp - norm)
        nk = resp.sum(axis=0)
        alive = nk > 1e-12 * n
        new_means = means.copy()
        new_vars = variances.copy()
        new_means[alive] = (resp[:, alive] * x[:, None]).sum(axis=0) / nk[alive]
        new_vars[alive] = (resp[:, alive] * (x[:, None] - new_means[alive]) ** 2).sum(axis=0) / nk[alive]
        weights = nk / n
        means = new_means
        variances = np.maximum(new_vars, floor)
    else:
        model = GaussianMixture(weights, means, variances)
        history.append(float(model.logpdf(x).sum()))
    order = np.argsort(means, kind="stable")
    return GaussianMixture(weights[order], means[order], variances[order], history, it)
