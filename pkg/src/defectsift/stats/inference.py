"""Hypothesis tests used by the uniformity features and the selection pipeline."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from ..errors import AllZeroCounts, TooFewSamples


@dataclass(frozen=True)
class ContingencyTable:
    """2x2 table ``[[a, b], [c, d]]``."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        for name in "abcd":
            v = getattr(self, name)
            if int(v) != v or v < 0:
                raise ValueError(f"cell {name} must be a nonnegative integer, got {v}")
        if self.a + self.b + self.c + self.d == 0:
            raise ValueError("contingency table is empty")

    @property
    def n(self) -> int:
        return self.a + self.b + self.c + self.d


def _as_counts(counts) -> tuple[np.ndarray, float]:
    o = np.asarray(counts, dtype=float).ravel()
    if o.size < 2:
        raise TooFewSamples("need at least two counts")
    e = float(o.mean())
    if e <= 0:
        raise AllZeroCounts("all counts are zero")
    return o, e


def chi_square_uniformity(counts) -> tuple[float, float]:
    """Pearson statistic against equal expected counts and its upper-tail p."""
    o, e = _as_counts(counts)
    chi2 = float(np.sum((o - e) ** 2) / e)
    dof = o.size - 1
    p = float(special.gammaincc(dof / 2.0, chi2 / 2.0))
    return chi2, min(max(p, 0.0), 1.0)


def monte_carlo_poisson_pvalue(counts, n_sims: int = 500, seed: int = 0) -> float:
    """Fraction of Poisson(E) count vectors whose Pearson statistic reaches the observed one."""
    if n_sims < 100:
        raise ValueError("n_sims must be >= 100")
    o, e = _as_counts(counts)
    observed = np.sum((o - e) ** 2) / e
    rng = np.random.default_rng(seed)
    sims = rng.poisson(e, size=(n_sims, o.size))
    stats = np.sum((sims - e) ** 2, axis=1) / e
    # Relative slack keeps float round-off from breaking exact ties.
    return float(np.mean(stats >= observed * (1.0 - 1e-12) - 1e-12))


def fisher_exact_pvalue(table: ContingencyTable) -> float:
    """Two-sided Fisher exact test, summing tables no more probable than observed.

    Probabilities share the denominator ``C(N, c1)`` so comparisons run on
    exact integers.
    """
    r1, r2 = table.a + table.b, table.c + table.d
    c1, c2 = table.a + table.c, table.b + table.d
    if min(r1, r2, c1, c2) == 0:
        return 1.0
    lo, hi = max(0, c1 - r2), min(r1, c1)
    weights = {k: math.comb(r1, k) * math.comb(r2, c1 - k) for k in range(lo, hi + 1)}
    observed = weights[table.a]
    num = sum(w for w in weights.values() if w <= observed)
    return min(1.0, num / math.comb(r1 + r2, c1))


def fisher_point_probabilities(table: ContingencyTable) -> dict[int, float]:
    """Hypergeometric probability of every table sharing the margins, keyed by cell ``a``."""
    r1, r2 = table.a + table.b, table.c + table.d
    c1 = table.a + table.c
    total = math.comb(r1 + r2, c1)
    lo, hi = max(0, c1 - r2), min(r1, c1)
    return {k: math.comb(r1, k) * math.comb(r2, c1 - k) / total for k in range(lo, hi + 1)}


def kolmogorov_pvalue(d: float, n: int, terms: int = 100) -> float:
    """Asymptotic Kolmogorov tail ``2 sum (-1)^(k-1) exp(-2 k^2 n d^2)``."""
    lam = math.sqrt(n) * d
    # Below this the tail equals 1 to double precision and the series is not yet converged.
    if lam < 0.18:
        return 1.0
    k = np.arange(1, terms + 1)
    s = 2.0 * np.sum((-1.0) ** (k - 1) * np.exp(-2.0 * k**2 * lam**2))
    return float(min(max(s, 0.0), 1.0))


def ks_normal_test(sample) -> tuple[float, float, float]:
    """K-S distance to the normal fitted by sample mean and std.

    Returns ``(d, p_std, p_paper)`` where ``p_std`` is the Kolmogorov tail and
    ``p_paper = erf(d * sqrt(n))``.
    """
    x = np.sort(np.asarray(sample, dtype=float).ravel())
    n = x.size
    if n < 8:
        raise TooFewSamples(f"K-S test needs n >= 8, got {n}")
    std = x.std()
    if std == 0:
        # Point mass: the CDF jumps from 0 to 1 at the mean.
        d = 0.5
    else:
        cdf = special.ndtr((x - x.mean()) / std)
        i = np.arange(1, n + 1)
        d = float(max(np.max(i / n - cdf), np.max(cdf - (i - 1) / n)))
    return d, kolmogorov_pvalue(d, n), float(special.erf(d * math.sqrt(n)))


def welch_t_test(x, y) -> tuple[float, float, float]:
    """Unequal-variance t statistic (population variances) and the erf p-value.

    Returns ``(t, p_paper, dof)`` with ``p_paper = 0.5 * (1 - erf(t / sqrt(2)))``.
    """
    a = np.asarray(x, dtype=float).ravel()
    b = np.asarray(y, dtype=float).ravel()
    n1, n2 = a.size, b.size
    if n1 < 2 or n2 < 2:
        raise TooFewSamples("t-test needs at least two samples per group")
    v1, v2 = a.var(), b.var()
    diff = abs(a.mean() - b.mean())
    se2 = v1 / n1 + v2 / n2
    if se2 == 0:
        t = 0.0 if diff == 0 else 1e30
    else:
        t = float(diff / math.sqrt(se2))
    if n1 == n2 or se2 == 0:
        dof = float(n1 + n2 - 2)
    else:
        dof = float(se2**2 / ((v1 / n1) ** 2 / (n1 - 1) + (v2 / n2) ** 2 / (n2 - 1)))
    p = 0.5 * (1.0 - math.erf(t / math.sqrt(2.0)))
    return t, p, dof
