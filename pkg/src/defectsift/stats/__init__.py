"""Statistical kernels: summaries, tests, histogram distances, density fits and EM."""

from .descriptive import SummaryStats, hampel_filter, mode_of, rank_quantile, summary_stats
from .distances import (
    gaussian_bhattacharyya,
    hist_bhattacharyya,
    hist_correlation,
    hist_intersection,
)
from .fitting import (
    FAMILIES,
    OUT_OF_SUPPORT,
    FittedPdf,
    gmm_fit,
    gumbel_fit,
    pdf_loglik,
    weibull_fit,
)
from .inference import (
    ContingencyTable,
    chi_square_uniformity,
    fisher_exact_pvalue,
    fisher_point_probabilities,
    kolmogorov_pvalue,
    ks_normal_test,
    monte_carlo_poisson_pvalue,
    welch_t_test,
)
from .mixture import EMConfig, GaussianMixture, gmm_fit_em

__all__ = [
    "ContingencyTable",
    "EMConfig",
    "FAMILIES",
    "FittedPdf",
    "GaussianMixture",
    "OUT_OF_SUPPORT",
    "SummaryStats",
    "chi_square_uniformity",
    "fisher_exact_pvalue",
    "fisher_point_probabilities",
    "gaussian_bhattacharyya",
    "gmm_fit",
    "gmm_fit_em",
    "gumbel_fit",
    "hampel_filter",
    "hist_bhattacharyya",
    "hist_correlation",
    "hist_intersection",
    "kolmogorov_pvalue",
    "ks_normal_test",
    "mode_of",
    "monte_carlo_poisson_pvalue",
    "pdf_loglik",
    "rank_quantile",
    "summary_stats",
    "weibull_fit",
    "welch_t_test",
]
