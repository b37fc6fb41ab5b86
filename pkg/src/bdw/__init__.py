"""Bivariate discrete Weibull modelling toolkit.

Exact probabilities, sampling and moments for the shared-shock bivariate
discrete Weibull law, its continuous latent counterpart, maximum
likelihood and Bayesian fitting, and chi-square fit checks.  The ``bdw``
command-line tool wraps the fitting and simulation entry points.
"""

from __future__ import annotations

from .bivariate import (
    BDWParams,
    BdwMoments,
    BivariateGeomParams,
    from_mobw,
    joint_cdf,
    joint_logpmf,
    joint_pmf,
    joint_pmf_grid,
    joint_sf,
    marginals,
    min_distribution,
    moments,
    sample,
    to_mobw,
)
from .datasets import builtin_dataset
from .fit_bayes import (
    AlphaPrior,
    DGPrior,
    PosteriorDraws,
    augmented_gibbs,
    credible_interval,
    hpd_interval,
)
from .fit_ml import (
    BivariateDataset,
    MLFitReport,
    alpha_equals_one_test,
    bdw_loglik,
    init_estimates,
    nested_em,
)
from .gof import ChiSquareReport, chisq_bdw, chisq_dw, chisq_upper_tail
from .mobw import CompleteObservation, LatentPrediction, MOBWParams, ml_predict
from .univariate import (
    DWParams,
    SingularDensityError,
    WeibullParams,
    dw_fit_minchisq,
    dw_fit_ml,
    dw_pmf,
    dw_sample,
    dw_sf,
)

__version__ = "0.1.0"

__all__ = [
    "AlphaPrior",
    "BDWParams",
    "BdwMoments",
    "BivariateDataset",
    "BivariateGeomParams",
    "ChiSquareReport",
    "CompleteObservation",
    "DGPrior",
    "DWParams",
    "LatentPrediction",
    "MLFitReport",
    "MOBWParams",
    "PosteriorDraws",
    "SingularDensityError",
    "WeibullParams",
    "alpha_equals_one_test",
    "augmented_gibbs",
    "bdw_loglik",
    "builtin_dataset",
    "chisq_bdw",
    "chisq_dw",
    "chisq_upper_tail",
    "credible_interval",
    "dw_fit_minchisq",
    "dw_fit_ml",
    "dw_pmf",
    "dw_sample",
    "dw_sf",
    "from_mobw",
    "hpd_interval",
    "init_estimates",
    "joint_cdf",
    "joint_logpmf",
    "joint_pmf",
    "joint_pmf_grid",
    "joint_sf",
    "marginals",
    "min_distribution",
    "ml_predict",
    "moments",
    "nested_em",
    "sample",
    "to_mobw",
    "__version__",
]
