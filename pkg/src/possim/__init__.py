"""possim: possibilistic inference via relative-likelihood contours.

The package turns a parametric (or nonparametric) model plus observed data
into a plausibility contour -- a function ``phi -> pi_y(phi)`` in [0, 1]
whose alpha-cuts are confidence regions with guaranteed frequentist
coverage.  The main entry points:

* :func:`contour_vacuous` / :func:`contour_choquet` /
  :func:`contour_conditional` -- Monte Carlo and exact engines for the
  interest parameter of a parametric model;
* :func:`contour_closed_form` -- the handful of textbook cases with
  analytic contours;
* :mod:`possim.predictive` -- contours for a not-yet-observed quantity;
* :mod:`possim.nonparametric` -- empirical-likelihood, bootstrap,
  sample-splitting, and conformal variants;
* :mod:`possim.validity` -- simulation harness for checking the coverage
  guarantees.

``im`` (the console script in :mod:`possim.cli`) exposes the same engines
from the command line.
"""

from .errors import (
    PossimError,
    EmptyAssertionError,
    AlphaOutOfRangeError,
    ShapeMismatchError,
    InvalidParameterError,
    DegenerateDataError,
    UnsupportedStrategyError,
    DegenerateNormalizerError,
    ModelMismatchError,
    MissingIndependenceError,
    DegenerateSplitError,
)
from .contours import (
    GridDomain,
    FiniteDomain,
    ProductDomain,
    LatticeDomain,
    PossibilityContour,
    SubsetAssertion,
    IntervalsAssertion,
    CurveAssertion,
    Interval,
    Region,
    upper_probability,
    lower_probability,
    alpha_cut,
    extend,
    prob_to_poss,
    fisher_combine,
    contour_to_csv,
    contour_from_csv,
    contour_to_json,
    contour_from_json,
)
from .likelihood import (
    PartialPrior,
    ProfileOrdering,
    MarginalOrdering,
    FullOrdering,
    RegularizedOrdering,
    make_ordering,
    relative_likelihood,
    profile_relative_likelihood,
)
from .marginal import (
    MonteCarloPlan,
    linear_grid,
    log_grid,
    default_variance_ratio_grid,
    contour_vacuous,
    contour_choquet,
    contour_conditional,
    contour_closed_form,
    contour_full_parameter,
    plausibility_interval,
    fieller_tail_limit,
)
from .predictive import (
    PredictiveLink,
    PredictionProblem,
    normal_link,
    gamma_link,
    max_of_k_link,
    predict_combine,
    predict_joint_extend,
    predict_profile,
    normal_predictive_trio,
    multinomial_next_draw_log_ratio,
)
from .nonparametric import (
    el_mean_log_ratio,
    el_quantile_relative_likelihood,
    el_mean_bootstrap_contour,
    el_quantile_bootstrap_contour,
    np_multinomial_contour,
    sup_along_curve,
    bootstrap_contour,
    split_contour,
    LossFunction,
    squared_error_loss,
    absolute_loss,
    check_loss,
    risk_contour,
    NonconformityScore,
    mean_distance_score,
    conformal_transducer,
    conformal_contour,
)
from .validity import (
    ValidityReport,
    contour_at_truth_batch,
    estimate_validity_cdf,
    validity_cdf_batch,
    estimate_coverage,
    coverage_from_pis,
    coverage_batch,
    directional_pvalues,
    pvalue_bin_table,
    tail_bins,
    tail_bins_batch,
    markdown_table,
)
from .models import (
    ParametricModel,
    NormalIID,
    NormalKnownVariance,
    FiellerCreasy,
    BehrensFisher,
    MeanVectorLength,
    NeymanScott,
    Binomial,
    Multinomial,
    TwoBinomial,
    GammaMean,
    model_from_config,
)
from . import datasets

__version__ = "0.1.0"

__all__ = [
    # errors
    "PossimError",
    "EmptyAssertionError",
    "AlphaOutOfRangeError",
    "ShapeMismatchError",
    "InvalidParameterError",
    "DegenerateDataError",
    "UnsupportedStrategyError",
    "DegenerateNormalizerError",
    "ModelMismatchError",
    "MissingIndependenceError",
    "DegenerateSplitError",
    # contours and assertions
    "GridDomain",
    "FiniteDomain",
    "ProductDomain",
    "LatticeDomain",
    "PossibilityContour",
    "SubsetAssertion",
    "IntervalsAssertion",
    "CurveAssertion",
    "Interval",
    "Region",
    "upper_probability",
    "lower_probability",
    "alpha_cut",
    "extend",
    "prob_to_poss",
    "fisher_combine",
    "contour_to_csv",
    "contour_from_csv",
    "contour_to_json",
    "contour_from_json",
    # likelihood orderings and priors
    "PartialPrior",
    "ProfileOrdering",
    "MarginalOrdering",
    "FullOrdering",
    "RegularizedOrdering",
    "make_ordering",
    "relative_likelihood",
    "profile_relative_likelihood",
    # contour engines
    "MonteCarloPlan",
    "linear_grid",
    "log_grid",
    "default_variance_ratio_grid",
    "contour_vacuous",
    "contour_choquet",
    "contour_conditional",
    "contour_closed_form",
    "contour_full_parameter",
    "plausibility_interval",
    "fieller_tail_limit",
    # prediction
    "PredictiveLink",
    "PredictionProblem",
    "normal_link",
    "gamma_link",
    "max_of_k_link",
    "predict_combine",
    "predict_joint_extend",
    "predict_profile",
    "normal_predictive_trio",
    "multinomial_next_draw_log_ratio",
    # nonparametric
    "el_mean_log_ratio",
    "el_quantile_relative_likelihood",
    "el_mean_bootstrap_contour",
    "el_quantile_bootstrap_contour",
    "np_multinomial_contour",
    "sup_along_curve",
    "bootstrap_contour",
    "split_contour",
    "LossFunction",
    "squared_error_loss",
    "absolute_loss",
    "check_loss",
    "risk_contour",
    "NonconformityScore",
    "mean_distance_score",
    "conformal_transducer",
    "conformal_contour",
    # validity lab
    "ValidityReport",
    "contour_at_truth_batch",
    "estimate_validity_cdf",
    "validity_cdf_batch",
    "estimate_coverage",
    "coverage_from_pis",
    "coverage_batch",
    "directional_pvalues",
    "pvalue_bin_table",
    "markdown_table",
    "tail_bins",
    "tail_bins_batch",
    # models
    "ParametricModel",
    "NormalIID",
    "NormalKnownVariance",
    "FiellerCreasy",
    "BehrensFisher",
    "MeanVectorLength",
    "NeymanScott",
    "Binomial",
    "Multinomial",
    "TwoBinomial",
    "GammaMean",
    "model_from_config",
    # data
    "datasets",
]
