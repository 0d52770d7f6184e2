"""Over-parameterized Gaussian-kernel regression with SVD-domain thresholding.

Regressors place Gaussian kernels at labeled and (optionally) unlabeled
inputs, so the design matrix is wide.  Coefficients come either from ridge
regression or from minimum-norm least squares whose SVD-domain weights are
pruned by one of four thresholding rules; hyper-parameters are picked by
k-fold cross-validation.
"""

from .data import (
    Dataset,
    SyntheticTask,
    TrialSplit,
    generate_synthetic,
    load_csv,
    make_synthetic_dataset,
    split_trial,
    synthetic_task,
)
from .estimators import (
    DegenerateVarianceError,
    FittedModel,
    RiskEstimate,
    VarianceEstimate,
    bridge_function,
    bridge_threshold_weights,
    estimate_noise_variance,
    hard_threshold_weights,
    predict,
    ridge_fit,
    select_theta_sbt,
    ssv_weights,
    sure_risk,
    top_k_magnitude_weights,
    universal_threshold_level,
)
from .experiment import (
    METHODS,
    ConfigError,
    ExcessiveFailuresError,
    ExperimentConfig,
    RunResult,
    fit_method,
    metric_one_minus_r2,
    resolve_dataset,
    run_method_comparison,
    run_unlabeled_sweep,
)
from .kernels import (
    CenterSet,
    NormalizationParams,
    build_design_matrix,
    gaussian_kernel,
    normalize_features,
)
from .linalg import SvdDomain, decompose, inverse_transform, mnls, transform_outputs
from .model_selection import (
    CVConfig,
    CVResult,
    cv_select_ridge,
    cv_select_svd,
    cv_select_width_only,
    default_ridge_params,
    default_ridge_widths,
    default_svd_widths,
    kfold_split,
)

__version__ = "0.1.0"
