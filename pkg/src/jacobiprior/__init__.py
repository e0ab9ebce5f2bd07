"""Closed-form Bayesian multinomial classification.

Targets are transformed counts (log(Y + a) - log(1 + b)) and coefficients
are their least-squares projection onto the design: no iteration anywhere.
The package also ships the exact-GP variant of the same construction, PCA
and standardization utilities, a closed-form ridge baseline, bit-exact model
serialization, and Monte Carlo harnesses that verify the estimator's
consistency, asymptotic normality, bias correction, and hyperparameter
invariance claims.
"""

__version__ = "0.1.0"

from . import backend
from .baselines import RidgeModel, fit_ridge, predict_ridge, predict_ridge_classes
from .dmr import (
    InvarianceDecomposition,
    JacobiDmrModel,
    bias_correct,
    decision_scores,
    decompose_invariance,
    fit,
    fit_counts,
    predict_class,
    predict_classes,
    predict_scores,
    transform_targets,
)
from .errors import (
    EigFailure,
    InvalidHyperparameter,
    InvalidInput,
    ModelFormatError,
    OverflowGuard,
    SingularGram,
)
from .features import (
    PcaProjection,
    Standardizer,
    apply_pca,
    apply_standardizer,
    fit_pca,
    fit_standardizer,
)
from .gp import JacobiGpModel, fit_gp, predict_gp, predict_gp_classes, rbf_kernel
from .linalg import (
    SpdFactorization,
    gram,
    project_onto_design,
    spd_factor,
    spd_solve,
    sym_eig,
)
from .metrics_io import (
    ConfusionMatrix,
    EvalReport,
    FeatureDataset,
    evaluate,
    load_classifier,
    load_feature_csv,
    load_model,
    save_classifier,
    save_model,
    time_fit,
    write_feature_csv,
)
from .synth import (
    BiasReport,
    CltReport,
    ConsistencyReport,
    InvarianceReport,
    SyntheticSpec,
    compute_target_covariance,
    generate_onehot,
    generate_poisson_dmr,
    run_bias_check,
    run_clt,
    run_consistency,
    run_invariance_grid,
    sample_poisson,
)
