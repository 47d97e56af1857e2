"""Unsupervised tissue classification: Otsu, Bayesian MAP and smoothed Bayesian."""
from .bayes import (
    GaussianMixtureModel,
    Priors,
    bayes_posteriors,
    class_likelihoods,
    classify_bayes,
    em_refine,
    init_model_from_otsu,
    map_label,
    posterior,
    priors_from_counts,
)
from .cli import apply_merge_map
from .evaluation import (
    ConfusionMatrix,
    Phantom,
    class_fractions,
    confusion,
    dice,
    dice_scores,
    make_phantom,
    metrics_csv,
)
from .otsu import (
    ClassSplit,
    GlobalStats,
    OtsuResult,
    apply_thresholds,
    between_class_variance,
    global_stats,
    multi_otsu,
    otsu_threshold,
    separability,
    split_statistics,
)
from .raster import (
    DegenerateInputError,
    GrayImage,
    Histogram,
    LabelMap,
    MembershipImage,
    PGMFormatError,
    compute_histogram,
    load_label_pgm,
    load_pgm,
    save_label_pgm,
    save_pgm,
)
from .smoothing import (
    Kernel1D,
    classify_bayes_smoothed,
    convolve_separable,
    gaussian_kernel,
    smooth_memberships,
)

__version__ = "0.1.0"
