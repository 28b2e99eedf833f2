"""Coherent states built from dual pairs of discrete and continuous distributions."""

__version__ = "0.1.0"

from ._backend import BACKEND
from .bayeslab import ExperimentConfig, PosteriorSummary, point_estimate, posterior_summary, simulate
from .cstates import (
    CSLabel,
    CoherentState,
    KernelEvaluator,
    cs_from_continuous,
    cs_from_discrete,
    cs_nonlinear,
    kernel_eval,
    kernel_reproducing_check,
    l2_kernel,
    monomial_kernel,
    overlap,
    prob_extract,
)
from .distfam import (
    ContinuousFamily,
    DiscreteFamily,
    DualityCertificate,
    PriorMeasure,
    certify,
    check_convergence,
    compute_cn,
    expectation_Lambda,
    expectation_Y,
    posterior_density,
)
from .matrixcs import (
    MixtureDistribution,
    NormalMatrixLabel,
    TensorCSLabel,
    haar_unitary,
    joint_prob,
    matrix_kernel,
    matrix_orthogonality_mc,
    mixture_pmf,
    partial_trace_prob,
    tensor_cs,
    vcs_build,
)
from .roi import RadialMeasure, gram_matrix, moment_check, psi_normalization_check, roi_check_direct
from .seqcore import (
    FactorialSequence,
    SeriesTruncation,
    generalized_log_factorial,
    normalization,
    radius_of_convergence,
)
