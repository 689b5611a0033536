"""Desk-scale simulation of SVM learning with an interval-state quantum kernel
on the discrete-log concept class."""

from .concepts import Concept, LabeledSample, exact_accuracy, generate_dataset, generate_sample, label
from .errors import ConvergenceError, DomainError
from .feature_kernel import (
    ExponentInterval,
    FeatureConfig,
    brute_force_kernel,
    cyclic_overlap,
    decide_dlp_promise,
    halfspace_overlap,
    interval_of,
    kernel_exact,
)
from .group_arith import GroupParams, discrete_log, is_generator, mod_pow, random_group
from .qke_sim import KernelMatrix, NoisePolicy, build_kernel_matrix, estimate_entry, transform_bias
from .svm_solver import SvmModel, decision_value, kkt_residual, predict, slacks_from_alphas, solve_dual, train

__version__ = "0.1.0"

__all__ = [
    "Concept",
    "ConvergenceError",
    "DomainError",
    "ExponentInterval",
    "FeatureConfig",
    "GroupParams",
    "KernelMatrix",
    "LabeledSample",
    "NoisePolicy",
    "SvmModel",
    "brute_force_kernel",
    "build_kernel_matrix",
    "cyclic_overlap",
    "decide_dlp_promise",
    "decision_value",
    "discrete_log",
    "estimate_entry",
    "exact_accuracy",
    "generate_dataset",
    "generate_sample",
    "halfspace_overlap",
    "interval_of",
    "is_generator",
    "kernel_exact",
    "kkt_residual",
    "label",
    "mod_pow",
    "predict",
    "random_group",
    "slacks_from_alphas",
    "solve_dual",
    "train",
    "transform_bias",
]
