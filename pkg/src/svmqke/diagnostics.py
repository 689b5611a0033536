"""Empirical checks of the margin, slack, perturbation and robustness guarantees.

The ground-truth hyperplane is the halfspace state of the concept with
offset ``-delta/2``, lifted by the same bias-absorbing map the kernel uses
and scaled so that points fully inside or fully outside the halfspace have
margin exactly 1. With overlap count ``c`` between a feature interval and the
halfspace interval, the margin is ``y * (2 (c / 2**k)**2 - 1)``.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .concepts import Concept, LabeledSample, generate_dataset, label, random_residues, split
from .errors import DomainError
from .feature_kernel import FeatureConfig, _orbit, halfspace_overlap_counts, halfspace_overlap_ratio
from .group_arith import GroupParams, discrete_log_many, log_table
from .qke_sim import KernelMatrix, NoisePolicy, build_kernel_matrix, transform_bias
from .svm_solver import DEFAULT_LAMBDA, TOLERANCE, decision_values, primal_loss, sign, solve_dual, train

ALPHA_NORM_CONSTANT = 8.0


# ---------------------------------------------------------------- margins

def ground_truth_margin(x: int, y: int, concept: Concept, config: FeatureConfig) -> Fraction:
    """Unnormalised margin ``y <w*, x~>`` of a correctly labeled point."""
    if y != label(x, concept):
        raise DomainError(f"label {y} disagrees with the concept at x={x}")
    delta = config.delta_exact
    return y * (halfspace_overlap_ratio(x, concept, config) - delta / 2) * (2 / delta)


def ground_truth_margins(logs, ys, concept: Concept, config: FeatureConfig) -> np.ndarray:
    """Vectorised margins from exponents (float64)."""
    c = halfspace_overlap_counts(logs, concept, config).astype(np.float64) / config.length
    return np.asarray(ys, dtype=np.float64) * (2.0 * c * c - 1.0)


def ground_truth_norm(config: FeatureConfig) -> float:
    """``||w*|| = sqrt(8 + 2 delta^2) / delta`` with the exact delta."""
    d = float(config.delta_exact)
    return math.sqrt(8.0 + 2.0 * d * d) / d


def brute_force_ground_truth_norm(concept: Concept, config: FeatureConfig) -> float:
    """``||w*||`` from explicit amplitude vectors, for ``p <= 2^10``.

    Builds the halfspace state and the feature state of ``g**s`` (fully inside
    the halfspace) by multiplication, reads off delta as their squared
    overlap, then scales the lifted hyperplane so that point has margin 1.
    """
    params = config.params
    if params.p > 1 << 10:
        raise DomainError("brute-force norm limited to p <= 2^10")
    p, g, half = params.p, params.g, concept.half
    hs = np.zeros(p - 1)
    cur = pow(g, concept.s, p)
    for _ in range(half):
        hs[cur - 1] = 1.0
        cur = cur * g % p
    hs /= math.sqrt(half)
    inside = np.zeros(p - 1)
    inside[_orbit(pow(g, concept.s, p), config) - 1] = 1.0 / math.sqrt(config.length)
    ws_norm_sq = float(hs @ hs) ** 2  # Hilbert-Schmidt norm of a pure projector
    delta = float(hs @ inside) ** 2
    bias = -delta / 2.0
    scale = 1.0 / ((delta + bias) / math.sqrt(2.0))
    return scale * math.sqrt(ws_norm_sq + bias * bias)


def ground_truth_slacks(samples: Sequence[LabeledSample], concept: Concept,
                        config: FeatureConfig) -> np.ndarray:
    xs, ys = split(samples)
    margins = ground_truth_margins(discrete_log_many(xs, config.params), ys, concept, config)
    return np.maximum(0.0, 1.0 - margins)


def ground_truth_slack_stats(samples: Sequence[LabeledSample], concept: Concept,
                             config: FeatureConfig) -> tuple[float, float]:
    """``(||xi*||^2, 4 m delta_paper)``."""
    xi = ground_truth_slacks(samples, concept, config)
    return float(xi @ xi), 4.0 * len(samples) * float(config.delta_paper)


def ground_truth_loss(samples: Sequence[LabeledSample], concept: Concept, config: FeatureConfig,
                      lam: float = DEFAULT_LAMBDA) -> float:
    xi = ground_truth_slacks(samples, concept, config)
    return 0.5 * ground_truth_norm(config) ** 2 + 0.5 * lam * float(xi @ xi)


@dataclass
class MarginReport:
    fraction_on_margin_plus: Fraction
    fraction_zero_minus: Fraction
    violating_fraction: Fraction
    delta_exact: Fraction
    delta_paper: Fraction
    exhaustive: bool
    expected_violating: Fraction
    margins: list[float] | None = None

    def to_json(self) -> dict:
        out = {k: (str(v) if isinstance(v, Fraction) else v) for k, v in asdict(self).items()}
        out["violating_float"] = float(self.violating_fraction)
        return out


def margin_census(concept: Concept, config: FeatureConfig, *, count: int | None = None,
                  seed: int = 0, keep_margins: bool = False) -> MarginReport:
    """Classify every exponent (or ``count`` sampled ones) by halfspace overlap.

    A point is on the margin when its interval is entirely inside the
    halfspace (overlap ``delta_exact``) or entirely outside (overlap 0);
    everything else violates. Exhaustive mode checks the violating fraction
    against ``2 (2^k - 1) / (p - 1)``.
    """
    params = config.params
    order, L = params.order, config.length
    if count is None:
        if params.p > 1 << 24:
            raise DomainError("exhaustive census limited to p <= 2^24; pass count=")
        logs = np.arange(order, dtype=np.int64)
    else:
        logs = np.random.default_rng(seed).integers(0, order, size=count, dtype=np.int64)
    total = logs.size
    c = halfspace_overlap_counts(logs, concept, config)
    full = int(np.count_nonzero(c == L))
    zero = int(np.count_nonzero(c == 0))
    report = MarginReport(
        fraction_on_margin_plus=Fraction(full, total),
        fraction_zero_minus=Fraction(zero, total),
        violating_fraction=Fraction(total - full - zero, total),
        delta_exact=config.delta_exact,
        delta_paper=config.delta_paper,
        exhaustive=count is None,
        expected_violating=Fraction(2 * (L - 1), order),
    )
    if keep_margins:
        ys = concept.label_of_exponent(logs)
        report.margins = ground_truth_margins(logs, ys, concept, config).tolist()
    if report.exhaustive and report.violating_fraction != report.expected_violating:
        raise AssertionError(f"census {report.violating_fraction} != {report.expected_violating}")
    return report


# ---------------------------------------------------------------- perturbation

@dataclass
class PerturbationReport:
    eps: float
    lambda_floor: float
    alpha_delta: float
    alpha_norm: float
    bound: float
    applicable: bool

    @property
    def holds(self) -> bool:
        return not self.applicable or self.alpha_delta <= self.bound + 2 * TOLERANCE

    def to_json(self) -> dict:
        return {**asdict(self), "holds": self.holds}


def perturbation_check(K: KernelMatrix, K_noisy: KernelMatrix, labels, lam: float = DEFAULT_LAMBDA,
                       **solver_kw) -> PerturbationReport:
    """Compare dual solutions on an exact and a perturbed transformed kernel.

    The bound ``eps / (1/lam - eps) * ||alpha||`` uses ``1/lam`` as the
    eigenvalue floor of ``Q + I/lam``; it applies only when ``eps < 1/lam``.
    """
    if K.m != K_noisy.m:
        raise DomainError("kernel sizes differ")
    a = solve_dual(K, labels, lam, **solver_kw).alphas
    a2 = solve_dual(K_noisy, labels, lam, **solver_kw).alphas
    # |y_i y_j| = 1, so ||Q' - Q||_F equals ||K' - K||_F.
    eps = float(np.linalg.norm(K_noisy.entries - K.entries))
    floor = 1.0 / lam
    applicable = eps < floor
    norm = float(np.linalg.norm(a))
    bound = eps / (floor - eps) * norm if applicable else math.inf
    return PerturbationReport(eps, floor, float(np.linalg.norm(a2 - a)), norm, bound, applicable)


# ---------------------------------------------------------------- robustness

def robustness_trial(concept: Concept, m: int, shots: int | None, config: FeatureConfig, seed: int,
                     m_test: int = 500, lam: float = DEFAULT_LAMBDA) -> float:
    """``max_x |h(x) - h'(x)|`` over a test set for one paired draw."""
    rng = np.random.default_rng(seed)
    samples = generate_dataset(concept, m, rng)
    test = random_residues(concept.params, m_test, rng)
    exact = train(samples, config, NoisePolicy.exact(), lam)
    noisy = train(samples, config, NoisePolicy(shots, seed), lam) if shots is not None else exact
    h = decision_values(test, exact)
    h2 = decision_values(test, noisy)
    return float(np.max(np.abs(h - h2)))


def noise_robustness_experiment(concept: Concept, m: int, shots: int | None, config: FeatureConfig,
                                seeds: Iterable[int], m_test: int = 500,
                                lam: float = DEFAULT_LAMBDA) -> list[float]:
    """Per-seed maximum deviation between the noiseless and shot-noise classifiers.

    Each seed fixes one training set and test set shared by both arms, and
    seeds the measurement noise of the noisy arm. ``shots=None`` means both
    arms are exact.
    """
    return [robustness_trial(concept, m, shots, config, s, m_test, lam) for s in seeds]


def alpha_norm_metric(alphas, config: FeatureConfig, m: int) -> dict:
    """``||alpha||^2`` next to the logged reference ``C (1/delta^2 + m delta)``."""
    d = float(config.delta_paper)
    return {"alpha_norm_sq": float(np.dot(alphas, alphas)),
            "reference": ALPHA_NORM_CONSTANT * (1.0 / d ** 2 + m * d)}


# ---------------------------------------------------------------- classical baselines

def binary_features(xs, n: int) -> np.ndarray:
    """``n``-bit binary expansion of each residue, scaled to unit norm."""
    xs = np.asarray(xs, dtype=np.int64)
    bits = ((xs[:, None] >> np.arange(n, dtype=np.int64)[None, :]) & 1).astype(np.float64)
    return bits / np.linalg.norm(bits, axis=1, keepdims=True)


def _sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    d = (A * A).sum(1)[:, None] + (B * B).sum(1)[None, :] - 2.0 * A @ B.T
    return np.maximum(d, 0.0)


def classical_kernel(kind: str, A: np.ndarray, B: np.ndarray, gamma: float = 1.0) -> np.ndarray:
    """Raw classical kernel on unit-norm features; every kind has unit diagonal."""
    if kind == "linear":
        return A @ B.T
    if kind == "rbf":
        return np.exp(-gamma * _sq_dists(A, B))
    if kind == "poly":
        return ((A @ B.T + 1.0) / 2.0) ** 3
    raise DomainError(f"unknown classical kernel {kind!r}")


@dataclass
class ClassicalModel:
    kind: str
    n: int
    features: np.ndarray
    weights: np.ndarray
    gamma: float = 1.0

    def decision_values(self, xs) -> np.ndarray:
        F = binary_features(xs, self.n)
        return ((classical_kernel(self.kind, F, self.features, self.gamma) + 1.0) / 2.0) @ self.weights

    def predict(self, xs, batch: int = 8192) -> np.ndarray:
        xs = np.asarray(xs)
        return np.concatenate([sign(self.decision_values(xs[lo:lo + batch]))
                               for lo in range(0, xs.size, batch)])


def fit_classical(kind: str, samples: Sequence[LabeledSample], n: int,
                  lam: float = DEFAULT_LAMBDA) -> ClassicalModel:
    """Same bias-absorbed L2 dual, with a classical kernel on bit vectors.

    The rbf bandwidth follows the median heuristic ``gamma = 1 / median d^2``.
    """
    xs, ys = split(samples)
    F = binary_features(xs, n)
    gamma = 1.0
    if kind == "rbf":
        d = _sq_dists(F, F)[np.triu_indices(len(xs), 1)]
        med = float(np.median(d)) if d.size else 1.0
        gamma = 1.0 / med if med > 0 else 1.0
    K = (classical_kernel(kind, F, F, gamma) + 1.0) / 2.0
    sol = solve_dual(K, ys, lam)
    return ClassicalModel(kind, n, F, sol.alphas * ys, gamma)


def classical_baseline_accuracy(kind: str, samples: Sequence[LabeledSample], concept: Concept,
                                test=None, lam: float = DEFAULT_LAMBDA) -> float:
    """Accuracy of a classical-kernel SVM against ``concept``.

    ``test=None`` scores exhaustively over all of Z_p^*; otherwise ``test``
    is a list of residues.
    """
    params = concept.params
    model = fit_classical(kind, samples, params.n, lam)
    if test is None:
        xs = np.arange(1, params.p, dtype=np.int64)
        truth = concept.label_of_exponent(log_table(params)[1:])
    else:
        xs = np.asarray(test, dtype=np.int64)
        truth = concept.label_of_exponent(discrete_log_many(xs, params))
    return float(np.mean(model.predict(xs) == truth))


def control_accuracy(kind: str, params: GroupParams, m: int, seed: int, m_test: int = 1000,
                     lam: float = DEFAULT_LAMBDA) -> float:
    """Harness sanity check on a bit-separable task (label = parity of ``x``)."""
    rng = np.random.default_rng(seed)
    xs = np.asarray(random_residues(params, m + m_test, rng), dtype=np.int64)
    ys = np.where(xs & 1, 1, -1)
    samples = [LabeledSample(int(x), int(y)) for x, y in zip(xs[:m], ys[:m])]
    model = fit_classical(kind, samples, params.n, lam)
    return float(np.mean(model.predict(xs[m:]) == ys[m:]))


def exact_kernel_instance(concept: Concept, config: FeatureConfig, m: int, seed: int):
    """A seeded training set with its exact transformed kernel and labels."""
    rng = np.random.default_rng(seed)
    samples = generate_dataset(concept, m, rng)
    xs, ys = split(samples)
    K = transform_bias(build_kernel_matrix(xs.tolist(), config, NoisePolicy.exact()))
    return samples, K, ys


def loss_comparison(concept: Concept, config: FeatureConfig, m: int, seed: int,
                    lam: float = DEFAULT_LAMBDA) -> tuple[float, float]:
    """``(Loss(w0), Loss(w*))`` on one seeded instance; the first never exceeds the second."""
    samples, K, ys = exact_kernel_instance(concept, config, m, seed)
    a = solve_dual(K, ys, lam).alphas
    return primal_loss(a, K, ys, lam), ground_truth_loss(samples, concept, config, lam)
