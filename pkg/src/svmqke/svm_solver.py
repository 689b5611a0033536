"""L2 soft-margin SVM through its nonnegative dual.

The dual is ``max 1'a - a'(Q + I/lam)a / 2`` over ``a >= 0`` with
``Q_ij = y_i y_j K_ij``. Because the only constraint is nonnegativity, each
coordinate has a closed-form minimiser and projected cyclic coordinate
ascent converges to the unique optimum.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path

import numpy as np

from .concepts import LabeledSample, split
from .errors import ConvergenceError, DomainError
from .feature_kernel import FeatureConfig, kernel_from_logs
from .group_arith import discrete_log_many
from .qke_sim import PREDICT_STREAM, KernelMatrix, NoisePolicy, build_kernel_matrix, noisy_rows, transform_bias

DEFAULT_LAMBDA = 0.5
TOLERANCE = 1e-8
MAX_SWEEPS = 10**6


def _gram(K) -> np.ndarray:
    if isinstance(K, KernelMatrix):
        if not K.transformed:
            raise DomainError("solve the dual on the bias-transformed kernel")
        return K.entries
    return np.asarray(K, dtype=np.float64)


def _hessian(K, labels, lam: float) -> np.ndarray:
    y = np.asarray(labels, dtype=np.float64)
    G = _gram(K)
    if G.shape != (y.size, y.size):
        raise DomainError("kernel and label sizes disagree")
    return y[:, None] * y[None, :] * G + np.eye(y.size) / lam


def dual_objective(alphas, K, labels, lam: float) -> float:
    a = np.asarray(alphas, dtype=np.float64)
    return float(a.sum() - 0.5 * a @ _hessian(K, labels, lam) @ a)


def primal_loss(alphas, K, labels, lam: float) -> float:
    """``||w||^2/2 + lam ||xi||^2/2`` with ``w`` and ``xi`` recovered from ``alphas``."""
    a = np.asarray(alphas, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    Q = y[:, None] * y[None, :] * _gram(K)
    xi = slacks_from_alphas(a, lam)
    return float(0.5 * a @ Q @ a + 0.5 * lam * xi @ xi)


def _residual(a: np.ndarray, grad: np.ndarray) -> float:
    return float(np.max(np.abs(np.minimum(grad, a * grad)))) if a.size else 0.0


def kkt_residual(alphas, K, labels, lam: float) -> float:
    """``max_i |min(g_i, a_i g_i)|`` with ``g = (Q + I/lam) a - 1``; zero only at the optimum."""
    a = np.asarray(alphas, dtype=np.float64)
    if np.any(a < 0):
        raise DomainError("alphas must be nonnegative")
    return _residual(a, _hessian(K, labels, lam) @ a - 1.0)


@dataclass
class DualSolution:
    alphas: np.ndarray
    sweeps: int
    residual: float
    objectives: list[float] = field(default_factory=list)


def solve_dual(K, labels, lam: float = DEFAULT_LAMBDA, *, alpha0=None, tol: float = TOLERANCE,
               max_sweeps: int = MAX_SWEEPS, trace: bool = False) -> DualSolution:
    """Projected cyclic coordinate ascent on the L2 dual.

    ``K`` is the transformed kernel (a :class:`KernelMatrix` or array). It
    need not be PSD; only the diagonal of ``Q + I/lam`` must be positive.
    Raises :class:`ConvergenceError` after ``max_sweeps`` sweeps.
    """
    if not lam > 0:
        raise DomainError("lambda must be positive")
    H = _hessian(K, labels, lam)
    m = H.shape[0]
    diag = np.diag(H).copy()
    if np.any(diag <= 0):
        raise DomainError("Q + I/lambda has a nonpositive diagonal entry")
    a = np.zeros(m) if alpha0 is None else np.maximum(np.asarray(alpha0, dtype=np.float64), 0.0)
    grad = H @ a - 1.0
    objectives = [float(-0.5 * a @ (grad - 1.0))] if trace else []
    residual = _residual(a, grad)
    sweeps = 0
    while residual > tol:
        if sweeps >= max_sweeps:
            raise ConvergenceError(f"no convergence after {sweeps} sweeps (residual {residual:.3e})",
                                   residual, sweeps)
        for i in range(m):
            new = a[i] - grad[i] / diag[i]
            if new < 0.0:
                new = 0.0
            step = new - a[i]
            if step != 0.0:
                a[i] = new
                grad += step * H[i]  # H is symmetric; rows are contiguous
        sweeps += 1
        # Fresh gradient so the stopping test is not fooled by accumulated drift.
        grad = H @ a - 1.0
        residual = _residual(a, grad)
        if trace:
            objectives.append(float(-0.5 * a @ (grad - 1.0)))
    return DualSolution(a, sweeps, residual, objectives)


def slacks_from_alphas(alphas, lam: float) -> np.ndarray:
    """Primal slacks ``xi = alpha / lam``."""
    return np.asarray(alphas, dtype=np.float64) / lam


@dataclass
class SvmModel:
    alphas: np.ndarray
    lam: float
    train_x: list[int]
    train_y: np.ndarray
    config: FeatureConfig
    policy: NoisePolicy
    sweeps: int = 0
    residual: float = 0.0

    def __post_init__(self):
        self.alphas = np.asarray(self.alphas, dtype=np.float64)
        self.train_y = np.asarray(self.train_y, dtype=np.int64)
        self.train_x = [int(x) for x in self.train_x]
        if np.any(self.alphas < 0):
            raise DomainError("alphas must be nonnegative")

    @cached_property
    def train_logs(self) -> np.ndarray:
        return discrete_log_many(self.train_x, self.config.params)

    @property
    def weights(self) -> np.ndarray:
        return self.alphas * self.train_y

    def to_json(self) -> dict:
        return {
            "alphas": [float(a) for a in self.alphas],
            "lambda": self.lam,
            "train": [{"x": str(x), "y": int(y)} for x, y in zip(self.train_x, self.train_y)],
            "config": self.config.to_json(),
            "policy": self.policy.to_json(),
            "solver": {"sweeps": self.sweeps, "residual": self.residual},
        }

    @classmethod
    def from_json(cls, obj: dict) -> "SvmModel":
        return cls(
            alphas=np.array(obj["alphas"], dtype=np.float64),
            lam=float(obj["lambda"]),
            train_x=[int(t["x"]) for t in obj["train"]],
            train_y=np.array([int(t["y"]) for t in obj["train"]]),
            config=FeatureConfig.from_json(obj["config"]),
            policy=NoisePolicy.from_json(obj["policy"]),
            sweeps=int(obj["solver"]["sweeps"]),
            residual=float(obj["solver"]["residual"]),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), sort_keys=True))

    @classmethod
    def load(cls, path) -> "SvmModel":
        return cls.from_json(json.loads(Path(path).read_text()))


def train(samples: list[LabeledSample], config: FeatureConfig, policy: NoisePolicy,
          lam: float = DEFAULT_LAMBDA, **solver_kw) -> SvmModel:
    """Kernel estimation, bias transform and dual solve in one call."""
    xs, ys = split(samples)
    K = transform_bias(build_kernel_matrix(xs.tolist(), config, policy))
    sol = solve_dual(K, ys, lam, **solver_kw)
    return SvmModel(sol.alphas, lam, xs.tolist(), ys, config, policy, sol.sweeps, sol.residual)


def kernel_rows(xs, model: SvmModel) -> np.ndarray:
    """Transformed kernel rows ``(K0'(x, x_i) + 1)/2`` for each ``x``, under the model's policy."""
    xs = [int(x) for x in xs]
    logs = discrete_log_many(xs, model.config.params)
    q = kernel_from_logs(logs, model.train_logs, model.config)
    q = noisy_rows(q, model.policy, xs, PREDICT_STREAM)
    return (q + 1.0) / 2.0


def decision_values(xs, model: SvmModel) -> np.ndarray:
    """``h'(x) = sum_i a_i y_i (K0'(x, x_i) + 1)/2`` for each ``x``."""
    xs = list(xs)
    if not xs:
        return np.empty(0)
    return kernel_rows(xs, model) @ model.weights


def decision_value(x: int, model: SvmModel) -> float:
    return float(decision_values([x], model)[0])


def sign(h) -> np.ndarray:
    """Sign with ``sign(0) = +1``."""
    return np.where(np.asarray(h) >= 0, 1, -1)


def predict(x: int, model: SvmModel) -> int:
    return int(sign(decision_value(x, model)))


def predict_many(xs, model: SvmModel, batch: int = 4096) -> np.ndarray:
    xs = list(xs)
    out = [sign(decision_values(xs[lo:lo + batch], model)) for lo in range(0, len(xs), batch)]
    return np.concatenate(out) if out else np.empty(0, dtype=np.int64)
