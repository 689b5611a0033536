"""Simulated quantum kernel estimation.

A kernel entry measured with ``R`` shots is the empirical frequency of the
all-zeros outcome, i.e. ``Binomial(R, q) / R`` for true overlap ``q``.

Randomness is split into independent streams keyed by position so results
do not depend on evaluation order: training row ``i`` draws from stream
``(seed, 0, i)`` and a prediction for residue ``x`` from ``(seed, 1, x)``.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DomainError
from .feature_kernel import FeatureConfig, kernel_from_logs
from .group_arith import discrete_log_many

EXACT_SAMPLING_LIMIT = 10**6
TRAIN_STREAM = 0
PREDICT_STREAM = 1


@dataclass(frozen=True)
class NoisePolicy:
    """``shots=None`` is the noiseless oracle; otherwise ``R = shots``."""

    shots: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.shots is not None and int(self.shots) < 1:
            raise DomainError("shot count must be at least 1")

    @classmethod
    def exact(cls) -> "NoisePolicy":
        return cls(None, 0)

    @property
    def is_exact(self) -> bool:
        return self.shots is None

    def stream(self, *key: int) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=tuple(int(k) for k in key))
        return np.random.Generator(np.random.PCG64(ss))

    def to_json(self) -> dict:
        if self.is_exact:
            return {"mode": "exact"}
        return {"mode": "shots", "R": int(self.shots), "seed": int(self.seed)}

    @classmethod
    def from_json(cls, obj: dict) -> "NoisePolicy":
        if obj["mode"] == "exact":
            return cls.exact()
        return cls(int(obj["R"]), int(obj.get("seed", 0)))


def sample_frequencies(q, shots: int, rng: np.random.Generator) -> np.ndarray:
    """``X / R`` with ``X ~ Binomial(R, q)`` elementwise.

    Above :data:`EXACT_SAMPLING_LIMIT` shots a rounded, clamped normal
    approximation replaces exact sampling; ``q`` of exactly 0 or 1 stays exact.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.size and (q.min() < 0.0 or q.max() > 1.0):
        raise DomainError("overlap probabilities must lie in [0, 1]")
    if shots <= EXACT_SAMPLING_LIMIT:
        return rng.binomial(shots, q) / shots
    z = rng.standard_normal(q.shape)
    counts = np.rint(shots * q + np.sqrt(shots * q * (1.0 - q)) * z)
    return np.clip(counts, 0, shots) / shots


def estimate_entry(q_true: float, policy: NoisePolicy, rng: np.random.Generator) -> float:
    """One kernel entry as seen through ``policy``."""
    if not 0.0 <= q_true <= 1.0:
        raise DomainError(f"overlap {q_true} outside [0, 1]")
    if policy.is_exact:
        return float(q_true)
    return float(sample_frequencies(q_true, policy.shots, rng))


@dataclass
class KernelMatrix:
    entries: np.ndarray
    policy: NoisePolicy
    transformed: bool = False
    m: int = field(init=False)

    def __post_init__(self):
        self.entries = np.asarray(self.entries, dtype=np.float64)
        if self.entries.ndim != 2 or self.entries.shape[0] != self.entries.shape[1]:
            raise DomainError("kernel matrix must be square")
        self.m = self.entries.shape[0]

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "transformed": self.transformed,
            "policy": self.policy.to_json(),
            "entries": [float(v) for v in self.entries.ravel()],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "KernelMatrix":
        m = int(obj["m"])
        entries = np.array(obj["entries"], dtype=np.float64).reshape(m, m)
        return cls(entries, NoisePolicy.from_json(obj["policy"]), bool(obj["transformed"]))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json()))

    @classmethod
    def load(cls, path) -> "KernelMatrix":
        return cls.from_json(json.loads(Path(path).read_text()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            csv.writer(fh).writerows([repr(float(v)) for v in row] for row in self.entries)


def noisy_rows(q_rows: np.ndarray, policy: NoisePolicy, keys, stream: int) -> np.ndarray:
    """Re-estimate each row of true overlaps from its own keyed stream."""
    q_rows = np.asarray(q_rows, dtype=np.float64)
    if policy.is_exact:
        return q_rows.copy()
    out = np.empty_like(q_rows)
    for r, key in enumerate(keys):
        out[r] = sample_frequencies(q_rows[r], policy.shots, policy.stream(stream, key))
    return out


def build_kernel_matrix(samples, config: FeatureConfig, policy: NoisePolicy) -> KernelMatrix:
    """Raw kernel on training residues; diagonal fixed at 1, each pair measured once."""
    samples = list(samples)
    if not samples:
        raise DomainError("need at least one sample")
    logs = discrete_log_many(samples, config.params)
    exact = kernel_from_logs(logs, logs, config)
    m = len(samples)
    K0 = np.eye(m)
    for i in range(m - 1):
        q = exact[i, i + 1:]
        if policy.is_exact:
            row = q
        else:
            row = sample_frequencies(q, policy.shots, policy.stream(TRAIN_STREAM, i))
        K0[i, i + 1:] = row
        K0[i + 1:, i] = row
    return KernelMatrix(K0, policy, transformed=False)


def transform_bias(K0: KernelMatrix) -> KernelMatrix:
    """``K = (K0 + 1) / 2``, folding the hyperplane offset into the kernel."""
    if K0.transformed:
        raise DomainError("kernel matrix is already bias-transformed")
    return KernelMatrix((K0.entries + 1.0) / 2.0, K0.policy, transformed=True)
