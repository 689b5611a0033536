"""Verifier/prover challenge over the concept class.

The verifier draws a hidden key, sends a labeled training set ``S`` and an
unlabeled test set ``T``, and accepts an answer only when strictly more than
99% of the returned labels are correct.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .concepts import Concept, LabeledSample, generate_dataset, labels, split
from .diagnostics import fit_classical
from .errors import DomainError
from .feature_kernel import FeatureConfig
from .group_arith import GroupParams, discrete_log_many
from .qke_sim import NoisePolicy
from .svm_solver import DEFAULT_LAMBDA, predict_many, train


@dataclass(frozen=True)
class ChallengeDataset:
    S: tuple[LabeledSample, ...]
    T: tuple[int, ...]
    hidden_s: int
    params: GroupParams
    seed: int
    test_labels: tuple[int, ...] | None = None

    @property
    def concept(self) -> Concept:
        return Concept(self.hidden_s, self.params)

    def truth(self) -> np.ndarray:
        if self.test_labels is not None:
            return np.array(self.test_labels, dtype=np.int64)
        return labels(list(self.T), self.concept)

    def prover_lines(self) -> list[str]:
        """Prover-facing JSON Lines: a header, ``S`` with labels, ``T`` without."""
        out = [json.dumps({"params": self.params.to_json(), "m": len(self.S), "m_test": len(self.T)},
                          sort_keys=True)]
        out += [json.dumps({"x": str(s.x), "y": s.y}) for s in self.S]
        out += [json.dumps({"x": str(t)}) for t in self.T]
        return out

    def write(self, prover_path, secret_path) -> None:
        Path(prover_path).write_text("\n".join(self.prover_lines()) + "\n")
        Path(secret_path).write_text(json.dumps(
            {"hidden_s": str(self.hidden_s), "seed": self.seed, "params": self.params.to_json()},
            sort_keys=True))


def read_prover_file(path) -> tuple[list[LabeledSample], list[int], GroupParams]:
    lines = [ln for ln in Path(path).read_text().splitlines() if ln.strip()]
    header = json.loads(lines[0])
    params = GroupParams.from_json(header["params"])
    S, T = [], []
    for line in lines[1:]:
        obj = json.loads(line)
        if "y" in obj:
            S.append(LabeledSample(int(obj["x"]), int(obj["y"])))
        else:
            T.append(int(obj["x"]))
    return S, T, params


def read_challenge(prover_path, secret_path) -> ChallengeDataset:
    S, T, params = read_prover_file(prover_path)
    secret = json.loads(Path(secret_path).read_text())
    if GroupParams.from_json(secret["params"]) != params:
        raise DomainError("secret file belongs to a different group")
    return ChallengeDataset(tuple(S), tuple(T), int(secret["hidden_s"]), params, int(secret["seed"]))


def make_challenge(params: GroupParams, m: int, m_test: int, seed: int) -> ChallengeDataset:
    """Uniform hidden key, ``m`` labeled samples and ``m_test`` unlabeled residues."""
    if m < 1 or m_test < 1:
        raise DomainError("challenge sizes must be at least 1")
    rng = np.random.default_rng(seed)
    s = int(rng.integers(0, params.order, dtype=np.uint64))
    concept = Concept(s, params)
    S = generate_dataset(concept, m, rng)
    test = generate_dataset(concept, m_test, rng)
    return ChallengeDataset(tuple(S), tuple(t.x for t in test), s, params, seed,
                            tuple(t.y for t in test))


def _cyclic_dist(a: np.ndarray, b: np.ndarray, order: int) -> np.ndarray:
    d = np.abs(a[:, None] - b[None, :])
    return np.minimum(d, order - d)


def prover_dlog(S: Sequence[LabeledSample], T: Sequence[int], params: GroupParams) -> np.ndarray:
    """Label each test point by the nearer cluster in mean cyclic log distance.

    Ties go to +1. If ``S`` holds a single label, every answer is that label.
    """
    xs, ys = split(S)
    logs = discrete_log_many(xs, params).astype(np.int64)
    tlogs = discrete_log_many(list(T), params).astype(np.int64)
    plus, minus = logs[ys == 1], logs[ys == -1]
    if plus.size == 0 or minus.size == 0:
        return np.full(len(T), 1 if minus.size == 0 else -1, dtype=np.int64)
    d_plus = _cyclic_dist(tlogs, plus, params.order).mean(axis=1)
    d_minus = _cyclic_dist(tlogs, minus, params.order).mean(axis=1)
    return np.where(d_plus <= d_minus, 1, -1)


def prover_svmqke(S: Sequence[LabeledSample], T: Sequence[int], config: FeatureConfig,
                  policy: NoisePolicy, lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """Train on ``S`` with the (simulated) quantum kernel and label ``T``."""
    model = train(list(S), config, policy, lam)
    return predict_many(list(T), model)


def prover_classical(S: Sequence[LabeledSample], T: Sequence[int], params: GroupParams,
                     kind: str = "rbf", lam: float = DEFAULT_LAMBDA) -> np.ndarray:
    """Classical-kernel SVM on the bit representation of the residues."""
    model = fit_classical(kind, list(S), params.n, lam)
    return model.predict(np.asarray(list(T), dtype=np.int64))


@dataclass(frozen=True)
class Verdict:
    accepted: bool
    accuracy: float
    correct: int
    total: int


def verify(prover_labels, dataset: ChallengeDataset) -> Verdict:
    """Accept iff strictly more than 99% of the labels are correct."""
    answer = np.asarray(prover_labels, dtype=np.int64)
    if answer.shape != (len(dataset.T),):
        raise DomainError(f"expected {len(dataset.T)} labels, got {answer.size}")
    correct = int(np.count_nonzero(answer == dataset.truth()))
    total = len(dataset.T)
    # exact integer comparison at the 99% boundary
    return Verdict(100 * correct > 99 * total, correct / total, correct, total)
