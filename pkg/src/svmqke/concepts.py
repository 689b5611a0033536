"""The discrete-log concept class and dataset generation.

A concept with key ``s`` labels ``x`` with +1 when ``log_g x`` lies in the
cyclic exponent interval ``{s, s+1, ..., s + (p-3)/2} mod (p-1)``, which
holds exactly half of the group.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable

import numpy as np

from .errors import DomainError
from .group_arith import GroupParams, discrete_log, discrete_log_many, log_table

ENUMERATION_LIMIT = 1 << 24


@dataclass(frozen=True)
class Concept:
    s: int
    params: GroupParams

    def __post_init__(self):
        if not 0 <= self.s <= self.params.order - 1:
            raise DomainError(f"key s={self.s} outside [0, {self.params.order - 1}]")

    @property
    def half(self) -> int:
        return self.params.order // 2

    def label_of_exponent(self, e):
        """Label for an exponent (scalar or array) without taking a log."""
        order, half = self.params.order, self.half
        if isinstance(e, (int, np.integer)):
            return 1 if (int(e) - self.s) % order < half else -1
        arr = np.asarray(e)
        if arr.dtype == object or order >= 1 << 62:
            return np.array([1 if (int(v) - self.s) % order < half else -1 for v in arr.ravel()],
                            dtype=np.int64).reshape(arr.shape)
        return np.where((arr.astype(np.int64) - self.s) % order < half, 1, -1)


@dataclass(frozen=True)
class LabeledSample:
    x: int
    y: int


def label(x: int, concept: Concept) -> int:
    """``f_s(x)``; uses the discrete-log oracle."""
    return concept.label_of_exponent(discrete_log(x, concept.params))


def labels(xs, concept: Concept) -> np.ndarray:
    """Vectorised :func:`label`."""
    return concept.label_of_exponent(discrete_log_many(xs, concept.params))


def generate_sample(concept: Concept, rng: np.random.Generator) -> LabeledSample:
    """Draw a uniform exponent and return ``(g**e, label)``; no log needed."""
    params = concept.params
    e = int(rng.integers(0, params.order, dtype=np.uint64))
    return LabeledSample(pow(params.g, e, params.p), concept.label_of_exponent(e))


def generate_dataset(concept: Concept, m: int, rng: np.random.Generator) -> list[LabeledSample]:
    """``m`` i.i.d. labeled samples, drawn with replacement."""
    if m < 1:
        raise DomainError("dataset size must be at least 1")
    params = concept.params
    exps = rng.integers(0, params.order, size=m, dtype=np.uint64)
    return [LabeledSample(pow(params.g, int(e), params.p), concept.label_of_exponent(int(e)))
            for e in exps]


def random_residues(params: GroupParams, count: int, rng: np.random.Generator) -> list[int]:
    """``count`` uniform residues of Z_p^* (unlabeled)."""
    exps = rng.integers(1, params.p, size=count, dtype=np.uint64)
    return [int(v) for v in exps]


def split(samples: Iterable[LabeledSample]) -> tuple[np.ndarray, np.ndarray]:
    """Residues and labels of a sample list as arrays."""
    samples = list(samples)
    wide = any(s.x >= 1 << 62 for s in samples)
    xs = np.array([s.x for s in samples], dtype=object if wide else np.int64)
    ys = np.array([s.y for s in samples], dtype=np.int64)
    return xs, ys


def exact_accuracy(classifier: Callable, concept: Concept, *, batch: int | None = None) -> float:
    """Fraction of all of Z_p^* on which ``classifier`` agrees with the concept.

    With ``batch`` set, ``classifier`` is called on arrays of up to ``batch``
    residues and must return an array of labels.
    """
    params = concept.params
    if params.p > ENUMERATION_LIMIT:
        raise DomainError("p too large to enumerate; use sampled_accuracy")
    truth = concept.label_of_exponent(log_table(params)[1:])
    xs = np.arange(1, params.p, dtype=np.int64)
    correct = 0
    if batch is None:
        for x, y in zip(xs.tolist(), truth.tolist()):
            correct += classifier(x) == y
    else:
        for lo in range(0, xs.size, batch):
            pred = np.asarray(classifier(xs[lo:lo + batch]))
            correct += int(np.count_nonzero(pred == truth[lo:lo + batch]))
    return correct / params.order


def sampled_accuracy(classifier: Callable, concept: Concept, count: int, seed: int) -> float:
    """Monte Carlo accuracy on ``count`` fresh uniform samples."""
    rng = np.random.default_rng(seed)
    samples = generate_dataset(concept, count, rng)
    return sum(classifier(s.x) == s.y for s in samples) / count


def write_dataset(path, samples: Iterable[LabeledSample], params: GroupParams, seed: int, **extra) -> None:
    """JSON Lines: a header with the group and seed, then one sample per line."""
    header = {"params": params.to_json(), "seed": seed, **extra}
    with open(path, "w") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for s in samples:
            fh.write(json.dumps({"x": str(s.x), "y": s.y}) + "\n")


def read_dataset(path) -> tuple[list[LabeledSample], GroupParams, dict]:
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise DomainError(f"{path}: empty dataset file")
    header = json.loads(lines[0])
    params = GroupParams.from_json(header["params"])
    samples = []
    for line in lines[1:]:
        if line.strip():
            obj = json.loads(line)
            samples.append(LabeledSample(int(obj["x"]), int(obj["y"])))
    return samples, params, header
