"""Interval-state feature map and its exact kernel.

The feature state of ``x`` is the uniform superposition over
``{x * g**i : 0 <= i < 2**k}``. In exponent space that set is the cyclic
interval ``[log x, log x + 2**k - 1]`` mod ``p - 1``, so every inner product
reduces to counting the intersection of two cyclic intervals.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .concepts import Concept
from .errors import DomainError
from .group_arith import GroupParams, discrete_log, discrete_log_many

BRUTE_FORCE_LIMIT = 1 << 14
PROMISE_THRESHOLD = Fraction(1, 32)


def k_from_t(n: int, t: float) -> int:
    """Interval exponent ``k = n - ceil(t * log2 n)``."""
    return n - math.ceil(t * math.log2(n))


def k_for_sample_size(n: int, m: int) -> int:
    """``k`` under ``t = c/3`` where ``m = n**c``."""
    c = math.log(m) / math.log(n)
    return k_from_t(n, c / 3)


@dataclass(frozen=True)
class FeatureConfig:
    k: int
    params: GroupParams
    length: int = field(init=False)

    def __post_init__(self):
        k, n = int(self.k), self.params.n
        if not 1 <= k <= n - 1:
            raise DomainError(f"k={k} outside [1, {n - 1}]")
        if 2 ** (k + 1) >= self.params.order:
            raise DomainError(f"k={k} too large: need 2^(k+1) < p-1 = {self.params.order}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "length", 1 << k)

    @property
    def delta_exact(self) -> Fraction:
        """Halfspace overlap of a fully contained interval, ``2^(k+1)/(p-1)``."""
        return Fraction(2 * self.length, self.params.order)

    @property
    def delta_paper(self) -> Fraction:
        """Asymptotic margin scale ``2^(k+1)/p``."""
        return Fraction(2 * self.length, self.params.p)

    def to_json(self) -> dict:
        return {"k": self.k, "params": self.params.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "FeatureConfig":
        return cls(int(obj["k"]), GroupParams.from_json(obj["params"]))


@dataclass(frozen=True)
class ExponentInterval:
    """Cyclic residue interval ``{start, ..., start + length - 1}`` mod ``order``."""

    start: int
    length: int
    order: int

    def __post_init__(self):
        if self.length < 2 or self.length & (self.length - 1):
            raise DomainError(f"length {self.length} is not a power of two >= 2")
        if self.length >= self.order:
            raise DomainError("interval must be shorter than the group order")
        object.__setattr__(self, "start", int(self.start) % self.order)

    def residues(self) -> set[int]:
        return {(self.start + i) % self.order for i in range(self.length)}


def _arc_overlap(start_a, len_a, start_b, len_b, order):
    """Size of the intersection of two cyclic arcs (scalars or broadcastable arrays).

    Shifts ``a`` to start at 0; ``b`` then splits into at most two linear arcs.
    """
    if isinstance(start_a, int) and isinstance(start_b, int):
        d = (start_b - start_a) % order
        first = max(0, min(len_a, d + len_b, order) - d)
        second = max(0, min(len_a, d + len_b - order))
        return first + second
    d = np.mod(np.subtract(start_b, start_a, dtype=np.int64), order)
    end = np.minimum(d + len_b, order)
    first = np.maximum(0, np.minimum(len_a, end) - d)
    second = np.maximum(0, np.minimum(len_a, d + len_b - order))
    return first + second


def interval_of(x: int, config: FeatureConfig) -> ExponentInterval:
    """Exponent interval of the feature state of ``x``."""
    return ExponentInterval(discrete_log(x, config.params), config.length, config.params.order)


def cyclic_overlap(a: ExponentInterval, b: ExponentInterval, order: int) -> int:
    """Number of residues shared by two cyclic intervals."""
    if a.order != order or b.order != order:
        raise DomainError("intervals live over different group orders")
    return _arc_overlap(a.start, a.length, b.start, b.length, order)


def kernel_exact_ratio(x1: int, x2: int, config: FeatureConfig) -> Fraction:
    """``|<phi(x1)|phi(x2)>|^2`` as an exact rational."""
    order = config.params.order
    ov = cyclic_overlap(interval_of(x1, config), interval_of(x2, config), order)
    return Fraction(ov, config.length) ** 2


def kernel_exact(x1: int, x2: int, config: FeatureConfig) -> float:
    return float(kernel_exact_ratio(x1, x2, config))


def overlap_matrix(logs_a, logs_b, config: FeatureConfig) -> np.ndarray:
    """Integer interval overlaps for every pair of exponents in ``logs_a x logs_b``."""
    a = np.asarray(logs_a, dtype=np.int64)[:, None]
    b = np.asarray(logs_b, dtype=np.int64)[None, :]
    L = config.length
    return _arc_overlap(a, L, b, L, config.params.order)


def kernel_from_logs(logs_a, logs_b, config: FeatureConfig) -> np.ndarray:
    """Exact raw kernel block from exponents (float64; entries are dyadic rationals)."""
    ov = overlap_matrix(logs_a, logs_b, config).astype(np.float64)
    return (ov / config.length) ** 2


def kernel_block(xs_a, xs_b, config: FeatureConfig) -> np.ndarray:
    """Exact raw kernel block between two residue lists."""
    params = config.params
    return kernel_from_logs(discrete_log_many(xs_a, params), discrete_log_many(xs_b, params), config)


def halfspace_overlap_ratio(x: int, concept: Concept, config: FeatureConfig) -> Fraction:
    """``|<phi_s|phi(x)>|^2`` for the halfspace state of ``concept``."""
    params = config.params
    ov = _arc_overlap(concept.s, concept.half, discrete_log(x, params), config.length, params.order)
    return Fraction(ov * ov, concept.half * config.length)


def halfspace_overlap(x: int, concept: Concept, config: FeatureConfig) -> float:
    return float(halfspace_overlap_ratio(x, concept, config))


def halfspace_overlap_counts(logs, concept: Concept, config: FeatureConfig) -> np.ndarray:
    """Vectorised integer overlap between feature intervals and the halfspace interval."""
    logs = np.asarray(logs, dtype=np.int64)
    return _arc_overlap(concept.s, concept.half, logs, config.length, config.params.order)


def _orbit(x: int, config: FeatureConfig) -> np.ndarray:
    """Residues ``x * g**i`` for ``i < 2**k``, by repeated multiplication."""
    p, g = config.params.p, config.params.g
    out = np.empty(config.length, dtype=np.int64)
    cur = x % p
    for i in range(config.length):
        out[i] = cur
        cur = cur * g % p
    return out


def _require_small(config: FeatureConfig) -> None:
    if config.params.p > BRUTE_FORCE_LIMIT:
        raise DomainError(f"brute force refused above p = 2^14 (p={config.params.p})")


def brute_force_kernel(x1: int, x2: int, config: FeatureConfig) -> float:
    """Squared inner product of explicitly built amplitude vectors.

    Independent of the discrete log: the residue sets come from direct
    multiplication.
    """
    _require_small(config)
    p = config.params.p
    for x in (x1, x2):
        if not 1 <= x <= p - 1:
            raise DomainError(f"residue {x} outside [1, {p - 1}]")
    amp = 1.0 / math.sqrt(config.length)
    v1 = np.zeros(p - 1)
    v2 = np.zeros(p - 1)
    v1[_orbit(x1, config) - 1] = amp
    v2[_orbit(x2, config) - 1] = amp
    return float(np.dot(v1, v2) ** 2)


def brute_force_overlaps(xs, config: FeatureConfig) -> np.ndarray:
    """Integer Gram matrix of 0/1 residue indicator vectors for ``xs``.

    ``(counts / 2**k) ** 2`` is the exact kernel, so integer equality with
    :func:`overlap_matrix` is equality of the rational kernels.
    """
    _require_small(config)
    xs = list(xs)
    ind = np.zeros((len(xs), config.params.p - 1), dtype=np.int64)
    for row, x in enumerate(xs):
        ind[row, _orbit(int(x), config) - 1] = 1
    return ind @ ind.T


def promise_config(params: GroupParams) -> FeatureConfig:
    """Feature configuration with ``k = n - 3`` used by the promise reduction."""
    if params.order // 16 < 1:
        raise DomainError(f"p={params.p} too small: the promise intervals are empty")
    return FeatureConfig(params.n - 3, params)


def promise_exponents(params: GroupParams) -> tuple[range, range]:
    """Exponents satisfying the promise: the first sixteenth of each half."""
    c = params.order // 16
    if c < 1:
        raise DomainError(f"p={params.p} too small: the promise intervals are empty")
    half = params.order // 2
    return range(1, c + 1), range(half + 1, half + c + 1)


def promise_kernel_value(y: int, params: GroupParams) -> Fraction:
    """``K_0(y, g**((p+1)/2))`` at ``k = n - 3``."""
    config = promise_config(params)
    ref = pow(params.g, (params.p + 1) // 2, params.p)
    return kernel_exact_ratio(y, ref, config)


def decide_dlp_promise(y: int, params: GroupParams, threshold=PROMISE_THRESHOLD) -> int:
    """Decide which promise half ``log_g y`` is in, using only a kernel value.

    -1 for the low interval (kernel 0), +1 for the interval just past the
    midpoint (kernel at least 1/16). Inputs outside the promise get an
    arbitrary answer.
    """
    return -1 if promise_kernel_value(y, params) < threshold else 1
