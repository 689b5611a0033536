"""Modular arithmetic over the multiplicative group Z_p^*.

Exponents use the convention ``log_g(1) = 0`` and live in ``[0, p - 2]``.
The discrete logarithm is computed with baby-step giant-step, which is the
classical stand-in for Shor's algorithm at the prime sizes handled here.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import DomainError

MAX_BITS = 64
# Products of two residues must fit in uint64 for the vectorised paths.
_VECTOR_LIMIT = 1 << 32
_TABLE_LIMIT = 1 << 24

# Deterministic Miller-Rabin witness set, valid for every n < 3.3e24.
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin test for ``n < 2**64``."""
    if n < 2:
        return False
    for q in _MR_BASES:
        if n % q == 0:
            return n == q
    d, r = n - 1, 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _pollard_brent(n: int) -> int:
    if n % 2 == 0:
        return 2
    rng = random.Random(n)
    while True:
        y, c, m = rng.randrange(1, n), rng.randrange(1, n), 128
        g = r = q = 1
        while g == 1:
            x = y
            for _ in range(r):
                y = (y * y + c) % n
            k = 0
            while k < r and g == 1:
                ys = y
                for _ in range(min(m, r - k)):
                    y = (y * y + c) % n
                    q = q * abs(x - y) % n
                g = math.gcd(q, n)
                k += m
            r *= 2
        if g == n:
            g = 1
            while g == 1:
                ys = (ys * ys + c) % n
                g = math.gcd(abs(x - ys), n)
        if g != n:
            return g


@lru_cache(maxsize=256)
def prime_factors(n: int) -> tuple[int, ...]:
    """Distinct prime factors of ``n``, ascending.

    Trial division by small primes, then Pollard-Brent on the cofactor so
    that 64-bit group orders factor quickly.
    """
    if n < 1:
        raise DomainError(f"cannot factor {n}")
    found: set[int] = set()
    q = 2
    while q < 1 << 12 and q * q <= n:
        if n % q == 0:
            found.add(q)
            while n % q == 0:
                n //= q
        q += 1 if q == 2 else 2
    stack = [n] if n > 1 else []
    while stack:
        m = stack.pop()
        if is_prime(m):
            found.add(m)
            continue
        d = _pollard_brent(m)
        stack.extend((d, m // d))
    return tuple(sorted(found))


@dataclass(frozen=True)
class GroupParams:
    """A prime ``p`` and a generator ``g`` of Z_p^*.

    Construction validates both, so every instance is a usable group.
    """

    p: int
    g: int
    order: int = field(init=False)
    n: int = field(init=False)

    def __post_init__(self):
        p, g = int(self.p), int(self.g)
        if p.bit_length() > MAX_BITS:
            raise DomainError(f"p exceeds the {MAX_BITS}-bit word size")
        if p < 5 or not is_prime(p):
            raise DomainError(f"p={p} is not an odd prime >= 5")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "order", p - 1)
        # ceil(log2 p); p is odd, so never an exact power of two.
        object.__setattr__(self, "n", p.bit_length())
        if not 2 <= g <= p - 1 or not is_generator(g, p):
            raise DomainError(f"g={g} does not generate Z_{p}^*")

    def to_json(self) -> dict:
        return {"p": str(self.p), "g": str(self.g)}

    @classmethod
    def from_json(cls, obj: dict) -> "GroupParams":
        return cls(int(obj["p"]), int(obj["g"]))


def _check_residue(x: int, p: int, what: str = "residue") -> int:
    x = int(x)
    if not 1 <= x <= p - 1:
        raise DomainError(f"{what} {x} outside [1, {p - 1}]")
    return x


def mod_pow(base: int, exp: int, params: GroupParams) -> int:
    """``base**exp mod p`` for a residue ``base`` in ``[1, p-1]``."""
    base = _check_residue(base, params.p, "base")
    if exp < 0:
        raise DomainError("exponent must be nonnegative")
    return pow(base, int(exp), params.p)


def is_generator(g: int, p: int, factors: tuple[int, ...] | None = None) -> bool:
    """True iff ``g`` has multiplicative order exactly ``p - 1``.

    ``factors`` are the distinct primes dividing ``p - 1``; computed when
    omitted.
    """
    if not is_prime(p):
        raise DomainError(f"p={p} is not prime")
    g = int(g) % p
    if g == 0:
        return False
    if factors is None:
        factors = prime_factors(p - 1)
    return all(pow(g, (p - 1) // q, p) != 1 for q in factors)


def discrete_log(y: int, params: GroupParams) -> int:
    """Baby-step giant-step: the ``e`` in ``[0, p-2]`` with ``g**e == y``."""
    p, order = params.p, params.order
    y = _check_residue(y, p)
    step = math.isqrt(order - 1) + 1
    baby = {}
    cur = 1
    for j in range(step):
        baby.setdefault(cur, j)
        cur = cur * params.g % p
    giant = pow(params.g, order - step, p)  # g^(-step)
    gamma = y
    for i in range(step):
        j = baby.get(gamma)
        if j is not None:
            return (i * step + j) % order
        gamma = gamma * giant % p
    raise AssertionError("generator invariant violated")  # pragma: no cover


def power_table(params: GroupParams) -> np.ndarray:
    """``table[e] = g**e mod p`` for every exponent, by repeated multiplication."""
    p = params.p
    if p > _TABLE_LIMIT:
        raise DomainError(f"p={p} too large to tabulate (limit 2^24)")
    block = math.isqrt(params.order) + 1
    head = np.empty(block, dtype=np.uint64)
    cur = 1
    for j in range(block):
        head[j] = cur
        cur = cur * params.g % p
    stride = cur  # g^block
    nblocks = -(-params.order // block)
    out = np.empty(nblocks * block, dtype=np.uint64)
    row = head
    for b in range(nblocks):
        out[b * block:(b + 1) * block] = row
        row = row * np.uint64(stride) % np.uint64(p)
    return out[:params.order]


def log_table(params: GroupParams) -> np.ndarray:
    """``table[x] = log_g x`` for ``x`` in ``[1, p-1]`` (index 0 unused)."""
    powers = power_table(params)
    logs = np.zeros(params.p, dtype=np.int64)
    logs[powers.astype(np.int64)] = np.arange(params.order, dtype=np.int64)
    return logs


def discrete_log_many(ys, params: GroupParams) -> np.ndarray:
    """Discrete logs of an array of residues, as ``int64`` (or object for p >= 2^32).

    Batched baby-step giant-step sharing one baby-step table; large batches
    at small ``p`` use a full log table instead.
    """
    p, order = params.p, params.order
    if p >= _VECTOR_LIMIT:
        return np.array([discrete_log(int(y), params) for y in ys], dtype=object)
    arr = np.asarray(ys, dtype=np.int64).ravel()
    if arr.size and (arr.min() < 1 or arr.max() > p - 1):
        raise DomainError(f"residues outside [1, {p - 1}]")
    if arr.size == 0:
        return arr.copy()
    if p <= _TABLE_LIMIT and arr.size * 64 >= p:
        return log_table(params)[arr]

    step = math.isqrt(order - 1) + 1
    baby = np.empty(step, dtype=np.uint64)
    cur = 1
    for j in range(step):
        baby[j] = cur
        cur = cur * params.g % p
    order_idx = np.argsort(baby, kind="stable")
    baby_sorted = baby[order_idx]
    giant = np.uint64(pow(params.g, order - step, p))
    pu = np.uint64(p)

    out = np.full(arr.size, -1, dtype=np.int64)
    pending = np.arange(arr.size)
    gamma = arr.astype(np.uint64)
    for i in range(step):
        pos = np.searchsorted(baby_sorted, gamma)
        pos = np.minimum(pos, step - 1)
        hit = baby_sorted[pos] == gamma
        if hit.any():
            out[pending[hit]] = (i * step + order_idx[pos[hit]]) % order
            pending, gamma = pending[~hit], gamma[~hit]
            if pending.size == 0:
                break
        gamma = gamma * giant % pu
    return out


def random_group(bits: int, seed: int) -> GroupParams:
    """A random ``bits``-bit prime with a random generator, reproducible from ``seed``."""
    if not 3 <= bits <= MAX_BITS:
        raise DomainError(f"bits must lie in [3, {MAX_BITS}], got {bits}")
    rng = random.Random(seed)
    lo, hi = 1 << (bits - 1), 1 << bits
    while True:
        p = rng.randrange(lo, hi) | 1
        if p >= 5 and is_prime(p):
            break
    factors = prime_factors(p - 1)
    while True:
        g = rng.randrange(2, p)
        if is_generator(g, p, factors):
            return GroupParams(p, g)
