"""Independent reference implementations used only by the tests.

Everything here is deliberately naive (power tables come from repeated
multiplication and overlaps from set intersection) and the dual QP goes
through scipy's NNLS. None of it imports the package under test.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.linalg import cholesky, solve_triangular
from scipy.optimize import nnls


@lru_cache(maxsize=None)
def power_table(p: int, g: int) -> tuple[int, ...]:
    out, cur = [], 1
    for _ in range(p - 1):
        out.append(cur)
        cur = cur * g % p
    return tuple(out)


@lru_cache(maxsize=None)
def log_dict(p: int, g: int) -> dict[int, int]:
    return {x: e for e, x in enumerate(power_table(p, g))}


def multiplicative_order(g: int, p: int) -> int:
    cur, k = g % p, 1
    while cur != 1:
        cur = cur * g % p
        k += 1
    return k


def naive_is_prime(n: int) -> bool:
    if n < 2:
        return False
    d = 2
    while d * d <= n:
        if n % d == 0:
            return False
        d += 1
    return True


def arc(start: int, length: int, order: int) -> set[int]:
    return {(start + j) % order for j in range(length)}


def set_kernel(x1: int, x2: int, p: int, g: int, k: int) -> Fraction:
    lg, L = log_dict(p, g), 1 << k
    c = len(arc(lg[x1], L, p - 1) & arc(lg[x2], L, p - 1))
    return Fraction(c, L) ** 2


def set_halfspace(x: int, s: int, p: int, g: int, k: int) -> Fraction:
    lg, L, N = log_dict(p, g), 1 << k, p - 1
    c = len(arc(lg[x], L, N) & arc(s, N // 2, N))
    return Fraction(c * c, (N // 2) * L)


def set_label(x: int, s: int, p: int, g: int) -> int:
    N = p - 1
    return 1 if log_dict(p, g)[x] in arc(s, N // 2, N) else -1


def nnls_dual(K, y, lam: float) -> np.ndarray:
    """Minimise ``a'Ha/2 - 1'a`` over ``a >= 0`` as a nonnegative least-squares problem.

    With ``H = U'U`` the objective equals ``||U a - U^{-T} 1||^2 / 2`` up to a constant.
    """
    y = np.asarray(y, dtype=float)
    H = y[:, None] * y[None, :] * np.asarray(K, dtype=float) + np.eye(y.size) / lam
    U = cholesky(H)
    b = solve_triangular(U, np.ones(y.size), trans="T")
    a, _ = nnls(U, b, maxiter=50 * y.size)
    return a
