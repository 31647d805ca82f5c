"""Clebsch-Gordan coefficients of the fundamental representation against GT tableaux.

Two independent evaluations are provided: the direct form built from signed
q-numbers, and the factorized form sign * q^(B+C) * (product of Q-ratios).
Every function accepts one tableau (an (ell+1, ell+1) array or GTTableau) or a
batch of shape (N, ell+1, ell+1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DomainError, SingularityError, ValidationError
from .qcore import _qval, q_factor, q_number
from .tableaux import GTTableau, Move, apply_move_array, d_lambda_bruteforce, log_d_lambda_closed, rows_to_array


def _as_array(r):
    if isinstance(r, GTTableau):
        return r.array()
    if isinstance(r, (tuple, list)) and r and len(r[0]) != len(r[-1]):
        return rows_to_array(r)  # triangular rows
    return np.asarray(r, dtype=np.int64)


def _E(r, a, i):
    return r[..., a - 1, i - 1]


def _sign(x: int) -> int:
    return 1 if x >= 0 else -1


def _qnum_ratio(nums, dens, q):
    """Product of [n]_q / [d]_q, with a mask of vanishing denominators."""
    val = np.ones(np.shape(nums[0]) if nums else np.shape(dens[0]) if dens else ())
    bad = np.zeros(val.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for x in nums:
            val = val * q_number(x, q)
        for x in dens:
            bad |= x == 0
            val = val / np.where(x == 0, 1.0, q_number(x, q))
    return val, bad


def _R_args(r, a, j, k, ell):
    nums, dens = [], []
    for i in range(1, ell + 3 - a):
        if i != j:
            nums.append(_E(r, a, i) - _E(r, a + 1, k) - i + k)
            dens.append(_E(r, a, i) - _E(r, a, j) - i + j)
    for i in range(1, ell + 2 - a):
        if i != k:
            nums.append(_E(r, a + 1, i) - _E(r, a, j) - i + j - 1)
            dens.append(_E(r, a + 1, i) - _E(r, a + 1, k) - i + k - 1)
    return nums, dens


def _R_prime_args(r, a, j, ell):
    nums = [_E(r, a + 1, i) - _E(r, a, j) - i + j - 1 for i in range(1, ell + 2 - a)]
    dens = [_E(r, a, i) - _E(r, a, j) - i + j for i in range(1, ell + 3 - a) if i != j]
    return nums, dens


def _check_R(ell, a, j, k=None):
    if not 1 <= a <= ell + 1:
        raise DomainError(f"row a={a} out of range")
    if not 1 <= j <= ell + 2 - a:
        raise DomainError(f"j={j} out of range for row {a}")
    if k is not None and not (a <= ell and 1 <= k <= ell + 1 - a):
        raise DomainError(f"k={k} out of range for row {a + 1}")


def _R_direct_arr(r, a, j, k, q):
    ell = r.shape[-1] - 1
    nums, dens = _R_args(r, a, j, k, ell)
    ratio, bad = _qnum_ratio(nums, dens, q)
    expo = (-_E(r, a, j) + _E(r, a + 1, k) - k + j) / 2.0
    with np.errstate(invalid="ignore"):
        val = _sign(k - j) * q**expo * np.sqrt(ratio)
    return val, bad | (ratio < 0)


def _R_prime_direct_arr(r, a, j, q):
    ell = r.shape[-1] - 1
    nums, dens = _R_prime_args(r, a, j, ell)
    ratio, bad = _qnum_ratio(nums, dens, q)
    s1 = sum((_E(r, a + 1, i) for i in range(1, ell + 2 - a)), start=np.zeros_like(_E(r, a, 1)))
    s2 = sum((_E(r, a, i) for i in range(1, ell + 3 - a) if i != j), start=np.zeros_like(_E(r, a, 1)))
    expo = (1 - j + s1 - s2) / 2.0
    with np.errstate(invalid="ignore"):
        val = q**expo * np.sqrt(ratio)
    return val, bad | (ratio < 0)


def _scalar(val, bad, what, a=None, i=None, j=None, k=None):
    if np.any(bad):
        raise SingularityError(f"vanishing or negative q-number ratio in {what}", a=a, i=i, j=j, k=k)
    return float(val)


def R_direct(r, a: int, j: int, k: int, ctx) -> float:
    """Row factor R(r, a, j, k) evaluated literally from q-numbers."""
    r = _as_array(r)
    _check_R(r.shape[-1] - 1, a, j, k)
    val, bad = _R_direct_arr(r, a, j, k, _qval(ctx))
    return _scalar(val, bad, "R", a=a, j=j, k=k)


def R_prime_direct(r, a: int, j: int, ctx) -> float:
    r = _as_array(r)
    _check_R(r.shape[-1] - 1, a, j)
    val, bad = _R_prime_direct_arr(r, a, j, _qval(ctx))
    return _scalar(val, bad, "R'", a=a, i=a, j=j)


def _check_move(i, M, ell):
    if M.ell != ell:
        raise DomainError(f"move of rank {M.ell} used with tableau of rank {ell}")
    if M.j != i:
        raise DomainError(f"move {M} is not in M_{i}")


def cg_direct_batch(i: int, r, M: Move, ctx):
    """Direct CG values over a batch; 0 where M(r) is not a valid tableau."""
    r = _as_array(r)
    ell = r.shape[-1] - 1
    _check_move(i, M, ell)
    q = _qval(ctx)
    _, ok = apply_move_array(r, M)
    m = M.entries
    val = np.ones(r.shape[:-2])
    bad = np.zeros(r.shape[:-2], dtype=bool)
    for a in range(1, i):
        v, b = _R_direct_arr(r, a, m[a - 1], m[a], q)
        val, bad = val * v, bad | b
    v, b = _R_prime_direct_arr(r, i, m[i - 1], q)
    val, bad = val * v, bad | b
    if np.any(bad & ok):
        raise SingularityError(f"singular CG factor for valid move {M}", i=i)
    return np.where(ok, val, 0.0)


def cg_direct(i: int, r, M: Move, ctx) -> float:
    return float(cg_direct_batch(i, r, M, ctx))


# ------------------------------------------------------------ factorized

def hv(r, a, b):
    return _E(r, a + 1, b) - _E(r, a, b + 1), _E(r, a, b) - _E(r, a + 1, b)


def move_sign(M: Move) -> int:
    m = M.entries
    return int(np.prod([_sign(m[a + 1] - m[a]) for a in range(len(m) - 1)], dtype=int))


def move_B(M: Move) -> int:
    m = M.entries
    return sum(2 * (m[a] - m[a + 1] - 1) + 1 for a in range(len(m) - 1) if m[a] > m[a + 1])


def _P(r, a, j, k):
    out = np.zeros(r.shape[:-2], dtype=np.int64)
    for b in range(min(j, k), max(j, k)):
        out = out + hv(r, a, b)[0]
    for b in range(k + 1, j):
        out = out + 2 * hv(r, a, b)[1]
    return out


def _P_prime(r, a, j):
    ell = r.shape[-1] - 1
    out = np.zeros(r.shape[:-2], dtype=np.int64)
    for b in range(j, ell + 2 - a):
        out = out + hv(r, a, b)[0]
    return out


def move_C(r, M: Move):
    """C(r, M): the tableau-dependent part of the q-exponent."""
    r = _as_array(r)
    m = M.entries
    i = len(m)
    out = sum((_P(r, a, m[a - 1], m[a]) for a in range(1, i)), start=np.zeros(r.shape[:-2], dtype=np.int64))
    return out + _P_prime(r, i, m[i - 1])


def _logQ_ratio(nums, dens, q):
    lv = np.zeros(np.shape(nums[0]) if nums else np.shape(dens[0]) if dens else ())
    bad = np.zeros(lv.shape, dtype=bool)
    with np.errstate(divide="ignore", invalid="ignore"):
        for x in nums:
            lv = lv + np.log(q_factor(np.abs(x), q))
        for x in dens:
            bad |= x == 0
            lv = lv - np.log(q_factor(np.abs(x), q))
    return lv, bad


def R_factorized(r, a, j, k, ctx):
    """(sign, P+S, L) with R = sign * q^(P+S) * L."""
    r = _as_array(r)
    ell = r.shape[-1] - 1
    _check_R(ell, a, j, k)
    S = 2 * (j - k - 1) + 1 if j > k else 0
    lv, bad = _logQ_ratio(*_R_args(r, a, j, k, ell), _qval(ctx))
    if np.any(bad):
        raise SingularityError("Q(0) in a denominator", a=a, j=j, k=k)
    return _sign(k - j), _P(r, a, j, k) + S, np.exp(lv)


def R_prime_factorized(r, a, j, ctx):
    r = _as_array(r)
    ell = r.shape[-1] - 1
    _check_R(ell, a, j)
    lv, bad = _logQ_ratio(*_R_prime_args(r, a, j, ell), _qval(ctx))
    if np.any(bad):
        raise SingularityError("Q(0) in a denominator", a=a, i=a, j=j)
    return _P_prime(r, a, j), np.exp(lv)


def log_L_product(i, r, M, q):
    r = _as_array(r)
    ell = r.shape[-1] - 1
    m = M.entries
    lv = np.zeros(r.shape[:-2])
    bad = np.zeros(r.shape[:-2], dtype=bool)
    for a in range(1, i):
        x, b = _logQ_ratio(*_R_args(r, a, m[a - 1], m[a], ell), q)
        lv, bad = lv + x, bad | b
    x, b = _logQ_ratio(*_R_prime_args(r, i, m[i - 1], ell), q)
    return lv + x, bad | b


@dataclass(frozen=True)
class CGFactorization:
    sign: int
    q_exponent: Fraction
    L_product: float
    value: float


def cg_factorized_batch(i: int, r, M: Move, ctx):
    """(sign, exponent array, L array, value array); zeros where M(r) is invalid."""
    r = _as_array(r)
    ell = r.shape[-1] - 1
    _check_move(i, M, ell)
    q = _qval(ctx)
    _, ok = apply_move_array(r, M)
    lv, bad = log_L_product(i, r, M, q)
    if np.any(bad & ok):
        raise SingularityError(f"singular CG factor for valid move {M}", i=i)
    expo = move_B(M) + move_C(r, M)
    sgn = move_sign(M)
    with np.errstate(invalid="ignore", over="ignore"):
        L = np.where(ok, np.exp(lv), 0.0)
        val = np.where(ok, sgn * np.exp(expo * math.log(q) + np.where(ok, lv, 0.0)), 0.0)
    return sgn, expo, L, val


def cg_factorized(i: int, r, M: Move, ctx) -> CGFactorization:
    sgn, expo, L, val = cg_factorized_batch(i, r, M, ctx)
    if float(L) == 0.0:
        return CGFactorization(sgn, Fraction(int(expo)), 0.0, 0.0)
    return CGFactorization(sgn, Fraction(int(expo)), float(L), float(val))


def a_k_decomposition(M: Move) -> tuple:
    """(A(M), K(M)) with B(M) + ell+2-i-m_1 = A(M) + K(M)."""
    m = M.entries
    i = len(m)
    A = sum(abs(m[a] - m[a + 1]) for a in range(i - 1)) - sum(1 for a in range(i - 1) if m[a] > m[a + 1])
    K = M.ell + 2 - i - m[-1]
    return A, K


# ------------------------------------------------------------------ kappa

def kappa_exact(r, M: Move, ctx) -> float:
    """d_lam^(1/2) d_mu^(-1/2) q^(psi(r) - psi(M(r)))."""
    arr = _as_array(r)
    ell = arr.shape[-1] - 1
    new, ok = apply_move_array(arr, M)
    if not bool(ok):
        raise ValidationError(f"M(r) is not a valid tableau for M={M}")
    q = _qval(ctx)
    lam = tuple(int(x) for x in arr[0, : ell + 1])
    mu = tuple(int(x) for x in new[0, : ell + 1])
    log_ratio = 0.5 * (_log_d(lam, ell, q) - _log_d(mu, ell, q))
    # psi(r) - psi(M(r)) = ell/2 - i + 1 for every M in M_i
    two_dpsi = ell - 2 * (M.j - 1)
    return float(math.exp(log_ratio + 0.5 * two_dpsi * math.log(q)))


def _log_d(lam, ell, q):
    n, k = _nk_of(lam, ell)
    if n is not None:
        return float(log_d_lambda_closed(n, k, ell, q))
    return math.log(d_lambda_bruteforce(lam, q))


def _nk_of(lam, ell):
    k = lam[1] if ell >= 2 else None
    if ell >= 2 and all(x == k for x in lam[1:ell]) and lam[ell] == 0:
        n = lam[0] - k
        return n, k
    if ell == 1 and lam[1] == 0:
        return lam[0], 0
    return None, None


def log_kappa_nk(n, k, ell: int, q: float, plus: bool):
    """log kappa(r^{n,k}, N_{1,1}) (plus) or log kappa(r^{n,k}, N_{0,1}), elementwise."""
    ld = log_d_lambda_closed(n, k, ell, q)
    if plus:
        return 0.5 * (ld - log_d_lambda_closed(np.asarray(n) + 1, k, ell, q)) + 0.5 * ell * math.log(q)
    return 0.5 * (ld - log_d_lambda_closed(n, np.asarray(k) - 1, ell, q)) + 0.5 * ell * math.log(q)
