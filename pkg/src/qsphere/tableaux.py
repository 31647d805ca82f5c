"""Gelfand-Tsetlin tableaux, moves, quantum dimensions and the sphere basis labels.

Indices in public functions and error messages are 1-based (row i, column j).
Internally a tableau of rank ell is stored as an (ell+1, ell+1) integer array
whose row a (0-based) uses its first ell+1-a slots; the rest are padding.
Batches of tableaux are arrays of shape (..., ell+1, ell+1).
"""
from __future__ import annotations

import itertools
import json
import math
import warnings
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError, SizeError, UnsupportedRankError, ValidationError
from .qcore import QContext, _qval


def _rank(ctx) -> int:
    return ctx.ell if isinstance(ctx, QContext) else int(ctx)


# ---------------------------------------------------------------- tableaux

@dataclass(frozen=True)
class GTTableau:
    ell: int
    rows: tuple

    @property
    def top(self) -> tuple:
        return self.rows[0]

    def entry(self, i: int, j: int) -> int:
        return self.rows[i - 1][j - 1]

    def array(self) -> np.ndarray:
        return rows_to_array(self.rows)

    def to_json(self) -> str:
        return json.dumps({"ell": self.ell, "rows": [list(r) for r in self.rows]})

    @classmethod
    def from_json(cls, text: str) -> "GTTableau":
        d = json.loads(text)
        t = validate_tableau(d["rows"])
        if t.ell != d.get("ell", t.ell):
            raise ValidationError(f"ell={d['ell']} does not match a pattern with {len(d['rows'])} rows")
        return t


def rows_to_array(rows) -> np.ndarray:
    ell = len(rows) - 1
    arr = np.zeros((ell + 1, ell + 1), dtype=np.int64)
    for a, row in enumerate(rows):
        arr[a, : len(row)] = row
    return arr


def array_to_rows(arr) -> tuple:
    ell = arr.shape[-1] - 1
    return tuple(tuple(int(x) for x in arr[a, : ell + 1 - a]) for a in range(ell + 1))


def _check_shape(rows):
    ell = len(rows) - 1
    if ell < 0:
        raise ValidationError("empty pattern")
    for a, row in enumerate(rows):
        if len(row) != ell + 1 - a:
            raise ValidationError(f"row {a + 1} has {len(row)} entries, expected {ell + 1 - a}")
    return ell


def validate_tableau(rows) -> GTTableau:
    rows = tuple(tuple(int(x) for x in r) for r in rows)
    ell = _check_shape(rows)
    for a in range(ell + 1):
        for b, x in enumerate(rows[a]):
            if x < 0:
                raise ValidationError(f"negative entry at (i,j)=({a + 1},{b + 1})")
    for a in range(ell):
        for b in range(ell - a):
            if not rows[a][b] >= rows[a + 1][b] >= rows[a][b + 1]:
                raise ValidationError(f"interlacing fails at (i,j)=({a + 1},{b + 1})")
    if rows[0][ell] != 0:
        raise ValidationError(f"top-right entry (1,{ell + 1}) must be 0, got {rows[0][ell]}")
    return GTTableau(ell, rows)


def valid_mask(arr: np.ndarray) -> np.ndarray:
    """Interlacing, nonnegativity and zero top-right corner, for a batch."""
    ell = arr.shape[-1] - 1
    ok = arr[..., 0, ell] == 0
    for a in range(ell):
        for b in range(ell - a):
            ok &= arr[..., a, b] >= arr[..., a + 1, b]
            ok &= arr[..., a + 1, b] >= arr[..., a, b + 1]
    ok &= arr[..., ell, 0] >= 0
    return ok


def r_nk(n: int, k: int, ell: int) -> GTTableau:
    """Top row (n+k, k, ..., k, 0) and every lower entry equal to k."""
    top = (n + k,) + (k,) * (ell - 1) + (0,) if ell >= 1 else (0,)
    rows = (top,) + tuple((k,) * (ell + 1 - a) for a in range(1, ell + 1))
    return GTTableau(ell, rows)


def lambda_nk(n: int, k: int, ell: int) -> tuple:
    return r_nk(n, k, ell).top


def zero_tableau(ell: int) -> GTTableau:
    return GTTableau(ell, tuple((0,) * (ell + 1 - a) for a in range(ell + 1)))


def two_psi_array(arr: np.ndarray) -> np.ndarray:
    ell = arr.shape[-1] - 1
    top = arr[..., 0, :].sum(axis=-1)
    rest = arr[..., 1:, :].sum(axis=(-1, -2))
    return -ell * top + 2 * rest


def psi(r: GTTableau) -> Fraction:
    """-(ell/2) * (sum of the top row) + (sum of all lower rows)."""
    top = sum(r.rows[0])
    rest = sum(sum(row) for row in r.rows[1:])
    return Fraction(-r.ell * top, 2) + rest


def hv_differences(r: GTTableau, a: int, b: int) -> tuple:
    """(H_ab, V_ab) = (r_{a+1,b} - r_{a,b+1}, r_ab - r_{a+1,b}), 1-based."""
    ell = r.ell
    if not (1 <= a <= ell and 1 <= b <= ell + 1 - a):
        raise IndexError(f"(a,b)=({a},{b}) out of range for ell={ell}")
    H = r.entry(a + 1, b) - r.entry(a, b + 1)
    V = r.entry(a, b) - r.entry(a + 1, b)
    return H, V


def gt_weight(arr: np.ndarray) -> np.ndarray:
    """Weight vector (R_1-R_2, ..., R_ell-R_{ell+1}, R_{ell+1}) from row sums R."""
    R = arr.sum(axis=-1)
    out = R.copy()
    out[..., :-1] = R[..., :-1] - R[..., 1:]
    return out


# ------------------------------------------------------------------- moves

@dataclass(frozen=True)
class Move:
    ell: int
    entries: tuple

    def __post_init__(self):
        for i, m in enumerate(self.entries, start=1):
            if not 1 <= m <= self.ell + 2 - i:
                raise DomainError(f"m_{i}={m} outside 1..{self.ell + 2 - i}")
        if not 1 <= len(self.entries) <= self.ell + 1:
            raise DomainError(f"move length {len(self.entries)} outside 1..{self.ell + 1}")

    @property
    def j(self) -> int:
        return len(self.entries)

    def __str__(self):
        return "(" + ",".join(map(str, self.entries)) + ")"


def _check_level(j, ell):
    if not 1 <= j <= ell + 1:
        raise DomainError(f"level j={j} outside 1..{ell + 1}")


def enumerate_moves(j: int, ctx) -> list:
    """All of M_j in lexicographic order; |M_j| = prod_{i<=j} (ell+2-i)."""
    ell = _rank(ctx)
    _check_level(j, ell)
    ranges = [range(1, ell + 3 - i) for i in range(1, j + 1)]
    return [Move(ell, m) for m in itertools.product(*ranges)]


def _boundary_moves(j, ell, first):
    _check_level(j, ell)
    ranges = [[first]] + [sorted({1, ell + 2 - i}) for i in range(2, j + 1)]
    return [Move(ell, m) for m in itertools.product(*ranges)]


def moves_plus(j: int, ctx) -> list:
    return _boundary_moves(j, _rank(ctx), 1)


def moves_minus(j: int, ctx) -> list:
    ell = _rank(ctx)
    return _boundary_moves(j, ell, ell + 1)


def special_move(i: int, j: int, ctx) -> Move:
    """N_{i,j}: ones in the first i slots, then m_p = ell+2-p."""
    ell = _rank(ctx)
    _check_level(j, ell)
    return Move(ell, tuple(1 if p <= i else ell + 2 - p for p in range(1, j + 1)))


def apply_move_array(arr: np.ndarray, M: Move):
    """Increment entry m_a of row a for a=1..j over a batch.

    When the top-right entry becomes 1 every entry is lowered by 1, which is
    the same irreducible representation of SU(ell+1). Returns (new, valid).
    """
    ell = arr.shape[-1] - 1
    if M.ell != ell:
        raise DomainError(f"move of rank {M.ell} applied to tableau of rank {ell}")
    new = arr.copy()
    for a, m in enumerate(M.entries):
        new[..., a, m - 1] += 1
    if M.entries[0] == ell + 1:
        mask = np.zeros((ell + 1, ell + 1), dtype=np.int64)
        for a in range(ell + 1):
            mask[a, : ell + 1 - a] = 1
        new = new - mask
    return new, valid_mask(new)


def apply_move(r: GTTableau, M: Move):
    if M.ell != r.ell:
        raise DomainError(f"move of rank {M.ell} applied to tableau of rank {r.ell}")
    new, ok = apply_move_array(r.array(), M)
    return GTTableau(r.ell, array_to_rows(new)) if bool(ok) else None


# ----------------------------------------------------- quantum dimensions

def _next_rows(row):
    return itertools.product(*[range(row[b + 1], row[b] + 1) for b in range(len(row) - 1)])


def iter_patterns(top):
    """All GT patterns with the given top row, lexicographic on rows."""
    top = tuple(top)

    def rec(rows):
        last = rows[-1]
        if len(last) == 1:
            yield rows
            return
        for nxt in _next_rows(last):
            yield from rec(rows + (nxt,))

    yield from rec((top,))


@lru_cache(maxsize=None)
def count_patterns(row: tuple) -> int:
    if len(row) == 1:
        return 1
    return sum(count_patterns(nxt) for nxt in _next_rows(row))


def _check_top(lam):
    lam = tuple(int(x) for x in lam)
    if any(lam[i] < lam[i + 1] for i in range(len(lam) - 1)) or lam[-1] != 0:
        raise DomainError(f"top row {lam} must be weakly decreasing and end in 0")
    return lam


@lru_cache(maxsize=256)
def _psi_histogram(lam: tuple) -> tuple:
    ell = len(lam) - 1
    top_part = -ell * sum(lam)
    hist = Counter()
    for rows in iter_patterns(lam):
        hist[top_part + 2 * sum(sum(r) for r in rows[1:])] += 1
    return tuple(sorted(hist.items()))


def d_lambda_bruteforce(lam, ctx, max_patterns: int = 20_000_000) -> float:
    """Sum of q^(2 psi) over every pattern with top row lam."""
    lam = _check_top(lam)
    size = count_patterns(lam)
    if size > max_patterns:
        raise SizeError(f"{size} patterns exceed the enumeration limit {max_patterns}")
    if size > 1_000_000:
        warnings.warn(f"enumerating {size} GT patterns", stacklevel=2)
    q = _qval(ctx)
    return math.fsum(c * q**tp for tp, c in _psi_histogram(lam))


def log_d_lambda_closed(n, k, ell: int, q: float):
    """log d_lambda for lambda = (n+k, k, ..., k, 0); elementwise over arrays."""
    from .qcore import q_factor

    n = np.asarray(n)
    k = np.asarray(k)
    lq = -ell * (n + k) * math.log(q)
    for i in range(1, ell):
        lq = lq + 2 * (np.log(q_factor(n + i, q)) + np.log(q_factor(k + i, q)) - 2 * math.log(q_factor(i, q)))
    lq = lq + 2 * (np.log(q_factor(n + k + ell, q)) - math.log(q_factor(ell, q)))
    return lq


def d_lambda_closed(n: int, k: int, ctx) -> float:
    q = _qval(ctx)
    if q <= 0:
        raise DomainError("closed form needs q in (0, 1)")
    if n < 0 or k < 0:
        raise DomainError("n, k must be nonnegative")
    return float(np.exp(log_d_lambda_closed(n, k, ctx.ell, q)))


# ------------------------------------------------------ sphere basis labels

@dataclass(frozen=True)
class SphereBasisLabel:
    n: int
    k: int
    s: GTTableau


def _need_rank2(ell):
    if ell < 2:
        raise UnsupportedRankError("sphere basis labels are only supported for ell >= 2")


def gammas_to_labels(G: np.ndarray):
    """Batch version of gamma_to_label: G has shape (N, 2ell+1)."""
    G = np.asarray(G, dtype=np.int64)
    ell = (G.shape[-1] - 1) // 2
    _need_rank2(ell)
    t = G[..., ell]
    tp, tm = np.maximum(t, 0), np.maximum(-t, 0)
    head = G[..., :ell].sum(axis=-1)
    k = head + tp
    n = tm + G[..., ell + 1:].sum(axis=-1)
    absg = np.abs(G)
    S = np.zeros(G.shape[:-1] + (ell + 1, ell + 1), dtype=np.int64)
    for m in range(1, ell + 1):
        c_m = absg[..., : 2 * ell + 2 - m].sum(axis=-1)
        d_m = G[..., : m - 1].sum(axis=-1)
        length = ell + 2 - m
        S[..., m - 1, 0] = c_m
        S[..., m - 1, 1 : length - 1] = k[..., None]
        S[..., m - 1, length - 1] = d_m
    S[..., ell, 0] = head + tm
    return n, k, S


def labels_to_gammas(n, k, S):
    """Batch inverse of gammas_to_labels (no validation)."""
    ell = S.shape[-1] - 1
    _need_rank2(ell)
    k = np.asarray(k)
    c = [S[..., m - 1, 0] for m in range(1, ell + 1)]
    d = [S[..., m - 1, ell + 1 - m] for m in range(1, ell + 1)] + [S[..., ell, 0]]
    G = np.zeros(S.shape[:-2] + (2 * ell + 1,), dtype=np.int64)
    for i in range(1, ell):
        G[..., i - 1] = d[i] - d[i - 1]
    upper = k > d[ell]
    G[..., ell - 1] = np.where(upper, d[ell] - d[ell - 1], k - d[ell - 1])
    G[..., ell] = k - d[ell]
    G[..., ell + 1] = np.where(upper, c[ell - 1] - k, c[ell - 1] - d[ell])
    for i in range(ell + 3, 2 * ell + 2):
        G[..., i - 1] = c[2 * ell + 2 - i - 1] - c[2 * ell + 3 - i - 1]
    return G


def gamma_to_label(gamma) -> SphereBasisLabel:
    g = np.asarray(gamma, dtype=np.int64)
    if g.ndim != 1 or len(g) % 2 != 1:
        raise DomainError("gamma must have odd length 2*ell+1")
    ell = (len(g) - 1) // 2
    if np.any(np.delete(g, ell) < 0):
        raise DomainError("only the middle coordinate of gamma may be negative")
    n, k, S = gammas_to_labels(g[None, :])
    return SphereBasisLabel(int(n[0]), int(k[0]), GTTableau(ell, array_to_rows(S[0])))


def check_label(label: SphereBasisLabel) -> None:
    s = validate_tableau(label.s.rows)
    ell = s.ell
    _need_rank2(ell)
    n, k = label.n, label.k
    if n < 0 or k < 0:
        raise ValidationError("n and k must be nonnegative")
    if s.top != lambda_nk(n, k, ell):
        raise ValidationError(f"top row {s.top} is not lambda_(n,k) for n={n}, k={k}")
    # interlacing below a lambda_(n,k) top row pins every middle entry to k
    for a in range(1, ell - 1):
        if any(x != k for x in s.rows[a][1:-1]):
            raise ValidationError(f"row {a + 1} middle entries must equal k={k}")


def label_to_gamma(label: SphereBasisLabel) -> tuple:
    check_label(label)
    G = labels_to_gammas(np.array([label.n]), np.array([label.k]), label.s.array()[None])
    return tuple(int(x) for x in G[0])


def eta(gamma) -> int:
    """Sign exponent sum_{i<=ell} (i-1) gamma_i + ell * (gamma_{ell+1})_+."""
    g = list(gamma)
    ell = (len(g) - 1) // 2
    return sum(i * g[i] for i in range(ell)) + ell * max(g[ell], 0)


def eta_array(G: np.ndarray) -> np.ndarray:
    ell = (G.shape[-1] - 1) // 2
    w = np.arange(ell)
    return (G[..., :ell] * w).sum(axis=-1) + ell * np.maximum(G[..., ell], 0)
