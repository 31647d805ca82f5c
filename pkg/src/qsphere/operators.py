"""Truncated Hilbert spaces over the lattice Gamma_A and sparse real operators on them.

The coordinates of Sigma = {1, ..., 2 ell + 1} are 1-based; coordinate ell+1 is the
Z-valued one, all others are N-valued. A truncated space keeps every gamma_A with
|gamma_i| <= cutoff and orders the basis lexicographically (itertools.product order,
with the Z-coordinate running from -cutoff to cutoff).
"""
from __future__ import annotations

import csv
import io

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import svds

from .errors import DomainError
from .qcore import QContext


class TruncatedSpace:
    def __init__(self, ctx: QContext, index_set=None):
        self.ctx = ctx
        ell = ctx.ell
        if index_set is None:
            index_set = tuple(range(1, 2 * ell + 2))
        index_set = tuple(sorted(index_set))
        if not index_set or index_set[0] < 1 or index_set[-1] > 2 * ell + 1 or len(set(index_set)) != len(index_set):
            raise DomainError(f"index set {index_set} is not a subset of 1..{2 * ell + 1}")
        self.index_set = index_set
        self.ell = ell
        self.cutoff = c = ctx.cutoff
        self.lo = np.array([-c if i == ell + 1 else 0 for i in index_set], dtype=np.int64)
        self.hi = np.full(len(index_set), c, dtype=np.int64)
        sizes = self.hi - self.lo + 1
        self.strides = np.ones(len(index_set), dtype=np.int64)
        for p in range(len(index_set) - 2, -1, -1):
            self.strides[p] = self.strides[p + 1] * sizes[p + 1]
        self.dim = int(np.prod(sizes))
        grids = np.meshgrid(*[np.arange(l, h + 1) for l, h in zip(self.lo, self.hi)], indexing="ij")
        self.basis = np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)

    @classmethod
    def torus(cls, ctx: QContext):
        """Index set Sigma_ell = {1, ..., ell+1}."""
        return cls(ctx, tuple(range(1, ctx.ell + 2)))

    @classmethod
    def full(cls, ctx: QContext):
        return cls(ctx, tuple(range(1, 2 * ctx.ell + 2)))

    def pos(self, coord: int) -> int:
        """Column of the basis array holding 1-based coordinate coord."""
        try:
            return self.index_set.index(coord)
        except ValueError:
            raise IndexError(f"coordinate {coord} not in index set {self.index_set}") from None

    def is_z(self, coord: int) -> bool:
        return coord == self.ell + 1

    def index_of(self, G) -> np.ndarray:
        """Basis positions of the rows of G, -1 where G leaves the truncation."""
        G = np.asarray(G, dtype=np.int64)
        inside = np.all((G >= self.lo) & (G <= self.hi), axis=-1)
        idx = ((G - self.lo) * self.strides).sum(axis=-1)
        return np.where(inside, idx, -1)

    def interior_mask(self, margin: int) -> np.ndarray:
        return np.all(np.abs(self.basis) <= self.cutoff - margin, axis=1)

    def abs_degree(self) -> np.ndarray:
        return np.abs(self.basis).sum(axis=1)

    def same_as(self, other) -> bool:
        return self.index_set == other.index_set and self.cutoff == other.cutoff and self.ell == other.ell

    def gamma_str(self, idx) -> str:
        return ",".join(str(int(x)) for x in self.basis[idx])

    def __repr__(self):
        return f"TruncatedSpace(ell={self.ell}, index_set={self.index_set}, cutoff={self.cutoff}, dim={self.dim})"


class SparseOperator:
    """Real finite matrix on a truncated space, stored as CSR (rows = images)."""

    def __init__(self, space: TruncatedSpace, matrix):
        self.space = space
        m = sp.csr_matrix(matrix, dtype=float)
        if m.shape != (space.dim, space.dim):
            raise DomainError(f"matrix shape {m.shape} does not match dim {space.dim}")
        m.sum_duplicates()
        m.eliminate_zeros()
        self.matrix = m

    @classmethod
    def from_map(cls, space, targets, values, columns=None):
        """Operator sending e_(basis[col]) to sum values * e_(target)."""
        if columns is None:
            columns = np.arange(space.dim)
        rows = space.index_of(targets)
        values = np.broadcast_to(np.asarray(values, dtype=float), rows.shape)
        keep = (rows >= 0) & (values != 0)
        m = sp.coo_matrix((values[keep], (rows[keep], np.asarray(columns)[keep])), shape=(space.dim, space.dim))
        return cls(space, m)

    @classmethod
    def diagonal(cls, space, values):
        return cls(space, sp.diags(np.asarray(values, dtype=float)))

    @classmethod
    def identity(cls, space):
        return cls.diagonal(space, np.ones(space.dim))

    @classmethod
    def zero(cls, space):
        return cls(space, sp.csr_matrix((space.dim, space.dim)))

    def _check(self, other):
        if not self.space.same_as(other.space):
            raise DomainError("operators live on different spaces")

    def __add__(self, other):
        self._check(other)
        return SparseOperator(self.space, self.matrix + other.matrix)

    def __sub__(self, other):
        self._check(other)
        return SparseOperator(self.space, self.matrix - other.matrix)

    def __neg__(self):
        return SparseOperator(self.space, -self.matrix)

    def __mul__(self, c):
        return SparseOperator(self.space, self.matrix * float(c))

    __rmul__ = __mul__

    def __matmul__(self, other):
        self._check(other)
        return SparseOperator(self.space, self.matrix @ other.matrix)

    def adjoint(self):
        return SparseOperator(self.space, self.matrix.T)

    @property
    def T(self):
        return self.adjoint()

    @property
    def nnz(self) -> int:
        return self.matrix.nnz

    def diag(self) -> np.ndarray:
        return self.matrix.diagonal()

    def is_diagonal(self) -> bool:
        m = self.matrix.tocoo()
        return bool(np.all(m.row == m.col))

    def entry(self, row_gamma, col_gamma) -> float:
        i = int(self.space.index_of(np.asarray(row_gamma)[None])[0])
        j = int(self.space.index_of(np.asarray(col_gamma)[None])[0])
        if i < 0 or j < 0:
            raise IndexError("gamma outside the truncation")
        return float(self.matrix[i, j])

    def triplets(self):
        """(row index, column index, value) sorted by column then row."""
        m = self.matrix.tocoo()
        order = np.lexsort((m.row, m.col))
        return m.row[order], m.col[order], m.data[order]

    def compress(self, margin: int):
        """P T P with P the interior projector of the given margin."""
        return InteriorProjector(self.space, margin).apply(self)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.matrix.data))) if self.matrix.nnz else 0.0

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(["row_gamma", "col_gamma", "value"])
        for i, j, v in zip(*self.triplets()):
            w.writerow([self.space.gamma_str(i), self.space.gamma_str(j), repr(float(v))])
        return buf.getvalue()


class InteriorProjector:
    """Diagonal 0/1 projection onto basis vectors with every |gamma_i| <= cutoff - margin."""

    def __init__(self, space: TruncatedSpace, margin: int):
        if margin < 0:
            raise DomainError("margin must be nonnegative")
        self.space = space
        self.margin = margin
        self.mask = space.interior_mask(margin)

    def operator(self) -> SparseOperator:
        return SparseOperator.diagonal(self.space, self.mask.astype(float))

    def apply(self, T: SparseOperator) -> SparseOperator:
        d = sp.diags(self.mask.astype(float))
        return SparseOperator(T.space, d @ T.matrix @ d)


# ------------------------------------------------------------ building blocks

def shift_op(space: TruncatedSpace, coord: int) -> SparseOperator:
    """S e_n = e_(n-1) on the given coordinate; S e_0 = 0 on N-coordinates."""
    p = space.pos(coord)
    G = space.basis.copy()
    G[:, p] -= 1
    if not space.is_z(coord):
        G[space.basis[:, p] == 0, p] = -10**9
    return SparseOperator.from_map(space, G, 1.0)


def number_op(space: TruncatedSpace, coord: int) -> SparseOperator:
    return SparseOperator.diagonal(space, space.basis[:, space.pos(coord)])


def projection_op(space: TruncatedSpace, coord: int, k: int) -> SparseOperator:
    p = space.pos(coord)
    if abs(k) > space.cutoff or (k < 0 and not space.is_z(coord)):
        raise IndexError(f"k={k} outside the truncation of coordinate {coord}")
    return SparseOperator.diagonal(space, (space.basis[:, p] == k).astype(float))


def dirac_torus(space: TruncatedSpace):
    """(D_ell, |D_ell|, F_ell) on the index set Sigma_ell."""
    ell = space.ell
    if space.index_set != tuple(range(1, ell + 2)):
        raise DomainError(f"torus Dirac operator needs index set 1..{ell + 1}, got {space.index_set}")
    absd = np.abs(space.basis).sum(axis=1)
    sign = np.where(space.basis[:, ell] < 0, -1.0, 1.0)
    return (SparseOperator.diagonal(space, sign * absd), SparseOperator.diagonal(space, absd),
            SparseOperator.diagonal(space, sign))


def _deq_from_labels(G):
    from .tableaux import gammas_to_labels

    n, k, _ = gammas_to_labels(G)
    return np.where(n == 0, k, -(n + k))


def _deq_from_decomposition(G, ell):
    head = np.abs(G[:, : ell + 1]).sum(axis=1)
    tail = G[:, ell + 1:].sum(axis=1)
    d_torus = np.where(G[:, ell] < 0, -head, head)
    return np.where(tail == 0, d_torus, -head - tail)


def dirac_equivariant(space: TruncatedSpace):
    """(D_eq, |D_eq|, F_eq) on the full index set, built two ways and cross-checked."""
    from .errors import ConsistencyError

    ell = space.ell
    if space.index_set != tuple(range(1, 2 * ell + 2)):
        raise DomainError("equivariant Dirac operator needs the full index set")
    d1 = _deq_from_labels(space.basis)
    d2 = _deq_from_decomposition(space.basis, ell)
    if not np.array_equal(d1, d2):
        bad = int(np.flatnonzero(d1 != d2)[0])
        raise ConsistencyError(f"D_eq constructions disagree at gamma=({space.gamma_str(bad)})")
    sign = np.where(d1 < 0, -1.0, 1.0)
    return (SparseOperator.diagonal(space, d1), SparseOperator.diagonal(space, np.abs(d1)),
            SparseOperator.diagonal(space, sign))


def commutator(A: SparseOperator, B: SparseOperator) -> SparseOperator:
    return A @ B - B @ A


def op_norm(T: SparseOperator, rtol: float = 1e-10) -> float:
    """Largest singular value: exact for diagonals and small spaces, Lanczos otherwise."""
    if T.nnz == 0:
        return 0.0
    m = T.matrix
    coo = m.tocoo()
    if len(np.unique(coo.row)) == coo.nnz and len(np.unique(coo.col)) == coo.nnz:
        # weighted partial permutation (diagonals included): norm is the largest entry
        return float(np.max(np.abs(coo.data)))
    live = np.union1d(np.unique(coo.row), np.unique(coo.col))
    sub = m[live][:, live]
    if sub.shape[0] <= 3000:
        return float(np.linalg.norm(sub.toarray(), 2))
    v0 = np.ones(sub.shape[0]) / np.sqrt(sub.shape[0])
    return float(svds(sub, k=1, tol=rtol, v0=v0, return_singular_vectors=False)[0])


def d_prime(D_abs: SparseOperator) -> np.ndarray:
    """Diagonal of |D|' = |D| + projection onto the kernel."""
    d = D_abs.diag().copy()
    d[d == 0] = 1.0
    return d


def smoothing_seminorm(T: SparseOperator, r: int, s: int, D_abs: SparseOperator) -> float:
    """|| |D|'^r T |D|'^s || on the truncation."""
    d = d_prime(D_abs)
    m = sp.diags(d**r) @ T.matrix @ sp.diags(d**s)
    return op_norm(SparseOperator(T.space, m))
