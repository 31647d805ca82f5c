"""Torus-equivariant triple: generators Y_{j,q}, sphere relations, smooth canonical forms."""
from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConsistencyError, DomainError
from .operators import SparseOperator, TruncatedSpace, commutator, projection_op
from .qcore import QContext, q_factor


def build_Y(j: int, ctx: QContext, space: TruncatedSpace | None = None, offset: int = 0) -> SparseOperator:
    """Generator Y_{j,q} of rank ell - offset acting on coordinates offset+1 .. ell+1.

    Coordinates before offset+1 are left untouched, so offset=1 gives I (x) Y^{(ell-1)}_j.
    """
    if space is None:
        space = TruncatedSpace.torus(ctx)
    rank = space.ell - offset
    if rank < 0:
        raise DomainError(f"offset {offset} exceeds rank {space.ell}")
    if not 1 <= j <= rank + 1:
        raise DomainError(f"generator index j={j} outside 1..{rank + 1}")
    q = ctx.q
    B = space.basis
    vals = np.ones(space.dim)
    for c in range(offset + 1, offset + j):
        vals = vals * float(q) ** B[:, space.pos(c)]
    c = offset + j
    p = space.pos(c)
    if j <= rank:
        vals = vals * q_factor(B[:, p] + 1, q)
    G = B.copy()
    G[:, p] += 1
    return SparseOperator.from_map(space, G, vals)


def torus_generators(ctx: QContext, space: TruncatedSpace | None = None):
    if space is None:
        space = TruncatedSpace.torus(ctx)
    return [build_Y(j, ctx, space) for j in range(1, ctx.ell + 2)]


def relation_defects(ops, ctx: QContext, margin: int = 2):
    """Dictionary name -> compressed defect operator for the four sphere relation families."""
    q = ctx.q
    n = len(ops)
    out = {}
    for i in range(n):
        for j in range(n):
            if j < i:
                out[f"z{i + 1}z{j + 1}-q z{j + 1}z{i + 1}"] = ops[i] @ ops[j] - q * (ops[j] @ ops[i])
            if i != j:
                out[f"z{i + 1}*z{j + 1}-q z{j + 1}z{i + 1}*"] = ops[i].T @ ops[j] - q * (ops[j] @ ops[i].T)
    for i in range(n):
        d = ops[i] @ ops[i].T - ops[i].T @ ops[i]
        for k in range(i + 1, n):
            d = d + (1 - q * q) * (ops[k] @ ops[k].T)
        out[f"commutation defect {i + 1}"] = d
    total = SparseOperator.identity(ops[0].space) * -1.0
    for z in ops:
        total = total + z @ z.T
    out["sum z z* - 1"] = total
    return {k: v.compress(margin) for k, v in out.items()}


def verify_sphere_relations(ops, ctx: QContext, margin: int = 2) -> float:
    """Largest absolute entry of any relation defect on the interior."""
    return max(d.max_abs() for d in relation_defects(ops, ctx, margin).values())


def _zpow(space, n):
    """z^n on the Z-coordinate (z = right shift)."""
    zc = space.ell + 1
    G = space.basis.copy()
    G[:, space.pos(zc)] += n
    return SparseOperator.from_map(space, G, 1.0)


def _sign_z(space):
    zc = space.ell + 1
    return SparseOperator.diagonal(space, np.where(space.basis[:, space.pos(zc)] < 0, -1.0, 1.0))


def f0_commutator_structure(n: int, space: TruncatedSpace) -> SparseOperator:
    """[F_0, z^n] computed directly and checked against its finite-rank form."""
    if abs(n) > space.cutoff // 2:
        raise DomainError(f"|n| must be at most cutoff/2 = {space.cutoff // 2}")
    F = _sign_z(space)
    zc = space.ell + 1
    direct = commutator(F, _zpow(space, n))
    m = abs(n)
    zm = _zpow(space, m)
    form = SparseOperator.zero(space)
    for k in range(m):
        form = form + 2.0 * (projection_op(space, zc, k) @ zm @ projection_op(space, zc, k - m))
    if n < 0:
        form = -form.T
    diff = (direct - form).max_abs()
    if diff != 0.0:
        raise ConsistencyError(f"[F0, z^{n}] differs from its finite-rank form by {diff}")
    if n != 0:
        neg = commutator(F, _zpow(space, -m))
        pos = commutator(F, zm)
        if (neg.T + pos).max_abs() != 0.0:
            raise ConsistencyError("adjoint relation for [F0, z^n] failed")
    return direct


def degree_zero_part(T: SparseOperator) -> SparseOperator:
    return SparseOperator.diagonal(T.space, T.diag())


# ------------------------------------------------------------ canonical elements

@dataclass
class CanonicalElement:
    """Finite element of the smooth algebra in its recursive canonical form.

    ell=0: sum lam[k] z^k.
    ell>=1: sum_{j,k} a1*^j (p0 (x) blocks[(j,k)]) a1^k + sum_{k>=0} lam[k] a1^k + sum_{k>0} lam[-k] a1*^k,
    with a1 the left shift on the first coordinate.
    """

    ell: int
    lam: dict = field(default_factory=dict)
    blocks: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.ell < 0:
            raise DomainError("rank must be nonnegative")
        if self.ell == 0 and self.blocks:
            raise DomainError("rank 0 elements have no corner blocks")
        for (j, k), b in self.blocks.items():
            if j < 0 or k < 0:
                raise DomainError("block indices must be nonnegative")
            if b.ell != self.ell - 1:
                raise DomainError(f"block ({j},{k}) has rank {b.ell}, expected {self.ell - 1}")

    @classmethod
    def unit(cls, ell):
        return cls(ell, {0: 1.0})

    @classmethod
    def random(cls, ell, K=2, rng=None, decay=0.5):
        rng = np.random.default_rng(rng)
        lam = {k: float(rng.normal() * decay ** abs(k)) for k in range(-K, K + 1) if rng.random() < 0.7}
        blocks = {}
        if ell > 0:
            for j in range(K + 1):
                for k in range(K + 1):
                    if rng.random() < 0.4:
                        b = cls.random(ell - 1, K, rng, decay)
                        blocks[(j, k)] = _scale(b, decay ** (j + k))
        return cls(ell, lam, blocks)

    def adjoint(self):
        if self.ell == 0:
            return CanonicalElement(0, {-k: v for k, v in self.lam.items()})
        return CanonicalElement(self.ell, {-k: v for k, v in self.lam.items()},
                                {(k, j): b.adjoint() for (j, k), b in self.blocks.items()})

    def to_dict(self):
        d = {"ell": self.ell, "lambda": {str(k): v for k, v in sorted(self.lam.items())}}
        if self.ell > 0:
            d["blocks"] = [{"j": j, "k": k, "a": b.to_dict()} for (j, k), b in sorted(self.blocks.items())]
        return d

    @classmethod
    def from_dict(cls, d):
        blocks = {(b["j"], b["k"]): cls.from_dict(b["a"]) for b in d.get("blocks", [])}
        return cls(d["ell"], {int(k): float(v) for k, v in d["lambda"].items()}, blocks)

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s):
        return cls.from_dict(json.loads(s))


def _scale(a, c):
    return CanonicalElement(a.ell, {k: c * v for k, v in a.lam.items()},
                            {jk: _scale(b, c) for jk, b in a.blocks.items()})


def _nat_shift(c):
    # S e_n = e_(n-1) on {0..c}
    return sp.eye(c + 1, k=1, format="csr")


def _canonical_matrix(a: CanonicalElement, c: int):
    if a.ell == 0:
        n = 2 * c + 1
        m = sp.csr_matrix((n, n))
        for k, v in a.lam.items():
            m = m + v * sp.eye(n, k=-k, format="csr")
        return m
    S = _nat_shift(c)
    St = S.T.tocsr()
    rest = (c + 1) ** (a.ell - 1) * (2 * c + 1)
    I_rest = sp.identity(rest, format="csr")
    m = sp.csr_matrix((rest * (c + 1), rest * (c + 1)))
    for k, v in a.lam.items():
        base = S**k if k >= 0 else St ** (-k)
        m = m + v * sp.kron(base if k else sp.identity(c + 1), I_rest, format="csr")
    p0 = sp.csr_matrix(([1.0], ([0], [0])), shape=(c + 1, c + 1))
    for (j, k), b in a.blocks.items():
        left = St**j if j else sp.identity(c + 1)
        right = S**k if k else sp.identity(c + 1)
        m = m + sp.kron(left @ p0 @ right, _canonical_matrix(b, c), format="csr")
    return m


def canonical_to_operator(a: CanonicalElement, space: TruncatedSpace) -> SparseOperator:
    if space.index_set != tuple(range(1, space.ell + 2)) or a.ell != space.ell:
        raise DomainError(f"element of rank {a.ell} does not act on {space}")
    return SparseOperator(space, _canonical_matrix(a, space.cutoff))


def canonical_seminorm(a: CanonicalElement, m: int) -> float:
    """Truncated seminorm ||a||_m of the recursive Frechet structure."""
    lam_part = sum((1 + abs(k)) ** m * abs(v) for k, v in a.lam.items())
    if a.ell == 0:
        return float(lam_part)
    best = 0.0
    for r in range(m + 1):
        for s in range(m + 1):
            t = sum((1 + j + k) ** r * canonical_seminorm(b, s) for (j, k), b in a.blocks.items())
            best = max(best, t)
    return float(best + lam_part)
