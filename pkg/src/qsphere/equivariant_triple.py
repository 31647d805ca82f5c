"""SU_q(ell+1)-equivariant triple on the odd sphere, realized on the gamma-indexed truncation.

Operators are assembled in the basis xi_gamma = e_{r^{n,k}, s(gamma)}, identified with
e_gamma through the label bijection. In that picture U is the diagonal sign
e_gamma -> (-1)^eta(gamma) e_gamma and U T U* is T conjugated by those signs.
The builders return the adjoints Z_j^* because that is the operator the CG
expansion produces directly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .cg import cg_direct_batch, cg_factorized_batch
from .errors import ConsistencyError, DomainError, UnsupportedRankError
from .operators import InteriorProjector, SparseOperator, TruncatedSpace
from .qcore import QContext, fit_decay_exponent, q_factor
from .tableaux import (Move, apply_move_array, eta_array, gammas_to_labels, labels_to_gammas,
                       moves_minus, moves_plus, special_move)
from .torus_triple import build_Y


def _check_rank(ctx):
    if ctx.ell < 2:
        raise UnsupportedRankError(f"equivariant builders need ell >= 2, got ell={ctx.ell}")


def _full_space(ctx, space):
    _check_rank(ctx)
    if space is None:
        space = TruncatedSpace.full(ctx)
    if space.index_set != tuple(range(1, 2 * ctx.ell + 2)) or space.ell != ctx.ell:
        raise DomainError("equivariant operators need the full index set")
    return space


_LABEL_CACHE = {}


def basis_labels(space: TruncatedSpace):
    """(n, k, S) for every basis vector of the space (cached per space shape)."""
    key = (space.ell, space.cutoff)
    if key not in _LABEL_CACHE:
        _LABEL_CACHE.clear()
        _LABEL_CACHE[key] = gammas_to_labels(space.basis)
    return _LABEL_CACHE[key]


def r_nk_batch(n, k, ell):
    """Stacked left tableaux r^{n,k}: top row (n+k, k, ..., k, 0), all lower entries k."""
    n = np.asarray(n, dtype=np.int64)
    k = np.asarray(k, dtype=np.int64)
    R = np.zeros(n.shape + (ell + 1, ell + 1), dtype=np.int64)
    R[..., 0, 0] = n + k
    R[..., 0, 1:ell] = k[..., None]
    for a in range(1, ell + 1):
        R[..., a, : ell + 1 - a] = k[..., None]
    return R


def _targets(space, n2, k2, S2, ok):
    G2 = labels_to_gammas(n2, k2, S2)
    back = gammas_to_labels(np.where(ok[:, None], G2, 0))
    good = (back[0] == np.where(ok, n2, 0)) & (back[1] == np.where(ok, k2, 0))
    good &= np.all(back[2] == np.where(ok[:, None, None], S2, back[2]), axis=(1, 2))
    if not np.all(good | ~ok):
        raise ConsistencyError("label decode failed: the gamma/label bijection is broken")
    return G2


def _log_cg(i, T, M, q):
    sgn, expo, L, _ = cg_factorized_batch(i, T, M, q)
    _, ok = apply_move_array(T, M)
    with np.errstate(divide="ignore"):
        return sgn, expo, np.log(np.where(ok, L, 1.0)), ok


def _zstar_terms(j, ctx, space, plus):
    """Yield (M, ok, value, target gammas) for each move of M_j^+ or M_j^-."""
    ell, q = ctx.ell, ctx.q
    n, k, S = basis_labels(space)
    R = r_nk_batch(n, k, ell)
    left = special_move(1, 1, ctx) if plus else special_move(0, 1, ctx)
    s1, e1, l1, ok1 = _log_cg(1, R, left, q)
    kk = k if plus else np.maximum(k, 1)
    from .cg import log_kappa_nk
    lk = log_kappa_nk(n, kk, ell, q, plus)
    moves = moves_plus(j, ctx) if plus else moves_minus(j, ctx)
    n2, k2 = (n + 1, k) if plus else (n, k - 1)
    for M in moves:
        s2, e2, l2, ok2 = _log_cg(j, S, M, q)
        ok = ok1 & ok2
        S2, _ = apply_move_array(S, M)
        expo = 1 - j + e1 + e2
        with np.errstate(over="ignore", invalid="ignore"):
            val = np.where(ok, s1 * s2 * np.exp(expo * math.log(q) + l1 + l2 + np.where(ok, lk, 0.0)), 0.0)
        yield M, ok, val, _targets(space, n2, k2, S2, ok)


def build_Z_cg(j: int, ctx: QContext, space: TruncatedSpace | None = None) -> SparseOperator:
    """Z_{j,q}^* summed over the boundary moves, from factorized CG data and closed-form kappa."""
    space = _full_space(ctx, space)
    if not 0 < ctx.q < 1:
        raise DomainError("CG assembly needs q in (0, 1); use build_Z_q0 at q=0")
    if not 1 <= j <= ctx.ell + 1:
        raise DomainError(f"j={j} outside 1..{ctx.ell + 1}")
    cols, tgts, vals = [], [], []
    for plus in (True, False):
        for M, ok, val, G2 in _zstar_terms(j, ctx, space, plus):
            idx = np.flatnonzero(ok)
            cols.append(idx)
            tgts.append(G2[idx])
            vals.append(val[idx])
    return SparseOperator.from_map(space, np.concatenate(tgts), np.concatenate(vals), np.concatenate(cols))


def build_Z_q0(j: int, ctx: QContext, space: TruncatedSpace | None = None) -> SparseOperator:
    """Z_{j,0}^* from the surviving-term description at q = 0."""
    space = _full_space(ctx, space)
    ell = ctx.ell
    if not 1 <= j <= ell + 1:
        raise DomainError(f"j={j} outside 1..{ell + 1}")
    n, k, S = basis_labels(space)
    cols, tgts, vals = [], [], []

    def add(mask, M, n2, k2, sign):
        S2, ok = apply_move_array(S, M)
        ok = ok & mask & (k2 >= 0)
        G2 = _targets(space, n2, k2, S2, ok)
        idx = np.flatnonzero(ok)
        cols.append(idx)
        tgts.append(G2[idx])
        vals.append(np.full(len(idx), float(sign)))

    if j <= ell:
        d_j = S[:, j - 1, ell + 1 - j]
        add(d_j == 0, special_move(0, j, ctx), n, k - 1, (-1) ** (j - 1))
    else:
        d_last = S[:, ell, 0]
        add(k == 0, special_move(ell, ell + 1, ctx), n + 1, k, 1)
        add((k > 0) & (d_last == 0), special_move(0, ell + 1, ctx), n, k - 1, (-1) ** ell)
    return SparseOperator.from_map(space, np.concatenate(tgts), np.concatenate(vals), np.concatenate(cols))


def build_U(ctx: QContext, space: TruncatedSpace | None = None) -> SparseOperator:
    """U xi'_gamma = e_gamma as the sign diagonal (-1)^eta(gamma) in the xi_gamma picture."""
    space = _full_space(ctx, space)
    return SparseOperator.diagonal(space, np.where(eta_array(space.basis) % 2, -1.0, 1.0))


def conjugate_U(T: SparseOperator, U: SparseOperator) -> SparseOperator:
    return U @ T @ U.T


def build_X(j: int, ctx: QContext, space: TruncatedSpace | None = None) -> SparseOperator:
    """Leading part X_j of Z_{j,q}^* for j <= ell: one shifted term with a Q-weight."""
    space = _full_space(ctx, space)
    ell, q = ctx.ell, ctx.q
    if not 1 <= j <= ell:
        raise DomainError(f"X_j is defined for 1 <= j <= ell, got j={j}")
    n, k, S = basis_labels(space)
    d = [S[:, a - 1, ell + 1 - a] for a in range(1, ell + 1)] + [S[:, ell, 0]]
    w = (-1) ** (j - 1) * float(q) ** d[j - 1] * q_factor(d[j] - d[j - 1], q)
    if j == ell:
        w = w * q_factor(np.maximum(k - d[ell - 1], 0), q)
    S2, ok = apply_move_array(S, special_move(0, j, ctx))
    ok &= k > 0
    G2 = _targets(space, n, k - 1, S2, ok)
    idx = np.flatnonzero(ok & (w != 0))
    return SparseOperator.from_map(space, G2[idx], w[idx], idx)


def model_Y_star(j: int, ctx: QContext, space: TruncatedSpace | None = None) -> SparseOperator:
    """Y_{j,q}^* (x) I on the full space."""
    space = _full_space(ctx, space)
    return build_Y(j, ctx, space).T


# ------------------------------------------------------------------ decay

def column_weight(space: TruncatedSpace) -> np.ndarray:
    """sum_{i<=ell} gamma_i + |gamma_{ell+1}| at every basis vector."""
    ell = space.ell
    return space.basis[:, :ell].sum(axis=1) + np.abs(space.basis[:, ell])


@dataclass
class DecayReport:
    C_fit: float
    alpha_fit: float | None
    envelope: list = field(default_factory=list)
    nnz: int = 0
    peaks: list = field(default_factory=list)
    alpha_loglinear: float | None = None

    def certified(self, alpha_min=0.98):
        """Both the prefactor-robust and the plain log-linear exponents must reach alpha_min."""
        if self.nnz == 0:
            return True
        return (self.alpha_fit is not None and self.alpha_fit >= alpha_min
                and self.alpha_loglinear >= alpha_min)


def decay_report(R: SparseOperator, ctx: QContext, margin: int = 1, floor: float = 1e-13) -> DecayReport:
    """max |entry| / q^weight over interior entries and the fitted decay exponent of the envelope.

    The envelope at weight w is the largest entry of weight >= w, i.e. the least
    nonincreasing majorant of the per-weight peaks; a bound C q^(alpha w) has to
    dominate exactly this, so unusually small low-weight peaks do not bias the fit.
    Entries below floor are treated as rounding noise and left out of both numbers.
    """
    q = ctx.q
    m = InteriorProjector(R.space, margin).apply(R).matrix.tocoo()
    keep = np.abs(m.data) > floor
    rows, cols, data = m.row[keep], m.col[keep], np.abs(m.data[keep])
    if data.size == 0:
        return DecayReport(0.0, None, [], 0)
    w = column_weight(R.space)[cols]
    C = float(np.max(data / float(q) ** w))
    env = {}
    for wi, v in zip(w.tolist(), data.tolist()):
        env[wi] = max(env.get(wi, 0.0), v)
    peaks = sorted(env.items())
    run = np.maximum.accumulate(np.array([v for _, v in peaks])[::-1])[::-1]
    samples = [(w_, float(v)) for (w_, _), v in zip(peaks, run)]
    if len(samples) < 4:
        return DecayReport(C, None, samples, int(data.size), peaks, None)
    return DecayReport(C, fit_decay_exponent(samples, q), samples, int(data.size), peaks,
                       fit_decay_exponent(samples, q, poly=False))


def decay_table(R: SparseOperator, ctx: QContext, margin: int = 1, floor: float = 1e-13):
    """Rows (gamma, weight, entry, entry/q^weight) for the interior entries of R."""
    m = InteriorProjector(R.space, margin).apply(R).matrix.tocoo()
    w = column_weight(R.space)
    out = []
    for i, j, v in sorted(zip(m.row.tolist(), m.col.tolist(), m.data.tolist()), key=lambda t: (t[1], t[0])):
        if abs(v) > floor:
            out.append((R.space.gamma_str(j), R.space.gamma_str(i), int(w[j]), v, v / ctx.q ** int(w[j])))
    return out


def residual(name: str, j: int, ctx: QContext, space=None) -> SparseOperator:
    """Named residuals whose decay is certified.

    "zx":    U Z_j^* U* - U X_j U*          (j <= ell)
    "xy":    U X_j U* - Y_j^* (x) I          (j <= ell)
    "zy":    U Z_j^* U* - Y_j^* (x) I        (any j)
    """
    space = _full_space(ctx, space)
    U = build_U(ctx, space)
    if name == "zx":
        return conjugate_U(build_Z_cg(j, ctx, space) - build_X(j, ctx, space), U)
    if name == "xy":
        return conjugate_U(build_X(j, ctx, space), U) - model_Y_star(j, ctx, space)
    if name == "zy":
        return conjugate_U(build_Z_cg(j, ctx, space), U) - model_Y_star(j, ctx, space)
    raise DomainError(f"unknown residual {name!r}")


def certify_decay(name: str, j: int, ctx: QContext, cutoffs=(6, 8, 10), alpha_min=0.98, spread=1e-2):
    """Decay reports at several cutoffs; certified when C_fit is stable and alpha_fit >= alpha_min."""
    reports = [decay_report(residual(name, j, ctx.with_(cutoff=c)), ctx.with_(cutoff=c)) for c in cutoffs]
    Cs = [r.C_fit for r in reports]
    stable = max(Cs) == 0 or (max(Cs) - min(Cs)) <= spread * max(Cs)
    ok = stable and all(r.certified(alpha_min) for r in reports)
    return ok, reports


# ------------------------------------------------------ S/T decomposition

def _kappa_explicit(n, k, ell, q, plus):
    Q = lambda x: q_factor(np.maximum(x, 0), q)
    with np.errstate(divide="ignore", invalid="ignore"):
        if plus:
            return q**ell * Q(n + 1) / Q(n + ell) * Q(n + k + ell) / Q(n + k + ell + 1)
        return Q(k + ell - 1) / Q(k) * Q(n + k + ell) / Q(n + k + ell - 1)


def label_shift(space, M: Move, plus: bool) -> SparseOperator:
    """S_M^+ : (n,k,s) -> (n+1,k,M(s))  or  S_M^- : (n,k,s) -> (n,k-1,M(s))."""
    n, k, S = basis_labels(space)
    S2, ok = apply_move_array(S, M)
    n2, k2 = (n + 1, k) if plus else (n, k - 1)
    ok &= k2 >= 0
    G2 = _targets(space, n2, k2, S2, ok)
    idx = np.flatnonzero(ok)
    return SparseOperator.from_map(space, G2[idx], 1.0, idx)


def t_diagonal(j: int, M: Move, ctx: QContext, space, plus: bool) -> np.ndarray:
    """Diagonal of T_M^+ or T_M^- from direct CG values and explicit kappa."""
    ell, q = ctx.ell, ctx.q
    n, k, S = basis_labels(space)
    R = r_nk_batch(n, k, ell)
    left = special_move(1, 1, ctx) if plus else special_move(0, 1, ctx)
    c1 = cg_direct_batch(1, R, left, q)
    c2 = cg_direct_batch(j, S, M, q)
    kap = _kappa_explicit(n, k, ell, q, plus)
    with np.errstate(invalid="ignore"):
        out = q ** (1 - j) * c1 * c2 * np.where(c1 * c2 != 0, kap, 0.0)
    return np.nan_to_num(out)


def tminus_product(j: int, ctx: QContext, space) -> np.ndarray:
    """Closed Q-ratio product for the diagonal of U T^-_{N_{0,j}} U* (j <= ell)."""
    ell, q = ctx.ell, ctx.q
    n, k, S = basis_labels(space)
    c = [None] + [S[:, a - 1, 0] for a in range(1, ell + 1)] + [S[:, ell, 0]]
    d = [None] + [S[:, a - 1, ell + 1 - a] for a in range(1, ell + 1)] + [S[:, ell, 0]]
    Q = lambda x: q_factor(np.maximum(x, 0), q)
    lead = Q(k - d[ell]) if j == ell else Q(d[j + 1] - d[j])
    with np.errstate(divide="ignore", invalid="ignore"):
        v = (-1) ** (j - 1) * float(q) ** d[j] * lead / Q(n + k + ell - 1)
        for a in range(1, j):
            v = v * Q(c[a] - d[a + 1] + ell - a) / Q(c[a + 1] - d[a + 1] + ell - a - 1)
        for a in range(1, j + 1):
            v = v * Q(c[a + 1] - d[a] + ell - a) / Q(c[a] - d[a] + ell + 1 - a)
    return v


def tplus_product(ctx: QContext, space) -> np.ndarray:
    """Closed Q-ratio product for the diagonal of U T^+_{N_ell} U*."""
    ell, q = ctx.ell, ctx.q
    n, k, S = basis_labels(space)
    c = [None] + [S[:, a - 1, 0] for a in range(1, ell + 1)]
    d = [None] + [S[:, a - 1, ell + 1 - a] for a in range(1, ell + 1)] + [S[:, ell, 0]]
    Q = lambda x: q_factor(np.maximum(x, 0), q)
    with np.errstate(divide="ignore", invalid="ignore"):
        v = float(q) ** k * Q(n + 1) / Q(n + k + ell + 1)
        for a in range(1, ell):
            v = v * Q(c[a + 1] - k + 1) / Q(c[a] - k + 1)
            v = v * Q(c[a + 1] - d[a] + ell + 1 - a) / Q(c[a] - d[a] + ell + 1 - a)
            v = v * Q(c[a] - d[a + 1] + ell + 1 - a) / Q(c[a + 1] - d[a + 1] + ell + 1 - a)
        v = v * Q(d[ell + 1] - d[ell] + 1) / Q(c[ell] - d[ell] + 1)
    return v


@dataclass
class STCheck:
    reassembly: float
    tminus: dict
    tplus_product: float
    tplus_decay: DecayReport


def st_decomposition_check(j: int, ctx: QContext, space: TruncatedSpace | None = None) -> STCheck:
    """Rebuild Z_j^* as sum S_M T_M and compare with build_Z_cg; spot-check closed diagonals."""
    space = _full_space(ctx, space)
    total = SparseOperator.zero(space)
    for plus in (True, False):
        for M in (moves_plus(j, ctx) if plus else moves_minus(j, ctx)):
            T = SparseOperator.diagonal(space, t_diagonal(j, M, ctx, space, plus))
            total = total + label_shift(space, M, plus) @ T
    ref = build_Z_cg(j, ctx, space)
    scale = max(ref.max_abs(), 1.0)
    reassembly = (total - ref).max_abs() / scale

    tminus = {}
    n, k, S = basis_labels(space)
    for jj in range(1, ctx.ell + 1):
        diag = t_diagonal(jj, special_move(0, jj, ctx), ctx, space, plus=False)
        prod = tminus_product(jj, ctx, space)
        live = (diag != 0) & np.isfinite(prod)
        tminus[jj] = float(np.max(np.abs(diag[live] - prod[live]))) if live.any() else 0.0

    N_ell = special_move(ctx.ell, ctx.ell + 1, ctx)
    diag = t_diagonal(ctx.ell + 1, N_ell, ctx, space, plus=True)
    prod = tplus_product(ctx, space)
    live = (diag != 0) & np.isfinite(prod)
    tplus_err = float(np.max(np.abs(diag[live] - prod[live]))) if live.any() else 0.0
    rem = np.where(diag != 0, diag - float(ctx.q) ** k, 0.0)
    rep = decay_report(SparseOperator.diagonal(space, rem), ctx)
    return STCheck(reassembly, tminus, tplus_err, rep)


# ------------------------------------------------------------ generators

@dataclass
class EquivariantGenerators:
    ctx: QContext
    space: TruncatedSpace
    Z: list
    provenance: list

    @classmethod
    def build(cls, ctx: QContext, space=None, source: str | None = None):
        space = _full_space(ctx, space)
        if source is None:
            source = "q0-direct" if ctx.q == 0 else "cg-built"
        js = range(1, ctx.ell + 2)
        if source == "cg-built":
            Z = [build_Z_cg(j, ctx, space).T for j in js]
        elif source == "q0-direct":
            Z = [build_Z_q0(j, ctx, space).T for j in js]
        elif source == "model":
            Z = [build_Y(j, ctx, space) for j in js]
        else:
            raise DomainError(f"unknown generator source {source!r}")
        return cls(ctx, space, Z, [source] * len(Z))

    def star(self, j):
        return self.Z[j - 1].T

    def homogeneity_violations(self) -> int:
        """Entries of Z_j^* whose GT weight shift differs from +e_j modulo (1, ..., 1)."""
        from .tableaux import gt_weight

        _, _, S = basis_labels(self.space)
        wt = gt_weight(S)
        bad = 0
        for j, Zj in enumerate(self.Z, start=1):
            m = Zj.T.matrix.tocoo()  # Z_j^*: column -> row
            diff = wt[m.row] - wt[m.col]
            diff = diff - diff[:, :1]
            expect = np.eye(self.ctx.ell + 1, dtype=np.int64)[j - 1]
            expect = expect - expect[0]
            bad += int(np.sum(np.any(diff != expect, axis=1)))
        return bad
