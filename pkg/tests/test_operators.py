import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, strategies as st

from qsphere.errors import DomainError
from qsphere.qcore import QContext
from qsphere.operators import (InteriorProjector, SparseOperator, TruncatedSpace, commutator, d_prime,
                               dirac_equivariant, dirac_torus, number_op, op_norm, projection_op, shift_op,
                               smoothing_seminorm)


@pytest.fixture
def torus2():
    return TruncatedSpace.torus(QContext(q=0.5, ell=2, cutoff=5))


def test_space_layout():
    sp1 = TruncatedSpace.torus(QContext(ell=1, cutoff=2))
    assert sp1.dim == 3 * 5
    assert sp1.basis[0].tolist() == [0, -2] and sp1.basis[-1].tolist() == [2, 2]
    assert sp1.index_of(np.array([[1, -1], [3, 0], [0, -3]])).tolist() == [1 * 5 + 1, -1, -1]
    with pytest.raises(DomainError):
        TruncatedSpace(QContext(ell=1), (0, 1))


def test_shift_and_number(torus2):
    S = shift_op(torus2, 1)
    e0 = torus2.index_of(np.array([[0, 2, 1]]))[0]
    assert S.matrix[:, e0].nnz == 0
    StS = (S.T @ S).compress(1)
    expect = (SparseOperator.identity(torus2) - projection_op(torus2, 1, 0)).compress(1)
    assert (StS - expect).max_abs() == 0.0
    N = number_op(torus2, 2)
    assert N.entry((1, 3, 0), (1, 3, 0)) == 3.0
    # [N, S] = -S on the interior
    C = commutator(number_op(torus2, 1), S)
    assert (C + S).compress(1).max_abs() == 0.0
    # the Z-coordinate shift is a bilateral shift
    Sz = shift_op(torus2, 3)
    assert Sz.entry((0, 0, -1), (0, 0, 0)) == 1.0
    with pytest.raises(IndexError):
        projection_op(torus2, 1, -1)


def test_dirac_torus_examples():
    sp1 = TruncatedSpace.torus(QContext(ell=1, cutoff=4))
    D, A, F = dirac_torus(sp1)
    assert D.entry((0, 0), (0, 0)) == 0 and F.entry((0, 0), (0, 0)) == 1
    assert D.entry((2, -3), (2, -3)) == -5
    sp2 = TruncatedSpace.torus(QContext(ell=2, cutoff=4))
    assert dirac_torus(sp2)[0].entry((1, 1, 4), (1, 1, 4)) == 6
    assert commutator(D, D @ D).max_abs() == 0.0
    with pytest.raises(DomainError):
        dirac_torus(TruncatedSpace.full(QContext(ell=1, cutoff=2)))


def test_dirac_equivariant_examples():
    space = TruncatedSpace.full(QContext(ell=2, cutoff=3))
    D, A, F = dirac_equivariant(space)
    assert D.entry((0,) * 5, (0,) * 5) == 0
    assert D.entry((1, 0, 0, 0, 0), (1, 0, 0, 0, 0)) == 1
    assert D.entry((0, 0, -1, 0, 0), (0, 0, -1, 0, 0)) == -1
    assert np.array_equal(A.diag(), space.abs_degree())
    assert np.array_equal(F.diag() * A.diag(), D.diag())


def test_op_norm_examples(torus2):
    p0 = projection_op(torus2, 1, 0)
    assert op_norm(p0) == 1.0
    assert op_norm(SparseOperator.zero(torus2)) == 0.0
    S = shift_op(torus2, 2)
    assert op_norm(S) == 1.0


@given(st.integers(0, 10**6))
def test_op_norm_matches_dense(seed):
    rng = np.random.default_rng(seed)
    space = TruncatedSpace.torus(QContext(ell=1, cutoff=3))
    m = sp.random(space.dim, space.dim, density=0.1, random_state=rng)
    T = SparseOperator(space, m)
    assert op_norm(T) == pytest.approx(np.linalg.norm(m.toarray(), 2), rel=1e-10, abs=1e-14)


def test_op_norm_large_uses_lanczos():
    space = TruncatedSpace.torus(QContext(ell=2, cutoff=10))
    rng = np.random.default_rng(1)
    m = sp.random(space.dim, space.dim, density=2e-4, random_state=rng)
    T = SparseOperator(space, m + m.T)
    ref = np.max(np.abs(np.linalg.eigvalsh((m + m.T).toarray())))
    assert op_norm(T) == pytest.approx(ref, rel=1e-8)


def test_smoothing_seminorm_examples(torus2):
    _, A, _ = dirac_torus(torus2)
    g = torus2.index_of(np.array([[1, 1, -1]]))[0]
    P = SparseOperator.diagonal(torus2, np.eye(torus2.dim)[g])
    for r, s in [(0, 0), (1, 2), (3, 1)]:
        assert smoothing_seminorm(P, r, s, A) == pytest.approx(3.0 ** (r + s))
    assert smoothing_seminorm(SparseOperator.zero(torus2), 2, 2, A) == 0.0
    assert d_prime(A)[torus2.index_of(np.zeros((1, 3), dtype=int))[0]] == 1.0


def test_from_map_drops_outside(torus2):
    G = torus2.basis.copy()
    G[:, 0] += 1
    T = SparseOperator.from_map(torus2, G, 1.0)
    assert T.nnz == int(np.sum(torus2.basis[:, 0] < torus2.cutoff))


def test_interior_projector(torus2):
    P = InteriorProjector(torus2, 2)
    assert P.operator().nnz == 4 * 4 * 7
    with pytest.raises(DomainError):
        InteriorProjector(torus2, -1)


def test_csv_export_is_sorted_by_column(torus2):
    S = shift_op(torus2, 1)
    lines = S.to_csv().split("\r\n")
    assert lines[0] == "row_gamma,col_gamma,value"
    assert lines[1] == '"0,0,-5","1,0,-5",1.0'
    rows, cols, _ = S.triplets()
    assert np.all(np.diff(cols) >= 0)


def test_mismatched_spaces(torus2):
    other = TruncatedSpace.torus(QContext(ell=2, cutoff=4))
    with pytest.raises(DomainError):
        SparseOperator.identity(torus2) + SparseOperator.identity(other)


@given(st.integers(0, 10**6))
def test_operator_algebra_matches_dense(seed):
    rng = np.random.default_rng(seed)
    space = TruncatedSpace.torus(QContext(ell=1, cutoff=2))
    a = sp.random(space.dim, space.dim, density=0.2, random_state=rng)
    b = sp.random(space.dim, space.dim, density=0.2, random_state=rng)
    A, B = SparseOperator(space, a), SparseOperator(space, b)
    dense = (a @ b - 2.0 * b.T).toarray()
    assert np.allclose((A @ B - 2.0 * B.T).matrix.toarray(), dense)
