import itertools
from fractions import Fraction
from math import factorial

import numpy as np
import pytest
from hypothesis import given, strategies as st

from qsphere.errors import AbscissaError, DomainError, FormError, PoleError
from qsphere.operators import SparseOperator, TruncatedSpace, dirac_equivariant, dirac_torus
from qsphere.qcore import QContext, riemann_zeta
from qsphere.spectral_zeta import (RapidDecaySymbol, ZetaCombination, count_coefficients, degeneracy_count_labels,
                                   degeneracy_count_lattice, degeneracy_polynomial, lemma_dimension_decompose,
                                   trace_Deq_symbolic, trace_partial, trace_torus_symbolic)


def _comb_count(N, s):
    from math import comb
    return comb(N + s - 1, s - 1) if s > 0 else int(N == 0)


def direct_partial_sum(values, s, z, Nmax):
    tot = 0.0
    for n, a in values.items():
        w = sum(n)
        for N in range(max(w, 1), Nmax + 1):
            tot += float(a) * _comb_count(N - w, s) * N ** (-z)
    return tot


def test_zeta_combination_basics():
    zc = ZetaCombination({0: 1})
    assert zc.residues() == {1: 1}
    deq = trace_Deq_symbolic(1)
    assert deq.residues() == {1: 1, 2: 2, 3: 1}
    ref = riemann_zeta(2) + 2 * riemann_zeta(3) + riemann_zeta(4)
    assert abs(deq.evaluate(4) - ref) <= 1e-10
    assert deq.evaluate(4).real == pytest.approx(5.131371106878554, rel=1e-13)
    with pytest.raises(PoleError):
        deq.evaluate(2)
    with pytest.raises(DomainError):
        ZetaCombination({-1: 1})


def test_zeta_combination_json_roundtrip():
    zc = ZetaCombination({0: Fraction(1, 3), 2: 5}, {1: Fraction(-1, 2), 4: 2})
    d = zc.to_dict()
    assert d == {"terms": {"0": "1/3", "2": "5"}, "remainder": [[1, "-1/2"], [4, "2"]]}
    assert ZetaCombination.from_json(zc.to_json()) == zc


@given(st.dictionaries(st.integers(0, 4), st.fractions(max_denominator=20), max_size=4),
       st.dictionaries(st.integers(1, 6), st.fractions(max_denominator=20), max_size=3),
       st.fractions(max_denominator=10))
def test_zeta_combination_linear(terms, rem, c):
    a = ZetaCombination(terms, rem)
    assert (a - a).terms == {} and (a - a).remainder == {}
    assert a.scale(c).scale(2) == a.scale(2 * c)
    assert ZetaCombination.from_dict(a.to_dict()) == a


def test_dimension_decompose_examples():
    assert lemma_dimension_decompose(RapidDecaySymbol(0, {(): 1}, 1)) == ZetaCombination({0: 1})
    zc = lemma_dimension_decompose(RapidDecaySymbol(0, {(): 1}, 2))
    assert zc.residues() == {1: 1, 2: 1} and zc.remainder == {}
    assert abs(zc.evaluate(5) - zc.partial_dirichlet(5, 20000)) <= 1e-8
    zc = lemma_dimension_decompose(RapidDecaySymbol(1, {(2,): 1}, 1))
    assert zc.residues() == {1: 1} and zc.remainder == {1: -1}
    with pytest.raises(FormError):
        RapidDecaySymbol(2, {(1,): 1}, 1)


@given(st.integers(0, 2), st.integers(0, 3), st.data())
def test_dimension_decompose_matches_brute_force(r, s, data):
    pts = data.draw(st.lists(st.tuples(*[st.integers(0, 3)] * r), min_size=1, max_size=3, unique=True))
    values = {p: data.draw(st.fractions(-3, 3, max_denominator=4)) for p in pts}
    zc = lemma_dimension_decompose(RapidDecaySymbol(r, values, s))
    Nmax = 40
    assert zc.partial_dirichlet(6, Nmax).real == pytest.approx(direct_partial_sum(values, s, 6, Nmax), rel=1e-12, abs=1e-14)


def test_count_coefficients():
    # #{N x Z : |gamma| = N} = 2N + 1 - 1 ... checked against enumeration
    for n_nat in range(0, 4):
        coeffs = count_coefficients(n_nat, 1)
        for N in range(1, 9):
            cnt = sum(1 for g in itertools.product(range(-N, N + 1), repeat=n_nat + 1)
                      if sum(map(abs, g)) == N and all(x >= 0 for x in g[:-1]))
            assert sum(c * N**k for k, c in enumerate(coeffs)) == cnt


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_degeneracy_oracles(ell):
    for N in range(0, 31):
        lat = degeneracy_count_lattice(ell, N)
        assert degeneracy_count_labels(ell, N) == lat
        if N >= 1:
            assert degeneracy_polynomial(ell, N) == lat


def test_degeneracy_matches_truncated_space():
    space = TruncatedSpace.full(QContext(ell=2, cutoff=6))
    A = dirac_equivariant(space)[1].diag()
    for N in range(1, 7):
        assert int(np.sum(A == N)) == degeneracy_polynomial(2, N)


def test_deq_residues():
    assert trace_Deq_symbolic(2).residues() == {1: 1, 2: Fraction(7, 3), 3: Fraction(23, 12), 4: Fraction(2, 3),
                                                5: Fraction(1, 12)}
    for ell in range(1, 5):
        res = trace_Deq_symbolic(ell).residues()
        assert sorted(res) == list(range(1, 2 * ell + 2))
        assert all(v > 0 for v in res.values())


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_numeric_residues(ell):
    zc = trace_Deq_symbolic(ell)
    for p, r in zc.residues().items():
        assert abs(zc.numeric_residue(p) - float(r)) <= 1e-6


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_torus_identity_residue(ell):
    zc = trace_torus_symbolic({0: {(): 1}}, ell)
    assert zc.residues()[ell + 1] == Fraction(2, factorial(ell))
    assert abs(zc.numeric_residue(ell + 1) - 2 / factorial(ell)) <= 1e-6


def test_torus_top_level_symbol():
    ell = 2
    zc = trace_torus_symbolic({ell: {(1, 0): Fraction(1, 2), (0, 3): Fraction(1, 2)}}, ell)
    assert zc.residues()[1] == 2
    signed = trace_torus_symbolic({0: {(): 1}}, ell, with_sign=True)
    assert max(signed.poles()) == ell
    with pytest.raises(FormError):
        trace_torus_symbolic({1: {(0, 0): 1}}, ell)
    with pytest.raises(FormError):
        trace_torus_symbolic({5: {(): 1}}, ell)


def test_torus_symbol_matches_truncated_lattice():
    # Dirichlet partial sum over complete shells equals the direct lattice sum exactly
    ell, c = 2, 10
    phi = {0: {(): 1}, 1: {(0,): Fraction(1, 2), (2,): -1}, 2: {(1, 1): 3}}
    zc = trace_torus_symbolic(phi, ell)
    space = TruncatedSpace.torus(QContext(ell=ell, cutoff=c))
    B = space.basis
    diag = np.ones(space.dim)
    diag += np.where(B[:, 0] == 0, 0.5, 0) + np.where(B[:, 0] == 2, -1, 0)
    diag += np.where((B[:, 0] == 1) & (B[:, 1] == 1), 3, 0)
    b = SparseOperator.diagonal(space, diag)
    A = dirac_torus(space)[1]
    shell = (A.diag() <= c) & (A.diag() >= 1)
    direct = np.sum(diag[shell] * A.diag()[shell] ** -6.0)
    assert abs(zc.partial_dirichlet(6, c).real - direct) <= 1e-8
    pt = trace_partial(b, 6, A)
    # kernel term: |D|' = 1 at gamma = 0
    kernel = diag[space.index_of(np.zeros((1, 3), dtype=int))[0]]
    assert abs(pt.value.real - kernel - direct) <= 1e-12
    assert abs(zc.evaluate(6).real - (pt.value.real - kernel)) <= pt.tail_bound


def test_trace_partial_identity_within_tail_bound():
    ctx = QContext(ell=1, cutoff=40)
    space = TruncatedSpace.torus(ctx)
    A = dirac_torus(space)[1]
    pt = trace_partial(SparseOperator.identity(space), 4, A)
    ref = trace_torus_symbolic({0: {(): 1}}, 1, include_kernel=True).evaluate(4).real
    assert abs(pt.value.real - ref) <= pt.tail_bound
    with pytest.raises(AbscissaError):
        trace_partial(SparseOperator.identity(space), 2, A)


def test_trace_partial_single_kernel_term():
    space = TruncatedSpace.torus(QContext(ell=1, cutoff=4))
    A = dirac_torus(space)[1]
    p = np.zeros(space.dim)
    p[space.index_of(np.zeros((1, 2), dtype=int))[0]] = 1
    pt = trace_partial(SparseOperator.diagonal(space, p), 7, A, decay=(0.0, 0.5))
    assert pt.value == 1 and pt.tail_bound == 0.0


def test_rapid_decay_symbol_is_finite_at_zero():
    q, c = 0.5, 30
    space = TruncatedSpace.torus(QContext(ell=1, cutoff=c))
    A = dirac_torus(space)[1]
    b = SparseOperator.diagonal(space, q ** A.diag())
    pt = trace_partial(b, 0, A, decay=(1.0, q))
    # sum over N x Z of q^(n+|t|) = 2 * 3
    assert abs(pt.value.real - 6.0) <= pt.tail_bound + 1e-12
    assert pt.tail_bound < 1e-6
