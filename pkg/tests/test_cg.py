import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import random_batch, random_rows
from qsphere.cg import (R_direct, R_factorized, R_prime_direct, R_prime_factorized, a_k_decomposition, cg_direct,
                        cg_direct_batch, cg_factorized, cg_factorized_batch, kappa_exact, log_kappa_nk,
                        move_B, move_C, move_sign)
from qsphere.errors import DomainError, ValidationError
from qsphere.qcore import QContext, q_factor
from qsphere.tableaux import (GTTableau, apply_move, enumerate_moves, r_nk, rows_to_array, special_move,
                             zero_tableau)


def _valid_R_inputs(ell, rng):
    r = random_rows(ell, rng)
    a = int(rng.integers(1, ell + 1))
    j = int(rng.integers(1, ell + 3 - a))
    k = int(rng.integers(1, ell + 2 - a))
    return r, a, j, k


def test_R_prime_lone_factor_example():
    r = GTTableau(1, ((1, 0), (0,)))
    assert R_prime_direct(r, 1, 1, 0.5) == pytest.approx(1.0, abs=1e-15)
    P, L = R_prime_factorized(r, 1, 1, 0.5)
    assert 0.5**P * L == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("q", [0.3, 0.7])
def test_R_direct_matches_factorized(q, rng):
    checked = 0
    while checked < 200:
        ell = int(rng.integers(1, 4))
        r, a, j, k = _valid_R_inputs(ell, rng)
        try:
            d = R_direct(r, a, j, k, q)
        except ZeroDivisionError:
            continue
        sgn, e, L = R_factorized(r, a, j, k, q)
        assert d == pytest.approx(sgn * q**float(e) * float(L), rel=1e-12, abs=1e-14)
        if j > k and d != 0:
            assert np.sign(d) == -1
        checked += 1


@pytest.mark.parametrize("q", [0.3, 0.7])
def test_R_prime_direct_matches_factorized(q, rng):
    checked = 0
    while checked < 100:
        ell = int(rng.integers(1, 4))
        r = random_rows(ell, rng)
        a = int(rng.integers(1, ell + 1))
        j = int(rng.integers(1, ell + 3 - a))
        try:
            d = R_prime_direct(r, a, j, q)
        except ZeroDivisionError:
            continue
        P, L = R_prime_factorized(r, a, j, q)
        assert d == pytest.approx(q**float(P) * float(L), rel=1e-12, abs=1e-14)
        checked += 1


def test_L_prime_on_rnk():
    q = 0.4
    for ell in (2, 3):
        for n, k in [(1, 1), (3, 2), (0, 4)]:
            _, L = R_prime_factorized(r_nk(n, k, ell), 1, ell + 1, q)
            assert float(L) == pytest.approx(q_factor(k, q) / q_factor(n + k + ell, q), rel=1e-12)


@pytest.mark.parametrize("ell", [1, 2, 3])
@pytest.mark.parametrize("q", [0.3, 0.5, 0.8])
def test_cg_direct_matches_factorized_exhaustive(ell, q, rng):
    batch = random_batch(ell, 100, rng)
    for i in range(1, ell + 2):
        for M in enumerate_moves(i, ell):
            d = cg_direct_batch(i, batch, M, q)
            _, _, _, f = cg_factorized_batch(i, batch, M, q)
            assert np.all(np.abs(d - f) <= 1e-12 * np.maximum(1.0, np.abs(d)))


def test_cg_invalid_move_gives_zero():
    M = special_move(0, 1, QContext(ell=2))
    assert cg_direct(1, zero_tableau(2), M, 0.5) == 0.0
    assert cg_factorized(1, zero_tableau(2), M, 0.5).value == 0.0
    with pytest.raises(DomainError):
        cg_direct(2, zero_tableau(2), M, 0.5)


def test_special_move_factorization():
    for ell in (2, 3):
        ctx = QContext(ell=ell)
        s = rows_to_array(random_rows(ell, np.random.default_rng(ell)))
        for j in range(1, ell + 2):
            M = special_move(0, j, ctx)
            assert move_B(M) == j - 1
            assert move_sign(M) == (-1) ** (j - 1)
            if j <= ell:
                assert int(move_C(s, M)) == s[j - 1, ell + 1 - j]  # d_j
        N_ell = special_move(ell, ell + 1, ctx)
        assert (move_B(N_ell), int(move_C(s, N_ell)), move_sign(N_ell)) == (0, 0, 1)
        N_0 = special_move(0, ell + 1, ctx)
        assert (move_B(N_0), int(move_C(s, N_0)), move_sign(N_0)) == (ell, s[ell, 0], (-1) ** ell)


@pytest.mark.parametrize("ell", [1, 2, 3])
def test_A_K_identity_exhaustive(ell):
    for i in range(1, ell + 2):
        for M in enumerate_moves(i, ell):
            A, K = a_k_decomposition(M)
            assert move_B(M) + ell + 2 - i - M.entries[0] == A + K
            if len(set(M.entries)) == 1:
                assert A == 0
    A, K = a_k_decomposition(special_move(ell, ell + 1, ell))
    assert (A, K) == (0, 0)


@pytest.mark.parametrize("ell", [2, 3])
def test_kappa_closed_forms(ell):
    q = 0.45
    ctx = QContext(q=q, ell=ell)
    Q = lambda n: q_factor(n, q)
    for n, k in [(0, 1), (2, 1), (3, 3)]:
        r = r_nk(n, k, ell)
        k4 = q**ell * Q(n + 1) / Q(n + ell) * Q(n + k + ell) / Q(n + k + ell + 1)
        assert kappa_exact(r, special_move(1, 1, ctx), ctx) == pytest.approx(k4, rel=1e-12)
        assert np.exp(log_kappa_nk(n, k, ell, q, True)) == pytest.approx(k4, rel=1e-12)
        k5 = Q(k + ell - 1) / Q(k) * Q(n + k + ell) / Q(n + k + ell - 1)
        assert kappa_exact(r, special_move(0, 1, ctx), ctx) == pytest.approx(k5, rel=1e-12)
        assert np.exp(log_kappa_nk(n, k, ell, q, False)) == pytest.approx(k5, rel=1e-12)


def test_kappa_invalid_target():
    ctx = QContext(q=0.5, ell=2)
    with pytest.raises(ValidationError):
        kappa_exact(zero_tableau(2), special_move(0, 1, ctx), ctx)


@pytest.mark.parametrize("ell", [1, 2])
def test_kappa_small_q_asymptotics(ell, rng):
    q = 1e-3
    ctx = QContext(q=q, ell=ell)
    for _ in range(5):
        r = GTTableau(ell, random_rows(ell, rng))
        for i in range(1, ell + 2):
            for M in enumerate_moves(i, ell):
                if apply_move(r, M) is None:
                    continue
                val = kappa_exact(r, M, ctx) * q ** -(ell + 2 - i - M.entries[0])
                assert abs(val - 1) <= 1e-2


def test_L_products_are_one_plus_O_q2(rng):
    # |L - 1| <= c q^2 for small q: fitted c stays bounded as q shrinks
    ell = 2
    batch = random_batch(ell, 40, rng)
    worst = []
    for q in (0.1, 0.05, 0.025):
        w = 0.0
        for i in range(1, ell + 2):
            for M in enumerate_moves(i, ell):
                _, _, L, v = cg_factorized_batch(i, batch, M, q)
                live = v != 0
                if live.any():
                    w = max(w, float(np.max(np.abs(L[live] - 1))) / q**2)
        worst.append(w)
    assert max(worst) < 10 and worst[-1] <= worst[0] * 1.1


@given(st.integers(1, 3), st.integers(0, 10**6), st.sampled_from([0.2, 0.5, 0.9]))
def test_no_singularity_on_valid_pairs(ell, seed, q):
    r = rows_to_array(random_rows(ell, np.random.default_rng(seed), top_max=4))
    for i in range(1, ell + 2):
        for M in enumerate_moves(i, ell):
            d = cg_direct(i, r, M, q)
            assert np.isfinite(d)
