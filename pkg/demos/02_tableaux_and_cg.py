"""Gelfand-Tsetlin patterns, moves and Clebsch-Gordan coefficients.

The CG coefficients are computed twice, once from the product formula and
once in factorized sign * q-power * L form; the two must agree.
"""
from qsphere.cg import cg_direct, cg_factorized
from qsphere.qcore import QContext
from qsphere.tableaux import (apply_move, count_patterns, d_lambda_bruteforce, d_lambda_closed, enumerate_moves,
                              iter_patterns, lambda_nk, r_nk)

ctx = QContext(q=0.5, ell=2)
top = (2, 1, 0)
pats = list(iter_patterns(top))
print(f"{len(pats)} patterns with top row {top}; first:", pats[0])
assert len(pats) == count_patterns(top)

for n, k in [(1, 0), (2, 1), (3, 3)]:
    lam = lambda_nk(n, k, ctx.ell)
    print(f"d_lambda{lam}: closed {d_lambda_closed(n, k, ctx):.12f}  brute {d_lambda_bruteforce(lam, ctx):.12f}")

r = r_nk(2, 1, ctx.ell)
print("\nr_(2,1) =", r.rows)
print(f"{'M':>10} {'valid':>5} {'direct':>14} {'factorized':>14}")
for M in enumerate_moves(3, ctx):
    target = apply_move(r, M)
    f = cg_factorized(3, r, M, ctx)
    print(f"{str(M):>10} {str(target is not None):>5} {cg_direct(3, r, M, ctx):14.10f} {f.value:14.10f}")
