"""q-numbers, the Q(n) factor and the Euler-Maclaurin zeta.

Run: python3 demos/01_qnumbers_and_zeta.py
"""
import numpy as np

from qsphere.qcore import QContext, binomial_polynomial, fit_decay_exponent, q_factor, q_number, riemann_zeta

ctx = QContext(q=0.5, ell=2)
n = np.arange(6)
print("[n]_q at q=0.5:", np.round(q_number(n, ctx), 6))
print("Q(n) at q=0.5: ", np.round(q_factor(n, ctx), 6))
# at q=0 the factor collapses to a 0/1 switch
print("Q(n) at q=0:   ", q_factor(n, ctx.with_(q=0.0)))

# zeta away from and across the critical strip; z=1 is a pole
for z in (2, 4, 0.5, -1, 0.5 + 14.134725j):
    print(f"zeta({z}) = {riemann_zeta(z):.12g}")
print("pi^2/6     =", np.pi**2 / 6)

# C(N + r - 1, r - 1) as an exact polynomial in N
p = binomial_polynomial(3)
print("C(N+2,3) coefficients:", [str(c) for c in p.coeffs], " p(5) =", p(5))

# a clean geometric sequence recovers its exponent
w = np.arange(1, 12)
print("fitted exponent of 0.3^w:", round(fit_decay_exponent(list(zip(w, 0.3**w)), 0.3), 6))
