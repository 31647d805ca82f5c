"""Decay of the residuals between the CG-built generators and their models.

Entries of the residual fall off like C q^w in the weight w; the fit is repeated
over several cutoffs to show the prefactor does not drift.
"""
from qsphere.equivariant_triple import certify_decay
from qsphere.qcore import QContext

for q in (0.3, 0.5):
    print(f"q = {q}")
    for name, j in (("zx", 1), ("zx", 2), ("zy", 3)):
        ok, reps = certify_decay(name, j, QContext(q=q, ell=2), cutoffs=(6, 8, 10))
        fits = ", ".join(f"C={r.C_fit:.4f} a={r.alpha_fit:.3f}" for r in reps)
        print(f"  {name}{j}: {'certified' if ok else 'NOT certified'}  [{fits}]")
