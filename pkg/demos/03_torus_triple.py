"""The torus-equivariant triple: generators, relations, commutators, canonical forms."""
import numpy as np

from qsphere.operators import TruncatedSpace, commutator, dirac_torus, op_norm
from qsphere.qcore import QContext
from qsphere.torus_triple import (CanonicalElement, canonical_seminorm, canonical_to_operator,
                                  f0_commutator_structure, relation_defects, torus_generators)

ctx = QContext(q=0.5, ell=2, cutoff=8)
space = TruncatedSpace.torus(ctx)
Y = torus_generators(ctx, space)
print(space)
print("relation defects on the interior:")
for name, d in relation_defects(Y, ctx).items():
    print(f"  {name:28s} {d.max_abs():.2e}")

# [D, Y_j] stays bounded as the truncation grows
for c in (6, 10, 14):
    cx = ctx.with_(cutoff=c)
    sp_ = TruncatedSpace.torus(cx)
    D = dirac_torus(sp_)[0]
    print(f"cutoff {c:2d}: ||[D, Y_j]|| =", [round(op_norm(commutator(D, y)), 8) for y in torus_generators(cx, sp_)])

# rank 0: the sign commutator with z^n is finite rank
s0 = TruncatedSpace.torus(QContext(ell=0, cutoff=8))
C = f0_commutator_structure(3, s0)
print("\n[F0, z^3] nonzeros:", C.nnz, "values", sorted(set(C.matrix.data.tolist())))

a = CanonicalElement.random(2, 2, np.random.default_rng(1))
A = canonical_to_operator(a, space)
print(f"\nrandom canonical element: ||a|| = {op_norm(A):.6f} <= ||a||_0 = {canonical_seminorm(a, 0):.6f}")
print("seminorms ||a||_m, m=0..3:", [round(canonical_seminorm(a, m), 4) for m in range(4)])
