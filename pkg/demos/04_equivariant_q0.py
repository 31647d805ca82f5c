"""The equivariant triple at q=0 and q>0.

At q=0 the generators are conjugate to the torus model tensored with the
identity; for q>0 they are assembled from CG coefficients.
"""
from qsphere.equivariant_triple import (EquivariantGenerators, build_U, build_Z_q0, conjugate_U, model_Y_star,
                                        st_decomposition_check)
from qsphere.operators import TruncatedSpace, dirac_equivariant
from qsphere.qcore import QContext
from qsphere.tableaux import gamma_to_label, label_to_gamma
from qsphere.torus_triple import relation_defects

g = (1, 0, -2, 3, 1)
lab = gamma_to_label(g)
print("gamma", g, "-> n =", lab.n, "k =", lab.k, "tableau", lab.s.rows)
print("and back:", label_to_gamma(lab))

ctx0 = QContext(q=0.0, ell=2, cutoff=5)
space = TruncatedSpace.full(ctx0)
U = build_U(ctx0, space)
for j in (1, 2, 3):
    dev = (conjugate_U(build_Z_q0(j, ctx0, space), U) - model_Y_star(j, ctx0, space)).max_abs()
    print(f"q=0, j={j}: |U Z* U* - Y* (x) I| = {dev}")
D = dirac_equivariant(space)[0]
print("U D_eq U* = D_eq:", (conjugate_U(D, U) - D).max_abs() == 0)

ctx = QContext(q=0.5, ell=2, cutoff=6)
gens = EquivariantGenerators.build(ctx)
worst = max(d.max_abs() for d in relation_defects(gens.Z, ctx).values())
print(f"\nq=0.5 CG-built generators ({gens.provenance[0]}): worst relation defect {worst:.2e}")
print("GT-weight homogeneity violations:", gens.homogeneity_violations())
for j in (1, 2, 3):
    print(f"j={j}: S/T reassembly error {st_decomposition_check(j, ctx).reassembly:.1e}")
