"""Dimension spectrum: exact residues of Trace(b |D|^-z) and numeric cross-checks."""
from qsphere.operators import SparseOperator, TruncatedSpace, dirac_torus
from qsphere.qcore import QContext
from qsphere.spectral_zeta import (degeneracy_count_lattice, degeneracy_polynomial, trace_Deq_symbolic,
                                   trace_partial, trace_torus_symbolic)

for ell in (1, 2, 3):
    zc = trace_Deq_symbolic(ell)
    row = "  ".join(f"z={p}: {r} ({zc.numeric_residue(p):.7f})" for p, r in zc.residues().items())
    print(f"|D_eq| ell={ell}: {row}")

print("\ndegeneracy of |D_eq| = N for ell=2:", [int(degeneracy_polynomial(2, N)) for N in range(1, 8)])
print("lattice count                     :", [degeneracy_count_lattice(2, N) for N in range(1, 8)])

for ell in (1, 2, 3):
    zc = trace_torus_symbolic({0: {(): 1}}, ell)
    print(f"identity on the torus, ell={ell}: residue at z={ell + 1} is {zc.residues()[ell + 1]}")

# the symbolic continuation agrees with a truncated trace beyond the abscissa
ctx = QContext(ell=1, cutoff=40)
space = TruncatedSpace.torus(ctx)
A = dirac_torus(space)[1]
pt = trace_partial(SparseOperator.identity(space), 4, A)
exact = trace_torus_symbolic({0: {(): 1}}, 1, include_kernel=True).evaluate(4).real
print(f"\nTrace(|D|'^-4) truncated {pt.value.real:.10f} +- {pt.tail_bound:.1e}, symbolic {exact:.10f}")
