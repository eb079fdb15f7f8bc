"""
Gauge and spin sectors: the Lorenz-constrained photon form has rank two per
mode with the gauge direction in its kernel; the Dirac anticommutator built
from the graded bracket matches (i dslash + m) applied to the scalar function.

Run:  python demos/photons_and_spinors.py
"""
import numpy as np

from covquant.dirac import dirac_anticommutator, fermionic_operators, mode_sum_anticommutator
from covquant.maxwell import gauge_kernel, massless_scalar_factors, photon_commutator
from covquant.modespace import make_grid

g = make_grid(3, 4, 2 * np.pi, 0.0)
print("k, rank (free), rank (constrained), kernel residual")
for mode in [g.mode_index([0, 0, 1]), g.mode_index([1, 1, 0]), g.mode_index([1, -2, 1])]:
    print("  ", gauge_kernel(g, mode).row())

x, y = [2.0, 0.3, 0.1, 0.0], [0.0] * 4
print()
print("eta_mu_nu Delta at m = 1 (diagonal):", [float(photon_commutator(x, y, mu, mu, m=1.0).value) for mu in range(4)])
D0, _ = massless_scalar_factors(x)
Dm, _ = massless_scalar_factors(x, m=1e-3)
print("massless D:", D0.value, " m = 1e-3:", Dm.value)

grid = make_grid(1, 64, 20.0, 1.0)
p = [1.1, 0.4]
ms = mode_sum_anticommutator(grid, p, [0.0, 0.0])
fd = dirac_anticommutator(1.0, p, [0.0, 0.0], method="mode_sum", grid=grid).matrix
cont = dirac_anticommutator(1.0, p, [0.0, 0.0]).matrix
print()
print("{psi, psibar} at (t, x) =", p)
print("  graded mode sum vs finite differences:", np.max(np.abs(ms - fd)))
print("  lattice vs continuum:", np.max(np.abs(ms - cont)))

ops = fermionic_operators(3)
print()
print("{b_0, b_0^dagger} =\n", (ops[0] @ ops[0].T + ops[0].T @ ops[0]).toarray().diagonal())
