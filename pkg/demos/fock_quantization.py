"""
Bargmann-Fock quantization of a few modes of the scalar field.

Ladder operators act on holomorphic polynomials in a*; quadratic observables
pick up a half-trace zero point, which is where the 1/2 in hbar eps (n + 1/2)
comes from.

Run:  python demos/fock_quantization.py
"""
import itertools

import numpy as np

from covquant.modespace import make_grid
from covquant.quantize import FockSpace, normal_order, quantize_observable, quantum_commutator_check, restrict, spectrum_rows
from covquant.symplectic import field_observable, field_velocity_observable, hamiltonian, momentum_observable, poisson_bracket

# two modes with eps = 1 and 2 on a massless 3-D box of side 2 pi
g = make_grid(3, 6, 2 * np.pi, 0.0)
space = FockSpace(g, [[1, 0, 0], [2, 0, 0]], cutoff=3)
print(space)
for occ, e, e_no in spectrum_rows(space)[:6]:
    print(f"  n={occ}  E={e:4.1f}  normal ordered={e_no:4.1f}")
H = quantize_observable(space, restrict(hamiltonian(g), space.modes))
print("  vacuum energy", H.zero_point, "-> after normal ordering", normal_order(H).zero_point)

# Dirac condition on a small 1-D lattice with every mode quantized
g = make_grid(1, 4, 5.0, 1.0)
space = FockSpace(g, range(4), cutoff=2, hbar=0.5)
obs = {
    "phi": field_observable(g, [0.7], 0.0),
    "pi": field_velocity_observable(g, [0.7], 0.0),
    "H": hamiltonian(g),
    "P": momentum_observable(g)[0],
}
print()
print("[O_f, O_g] + i hbar O_{f,g} on the cutoff-interior block:")
for (nf, f), (ng, h) in itertools.combinations(obs.items(), 2):
    lhs = quantize_observable(space, f).commutator(quantize_observable(space, h)).subblock()
    rhs = -1j * space.hbar * quantize_observable(space, poisson_bracket(f, h)).subblock()
    print(f"  {nf:>3}, {ng:<3} {np.max(np.abs(lhs - rhs)):.1e}")

r = quantum_commutator_check(space, [1.3, 0.2], [0.1, 2.9])
print()
print("[phi(x), phi(y)] = -i hbar Delta:", r.scalar, " hbar * Delta =", space.hbar * r.delta_mode_sum)
