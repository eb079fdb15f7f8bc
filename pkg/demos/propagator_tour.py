"""
Pauli-Jordan function three ways: lattice mode sum, continuum quadrature and
the closed form J0(m sqrt(t^2 - x^2)) / 2 in one space dimension.

Run:  python demos/propagator_tour.py
"""
import numpy as np
from scipy.special import j0

from covquant.modespace import make_grid
from covquant.propagator import commutator_distribution, pauli_jordan_mode_sum

m = 1.0

# inside the cone the three agree up to the lattice cutoff
print(f"{'t':>5} {'x':>5} {'mode sum':>12} {'quadrature':>12} {'J0/2':>12}")
g = make_grid(1, 4096, 400.0, m)
for t, x in [(1.0, 0.0), (2.0, 0.5), (3.0, 2.9), (0.1, 2.0)]:
    ms = pauli_jordan_mode_sum(g, [t, x])
    q = commutator_distribution(m, 1, [t, x], [0.0, 0.0]).value
    s2 = t * t - x * x
    exact = 0.5 * j0(m * np.sqrt(s2)) if s2 > 0 else 0.0
    print(f"{t:5.2f} {x:5.2f} {ms:12.8f} {q:12.8f} {exact:12.8f}")

# the lattice sum stops at the Nyquist momentum K = pi N / L; the missing tail
# oscillates like cos(K t) / (pi K t) and dominates the gap at t = 1
print()
print(f"{'N':>6} {'K':>8} {'mode sum - J0(1)/2':>20} {'1/(pi K)':>10}")
for N in [256, 1024, 4096, 16384, 65536]:
    g = make_grid(1, N, 400.0, m)
    K = np.pi * N / 400.0
    print(f"{N:6d} {K:8.2f} {pauli_jordan_mode_sum(g, [1.0, 0.0]) - j0(1.0) / 2:20.3e} {1 / (np.pi * K):10.2e}")
