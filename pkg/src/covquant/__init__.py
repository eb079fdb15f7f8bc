"""
Covariant phase-space quantization of free fields on a periodic lattice.

Modules
-------
modespace   mode grids, amplitudes, tangents and field evaluation
symplectic  quadratic observables, Poisson brackets, Hamiltonian flow
propagator  Pauli-Jordan function (mode sum and quadrature), slice integrals
quantize    Bargmann-Fock operators, spectra and commutator checks
maxwell     Lorenz-constrained photon amplitudes and the degenerate form
dirac       spinors, graded bracket, anticommutator, fermionic operators
cli         ``covquant`` command-line reports
"""

__version__ = "0.1.0"
