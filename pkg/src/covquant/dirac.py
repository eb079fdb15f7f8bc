"""
Free Dirac field: gamma matrices, plane-wave spinors, the graded bracket on
linear fermionic observables and the anticommutator distribution.

Amplitudes are rescaled like the scalar ones, so every contraction is a
Kronecker delta.  On a 1-D grid the momentum is embedded along the third axis.
The classical odd generators are never represented symbolically: a linear
observable is the list of its coefficients on ``a, a*, b, b*``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .modespace import ModeGrid
from .propagator import PropagatorValue, SpacetimePoint, commutator_distribution, pauli_jordan_mode_sum

_SIGMA = np.array(
    [
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)
ETA = np.diag([1.0, -1.0, -1.0, -1.0])
MAX_FERMION_MODES = 12


@dataclass(frozen=True, eq=False)
class GammaSet:
    """``gamma^mu`` in the Dirac representation, shape (4, 4, 4)."""

    matrices: np.ndarray

    def __getitem__(self, mu: int) -> np.ndarray:
        return self.matrices[mu]

    def slash(self, p_lower) -> np.ndarray:
        """``gamma^mu p_mu``."""
        return np.tensordot(np.asarray(p_lower, dtype=complex), self.matrices, axes=1)

    def clifford_residual(self) -> float:
        g = self.matrices
        worst = 0.0
        for mu in range(4):
            for nu in range(4):
                anti = g[mu] @ g[nu] + g[nu] @ g[mu]
                worst = max(worst, float(np.max(np.abs(anti - 2 * ETA[mu, nu] * np.eye(4)))))
        return worst


def dirac_gammas() -> GammaSet:
    g = np.zeros((4, 4, 4), dtype=complex)
    g[0] = np.diag([1, 1, -1, -1])
    for i in range(3):
        g[i + 1, :2, 2:] = _SIGMA[i]
        g[i + 1, 2:, :2] = -_SIGMA[i]
    return GammaSet(g)


def _embed_momentum(p) -> np.ndarray:
    p = np.atleast_1d(np.asarray(p, dtype=float))
    if p.shape == (1,):
        return np.array([0.0, 0.0, p[0]])
    if p.shape == (3,):
        return p
    raise ValueError(f"momentum must have 1 or 3 components, got {p.shape}")


@dataclass(frozen=True, eq=False)
class SpinorBasis:
    """``u_i(p), v_i(p)`` for spins ``i = 1, 2`` (rows), with ``E_p``."""

    momentum: np.ndarray
    mass: float
    energy: float
    u: np.ndarray
    v: np.ndarray

    def bar(self, spinor: np.ndarray, gammas: GammaSet | None = None) -> np.ndarray:
        g0 = (gammas or dirac_gammas())[0]
        return spinor.conj() @ g0

    @property
    def p_lower(self) -> np.ndarray:
        return np.concatenate([[self.energy], -self.momentum])


def build_spinors(p, m: float, gammas: GammaSet | None = None) -> SpinorBasis:
    """Spin up/down along axis 3 in the rest frame, boosted to ``p``; ``u^dagger u = 2E``."""
    if not m > 0:
        raise ValueError(f"spinors need a positive mass, got {m}")
    p3 = _embed_momentum(p)
    E = math.sqrt(float(p3 @ p3) + m * m)
    sp = np.tensordot(p3, _SIGMA, axes=1)
    root = math.sqrt(E + m)
    chi = np.eye(2, dtype=complex)
    u = np.hstack([root * chi, (sp @ chi).T / root])
    v = np.hstack([(sp @ chi).T / root, root * chi])
    for arr in (u, v):
        arr.setflags(write=False)
    return SpinorBasis(p3, float(m), E, u, v)


def spinor_residuals(basis: SpinorBasis, gammas: GammaSet | None = None) -> dict[str, float]:
    """Normalization and Dirac-equation residuals for one spinor basis."""
    g = gammas or dirac_gammas()
    pslash = g.slash(basis.p_lower)
    eye = np.eye(4)
    two_e = 2 * basis.energy * np.eye(2)
    return {
        "norm_u": float(np.max(np.abs(basis.u.conj() @ basis.u.T - two_e))),
        "norm_v": float(np.max(np.abs(basis.v.conj() @ basis.v.T - two_e))),
        "dirac_u": float(np.max(np.abs((pslash - basis.mass * eye) @ basis.u.T))),
        "dirac_v": float(np.max(np.abs((pslash + basis.mass * eye) @ basis.v.T))),
    }


def _check_dirac_grid(grid: ModeGrid):
    if grid.mass <= 0:
        raise ValueError("Dirac grids need a positive mass")
    if grid.dimension not in (1, 3):
        raise ValueError("Dirac grids must be one or three dimensional")


def spinor_table(grid: ModeGrid) -> tuple[np.ndarray, np.ndarray]:
    """``u``, ``v`` for every grid mode, each of shape (M, 2, 4)."""
    _check_dirac_grid(grid)
    u = np.empty((grid.size, 2, 4), dtype=complex)
    v = np.empty((grid.size, 2, 4), dtype=complex)
    for j, p in enumerate(grid.momenta):
        b = build_spinors(p, grid.mass)
        u[j], v[j] = b.u, b.v
    return u, v


@dataclass(frozen=True, eq=False)
class FermionLinear:
    """Odd linear observable ``sum a_coef.a + astar_coef.a* + b_coef.b + bstar_coef.b*``.

    Each coefficient array has shape (M, 2): mode, then spin.
    """

    grid: ModeGrid
    a: np.ndarray
    astar: np.ndarray
    b: np.ndarray
    bstar: np.ndarray
    parity: str = "odd"

    def __post_init__(self):
        for name in ("a", "astar", "b", "bstar"):
            arr = np.array(getattr(self, name), dtype=complex)
            if arr.shape != (self.grid.size, 2):
                raise ValueError(f"{name}: expected shape ({self.grid.size}, 2), got {arr.shape}")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.parity not in ("odd", "even"):
            raise ValueError("parity must be 'odd' or 'even'")

    @classmethod
    def generator(cls, grid: ModeGrid, kind: str, mode: int, spin: int) -> "FermionLinear":
        """A single coordinate function, e.g. ``generator(grid, 'astar', j, 0)``."""
        parts = {k: np.zeros((grid.size, 2), dtype=complex) for k in ("a", "astar", "b", "bstar")}
        if kind not in parts:
            raise ValueError(f"unknown generator {kind!r}")
        parts[kind][mode, spin] = 1.0
        return cls(grid, **parts)


def _mode_phases(grid: ModeGrid, p) -> tuple[np.ndarray, np.ndarray]:
    p = SpacetimePoint.of(p)
    if p.dimension != grid.dimension:
        raise ValueError(f"point has {p.dimension} spatial components, grid has {grid.dimension}")
    phase = grid.energies * p.t - grid.momenta @ np.asarray(p.x)
    norm = 1.0 / np.sqrt(2.0 * grid.energies * grid.volume)
    return np.exp(-1j * phase) * norm, np.exp(1j * phase) * norm


def psi_component(grid: ModeGrid, x, alpha: int) -> FermionLinear:
    """``psi_alpha(x) = sum (2 E V)^-1/2 (e^{-ipx} a_i u_i + e^{ipx} b*_i v_i)_alpha``."""
    _check_dirac_grid(grid)
    u, v = spinor_table(grid)
    neg, pos = _mode_phases(grid, x)
    zero = np.zeros((grid.size, 2))
    return FermionLinear(grid, neg[:, None] * u[:, :, alpha], zero, zero, pos[:, None] * v[:, :, alpha])


def psibar_component(grid: ModeGrid, y, beta: int) -> FermionLinear:
    """``psibar_beta(y) = sum (2 E V)^-1/2 (e^{ipy} a*_i ubar_i + e^{-ipy} b_i vbar_i)_beta``."""
    _check_dirac_grid(grid)
    u, v = spinor_table(grid)
    g0 = dirac_gammas()[0]
    ubar = u.conj() @ g0
    vbar = v.conj() @ g0
    neg, pos = _mode_phases(grid, y)
    zero = np.zeros((grid.size, 2))
    return FermionLinear(grid, zero, pos[:, None] * ubar[:, :, beta], neg[:, None] * vbar[:, :, beta], zero)


def graded_bracket(F: FermionLinear, G: FermionLinear) -> complex:
    """Symmetric contraction with ``{a, a*} = {b, b*} = i`` per mode and spin (rescaled amplitudes).

    In continuum normalization the basis contractions are ``i delta / dk``.
    """
    if F.grid != G.grid:
        raise ValueError("observables live on different grids")
    if F.parity != "odd" or G.parity != "odd":
        raise ValueError("graded bracket is defined here for odd (linear) observables only")
    s = np.sum(F.a * G.astar + F.astar * G.a + F.b * G.bstar + F.bstar * G.b)
    return complex(1j * s)


def continuum_contraction(grid: ModeGrid, kind1: str, kind2: str) -> complex:
    """Basis bracket of two generators at the same mode and spin, in continuum normalization."""
    F = FermionLinear.generator(grid, kind1, 0, 0)
    G = FermionLinear.generator(grid, kind2, 0, 0)
    return graded_bracket(F, G) / grid.cell_volume


def fermionic_symplectic(d1: FermionLinear, d2: FermionLinear) -> complex:
    """``sum (d1 a* d2 a + d1 b* d2 b) + (1 <-> 2)``; tangents use the same coefficient layout."""
    if d1.grid != d2.grid:
        raise ValueError("tangents live on different grids")
    one = np.sum(d1.astar * d2.a + d1.bstar * d2.b)
    two = np.sum(d2.astar * d1.a + d2.bstar * d1.b)
    return complex(one + two)


def mode_sum_anticommutator(grid: ModeGrid, x, y) -> np.ndarray:
    """``{psi_alpha(x), psibar_beta(y)}`` assembled from the graded bracket, 4x4."""
    out = np.empty((4, 4), dtype=complex)
    psis = [psi_component(grid, x, a) for a in range(4)]
    bars = [psibar_component(grid, y, b) for b in range(4)]
    for a in range(4):
        for b in range(4):
            out[a, b] = graded_bracket(psis[a], bars[b])
    return out


def _spatial_axes(d: int) -> list[int]:
    # gamma index paired with each spatial coordinate of the grid
    return [3] if d == 1 else [1, 2, 3]


@dataclass
class AnticommutatorResult:
    matrix: np.ndarray
    error: float


def dirac_anticommutator(
    m: float,
    x,
    y,
    h: float = 1e-4,
    method: str = "quadrature",
    grid: ModeGrid | None = None,
    tol: float = 1e-12,
) -> AnticommutatorResult:
    """``i (i gamma^mu d_mu + m) (D(x - y) - D(y - x))`` by central differences.

    The scalar ``D(r) - D(-r) = -i Delta(r)`` comes from the continuum
    quadrature (``method='quadrature'``) or from the lattice mode sum on
    ``grid`` (``method='mode_sum'``).  The error bound combines the scalar's
    quadrature estimate amplified by ``1/h`` and is zero for the mode sum
    apart from the finite-difference truncation, which is not estimated.
    """
    if not m > 0:
        raise ValueError("Dirac anticommutator needs a positive mass")
    x, y = SpacetimePoint.of(x), SpacetimePoint.of(y)
    d = x.dimension
    if method == "mode_sum":
        if grid is None:
            raise ValueError("mode_sum needs a grid")
        if grid.mass != m or grid.dimension != d:
            raise ValueError("grid mass or dimension does not match")

        def delta(p):
            return PropagatorValue(pauli_jordan_mode_sum(grid, p), 0.0)

    elif method == "quadrature":

        def delta(p):
            return commutator_distribution(m, d, p, np.zeros(d + 1), tol=tol)

    else:
        raise ValueError(f"unknown method {method!r}")

    r = np.concatenate([[x.t - y.t], np.subtract(x.x, y.x)])
    centre = delta(r)
    grads = []
    err = centre.error * m
    for axis in range(d + 1):
        step = np.zeros(d + 1)
        step[axis] = h
        fwd, bwd = delta(r + step), delta(r - step)
        grads.append((fwd.value - bwd.value) / (2 * h))
        err += (fwd.error + bwd.error) / (2 * h)
    g = dirac_gammas()
    # i (i gamma^mu d_mu + m)(-i Delta) = (i gamma^mu d_mu + m) Delta
    M = m * centre.value * np.eye(4, dtype=complex) + 1j * grads[0] * g[0]
    for grad, mu in zip(grads[1:], _spatial_axes(d)):
        M = M + 1j * grad * g[mu]
    return AnticommutatorResult(M, float(err))


def anticommutator_rows(result: AnticommutatorResult, x, y) -> list[tuple]:
    """CSV rows ``(t, x, alpha, beta, re, im, est_error)`` with x relative and space separated."""
    x, y = SpacetimePoint.of(x), SpacetimePoint.of(y)
    t = x.t - y.t
    rel = " ".join(f"{a - b:.17g}" for a, b in zip(x.x, y.x))
    return [
        (t, rel, a, b, result.matrix[a, b].real, result.matrix[a, b].imag, result.error)
        for a in range(4)
        for b in range(4)
    ]


def fermionic_operators(n: int) -> list[sparse.csr_array]:
    """Annihilators ``b_0..b_{n-1}`` on ``2^n`` states with Jordan-Wigner strings.

    Basis states are bit strings with mode 0 most significant; entries are
    0 and +-1, so all anticommutators come out exact.
    """
    if int(n) != n or n < 1:
        raise ValueError(f"need a positive number of modes, got {n}")
    if n > MAX_FERMION_MODES:
        raise ValueError(f"at most {MAX_FERMION_MODES} fermionic modes (2^n matrices), got {n}")
    lower = sparse.csr_array(np.array([[0.0, 1.0], [0.0, 0.0]]))
    parity = sparse.csr_array(np.diag([1.0, -1.0]))
    eye = sparse.identity(2, format="csr")
    ops = []
    for j in range(n):
        out = sparse.csr_array(np.ones((1, 1)))
        for k in range(n):
            factor = parity if k < j else lower if k == j else eye
            out = sparse.kron(out, factor, format="csr")
        ops.append(sparse.csr_array(out))
    return ops


@dataclass(frozen=True)
class FermionSlot:
    kind: str  # 'a' particle or 'b' antiparticle
    mode: int
    spin: int

    def __post_init__(self):
        if self.kind not in ("a", "b") or self.spin not in (0, 1):
            raise ValueError(f"bad fermion slot {self}")


def dirac_hamiltonian_operator(grid: ModeGrid, slots, hbar: float = 1.0) -> sparse.csr_array:
    """``sum_slots hbar E_p b^dagger b`` on the ``2^n`` space of the given slots (diagonal)."""
    _check_dirac_grid(grid)
    slots = [s if isinstance(s, FermionSlot) else FermionSlot(*s) for s in slots]
    ops = fermionic_operators(len(slots))
    diag = np.zeros(2 ** len(slots))
    for slot, b in zip(slots, ops):
        number = (b.T @ b).diagonal()
        diag = diag + hbar * grid.energies[slot.mode] * number
    return sparse.diags_array(diag).tocsr()
