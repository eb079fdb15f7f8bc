"""
Bargmann-Fock quantization on a truncated set of modes.

Wave functionals are polynomials in the holomorphic coordinates ``a*``; the
normalized monomials ``prod (a*_k)^n_k / sqrt(n_k! hbar^n_k)`` form the
occupation basis.  Annihilation acts as ``hbar d/da*`` and creation as
multiplication by ``a*``.  An observable ``c + u.a + v.a* + a*.A.a`` maps to

    c + u.a_hat + v.a_hat^dagger + sum A_kk' a_hat^dagger_k a_hat_k' + (hbar/2) tr A,

the trace term being the half-form correction ``-i hbar/2 sum_k n0(k, k) dk``.
Operator identities hold exactly only on the sub-block where every occupation
is below the cutoff.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .modespace import ModeGrid
from .propagator import SpacetimePoint, pauli_jordan_mode_sum
from .symplectic import Observable, field_observable, hamiltonian, poisson_bracket

_HERMITIAN_RTOL = 1e-12


class FockSpace:
    """Occupation basis over ``modes`` (grid indices), each occupation ``0..cutoff``.

    Multi-indices are listed lexicographically with the first mode most
    significant, which matches Kronecker products taken in mode order.
    """

    def __init__(self, grid: ModeGrid, modes, cutoff: int, hbar: float = 1.0):
        if int(cutoff) != cutoff or cutoff < 1:
            raise ValueError(f"cutoff must be a positive integer, got {cutoff}")
        if not hbar > 0:
            raise ValueError(f"hbar must be positive, got {hbar}")
        indices = []
        for m in modes:
            idx = int(m) if np.ndim(m) == 0 and isinstance(m, (int, np.integer)) else grid.mode_index(m)
            if not 0 <= idx < grid.size:
                raise KeyError(f"mode index {idx} outside grid of {grid.size} modes")
            indices.append(idx)
        if not indices:
            raise ValueError("need at least one mode")
        if len(set(indices)) != len(indices):
            raise ValueError("modes must be distinct")
        self.grid = grid
        self.modes = tuple(indices)
        self.cutoff = int(cutoff)
        self.hbar = float(hbar)
        self.basis = tuple(itertools.product(range(self.cutoff + 1), repeat=len(self.modes)))
        self._position = {n: i for i, n in enumerate(self.basis)}

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def energies(self) -> np.ndarray:
        return self.grid.energies[list(self.modes)]

    def index(self, occupations) -> int:
        key = tuple(int(n) for n in occupations)
        if key not in self._position:
            raise KeyError(f"occupation {key} not in the truncated basis")
        return self._position[key]

    def slot(self, mode) -> int:
        """Position of a grid mode index within ``modes``."""
        try:
            return self.modes.index(int(mode))
        except ValueError:
            raise KeyError(f"mode {mode} is not one of the quantized modes {self.modes}") from None

    def subblock_indices(self) -> np.ndarray:
        """Basis positions with every occupation below the cutoff."""
        return np.array([i for i, n in enumerate(self.basis) if max(n) < self.cutoff], dtype=int)

    def identity(self) -> sparse.csr_array:
        return sparse.identity(self.dim, dtype=complex, format="csr")

    def __eq__(self, other):
        return (
            isinstance(other, FockSpace)
            and self.grid == other.grid
            and self.modes == other.modes
            and self.cutoff == other.cutoff
            and self.hbar == other.hbar
        )

    def __hash__(self):
        return hash((self.grid, self.modes, self.cutoff, self.hbar))

    def __repr__(self):
        return f"FockSpace(modes={self.modes}, cutoff={self.cutoff}, hbar={self.hbar}, dim={self.dim})"


@dataclass(frozen=True, eq=False)
class FockOperator:
    space: FockSpace
    matrix: sparse.csr_array
    hermitian: bool = False
    zero_point: float = 0.0

    def __post_init__(self):
        M = sparse.csr_array(self.matrix, dtype=complex)
        if M.shape != (self.space.dim, self.space.dim):
            raise ValueError(f"matrix shape {M.shape} does not match space dimension {self.space.dim}")
        M.eliminate_zeros()
        object.__setattr__(self, "matrix", M)
        if self.hermitian:
            skew = M - M.conj().T
            scale = max(1.0, abs(M).max() if M.nnz else 0.0)
            if skew.nnz and abs(skew).max() > _HERMITIAN_RTOL * scale:
                raise ValueError("operator flagged Hermitian is not")

    @property
    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def dagger(self) -> "FockOperator":
        return FockOperator(self.space, self.matrix.conj().T.tocsr(), self.hermitian, np.conj(self.zero_point))

    def _check(self, other: "FockOperator"):
        if other.space != self.space:
            raise ValueError("operators act on different Fock spaces")

    def __add__(self, other: "FockOperator") -> "FockOperator":
        self._check(other)
        return FockOperator(self.space, self.matrix + other.matrix, False, self.zero_point + other.zero_point)

    def __sub__(self, other: "FockOperator") -> "FockOperator":
        self._check(other)
        return FockOperator(self.space, self.matrix - other.matrix, False, self.zero_point - other.zero_point)

    def __mul__(self, alpha: complex) -> "FockOperator":
        return FockOperator(self.space, alpha * self.matrix, False, alpha * self.zero_point)

    __rmul__ = __mul__

    def __matmul__(self, other: "FockOperator") -> "FockOperator":
        self._check(other)
        return FockOperator(self.space, (self.matrix @ other.matrix).tocsr())

    def commutator(self, other: "FockOperator") -> "FockOperator":
        self._check(other)
        AB = self.matrix @ other.matrix
        BA = other.matrix @ self.matrix
        return FockOperator(self.space, (AB - BA).tocsr())

    def subblock(self) -> np.ndarray:
        """Dense restriction to the cutoff-interior sub-block."""
        idx = self.space.subblock_indices()
        return self.matrix[idx][:, idx].toarray()

    def apply(self, psi: "WaveFunctional") -> "WaveFunctional":
        if psi.space != self.space:
            raise ValueError("wave functional lives on a different Fock space")
        return WaveFunctional(self.space, self.matrix @ psi.coefficients)

    def expectation(self, psi: "WaveFunctional") -> complex:
        return bargmann_inner_product(psi, self.apply(psi))


def _single_mode_lowering(cutoff: int, hbar: float) -> sparse.csr_array:
    n = np.arange(1, cutoff + 1)
    return sparse.diags_array(np.sqrt(hbar * n).astype(complex), offsets=1, shape=(cutoff + 1, cutoff + 1)).tocsr()


def _embed(space: FockSpace, slot: int, single: sparse.csr_array) -> sparse.csr_array:
    eye = sparse.identity(space.cutoff + 1, dtype=complex, format="csr")
    out = None
    for j in range(len(space.modes)):
        factor = single if j == slot else eye
        out = factor if out is None else sparse.kron(out, factor, format="csr")
    return sparse.csr_array(out)


def ladder_operators(space: FockSpace, mode) -> tuple[FockOperator, FockOperator]:
    """``(a_hat, a_hat^dagger)`` for one grid mode index."""
    slot = space.slot(mode)
    lower = _embed(space, slot, _single_mode_lowering(space.cutoff, space.hbar))
    return FockOperator(space, lower), FockOperator(space, lower.conj().T.tocsr())


def lie_derivative_n0(f: Observable) -> np.ndarray:
    """Kernel ``n0(k, k')`` of ``L_{X_f} delta a*(k) = sum_k' dk n0(k, k') delta a*(k')``.

    With ``f`` bilinear in ``a*.A.a`` the flow gives ``d a*/dt = i A^T a*``;
    dividing by the momentum cell turns the Kronecker delta into the lattice
    delta function.
    """
    return 1j * f.bilinear.T.toarray() / f.grid.cell_volume


def restrict(f: Observable, modes) -> Observable:
    """Drop every coefficient that touches a mode outside ``modes``."""
    keep = np.zeros(f.grid.size, dtype=bool)
    keep[list(modes)] = True
    mask = sparse.diags_array(keep.astype(complex)).tocsr()
    return Observable(
        f.grid,
        f.constant,
        np.where(keep, f.linear_a, 0),
        np.where(keep, f.linear_astar, 0),
        (mask @ f.bilinear @ mask).tocsr(),
        hermitian=f.hermitian,
    )


def quantize_observable(space: FockSpace, f: Observable) -> FockOperator:
    """Operator of a Hermitian observable, restricted to the quantized modes."""
    if f.grid != space.grid:
        raise ValueError("observable and Fock space use different grids")
    if not f.hermitian:
        raise ValueError("only observables flagged Hermitian can be quantized")
    hbar = space.hbar
    modes = list(space.modes)
    lowers = [ladder_operators(space, m) for m in modes]
    M = complex(f.constant) * space.identity()
    for (lo, up), k in zip(lowers, modes):
        if f.linear_a[k]:
            M = M + f.linear_a[k] * lo.matrix
        if f.linear_astar[k]:
            M = M + f.linear_astar[k] * up.matrix
    A = f.bilinear[modes][:, modes].tocoo()
    for i, j, z in zip(A.row, A.col, A.data):
        if i == j:
            # exact number operator; sqrt(n)**2 would round
            M = M + z * _embed(space, i, sparse.diags_array(hbar * np.arange(space.cutoff + 1.0)).tocsr())
        else:
            M = M + z * (lowers[i][1].matrix @ lowers[j][0].matrix)
    # -i hbar/2 sum_k dk n0(k, k) with n0 = i A^T / dk
    zero_point = 0.5 * hbar * float(np.real(A.diagonal().sum()))
    M = M + zero_point * space.identity()
    return FockOperator(space, sparse.csr_array(M), hermitian=True, zero_point=float(zero_point))


def normal_order(op: FockOperator) -> FockOperator:
    """Remove the half-form identity term; idempotent."""
    M = op.matrix - op.zero_point * op.space.identity()
    return FockOperator(op.space, M, op.hermitian, 0.0)


def hamiltonian_spectrum(space: FockSpace, grid: ModeGrid | None = None) -> list[float]:
    """Sorted eigenvalues of the quantized ``H`` (diagonal in the number basis)."""
    if grid is not None and grid != space.grid:
        raise ValueError("grid differs from the Fock space grid")
    H = quantize_observable(space, hamiltonian(space.grid))
    off = H.matrix - sparse.diags_array(H.matrix.diagonal())
    if off.nnz and abs(off).max() > 0:
        raise ArithmeticError("quantized Hamiltonian is not diagonal in the number basis")
    return sorted(float(v) for v in H.matrix.diagonal().real)


def spectrum_rows(space: FockSpace) -> list[tuple[tuple[int, ...], float, float]]:
    """``(multi-index, eigenvalue, normal-ordered eigenvalue)`` in basis order."""
    H = quantize_observable(space, hamiltonian(space.grid))
    diag = H.matrix.diagonal().real
    return [(n, float(e), float(e - H.zero_point)) for n, e in zip(space.basis, diag)]


@dataclass(frozen=True, eq=False)
class WaveFunctional:
    """Holomorphic polynomial ``psi(a*)`` by its coefficients in the normalized monomial basis."""

    space: FockSpace
    coefficients: np.ndarray

    def __post_init__(self):
        c = np.array(self.coefficients, dtype=complex)
        if c.shape != (self.space.dim,):
            raise ValueError(f"expected {self.space.dim} coefficients, got shape {c.shape}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def vacuum(cls, space: FockSpace) -> "WaveFunctional":
        c = np.zeros(space.dim, dtype=complex)
        c[0] = 1.0
        return cls(space, c)

    @classmethod
    def monomial(cls, space: FockSpace, occupations) -> "WaveFunctional":
        """The unnormalized ``prod (a*_k)^n_k``."""
        n = tuple(int(v) for v in occupations)
        c = np.zeros(space.dim, dtype=complex)
        c[space.index(n)] = math.prod(math.sqrt(math.factorial(v) * space.hbar**v) for v in n)
        return cls(space, c)

    def __call__(self, astar) -> complex:
        """Value of the polynomial at holomorphic coordinates ``astar`` (one per mode)."""
        z = np.asarray(astar, dtype=complex)
        if z.shape != (len(self.space.modes),):
            raise ValueError(f"need {len(self.space.modes)} coordinates")
        hbar = self.space.hbar
        total = 0j
        for c, n in zip(self.coefficients, self.space.basis):
            if c:
                total += c * math.prod(z[j] ** v / math.sqrt(math.factorial(v) * hbar**v) for j, v in enumerate(n))
        return complex(total)


def bargmann_inner_product(psi1: WaveFunctional, psi2: WaveFunctional) -> complex:
    """Gaussian-weighted pairing ``<psi1, psi2>``, antilinear in the first slot."""
    if psi1.space != psi2.space:
        raise ValueError("wave functionals live on different Fock spaces")
    return complex(np.vdot(psi1.coefficients, psi2.coefficients))


@dataclass
class CommutatorReport:
    x: SpacetimePoint
    y: SpacetimePoint
    scalar: complex
    residual_norm: float
    subblock_dim: int
    delta_classical: float
    delta_mode_sum: float | None
    hbar: float
    hbar_delta: float = field(init=False)

    def __post_init__(self):
        # [phi(x), phi(y)] = -i hbar Delta, so i * scalar = hbar Delta
        self.hbar_delta = float((1j * self.scalar).real)

    def as_dict(self) -> dict:
        return {
            "scalar_re": self.scalar.real,
            "scalar_im": self.scalar.imag,
            "hbar_delta": self.hbar_delta,
            "delta_classical": self.delta_classical,
            "delta_mode_sum": self.delta_mode_sum if self.delta_mode_sum is not None else float("nan"),
            "residual_norm": self.residual_norm,
            "subblock_dim": self.subblock_dim,
        }


def quantum_commutator_check(space: FockSpace, x, y) -> CommutatorReport:
    """``[O_phi(x), O_phi(y)]`` on the cutoff-interior sub-block versus a multiple of the identity.

    The classical reference is the bracket of the two field functionals
    restricted to the quantized modes; when every grid mode is quantized it is
    also compared with :func:`pauli_jordan_mode_sum`.
    """
    grid = space.grid
    x, y = SpacetimePoint.of(x), SpacetimePoint.of(y)
    fx = restrict(field_observable(grid, x.x, x.t), space.modes)
    fy = restrict(field_observable(grid, y.x, y.t), space.modes)
    C = quantize_observable(space, fx).commutator(quantize_observable(space, fy)).subblock()
    n = C.shape[0]
    scalar = complex(np.trace(C) / n)
    residual = float(np.linalg.norm(C - scalar * np.eye(n)))
    classical = poisson_bracket(fx, fy).constant
    mode_sum = None
    if len(space.modes) == grid.size:
        mode_sum = float(pauli_jordan_mode_sum(grid, x - y))
    return CommutatorReport(x, y, scalar, residual, n, float(classical.real), mode_sum, space.hbar)
