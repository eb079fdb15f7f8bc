"""
Symplectic form, Hamiltonian vector fields and Poisson brackets in ladder coordinates.

Conventions (all exact on coefficients):

* ``omega(d1, d2) = i sum_k (d1 a*_k d2 a_k - d2 a*_k d1 a_k)``
* ``i_{X_f} omega = -df``, so ``X_f = i sum_k (df/da_k d/da*_k - df/da*_k d/da_k)``
* ``{f, g} = omega(X_f, X_g) = X_f g``, giving ``{a*_k, a_k'} = -i delta_kk'``
* time evolution ``df/dt = {H, f}``, i.e. ``a_k(t) = a_k exp(-i eps_k t)``

``a`` and ``a*`` are treated as independent (holomorphic / antiholomorphic)
coordinates when differentiating.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy import sparse

from .modespace import ModeGrid, ModeState, TangentVector

_HERMITIAN_RTOL = 1e-12


def _as_sparse(A, n: int):
    if A is None:
        return sparse.csr_array((n, n), dtype=complex)
    A = sparse.csr_array(A, dtype=complex)
    if A.shape != (n, n):
        raise ValueError(f"bilinear coefficients must be {n}x{n}, got {A.shape}")
    A.eliminate_zeros()
    return A


@dataclass(frozen=True, eq=False)
class Observable:
    """``c + sum u_k a_k + sum v_k a*_k + sum A_kk' a*_k a_k'`` on one grid.

    Terms ``a a`` and ``a* a*`` are not representable, which keeps every
    bracket of two observables inside the class.
    """

    grid: ModeGrid
    constant: complex = 0.0
    linear_a: np.ndarray | None = None
    linear_astar: np.ndarray | None = None
    bilinear: sparse.csr_array | None = None
    hermitian: bool = False

    def __post_init__(self):
        n = self.grid.size
        for name in ("linear_a", "linear_astar"):
            v = getattr(self, name)
            v = np.zeros(n, dtype=complex) if v is None else np.array(v, dtype=complex)
            if v.shape != (n,):
                raise ValueError(f"{name}: expected {n} coefficients, got shape {v.shape}")
            v.setflags(write=False)
            object.__setattr__(self, name, v)
        object.__setattr__(self, "bilinear", _as_sparse(self.bilinear, n))
        object.__setattr__(self, "constant", complex(self.constant))
        if self.hermitian:
            self._check_hermitian()

    def _check_hermitian(self):
        scale = max(
            1.0,
            abs(self.constant),
            np.max(np.abs(self.linear_a), initial=0.0),
            abs(self.bilinear).max() if self.bilinear.nnz else 0.0,
        )
        tol = _HERMITIAN_RTOL * scale
        if abs(self.constant.imag) > tol:
            raise ValueError("hermitian observable needs a real constant")
        if np.max(np.abs(self.linear_astar - np.conj(self.linear_a)), initial=0.0) > tol:
            raise ValueError("hermitian observable needs linear_astar == conj(linear_a)")
        skew = self.bilinear - self.bilinear.conj().T
        if skew.nnz and abs(skew).max() > tol:
            raise ValueError("hermitian observable needs a Hermitian bilinear matrix")

    @property
    def degree(self) -> int:
        if self.bilinear.nnz:
            return 2
        if np.any(self.linear_a) or np.any(self.linear_astar):
            return 1
        return 0

    def _combine(self, other: "Observable", alpha: complex, beta: complex) -> "Observable":
        if other.grid != self.grid:
            raise ValueError("observables live on different grids")
        herm = self.hermitian and other.hermitian and complex(alpha).imag == 0 and complex(beta).imag == 0
        return Observable(
            self.grid,
            alpha * self.constant + beta * other.constant,
            alpha * self.linear_a + beta * other.linear_a,
            alpha * self.linear_astar + beta * other.linear_astar,
            alpha * self.bilinear + beta * other.bilinear,
            hermitian=herm,
        )

    def __add__(self, other: "Observable") -> "Observable":
        return self._combine(other, 1.0, 1.0)

    def __sub__(self, other: "Observable") -> "Observable":
        return self._combine(other, 1.0, -1.0)

    def __mul__(self, alpha: complex) -> "Observable":
        return self._combine(self, alpha, 0.0)

    __rmul__ = __mul__

    def __neg__(self) -> "Observable":
        return self * -1.0

    def coefficient_distance(self, other: "Observable") -> float:
        """Max absolute difference over all coefficients."""
        diff = self - other
        parts = [abs(diff.constant), np.max(np.abs(diff.linear_a)), np.max(np.abs(diff.linear_astar))]
        if diff.bilinear.nnz:
            parts.append(abs(diff.bilinear).max())
        return float(max(parts))

    def to_record(self) -> str:
        """JSON text: constant, sparse linear maps and bilinear triplets (repr floats round-trip)."""

        def linear(v):
            idx = np.flatnonzero(v)
            return [[int(i), float(v[i].real), float(v[i].imag)] for i in idx]

        coo = self.bilinear.tocoo()
        triplets = sorted(
            [int(i), int(j), float(z.real), float(z.imag)] for i, j, z in zip(coo.row, coo.col, coo.data)
        )
        payload = {
            "grid": {
                "dimension": self.grid.dimension,
                "sites_per_axis": self.grid.sites_per_axis,
                "box_length": self.grid.box_length,
                "mass": self.grid.mass,
            },
            "constant": [self.constant.real, self.constant.imag],
            "linear_a": linear(self.linear_a),
            "linear_astar": linear(self.linear_astar),
            "bilinear": triplets,
            "hermitian": self.hermitian,
        }
        return json.dumps(payload, indent=1)

    @classmethod
    def from_record(cls, text: str) -> "Observable":
        payload = json.loads(text)
        grid = ModeGrid(**payload["grid"])
        n = grid.size

        def linear(entries):
            v = np.zeros(n, dtype=complex)
            for i, re, im in entries:
                v[i] = complex(re, im)
            return v

        trip = payload["bilinear"]
        if trip:
            rows, cols, re, im = (np.array(col) for col in zip(*trip))
            A = sparse.coo_array((re + 1j * im, (rows.astype(int), cols.astype(int))), shape=(n, n))
        else:
            A = None
        return cls(
            grid,
            complex(*payload["constant"]),
            linear(payload["linear_a"]),
            linear(payload["linear_astar"]),
            A,
            hermitian=payload["hermitian"],
        )


def _same_grid(*objs):
    grid = objs[0].grid
    for o in objs[1:]:
        if o.grid != grid:
            raise ValueError("arguments live on different grids")
    return grid


def evaluate(f: Observable, s: ModeState) -> complex:
    _same_grid(f, s)
    a = s.amplitudes
    astar = np.conj(a)
    return complex(f.constant + f.linear_a @ a + f.linear_astar @ astar + astar @ (f.bilinear @ a))


def gradients(f: Observable, s: ModeState) -> tuple[np.ndarray, np.ndarray]:
    """``(df/da_k, df/da*_k)`` at ``s``."""
    _same_grid(f, s)
    a = s.amplitudes
    d_a = f.linear_a + f.bilinear.T @ np.conj(a)
    d_astar = f.linear_astar + f.bilinear @ a
    return d_a, d_astar


def symplectic_eval(d1: TangentVector, d2: TangentVector) -> complex:
    _same_grid(d1, d2)
    return complex(1j * (d1.d_astar @ d2.d_a - d2.d_astar @ d1.d_a))


def hamiltonian_vector_field(f: Observable, s: ModeState) -> TangentVector:
    """``X_f`` at ``s``: components ``delta a = -i df/da*``, ``delta a* = i df/da``."""
    d_a, d_astar = gradients(f, s)
    return TangentVector(s.grid, -1j * d_astar, 1j * d_a)


def poisson_bracket(f: Observable, g: Observable) -> Observable:
    """``{f, g} = i sum_k (df/da_k dg/da*_k - df/da*_k dg/da_k)`` on coefficients."""
    grid = _same_grid(f, g)
    A, B = f.bilinear, g.bilinear
    constant = 1j * (f.linear_a @ g.linear_astar - f.linear_astar @ g.linear_a)
    linear_a = 1j * (B.T @ f.linear_a - A.T @ g.linear_a)
    linear_astar = 1j * (A @ g.linear_astar - B @ f.linear_astar)
    bilinear = 1j * (A @ B - B @ A)
    return Observable(grid, constant, linear_a, linear_astar, bilinear, hermitian=f.hermitian and g.hermitian)


def evolve(s: ModeState, t: float) -> ModeState:
    """Exact Hamiltonian flow ``a_k -> a_k exp(-i eps_k t)``."""
    return ModeState(s.grid, s.amplitudes * np.exp(-1j * s.grid.energies * t))


def hamiltonian(grid: ModeGrid) -> Observable:
    """``H = sum_k eps_k a*_k a_k``."""
    return Observable(grid, bilinear=sparse.diags_array(grid.energies.astype(complex)).tocsr(), hermitian=True)


def momentum_observable(grid: ModeGrid) -> tuple[Observable, ...]:
    """``P_axis = sum_k k_axis a*_k a_k``, one observable per spatial axis."""
    return tuple(
        Observable(grid, bilinear=sparse.diags_array(grid.momenta[:, axis].astype(complex)).tocsr(), hermitian=True)
        for axis in range(grid.dimension)
    )


def _field_coefficients(grid: ModeGrid, x, t: float) -> np.ndarray:
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if x.shape != (grid.dimension,):
        raise ValueError(f"point must have {grid.dimension} spatial components")
    phase = grid.energies * t - grid.momenta @ x
    return np.exp(-1j * phase) / np.sqrt(2.0 * grid.energies * grid.volume)


def field_observable(grid: ModeGrid, x, t: float = 0.0) -> Observable:
    """The evaluation functional ``phi(t, x)``."""
    u = _field_coefficients(grid, x, t)
    return Observable(grid, 0.0, u, np.conj(u), hermitian=True)


def field_velocity_observable(grid: ModeGrid, x, t: float = 0.0) -> Observable:
    """The functional ``pi(t, x) = d phi / dt``."""
    u = -1j * grid.energies * _field_coefficients(grid, x, t)
    return Observable(grid, 0.0, u, np.conj(u), hermitian=True)


def ladder_observable(grid: ModeGrid, index: int, conjugate: bool = False) -> Observable:
    """The coordinate function ``a_index`` (or ``a*_index``)."""
    e = np.zeros(grid.size, dtype=complex)
    e[index] = 1.0
    if conjugate:
        return Observable(grid, linear_astar=e)
    return Observable(grid, linear_a=e)


def jacobi_residual(f: Observable, g: Observable, h: Observable) -> float:
    """Largest coefficient of ``{f, {g, h}} + {g, {h, f}} + {h, {f, g}}``."""
    total = poisson_bracket(f, poisson_bracket(g, h)) + poisson_bracket(g, poisson_bracket(h, f))
    total = total + poisson_bracket(h, poisson_bracket(f, g))
    return total.coefficient_distance(Observable(f.grid))


def random_observable(grid: ModeGrid, rng: np.random.Generator, degree: int = 1, density: float = 0.3) -> Observable:
    """Random Hermitian observable of the given degree (sparse bilinear part when degree is 2)."""
    n = grid.size
    u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    c = float(rng.standard_normal())
    A = None
    if degree >= 2:
        B = sparse.random_array((n, n), density=density, rng=rng) + 1j * sparse.random_array((n, n), density=density, rng=rng)
        A = (B + B.conj().T).tocsr()
    elif degree < 1:
        u = np.zeros(n)
    return Observable(grid, c, u, np.conj(u), A, hermitian=True)
