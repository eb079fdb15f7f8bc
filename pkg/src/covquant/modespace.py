"""
Momentum lattice and ladder coordinates for the free scalar field.

A free real scalar in a periodic box of side ``L`` is fixed by one complex
amplitude per lattice momentum.  The amplitudes stored here are rescaled by the
square root of the momentum cell volume, so the field expansion reads

    phi(t, x) = sum_k (2 eps_k V)^(-1/2) (a_k exp(-i(eps_k t - k.x)) + c.c.)

with ``V = L**d`` and ``eps_k = sqrt(k**2 + m**2)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from ._records import dump_record, parse_record


class GridError(ValueError):
    """Invalid lattice parameters."""


@dataclass(frozen=True)
class ModeGrid:
    """Periodic momentum lattice ``k = 2 pi n / L`` with ``n`` in ``[-N/2, N/2)`` per axis.

    The Nyquist plane ``n = -N/2`` is its own mirror image on the position
    lattice, so ``k -> -k`` closes the set modulo the reciprocal lattice.  A
    massless three-dimensional grid drops the ``k = 0`` mode; the dropped
    momentum is listed in :attr:`excluded_modes`.
    """

    dimension: int
    sites_per_axis: int
    box_length: float
    mass: float

    def __post_init__(self):
        d, n, L, m = self.dimension, self.sites_per_axis, self.box_length, self.mass
        if d not in (1, 3):
            raise GridError(f"spatial dimension must be 1 or 3, got {d}")
        if int(n) != n or n < 2:
            raise GridError(f"sites_per_axis must be an integer >= 2, got {n}")
        if n % 2:
            raise GridError(f"sites_per_axis must be even, got {n}")
        if not np.isfinite(L) or L <= 0:
            raise GridError(f"box_length must be positive, got {L}")
        if not np.isfinite(m) or m < 0:
            raise GridError(f"mass must be non-negative, got {m}")
        if d == 1 and m == 0:
            raise GridError("massless 1-D grid rejected: the 1/sqrt(2 eps) weight diverges at k = 0")
        object.__setattr__(self, "sites_per_axis", int(n))
        object.__setattr__(self, "box_length", float(L))
        object.__setattr__(self, "mass", float(m))

    @property
    def mode_spacing(self) -> float:
        return 2.0 * np.pi / self.box_length

    @property
    def cell_volume(self) -> float:
        return self.mode_spacing**self.dimension

    @property
    def volume(self) -> float:
        return self.box_length**self.dimension

    @property
    def lattice_spacing(self) -> float:
        return self.box_length / self.sites_per_axis

    @cached_property
    def _all_integer_modes(self) -> np.ndarray:
        half = self.sites_per_axis // 2
        axis = np.arange(-half, half)
        return np.array(list(itertools.product(axis, repeat=self.dimension)), dtype=int)

    @cached_property
    def _kept(self) -> np.ndarray:
        modes = self._all_integer_modes
        if self.mass == 0:
            return np.any(modes != 0, axis=1)
        return np.ones(len(modes), dtype=bool)

    @cached_property
    def integer_modes(self) -> np.ndarray:
        """Integer labels ``n`` of the retained modes, shape ``(M, d)``."""
        return self._all_integer_modes[self._kept]

    @cached_property
    def lattice_index(self) -> np.ndarray:
        """Flat index of each retained mode in the ``fftshift``-ed ``N**d`` array."""
        return np.flatnonzero(self._kept)

    @cached_property
    def excluded_modes(self) -> list[tuple[int, ...]]:
        return [tuple(int(v) for v in row) for row in self._all_integer_modes[~self._kept]]

    @cached_property
    def momenta(self) -> np.ndarray:
        return self.mode_spacing * self.integer_modes.astype(float)

    @cached_property
    def energies(self) -> np.ndarray:
        return np.sqrt(np.sum(self.momenta**2, axis=1) + self.mass**2)

    @property
    def size(self) -> int:
        return len(self.integer_modes)

    @cached_property
    def _label_lookup(self) -> dict[tuple[int, ...], int]:
        return {tuple(int(v) for v in row): i for i, row in enumerate(self.integer_modes)}

    @cached_property
    def positions(self) -> np.ndarray:
        """Position lattice ``x_j = j L / N``, C-ordered, shape ``(N**d, d)``."""
        axis = np.arange(self.sites_per_axis) * self.lattice_spacing
        grids = np.meshgrid(*([axis] * self.dimension), indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)

    def mode_index(self, k) -> int:
        """Index of momentum ``k`` (scalar for d=1, else a d-vector)."""
        k = np.atleast_1d(np.asarray(k, dtype=float))
        if k.shape != (self.dimension,):
            raise KeyError(f"momentum must have {self.dimension} components, got shape {k.shape}")
        n = k / self.mode_spacing
        label = np.rint(n)
        if np.max(np.abs(n - label)) > 1e-9 * max(1.0, np.max(np.abs(n))):
            raise KeyError(f"momentum {k.tolist()} is not on the lattice")
        try:
            return self._label_lookup[tuple(int(v) for v in label)]
        except KeyError:
            raise KeyError(f"momentum {k.tolist()} is not a mode of this grid") from None

    def negated_index(self) -> np.ndarray:
        """Index of ``-k`` for every mode, with the Nyquist plane mapped onto itself."""
        half = self.sites_per_axis // 2
        neg = -self.integer_modes
        neg[neg == half] = -half
        out = np.empty(self.size, dtype=int)
        for i, row in enumerate(neg):
            out[i] = self._label_lookup[tuple(int(v) for v in row)]
        return out

    def to_record(self) -> str:
        return dump_record(
            {
                "dimension": self.dimension,
                "sites_per_axis": self.sites_per_axis,
                "box_length": self.box_length,
                "mass": self.mass,
            }
        )

    @classmethod
    def from_record(cls, text: str) -> "ModeGrid":
        fields = parse_record(text)
        missing = {"dimension", "sites_per_axis", "box_length", "mass"} - set(fields)
        if missing:
            raise GridError(f"grid record missing keys: {sorted(missing)}")
        return cls(
            dimension=int(fields["dimension"]),
            sites_per_axis=int(fields["sites_per_axis"]),
            box_length=float(fields["box_length"]),
            mass=float(fields["mass"]),
        )


def make_grid(d: int, N: int, L: float, m: float) -> ModeGrid:
    return ModeGrid(dimension=d, sites_per_axis=N, box_length=L, mass=m)


def dispersion(grid: ModeGrid, k) -> float:
    """``sqrt(k**2 + m**2)`` for a lattice momentum ``k``; raises ``KeyError`` off the lattice."""
    return float(grid.energies[grid.mode_index(k)])


@dataclass(frozen=True, eq=False)
class ModeState:
    """A point of solution space: one rescaled complex amplitude per mode."""

    grid: ModeGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        a = np.array(self.amplitudes, dtype=complex)
        if a.shape != (self.grid.size,):
            raise ValueError(f"expected {self.grid.size} amplitudes, got shape {a.shape}")
        a.setflags(write=False)
        object.__setattr__(self, "amplitudes", a)

    @classmethod
    def zeros(cls, grid: ModeGrid) -> "ModeState":
        return cls(grid, np.zeros(grid.size, dtype=complex))

    @classmethod
    def random(cls, grid: ModeGrid, rng: np.random.Generator, scale: float = 1.0) -> "ModeState":
        z = rng.standard_normal(grid.size) + 1j * rng.standard_normal(grid.size)
        return cls(grid, scale * z / np.sqrt(2))


@dataclass(frozen=True, eq=False)
class TangentVector:
    """Linearized displacement ``(delta a_k, delta a*_k)``; the two halves are independent."""

    grid: ModeGrid
    d_a: np.ndarray
    d_astar: np.ndarray

    def __post_init__(self):
        for name in ("d_a", "d_astar"):
            v = np.array(getattr(self, name), dtype=complex)
            if v.shape != (self.grid.size,):
                raise ValueError(f"{name}: expected {self.grid.size} components, got shape {v.shape}")
            v.setflags(write=False)
            object.__setattr__(self, name, v)

    @classmethod
    def unit(cls, grid: ModeGrid, index: int, which: str) -> "TangentVector":
        """Unit displacement along ``delta a_index`` (``which='a'``) or ``delta a*_index``."""
        e = np.zeros(grid.size, dtype=complex)
        e[index] = 1.0
        zero = np.zeros(grid.size, dtype=complex)
        if which == "a":
            return cls(grid, e, zero)
        if which == "astar":
            return cls(grid, zero, e)
        raise ValueError(f"which must be 'a' or 'astar', got {which!r}")

    @classmethod
    def real_displacement(cls, state: ModeState) -> "TangentVector":
        """Displacement along a real field: ``delta a* = conj(delta a)``."""
        a = state.amplitudes
        return cls(state.grid, a, np.conj(a))

    @classmethod
    def random(cls, grid: ModeGrid, rng: np.random.Generator) -> "TangentVector":
        z = rng.standard_normal((4, grid.size))
        return cls(grid, z[0] + 1j * z[1], z[2] + 1j * z[3])

    @classmethod
    def localized(cls, grid: ModeGrid, rng: np.random.Generator, center=None, width: float | None = None) -> "TangentVector":
        """Random displacement whose Cauchy data is a Gaussian packet times random cubics.

        Value and velocity profiles are independent and complex, so ``delta a``
        and ``delta a*`` are unrelated.  ``width`` defaults to ``L / 16``; the
        packet is band limited only up to ``exp(-(k_max width)^2 / 2)``.
        """
        L = grid.box_length
        width = L / 16 if width is None else float(width)
        center = np.full(grid.dimension, 0.5 * L) if center is None else np.broadcast_to(center, (grid.dimension,))
        rel = (grid.positions - center + 0.5 * L) % L - 0.5 * L
        envelope = np.exp(-0.5 * np.sum(rel**2, axis=1) / width**2)
        u = rel / width
        shape = (grid.sites_per_axis,) * grid.dimension

        def profile():
            c = rng.standard_normal((4, grid.dimension))
            poly = c[0, 0] + u @ c[1] + (u**2) @ c[2] + (u**3) @ c[3]
            return (envelope * poly).reshape(shape)

        parts = [modes_from_initial_data(grid, profile(), profile()).amplitudes for _ in range(2)]
        return cls(grid, parts[0] + 1j * parts[1], np.conj(parts[0]) + 1j * np.conj(parts[1]))


def _mode_functions(grid: ModeGrid, x, t) -> np.ndarray:
    """``exp(-i(eps t - k.x)) / sqrt(2 eps V)`` for points ``x`` of shape ``(P, d)``."""
    x = np.asarray(x, dtype=float).reshape(-1, grid.dimension)
    t = np.broadcast_to(np.asarray(t, dtype=float), (x.shape[0],))
    phase = np.outer(t, grid.energies) - x @ grid.momenta.T
    return np.exp(-1j * phase) / np.sqrt(2.0 * grid.energies * grid.volume)


def _squeeze(values: np.ndarray, grid: ModeGrid, x, t):
    # a single (t, x) point gives a plain float
    if np.size(x) == grid.dimension and np.ndim(t) == 0:
        return float(values[0])
    return values


def field_from_modes(grid: ModeGrid, s: ModeState, x, t=0.0):
    """Field value ``phi(t, x)``; ``x`` is one point or an array of points ``(P, d)``."""
    u = _mode_functions(grid, x, t)
    values = u @ s.amplitudes + np.conj(u) @ np.conj(s.amplitudes)
    return _squeeze(values.real, grid, x, t)


def field_velocity_from_modes(grid: ModeGrid, s: ModeState, x, t=0.0):
    """Time derivative ``d phi / dt`` at ``(t, x)``."""
    u = _mode_functions(grid, x, t) * (-1j * grid.energies)
    values = u @ s.amplitudes + np.conj(u) @ np.conj(s.amplitudes)
    return _squeeze(values.real, grid, x, t)


def sample_initial_data(grid: ModeGrid, s: ModeState, t: float = 0.0) -> tuple[np.ndarray, np.ndarray]:
    """Field and velocity on the position lattice, each shaped ``(N,) * d``."""
    shape = (grid.sites_per_axis,) * grid.dimension
    phi = field_from_modes(grid, s, grid.positions, t)
    phidot = field_velocity_from_modes(grid, s, grid.positions, t)
    return np.reshape(phi, shape), np.reshape(phidot, shape)


def modes_from_initial_data(grid: ModeGrid, phi, phidot) -> ModeState:
    """Invert the mode expansion at ``t = 0`` from lattice samples of ``phi`` and ``d phi/dt``.

    ``a_k = (eps_k phi_k + i pi_k) / sqrt(2)`` where ``phi_k``, ``pi_k`` are the
    discrete Fourier coefficients scaled by ``sqrt(V / eps_k) / N**d``.
    """
    shape = (grid.sites_per_axis,) * grid.dimension
    phi = np.asarray(phi, dtype=float)
    phidot = np.asarray(phidot, dtype=float)
    for name, arr in (("phi", phi), ("phidot", phidot)):
        if arr.size != grid.sites_per_axis**grid.dimension:
            raise ValueError(f"{name}: expected {shape} samples, got shape {arr.shape}")
    phi_hat = np.fft.fftshift(np.fft.fftn(phi.reshape(shape))).ravel()[grid.lattice_index]
    pi_hat = np.fft.fftshift(np.fft.fftn(phidot.reshape(shape))).ravel()[grid.lattice_index]
    eps = grid.energies
    scale = np.sqrt(grid.volume / eps) / grid.sites_per_axis**grid.dimension
    a = (eps * phi_hat * scale + 1j * pi_hat * scale) / np.sqrt(2.0)
    return ModeState(grid, a)


def euler_lagrange_residual(grid: ModeGrid, s: ModeState, points, h: float) -> float:
    """Max of ``|(d_t^2 - laplacian + m^2) phi|`` over ``points`` (rows ``(t, x...)``) by central differences.

    Every ModeState solves the free equation exactly, so the result is the
    ``O(h**2)`` truncation error of the stencil (plus rounding ~ eps/h**2).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 1 + grid.dimension)
    t, x = pts[:, 0], pts[:, 1:]

    def phi(tt, xx):
        return np.atleast_1d(field_from_modes(grid, s, xx, tt))

    centre = phi(t, x)
    box = phi(t + h, x) - 2 * centre + phi(t - h, x)
    for axis in range(grid.dimension):
        shift = np.zeros_like(x)
        shift[:, axis] = h
        box -= phi(t, x + shift) - 2 * centre + phi(t, x - shift)
    residual = box / h**2 + grid.mass**2 * centre
    return float(np.max(np.abs(residual))) if len(residual) else 0.0
