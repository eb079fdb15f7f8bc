"""
Photon sector in mode space: Lorenz constraint, polarization frames and the
degenerate symplectic form on 4-vector amplitudes.

Amplitudes ``c_mu(k)`` carry a lower index; the metric is ``diag(+, -, -, -)``
and ``k^mu = (|k|, k)``.  Grids must be massless and three dimensional, which
already excludes ``k = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .modespace import ModeGrid
from .propagator import PropagatorValue, SpacetimePoint, commutator_distribution, d_function_quadrature

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
_CONSTRAINT_RTOL = 1e-10


def _check_photon_grid(grid: ModeGrid):
    if grid.dimension != 3 or grid.mass != 0:
        raise ValueError("photon grids must be three dimensional and massless")


def wave_vectors(grid: ModeGrid) -> np.ndarray:
    """Contravariant ``k^mu`` per mode, shape (M, 4)."""
    _check_photon_grid(grid)
    return np.column_stack([grid.energies, grid.momenta])


def _coefficients(grid: ModeGrid, name: str, c) -> np.ndarray:
    c = np.array(c, dtype=complex)
    if c.shape != (grid.size, 4):
        raise ValueError(f"{name}: expected shape ({grid.size}, 4), got {c.shape}")
    c.setflags(write=False)
    return c


@dataclass(frozen=True, eq=False)
class PhotonModeState:
    """Covariant amplitudes ``c_mu(k)``, one row per mode."""

    grid: ModeGrid
    c: np.ndarray

    def __post_init__(self):
        _check_photon_grid(self.grid)
        object.__setattr__(self, "c", _coefficients(self.grid, "c", self.c))

    @classmethod
    def random(cls, grid: ModeGrid, rng: np.random.Generator) -> "PhotonModeState":
        z = rng.standard_normal((2, grid.size, 4))
        return cls(grid, (z[0] + 1j * z[1]) / np.sqrt(2))

    def constraint_residual(self) -> np.ndarray:
        """``|k^mu c_mu|`` per mode."""
        return np.abs(np.einsum("mi,mi->m", wave_vectors(self.grid), self.c))


@dataclass(frozen=True, eq=False)
class PhotonTangent:
    """Displacement ``(delta c_mu, delta c*_mu)``; the halves are independent."""

    grid: ModeGrid
    d_c: np.ndarray
    d_cstar: np.ndarray

    def __post_init__(self):
        _check_photon_grid(self.grid)
        object.__setattr__(self, "d_c", _coefficients(self.grid, "d_c", self.d_c))
        object.__setattr__(self, "d_cstar", _coefficients(self.grid, "d_cstar", self.d_cstar))

    @classmethod
    def random(cls, grid: ModeGrid, rng: np.random.Generator) -> "PhotonTangent":
        z = rng.standard_normal((4, grid.size, 4))
        return cls(grid, z[0] + 1j * z[1], z[2] + 1j * z[3])

    @classmethod
    def gauge(cls, grid: ModeGrid, alpha, beta=None) -> "PhotonTangent":
        """Pure-gauge displacement ``delta c_mu = alpha_k k_mu``, ``delta c*_mu = beta_k k_mu``."""
        k_low = wave_vectors(grid) @ ETA
        alpha = np.broadcast_to(np.asarray(alpha, dtype=complex), (grid.size,))
        beta = np.conj(alpha) if beta is None else np.broadcast_to(np.asarray(beta, dtype=complex), (grid.size,))
        return cls(grid, alpha[:, None] * k_low, beta[:, None] * k_low)

    def __add__(self, other: "PhotonTangent") -> "PhotonTangent":
        if other.grid != self.grid:
            raise ValueError("tangents live on different grids")
        return PhotonTangent(self.grid, self.d_c + other.d_c, self.d_cstar + other.d_cstar)

    def constraint_residual(self) -> np.ndarray:
        k = wave_vectors(self.grid)
        return np.maximum(
            np.abs(np.einsum("mi,mi->m", k, self.d_c)), np.abs(np.einsum("mi,mi->m", k, self.d_cstar))
        )


@dataclass(frozen=True)
class PolarizationFrame:
    """Contravariant frame vectors per mode, each of shape (M, 4).

    ``e0`` is timelike, ``e3`` longitudinal (along k), ``e1, e2`` transverse
    with zero time component.  ``e1, e2, e3`` form a right-handed triad.
    """

    e0: np.ndarray
    e1: np.ndarray
    e2: np.ndarray
    e3: np.ndarray

    @property
    def transverse(self) -> tuple[np.ndarray, np.ndarray]:
        return self.e1, self.e2

    def stacked(self) -> np.ndarray:
        """Shape (M, 4, 4): frame index, then spacetime index."""
        return np.stack([self.e0, self.e1, self.e2, self.e3], axis=1)


def polarization_frame(grid: ModeGrid) -> PolarizationFrame:
    """Deterministic frame; for k along the third axis it is the coordinate basis."""
    _check_photon_grid(grid)
    khat = grid.momenta / np.linalg.norm(grid.momenta, axis=1)[:, None]
    M = grid.size
    # helper: coordinate axis least aligned with k (first on ties)
    helper = np.zeros((M, 3))
    helper[np.arange(M), np.argmin(np.abs(khat), axis=1)] = 1.0
    e1 = helper - np.sum(helper * khat, axis=1)[:, None] * khat
    e1 /= np.linalg.norm(e1, axis=1)[:, None]
    e2 = np.cross(khat, e1)
    zeros = np.zeros((M, 1))
    e0 = np.zeros((M, 4))
    e0[:, 0] = 1.0
    return PolarizationFrame(e0, np.hstack([zeros, e1]), np.hstack([zeros, e2]), np.hstack([zeros, khat]))


def _project(grid: ModeGrid, c: np.ndarray) -> np.ndarray:
    w = wave_vectors(grid)
    coef = np.einsum("mi,mi->m", w, c) / np.einsum("mi,mi->m", w, w)
    return c - coef[:, None] * w


def lorenz_project(s):
    """Euclidean-nearest amplitudes with ``k^mu c_mu = 0`` on every mode.

    Accepts a :class:`PhotonModeState` or a :class:`PhotonTangent` (both
    halves are projected).
    """
    if isinstance(s, PhotonTangent):
        return PhotonTangent(s.grid, _project(s.grid, s.d_c), _project(s.grid, s.d_cstar))
    if isinstance(s, PhotonModeState):
        return PhotonModeState(s.grid, _project(s.grid, s.c))
    raise TypeError(f"cannot project {type(s).__name__}")


def photon_field(s: PhotonModeState, x, t: float = 0.0) -> np.ndarray:
    """Covariant potential ``A_mu(t, x)`` for a real field with the given amplitudes."""
    grid = s.grid
    x = np.asarray(x, dtype=float).reshape(3)
    phase = grid.energies * t - grid.momenta @ x
    u = np.exp(-1j * phase) / np.sqrt(2.0 * grid.energies * grid.volume)
    return 2.0 * np.real(u @ s.c)


def lorenz_divergence(s: PhotonModeState, x, t: float = 0.0) -> float:
    """``d^mu A_mu`` at one point, differentiated mode by mode."""
    grid = s.grid
    x = np.asarray(x, dtype=float).reshape(3)
    phase = grid.energies * t - grid.momenta @ x
    u = np.exp(-1j * phase) / np.sqrt(2.0 * grid.energies * grid.volume)
    # d^mu exp(-i k.x) = -i k^mu exp(-i k.x)
    div = -1j * np.einsum("mi,mi->m", wave_vectors(grid), s.c)
    return float(2.0 * np.real(u @ div))


def _same_grid(d1: PhotonTangent, d2: PhotonTangent) -> ModeGrid:
    if d1.grid != d2.grid:
        raise ValueError("tangents live on different grids")
    return d1.grid


def photon_symplectic(d1: PhotonTangent, d2: PhotonTangent) -> complex:
    """``i sum_k eta^{mu nu} (d1 c*_mu d2 c_nu - d2 c*_mu d1 c_nu)``."""
    _same_grid(d1, d2)
    g = np.diag(ETA)
    return complex(1j * np.sum(g * (d1.d_cstar * d2.d_c - d2.d_cstar * d1.d_c)))


def _require_constrained(*tangents: PhotonTangent):
    for d in tangents:
        scale = max(1.0, float(np.max(np.abs(d.d_c), initial=0)), float(np.max(np.abs(d.d_cstar), initial=0)))
        scale *= float(np.max(wave_vectors(d.grid)))
        if np.max(d.constraint_residual()) > _CONSTRAINT_RTOL * scale:
            raise ValueError("tangent violates the Lorenz constraint; project it first")


def transverse_symplectic(d1: PhotonTangent, d2: PhotonTangent, frame: PolarizationFrame | None = None) -> complex:
    """The form in the two transverse frame components only.

    With ``c_(i) = e_(i)^mu c_mu`` and ``e_(i) . e_(i) = -1`` the form reads
    ``i sum_k sum_i eta_(ii) (d1 c*_(i) d2 c_(i) - d2 c*_(i) d1 c_(i))``.
    On constrained tangents this equals :func:`photon_symplectic` exactly.
    """
    grid = _same_grid(d1, d2)
    _require_constrained(d1, d2)
    frame = polarization_frame(grid) if frame is None else frame
    total = 0j
    for e in frame.transverse:
        c1, c1s = np.einsum("mi,mi->m", e, d1.d_c), np.einsum("mi,mi->m", e, d1.d_cstar)
        c2, c2s = np.einsum("mi,mi->m", e, d2.d_c), np.einsum("mi,mi->m", e, d2.d_cstar)
        total += -1j * np.sum(c1s * c2 - c2s * c1)
    return complex(total)


def constraint_basis(k_up: np.ndarray) -> np.ndarray:
    """Orthonormal (Euclidean) basis of ``{c : k^mu c_mu = 0}``, shape (4, 3)."""
    _, _, vh = np.linalg.svd(k_up.reshape(1, 4))
    return vh[1:].T


def _rank(matrix: np.ndarray, rtol: float = 1e-10) -> int:
    s = np.linalg.svd(matrix, compute_uv=False)
    return int(np.sum(s > rtol * max(1.0, s[0])))


@dataclass
class GaugeKernelReport:
    mode: int
    k: np.ndarray
    direction: np.ndarray
    rank_unconstrained: int
    rank_constrained: int
    kernel_residual_max: float

    def row(self) -> tuple:
        return (" ".join(f"{v:.17g}" for v in self.k), self.rank_unconstrained, self.rank_constrained, self.kernel_residual_max)


def gauge_kernel(grid: ModeGrid, mode: int, rng: np.random.Generator | None = None, probes: int = 20) -> GaugeKernelReport:
    """Gauge direction ``delta c_mu = k_mu`` of one mode and the ranks of the per-mode form.

    The per-mode pairing is ``c1^H eta c2``; its rank is taken on all of C^4
    and on the constraint surface.  The kernel vector is paired through
    :func:`photon_symplectic` with ``probes`` random constrained tangents
    supported on the same mode.
    """
    _check_photon_grid(grid)
    rng = np.random.default_rng(0) if rng is None else rng
    k_up = wave_vectors(grid)[mode]
    direction = ETA @ k_up
    B = constraint_basis(k_up)
    rank_free = _rank(ETA.astype(complex))
    rank_con = _rank(B.conj().T @ ETA @ B)
    gauge = np.zeros((grid.size, 4), dtype=complex)
    gauge[mode] = direction
    kernel = PhotonTangent(grid, gauge, gauge)
    scale = float(np.linalg.norm(direction))
    residual = 0.0
    for _ in range(probes):
        z = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
        dc = np.zeros((grid.size, 4), dtype=complex)
        dcs = np.zeros((grid.size, 4), dtype=complex)
        dc[mode], dcs[mode] = B @ z[0], B @ z[1]
        probe = PhotonTangent(grid, dc, dcs)
        residual = max(residual, abs(photon_symplectic(kernel, probe)) / scale)
    return GaugeKernelReport(mode, grid.momenta[mode].copy(), direction, rank_free, rank_con, residual)


def rank_rows(grid: ModeGrid, modes=None, rng: np.random.Generator | None = None) -> list[tuple]:
    """CSV rows ``(k, rank_unconstrained, rank_constrained, kernel_residual_max)``."""
    rng = np.random.default_rng(0) if rng is None else rng
    modes = range(grid.size) if modes is None else modes
    return [gauge_kernel(grid, m, rng).row() for m in modes]


def photon_commutator(x, y, mu: int, nu: int, m: float = 0.0, tol: float = 1e-8) -> PropagatorValue:
    """``{A_mu(x), A_nu(y)} = eta_{mu nu} Delta(x - y)`` with the 3-D scalar distribution at mass ``m``."""
    if not (0 <= mu < 4 and 0 <= nu < 4):
        raise ValueError("indices must be in 0..3")
    x, y = SpacetimePoint.of(x), SpacetimePoint.of(y)
    if x.dimension != 3 or y.dimension != 3:
        raise ValueError("photon commutator needs 3 spatial dimensions")
    g = ETA[mu, nu]
    if g == 0:
        return PropagatorValue(0.0, 0.0)
    scalar = commutator_distribution(m, 3, x, y, tol=tol)
    return PropagatorValue(g * scalar.value, scalar.error)


def massless_scalar_factors(p, m: float = 0.0, tol: float = 1e-8) -> tuple[PropagatorValue, PropagatorValue]:
    """``(D(p), Delta(p))`` in 3-D at mass ``m``; used for the small-mass continuity check."""
    p = SpacetimePoint.of(p)
    D = d_function_quadrature(m, 3, p, tol=tol)
    Delta = commutator_distribution(m, 3, p, SpacetimePoint(0.0, (0.0, 0.0, 0.0)), tol=tol)
    return D, Delta
