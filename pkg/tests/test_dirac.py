import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import sparse

from covquant.dirac import (
    FermionLinear,
    FermionSlot,
    anticommutator_rows,
    build_spinors,
    continuum_contraction,
    dirac_anticommutator,
    dirac_gammas,
    dirac_hamiltonian_operator,
    fermionic_operators,
    fermionic_symplectic,
    graded_bracket,
    mode_sum_anticommutator,
    psi_component,
    psibar_component,
    spinor_residuals,
    spinor_table,
)
from covquant.modespace import make_grid

ETA = np.diag([1.0, -1.0, -1.0, -1.0])
G1 = make_grid(1, 64, 20.0, 1.0)
G3 = make_grid(3, 4, 6.0, 1.5)
momenta = st.lists(st.floats(-20, 20), min_size=3, max_size=3)


def lattice_anticommutator(grid, r):
    """``(i gamma^mu d_mu + m) Delta`` with the lattice Delta differentiated term by term."""
    r = np.asarray(r, dtype=float)
    eps, k = grid.energies, grid.momenta
    phase = eps * r[0] - k @ r[1:]
    V = grid.volume
    delta = np.sum(np.sin(phase) / eps) / V
    d_t = np.sum(np.cos(phase)) / V
    d_x = -(np.cos(phase) / eps) @ k / V
    g = dirac_gammas()
    M = grid.mass * delta * np.eye(4) + 1j * d_t * g[0]
    axes = [3] if grid.dimension == 1 else [1, 2, 3]
    for mu, dx in zip(axes, d_x):
        M = M + 1j * dx * g[mu]
    return M


def test_clifford():
    g = dirac_gammas()
    assert g.clifford_residual() == 0
    assert np.array_equal(g[0], g[0].conj().T)
    for i in range(1, 4):
        assert np.array_equal(g[i], -g[i].conj().T)


def test_rest_frame_spinors():
    b = build_spinors([0.0, 0.0, 0.0], 2.0)
    assert np.allclose(b.u, np.sqrt(4.0) * np.hstack([np.eye(2), np.zeros((2, 2))]), atol=0)
    assert np.allclose(np.sum(np.abs(b.u) ** 2, axis=1), 4.0)


def test_normalization_example():
    b = build_spinors([3.0, 0.0, 0.0], 4.0)
    assert b.energy == 5.0
    np.testing.assert_allclose(np.sum(np.abs(b.u) ** 2, axis=1), 10.0, rtol=1e-15)
    r = spinor_residuals(b)
    assert max(r.values()) < 1e-12


@given(momenta, st.floats(0.1, 10))
@settings(max_examples=50, deadline=None)
def test_spinor_invariants(p, m):
    b = build_spinors(p, m)
    scale = b.energy
    r = spinor_residuals(b)
    assert max(r.values()) < 1e-12 * max(1.0, scale)
    g0 = dirac_gammas()[0]
    ubar, vbar = b.u.conj() @ g0, b.v.conj() @ g0
    assert np.max(np.abs(ubar @ b.u.T - 2 * m * np.eye(2))) < 1e-12 * scale
    assert np.max(np.abs(vbar @ b.v.T + 2 * m * np.eye(2))) < 1e-12 * scale
    assert np.max(np.abs(ubar @ b.v.T)) < 1e-12 * scale
    # spin sums
    g = dirac_gammas()
    pslash = g.slash(b.p_lower)
    assert np.max(np.abs(b.u.T @ ubar - (pslash + m * np.eye(4)))) < 1e-12 * scale
    assert np.max(np.abs(b.v.T @ vbar - (pslash - m * np.eye(4)))) < 1e-12 * scale


def test_spinor_rejections():
    with pytest.raises(ValueError):
        build_spinors([1.0], 0.0)
    with pytest.raises(ValueError):
        build_spinors([1.0, 2.0], 1.0)
    with pytest.raises(ValueError):
        spinor_table(make_grid(3, 2, 3.0, 0.0))


def test_one_dim_momentum_along_third_axis():
    b = build_spinors([2.0], 1.0)
    assert np.array_equal(b.momentum, [0.0, 0.0, 2.0])
    u, v = spinor_table(G1)
    assert u.shape == (G1.size, 2, 4)


def test_fermionic_symplectic_examples():
    g = G3
    ua = FermionLinear.generator(g, "a", 3, 1)
    ua_s = FermionLinear.generator(g, "astar", 3, 1)
    assert fermionic_symplectic(ua_s, ua) == 1
    assert fermionic_symplectic(ua, ua_s) == 1
    assert fermionic_symplectic(ua_s, FermionLinear.generator(g, "b", 3, 1)) == 0
    rng = np.random.default_rng(0)
    parts = lambda: {k: rng.standard_normal((g.size, 2)) + 1j * rng.standard_normal((g.size, 2)) for k in ("a", "astar", "b", "bstar")}
    d1, d2 = FermionLinear(g, **parts()), FermionLinear(g, **parts())
    assert fermionic_symplectic(d1, d2) == fermionic_symplectic(d2, d1)


def test_graded_bracket_basis():
    g = G3
    kinds = ["a", "astar", "b", "bstar"]
    partner = {"a": "astar", "astar": "a", "b": "bstar", "bstar": "b"}
    for k1, k2 in itertools.product(kinds, repeat=2):
        for (m1, s1), (m2, s2) in [((2, 0), (2, 0)), ((2, 0), (2, 1)), ((2, 0), (5, 0))]:
            v = graded_bracket(FermionLinear.generator(g, k1, m1, s1), FermionLinear.generator(g, k2, m2, s2))
            expected = 1j if (k2 == partner[k1] and (m1, s1) == (m2, s2)) else 0
            assert v == expected
    assert continuum_contraction(g, "a", "astar") == 1j / g.cell_volume
    assert continuum_contraction(g, "a", "bstar") == 0


def test_graded_bracket_symmetric_bilinear():
    g = G3
    rng = np.random.default_rng(1)
    parts = lambda: {k: rng.standard_normal((g.size, 2)) + 1j * rng.standard_normal((g.size, 2)) for k in ("a", "astar", "b", "bstar")}
    F, G, H = (FermionLinear(g, **parts()) for _ in range(3))
    assert graded_bracket(F, G) == graded_bracket(G, F)
    FH = FermionLinear(g, *(2 * getattr(F, k) + 3 * getattr(H, k) for k in ("a", "astar", "b", "bstar")))
    assert graded_bracket(FH, G) == pytest.approx(2 * graded_bracket(F, G) + 3 * graded_bracket(H, G), abs=1e-10)


def test_graded_bracket_rejects_even():
    g = G3
    F = FermionLinear.generator(g, "a", 0, 0)
    E = FermionLinear(g, F.a, F.astar, F.b, F.bstar, parity="even")
    with pytest.raises(ValueError, match="odd"):
        graded_bracket(F, E)
    with pytest.raises(ValueError):
        FermionLinear(g, F.a, F.astar, F.b, F.bstar, parity="weird")
    with pytest.raises(ValueError, match="shape"):
        FermionLinear(g, np.zeros((2, 2)), F.astar, F.b, F.bstar)


def test_psi_psi_brackets_vanish():
    x, y = [0.3, 1.0], [0.0, 4.0]
    for a, b in itertools.product(range(4), repeat=2):
        assert graded_bracket(psi_component(G1, x, a), psi_component(G1, y, b)) == 0
        assert graded_bracket(psibar_component(G1, x, a), psibar_component(G1, y, b)) == 0


@pytest.mark.parametrize("grid", [G1, G3], ids=["1d", "3d"])
def test_mode_sum_matches_lattice_derivatives(grid):
    rng = np.random.default_rng(2)
    d = grid.dimension
    for _ in range(10):
        x = rng.uniform(-3, 3, d + 1)
        y = rng.uniform(-3, 3, d + 1)
        M = mode_sum_anticommutator(grid, x, y)
        ref = lattice_anticommutator(grid, x - y)
        assert np.max(np.abs(M - ref)) < 1e-10


def test_mode_sum_equal_time_structure():
    g = G1
    dx = g.lattice_spacing
    gam = dirac_gammas()
    # coincidence: gamma^0 times the lattice delta plus the unpaired Nyquist term along gamma^3
    M = mode_sum_anticommutator(g, [0.0, 2.0], [0.0, 2.0])
    kn = g.momenta[np.argmin(g.momenta[:, 0]), 0]
    en = np.sqrt(kn * kn + 1.0)
    nyquist = -kn / en / g.volume
    expected = 1j * gam[0] / dx + 1j * nyquist * gam[3]
    assert np.max(np.abs(M - expected)) < 1e-10
    # separated lattice sites: mass and time terms drop, only the Nyquist term survives
    for n in [1, 2, 7]:
        M = mode_sum_anticommutator(g, [0.0, 2.0 + n * dx], [0.0, 2.0])
        expected = 1j * nyquist * (-1) ** n * gam[3]
        assert np.max(np.abs(M - expected)) < 1e-10


def test_quadrature_equal_time_vanishes():
    for r in [0.5, 1.3, 4.0]:
        res = dirac_anticommutator(1.0, [0.0, r], [0.0, 0.0])
        assert np.max(np.abs(res.matrix)) < 1e-6


def test_cross_oracle_finite_difference():
    rng = np.random.default_rng(3)
    worst = 0.0
    for i in range(10):
        t = rng.uniform(-3, 3)
        x = rng.uniform(-3, 3) if i % 2 else rng.uniform(-0.9, 0.9) * abs(t)
        fd = dirac_anticommutator(1.0, [t, x], [0.0, 0.0], method="mode_sum", grid=G1).matrix
        ms = mode_sum_anticommutator(G1, [t, x], [0.0, 0.0])
        worst = max(worst, float(np.max(np.abs(fd - ms))))
    assert worst < 1e-6


def test_quadrature_matches_closed_form_derivatives():
    # 1-D: Delta = J0(m s)/2 inside the cone; derivatives via d J0 = -J1
    from scipy.special import j0, j1

    m, t, x = 1.0, 2.0, 0.7
    s = np.sqrt(t * t - x * x)
    delta = 0.5 * j0(m * s)
    d_t = -0.5 * m * j1(m * s) * t / s
    d_x = 0.5 * m * j1(m * s) * x / s
    g = dirac_gammas()
    ref = m * delta * np.eye(4) + 1j * d_t * g[0] + 1j * d_x * g[3]
    res = dirac_anticommutator(m, [t, x], [0.0, 0.0])
    assert np.max(np.abs(res.matrix - ref)) < 1e-7
    assert res.error < 1e-6


def test_fermionic_microcausality():
    for p in [(0.5, 2.0), (-1.0, 3.0), (0.0, 1.0)]:
        res = dirac_anticommutator(1.0, list(p), [0.0, 0.0])
        assert np.max(np.abs(res.matrix)) <= max(res.error, 1e-7)
    res = dirac_anticommutator(1.0, [0.2, 1.5, 0.5, 0.0], [0.0, 0.0, 0.0, 0.0])
    assert np.max(np.abs(res.matrix)) <= max(res.error, 1e-7)


def test_mass_term_flips_under_swap():
    x, y = [1.1, 0.4], [0.2, -0.3]
    a = dirac_anticommutator(1.0, x, y, method="mode_sum", grid=G1).matrix
    b = dirac_anticommutator(1.0, y, x, method="mode_sum", grid=G1).matrix
    assert np.trace(a).real == pytest.approx(-np.trace(b).real, abs=1e-12)


def test_anticommutator_rejections_and_rows():
    with pytest.raises(ValueError):
        dirac_anticommutator(0.0, [1.0, 0.0], [0.0, 0.0])
    with pytest.raises(ValueError):
        dirac_anticommutator(1.0, [1.0, 0.0], [0.0, 0.0], method="mode_sum")
    with pytest.raises(ValueError):
        dirac_anticommutator(2.0, [1.0, 0.0], [0.0, 0.0], method="mode_sum", grid=G1)
    with pytest.raises(ValueError):
        dirac_anticommutator(1.0, [1.0, 0.0], [0.0, 0.0], method="magic")
    res = dirac_anticommutator(1.0, [1.0, 0.5], [0.0, 0.0])
    rows = anticommutator_rows(res, [1.0, 0.5], [0.0, 0.0])
    assert len(rows) == 16 and rows[5][2:4] == (1, 1)


def test_fermionic_operators_small():
    (b,) = fermionic_operators(1)
    assert np.array_equal(b.toarray(), [[0, 1], [0, 0]])
    assert np.array_equal((b @ b.T + b.T @ b).toarray(), np.eye(2))


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
def test_fermionic_algebra_exact(n):
    ops = fermionic_operators(n)
    eye = sparse.identity(2**n, format="csr")
    for i, j in itertools.product(range(n), repeat=2):
        bi, bj = ops[i], ops[j]
        anti = bi @ bj.T + bj.T @ bi
        target = eye if i == j else sparse.csr_array((2**n, 2**n))
        assert abs(anti - target).max() == 0
        assert abs(bi @ bj + bj @ bi).max() == 0
    for b in ops:
        assert (b @ b).nnz == 0


def test_fermionic_operator_limits():
    with pytest.raises(ValueError):
        fermionic_operators(0)
    with pytest.raises(ValueError):
        fermionic_operators(13)


def test_dirac_hamiltonian():
    g = make_grid(3, 8, 2 * np.pi, 4.0)
    j = g.mode_index([3.0, 0.0, 0.0])
    H = dirac_hamiltonian_operator(g, [("a", j, 0), ("b", j, 1)])
    assert H.diagonal()[0] == 0
    assert H.diagonal()[-1] == 10.0
    assert dirac_hamiltonian_operator(g, [FermionSlot("a", j, 0)], hbar=0.5).diagonal().tolist() == [0.0, 2.5]
    with pytest.raises(ValueError):
        FermionSlot("c", 0, 0)


def test_dirac_hamiltonian_subset_sums():
    g = G3
    rng = np.random.default_rng(4)
    slots = [("a" if i % 2 else "b", int(rng.integers(g.size)), i % 2) for i in range(6)]
    H = dirac_hamiltonian_operator(g, slots, hbar=0.7)
    E = [0.7 * g.energies[s[1]] for s in slots]
    sums = sorted(sum(c * e for c, e in zip(bits, E)) for bits in itertools.product([0, 1], repeat=6))
    np.testing.assert_allclose(sorted(H.diagonal()), sums, rtol=1e-15, atol=0)
    assert min(H.diagonal()) == 0
