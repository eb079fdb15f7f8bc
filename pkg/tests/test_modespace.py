import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from covquant.modespace import (
    GridError,
    ModeGrid,
    ModeState,
    TangentVector,
    dispersion,
    euler_lagrange_residual,
    field_from_modes,
    field_velocity_from_modes,
    make_grid,
    modes_from_initial_data,
    sample_initial_data,
)

grids = st.one_of(
    st.builds(
        make_grid,
        st.just(1),
        st.sampled_from([2, 4, 8, 16, 32]),
        st.floats(0.5, 50.0),
        st.floats(0.1, 5.0),
    ),
    st.builds(
        make_grid,
        st.just(3),
        st.sampled_from([2, 4, 6]),
        st.floats(0.5, 20.0),
        st.one_of(st.just(0.0), st.floats(0.1, 5.0)),
    ),
)


def test_small_grid_momenta():
    g = make_grid(1, 4, 2 * math.pi, 1.0)
    assert g.momenta[:, 0].tolist() == [-2.0, -1.0, 0.0, 1.0]
    assert g.mode_spacing == 1.0


def test_three_dim_cell():
    g = make_grid(3, 2, math.pi, 2.0)
    assert g.size == 8
    assert g.mode_spacing == 2.0
    assert g.cell_volume == 8.0


@pytest.mark.parametrize(
    "args, message",
    [
        ((1, 4, 2 * math.pi, 0.0), "massless 1-D grid rejected"),
        ((1, 5, 1.0, 1.0), "even"),
        ((1, 4, 0.0, 1.0), "box_length"),
        ((1, 4, -1.0, 1.0), "box_length"),
        ((2, 4, 1.0, 1.0), "dimension"),
        ((1, 4, 1.0, -0.5), "mass"),
    ],
)
def test_grid_rejections(args, message):
    with pytest.raises(GridError, match=message):
        make_grid(*args)


def test_distinct_diagnostics():
    msgs = set()
    for args in [(1, 5, 1.0, 1.0), (1, 4, -1.0, 1.0), (1, 4, 1.0, 0.0)]:
        with pytest.raises(GridError) as exc:
            make_grid(*args)
        msgs.add(str(exc.value))
    assert len(msgs) == 3


def test_massless_3d_excludes_zero_mode():
    g = make_grid(3, 4, 2 * math.pi, 0.0)
    assert g.size == 63
    assert g.excluded_modes == [(0, 0, 0)]
    assert np.all(g.energies > 0)


def test_dispersion_examples():
    g = make_grid(1, 8, 2 * math.pi, 1.0)
    assert dispersion(g, 0.0) == 1.0
    assert dispersion(g, 1.0) == pytest.approx(math.sqrt(2), abs=1e-15)
    g3 = make_grid(3, 8, 2 * math.pi, 4.0)
    assert dispersion(g3, [3.0, 0.0, 0.0]) == 5.0
    with pytest.raises(KeyError):
        dispersion(g, 0.5)
    with pytest.raises(KeyError):
        dispersion(g, 17.0)


@given(grids)
@settings(max_examples=40, deadline=None)
def test_dispersion_symmetry_and_bound(g):
    neg = g.negated_index()
    assert np.array_equal(g.energies[neg], g.energies) or g.sites_per_axis == 2
    assert np.all(g.energies >= g.mass)
    # k -> -k closes modulo the reciprocal lattice
    labels = g.integer_modes
    back = (-labels[neg] - labels) % g.sites_per_axis
    assert np.all(back == 0)


def test_dispersion_symmetry_exact_off_nyquist():
    g = make_grid(3, 6, 3.0, 0.7)
    for j, n in enumerate(g.integer_modes):
        if np.all(np.abs(n) < 3):
            assert dispersion(g, -g.momenta[j]) == g.energies[j]


def test_grid_record_round_trip():
    g = make_grid(3, 6, 0.1 + 0.2, 1 / 3)
    text = g.to_record()
    assert "box_length = 0.30000000000000004" in text
    assert ModeGrid.from_record(text) == g
    with pytest.raises(GridError):
        ModeGrid.from_record("dimension = 1\nmass = 1\n")


def test_zero_state_field():
    g = make_grid(1, 8, 5.0, 1.0)
    s = ModeState.zeros(g)
    assert field_from_modes(g, s, [1.3], 0.7) == 0.0


def test_single_mode_normalisation():
    g = make_grid(1, 8, 5.0, 1.3)
    j = g.mode_index(2 * g.mode_spacing)
    a = np.zeros(g.size, dtype=complex)
    a[j] = math.sqrt(2 * g.energies[j] * g.volume) / 2
    assert field_from_modes(g, ModeState(g, a), [0.0], 0.0) == pytest.approx(1.0, abs=1e-15)


def test_field_evaluation_shapes():
    g = make_grid(3, 4, 3.0, 1.0)
    s = ModeState.random(g, np.random.default_rng(0))
    single = field_from_modes(g, s, [0.1, 0.2, 0.3], 0.4)
    assert isinstance(single, float)
    many = field_from_modes(g, s, np.zeros((5, 3)), 0.0)
    assert many.shape == (5,)


def test_state_is_immutable_copy():
    g = make_grid(1, 4, 2.0, 1.0)
    a = np.ones(g.size, dtype=complex)
    s = ModeState(g, a)
    a[0] = 5
    assert s.amplitudes[0] == 1
    with pytest.raises(ValueError):
        s.amplitudes[0] = 2
    with pytest.raises(ValueError):
        ModeState(g, np.ones(3))


@given(grids, st.integers(0, 2**32 - 1))
@settings(max_examples=30, deadline=None)
def test_round_trip(g, seed):
    s = ModeState.random(g, np.random.default_rng(seed))
    phi, phidot = sample_initial_data(g, s)
    back = modes_from_initial_data(g, phi, phidot)
    scale = max(1.0, np.max(np.abs(s.amplitudes)))
    assert np.max(np.abs(back.amplitudes - s.amplitudes)) < 1e-12 * scale


def test_field_is_real():
    # reality: the conjugate pair sums to a real number; check the imaginary remainder explicitly
    from covquant.modespace import _mode_functions

    g = make_grid(3, 4, 3.0, 0.0)
    s = ModeState.random(g, np.random.default_rng(1), scale=10.0)
    u = _mode_functions(g, np.random.default_rng(2).uniform(0, 3, (20, 3)), 0.3)
    z = u @ s.amplitudes + np.conj(u) @ np.conj(s.amplitudes)
    assert np.max(np.abs(z.imag)) < 1e-12 * 10.0


def test_cosine_initial_data():
    g = make_grid(1, 16, 2 * math.pi, 1.0)
    x = g.positions[:, 0]
    k0 = 3.0
    s = modes_from_initial_data(g, 0.7 * np.cos(k0 * x), np.zeros_like(x))
    a = s.amplitudes
    jp, jm = g.mode_index(k0), g.mode_index(-k0)
    others = np.delete(a, [jp, jm])
    assert np.max(np.abs(others)) < 1e-15
    assert abs(a[jp].imag) < 1e-15 and abs(a[jm].imag) < 1e-15
    assert a[jp].real == pytest.approx(a[jm].real, abs=1e-15)
    assert a[jp].real > 0


def test_zero_initial_data():
    g = make_grid(3, 4, 2.0, 1.0)
    s = modes_from_initial_data(g, np.zeros((4, 4, 4)), np.zeros((4, 4, 4)))
    assert not np.any(s.amplitudes)


def test_initial_data_shape_mismatch():
    g = make_grid(1, 8, 2.0, 1.0)
    with pytest.raises(ValueError, match="samples"):
        modes_from_initial_data(g, np.zeros(7), np.zeros(8))


def test_velocity_matches_time_derivative():
    g = make_grid(1, 16, 7.0, 0.8)
    s = ModeState.random(g, np.random.default_rng(3))
    h = 1e-5
    fd = (field_from_modes(g, s, [1.1], 0.3 + h) - field_from_modes(g, s, [1.1], 0.3 - h)) / (2 * h)
    assert fd == pytest.approx(field_velocity_from_modes(g, s, [1.1], 0.3), abs=1e-8)


def test_euler_lagrange_zero_state():
    g = make_grid(1, 8, 5.0, 1.0)
    assert euler_lagrange_residual(g, ModeState.zeros(g), [[0.0, 0.3]], 1e-3) == 0.0


def test_euler_lagrange_single_mode():
    g = make_grid(1, 16, 2 * math.pi, 1.0)
    a = np.zeros(g.size, dtype=complex)
    a[g.mode_index(1.0)] = 1.0
    s = ModeState(g, a)
    pts = [[0.1, 0.2], [0.7, 2.5], [1.3, 4.0]]
    assert euler_lagrange_residual(g, s, pts, 1e-3) < 1e-5


def test_euler_lagrange_second_order():
    g = make_grid(3, 4, 6.0, 1.0)
    s = ModeState.random(g, np.random.default_rng(4))
    pts = np.random.default_rng(5).uniform(0, 6, (6, 4))
    kmax = float(np.max(np.linalg.norm(g.momenta, axis=1)))
    h = 0.25 / kmax
    ratio = euler_lagrange_residual(g, s, pts, h) / euler_lagrange_residual(g, s, pts, h / 2)
    assert ratio == pytest.approx(4.0, rel=0.05)


def test_tangent_constructors():
    g = make_grid(1, 4, 2.0, 1.0)
    t = TangentVector.unit(g, 2, "astar")
    assert t.d_astar[2] == 1 and not np.any(t.d_a)
    with pytest.raises(ValueError):
        TangentVector.unit(g, 0, "b")
    s = ModeState.random(g, np.random.default_rng(0))
    r = TangentVector.real_displacement(s)
    assert np.array_equal(r.d_astar, np.conj(r.d_a))


def test_localized_tangent_is_localized():
    from covquant.propagator import _tangent_field

    g = make_grid(1, 128, 40.0, 1.0)
    t = TangentVector.localized(g, np.random.default_rng(0), width=1.0)
    pts = np.array([[0.0, 0.0], [0.0, 8.0], [0.0, 32.0], [0.0, 20.0], [0.0, 20.5]])
    value, _ = _tangent_field(g, t, pts, np.array([1.0, 0.0]))
    far, near = np.abs(value[:3]), np.abs(value[3:])
    assert np.max(far) < 1e-12 * np.max(near)
