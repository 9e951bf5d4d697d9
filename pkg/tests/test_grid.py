import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from sfuc_lab.errors import CapacityError, ConfigurationError, InvalidGeometry
from sfuc_lab.grid import (
    DeloneSet, EquidistributedSequence, Mask, ball_volume, build_mask, generate_sequence,
    make_grid, verify_delone,
)


# [TRIVIAL] node layouts
def test_dirichlet_nodes():
    g = make_grid(1, 1, 8, "dirichlet")
    assert g.n == 7
    np.testing.assert_array_equal(g.coords().ravel(), np.arange(-3, 4) / 8)


def test_periodic_nodes():
    g = make_grid(1, 1, 8, "periodic")
    assert g.n == 8
    np.testing.assert_array_equal(g.coords().ravel(), np.arange(-4, 4) / 8)


def test_neumann_nodes_are_cell_centres():
    g = make_grid(1, 1, 4, "neumann")
    np.testing.assert_array_equal(g.coords().ravel(), [-0.375, -0.125, 0.125, 0.375])


def test_2d_node_count_matches_enumeration():
    g = make_grid(2, 2, 4, "dirichlet")
    # enumeration oracle: all interior lattice points of (-1, 1)^2 with pitch 1/4
    ax = [i / 4 for i in range(-3, 4)]
    oracle = list(itertools.product(ax, ax))
    assert g.n == len(oracle) == 49
    np.testing.assert_array_equal(g.coords(), np.array(oracle))


def test_grid_errors():
    with pytest.raises(ConfigurationError):
        make_grid(1, 1.3, 3)
    with pytest.raises(CapacityError):
        make_grid(3, 10, 16, cap=1000)
    with pytest.raises(ConfigurationError):
        make_grid(4, 1, 8)


def test_coords_bit_reproducible():
    a = make_grid(2, 3, 5, "neumann").coords()
    b = make_grid(2, 3, 5, "neumann").coords()
    assert a.tobytes() == b.tobytes()


@given(st.sampled_from(["dirichlet", "neumann", "periodic"]), st.integers(1, 3),
       st.integers(1, 4), st.integers(2, 8))
def test_coords_in_closed_box(bc, d, L, m):
    if (L * m) ** d > 20000:
        return
    g = make_grid(d, L, m, bc)
    x = g.coords()
    assert x.shape == (g.n, d)
    assert np.all(np.abs(x) <= L / 2)


# sequences
def test_centered_sequence():
    seq = generate_sequence(1, 0.25, 1, 3, "centered")
    np.testing.assert_array_equal(seq.points.ravel(), [-1, 0, 1])


def test_random_sequence_narrow_cell():
    seq = generate_sequence(1, 0.49, 1, 1, "uniform_random", 7)
    assert abs(seq.points[0, 0]) <= 0.01


@given(st.floats(0.01, 0.49), st.integers(0, 2**31), st.integers(1, 2))
def test_random_sequence_containment(delta, seed, d):
    seq = generate_sequence(1.0, delta, d, 3, "uniform_random", seed)
    # exact containment: B(z_j, delta) inside the cell, no tolerance
    assert np.all(np.abs(seq.points - seq.centers) + delta <= 0.5)
    assert seq.contained().all()


def test_random_sequence_2d_cells():
    seq = generate_sequence(2, 0.5, 2, 4, "uniform_random", 3)
    assert len(seq.points) == 4
    assert np.all(np.abs(seq.points - seq.centers) <= 0.5)


def test_sequence_deterministic_and_text_roundtrip():
    a = generate_sequence(1, 0.2, 2, 3, "uniform_random", 11)
    b = generate_sequence(1, 0.2, 2, 3, "uniform_random", 11)
    assert a.points.tobytes() == b.points.tobytes()
    c = EquidistributedSequence.from_text(a.to_text())
    assert c.points.tobytes() == a.points.tobytes()


def test_sequence_errors():
    with pytest.raises(InvalidGeometry):
        generate_sequence(1, 0.5, 1, 3)
    with pytest.raises(InvalidGeometry):
        generate_sequence(1, 0.25, 1, 2.5)


# masks
def test_mask_example():
    g = make_grid(1, 1, 8, "periodic")
    m = build_mask(generate_sequence(1, 0.25, 1, 1), g)
    np.testing.assert_array_equal(g.coords().ravel()[m.indicator], [-1 / 8, 0, 1 / 8])
    assert m.measure == pytest.approx(3 / 8)


def test_mask_tiny_delta_empty():
    g = make_grid(1, 1, 8, "periodic")
    seq = EquidistributedSequence(1.0, 1e-9, 1, 1.0, np.zeros((1, 1)), np.full((1, 1), 0.01))
    assert build_mask(seq, g).count == 0


def test_mask_measure_close_to_volume():
    g = make_grid(1, 1, 100, "dirichlet")
    m = build_mask(generate_sequence(1, 0.49, 1, 1), g)
    assert abs(m.measure - 0.98) / 0.98 < 0.05


def test_mask_measure_converges():
    # relative error decreases when m doubles
    errs = []
    for m in (32, 64):
        g = make_grid(2, 2, m, "periodic")
        mask = build_mask(generate_sequence(1, 0.3, 2, 2, "centered"), g)
        exact = ball_volume(2, 0.3) * 4
        errs.append(abs(mask.measure - exact) / exact)
    assert errs[1] <= errs[0] and errs[1] < 0.05


@given(st.floats(0.02, 0.45), st.floats(0.02, 0.45), st.integers(0, 1000))
def test_mask_monotone_in_delta(d1, d2, seed):
    lo, hi = sorted((d1, d2))
    g = make_grid(1, 3, 32, "periodic")
    base = generate_sequence(1, hi, 1, 3, "uniform_random", seed)
    small = EquidistributedSequence(1.0, lo, 1, 3.0, base.centers, base.points)
    assert np.all(build_mask(base, g).indicator[build_mask(small, g).indicator])


def test_mask_constructors():
    g = make_grid(1, 1, 8)
    assert Mask.full(g).count == g.n and Mask.empty(g).count == 0


# Delone sets
def test_delone_integer_lattice():
    pts = np.arange(-5, 6, dtype=float)[:, None]
    assert verify_delone(DeloneSet(pts, 0.9, 1.1), ([-5], [5])).ok


def test_delone_discreteness_violation():
    rep = verify_delone(DeloneSet(np.array([[0.0], [0.1]]), 0.9, 1.1), ([-0.5], [0.5]))
    assert not rep.discrete_ok
    assert rep.worst_violations[0]["condition"] == "uniform_discreteness"


def test_delone_perturbed_lattice():
    rng = np.random.default_rng(0)
    j = np.arange(-5, 6, dtype=float)
    pts = (j + 0.2 * rng.uniform(-1, 1, j.size))[:, None]
    assert verify_delone(DeloneSet(pts, 0.5, 1.5), ([-5], [5])).ok


def test_delone_empty_fails_density():
    rep = verify_delone(DeloneSet(np.zeros((0, 1)), 0.5, 1.5), ([-2], [2]))
    assert not rep.dense_ok and not rep.ok
