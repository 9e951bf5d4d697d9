import math
import warnings

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from sfuc_lab.errors import FitError, InvalidGeometry, UndefinedSubspaceError
from sfuc_lab.grid import Mask, build_mask, generate_sequence, make_grid
from sfuc_lab.hamiltonian import assemble, sample_potential
from sfuc_lab.spectral import eigs_below
from sfuc_lab.ucp import (
    UcpConfig, c_sfuc, c_sfuc_lower, c_sfuc_scaled, fit_exponent, lifting_check, mask_form,
    observe, scan_scale_free, ucp_constant_exact,
)


def _k1_setup(delta=0.25, m=64):
    g = make_grid(1, 1, m, "dirichlet")
    spec = eigs_below(assemble(g), 15.0)
    return g, spec, build_mask(generate_sequence(1, delta, 1, 1), g)


def test_k1_example_against_integral():
    g, spec, mask = _k1_setup()
    assert spec.k == 1
    num = integrate.quad(lambda y: math.sin(math.pi * y) ** 2, 0.25, 0.75)[0]
    exact = num / 0.5
    assert exact == pytest.approx(0.8183, abs=1e-4)
    assert ucp_constant_exact(spec, mask).value == pytest.approx(exact, abs=0.01)


def test_full_and_empty_mask():
    g = make_grid(2, 2, 8, "periodic")
    spec = eigs_below(assemble(g), 30.0)
    assert ucp_constant_exact(spec, Mask.full(g)).value == pytest.approx(1.0, abs=1e-12)
    assert ucp_constant_exact(spec, Mask.empty(g)).value == pytest.approx(0.0, abs=1e-14)
    with pytest.raises(UndefinedSubspaceError):
        ucp_constant_exact(eigs_below(assemble(g), -5.0), Mask.full(g))


def test_c_obs_monotone_in_delta():
    vals = [ucp_constant_exact(*_k1_setup(dl)[1:]).value for dl in (0.05, 0.1, 0.2, 0.4)]
    assert all(b >= a for a, b in zip(vals, vals[1:]))


def test_c_obs_nonincreasing_in_b():
    g = make_grid(1, 3, 16, "periodic")
    mask = build_mask(generate_sequence(1, 0.2, 1, 3, "uniform_random", 4), g)
    op = assemble(g, lambda x: np.cos(2 * np.pi * x[:, 0]))
    vals = [ucp_constant_exact(eigs_below(op, b), mask).value for b in (5, 20, 60, 150)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))


@given(st.integers(0, 10**6), st.floats(0.05, 0.45))
def test_witness_consistency_and_range(seed, delta):
    g = make_grid(1, 3, 16, "dirichlet")
    mask = build_mask(generate_sequence(1, delta, 1, 3, "uniform_random", seed), g)
    spec = eigs_below(assemble(g), 80.0)
    res = ucp_constant_exact(spec, mask)
    phi = res.witness
    ratio = mask.weighted_norm2(phi) / g.inner(phi, phi)
    assert abs(ratio - res.value) <= 1e-10
    assert -1e-12 <= res.value <= 1 + 1e-12
    if delta >= 0.2:  # mask has more nodes than the subspace dimension
        assert res.value > 0


def test_scaling_covariance():
    # y -> G y maps the unit-cell grid onto the G-cell grid node for node
    def c_obs(G, m):
        g = make_grid(1, 3 * G, m, "periodic")
        spec = eigs_below(assemble(g), 40.0 / G**2)
        return ucp_constant_exact(spec, build_mask(generate_sequence(G, 0.25 * G, 1, 3 * G), g))
    a, b = c_obs(1, 16), c_obs(2, 8)
    assert abs(a.value - b.value) < 1e-10


# formulas, oracles in exact rational / mpmath-free closed arithmetic
def test_c_sfuc_examples():
    assert c_sfuc(1, 0.25, 0, 0, 5) == pytest.approx(9.765625e-4, rel=1e-12)
    assert c_sfuc(1, 0.25, -3, 0.5, 2) == c_sfuc(1, 0.25, 0, 0.5, 2)
    assert c_sfuc(2, 0.3, 7, 2, 1e-12) == pytest.approx(1.0, abs=1e-10)
    with pytest.raises(InvalidGeometry):
        c_sfuc(1, 0.5, 0, 0, 1)


@given(st.floats(0.01, 0.49), st.floats(-5, 50), st.floats(0, 4), st.floats(0.1, 5))
def test_scaled_reduces_to_plain(delta, b, v, N):
    assert c_sfuc_scaled(1, delta, b, v, 1.0, 1.0, N) == pytest.approx(
        c_sfuc(1, delta, b, v, N), rel=1e-12)


def test_c_sfuc_lower():
    assert c_sfuc_lower(0.25, -4, 0, 1) == pytest.approx(0.25**3, rel=1e-14)


def test_fit_exponent_examples():
    deltas = np.array([0.05, 0.1, 0.2, 0.4])
    fit = fit_exponent(deltas, deltas ** (3 * 2), b=1.0, v_norm=0.0)
    assert fit.N_hat == pytest.approx(3.0, abs=1e-9)
    assert fit_exponent(deltas, np.full(4, 0.3)).N_hat == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(FitError):
        fit_exponent(deltas[:3], deltas[:3])
    with warnings.catch_warnings(record=True) as w:
        warnings.simplefilter("always")
        with pytest.raises(FitError):
            fit_exponent(deltas, np.array([0.0, 0.1, 0.2, 0.3]))
        assert w


def test_fit_exponent_k1_example():
    vals = [ucp_constant_exact(*_k1_setup(dl)[1:]).value for dl in (0.05, 0.1, 0.2, 0.4)]
    fit = fit_exponent([0.05, 0.1, 0.2, 0.4], vals, b=15.0)
    assert fit.N_hat > 0 and np.isfinite(fit.residual)


def test_scan_centered_constant_in_L():
    cfg = UcpConfig(delta=0.25, b=50, m=32, bc="periodic")
    rep = scan_scale_free(cfg, [1, 3, 5])
    v = rep.values()
    assert (v.max() - v.min()) / v.max() < 1e-6
    assert rep.passed


def test_scan_full_mask_gives_one():
    cfg = UcpConfig(delta=0.25, b=50, m=16, bc="periodic")
    for L in (1, 3):
        g = make_grid(1, L, 16, "periodic")
        spec = eigs_below(assemble(g), 50)
        assert ucp_constant_exact(spec, Mask.full(g)).value == pytest.approx(1, abs=1e-12)
    rec = observe(UcpConfig(N=5.0, m=16), 1)
    assert rec.passed and rec.C_sfuc < rec.C_obs
    assert not observe(UcpConfig(N=1e-9, m=16), 1).passed  # C_sfuc -> 1 exceeds C_obs


# lifting
def test_lifting_constant_shift():
    g = make_grid(1, 2, 16)
    A = sample_potential(lambda x: np.sin(5 * x[:, 0]), g)
    B = sample_potential(0.7, g)
    rep = lifting_check(A, B, 0.7, Mask.full(g), 60.0)
    np.testing.assert_allclose(rep.gaps, 0.7, atol=1e-9)
    assert rep.passed


def test_lifting_alpha_zero():
    g = make_grid(1, 2, 16)
    A = sample_potential(0.0, g)
    rep = lifting_check(A, sample_potential(0.0, g), 0.0, Mask.full(g), 60.0)
    np.testing.assert_allclose(rep.gaps, 0.0, atol=1e-9)
    assert rep.nonnegative


def test_lifting_mask_example_and_formula():
    g, spec, mask = _k1_setup()
    A = sample_potential(0.0, g)
    B = sample_potential(mask.indicator.astype(float), g)
    rep = lifting_check(A, B, 1.0, mask, 15.0, N=1.0, G=1.0, delta=0.25)
    assert rep.gaps[0] > 0 and rep.floor_ok and rep.formula_ok
    assert rep.formula_floor == pytest.approx(c_sfuc_scaled(1, 0.25, 15.0, 1.0, 1, 1, 1.0))


def test_lifting_hypothesis_violation():
    g, spec, mask = _k1_setup()
    rep = lifting_check(sample_potential(0.0, g), sample_potential(0.1, g), 1.0, mask, 15.0)
    assert not rep.hypothesis_ok and not rep.passed and rep.gaps.size == 0


@given(st.integers(0, 10**6))
def test_lifting_random_fields(seed):
    rng = np.random.default_rng(seed)
    g = make_grid(1, 3, 16)
    A = sample_potential(rng.uniform(-1, 1, g.n), g)
    B = sample_potential(rng.uniform(0, 2, g.n), g)
    alpha = 0.5
    mask = Mask.from_indicator(g, B.values >= alpha)
    rep = lifting_check(A, B, alpha, mask, 80.0)
    assert rep.passed


def test_mask_form_symmetric_psd():
    g, spec, mask = _k1_setup()
    spec = eigs_below(assemble(g), 500.0)
    B = mask_form(spec, mask.weights)
    assert np.array_equal(B, B.T)
    assert np.linalg.eigvalsh(B).min() >= -1e-12
