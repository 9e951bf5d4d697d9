import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sfuc_lab.errors import InvalidGeometry, UndefinedSubspaceError
from sfuc_lab.grid import Mask, build_mask, generate_sequence, make_grid
from sfuc_lab.hamiltonian import assemble
from sfuc_lab.heat import (
    choose_b_trunc, heat_study, kappa_T, kappa_bound, null_control_check, observability_gram,
    spectral_inequality_check, time_integral,
)
from sfuc_lab.spectral import eigs_below
from sfuc_lab.ucp import ucp_constant_exact


def _scalar_spec(E=1.0):
    g = make_grid(1, 1, 16, "periodic")
    spec = eigs_below(assemble(g, E), E + 0.5)
    assert spec.k == 1
    return g, spec


def test_time_integral_limits():
    assert time_integral(0.0, 2.5) == 2.5
    assert time_integral(2.0, 1.0) == pytest.approx((1 - math.exp(-2)) / 2, rel=1e-15)
    assert time_integral(-1.0, 1.0) == pytest.approx(math.e - 1, rel=1e-15)


def test_gram_scalar_example():
    g, spec = _scalar_spec()
    G = observability_gram(spec, Mask.full(g), 1.0)
    assert G[0, 0] == pytest.approx(0.432332, abs=1e-6)
    assert not np.any(observability_gram(spec, Mask.empty(g), 1.0))


def test_gram_zero_energy_entry():
    g = make_grid(1, 2, 8, "periodic")
    spec = eigs_below(assemble(g), 0.5)
    assert observability_gram(spec, Mask.full(g), 3.0)[0, 0] == pytest.approx(3.0, rel=1e-12)


def test_kappa_scalar_closed_form():
    g, spec = _scalar_spec()
    res = kappa_T(spec, Mask.full(g), 1.0, ridge=0.0)
    exact = math.exp(-2) / ((1 - math.exp(-2)) / 2)
    assert res.kappa == pytest.approx(exact, rel=1e-10)
    assert res.kappa == pytest.approx(0.313035, abs=1e-6)


def test_kappa_k1_with_mask():
    g = make_grid(1, 1, 64)
    spec = eigs_below(assemble(g), 15.0)
    mask = build_mask(generate_sequence(1, 0.25, 1, 1), g)
    c = ucp_constant_exact(spec, mask).value
    E1, T = spec.eigenvalues[0], 0.3
    exact = math.exp(-2 * E1 * T) / (c * time_integral(2 * E1, T))
    assert kappa_T(spec, mask, T, ridge=0.0).kappa == pytest.approx(exact, rel=1e-10)


def _setup(delta=0.25, L=3, m=16, bc="dirichlet"):
    g = make_grid(1, L, m, bc)
    op = assemble(g, lambda x: 0.5 * np.cos(2 * np.pi * x[:, 0]))
    return g, op, build_mask(generate_sequence(1, delta, 1, L), g)


def test_kappa_monotone_in_T_and_mask():
    g, op, small = _setup(0.2)
    big = build_mask(generate_sequence(1, 0.4, 1, 3), g)
    spec = eigs_below(op, choose_b_trunc(eigs_below(op, 50).eigenvalues[0], 0.25))
    Ts = [0.25, 0.5, 1, 2, 4, 8]
    ks = [kappa_T(spec, small, T).kappa for T in Ts]
    kb = [kappa_T(spec, big, T).kappa for T in Ts]
    assert all(b <= a for a, b in zip(ks, ks[1:]))
    assert all(b <= a * (1 + 1e-12) for a, b in zip(ks, kb))


def test_gram_psd_and_certificate():
    g, op, mask = _setup()
    spec = eigs_below(op, 200.0)
    G = observability_gram(spec, mask, 0.5)
    assert np.linalg.eigvalsh(G).min() >= -1e-14 * np.trace(G)
    res = kappa_T(spec, mask, 0.5)
    assert res.certificate and np.isfinite(res.kappa)
    assert res.kappa_no_ridge == pytest.approx(res.kappa, rel=1e-6)
    empty = kappa_T(spec, Mask.empty(g), 0.5)
    assert not empty.certificate and (empty.infinite or empty.kappa > 1e6)
    with pytest.raises(UndefinedSubspaceError):
        kappa_T(eigs_below(op, -10.0), mask, 1.0)


def test_kappa_bound_against_mpmath():
    mp.mp.dps = 50
    for G, delta, v, N, T in [(1, 0.25, 0, 5, 1), (2, 0.3, 1.7, 3.5, 0.4), (0.5, 0.1, 0.2, 1, 7)]:
        kb = kappa_bound(G, delta, v, N, T)
        q = mp.log(mp.mpf(delta) / G)
        a0 = (mp.mpf(delta) / G) ** (-N * (1 + mp.mpf(G) ** (mp.mpf(4) / 3) * mp.mpf(v) ** (mp.mpf(2) / 3)))
        b0 = mp.e ** (2 * mp.mpf(v))
        cs = q**2 * (N * mp.mpf(G) + 4 / mp.log(2)) ** 2
        logb = mp.log(4 * a0 * b0) + 2 * cs / T
        for got, ref in [(kb.a0, a0), (kb.b0, b0), (kb.c_star, cs), (kb.log_bound, logb),
                         (kb.a, -mp.mpf(N) / 2 * q * G)]:
            assert abs(got - float(ref)) <= 1e-12 * abs(float(ref))
    kb = kappa_bound(1, 0.25, 0, 5, 1)
    assert kb.a0 == pytest.approx(1024, rel=1e-12) and kb.b0 == 1
    assert kb.c_star == pytest.approx(222.95, abs=0.005)
    assert kb.log_bound == pytest.approx(math.log(4096) + 445.90, abs=0.01)


def test_kappa_bound_limits():
    kb = kappa_bound(1, 0.25, 0.0, 1e-12, 1)
    assert kb.a0 == pytest.approx(1, abs=1e-9)
    assert kb.c_star == pytest.approx((4 / math.log(2)) ** 2 * math.log(4) ** 2, rel=1e-9)
    with pytest.raises(InvalidGeometry):
        kappa_bound(1, 0.5, 0, 1, 1)


def test_spectral_inequality_examples():
    g = make_grid(1, 1, 64)
    spec = eigs_below(assemble(g), 15.0)
    full = spectral_inequality_check(spec, Mask.full(g), 15.0, 1, 0.25, 1)
    assert full.passed and full.lhs == pytest.approx(1)
    mask = build_mask(generate_sequence(1, 0.25, 1, 1), g)
    for N in (1, 2, 5):
        r = spectral_inequality_check(spec, mask, math.pi**2, 1, 0.25, N)
        assert r.passed and r.margin > 1
    assert spectral_inequality_check(eigs_below(assemble(g), -1), mask, 0, 1, 0.25, 1).passed


def test_spectral_inequality_small_N_fails():
    g = make_grid(1, 3, 32, "periodic")
    spec = eigs_below(assemble(g), 100.0)
    mask = build_mask(generate_sequence(1, 0.05, 1, 3), g)
    assert not spectral_inequality_check(spec, mask, 100.0, 1, 0.05, 1e-3).passed


def test_null_control():
    g, op, mask = _setup()
    spec = eigs_below(op, 120.0)
    cc = null_control_check(spec, mask, 0.5)
    assert cc.final_rel <= 1e-6 and cc.passed
    assert cc.control_norm == pytest.approx(cc.control_norm_ode, rel=1e-5)
    assert cc.control_norm <= cc.kappa_limit * (1 + 1e-6)
    # the costliest unit initial state is e^{-DT} c for the pencil maximizer c
    res = kappa_T(spec, mask, 0.5)
    a0 = np.exp(-spec.eigenvalues * 0.5) * res.coefficients
    worst = null_control_check(spec, mask, 0.5, a0 / np.linalg.norm(a0))
    assert worst.control_norm == pytest.approx(math.sqrt(res.kappa), rel=1e-6)


@settings(max_examples=5)
@given(st.integers(0, 10**6))
def test_null_control_random_state(seed):
    g, op, mask = _setup(L=2, m=8)
    spec = eigs_below(op, 80.0)
    a0 = np.random.default_rng(seed).standard_normal(spec.k)
    cc = null_control_check(spec, mask, 0.5, a0)
    assert cc.final_rel <= 1e-6 and cc.control_norm <= cc.kappa_limit * (1 + 1e-6)


def test_heat_study():
    g, op, mask = _setup()
    rep = heat_study(op, mask, [0.25, 0.5, 1, 2, 4, 8], 1.0, 0.25, 5)
    assert rep.passed
    assert rep.slope >= 0
    assert len(rep.rows()) == 6 and rep.rows()[0]["k"] == rep.k
    # truncation: discarded modes damped by 1e-12 relative at T_min
    E = rep.spec.eigenvalues
    assert math.exp(-2 * (rep.b_trunc - E[0]) * 0.25) <= 1e-12 * 1.0001
