"""Observability cost of the heat semigroup ``e^{-tH}`` on a spectral
truncation, the corresponding upper bound, and a null-control check by
duality.

In eigen-coordinates a solution is ``a(t) = e^{-tD} a0`` with
``D = diag(E_k)``, so the time-integrated observation is the quadratic form

    G_kl = <φ_k, χ_W φ_l> I(E_k + E_l, T),   I(s, T) = ∫_0^T e^{-st} dt,

and ``κ_T`` is the top eigenvalue of the pencil ``(e^{-2DT}, G)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
from scipy.integrate import solve_ivp

from .errors import ConfigurationError, InvalidGeometry, SolverError, UndefinedSubspaceError
from .grid import Mask
from .hamiltonian import DiscreteOperator
from .parallel import ordered_map
from .spectral import SpectralData, eigs_below
from .ucp import mask_form, ucp_constant_exact
from .wegner import lowest_eigenvalue


def time_integral(s, T):
    """``(1 - e^{-sT}) / s`` with the limit ``T`` at ``s = 0``."""
    s = np.asarray(s, dtype=float)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = -np.expm1(-s * T) / s
    return np.where(s == 0, float(T), out)


def observability_gram(spec: SpectralData, mask: Mask, T) -> np.ndarray:
    if T <= 0:
        raise ConfigurationError("T must be positive")
    E = spec.eigenvalues
    B = mask_form(spec, mask.weights)
    G = B * time_integral(E[:, None] + E[None, :], T)
    return (G + G.T) / 2


@dataclass
class KappaResult:
    T: float
    kappa: float
    kappa_no_ridge: float | None
    coefficients: np.ndarray  # maximizing initial state, unit norm
    certificate: bool  # Gram positive definite <=> C_obs > 0
    infinite: bool


def kappa_T(spec: SpectralData, mask: Mask, T, ridge=1e-12) -> KappaResult:
    """Smallest ``κ`` with ``||u(T)||² <= κ ∫_0^T ||u(t)||²_W dt`` on the span."""
    if spec.k == 0:
        raise UndefinedSubspaceError("spectral subspace is empty (k = 0)")
    G = observability_gram(spec, mask, T)
    F = np.diag(np.exp(-2.0 * spec.eigenvalues * T))
    k = spec.k
    certificate = ucp_constant_exact(spec, mask).value > 0

    def top(M):
        vals, vecs = sla.eigh(F, M)
        c = vecs[:, -1]
        return float(vals[-1]), c / np.linalg.norm(c)

    shift = ridge * np.trace(G) / k
    try:
        kappa, c = top(G + shift * np.eye(k))
    except np.linalg.LinAlgError:
        return KappaResult(float(T), math.inf, None, np.zeros(k), certificate, True)
    try:
        bare = top(G)[0]
    except np.linalg.LinAlgError:
        bare = None
    return KappaResult(float(T), kappa, bare, c, certificate, False)


def choose_b_trunc(E1, T_min, rel=1e-12) -> float:
    """Threshold beyond which modes are damped by ``rel`` relative to E_1 at T_min."""
    return float(E1 + math.log(1.0 / rel) / (2.0 * T_min))


@dataclass
class KappaBound:
    a0: float
    b0: float
    c_star: float
    a: float
    log_bound: float

    @property
    def bound(self) -> float:
        return math.exp(self.log_bound) if self.log_bound < 709 else math.inf


def kappa_bound(G, delta, v_norm, N, T) -> KappaBound:
    """``4 a0 b0 e^{2c*/T}`` with its components (``c*`` at its upper bound)."""
    if not 0 < delta < G / 2:
        raise InvalidGeometry(f"delta must lie in (0, G/2), got delta={delta}, G={G}")
    if T <= 0:
        raise ConfigurationError("T must be positive")
    q = math.log(delta / G)
    log_a0 = -N * (1.0 + G ** (4.0 / 3.0) * v_norm ** (2.0 / 3.0)) * q
    c_star = q**2 * (N * G + 4.0 / math.log(2.0)) ** 2
    log_bound = math.log(4.0) + log_a0 + 2.0 * v_norm + 2.0 * c_star / T
    return KappaBound(math.exp(log_a0), math.exp(2.0 * v_norm), c_star,
                      -0.5 * N * q * G, log_bound)


@dataclass
class SpectralInequality:
    passed: bool
    lhs: float
    rhs: float
    margin: float


def spectral_inequality_check(spec: SpectralData, mask: Mask, lam, G, delta, N) -> SpectralInequality:
    """Worst case of ``||u||² <= a0 e^{-N ln(δ/G) G sqrt(λ)} ||u||²_W`` on the span."""
    if spec.k == 0:
        return SpectralInequality(True, 0.0, math.inf, math.inf)
    v = spec.operator.potential.sup_norm
    a0 = kappa_bound(G, delta, v, N, 1.0).a0
    rhs = a0 * math.exp(-N * math.log(delta / G) * G * math.sqrt(max(lam, 0.0)))
    c = ucp_constant_exact(spec, mask).value
    lhs = 1.0 / c if c > 0 else math.inf
    return SpectralInequality(bool(lhs <= rhs), lhs, rhs, rhs - lhs)


# ---------------------------------------------------------------------------
# null control by duality


@dataclass
class ControlCheck:
    final_rel: float
    control_norm: float
    control_norm_ode: float
    kappa_limit: float
    passed: bool


def null_control_check(spec: SpectralData, mask: Mask, T, a0=None, tol=1e-6) -> ControlCheck:
    """Steer ``a0`` to rest with ``f(t) = χ_W Σ_l φ_l (e^{-D(T-t)} q)_l``.

    ``q = -G^{-1} e^{-DT} a0`` makes the final state vanish exactly; the ODE
    is integrated independently (with the control cost as an extra state)
    and ``||f||`` is compared with ``sqrt(κ_T) ||a0||``.
    """
    res = kappa_T(spec, mask, T)
    if res.infinite:
        raise SolverError("Gram form is singular; no control exists in the truncation", math.inf)
    E = spec.eigenvalues
    a0 = res.coefficients if a0 is None else np.asarray(a0, dtype=float)
    G = observability_gram(spec, mask, T)
    B = mask_form(spec, mask.weights)
    q = -np.linalg.solve(G, np.exp(-E * T) * a0)
    k = E.size

    def rhs(t, y):
        g = np.exp(-E * (T - t)) * q
        Bg = B @ g
        return np.concatenate([-E * y[:k] + Bg, [g @ Bg]])

    sol = solve_ivp(rhs, (0.0, T), np.concatenate([a0, [0.0]]), method="Radau",
                    rtol=1e-11, atol=1e-14 * max(1.0, np.linalg.norm(a0)))
    if not sol.success:
        raise SolverError(f"control ODE failed: {sol.message}", math.inf)
    aT = sol.y[:k, -1]
    norm0 = float(np.linalg.norm(a0))
    final_rel = float(np.linalg.norm(aT)) / norm0
    cost = math.sqrt(max(float(q @ G @ q), 0.0))
    cost_ode = math.sqrt(max(float(sol.y[k, -1]), 0.0))
    limit = math.sqrt(res.kappa) * norm0
    ok = final_rel <= tol and cost <= limit * (1 + tol)
    return ControlCheck(final_rel, cost, cost_ode, limit, bool(ok))


# ---------------------------------------------------------------------------
# study over a T grid


@dataclass
class HeatObsReport:
    T_grid: np.ndarray
    kappa: np.ndarray
    bounds: list
    b_trunc: float
    k: int
    truncation_estimate: float
    slope: float
    coefficients: list
    largest_T_bound_holds: float | None
    checks: dict = field(default_factory=dict)
    spec: SpectralData | None = field(default=None, repr=False)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def rows(self):
        return [
            {"T": float(T), "kappa_T": float(kp), "bound": bd.bound, "a0": bd.a0, "b0": bd.b0,
             "c_star": bd.c_star, "b_trunc": self.b_trunc, "k": self.k}
            for T, kp, bd in zip(self.T_grid, self.kappa, self.bounds)
        ]


def heat_study(op: DiscreteOperator, mask: Mask, T_grid, G, delta, N, workers=None,
               tol=1e-8) -> HeatObsReport:
    T_grid = np.sort(np.asarray(T_grid, dtype=float))
    E1 = lowest_eigenvalue(op)
    b_trunc = choose_b_trunc(E1, float(T_grid[0]))
    spec = eigs_below(op, b_trunc, tol=tol)
    results = ordered_map(lambda T: kappa_T(spec, mask, T), list(T_grid), workers)
    kappa = np.array([r.kappa for r in results])
    v = op.potential.sup_norm
    bounds = [kappa_bound(G, delta, v, N, T) for T in T_grid]
    finite = np.isfinite(kappa) & (kappa > 0)
    slope = math.nan
    if np.count_nonzero(finite) >= 2:
        slope = float(np.polyfit(1.0 / T_grid[finite], np.log(kappa[finite]), 1)[0])
    holds = [T for T, kp, bd in zip(T_grid, kappa, bounds) if math.log(kp) <= bd.log_bound]
    rep = HeatObsReport(T_grid, kappa, bounds, b_trunc, spec.k, 1e-12, slope,
                        [r.coefficients for r in results], max(holds) if holds else None,
                        spec=spec)
    rep.checks["kappa_positive_finite"] = bool(np.all(finite))
    rep.checks["kappa_nonincreasing_in_T"] = bool(np.all(np.diff(kappa) <= 0))
    rep.checks["blowup_slope>=0"] = bool(slope >= 0)
    return rep
