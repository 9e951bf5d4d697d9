"""Numerical checks of the auxiliary constructions behind the unique
continuation estimate: reflection extensions, the ghost-dimension function
``F(x, t) = Σ α_k φ_k(x) s_k(t)``, the Carleman weights and the distance of
two hyperbola branches.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize
from scipy.spatial import cKDTree

from .errors import ConfigurationError, InvalidGeometry, NumericError
from .grid import GridSpec, make_grid
from .hamiltonian import PotentialField, laplacian
from .parallel import rng_for
from .spectral import SpectralData

# ---------------------------------------------------------------------------
# reflection extension


@dataclass(frozen=True)
class ExtendedField:
    base: GridSpec
    R: int
    grid: GridSpec
    values: np.ndarray
    bc: str


def _axis_map(c, R, bc, antisymmetric):
    """Source index and sign for every extended node along one axis.

    Dirichlet sources index the padded axis ``0..c`` (ends are the zero
    boundary values); Neumann and periodic index ``0..c-1``.
    """
    off = c * (R - 1) // 2
    if bc == "dirichlet":
        J = np.arange(1, c * R) - off
    else:
        J = np.arange(c * R) - off
    q = np.floor_divide(J, c)
    r = J - q * c
    odd = q % 2 == 1
    if bc == "periodic":
        return r, np.ones(J.size)
    if bc == "neumann":
        return np.where(odd, c - 1 - r, r), np.ones(J.size)
    sign = np.where(odd & antisymmetric, -1.0, 1.0)
    return np.where(odd, c - r, r), sign


def extend_reflect(values, grid: GridSpec, R, kind="eigenfunction") -> ExtendedField:
    """Extend a node field from ``Λ_L`` to ``Λ_{RL}``.

    Eigenfunctions continue antisymmetrically (Dirichlet), symmetrically
    (Neumann) or periodically; potentials always continue symmetrically and
    vanish on the Dirichlet interfaces, where every extended eigenfunction
    is zero anyway.
    """
    if R < 1 or R % 2 == 0 or int(R) != R:
        raise ConfigurationError(f"extension factor must be an odd positive integer, got {R}")
    R = int(R)
    ext = make_grid(grid.d, grid.L * R, grid.m, grid.bc, cap=max(grid.cap, grid.n * R**grid.d))
    arr = np.asarray(values, dtype=float).reshape(grid.shape)
    c = grid.cells
    if grid.bc == "dirichlet":
        arr = np.pad(arr, 1)  # boundary values
    anti = kind == "eigenfunction"
    for ax in range(grid.d):
        idx, sign = _axis_map(c, R, grid.bc, anti)
        arr = np.take(arr, idx, axis=ax)
        shape = [1] * grid.d
        shape[ax] = sign.size
        arr = arr * sign.reshape(shape)
    return ExtendedField(grid, R, ext, arr.ravel(), grid.bc)


def extension_residual(phi: ExtendedField, pot: ExtendedField, E) -> float:
    """``max |(-Δ_h + V) u - E u| / max |u|`` on the extended grid."""
    A = laplacian(phi.grid)  # -Δ_h
    u = phi.values
    r = A @ u + pot.values * u - E * u
    return float(np.max(np.abs(r)) / np.max(np.abs(u)))


# ---------------------------------------------------------------------------
# ghost dimension


def s_k(E, t):
    """``sinh(ωt)/ω`` for ``E > 0``, ``t`` for ``E = 0``, ``sin(ωt)/ω`` for ``E < 0``,
    with ``ω = sqrt|E|``."""
    E = np.asarray(E, dtype=float)
    t = np.asarray(t, dtype=float)
    w = np.sqrt(np.abs(E))
    safe = np.where(w == 0, 1.0, w)
    pos = np.sinh(w * t) / safe
    neg = np.sin(w * t) / safe
    return np.where(E > 0, pos, np.where(E < 0, neg, t * np.ones_like(w)))


def s_k_prime(E, t):
    E = np.asarray(E, dtype=float)
    w = np.sqrt(np.abs(E))
    return np.where(E > 0, np.cosh(w * t), np.where(E < 0, np.cos(w * t), np.ones_like(w * t)))


@dataclass
class GhostField:
    spec: SpectralData
    alphas: np.ndarray
    T: float
    t: np.ndarray  # extra-variable nodes on [-T, T]
    values: np.ndarray  # (len(t), n)


def ghost_field(spec: SpectralData, alphas, T, h_t=None) -> GhostField:
    alphas = np.asarray(alphas, dtype=float)
    if alphas.shape != (spec.k,):
        raise ConfigurationError(f"need {spec.k} coefficients, got {alphas.shape}")
    h_t = h_t or T / 128
    M = int(round(T / h_t))
    t = np.linspace(-T, T, 2 * M + 1)
    S = s_k(spec.eigenvalues[None, :], t[:, None])  # (nt, k)
    return GhostField(spec, alphas, float(T), t, (S * alphas) @ spec.vectors.T)


def _space_gradient_energy(u, grid: GridSpec):
    """``h^d Σ_edges ((u_i - u_j)/h)²`` with the boundary edges of ``grid.bc``.

    ``u`` has shape ``(..., n)``; the sum runs over the last axis.
    """
    lead = u.shape[:-1]
    arr = u.reshape(lead + grid.shape)
    total = np.zeros(lead)
    for ax in range(grid.d):
        a = len(lead) + ax
        if grid.bc == "dirichlet":
            pad = [(0, 0)] * arr.ndim
            pad[a] = (1, 1)
            diff = np.diff(np.pad(arr, pad), axis=a)
        elif grid.bc == "periodic":
            diff = np.diff(arr, axis=a, append=np.take(arr, [0], axis=a))
        else:
            diff = np.diff(arr, axis=a)
        total += np.sum(diff**2, axis=tuple(range(len(lead), arr.ndim)))
    return grid.cell_volume * total / grid.h**2


@dataclass
class SandwichReport:
    lower: float
    h1: float
    upper: float
    lower_ok: bool
    upper_ok: bool
    terms: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.lower_ok and self.upper_ok


def beta_k(E, T):
    E = np.asarray(E, dtype=float)
    return np.where(E > 0, np.exp(2 * T * np.sqrt(np.clip(E, 0, None))), 1.0)


def ghost_sandwich_check(spec: SpectralData, alphas, T, v_norm=None, h_t=None,
                         slack=1.05) -> SandwichReport:
    """Discrete ``H¹(Λ_L x [-T, T])`` norm of ``F`` against
    ``T/2 Σ α²`` and ``2T(1 + (1 + ||V||)T²) Σ β_k(T) α²``."""
    g = ghost_field(spec, alphas, T, h_t)
    grid = spec.grid
    v = spec.operator.potential.sup_norm if v_norm is None else v_norm
    ht = g.t[1] - g.t[0]
    mass = grid.cell_volume * np.sum(g.values**2, axis=1)
    grad = _space_gradient_energy(g.values, grid)
    dt = np.diff(g.values, axis=0) / ht
    t_energy = float(np.sum(grid.cell_volume * np.sum(dt**2, axis=1)) * ht)
    m_int = float(integrate.trapezoid(mass, g.t))
    g_int = float(integrate.trapezoid(grad, g.t))
    h1 = m_int + g_int + t_energy
    a2 = np.asarray(alphas, dtype=float) ** 2
    lower = T / 2 * float(a2.sum())
    upper = 2 * T * (1 + (1 + v) * T**2) * float(np.sum(beta_k(spec.eigenvalues, T) * a2))
    terms = {"mass": m_int, "space_gradient": g_int, "t_derivative": t_energy}
    return SandwichReport(lower, h1, upper, lower <= slack * h1, h1 <= slack * upper, terms)


def ghost_pde_residual(grid: GridSpec, phis, E, potential, alphas, T, h_t) -> float:
    """Max over interior nodes of ``|Δ_h F + ∂²_t F - V F|`` (second differences)."""
    phis = np.asarray(phis, dtype=float).reshape(grid.n, -1)
    M = int(round(T / h_t))
    t = np.linspace(-T, T, 2 * M + 1)
    ht = t[1] - t[0]
    F = (s_k(np.asarray(E)[None, :], t[:, None]) * alphas) @ phis.T  # (nt, n)
    lap = laplacian(grid)
    inner = F[1:-1]
    dtt = (F[2:] - 2 * F[1:-1] + F[:-2]) / ht**2
    res = -(lap @ inner.T).T + dtt - np.asarray(potential)[None, :] * inner
    return float(np.max(np.abs(res)))


def ghost_derivative_error(spec: SpectralData, alphas, h_t) -> float:
    """``max |(F(h_t) - F(-h_t)) / 2h_t - Σ α_k φ_k|``."""
    alphas = np.asarray(alphas, dtype=float)
    E = spec.eigenvalues
    fp = (s_k(E, h_t) * alphas) @ spec.vectors.T
    fm = (s_k(E, -h_t) * alphas) @ spec.vectors.T
    return float(np.max(np.abs((fp - fm) / (2 * h_t) - spec.vectors @ alphas)))


def convergence_order(hs, errors) -> float:
    """Least-squares slope of ``log error`` against ``log h``."""
    return float(np.polyfit(np.log(hs), np.log(errors), 1)[0])


# ---------------------------------------------------------------------------
# Carleman weights


def psi_form(x, xi):
    """``Σ ∂_jk ψ (ξ_j ξ_k + ∂_j ψ ∂_k ψ)`` for ``ψ = -t + t²/2 - |x'|²/4``."""
    x = np.atleast_2d(x)
    xi = np.atleast_2d(xi)
    hess = np.concatenate([np.full(x.shape[1] - 1, -0.5), [1.0]])
    g = psi_gradient(x)
    return np.sum(hess * (xi**2 + g**2), axis=1)


def psi_gradient(x):
    x = np.atleast_2d(x)
    g = -x / 2
    g[:, -1] = x[:, -1] - 1.0
    return g


@dataclass
class PsiConditionReport:
    r: float
    sampled_min: float
    analytic_bound: float
    samples: int
    claimed: bool  # r < 2 - sqrt(2)

    @property
    def passed(self) -> bool:
        return self.sampled_min > 0 if self.claimed else True


def _constraint_xi(x, rng):
    """Random ``ξ`` orthogonal to ``∇ψ(x)`` with ``|ξ| = |∇ψ(x)|``."""
    g = psi_gradient(x)
    z = rng.standard_normal(g.shape)
    gn = g / np.linalg.norm(g, axis=1, keepdims=True)
    z -= np.sum(z * gn, axis=1, keepdims=True) * gn
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    return z * np.linalg.norm(g, axis=1, keepdims=True)


def check_psi_condition(r, sample_count=50_000, seed=0, d=1) -> PsiConditionReport:
    """Sampled minimum of the Hessian form over the constraint set on ``B_r⁺``.

    Besides uniform samples of the half-ball the worst corner ``|x'| -> r``,
    ``x_{d+1} = 0`` is always included.
    """
    if r <= 0:
        raise ConfigurationError("r must be positive")
    rng = rng_for(seed, 0)
    n = int(sample_count)
    D = d + 1
    v = rng.standard_normal((n, D))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    v[:, -1] = np.abs(v[:, -1])
    x = v * (r * rng.random(n) ** (1.0 / D))[:, None]
    # boundary corner of the closure
    edge = np.zeros((64, D))
    u = rng.standard_normal((64, d))
    edge[:, :d] = r * (1 - 1e-12) * u / np.linalg.norm(u, axis=1, keepdims=True)
    x = np.vstack([x, edge])
    xi = _constraint_xi(x, rng)
    vals = psi_form(x, xi)
    bound = -(r**2) / 4 + (1 - r) ** 2 / 2
    return PsiConditionReport(float(r), float(vals.min()), bound, int(vals.size),
                              bool(r < 2 - math.sqrt(2)))


def ein(s) -> float:
    """``∫_0^s (1 - e^{-t})/t dt`` by adaptive quadrature."""
    if s < 0:
        raise ConfigurationError("s must be nonnegative")
    if s == 0:
        return 0.0

    def f(t):
        return -math.expm1(-t) / t if t > 0 else 1.0

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, 0.0, s, epsabs=1e-13, epsrel=1e-13, limit=200)
        except integrate.IntegrationWarning as exc:
            raise NumericError(f"quadrature did not converge at s={s}: {exc}") from exc
    if err > 1e-12:
        raise NumericError(f"quadrature error estimate {err:.2e} exceeds 1e-12")
    return val


def ein_series(s, terms=60) -> float:
    """``Σ_{k>=1} (-1)^{k+1} s^k / (k k!)``."""
    total, term = 0.0, 1.0
    for k in range(1, terms + 1):
        term *= s / k
        total += (-1) ** (k + 1) * term / k
    return total


def psi_weight(s) -> float:
    """``ψ(s) = s exp(-Ein(s))``."""
    return s * math.exp(-ein(s))


def weight_w(x, rho=1.0) -> float:
    """``w(x) = ψ(|x| / ρ)``."""
    return psi_weight(float(np.linalg.norm(np.atleast_1d(x))) / rho)


@dataclass
class BoundsReport:
    rho: float
    samples: int
    lower_violations: int
    upper_violations: int

    @property
    def passed(self) -> bool:
        return self.lower_violations == 0 and self.upper_violations == 0


def bounds_check(rho=1.0, sample_count=1000, seed=0, d=1) -> BoundsReport:
    """``|x|/(ρe) <= w(x) <= |x|/ρ`` for ``0 < |x| <= ρ``."""
    rng = rng_for(seed, 1)
    dirs = rng.standard_normal((sample_count, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = rho * (1.0 - rng.random(sample_count))  # (0, rho]
    lo = up = 0
    for r, u in zip(radii, dirs):
        w = weight_w(r * u, rho)
        lo += w < r / (rho * math.e)
        up += w > r / rho
    return BoundsReport(rho, sample_count, int(lo), int(up))


# ---------------------------------------------------------------------------
# hyperbola distance


def _branch(delta, which):
    a2 = 1 - delta**2 / 4 if which == 2 else 1 - delta**2 / 2
    a, b = math.sqrt(a2), math.sqrt(2 * a2)
    y_max = b * math.sqrt(1 / a2 - 1)  # where the branch meets x = 0

    def curve(y):
        y = np.asarray(y, dtype=float)
        return np.stack([1 - a * np.sqrt(1 + y**2 / b**2), y], axis=-1)

    return curve, y_max


@dataclass
class HyperbolaReport:
    delta: float
    distance: float
    brute_force: float
    bound: float
    points: tuple

    @property
    def passed(self) -> bool:
        return self.distance > self.bound


def _brute(c2, y2, c3, y3, resolution):
    n2 = int(math.ceil(y2 / resolution)) + 1
    n3 = int(math.ceil(y3 / resolution)) + 1
    P = c2(np.linspace(0, y2, n2))
    Q = c3(np.linspace(0, y3, n3))
    dist, _ = cKDTree(Q).query(P)
    return float(dist.min())


def hyperbola_distance(delta, resolution=1e-4, starts=7) -> HyperbolaReport:
    """Distance of the branches ``(x-1)²/a_i² - y²/b_i² = 1`` in the first
    quadrant (``a_2² = 1 - δ²/4``, ``a_3² = 1 - δ²/2``, ``b_i² = 2a_i²``).

    Bounded multi-start minimization over the two branch parameters,
    checked against a k-d tree search on samples ``resolution`` apart.
    """
    if not 0 < delta <= 0.5:
        raise InvalidGeometry(f"delta must lie in (0, 1/2], got {delta}")
    c2, y2 = _branch(delta, 2)
    c3, y3 = _branch(delta, 3)

    def f(p):
        return float(np.sum((c2(p[0]) - c3(p[1])) ** 2))

    best = None
    grid = [(u, v) for u in np.linspace(0, y2, starts) for v in np.linspace(0, y3, starts)]
    for p0 in grid:
        res = optimize.minimize(f, p0, method="L-BFGS-B", bounds=[(0, y2), (0, y3)],
                                options={"ftol": 1e-15, "gtol": 1e-12})
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun):
        raise NumericError("hyperbola distance minimization stalled")
    brute = _brute(c2, y2, c3, y3, resolution)
    dist = math.sqrt(best.fun)
    if dist > brute + 1e-12:
        raise NumericError(f"minimizer {dist} worse than grid search {brute}")
    return HyperbolaReport(float(delta), dist, brute, delta**2 / 16,
                           (tuple(c2(best.x[0])), tuple(c3(best.x[1]))))
