"""Unique-continuation constants on spectral subspaces.

The observed constant is the exact worst case over the span of the
eigenvectors below ``b``: the smallest eigenvalue of the ``k x k`` form
``B_mn = <φ_m, χ_W φ_n>``.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import FitError, InvalidGeometry, UndefinedSubspaceError
from .grid import Mask, build_mask, generate_sequence, make_grid
from .hamiltonian import PotentialField, assemble, sample_potential
from .parallel import ordered_map
from .spectral import SpectralData, eigs_below


@dataclass
class UcpResult:
    value: float
    witness: np.ndarray
    coefficients: np.ndarray

    def __float__(self):
        return self.value


def mask_form(spec: SpectralData, weights) -> np.ndarray:
    """``B_mn = h^d sum_i w_i φ_m(i) φ_n(i)``."""
    w = np.asarray(weights, dtype=float)
    Phi = spec.vectors
    B = spec.grid.cell_volume * (Phi.T @ (w[:, None] * Phi))
    return (B + B.T) / 2


def ucp_constant_exact(spec: SpectralData, mask: Mask, use_indicator=False) -> UcpResult:
    """Smallest ``||φ||²_W / ||φ||²`` over the span of ``spec``.

    With ``use_indicator`` the strict node indicator is used instead of the
    quadrature weights (needed where the indicator itself enters a bound).
    """
    if spec.k == 0:
        raise UndefinedSubspaceError("spectral subspace is empty (k = 0)")
    w = mask.indicator.astype(float) if use_indicator else mask.weights
    vals, vecs = np.linalg.eigh(mask_form(spec, w))
    c = vecs[:, 0]
    return UcpResult(float(vals[0]), spec.vectors @ c, c)


def c_sfuc(d, delta, b, v_norm, N) -> float:
    """``δ^{N(1 + ||V||^{2/3} + sqrt(b))}``; negative ``b`` counts as 0."""
    if not 0 < delta < 0.5:
        raise InvalidGeometry(f"delta must lie in (0, 1/2), got {delta}")
    if N <= 0:
        raise ValueError("N must be positive")
    expo = N * (1.0 + v_norm ** (2.0 / 3.0) + math.sqrt(max(b, 0.0)))
    return delta**expo


def c_sfuc_scaled(d, delta, b, v_norm, G, t, N) -> float:
    """Constant for cell size ``G`` and diffusion ``t``."""
    if not 0 < delta < G / 2:
        raise InvalidGeometry(f"delta must lie in (0, G/2), got delta={delta}, G={G}")
    if N <= 0 or t <= 0:
        raise ValueError("N and t must be positive")
    expo = N * (
        1.0
        + G ** (4.0 / 3.0) * v_norm ** (2.0 / 3.0) / t ** (2.0 / 3.0)
        + G * math.sqrt(max(b, 0.0) / t)
    )
    return (delta / G) ** expo


def c_sfuc_lower(delta, b, v_norm, M) -> float:
    """The cruder floor ``δ^{M(1 + ||V||^{2/3} + sqrt|b|)}``."""
    return delta ** (M * (1.0 + v_norm ** (2.0 / 3.0) + math.sqrt(abs(b))))


# ---------------------------------------------------------------------------
# scale-freeness scan


@dataclass
class UcpConfig:
    d: int = 1
    G: float = 1.0
    delta: float = 0.25
    b: float = 50.0
    m: int = 32
    bc: str = "periodic"
    mode: str = "centered"
    seed: int = 0
    potential: object = None  # anything sample_potential accepts
    t: float = 1.0
    N: float | None = None
    ratio_floor: float = 0.5
    tol: float = 1e-8


@dataclass
class UcpRecord:
    L: float
    delta: float
    b: float
    v_norm: float
    k: int
    C_obs: float
    C_sfuc: float | None
    N: float | None
    passed: bool


@dataclass
class UcpReport:
    config: UcpConfig
    records: list = field(default_factory=list)
    ratio: float = float("nan")
    passed: bool = False

    def values(self):
        return np.array([r.C_obs for r in self.records])


def observe(cfg: UcpConfig, L, delta=None, b=None) -> UcpRecord:
    """Build grid, operator, spectrum and mask for one box and measure C_obs."""
    delta = cfg.delta if delta is None else delta
    b = cfg.b if b is None else b
    grid = make_grid(cfg.d, L, cfg.m, cfg.bc)
    seq = generate_sequence(cfg.G, delta, cfg.d, L, cfg.mode, cfg.seed)
    mask = build_mask(seq, grid)
    pot = sample_potential(cfg.potential, grid)
    spec = eigs_below(assemble(grid, pot, cfg.t), b, tol=cfg.tol)
    value = ucp_constant_exact(spec, mask).value
    formula = None
    ok = True
    if cfg.N is not None:
        formula = c_sfuc_scaled(cfg.d, delta, b, pot.sup_norm, cfg.G, cfg.t, cfg.N)
        ok = value >= formula
    return UcpRecord(float(L), float(delta), float(b), pot.sup_norm, spec.k, value, formula,
                     cfg.N, ok)


def scan_scale_free(cfg: UcpConfig, L_list, workers=None) -> UcpReport:
    """C_obs for each box side; passes when ``min >= ratio_floor * max``
    (and, with ``N`` given, when every C_obs clears the formula)."""
    Ls = sorted(float(L) for L in L_list)

    def job(L):
        try:
            return observe(cfg, L)
        except Exception as exc:  # annotate with the offending box
            raise type(exc)(f"L={L}: {exc}") from exc

    records = ordered_map(job, Ls, workers)
    vals = np.array([r.C_obs for r in records])
    ratio = float(vals.min() / vals.max()) if vals.size and vals.max() > 0 else 0.0
    passed = bool(ratio >= cfg.ratio_floor and all(r.passed for r in records))
    return UcpReport(cfg, records, ratio, passed)


# ---------------------------------------------------------------------------
# exponent fit


@dataclass
class ExponentFit:
    N_hat: float
    slope: float
    intercept: float
    residual: float
    used: int
    excluded: int


def fit_exponent(deltas, values, b=0.0, v_norm=0.0) -> ExponentFit:
    """Least-squares slope of ``ln C`` against ``ln δ``, divided by the
    energy factor ``1 + ||V||^{2/3} + sqrt(max(b, 0))``."""
    deltas = np.asarray(deltas, dtype=float)
    values = np.asarray(values, dtype=float)
    good = values > 0
    excluded = int(np.count_nonzero(~good))
    if excluded:
        warnings.warn(f"{excluded} non-positive C_obs values excluded from the fit", stacklevel=2)
    x, y = np.log(deltas[good]), np.log(values[good])
    if np.unique(x).size < 4:
        raise FitError(f"need at least 4 distinct delta values with C_obs > 0, got {np.unique(x).size}")
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    factor = 1.0 + v_norm ** (2.0 / 3.0) + math.sqrt(max(b, 0.0))
    return ExponentFit(float(slope / factor), float(slope), float(intercept), resid,
                       int(x.size), excluded)


# ---------------------------------------------------------------------------
# eigenvalue lifting


@dataclass
class LiftingReport:
    hypothesis_ok: bool
    gaps: np.ndarray
    observed_floor: np.ndarray
    formula_floor: float | None
    lam_base: np.ndarray
    lam_lifted: np.ndarray
    nonnegative: bool
    floor_ok: bool
    formula_ok: bool | None
    note: str = ""

    @property
    def passed(self) -> bool:
        return self.hypothesis_ok and self.nonnegative and self.floor_ok


def lifting_check(A: PotentialField, B: PotentialField, alpha, mask: Mask, b, N=None,
                  G=1.0, delta=None, tol=1e-8, gap_slack=1e-10,
                  floor_slack=1e-8) -> LiftingReport:
    """Compare ``λ_i(-Δ + A + B)`` with ``λ_i(-Δ + A)`` below ``b``.

    Requires ``B >= α χ_W`` node-wise.  Each gap must be nonnegative and at
    least ``α`` times the mask constant of the span of the first ``i``
    lifted eigenvectors (min-max); with ``N`` the formula floor is reported
    for comparison.
    """
    grid = A.grid
    chi = mask.indicator
    hyp = bool(np.all(B.values[chi] >= alpha) and np.all(B.values >= 0))
    empty = np.zeros(0)
    if not hyp:
        return LiftingReport(False, empty, empty, None, empty, empty, False, False, None,
                             "hypothesis B >= alpha * chi_W violated")
    lifted = eigs_below(assemble(grid, A + B), b, tol=tol)
    k = lifted.k
    # B >= 0, so the base operator has at least k eigenvalues below b
    lam_b = eigs_below(assemble(grid, A), b, tol=tol).eigenvalues[:k]
    gaps = lifted.eigenvalues - lam_b
    floors = np.empty(k)
    B_form = mask_form(lifted, chi.astype(float))
    for i in range(k):
        floors[i] = alpha * np.linalg.eigvalsh(B_form[: i + 1, : i + 1])[0]
    formula = None
    formula_ok = None
    if N is not None and delta is not None:
        formula = alpha * c_sfuc_scaled(grid.d, delta, b, (A + B).sup_norm, G, 1.0, N)
        formula_ok = bool(np.all(gaps >= formula - floor_slack))
    return LiftingReport(
        True, gaps, floors, formula, lam_b, lifted.eigenvalues,
        bool(np.all(gaps >= -gap_slack)), bool(np.all(gaps >= floors - floor_slack)), formula_ok,
    )
