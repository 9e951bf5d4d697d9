"""Grids on the open box (-L/2, L/2)^d, equidistributed point sequences,
sampling-set masks and Delone-set verification.
"""

from __future__ import annotations

import io
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ConfigurationError, InvalidGeometry

BOUNDARY_CONDITIONS = ("dirichlet", "neumann", "periodic")
DEFAULT_NODE_CAP = 200_000
SEQUENCE_MODES = ("centered", "uniform_random")

# relative tolerance for "node lies on a sphere" in mask quadrature weights
_SPHERE_RTOL = 1e-12


def _as_cell_count(value, what):
    k = round(value)
    if abs(value - k) > 1e-9 * max(1.0, abs(value)):
        raise ConfigurationError(f"{what} must be an integer, got {value!r}")
    return int(k)


@dataclass(frozen=True)
class GridSpec:
    """Uniform finite-difference grid on ``(-L/2, L/2)^d``.

    Node placement depends on the boundary condition:

    * ``dirichlet`` -- interior vertices ``-L/2 + i h``, ``i = 1 .. L m - 1``;
    * ``periodic`` -- vertices ``-L/2 + i h``, ``i = 0 .. L m - 1`` (the
      face ``x = L/2`` is identified with ``x = -L/2``);
    * ``neumann`` -- cell centres ``-L/2 + (i + 1/2) h``, ``i = 0 .. L m - 1``.

    Nodes are enumerated lexicographically with the last axis fastest.
    """

    d: int
    L: float
    m: int
    bc: str = "dirichlet"
    cap: int = field(default=DEFAULT_NODE_CAP, compare=False, repr=False)

    def __post_init__(self):
        if self.d not in (1, 2, 3):
            raise ConfigurationError(f"dimension must be 1, 2 or 3, got {self.d}")
        if self.bc not in BOUNDARY_CONDITIONS:
            raise ConfigurationError(f"unknown boundary condition {self.bc!r}")
        if self.m <= 0 or self.L <= 0:
            raise ConfigurationError("L and m must be positive")
        cells = _as_cell_count(self.L * self.m, "L*m")
        if cells < 2:
            raise ConfigurationError(f"L*m must be >= 2, got {cells}")
        if self.n > self.cap:
            raise CapacityError(f"grid has {self.n} nodes, cap is {self.cap}")

    @property
    def h(self) -> float:
        return 1.0 / self.m

    @property
    def cells(self) -> int:
        """Number of mesh cells per axis (``L m``)."""
        return _as_cell_count(self.L * self.m, "L*m")

    @property
    def n_axis(self) -> int:
        return self.cells - 1 if self.bc == "dirichlet" else self.cells

    @property
    def shape(self) -> tuple:
        return (self.n_axis,) * self.d

    @property
    def n(self) -> int:
        return self.n_axis**self.d

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    def axis_coords(self) -> np.ndarray:
        c = self.cells
        if self.bc == "dirichlet":
            idx = np.arange(1, c, dtype=float)
            return (2.0 * idx - c) / (2.0 * self.m)
        if self.bc == "periodic":
            idx = np.arange(c, dtype=float)
            return (2.0 * idx - c) / (2.0 * self.m)
        idx = np.arange(c, dtype=float)
        return (2.0 * idx + 1.0 - c) / (2.0 * self.m)

    def coords(self) -> np.ndarray:
        """Node coordinates, shape ``(n, d)``, lexicographic order."""
        ax = self.axis_coords()
        mesh = np.meshgrid(*([ax] * self.d), indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def inner(self, u, v) -> float:
        """Mesh inner product ``h^d sum u_i v_i``."""
        return float(self.cell_volume * np.dot(np.asarray(u).ravel(), np.asarray(v).ravel()))

    def norm(self, u) -> float:
        return math.sqrt(max(self.inner(u, u), 0.0))

    def with_side(self, L) -> "GridSpec":
        return GridSpec(self.d, L, self.m, self.bc, self.cap)


def make_grid(d, L, m, bc="dirichlet", cap=DEFAULT_NODE_CAP) -> GridSpec:
    return GridSpec(int(d), float(L), int(m), bc, cap)


# ---------------------------------------------------------------------------
# equidistributed sequences


def _check_geometry(G, delta, d, L):
    if not (G > 0 and 0 < delta < G / 2):
        raise InvalidGeometry(
            f"(G, delta)-equidistribution requires 0 < delta < G/2; got G={G}, delta={delta}"
        )
    ratio = L / G
    k = round(ratio)
    if k < 1 or abs(ratio - k) > 1e-9 * max(1.0, ratio):
        raise InvalidGeometry(f"box side L={L} must be a positive multiple of G={G}")
    if d not in (1, 2, 3):
        raise InvalidGeometry(f"dimension must be 1, 2 or 3, got {d}")
    return int(k)


def cell_centers(G, d, L) -> np.ndarray:
    """Centres of the ``(L/G)^d`` cells ``Lambda_G + j`` tiling the box."""
    k = round(L / G)
    ax = -L / 2 + G * (np.arange(k) + 0.5)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    return np.stack([g.ravel() for g in mesh], axis=1)


@dataclass(frozen=True)
class EquidistributedSequence:
    G: float
    delta: float
    d: int
    L: float
    centers: np.ndarray  # (M, d) cell centres j
    points: np.ndarray  # (M, d) z_j

    def contained(self) -> np.ndarray:
        """Per-point containment flag ``B(z_j, delta) ⊂ Λ_G + j``."""
        off = np.abs(self.points - self.centers)
        return np.all(off <= self.G / 2 - self.delta, axis=1)

    def to_text(self) -> str:
        buf = io.StringIO()
        buf.write(f"{self.G:.17g} {self.delta:.17g} {self.d} {self.L:.17g}\n")
        for c, z in zip(self.centers, self.points):
            buf.write(" ".join(f"{v:.17g}" for v in (*c, *z)) + "\n")
        return buf.getvalue()

    @classmethod
    def from_text(cls, text: str) -> "EquidistributedSequence":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        G, delta, d, L = lines[0].split()
        d = int(d)
        rows = np.array([[float(v) for v in ln.split()] for ln in lines[1:]], dtype=float)
        rows = rows.reshape(-1, 2 * d)
        seq = cls(float(G), float(delta), d, float(L), rows[:, :d].copy(), rows[:, d:].copy())
        _check_geometry(seq.G, seq.delta, d, seq.L)
        return seq


def _clamp_into(z, c, half):
    # pull a coordinate back inside |z - c| <= half if rounding pushed it out
    while abs(z - c) > half:
        z = np.nextafter(z, c)
    return z


def generate_sequence(G, delta, d, L, mode="centered", seed=0) -> EquidistributedSequence:
    """One point per ``G``-cell so that the ``delta``-ball stays in its cell.

    ``uniform_random`` draws each ``z_j`` uniformly from the admissible
    sub-cube of half-width ``G/2 - delta``; the generator for cell ``i`` is
    seeded from ``(seed, i)`` so the draw does not depend on cell order.
    """
    _check_geometry(G, delta, d, L)
    if mode not in SEQUENCE_MODES:
        raise ConfigurationError(f"unknown sequence mode {mode!r}")
    centers = cell_centers(G, d, L)
    if mode == "centered":
        points = centers.copy()
    else:
        half = G / 2 - delta
        points = np.empty_like(centers)
        for i, c in enumerate(centers):
            rng = np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(i,)))
            z = c + rng.uniform(-half, half, size=d)
            points[i] = [_clamp_into(zk, ck, half) for zk, ck in zip(z, c)]
    return EquidistributedSequence(float(G), float(delta), int(d), float(L), centers, points)


# ---------------------------------------------------------------------------
# masks


@dataclass(frozen=True)
class Mask:
    """Node-level indicator of a sampling set on a grid.

    ``indicator`` marks nodes strictly inside the set.  ``weights`` are the
    quadrature weights used for ``L^2(W)`` norms: 1 inside, 1/2 for nodes
    lying exactly on a ball's sphere, 0 elsewhere.
    """

    grid: GridSpec
    indicator: np.ndarray
    weights: np.ndarray

    @property
    def measure(self) -> float:
        return self.grid.cell_volume * int(np.count_nonzero(self.indicator))

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.indicator))

    @classmethod
    def from_indicator(cls, grid: GridSpec, indicator) -> "Mask":
        ind = np.asarray(indicator, dtype=bool).ravel()
        if ind.size != grid.n:
            raise ConfigurationError("indicator size does not match grid")
        return cls(grid, ind, ind.astype(float))

    @classmethod
    def full(cls, grid: GridSpec) -> "Mask":
        return cls.from_indicator(grid, np.ones(grid.n, dtype=bool))

    @classmethod
    def empty(cls, grid: GridSpec) -> "Mask":
        return cls.from_indicator(grid, np.zeros(grid.n, dtype=bool))

    def weighted_norm2(self, u) -> float:
        u = np.asarray(u)
        return float(self.grid.cell_volume * np.sum(self.weights * u * u))


def build_mask(seq: EquidistributedSequence, grid: GridSpec) -> Mask:
    """Mark the nodes of ``grid`` inside ``W_delta(L)`` (open balls)."""
    if grid.d != seq.d:
        raise ConfigurationError("sequence and grid dimensions differ")
    x = grid.coords()
    r2 = seq.delta**2
    inside = np.zeros(grid.n, dtype=bool)
    sphere = np.zeros(grid.n, dtype=bool)
    for z in seq.points:
        near = np.all(np.abs(x - z) <= seq.delta, axis=1)
        if not near.any():
            continue
        idx = np.flatnonzero(near)
        d2 = np.sum((x[idx] - z) ** 2, axis=1)
        inside[idx[d2 < r2]] = True
        sphere[idx[np.abs(d2 - r2) <= _SPHERE_RTOL * r2]] = True
    weights = np.where(inside, 1.0, np.where(sphere, 0.5, 0.0))
    return Mask(grid, inside, weights)


def ball_volume(d, r) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


# ---------------------------------------------------------------------------
# Delone sets


@dataclass(frozen=True)
class DeloneSet:
    points: np.ndarray  # (M, d)
    G1: float
    G2: float

    def __post_init__(self):
        if not 0 < self.G1 < self.G2:
            raise InvalidGeometry("Delone scales must satisfy 0 < G1 < G2")


@dataclass
class DeloneReport:
    ok: bool
    discrete_ok: bool
    dense_ok: bool
    worst_violations: list
    probes: int


def verify_delone(dset: DeloneSet, region, pitch=None) -> DeloneReport:
    """Check both Delone conditions for a finite point set inside ``region``.

    ``region`` is a pair ``(lo, hi)`` of corner arrays.  Uniform discreteness
    is checked exactly: two points share an open cube of side ``G1`` iff
    their sup-distance is below ``G1``.  Relative density is probed on the
    cubes of side ``G2`` lying in the region whose centres form a lattice of
    pitch ``G1/4`` (or ``pitch``); finer structure between probes is missed.
    """
    lo, hi = (np.atleast_1d(np.asarray(v, dtype=float)) for v in region)
    d = lo.size
    pts = np.asarray(dset.points, dtype=float).reshape(-1, d)
    pitch = dset.G1 / 4 if pitch is None else float(pitch)
    violations = []

    discrete_ok = True
    for i, j in itertools.combinations(range(len(pts)), 2):
        gap = float(np.max(np.abs(pts[i] - pts[j])))
        if gap < dset.G1:
            discrete_ok = False
            violations.append(
                {
                    "condition": "uniform_discreteness",
                    "translate": ((pts[i] + pts[j]) / 2).tolist(),
                    "points": [pts[i].tolist(), pts[j].tolist()],
                    "excess": dset.G1 - gap,
                }
            )
    violations.sort(key=lambda v: -v["excess"])

    half = dset.G2 / 2
    axes = []
    for k in range(d):
        a, b = lo[k] + half, hi[k] - half
        if b < a:
            axes.append(np.array([]))
            continue
        n = int(math.floor((b - a) / pitch + 1e-9))
        ax = a + pitch * np.arange(n + 1)
        if ax[-1] < b - 1e-12:
            ax = np.append(ax, b)
        axes.append(ax)
    probes = 0
    worst = None
    if all(ax.size for ax in axes):
        grid = np.stack([g.ravel() for g in np.meshgrid(*axes, indexing="ij")], axis=1)
        probes = len(grid)
        if len(pts):
            # sup-distance from each probe centre to its nearest point
            gaps = np.array([np.min(np.max(np.abs(pts - c), axis=1)) for c in grid])
        else:
            gaps = np.full(len(grid), np.inf)
        bad = gaps >= half
        if bad.any():
            k = int(np.argmax(gaps))
            worst = {
                "condition": "relative_density",
                "translate": grid[k].tolist(),
                "excess": float(gaps[k] - half) if np.isfinite(gaps[k]) else float("inf"),
            }
    dense_ok = worst is None
    if worst is not None:
        violations.append(worst)
    return DeloneReport(discrete_ok and dense_ok, discrete_ok, dense_ok, violations, probes)
