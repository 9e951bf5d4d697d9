"""Single-site families, random breather/alloy potentials and the
single-site condition checkers.

A profile is a function ``u`` on ``R^d``; a family ``{u_t}`` is built from
it by dilation (``u_t(x) = u(x/t)``, ``u_0 = 0``) or by scaling
(``u_t = t u``, the alloy case).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ConfigurationError, DataError, ResolutionError, UnsupportedShape
from .grid import DeloneSet, GridSpec
from .hamiltonian import PotentialField
from .parallel import rng_for

FAMILY_KINDS = ("standard_ball", "dilation_of_profile", "alloy", "delone_alloy")


# ---------------------------------------------------------------------------
# profiles


def _bump(s):
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    inside = s < 1
    out[inside] = np.exp(1.0 / (s[inside] ** 2 - 1.0))
    return out


def _hat(s):
    s = np.asarray(s, dtype=float)
    return np.where(s < 1, 1.0 - s, 0.0)


def _power(a):
    def f(s):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            return np.where(s < 1, np.power(s, -a, where=s > 0, out=np.full_like(s, np.inf)), 0.0)

    return f


def _ball(r):
    def f(s):
        return np.where(np.asarray(s, dtype=float) < r, 1.0, 0.0)

    return f


def _neg_hat(s):
    s = np.asarray(s, dtype=float)
    return np.where(s < 1, s - 1.0, 0.0)


RADIAL_EXPRESSIONS = {
    "bump": (lambda: _bump, 1.0),
    "hat": (lambda: _hat, 1.0),
    "neg_hat": (lambda: _neg_hat, 1.0),
}


@dataclass(frozen=True)
class ConvexCertificate:
    """Open polytope ``{x : <x, θ_i> < h_i}`` with an interior point."""

    center: np.ndarray
    directions: np.ndarray  # (q, d) unit vectors
    support: np.ndarray  # (q,)

    def contains(self, x) -> np.ndarray:
        return np.all(np.asarray(x) @ self.directions.T < self.support, axis=-1)

    @property
    def radius(self) -> float:
        # bounding radius of a polytope given by enough directions
        return float(np.max(np.abs(self.support))) * 2.0

    @classmethod
    def from_text(cls, text: str) -> "ConvexCertificate":
        rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
        if rows[0][0] != "center":
            raise ConfigurationError("convex certificate must start with a 'center' line")
        center = np.array([float(v) for v in rows[0][1:]])
        body = np.array([[float(v) for v in r] for r in rows[1:]])
        dirs = body[:, :-1]
        dirs = dirs / np.linalg.norm(dirs, axis=1, keepdims=True)
        cert = cls(center, dirs, body[:, -1])
        if not cert.contains(center[None, :])[0]:
            raise ConfigurationError("certificate centre is not interior")
        return cert


@dataclass(frozen=True)
class Profile:
    """Single-site profile.

    ``kind`` is ``radial`` (``radial_fn`` gives ``r_u(s)``), ``convex``
    (indicator of a certified convex set) or ``general`` (callable on
    ``(n, d)`` points, no structural guarantees).
    """

    kind: str
    name: str
    radius: float
    radial_fn: object = None
    certificate: ConvexCertificate | None = None
    general_fn: object = None

    def radial(self, s) -> np.ndarray:
        if self.kind != "radial":
            raise UnsupportedShape(f"profile {self.name!r} is not radial")
        return self.radial_fn(np.asarray(s, dtype=float))

    def __call__(self, x) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.kind == "radial":
            return self.radial_fn(np.linalg.norm(x, axis=1))
        if self.kind == "convex":
            return self.certificate.contains(x).astype(float)
        return np.asarray(self.general_fn(x), dtype=float)


def radial_profile(name, fn, radius=1.0) -> Profile:
    return Profile("radial", name, float(radius), radial_fn=fn)


def ball_profile(r=1.0) -> Profile:
    return Profile("radial", f"ball:{r:g}", float(r), radial_fn=_ball(float(r)))


def parse_profile(text: str, base_dir=".") -> Profile:
    """Parse ``radial <expr-id|table> params...``, ``indicator ball r`` or
    ``indicator convex <certificate file>``."""
    tok = text.split()
    if len(tok) < 2:
        raise ConfigurationError(f"bad profile description {text!r}")
    if tok[0] == "indicator" and tok[1] == "ball":
        return ball_profile(float(tok[2]) if len(tok) > 2 else 1.0)
    if tok[0] == "indicator" and tok[1] == "convex":
        cert = ConvexCertificate.from_text(Path(base_dir, tok[2]).read_text())
        return Profile("convex", f"convex:{tok[2]}", cert.radius, certificate=cert)
    if tok[0] == "radial":
        if tok[1] in RADIAL_EXPRESSIONS:
            make, radius = RADIAL_EXPRESSIONS[tok[1]]
            return radial_profile(tok[1], make(), radius)
        if tok[1] == "power":
            a = float(tok[2])
            return radial_profile(f"power:{a:g}", _power(a), 1.0)
        if tok[1] == "table":
            data = np.loadtxt(Path(base_dir, tok[2]), ndmin=2)
            s, r = data[:, 0], data[:, 1]
            radius = float(s[-1])

            def fn(x, s=s, r=r, radius=radius):
                return np.where(x < radius, np.interp(x, s, r), 0.0)

            return radial_profile(f"table:{tok[2]}", fn, radius)
    raise ConfigurationError(f"unknown profile description {text!r}")


# ---------------------------------------------------------------------------
# families


@dataclass(frozen=True)
class BreatherFamily:
    kind: str
    profile: Profile
    G_u: float
    u_max: float
    params: dict | None = None

    def __post_init__(self):
        if self.kind not in FAMILY_KINDS:
            raise ConfigurationError(f"unknown family kind {self.kind!r}")

    @property
    def dilating(self) -> bool:
        return self.kind in ("standard_ball", "dilation_of_profile")

    def __call__(self, x, t) -> np.ndarray:
        """``u_t`` at points ``x`` of shape ``(n, d)``."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if self.dilating:
            if t == 0:
                return np.zeros(len(x))
            return self.profile(x / t)
        return t * self.profile(x)

    def radial(self, s, t) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        if self.dilating:
            if t == 0:
                return np.zeros_like(s)
            return self.profile.radial(s / t)
        return t * self.profile.radial(s)

    @property
    def support_radius(self) -> float:
        return self.profile.radius  # over t in [0, 1]

    def verify(self, d, t_grid=None, resolution=None) -> bool:
        """Support inside ``Λ_{G_u}`` and ``|u_t| <= u_max`` on a t-grid."""
        t_grid = np.linspace(0, 1, 11) if t_grid is None else t_grid
        res = resolution or self.G_u / 200
        ax = np.arange(-self.G_u, self.G_u + res / 2, res)
        if d == 1:
            pts = ax[:, None]
        else:
            pts = np.stack([g.ravel() for g in np.meshgrid(*([ax] * d), indexing="ij")], axis=1)
        outside = np.any(np.abs(pts) >= self.G_u / 2, axis=1)
        for t in t_grid:
            vals = self(pts, t)
            if np.any(np.abs(vals) > self.u_max * (1 + 1e-12)):
                return False
            if np.any(vals[outside] != 0):
                return False
        return True


def standard_family() -> BreatherFamily:
    """``u_t = χ_{B(0,t)}``."""
    return BreatherFamily("standard_ball", ball_profile(1.0), 2.0, 1.0,
                          {"alpha1": 1.0, "alpha2": 0.0, "beta1": 0.5, "beta2": 1.0})


def dilation_family(profile: Profile, u_max=None, G_u=None) -> BreatherFamily:
    if u_max is None:
        if profile.kind == "radial":
            v = np.abs(profile.radial(np.linspace(0, profile.radius, 4001)))
            u_max = float(np.max(v[np.isfinite(v)]))
        else:
            u_max = 1.0
    G_u = G_u if G_u is not None else 2 * math.ceil(profile.radius - 1e-12)
    return BreatherFamily("dilation_of_profile", profile, float(G_u), float(u_max))


def alloy_family(profile: Profile, u_max=None, G_u=None, delone=False) -> BreatherFamily:
    fam = dilation_family(profile, u_max, G_u)
    return BreatherFamily("delone_alloy" if delone else "alloy", profile, fam.G_u, fam.u_max)


# ---------------------------------------------------------------------------
# random fields


@dataclass(frozen=True)
class Measure:
    """Single-site distribution ``μ`` on ``[0, 1)``."""

    kind: str  # uniform | point | table
    lo: float = 0.0
    hi: float = 0.25
    edges: tuple = ()
    weights: tuple = ()

    def __post_init__(self):
        if self.kind not in ("uniform", "point", "table"):
            raise ConfigurationError(f"unknown measure kind {self.kind!r}")
        lo, hi = self.support
        if not (0 <= lo <= hi < 1):
            raise ConfigurationError("measure support must lie in [0, 1)")

    @property
    def support(self):
        if self.kind == "table":
            return float(self.edges[0]), float(self.edges[-1])
        if self.kind == "point":
            return float(self.lo), float(self.lo)
        return float(self.lo), float(self.hi)

    @property
    def mean(self) -> float:
        if self.kind == "table":
            e = np.asarray(self.edges, dtype=float)
            w = np.asarray(self.weights, dtype=float)
            return float(np.sum(w * (e[:-1] + e[1:]) / 2) / w.sum())
        lo, hi = self.support
        return (lo + hi) / 2

    @property
    def density_bound(self) -> float:
        if self.kind == "uniform":
            return 1.0 / (self.hi - self.lo) if self.hi > self.lo else math.inf
        if self.kind == "point":
            return math.inf
        e = np.asarray(self.edges, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        return float(np.max(w / w.sum() / np.diff(e)))

    def sample(self, rng: np.random.Generator) -> float:
        if self.kind == "point":
            return float(self.lo)
        if self.kind == "uniform":
            return float(rng.uniform(self.lo, self.hi)) if self.hi > self.lo else float(self.lo)
        e = np.asarray(self.edges, dtype=float)
        w = np.asarray(self.weights, dtype=float)
        k = rng.choice(len(w), p=w / w.sum())
        return float(rng.uniform(e[k], e[k + 1]))


def uniform_measure(lo, hi) -> Measure:
    return Measure("uniform", float(lo), float(hi))


def point_measure(value) -> Measure:
    return Measure("point", float(value), float(value))


_KEY_OFFSET = 1 << 20


@dataclass(frozen=True)
class RandomFieldConfig:
    family: BreatherFamily
    measure: Measure
    d: int = 1
    lattice: DeloneSet | None = None  # None means Z^d
    seed: int = 0

    @property
    def G1(self) -> float:
        return 1.0 if self.lattice is None else self.lattice.G1

    @property
    def K_u(self) -> float:
        return self.family.u_max * math.ceil(self.family.G_u / self.G1 - 1e-12) ** self.d

    def sites(self, L):
        """Sites whose single-site support can meet the box, with seed keys."""
        reach = L / 2 + self.family.G_u / 2
        if self.lattice is None:
            r = int(math.ceil(reach))
            ax = np.arange(-r, r + 1)
            pts = np.stack([g.ravel() for g in np.meshgrid(*([ax] * self.d), indexing="ij")], axis=1)
            pts = pts[np.all(np.abs(pts) < reach, axis=1)]
            keys = [tuple(int(v) + _KEY_OFFSET for v in p) for p in pts]
            return pts.astype(float), keys
        pts = np.asarray(self.lattice.points, dtype=float).reshape(-1, self.d)
        keep = np.flatnonzero(np.all(np.abs(pts) < reach, axis=1))
        return pts[keep], [(int(i),) for i in keep]

    def draw(self, L, trial_seed) -> np.ndarray:
        """One ``ω`` per site, each from its own ``(trial seed, site)`` stream."""
        _, keys = self.sites(L)
        return np.array([self.measure.sample(rng_for(trial_seed, *k)) for k in keys])


def assemble_random_potential(cfg: RandomFieldConfig, omega, grid: GridSpec) -> PotentialField:
    """``V_ω(x) = sum_j u_{ω_j}(x - j)`` on the grid nodes."""
    sites, _ = cfg.sites(grid.L)
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (len(sites),):
        raise DataError(f"expected {len(sites)} site values, got {omega.shape}")
    if np.any(omega < 0) or np.any(omega > 1):
        raise DataError("site parameters must lie in [0, 1]")
    x = grid.coords()
    values = np.zeros(grid.n)
    half = cfg.family.G_u / 2
    for j, w in zip(sites, omega):
        near = np.flatnonzero(np.all(np.abs(x - j) < half, axis=1))
        if near.size:
            values[near] += cfg.family(x[near] - j, w)
    field = PotentialField(grid, values)
    if field.sup_norm > cfg.K_u * (1 + 1e-12):
        raise DataError(f"|V_omega| = {field.sup_norm} exceeds K_u = {cfg.K_u}")
    return field


# ---------------------------------------------------------------------------
# condition (A)


@dataclass
class ConditionAReport:
    holds: bool
    witnesses: dict  # (t, delta) -> (x0, radius, threshold)
    alpha1: float
    alpha2: float
    beta1: float
    beta2: float
    fit_residual_alpha: float
    fit_residual_beta: float
    resolution: float
    sign: int = 1
    failures: list = field(default_factory=list)


def _runs(mask):
    """Start/stop index pairs of the True runs of a 1-D boolean array."""
    padded = np.concatenate([[False], mask, [False]])
    edges = np.flatnonzero(np.diff(padded.astype(int)))
    return edges.reshape(-1, 2)


def _radial_ball(family, t, delta, s, sign):
    diff = sign * (family.radial(s, t + delta) - family.radial(s, t))
    top = float(diff.max())
    if not top > 0:
        return None
    tau = top / 2
    best = None
    for a, b in _runs(diff >= tau):
        lo, hi = s[a], s[b - 1]
        if a == 0:
            r, c = hi, 0.0
        else:
            r, c = (hi - lo) / 2, (hi + lo) / 2
        if best is None or r > best[1]:
            best = (c, r, float(diff[a:b].min()))
    if best is None or best[1] <= 0:
        return None
    return best


def _grid_ball(family, t, delta, d, res, sign):
    R = family.support_radius * 1.05
    ax = np.arange(-R, R + res / 2, res)
    pts = np.stack([g.ravel() for g in np.meshgrid(*([ax] * d), indexing="ij")], axis=1)
    diff = sign * (family(pts, t + delta) - family(pts, t))
    top = float(diff.max())
    if not top > 0:
        return None
    tau = top / 2
    region = np.pad((diff >= tau).reshape((ax.size,) * d), 1)
    dist = ndimage.distance_transform_edt(region, sampling=res)
    k = np.unravel_index(np.argmax(dist), dist.shape)
    r = float(dist[k]) - res / 2
    if r <= 0:
        return None
    centre = np.array([ax[i - 1] for i in k])
    inside = np.linalg.norm(pts - centre, axis=1) < r
    return centre, r, float(diff[inside].min())


def check_condition_A(family: BreatherFamily, t_grid=None, delta_grid=None, resolution=None,
                      d=1, omega_plus=0.25, sign=1) -> ConditionAReport:
    """Search, for each probed ``(t, δ)``, the largest ball on which
    ``sign (u_{t+δ} - u_t)`` stays above half its maximum; the reported
    threshold is the smallest difference seen inside that ball.

    The exponents come from log-log fits of the worst (over ``t``) radius
    and threshold against ``δ``; the constants are the smallest observed
    ratios at the fitted exponents.
    """
    radial = family.profile.kind == "radial"
    t_grid = np.linspace(0.0, omega_plus, 6) if t_grid is None else np.asarray(t_grid, float)
    if delta_grid is None:
        delta_grid = np.geomspace(1e-3, 1e-2, 5) if radial else np.geomspace(0.05, 0.2, 4)
    delta_grid = np.asarray(delta_grid, float)
    delta_grid = delta_grid[delta_grid <= 1 - omega_plus + 1e-12]
    res = resolution or float(delta_grid.min()) / (40 if radial else 10)
    s = np.arange(0.0, family.support_radius * 1.05 + res, res) if radial else None

    witnesses = {}
    failures = []
    r_min = np.full(delta_grid.size, np.inf)
    tau_min = np.full(delta_grid.size, np.inf)
    for i, delta in enumerate(delta_grid):
        for t in t_grid:
            if t + delta > 1 + 1e-12:
                continue
            if radial:
                found = _radial_ball(family, t, delta, s, sign)
                if found is not None:
                    c, r, tau = found
                    x0 = np.zeros(d)
                    x0[0] = c
                    found = (x0, r, tau)
            else:
                found = _grid_ball(family, t, delta, d, res, sign)
            if found is None:
                failures.append((float(t), float(delta)))
                continue
            x0, r, tau = found
            witnesses[(float(t), float(delta))] = (np.asarray(x0), float(r), float(tau))
            r_min[i] = min(r_min[i], r)
            tau_min[i] = min(tau_min[i], tau)

    if failures or not witnesses:
        return ConditionAReport(False, witnesses, math.nan, math.nan, math.nan, math.nan,
                                math.nan, math.nan, res, sign, failures)
    smallest = float(r_min.min())
    if smallest < 4 * res:
        raise ResolutionError(
            f"probe resolution {res:g} too coarse for balls of radius {smallest:g}",
            required_resolution=smallest / 4,
        )
    x = np.log(delta_grid)
    b2, b0 = np.polyfit(x, np.log(r_min), 1)
    a2, a0 = np.polyfit(x, np.log(tau_min), 1)
    res_b = float(np.sqrt(np.mean((np.log(r_min) - (b2 * x + b0)) ** 2)))
    res_a = float(np.sqrt(np.mean((np.log(tau_min) - (a2 * x + a0)) ** 2)))
    a2, b2 = max(a2, 0.0), max(b2, 0.0)
    alpha1 = float(np.min(tau_min / delta_grid**a2))
    beta1 = float(np.min(r_min / delta_grid**b2))
    return ConditionAReport(True, witnesses, alpha1, float(a2), beta1, float(b2),
                            res_a, res_b, res, sign, failures)


def recheck_witnesses(family: BreatherFamily, report: ConditionAReport, factor=2) -> bool:
    """Re-sample every witness ball at ``factor`` times the resolution."""
    res = report.resolution / factor
    for (t, delta), (x0, r, tau) in report.witnesses.items():
        d = x0.size
        ax = np.arange(-r, r + res / 2, res)
        pts = np.stack([g.ravel() for g in np.meshgrid(*([ax] * d), indexing="ij")], axis=1)
        pts = pts[np.linalg.norm(pts, axis=1) < r] + x0
        diff = report.sign * (family(pts, t + delta) - family(pts, t))
        if np.any(diff < tau):
            return False
    return True


# ---------------------------------------------------------------------------
# profile classification


def _radial_grid(profile, h_r):
    return np.arange(h_r, profile.radius * 1.5, h_r)


def find_jumps(fn, s, jump_tol):
    """Locations in ``s`` where ``fn`` has a jump larger than ``jump_tol``.

    Consecutive samples with a large difference are bisected down to width
    ``1e-12`` (relative); a continuous function's difference shrinks away.
    """
    v = fn(s)
    dv = np.abs(np.diff(v))
    # a jump stands out against the neighbouring differences
    nb = np.maximum(np.concatenate([[0.0], dv[:-1]]), np.concatenate([dv[1:], [0.0]]))
    jumps = []
    for i in np.flatnonzero((dv > jump_tol) & (dv > 10 * nb)):
        a, b = s[i], s[i + 1]
        fa, fb = v[i], v[i + 1]
        while b - a > 1e-12 * max(1.0, abs(b)):
            mid = (a + b) / 2
            fm = float(fn(np.array([mid]))[0])
            if abs(fm - fa) >= abs(fb - fm):
                b, fb = mid, fm
            else:
                a, fa = mid, fm
        if abs(fb - fa) > jump_tol:
            jumps.append((a + b) / 2)
    return jumps


def _bounded(fn, radius):
    probes = radius * np.array([1e-12, 1e-9, 1e-6, 1e-3])
    v = np.abs(fn(probes))
    return bool(np.all(np.isfinite(v)) and v[0] <= 2 * v[2] + 1e-12)


def classify_profile(profile: Profile, h_r=None, jump_tol=None) -> dict:
    """Flags for the structural conditions B, C, D, E.

    B: indicator of a bounded convex set with 0 in its closure.
    C: positive, radial, decreasing, with a point of strictly negative
       derivative where the profile is positive.
    D: positive, radial, decreasing, with a jump away from 0.
    E: non-positive, radial, increasing, with a point of strictly positive
       derivative where the profile is negative.
    """
    if profile.kind == "convex":
        cert = profile.certificate
        zero_in = bool(np.all(cert.support >= 0))
        return {"B": zero_in, "C": False, "D": False, "E": False, "jumps": []}
    if profile.kind != "radial":
        raise UnsupportedShape(f"profile {profile.name!r} is neither radial nor certified convex")

    h_r = h_r or 1e-4 * profile.radius
    s = _radial_grid(profile, h_r)
    v = profile.radial(s)
    finite = np.isfinite(v)
    u_max = float(np.max(np.abs(v[finite]))) if finite.any() else 0.0
    jump_tol = jump_tol or 1e-6 * max(u_max, 1e-300)
    bounded = _bounded(profile.radial, profile.radius) and bool(finite.all())
    compact = bool(np.all(v[s >= profile.radius] == 0))
    dv = np.diff(v)
    slack = 1e-12 * max(u_max, 1.0)
    decreasing = bool(np.all(dv <= slack))
    increasing = bool(np.all(dv >= -slack))
    nonneg = bool(np.all(v >= 0)) and bool(np.any(v > 0))
    nonpos = bool(np.all(v <= 0)) and bool(np.any(v < 0))
    jumps = [j for j in find_jumps(profile.radial, s, jump_tol) if j > 0] if bounded else []

    # one-sided difference quotients must agree for the point to count as
    # differentiable
    left = (v[1:-1] - v[:-2]) / h_r
    right = (v[2:] - v[1:-1]) / h_r
    centre = (v[2:] - v[:-2]) / (2 * h_r)
    smooth = np.abs(left - right) <= 0.1 * np.maximum(np.abs(centre), 1e-300) + 1e-9
    inner = v[1:-1]
    slope_tol = 1e3 * jump_tol

    values01 = bool(np.all(np.isin(v, (0.0, 1.0))))
    ball_like = values01 and decreasing and nonneg and len(jumps) == 1

    common = bounded and compact
    C = common and nonneg and decreasing and bool(np.any(smooth & (centre < -slope_tol) & (inner > 0)))
    D = common and nonneg and decreasing and len(jumps) > 0
    E = common and nonpos and increasing and bool(np.any(smooth & (centre > slope_tol) & (inner < 0)))
    return {"B": bool(ball_like), "C": bool(C), "D": bool(D), "E": bool(E), "jumps": jumps}


# ---------------------------------------------------------------------------
# conditions (F) and (G)


@dataclass
class FGReport:
    f_shell_max: list
    f_increasing: bool
    g_eps0_max: float
    g_eps0_by_radius: list  # (radius, min eps0 over probes with s <= radius)
    g_holds: bool
    growth_exponent: float
    skipped: list


def _derivs(fn, s, eta):
    fp, f0, fm = fn(s + eta), fn(s), fn(s - eta)
    d1 = (fp - fm) / (2 * eta)
    d2 = (fp - 2 * f0 + fm) / eta**2
    return f0, d1, d2


def check_FG(profile: Profile, shells=5, h_r=None, g_tol=1e-3, probes_per_shell=64,
             g_min_radius=1e-8) -> FGReport:
    """Probe the two derivative conditions on a radial profile.

    (F) ratio ``|s r''/r'|`` is maximized on annular shells
    ``[R(1 - 2^-k), R(1 - 2^-(k+1))]`` approaching the support edge.
    (G) the largest ``ε₀ >= 0`` with ``-s r' - ε₀ r >= 0`` at all probes.
    """
    if profile.kind != "radial":
        raise UnsupportedShape("conditions F/G are probed on radial profiles")
    R = profile.radius
    h_r = h_r or 1e-4 * R
    fn = profile.radial
    skipped = []
    jumps = find_jumps(fn, np.arange(h_r, R * 1.5, h_r), 1e-9) if _bounded(fn, R) else []
    # a power singularity is only "bounded" away from 0; look for edge jumps anyway
    if not jumps:
        jumps = find_jumps(fn, np.linspace(0.5 * R, 1.5 * R, 20001), 1e-9)

    def near_jump(x, eta):
        return any(abs(x - j) <= 2 * eta for j in jumps)

    shell_max = []
    for k in range(1, shells + 1):
        a, b = R * (1 - 2.0**-k), R * (1 - 2.0 ** -(k + 1))
        s = np.linspace(a, b, probes_per_shell)
        eta = np.minimum(h_r, np.minimum((R - s) / 20, s / 20))
        best = 0.0
        for si, ei in zip(s, eta):
            if near_jump(si, ei):
                skipped.append(("F", float(si), "non-differentiable"))
                continue
            _, d1, d2 = _derivs(fn, np.array([si]), ei)
            if d1[0] == 0 or not np.isfinite(d1[0]):
                skipped.append(("F", float(si), "zero or undefined gradient"))
                continue
            best = max(best, abs(si * d2[0] / d1[0]))
        shell_max.append(best)
    increasing = all(b > a for a, b in zip(shell_max, shell_max[1:]))

    s = np.geomspace(g_min_radius * R, R * (1 - 1e-3), 400)
    eta = np.minimum(h_r, s / 20)
    eps = []
    for si, ei in zip(s, eta):
        if near_jump(si, ei):
            skipped.append(("G", float(si), "non-differentiable"))
            continue
        f0, d1, _ = _derivs(fn, np.array([si]), ei)
        if f0[0] > 0:
            eps.append((si, -si * d1[0] / f0[0]))
        elif -si * d1[0] < 0:
            eps.append((si, -math.inf))
    eps_arr = np.array([e for _, e in eps])
    radii = np.array([r for r, _ in eps])
    eps0 = float(eps_arr.min()) if eps_arr.size else math.nan
    by_radius = []
    for k in range(1, int(-math.log10(g_min_radius)) + 1):
        sel = radii <= R * 10.0**-k
        if sel.any():
            by_radius.append((R * 10.0**-k, float(eps_arr[sel].min())))
    small = np.geomspace(g_min_radius * R, 100 * g_min_radius * R, 5)
    vals = fn(small)
    growth = float(np.polyfit(np.log(small), np.log(np.abs(vals)), 1)[0]) if np.all(vals > 0) else math.nan
    return FGReport(shell_max, bool(increasing), max(eps0, 0.0) if eps0 == eps0 else eps0,
                    by_radius, bool(eps0 >= g_tol), growth, skipped)
