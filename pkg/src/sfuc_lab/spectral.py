"""Eigenpairs below a threshold, spectral projection and the heat semigroup.

Eigenvectors are orthonormal in the mesh inner product ``h^d sum u_i v_i``.
Small problems are diagonalized densely; larger ones go through a
shift-and-invert block Lanczos iteration with full reorthogonalization whose
Ritz pairs are checked against the original operator.
"""

from __future__ import annotations

import hashlib
import io
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConfigurationError, SolverError
from .hamiltonian import DiscreteOperator

DENSE_CAP = 4096


@dataclass(frozen=True)
class SpectralData:
    operator: DiscreteOperator
    b: float
    eigenvalues: np.ndarray  # (k,)
    vectors: np.ndarray  # (n, k), orthonormal in the mesh inner product
    residual_bound: float
    method: str = "dense"

    @property
    def k(self) -> int:
        return int(self.eigenvalues.size)

    @property
    def grid(self):
        return self.operator.grid

    def residuals(self) -> np.ndarray:
        """``||H φ_i - E_i φ_i|| / max(1, |E_i|)`` in the mesh norm."""
        if self.k == 0:
            return np.zeros(0)
        R = self.operator.matrix @ self.vectors - self.vectors * self.eigenvalues
        norms = np.sqrt(self.grid.cell_volume * np.sum(R * R, axis=0))
        return norms / np.maximum(1.0, np.abs(self.eigenvalues))

    def gram(self) -> np.ndarray:
        return self.grid.cell_volume * (self.vectors.T @ self.vectors)

    def truncate(self, b) -> "SpectralData":
        keep = self.eigenvalues <= b
        return SpectralData(
            self.operator, float(b), self.eigenvalues[keep], self.vectors[:, keep],
            self.residual_bound, self.method,
        )


def _finish(op, b, vals, vecs, tol, method):
    order = np.argsort(vals, kind="stable")
    vals = np.asarray(vals, dtype=float)[order]
    vecs = np.asarray(vecs, dtype=float)[:, order] / math.sqrt(op.grid.cell_volume)
    spec = SpectralData(op, float(b), vals, vecs, 0.0, method)
    res = spec.residuals()
    worst = float(res.max()) if res.size else 0.0
    if worst > tol:
        raise SolverError(f"{method} eigenpairs have residual {worst:.3e} > tol {tol:.1e}", worst)
    return SpectralData(op, float(b), vals, vecs, max(worst, np.finfo(float).eps), method)


def _dense(op, b):
    A = op.matrix.toarray()
    vals, vecs = sla.eigh(A, subset_by_value=(-np.inf, b))
    return vals, vecs


def _orthonormalize(X, basis=None):
    """Two passes of block Gram-Schmidt against ``basis``, then QR.

    Columns that collapse numerically are dropped.
    """
    for _ in range(2):
        if basis is not None and basis.shape[1]:
            X = X - basis @ (basis.T @ X)
    Q, R = np.linalg.qr(X)
    keep = np.abs(np.diag(R)) > 1e-10 * max(1.0, np.abs(np.diag(R)).max(initial=0.0))
    Q = Q[:, keep]
    if basis is not None and basis.shape[1] and Q.shape[1]:
        Q = Q - basis @ (basis.T @ Q)
        Q, _ = np.linalg.qr(Q)
    return Q


class _ShiftInvert:
    def __init__(self, op: DiscreteOperator):
        self.A = op.matrix
        self.sigma = op.lower_bound() - 1.0
        M = (op.matrix - self.sigma * sp.identity(op.n, format="csr")).tocsc()
        self.lu = spla.splu(M)

    def __call__(self, X):
        return self.lu.solve(np.asarray(X, dtype=float))


def _block_lanczos(op, b, tol, block, max_basis, rng, deflate=None):
    """Rayleigh-Ritz on a block Krylov space of ``(H - σ)^{-1}``.

    Returns ``(values, vectors, best_residual, converged)`` for the Ritz pairs
    with value ``<= b``.
    """
    n = op.n
    inv = _ShiftInvert(op)
    mu_b = 1.0 / (b - inv.sigma)
    V = np.zeros((n, 0))
    MV = np.zeros((n, 0))
    defl = deflate if deflate is not None else np.zeros((n, 0))
    Q = _orthonormalize(rng.standard_normal((n, block)), np.hstack([defl, V]))
    best = np.inf
    while Q.shape[1]:
        W = inv(Q)
        V = np.hstack([V, Q])
        MV = np.hstack([MV, W])
        T = V.T @ MV
        T = (T + T.T) / 2
        theta, Y = np.linalg.eigh(T)
        theta, Y = theta[::-1], Y[:, ::-1]
        k_est = int(np.count_nonzero(theta >= mu_b))
        need = min(k_est + 1, theta.size)
        X = V @ Y[:, :need]
        lam = inv.sigma + 1.0 / theta[:need]
        R = op.matrix @ X - X * lam
        res = np.linalg.norm(R, axis=0) / np.maximum(1.0, np.abs(lam))
        worst = float(res.max()) if res.size else 0.0
        best = min(best, worst)
        exhausted = V.shape[1] >= n - defl.shape[1]
        if worst <= tol and (need > k_est or exhausted):
            return lam[:k_est], X[:, :k_est], worst, True
        if exhausted:
            return lam[:k_est], X[:, :k_est], worst, worst <= tol
        if V.shape[1] >= max_basis:
            return lam[:k_est], X[:, :k_est], best, False
        Q = _orthonormalize(W, np.hstack([defl, V]))
    return np.zeros(0), np.zeros((n, 0)), best, False


def _iterative(op, b, tol, block, max_basis, seed=0):
    rng = np.random.default_rng(seed)
    best = np.inf
    for attempt in range(3):
        vals, vecs, res, ok = _block_lanczos(op, b, tol, block, max_basis, rng)
        best = min(best, res)
        if not ok:
            raise SolverError(
                f"block Lanczos did not converge within a basis of {max_basis} vectors", best
            )
        # completeness probe: a fresh block in the deflated space must not
        # produce another Ritz value below b
        vecs, _ = np.linalg.qr(vecs) if vecs.shape[1] else (vecs, None)
        if vecs.shape[1] >= op.n:
            return vals, vecs
        extra, _, _, _ = _block_lanczos(
            op, b, tol, block, min(max_basis, 8 * block), rng, deflate=vecs
        )
        if extra.size == 0:
            return vals, vecs
        block *= 2
    raise SolverError("eigenvalues below b keep appearing in the deflated space", best)


def eigs_below(op: DiscreteOperator, b, tol=1e-8, dense_cap=DENSE_CAP, method="auto",
               block=12, max_basis=3000) -> SpectralData:
    """All eigenpairs of ``op`` with eigenvalue ``<= b``.

    Parameters
    ----------
    op : DiscreteOperator
    b : float
        Threshold; an empty result is returned when ``b`` lies below the
        spectrum.
    tol : float
        Bound on ``||H φ - E φ|| / max(1, |E|)`` for every returned pair.
    method : {"auto", "dense", "lanczos"}
        ``auto`` diagonalizes densely when ``n <= dense_cap``.
    """
    if not np.isfinite(b):
        raise ConfigurationError("threshold b must be finite")
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    if method == "auto":
        method = "dense" if op.n <= dense_cap else "lanczos"
    if b < op.lower_bound():
        return SpectralData(op, float(b), np.zeros(0), np.zeros((op.n, 0)), 0.0, method)
    if method == "dense":
        vals, vecs = _dense(op, b)
    elif method == "lanczos":
        vals, vecs = _iterative(op, b, tol, block, min(max_basis, op.n))
    else:
        raise ConfigurationError(f"unknown eigensolver method {method!r}")
    return _finish(op, b, vals, vecs, tol, method)


def eigvals_below(op: DiscreteOperator, b, dense_cap=DENSE_CAP) -> np.ndarray:
    """Eigenvalues only; cheaper than :func:`eigs_below` on the dense path."""
    if b < op.lower_bound():
        return np.zeros(0)
    if op.n <= dense_cap:
        return sla.eigh(op.matrix.toarray(), eigvals_only=True, subset_by_value=(-np.inf, b))
    return eigs_below(op, b, dense_cap=dense_cap).eigenvalues


def project(spec: SpectralData, u):
    """Spectral projection onto ``span{φ_1..φ_k}``; returns ``(P u, alphas)``."""
    u = np.asarray(u, dtype=float)
    if u.shape[0] != spec.grid.n:
        raise ConfigurationError("field does not live on the spectral grid")
    alphas = spec.grid.cell_volume * (spec.vectors.T @ u)
    return spec.vectors @ alphas, alphas


def heat_apply(spec: SpectralData, u, T) -> np.ndarray:
    """``e^{-T H} u`` for ``u`` in the span, evaluated mode by mode."""
    if T < 0:
        raise ConfigurationError("T must be nonnegative")
    _, alphas = project(spec, u)
    return spec.vectors @ (alphas * np.exp(-spec.eigenvalues * T))


# ---------------------------------------------------------------------------
# cache file


def dump_spectral(spec: SpectralData) -> str:
    buf = io.StringIO()
    buf.write(f"# sfuc-spectral {spec.operator.content_hash()} n={spec.grid.n} k={spec.k} "
              f"b={spec.b:.17g} method={spec.method} residual={spec.residual_bound:.17g}\n")
    buf.write(" ".join(f"{v:.17g}" for v in spec.eigenvalues) + "\n")
    for col in spec.vectors.T:
        buf.write(" ".join(f"{v:.17g}" for v in col) + "\n")
    return buf.getvalue()


def load_spectral(text: str, op: DiscreteOperator) -> SpectralData:
    lines = text.splitlines()
    head = lines[0].split()
    if len(head) < 3 or head[1] != "sfuc-spectral":
        raise ConfigurationError("not a spectral cache file")
    if head[2] != op.content_hash():
        raise ConfigurationError("spectral cache was computed for a different operator")
    meta = dict(tok.split("=", 1) for tok in head[3:])
    k = int(meta["k"])
    vals = np.array([float(v) for v in lines[1].split()]) if k else np.zeros(0)
    vecs = np.array([[float(v) for v in ln.split()] for ln in lines[2 : 2 + k]]).T
    if k == 0:
        vecs = np.zeros((op.n, 0))
    return SpectralData(op, float(meta["b"]), vals, vecs.reshape(op.n, k),
                        float(meta["residual"]), meta["method"])


def cache_key(op: DiscreteOperator, b: float) -> str:
    return hashlib.sha256(f"{op.content_hash()}:{b!r}".encode()).hexdigest()[:16]
