"""Finite-difference Schrödinger operators ``H = -t Δ_L + V_L`` on a GridSpec."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, DataError
from .grid import GridSpec


@dataclass(frozen=True)
class PotentialField:
    grid: GridSpec
    values: np.ndarray

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values))) if self.values.size else 0.0

    def __add__(self, other: "PotentialField") -> "PotentialField":
        if other.grid != self.grid:
            raise ConfigurationError("potentials live on different grids")
        return PotentialField(self.grid, self.values + other.values)


def sample_potential(description, grid: GridSpec) -> PotentialField:
    """Restrict a potential to the grid nodes.

    ``description`` may be ``None``/``"zero"``, a constant, a callable taking
    the ``(n, d)`` coordinate array, a node table of length ``n``, or an
    existing :class:`PotentialField` on the same grid.
    """
    if isinstance(description, PotentialField):
        if description.grid != grid:
            raise ConfigurationError("potential field lives on a different grid")
        values = np.asarray(description.values, dtype=float)
    elif description is None or (isinstance(description, str) and description == "zero"):
        values = np.zeros(grid.n)
    elif callable(description):
        values = np.asarray(description(grid.coords()), dtype=float)
        if values.ndim == 0:
            values = np.full(grid.n, float(values))
    elif np.isscalar(description):
        values = np.full(grid.n, float(description))
    else:
        values = np.asarray(description, dtype=float).ravel()
    if values.shape != (grid.n,):
        raise ConfigurationError(f"potential has {values.size} values, grid has {grid.n} nodes")
    if not np.all(np.isfinite(values)):
        raise DataError("potential has non-finite samples")
    return PotentialField(grid, values.copy())


def _second_difference(grid: GridSpec) -> sp.csr_matrix:
    """1-D matrix of ``-u'' h^2``: rows ``2u_i - u_{i-1} - u_{i+1}``."""
    n = grid.n_axis
    main = np.full(n, 2.0)
    off = -np.ones(n - 1)
    if grid.bc == "neumann":
        # mirror ghost across the face: u_{-1} = u_0
        main[0] = main[-1] = 1.0
    A = sp.diags([off, main, off], [-1, 0, 1], shape=(n, n), format="lil")
    if grid.bc == "periodic":
        A[0, n - 1] += -1.0
        A[n - 1, 0] += -1.0
    return A.tocsr()


def laplacian(grid: GridSpec) -> sp.csr_matrix:
    """Matrix of ``-Δ_L`` (positive semidefinite) in lexicographic order."""
    A1 = _second_difference(grid) / grid.h**2
    n = grid.n_axis
    eye = sp.identity(n, format="csr")
    out = sp.csr_matrix((grid.n, grid.n))
    for axis in range(grid.d):
        factors = [eye] * grid.d
        factors[axis] = A1
        term = factors[0]
        for f in factors[1:]:
            term = sp.kron(term, f, format="csr")
        out = out + term
    out.sum_duplicates()
    out.eliminate_zeros()
    return out.tocsr()


@dataclass(frozen=True)
class DiscreteOperator:
    grid: GridSpec
    matrix: sp.csr_matrix
    potential: PotentialField
    t: float = 1.0

    @property
    def n(self) -> int:
        return self.grid.n

    def gershgorin_interval(self):
        v = self.potential.sup_norm
        return -v, 4 * self.grid.d * self.t / self.grid.h**2 + v

    def lower_bound(self) -> float:
        """Lower bound of the spectrum from the row sums (Gershgorin)."""
        A = self.matrix
        diag = A.diagonal()
        radius = np.asarray(abs(A).sum(axis=1)).ravel() - np.abs(diag)
        return float(np.min(diag - radius))

    def coo_table(self):
        coo = self.matrix.tocoo()
        order = np.lexsort((coo.col, coo.row))
        return coo.row[order], coo.col[order], coo.data[order]

    def to_text(self) -> str:
        i, j, v = self.coo_table()
        return "".join(f"{a} {b} {c:.17g}\n" for a, b, c in zip(i, j, v))

    def content_hash(self) -> str:
        i, j, v = self.coo_table()
        h = hashlib.sha256()
        h.update(f"{self.grid.d} {self.grid.L!r} {self.grid.m} {self.grid.bc} {self.n}\n".encode())
        h.update(np.ascontiguousarray(i, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(j, dtype=np.int64).tobytes())
        h.update(np.ascontiguousarray(v, dtype=np.float64).tobytes())
        return h.hexdigest()


def assemble(grid: GridSpec, potential=None, t=1.0) -> DiscreteOperator:
    if t <= 0:
        raise ConfigurationError("diffusion coefficient t must be positive")
    pot = potential if isinstance(potential, PotentialField) else sample_potential(potential, grid)
    if pot.grid != grid:
        raise ConfigurationError("potential lives on a different grid")
    A = (t * laplacian(grid) + sp.diags(pot.values)).tocsr()
    A.sum_duplicates()
    A.sort_indices()
    return DiscreteOperator(grid, A, pot, float(t))


def apply(op: DiscreteOperator, field) -> np.ndarray:
    u = np.asarray(field, dtype=float)
    if u.shape[0] != op.n:
        raise ConfigurationError(f"field has {u.shape[0]} entries, operator acts on {op.n}")
    return op.matrix @ u


def read_coo_text(text: str, n: int) -> sp.csr_matrix:
    rows = np.loadtxt(text.splitlines(), ndmin=2) if text.strip() else np.zeros((0, 3))
    return sp.csr_matrix((rows[:, 2], (rows[:, 0].astype(int), rows[:, 1].astype(int))), shape=(n, n))
