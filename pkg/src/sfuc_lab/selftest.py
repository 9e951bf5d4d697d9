"""Fast built-in checks against closed forms; run with ``sfuc-lab selftest``."""

from __future__ import annotations

import math

import numpy as np

from .analysis import ein, ein_series, hyperbola_distance
from .grid import Mask, make_grid
from .hamiltonian import assemble
from .heat import kappa_T
from .spectral import eigs_below
from .ucp import ucp_constant_exact


def _dirichlet_1d():
    grid = make_grid(1, 1.0, 64, "dirichlet")
    spec = eigs_below(assemble(grid), 200.0)
    h = grid.h
    k = np.arange(1, spec.k + 1)
    exact = 4 / h**2 * np.sin(k * np.pi * h / 2) ** 2
    return float(np.max(np.abs(spec.eigenvalues - exact))) < 1e-9


def _full_mask_constant():
    grid = make_grid(1, 2.0, 32, "periodic")
    spec = eigs_below(assemble(grid), 30.0)
    return abs(ucp_constant_exact(spec, Mask.full(grid)).value - 1.0) < 1e-10


def _kappa_full_mask():
    # full observation: kappa_T = 1/T on the zero mode of the free periodic operator
    grid = make_grid(1, 1.0, 16, "periodic")
    spec = eigs_below(assemble(grid), 1.0)
    return abs(kappa_T(spec, Mask.full(grid), 2.0).kappa - 0.5) < 1e-9


def _ein():
    return all(abs(ein(s) - ein_series(s)) < 1e-12 for s in (0.1, 0.5, 1.0))


def _hyperbola():
    return hyperbola_distance(0.25).passed


CHECKS = {
    "dirichlet_1d_eigenvalues": _dirichlet_1d,
    "full_mask_constant_is_1": _full_mask_constant,
    "kappa_full_mask_is_1/T": _kappa_full_mask,
    "ein_quadrature_vs_series": _ein,
    "hyperbola_gap_exceeds_bound": _hyperbola,
}


def run_selftest(out=print) -> bool:
    ok = True
    for name, fn in CHECKS.items():
        try:
            res = bool(fn())
        except Exception as exc:  # report and continue
            res = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        out(f"{'PASS' if res else 'FAIL'} {name}")
        ok &= res
    return ok
