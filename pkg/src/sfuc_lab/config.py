"""Experiment configuration files.

Grammar (INI style, read with :mod:`configparser`)::

    [experiment]
    kind = ucp            # one of KINDS
    seed = 0              # master seed; all randomness derives from it
    workers = 1           # worker pool size (overridden by SFUC_LAB_WORKERS)
    output = out          # report directory, relative to the config file

    [ucp]                 # section named after the kind
    L = 1 3 5             # lists are whitespace separated
    delta = 0.25
    ...

Keys not in the kind's schema are rejected.  Values are parsed by the
schema type; missing keys take the schema default.  ``dump_config`` writes
every key, so a parsed config round-trips exactly.
"""

from __future__ import annotations

import configparser
import io
from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigurationError

KINDS = ("ucp", "lifting", "wegner", "initial-scale", "heat-obs", "conditions", "ghost",
         "weights", "fit-exponent")


def _floats(text):
    return [float(v) for v in text.split()]


def _ints(text):
    return [int(v) for v in text.split()]


def _bool(text):
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _opt_float(text):
    return None if text.strip().lower() in ("", "none") else float(text)


PARSERS = {"int": int, "float": float, "str": str.strip, "floats": _floats, "ints": _ints,
           "bool": _bool, "float?": _opt_float}


def _fmt(kind, value):
    if value is None:
        return "none"
    if kind in ("floats", "ints"):
        return " ".join(repr(v) for v in value)
    if kind == "bool":
        return "true" if value else "false"
    if kind in ("float", "float?"):
        return repr(float(value))
    return str(value)


_GRID = {"d": ("int", 1), "m": ("int", 32), "bc": ("str", "dirichlet")}
_RANDOM = {
    "family": ("str", "standard_ball"),
    "profile": ("str", "indicator ball 1"),
    "measure": ("str", "uniform 0 0.25"),
    "G_u": ("float?", None),
    "u_max": ("float?", None),
    "delone": ("str", ""),
    "G1": ("float", 1.0),
    "G2": ("float", 2.0),
}

SCHEMAS = {
    "ucp": {
        **_GRID, "bc": ("str", "periodic"), "G": ("float", 1.0), "delta": ("float", 0.25),
        "b": ("float", 50.0), "L": ("floats", [1.0, 3.0, 5.0]), "mode": ("str", "centered"),
        "seeds": ("int", 1), "potential": ("str", "zero"), "t": ("float", 1.0),
        "N": ("float?", None), "ratio_floor": ("float", 0.5), "tol": ("float", 1e-8),
        "deltas": ("floats", [0.05, 0.1, 0.2, 0.4]), "M": ("float?", None),
    },
    "fit-exponent": {
        **_GRID, "bc": ("str", "periodic"), "G": ("float", 1.0), "b": ("float", 10.0),
        "L": ("float", 1.0), "mode": ("str", "centered"), "potential": ("str", "zero"),
        "t": ("float", 1.0), "deltas": ("floats", [0.02, 0.05, 0.1, 0.2, 0.4]),
        "tol": ("float", 1e-8),
    },
    "lifting": {
        **_GRID, "m": ("int", 16), **_RANDOM, "L": ("float", 5.0), "b": ("float", 30.0),
        "shift": ("float", 0.1), "alpha": ("float?", None), "trials": ("int", 10),
        "gap_slack": ("float", 1e-10), "floor_slack": ("float", 1e-8),
    },
    "wegner": {
        **_GRID, "m": ("int", 16), **_RANDOM, "L": ("float", 5.0), "E": ("float?", None),
        "eps": ("floats", [0.4, 0.2, 0.1, 0.05]), "trials": ("int", 200),
        "kappa": ("float?", None), "C": ("float?", None), "N": ("float?", None),
        "M": ("float?", None), "delta_eval": ("float", 0.1), "b_lift": ("float", 10.0),
    },
    "initial-scale": {
        **_GRID, "m": ("int", 16), **_RANDOM, "L": ("floats", [5.0, 10.0]),
        "trials": ("int", 200),
    },
    "heat-obs": {
        **_GRID, "m": ("int", 16), "L": ("float", 5.0), "G": ("float", 1.0),
        "delta": ("float", 0.25), "delta_grown": ("float?", 0.4), "mode": ("str", "centered"),
        "potential": ("str", "zero"), "T": ("floats", [0.25, 0.5, 1.0, 2.0, 4.0, 8.0]),
        "N": ("float", 5.0), "ridge": ("float", 1e-12), "control_T": ("float?", 0.5),
    },
    "conditions": {
        "family": ("str", "dilation_of_profile"), "profile": ("str", "radial hat"),
        "d": ("int", 1), "t_grid": ("floats", []), "delta_grid": ("floats", []),
        "resolution": ("float?", None), "omega_plus": ("float", 0.25), "sign": ("int", 1),
        "shells": ("int", 5), "h_r": ("float?", None), "jump_tol": ("float?", None),
        "g_tol": ("float", 1e-3), "probes": ("int", 64), "g_min_radius": ("float", 1e-8),
        "recheck_factor": ("int", 2),
    },
    "ghost": {
        **_GRID, "m": ("int", 64), "L": ("float", 3.0), "potential": ("str", "zero"),
        "b": ("float", 30.0), "T": ("float", 1.0), "h_t": ("float?", None),
        "vectors": ("int", 5), "slack": ("float", 1.05), "R": ("int", 3),
        "refine": ("ints", [32, 64, 128, 256]),
    },
    "weights": {
        "r": ("floats", [0.3, 0.5, 0.58]), "samples": ("int", 50_000), "d": ("int", 1),
        "rho": ("float", 1.0), "bound_samples": ("int", 1000),
        "hyperbola_deltas": ("floats", [0.1, 0.25, 0.5]), "resolution": ("float", 1e-4),
        "starts": ("int", 7),
    },
}

EXPERIMENT = {"kind": ("str", None), "seed": ("int", 0), "workers": ("int", 1),
              "output": ("str", "out")}


@dataclass
class ExperimentConfig:
    kind: str
    seed: int = 0
    workers: int = 1
    output: str = "out"
    params: dict = field(default_factory=dict)
    base_dir: Path = Path(".")

    @property
    def output_dir(self) -> Path:
        return (self.base_dir / self.output).resolve()

    def echo(self) -> dict:
        """Config as recorded in reports; the worker count is left out so
        reports do not depend on it."""
        return {"kind": self.kind, "seed": self.seed, "output": self.output,
                "params": dict(self.params)}


def _parse_value(section, key, raw, typ):
    try:
        return PARSERS[typ](raw)
    except (ValueError, TypeError) as exc:
        raise ConfigurationError(f"[{section}] {key}: cannot parse {raw!r} as {typ}") from exc


def parse_config(text: str, base_dir=".") -> ExperimentConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"), interpolation=None)
    cp.optionxform = str  # keys are case sensitive (L, G, N ...)
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config: {exc}") from exc
    if "experiment" not in cp:
        raise ConfigurationError("missing [experiment] section")
    exp = cp["experiment"]
    unknown = set(exp) - set(EXPERIMENT)
    if unknown:
        raise ConfigurationError(f"[experiment] unknown keys: {', '.join(sorted(unknown))}")
    kind = exp.get("kind", "").strip()
    if kind not in KINDS:
        raise ConfigurationError(f"unknown experiment kind {kind!r}; expected one of {KINDS}")
    extra = [s for s in cp.sections() if s not in ("experiment", kind)]
    if extra:
        raise ConfigurationError(f"unexpected sections: {', '.join(extra)}")
    schema = SCHEMAS[kind]
    given = cp[kind] if kind in cp else {}
    unknown = set(given) - set(schema)
    if unknown:
        raise ConfigurationError(f"[{kind}] unknown keys: {', '.join(sorted(unknown))}")
    params = {}
    for key, (typ, default) in schema.items():
        params[key] = (_parse_value(kind, key, given[key], typ) if key in given
                       else (list(default) if isinstance(default, list) else default))
    return ExperimentConfig(
        kind,
        _parse_value("experiment", "seed", exp.get("seed", "0"), "int"),
        _parse_value("experiment", "workers", exp.get("workers", "1"), "int"),
        exp.get("output", "out").strip(),
        params,
        Path(base_dir),
    )


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"config file not found: {path}")
    return parse_config(path.read_text(), path.parent)


def dump_config(cfg: ExperimentConfig) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    cp["experiment"] = {"kind": cfg.kind, "seed": str(cfg.seed), "workers": str(cfg.workers),
                        "output": cfg.output}
    schema = SCHEMAS[cfg.kind]
    cp[cfg.kind] = {k: _fmt(schema[k][0], v) for k, v in cfg.params.items()}
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()
