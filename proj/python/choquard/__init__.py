"""Ground states of the fractional magnetic Choquard equation."""

import json

from . import _core
from ._core import SolverError, frac_laplacian, riesz, run_cli, save_field, sha256_hex

__version__ = _core.__version__

__all__ = [
    "SolverError",
    "frac_laplacian",
    "load_field",
    "resolve_config",
    "riesz",
    "run_cli",
    "save_field",
    "sha256_hex",
    "solve",
    "solve_limit",
]


def _text(config):
    return config if isinstance(config, str) else json.dumps(config)


def resolve_config(config):
    """Config dict (or JSON text) with every default filled in."""
    return json.loads(_core.resolve_config(_text(config)))


def solve(config):
    """Penalized ground state. Returns (u, report) with u shaped (M,) * dim."""
    u, report = _core.solve(_text(config))
    return u, json.loads(report)


def solve_limit(config):
    """Ground state of the problem with V == V0. Returns (u, report)."""
    u, report = _core.solve_limit(_text(config))
    return u, json.loads(report)


def load_field(path):
    """Samples and sidecar metadata of a stored field."""
    u, meta = _core.load_field(str(path))
    return u, json.loads(meta)
