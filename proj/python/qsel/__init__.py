"""Python bindings for the qsel library."""

import json as _json

from ._qsel import (
    Error,
    __version__,
    cover_check,
    family_scan,
    fock_melin_oracle,
    melin_value,
    model_ground,
    symplectic_eigenvalues,
    triangle_casimir_ground,
    triangle_lowest,
)
from ._qsel import run_experiment as _run_experiment


def run_experiment(config, jobs=1):
    """Run a config dict (or JSON text) and return the result dict."""
    text = config if isinstance(config, str) else _json.dumps(config)
    return _json.loads(_run_experiment(text, jobs))


__all__ = [
    "Error",
    "__version__",
    "cover_check",
    "family_scan",
    "fock_melin_oracle",
    "melin_value",
    "model_ground",
    "run_experiment",
    "symplectic_eigenvalues",
    "triangle_casimir_ground",
    "triangle_lowest",
]
