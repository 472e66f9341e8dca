"""Python bindings for the critheat C++ core."""

import json as _json

from ._core import (  # noqa: F401
    ConfigError,
    Domain,
    NonlocalKernel,
    NumericalError,
    Spectrum,
    admissible,
    alpha3,
    ball_robin_center,
    eigenpairs,
    evolve,
    gamma_star,
    robin,
)
from ._core import run as _run


def run(config):
    """Run a command given a config dict; returns (summary dict, {suffix: file content})."""
    summary, files = _run(_json.dumps(config))
    return _json.loads(summary), files
