"""Python bindings for the convexify solver.

Reports come back from C++ as JSON text and are decoded here.
"""

import json

from . import _core
from ._core import Config, ConvexifyError, Session, load_config

__all__ = ["Config", "ConvexifyError", "Session", "load_config", "forward", "invert", "verify", "sweep"]


def _config(config=None, **overrides):
    if config is None:
        config = Config()
    elif isinstance(config, str):
        config = Config(config)
    for key, value in overrides.items():
        config.set(key.replace("__", "."), str(value))
    return config


def forward(config=None, **overrides):
    """Synthetic traces (t, g1, g2) and the true coefficient on the x1 grid."""
    return _core.forward(_config(config, **overrides))


def invert(config=None, **overrides):
    """Run the inversion; returns the decoded report plus c_rec, c_true and the J history."""
    out = _core.invert(_config(config, **overrides))
    out["report"] = json.loads(out["report"])
    return out


def verify(config=None, **overrides):
    return json.loads(_core.verify(_config(config, **overrides)))


def sweep(config=None, **overrides):
    return _core.sweep(_config(config, **overrides))
