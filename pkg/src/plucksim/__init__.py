"""Spatial-vector dynamics and impact-resilient control toolkit."""

__version__ = "0.1.0"

from . import adaptive, impedance, model, observer, simulate, spatial, trajectory  # noqa: F401
