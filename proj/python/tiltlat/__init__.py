"""Driven tilted optical lattices: DNLSE integrator, closed forms, ensembles."""

from ._tiltlat import *  # noqa: F401,F403
from ._tiltlat import __version__, analytic  # noqa: F401
