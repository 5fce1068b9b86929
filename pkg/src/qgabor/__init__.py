"""Gabor frames, patch statistics and twisted convolution algebras over quasicrystals.

Submodules:

``pointset``  point-set generators and Delone/FLC measurements
``patch``     r-patch classes and frequencies
``holefill``  covering by disjoint translates
``tfa``       discrete time-frequency shifts, frame operators and bounds
``algebra``   twisted groupoid convolution, Gabor idempotent, traces
``gaplabel``  gap-labelling generators for subsets of Z^2
``cli``       command-line front end
"""

from .errors import QGError
from .kernels import BACKEND
from .pointset import Cube, PointSet

__version__ = "0.1.0"

__all__ = ["QGError", "BACKEND", "Cube", "PointSet", "__version__"]
