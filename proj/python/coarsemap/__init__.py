"""Vectorized OSM road scenes and multi-modal trajectory predictor evaluation.

Thin Python veneer over the C++ core; everything is re-exported from
``coarsemap._core``.
"""

from coarsemap._core import *  # noqa: F401,F403
from coarsemap._core import __version__  # noqa: F401
