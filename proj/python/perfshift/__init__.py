"""Simulation lab for decision-coupled predictors.

A finite population model with explicit potential outcomes, time-indexed
treatment policies, and binary predictors. Metrics come in two flavors: an
exact closed-form path that enumerates the cell distribution, and a seeded
Monte Carlo path that cross-validates it.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
__doc__ = __doc__ or _core_doc
