"""Semiparametric density and graph estimation.

The nonparametric block X is modeled by a smoothing-spline ANOVA logistic
density; the parametric block Y|X follows a sparse conditional Gaussian
model. The heavy lifting lives in the compiled extension `_core`.
"""

from ._core import *  # noqa: F401,F403
from ._core import __doc__ as _core_doc

__all__ = [name for name in dir() if not name.startswith("_")]
