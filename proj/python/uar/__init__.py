"""Unstable AR(p) processes with heavy-tailed innovations: simulation, M-estimation,
limit-law sampling and the m-out-of-n bootstrap."""

from ._uar import *  # noqa: F401,F403
from ._uar import EstimationError, huber_loss, m_estimate, ls_estimate

import math as _math


def complex_pair_model(theta: float = _math.pi / 4) -> "ARModel":  # noqa: F405
    """X_t = 2 cos(theta) X_{t-1} - X_{t-2} + e_t."""
    return expand_polynomial(RootSpec(pairs=[ComplexPair(theta)]))  # noqa: F405


__all__ = [name for name in dir() if not name.startswith("_")]
