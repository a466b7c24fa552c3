"""Gauss rules mapped to the unit interval."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi


@lru_cache(maxsize=None)
def gauss_legendre_01(npts: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for int_0^1 f(t) dt."""
    x, w = leggauss(npts)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=None)
def gauss_jacobi_01(npts: int, beta: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for int_0^1 f(t) t**beta dt, beta > -1.

    The algebraic factor is absorbed into the weights, so ``f`` only needs
    to be smooth on [0, 1].
    """
    if beta <= -1.0:
        raise ValueError(f"Jacobi exponent must exceed -1, got {beta}")
    x, w = roots_jacobi(npts, 0.0, beta)
    t = 0.5 * (x + 1.0)
    w = w / 2.0 ** (beta + 1.0)
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w
