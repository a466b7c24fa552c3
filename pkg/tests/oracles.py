"""Independent reference computations used to freeze expected values.

Nothing here imports the assembly or eigen-solver code paths under test.
"""

from __future__ import annotations

import itertools

import numpy as np
from numpy.polynomial.legendre import leggauss


def _hat(x, center, h):
    return np.clip(1.0 - np.abs(x - center) / h, 0.0, None)


def _gl(lo, hi, npts):
    x, w = leggauss(npts)
    return 0.5 * (hi - lo) * x + 0.5 * (hi + lo), 0.5 * (hi - lo) * w


def _autocorrelation(ci, cj, h, r, npts):
    """S(r) = int (phi_i(x) - phi_i(x-r)) (phi_j(x) - phi_j(x-r)) dx, exact per piece."""
    kinks = np.array([ci - h, ci, ci + h, cj - h, cj, cj + h])
    breaks = np.unique(np.concatenate([kinks, kinks + r]))
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        if hi - lo <= 0:
            continue
        x, w = _gl(lo, hi, npts)
        fi = _hat(x, ci, h) - _hat(x - r, ci, h)
        fj = _hat(x, cj, h) - _hat(x - r, cj, h)
        total += np.dot(w, fi * fj)
    return total


def _radial_integral(kernel_fn, ci, cj, h, radius, npts):
    """2 * int_0^radius K(r) S(r) dr on panels split at multiples of h,
    geometrically graded towards r = 0."""
    panels = [(h * 2.0 ** -(k + 1), h * 2.0**-k) for k in range(60)]
    edge = h
    while edge < radius - 1e-14:
        panels.append((edge, min(edge + h, radius)))
        edge += h
    total = 0.0
    for lo, hi in panels:
        r, w = _gl(lo, hi, npts)
        svals = np.array([_autocorrelation(ci, cj, h, rr, 8) for rr in r])
        total += np.dot(w, kernel_fn(r) * svals)
    return 2.0 * total


def brute_force_stiffness(s, alpha, a, b, n, npts=20):
    """Stiffness of the pure kernel alpha |x|^(-1-2s) by direct integration over R^2.

    The plane is parametrized by (x, r = x - y); the x-integral is exact on
    each polynomial piece and the r-integral is truncated at radius R. Beyond
    the domain diameter the truncation error is exactly c * R^(-2s), so the
    R -> infinity limit follows from Richardson extrapolation over R, 2R.
    The same computation at ``2 * npts`` radial points is returned for
    convergence checking.
    """
    h = (b - a) / (n + 1)
    centers = a + h * np.arange(1, n + 1)

    def kernel_fn(r):
        return alpha * np.abs(r) ** (-1.0 - 2.0 * s)

    R = b - a
    ratio = 2.0 ** (2.0 * s)
    out = []
    for pts in (npts, 2 * npts):
        A = np.zeros((n, n))
        for i, j in itertools.product(range(n), repeat=2):
            if j < i:
                continue
            a_r = _radial_integral(kernel_fn, centers[i], centers[j], h, R, pts)
            a_2r = _radial_integral(kernel_fn, centers[i], centers[j], h, 2 * R, pts)
            A[i, j] = A[j, i] = (ratio * a_2r - a_r) / (ratio - 1.0)
        out.append(A)
    return out[0], out[1]


def hat_mass(n, h):
    """Exact int phi_i phi_j for interior hats."""
    return h * (np.diag(np.full(n, 2.0 / 3.0)) + np.diag(np.full(n - 1, 1.0 / 6.0), 1) + np.diag(np.full(n - 1, 1.0 / 6.0), -1))


def diagonal_pencil_oracle(a_diag, b_diag):
    """Two-sided eigenvalues of diag(a) c = lam diag(b) c by reciprocal sort."""
    pos = sorted(a / b for a, b in zip(a_diag, b_diag) if b > 0)
    neg = sorted((a / b for a, b in zip(a_diag, b_diag) if b < 0), reverse=True)
    return pos, neg


def coordinate_courant_fischer(diag_values, k, largest=True):
    """Courant-Fischer on a diagonal matrix by enumerating coordinate subspaces.

    Returns max over k-subsets of the min diagonal entry (largest=True) or
    min over k-subsets of the max (largest=False).
    """
    vals = list(diag_values)
    best = None
    for subset in itertools.combinations(range(len(vals)), k):
        chosen = [vals[i] for i in subset]
        v = min(chosen) if largest else max(chosen)
        if best is None or (largest and v > best) or (not largest and v < best):
            best = v
    return best
