"""Dense symmetric eigensolvers."""

from __future__ import annotations

import numpy as np


def jacobi_eigh(C: np.ndarray, tol: float = 1e-15, max_sweeps: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Rotations are applied row-by-row in a fixed (p, q) order, so the result
    is a deterministic function of the input. Returns ascending eigenvalues
    and orthonormal eigenvectors as columns, like ``numpy.linalg.eigh``.
    """
    M = np.array(C, dtype=float)
    n = M.shape[0]
    if M.shape != (n, n):
        raise ValueError("jacobi_eigh needs a square matrix")
    V = np.eye(n)
    scale = np.linalg.norm(M)
    if scale == 0.0:
        return np.zeros(n), V
    for _ in range(max_sweeps):
        off = np.linalg.norm(M - np.diag(np.diag(M)))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = M[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (M[q, q] - M[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0)) if theta != 0.0 else 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                sn = t * c
                Mp, Mq = M[:, p].copy(), M[:, q].copy()
                M[:, p] = c * Mp - sn * Mq
                M[:, q] = sn * Mp + c * Mq
                Mp, Mq = M[p, :].copy(), M[q, :].copy()
                M[p, :] = c * Mp - sn * Mq
                M[q, :] = sn * Mp + c * Mq
                M[p, q] = M[q, p] = 0.0
                Vp, Vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * Vp - sn * Vq
                V[:, q] = sn * Vp + c * Vq
    else:
        raise np.linalg.LinAlgError(f"Jacobi iteration did not converge in {max_sweeps} sweeps")
    w = np.diag(M).copy()
    order = np.argsort(w, kind="stable")
    return w[order], V[:, order]
