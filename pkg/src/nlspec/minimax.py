"""Courant-Fischer checks of a computed two-sided spectrum.

For a subspace F of coefficient vectors the Rayleigh quotient
R(u) = u^T B u / u^T A u ranges over the eigenvalues of Q^T B Q, Q an
A-orthonormal basis of F. Four characterizations of mu_k = 1/lam_k are
checked, each by (a) a one-sided bound over random subspaces and (b)
attainment at a span of eigenvectors:

    Eplus_supinf   mu_k    = sup_{dim F = k}     inf_{u in F}     R(u)
    Eplus_infsup   mu_k    = inf_{dim F = k-1}   sup_{u A-perp F} R(u)
    Eminus_infsup  mu_{-k} = inf_{dim F = k}     sup_{u in F}     R(u)
    Eminus_supinf  mu_{-k} = sup_{dim F = k-1}   inf_{u A-perp F} R(u)

Sampling works in reduced coordinates v = L^T u (A = L L^T), where
A-orthonormality becomes ordinary orthonormality and the quotient is
v^T C v with C = L^-1 B L^-T.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import InadmissibleIndexError, MinimaxError
from .pencil import Pencil, Spectrum

BOUND_TOL = 1e-9
WITNESS_TOL = 1e-8
ORTHONORMAL_TOL = 1e-10
RANK_TOL = 1e-12
BATCH = 256

FORMULAS = ("Eplus_supinf", "Eplus_infsup", "Eminus_infsup", "Eminus_supinf")


@dataclass(frozen=True, eq=False)
class Subspace:
    """Coefficient vectors spanning F, columns A-orthonormal."""

    basis: np.ndarray

    @property
    def dim(self) -> int:
        return int(self.basis.shape[1])

    @classmethod
    def from_vectors(cls, pencil: Pencil, M: np.ndarray) -> "Subspace":
        return cls(a_orthonormalize(pencil.A, M))

    def is_orthonormal(self, A: np.ndarray, tol: float = ORTHONORMAL_TOL) -> bool:
        G = self.basis.T @ A @ self.basis
        return bool(np.max(np.abs(G - np.eye(self.dim)), initial=0.0) <= tol)


def a_orthonormalize(A: np.ndarray, M: np.ndarray) -> np.ndarray:
    """Modified Gram-Schmidt in the A-inner product, with one reorthogonalization pass."""
    M = np.array(M, dtype=float)
    if M.ndim == 1:
        M = M[:, None]
    Q = np.zeros_like(M)
    for j in range(M.shape[1]):
        v = M[:, j].copy()
        start = np.sqrt(max(v @ A @ v, 0.0))
        for _ in range(2):
            for i in range(j):
                v -= (Q[:, i] @ A @ v) * Q[:, i]
        nrm = np.sqrt(max(v @ A @ v, 0.0))
        if start == 0.0 or nrm <= RANK_TOL * start:
            raise MinimaxError(f"subspace basis is rank deficient (column {j})")
        Q[:, j] = v / nrm
    return Q


def a_orthogonal_complement(pencil: Pencil, subspace: Subspace) -> Subspace:
    """A-orthonormal basis of {u : u^T A q = 0 for all q in the subspace}."""
    n, k = pencil.n, subspace.dim
    if k == 0:
        return Subspace(pencil.to_coefficients(np.eye(n)))
    V = pencil.to_reduced(subspace.basis)
    full, _ = np.linalg.qr(V, mode="complete")
    return Subspace(pencil.to_coefficients(full[:, k:]))


def rayleigh_extrema(pencil: Pencil, subspace: Subspace | np.ndarray) -> tuple[float, float]:
    """(inf, sup) of u^T B u over u in F with u^T A u = 1."""
    if not isinstance(subspace, Subspace):
        subspace = Subspace.from_vectors(pencil, subspace)
    elif not subspace.is_orthonormal(pencil.A):
        subspace = Subspace.from_vectors(pencil, subspace.basis)
    Q = subspace.basis
    if Q.shape[1] == 0:
        raise MinimaxError("Rayleigh extrema of the zero subspace are undefined")
    w = np.linalg.eigvalsh(Q.T @ pencil.B @ Q)
    return float(w[0]), float(w[-1])


@dataclass(frozen=True)
class MinimaxReport:
    formula: str
    k: int
    target: float
    worst_sample: float
    witness_value: float
    samples: int
    violation: float
    witness_error: float

    @property
    def passed(self) -> bool:
        scale = max(1.0, abs(self.target))
        return self.violation <= BOUND_TOL * scale and self.witness_error <= WITNESS_TOL * scale

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def row(self) -> dict:
        return {
            "formula": self.formula,
            "k": self.k,
            "target": self.target,
            "worst_sample": self.worst_sample,
            "witness_value": self.witness_value,
            "samples": self.samples,
            "verdict": self.verdict,
        }

    def to_dict(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict
        return d


def _sample_extrema(C: np.ndarray, dim: int, samples: int, rng: np.random.Generator, complement: bool, pencil: Pencil):
    """Smallest and largest restricted eigenvalue for each random subspace.

    With ``complement`` the quotient is restricted to the A-orthogonal
    complement of the sampled ``dim``-dimensional subspace.
    """
    n = C.shape[0]
    lo = np.empty(samples)
    hi = np.empty(samples)
    if dim == 0:
        # only the zero subspace; its complement is everything
        w = np.linalg.eigvalsh(C)
        lo[:], hi[:] = w[0], w[-1]
        return lo, hi
    LT = pencil.chol.T
    done = 0
    while done < samples:
        m = min(BATCH, samples - done)
        G = rng.standard_normal((m, n, dim))
        V = LT @ G
        if complement:
            full, _ = np.linalg.qr(V, mode="complete")
            P = full[:, :, dim:]
        else:
            P, _ = np.linalg.qr(V)
        w = np.linalg.eigvalsh(np.swapaxes(P, 1, 2) @ C @ P)
        lo[done : done + m] = w[:, 0]
        hi[done : done + m] = w[:, -1]
        done += m
    return lo, hi


def _check(pencil, spectrum, k, samples, seed, negative):
    if samples < 1:
        raise MinimaxError("samples must be positive")
    idx = -abs(k) if negative else k
    if k == 0 or not spectrum.has(idx):
        raise InadmissibleIndexError(f"k inadmissible: index {idx} is not in the computed spectrum")
    kk = abs(k)
    C = pencil.reduce()
    target = spectrum.mu(idx)
    rng = np.random.default_rng(seed)
    sign = -1 if negative else 1
    eigs = [sign * j for j in range(1, kk + 1)]

    # F of dimension k, quotient restricted to F
    lo, hi = _sample_extrema(C, kk, samples, rng, complement=False, pencil=pencil)
    lo_w, hi_w = rayleigh_extrema(pencil, Subspace(spectrum.vectors(eigs)))
    if negative:
        inside = ("Eminus_infsup", float(np.min(hi)), hi_w, target - float(np.min(hi)))
    else:
        inside = ("Eplus_supinf", float(np.max(lo)), lo_w, float(np.max(lo)) - target)

    # F of dimension k-1, quotient restricted to its A-orthogonal complement
    lo, hi = _sample_extrema(C, kk - 1, samples, rng, complement=True, pencil=pencil)
    witness = Subspace(spectrum.vectors(eigs[:-1])) if kk > 1 else Subspace(np.zeros((pencil.n, 0)))
    lo_w, hi_w = rayleigh_extrema(pencil, a_orthogonal_complement(pencil, witness))
    if negative:
        outside = ("Eminus_supinf", float(np.max(lo)), lo_w, float(np.max(lo)) - target)
    else:
        outside = ("Eplus_infsup", float(np.min(hi)), hi_w, target - float(np.min(hi)))

    reports = []
    for formula, worst, wit, excess in (inside, outside):
        reports.append(
            MinimaxReport(
                formula=formula,
                k=idx,
                target=target,
                worst_sample=worst,
                witness_value=wit,
                samples=samples,
                violation=max(excess, 0.0),
                witness_error=abs(wit - target),
            )
        )
    return tuple(reports)


def verify_Eplus(pencil: Pencil, spectrum: Spectrum, k: int, samples: int = 1000, seed: int = 0):
    """Sup-inf and inf-sup checks of mu_k, k >= 1. Returns two reports."""
    if k < 1:
        raise InadmissibleIndexError(f"k inadmissible: positive-branch check needs k >= 1, got {k}")
    return _check(pencil, spectrum, k, samples, seed, negative=False)


def verify_Eminus(pencil: Pencil, spectrum: Spectrum, k: int, samples: int = 1000, seed: int = 0):
    """Inf-sup and sup-inf checks of mu_{-k}; ``k`` may be given as k or -k."""
    return _check(pencil, spectrum, abs(k), samples, seed, negative=True)
