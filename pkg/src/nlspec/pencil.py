"""Two-sided spectrum of the pencil A c = lam B c, A SPD and B symmetric indefinite.

With A = L L^T the weighted form is represented in the A-inner product by
the symmetric matrix C = L^-1 B L^-T. Its eigenvalues mu are the reciprocals
of the pencil eigenvalues: positive mu give the branch lam_1 <= lam_2 <= ...,
negative mu give lam_-1 >= lam_-2 >= ..., and mu == 0 (the kernel of B) is
not an eigenvalue at all.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg as sla

from .errors import InadmissibleIndexError, PencilError
from .linalg import jacobi_eigh

SYMMETRY_TOL = 1e-12
DEFAULT_ZERO_TOL_FACTOR = 1e-12


def _check_symmetric(M: np.ndarray, name: str) -> None:
    scale = max(np.max(np.abs(M)), np.finfo(float).tiny)
    if np.max(np.abs(M - M.T)) > SYMMETRY_TOL * scale:
        raise PencilError(f"{name} is not symmetric")


@dataclass(frozen=True, eq=False)
class Pencil:
    A: np.ndarray
    B: np.ndarray
    chol: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        if A.ndim != 2 or A.shape[0] != A.shape[1]:
            raise PencilError("stiffness must be a square matrix")
        if B.shape != A.shape:
            raise PencilError(f"weight matrix shape {B.shape} does not match stiffness {A.shape}")
        _check_symmetric(A, "stiffness")
        _check_symmetric(B, "weight matrix")
        try:
            L = sla.cholesky(A, lower=True)
        except sla.LinAlgError as exc:
            raise PencilError("stiffness is not symmetric positive definite (Cholesky failed)") from exc
        for M in (A, B, L):
            M.setflags(write=False)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "chol", L)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    def with_weight(self, B: np.ndarray) -> "Pencil":
        """Same stiffness (and factor), new weight matrix."""
        B = np.array(B, dtype=float)
        if B.shape != self.A.shape:
            raise PencilError(f"weight matrix shape {B.shape} does not match stiffness {self.A.shape}")
        _check_symmetric(B, "weight matrix")
        B.setflags(write=False)
        new = object.__new__(Pencil)
        object.__setattr__(new, "A", self.A)
        object.__setattr__(new, "B", B)
        object.__setattr__(new, "chol", self.chol)
        return new

    def reduce(self, M: np.ndarray | None = None) -> np.ndarray:
        """L^-1 M L^-T (default M = B), symmetrized."""
        M = self.B if M is None else M
        X = sla.solve_triangular(self.chol, M, lower=True)
        C = sla.solve_triangular(self.chol, X.T, lower=True)
        return 0.5 * (C + C.T)

    def to_coefficients(self, V: np.ndarray) -> np.ndarray:
        """Map Euclidean-orthonormal vectors of the reduced problem to A-orthonormal coefficients."""
        return sla.solve_triangular(self.chol, V, lower=True, trans="T")

    def to_reduced(self, Q: np.ndarray) -> np.ndarray:
        return self.chol.T @ Q


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Positive and negative branches; ``mu`` is stored, ``lam`` recomputed as 1/mu."""

    mu_pos: np.ndarray  # descending
    vec_pos: np.ndarray
    mu_neg: np.ndarray  # ascending
    vec_neg: np.ndarray
    zero_multiplicity: int
    zero_tol: float

    @property
    def n_pos(self) -> int:
        return int(self.mu_pos.size)

    @property
    def n_neg(self) -> int:
        return int(self.mu_neg.size)

    @property
    def lam_pos(self) -> np.ndarray:
        return 1.0 / self.mu_pos

    @property
    def lam_neg(self) -> np.ndarray:
        return 1.0 / self.mu_neg

    @property
    def indices(self) -> list[int]:
        return list(range(1, self.n_pos + 1)) + [-j for j in range(1, self.n_neg + 1)]

    def has(self, k: int) -> bool:
        return (0 < k <= self.n_pos) or (0 < -k <= self.n_neg)

    def _locate(self, k: int) -> tuple[np.ndarray, np.ndarray, int]:
        if not self.has(k):
            raise InadmissibleIndexError(
                f"index {k} not available (positive branch {self.n_pos}, negative branch {self.n_neg})"
            )
        if k > 0:
            return self.mu_pos, self.vec_pos, k - 1
        return self.mu_neg, self.vec_neg, -k - 1

    def mu(self, k: int) -> float:
        mu, _, i = self._locate(k)
        return float(mu[i])

    def lam(self, k: int) -> float:
        return 1.0 / self.mu(k)

    def vector(self, k: int) -> np.ndarray:
        _, vec, i = self._locate(k)
        return vec[:, i]

    def vectors(self, ks) -> np.ndarray:
        return np.column_stack([self.vector(k) for k in ks])

    def residual(self, pencil: Pencil, k: int) -> float:
        """||A e - lam B e|| / ||A e||."""
        e = self.vector(k)
        Ae = pencil.A @ e
        return float(np.linalg.norm(Ae - self.lam(k) * (pencil.B @ e)) / np.linalg.norm(Ae))

    def rows(self, pencil: Pencil) -> list[dict]:
        return [
            {"k": k, "lambda": self.lam(k), "mu": self.mu(k), "residual": self.residual(pencil, k)}
            for k in self.indices
        ]


def _fix_signs(E: np.ndarray) -> np.ndarray:
    # largest-magnitude entry positive, first one on ties
    if E.size == 0:
        return E
    idx = np.argmax(np.abs(E), axis=0)
    signs = np.sign(E[idx, np.arange(E.shape[1])])
    signs[signs == 0] = 1.0
    return E * signs


def solve_spectrum(pencil: Pencil, zero_tol: float | None = None, method: str = "lapack") -> Spectrum:
    """Full two-sided spectrum of the pencil.

    Parameters
    ----------
    pencil : Pencil
    zero_tol : float, optional
        Reduced eigenvalues with ``|mu| <= zero_tol`` are counted in
        ``zero_multiplicity`` and discarded. Defaults to ``1e-12 * ||C||_2``.
    method : {"lapack", "jacobi"}
        Symmetric QR via LAPACK, or the cyclic Jacobi solver in
        :mod:`nlspec.linalg`. Both are deterministic for a given input.
    """
    if not np.any(pencil.B):
        raise PencilError("weight identically zero")
    C = pencil.reduce()
    if method == "lapack":
        mu, V = sla.eigh(C)
    elif method == "jacobi":
        mu, V = jacobi_eigh(C)
    else:
        raise PencilError(f"unknown eigensolver {method!r}")
    norm = float(np.max(np.abs(mu)))
    tol = DEFAULT_ZERO_TOL_FACTOR * norm if zero_tol is None else float(zero_tol)
    if not tol > 0.0:
        raise PencilError("zero_tol must be positive")
    pos = np.flatnonzero(mu > tol)[::-1]
    neg = np.flatnonzero(mu < -tol)
    E = _fix_signs(pencil.to_coefficients(V))
    sp = Spectrum(
        mu_pos=mu[pos],
        vec_pos=E[:, pos],
        mu_neg=mu[neg],
        vec_neg=E[:, neg],
        zero_multiplicity=int(mu.size - pos.size - neg.size),
        zero_tol=tol,
    )
    for arr in (sp.mu_pos, sp.vec_pos, sp.mu_neg, sp.vec_neg):
        arr.setflags(write=False)
    return sp


def operator_distance(p1: Pencil, p2: Pencil) -> float:
    """Norm of L^-1 (B1 - B2) L^-T: the distance of the two weight operators
    in the operator norm induced by the A-inner product."""
    if p1.A is not p2.A and not np.array_equal(p1.A, p2.A):
        raise PencilError("operator distance needs pencils with the same stiffness")
    D = p1.B - p2.B
    if not np.any(D):
        return 0.0
    return float(np.max(np.abs(sla.eigvalsh(p1.reduce(D)))))


@dataclass(frozen=True)
class AdmissibilityReport:
    positive_admissible: bool
    negative_admissible: bool
    n_positive: int
    n_negative: int

    @property
    def consistent(self) -> bool:
        return self.positive_admissible == (self.n_positive > 0) and self.negative_admissible == (self.n_negative > 0)

    @property
    def messages(self) -> list[str]:
        out = []
        if self.positive_admissible != (self.n_positive > 0):
            out.append(
                f"sign rule violation: positive part nonzero={self.positive_admissible} "
                f"but {self.n_positive} positive eigenvalues computed"
            )
        if self.negative_admissible != (self.n_negative > 0):
            out.append(
                f"sign rule violation: negative part nonzero={self.negative_admissible} "
                f"but {self.n_negative} negative eigenvalues computed"
            )
        return out


def admissible_indices(weight, spectrum: Spectrum) -> AdmissibilityReport:
    """Cross-check the sign parts of the weight against the computed branches."""
    return AdmissibilityReport(
        positive_admissible=weight.positive_part_nonzero,
        negative_admissible=weight.negative_part_nonzero,
        n_positive=spectrum.n_pos,
        n_negative=spectrum.n_neg,
    )
