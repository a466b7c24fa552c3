"""P1 Galerkin discretization on a uniform interval mesh with zero exterior data.

Node ``i`` of the mesh sits at ``a + i*h`` for ``i = 0..n+1``; nodes 0 and
n+1 are the endpoints and carry no degree of freedom. Cell ``j`` is
``[a + j*h, a + (j+1)*h]`` for ``j = 0..n``.

The stiffness form is assembled as

    A_ij = sum over ordered cell pairs (p, q) of
           int_p int_q (phi_i(x) - phi_i(y)) (phi_j(x) - phi_j(y)) K(x - y) dy dx
         + 2 int_Omega phi_i phi_j Phi(x) dx,

with ``Phi(x) = G(x - a) + G(b - x)`` and ``G(r) = int_r^inf K``. The
cell-pair contribution depends only on the offset ``q - p``, so one local
matrix is computed per offset and scattered along the diagonals.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import AssemblyError
from .kernel import Kernel, require_valid, tail_integral
from .quadrature import gauss_jacobi_01, gauss_legendre_01

SELF_CHECK_TOL = 1e-8
SELF_CHECK_FULL_MAX_N = 32
SELF_CHECK_SAMPLES = 10


@dataclass(frozen=True)
class Mesh:
    a: float
    b: float
    n: int

    def __post_init__(self):
        if not self.a < self.b:
            raise AssemblyError(f"mesh needs a < b, got ({self.a}, {self.b})")
        if int(self.n) != self.n or self.n < 1:
            raise AssemblyError(f"mesh needs n >= 1 interior nodes, got {self.n}")

    @property
    def h(self) -> float:
        return (self.b - self.a) / (self.n + 1)

    @property
    def n_cells(self) -> int:
        return self.n + 1

    @property
    def nodes(self) -> np.ndarray:
        return self.a + self.h * np.arange(1, self.n + 1)

    @property
    def cell_midpoints(self) -> np.ndarray:
        return self.a + self.h * (np.arange(self.n_cells) + 0.5)

    @property
    def length(self) -> float:
        return self.b - self.a


WEIGHT_EXPRESSIONS: dict[str, Callable[[np.ndarray, float, float], np.ndarray]] = {
    "one": lambda x, a, b: np.ones_like(x),
    "two": lambda x, a, b: 2.0 * np.ones_like(x),
    "minus_one": lambda x, a, b: -np.ones_like(x),
    "zero": lambda x, a, b: np.zeros_like(x),
    "left_right": lambda x, a, b: np.where(x < 0.5 * (a + b), 1.0, -1.0),
    "cosine": lambda x, a, b: np.cos(2.0 * np.pi * (x - a) / (b - a)),
    "ramp": lambda x, a, b: 2.0 * (x - a) / (b - a) - 1.0,
}


@dataclass(frozen=True, eq=False)
class Weight:
    """Piecewise-constant weight, one value per mesh cell."""

    cell_values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.cell_values, dtype=float)
        if vals.ndim != 1 or vals.size < 2:
            raise AssemblyError("weight needs one value per cell (at least two cells)")
        if not np.all(np.isfinite(vals)):
            raise AssemblyError("weight values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "cell_values", vals)

    @classmethod
    def constant(cls, value: float, mesh: Mesh) -> "Weight":
        return cls(np.full(mesh.n_cells, float(value)))

    @classmethod
    def from_expr(cls, tag: str, mesh: Mesh) -> "Weight":
        if tag not in WEIGHT_EXPRESSIONS:
            raise AssemblyError(f"unknown weight expression {tag!r}")
        return cls(WEIGHT_EXPRESSIONS[tag](mesh.cell_midpoints, mesh.a, mesh.b))

    @classmethod
    def from_dict(cls, data: dict, mesh: Mesh) -> "Weight":
        if "cells" in data:
            w = cls(data["cells"])
            w.check_mesh(mesh)
            return w
        return cls.from_expr(data["expr"], mesh)

    @property
    def n_cells(self) -> int:
        return self.cell_values.size

    @property
    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.cell_values)))

    @property
    def positive_part_nonzero(self) -> bool:
        return bool(np.any(self.cell_values > 0.0))

    @property
    def negative_part_nonzero(self) -> bool:
        return bool(np.any(self.cell_values < 0.0))

    @property
    def is_zero(self) -> bool:
        return not np.any(self.cell_values)

    def check_mesh(self, mesh: Mesh) -> None:
        if self.n_cells != mesh.n_cells:
            raise AssemblyError(f"weight has {self.n_cells} cells, mesh has {mesh.n_cells}")

    def __add__(self, other: "Weight") -> "Weight":
        return Weight(self.cell_values + other.cell_values)

    def __sub__(self, other: "Weight") -> "Weight":
        return Weight(self.cell_values - other.cell_values)

    def __mul__(self, c: float) -> "Weight":
        return Weight(float(c) * self.cell_values)

    __rmul__ = __mul__

    def equals(self, other: "Weight") -> bool:
        return self.n_cells == other.n_cells and bool(np.array_equal(self.cell_values, other.cell_values))


@dataclass(frozen=True)
class QuadratureSettings:
    regular: int = 12
    singular: int = 16

    def doubled(self) -> "QuadratureSettings":
        return QuadratureSettings(2 * self.regular, 2 * self.singular)


# ---------------------------------------------------------------- assembly


def _same_cell_block(kernel: Kernel, h: float, npts: int) -> np.ndarray:
    # (x - y)^2 K(x - y) over a cell squared; reduces to 2 int_0^h (h - r) r^2 K(r) dr
    s, alpha = kernel.s, kernel.alpha
    t, w = gauss_jacobi_01(npts, 1.0 - 2.0 * s)
    j = h ** (3.0 - 2.0 * s) * np.dot(w, (1.0 - t) * kernel.modulation_values(h * t))
    return (2.0 * alpha * j / h**2) * np.array([[1.0, -1.0], [-1.0, 1.0]])


def _adjacent_block(kernel: Kernel, h: float, npts: int) -> np.ndarray:
    """Local 3x3 matrix for cells [0,h] x [h,2h] on nodes 0, 1, 2.

    With x = h - u, y = h + w the singular corner moves to the origin; each
    half of the (u, w) square is mapped by a Duffy transform whose radial
    Jacobian combines with the two difference factors into xi^(2-2s),
    absorbed by Gauss-Jacobi weights.
    """
    s, alpha = kernel.s, kernel.alpha
    xi, wxi = gauss_jacobi_01(npts, 2.0 - 2.0 * s)
    eta, weta = gauss_legendre_01(npts)
    X, E = np.meshgrid(xi, eta, indexing="ij")
    W = np.outer(wxi, weta)
    radial = (1.0 + E) ** (-1.0 - 2.0 * s) * kernel.modulation_values(h * X * (1.0 + E))
    one = np.ones_like(E)
    lower = np.stack([one, E - 1.0, -E])  # w <= u
    upper = np.stack([E, 1.0 - E, -one])  # u <= w
    weighted = W * radial
    block = np.einsum("aij,bij,ij->ab", lower, lower, weighted)
    block += np.einsum("aij,bij,ij->ab", upper, upper, weighted)
    return alpha * h ** (1.0 - 2.0 * s) * block


def _separated_blocks(kernel: Kernel, h: float, offsets: np.ndarray, npts: int) -> np.ndarray:
    """Local 4x4 matrices for cells [0,h] x [dh,(d+1)h], d >= 2, nodes (0, 1, d, d+1)."""
    t, w = gauss_legendre_01(npts)
    TX, TY = np.meshgrid(t, t, indexing="ij")
    W = np.outer(w, w)
    diffs = np.stack([1.0 - TX, TX, -(1.0 - TY), -TY])
    r = h * (offsets[:, None, None] + TY[None] - TX[None])
    kv = kernel(r)
    return h**2 * np.einsum("aij,bij,dij->dab", diffs, diffs, W[None] * kv)


def _boundary_cell_value(kernel: Kernel, h: float, npts: int) -> float:
    """int over the boundary cell of N^2 G(dist to endpoint), N the interior hat.

    Swapping the order of integration gives
    int_0^inf K(t) min(t, h)^3 / (3 h^2) dt, which splits into a Gauss-Jacobi
    integral on (0, h) and h/3 * G(h).
    """
    s, alpha = kernel.s, kernel.alpha
    t, w = gauss_jacobi_01(npts, 2.0 - 2.0 * s)
    near = alpha * h ** (1.0 - 2.0 * s) / 3.0 * np.dot(w, kernel.modulation_values(h * t))
    return float(near + h / 3.0 * tail_integral(kernel, h))


def _scatter(full: np.ndarray, block: np.ndarray, rel_nodes: Sequence[int], starts: np.ndarray) -> None:
    for ia, ra in enumerate(rel_nodes):
        for ib, rb in enumerate(rel_nodes):
            full[starts + ra, starts + rb] += block[ia, ib]


def _assemble(kernel: Kernel, mesh: Mesh, quad: QuadratureSettings) -> np.ndarray:
    n, h = mesh.n, mesh.h
    ncell = mesh.n_cells
    full = np.zeros((n + 2, n + 2))
    cells = np.arange(ncell)

    _scatter(full, _same_cell_block(kernel, h, quad.singular), (0, 1), cells)
    # ordered pairs (p, q) and (q, p) contribute equally for q != p
    _scatter(full, 2.0 * _adjacent_block(kernel, h, quad.singular), (0, 1, 2), cells[:-1])
    offsets = np.arange(2, ncell)
    if offsets.size:
        blocks = _separated_blocks(kernel, h, offsets.astype(float), quad.regular)
        rows, cols, vals = [], [], []
        for d, blk in zip(offsets, blocks):
            starts = np.arange(ncell - d)
            rel = np.array([0, 1, d, d + 1])
            r = (starts[:, None, None] + rel[None, :, None]).repeat(4, axis=2)
            c = (starts[:, None, None] + rel[None, None, :]).repeat(4, axis=1)
            rows.append(r.ravel())
            cols.append(c.ravel())
            vals.append(np.broadcast_to(2.0 * blk, (starts.size, 4, 4)).ravel())
        np.add.at(full, (np.concatenate(rows), np.concatenate(cols)), np.concatenate(vals))

    # exterior tail: 2 int phi_i phi_j Phi over each cell
    t, w = gauss_legendre_01(quad.regular)
    shape = np.stack([1.0 - t, t])
    local = np.einsum("aq,bq,q->abq", shape, shape, w)
    dist_left = h * (cells[1:, None] + t[None, :])
    dist_right = h * (ncell - cells[:-1, None] - t[None, :])
    left = 2.0 * h * np.einsum("abq,cq->cab", local, tail_integral(kernel, dist_left))
    right = 2.0 * h * np.einsum("abq,cq->cab", local, tail_integral(kernel, dist_right))
    for ia in range(2):
        for ib in range(2):
            full[cells[1:] + ia, cells[1:] + ib] += left[:, ia, ib]
            full[cells[:-1] + ia, cells[:-1] + ib] += right[:, ia, ib]
    edge = 2.0 * _boundary_cell_value(kernel, h, quad.singular)
    full[1, 1] += edge
    full[n, n] += edge

    A = full[1:-1, 1:-1]
    return 0.5 * (A + A.T)


def quadrature_drift(
    kernel: Kernel,
    mesh: Mesh,
    quad: QuadratureSettings = QuadratureSettings(),
    entries: np.ndarray | None = None,
) -> tuple[float, tuple[int, int]]:
    """Largest relative change of A entries when all rules are doubled.

    Returns the drift and the (i, j) index where it occurs. ``entries`` is an
    optional (m, 2) array restricting the comparison.
    """
    A1 = _assemble(kernel, mesh, quad)
    A2 = _assemble(kernel, mesh, quad.doubled())
    if entries is None:
        iu = np.triu_indices(mesh.n)
        entries = np.column_stack(iu)
    i, j = entries[:, 0], entries[:, 1]
    rel = np.abs(A2[i, j] - A1[i, j]) / np.abs(A2[i, j])
    worst = int(np.argmax(rel))
    return float(rel[worst]), (int(i[worst]), int(j[worst]))


def assemble_stiffness(
    kernel: Kernel,
    mesh: Mesh,
    quad: QuadratureSettings = QuadratureSettings(),
    *,
    self_check: bool = True,
    seed: int = 0,
) -> np.ndarray:
    """Dense stiffness matrix of the kernel form on the hat basis of ``mesh``.

    The kernel must pass :func:`nlspec.kernel.validate_kernel`. With
    ``self_check`` the assembly is repeated with doubled quadrature and every
    entry (n <= 32) or 10 seeded random entries (larger n) must agree to
    ``SELF_CHECK_TOL`` relative.
    """
    require_valid(kernel)
    A = _assemble(kernel, mesh, quad)
    if self_check:
        entries = None
        if mesh.n > SELF_CHECK_FULL_MAX_N:
            rng = np.random.default_rng(seed)
            entries = rng.integers(0, mesh.n, size=(SELF_CHECK_SAMPLES, 2))
        drift, (i, j) = quadrature_drift(kernel, mesh, quad, entries)
        if not drift < SELF_CHECK_TOL:
            raise AssemblyError(
                f"quadrature self-check failed at entry ({i}, {j}): relative drift {drift:.3e}"
            )
    return A


def assemble_weight(weight: Weight, mesh: Mesh) -> np.ndarray:
    """Exact mass-type matrix int rho phi_i phi_j for piecewise-constant rho."""
    weight.check_mesh(mesh)
    rho, h = weight.cell_values, mesh.h
    diag = h / 3.0 * (rho[:-1] + rho[1:])
    off = h / 6.0 * rho[1:-1]
    return np.diag(diag) + np.diag(off, 1) + np.diag(off, -1)


# ------------------------------------------------------------ operator view


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """A stiffness matrix together with the mesh its unknowns live on.

    ``free`` lists the mesh nodes (0-based among the n interior nodes) that
    carry unknowns; the remaining interior nodes are pinned to zero. For a
    kernel discretization every node is free.
    """

    stiffness: np.ndarray
    mesh: Mesh
    free: np.ndarray | None = None
    label: str = field(default="")

    def __post_init__(self):
        A = np.array(self.stiffness, dtype=float)
        A.setflags(write=False)
        object.__setattr__(self, "stiffness", A)
        if self.free is not None:
            free = np.array(self.free, dtype=int)
            free.setflags(write=False)
            object.__setattr__(self, "free", free)
        if A.shape != (self.dim, self.dim):
            raise AssemblyError(f"stiffness shape {A.shape} does not match {self.dim} unknowns")

    @classmethod
    def from_kernel(
        cls, kernel: Kernel, mesh: Mesh, quad: QuadratureSettings = QuadratureSettings()
    ) -> "DiscreteOperator":
        return cls(assemble_stiffness(kernel, mesh, quad), mesh, label=f"{kernel.family}(s={kernel.s})")

    @property
    def dim(self) -> int:
        return self.mesh.n if self.free is None else int(self.free.size)

    def weight_matrix(self, weight: Weight) -> np.ndarray:
        B = assemble_weight(weight, self.mesh)
        if self.free is None:
            return B
        return B[np.ix_(self.free, self.free)]

    def nodal(self, vec: np.ndarray) -> np.ndarray:
        """Values at all interior mesh nodes, zeros at pinned ones."""
        if self.free is None:
            return np.asarray(vec)
        out = np.zeros(self.mesh.n)
        out[self.free] = vec
        return out


def second_difference(m: int, h: float) -> np.ndarray:
    return (2.0 * np.eye(m) - np.eye(m, k=1) - np.eye(m, k=-1)) / h


def block_surrogate(
    sizes: Sequence[int] = (4, 4),
    scales: Sequence[float] = (1.0, 2.0),
    a: float = 0.0,
    b: float = 1.0,
) -> DiscreteOperator:
    """Local stiffness made of decoupled second-difference blocks.

    Consecutive blocks are separated by one pinned mesh node, so both the
    stiffness and every weight matrix are block diagonal and eigenvectors of
    one block vanish identically on the others. Distinct ``scales`` keep the
    lowest eigenvalues of different blocks apart.
    """
    if len(sizes) != len(scales) or len(sizes) < 2:
        raise AssemblyError("surrogate needs matching sizes/scales for at least two blocks")
    n = sum(sizes) + len(sizes) - 1
    mesh = Mesh(a, b, n)
    blocks, free, start = [], [], 0
    for m, c in zip(sizes, scales):
        if m < 1 or not c > 0:
            raise AssemblyError("surrogate blocks need positive size and scale")
        blocks.append(c * second_difference(m, mesh.h))
        free.extend(range(start, start + m))
        start += m + 1
    dim = sum(sizes)
    A = np.zeros((dim, dim))
    pos = 0
    for blk in blocks:
        m = blk.shape[0]
        A[pos : pos + m, pos : pos + m] = blk
        pos += m
    return DiscreteOperator(A, mesh, np.array(free), label="block_surrogate")
