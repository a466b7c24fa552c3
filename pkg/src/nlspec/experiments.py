"""Weight-dependence experiments on a discretized operator.

Continuity of 1/lam_k under weight perturbations (with the operator-norm
bound), weak and strict monotonicity in the weight, nodal zero-set
diagnostics for eigenvectors, and the equal-eigenvalue weight edit that
becomes possible once an eigenvector vanishes on a set of cells.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .discretization import DiscreteOperator, Mesh, Weight
from .errors import ExperimentError
from .pencil import Pencil, Spectrum, operator_distance, solve_spectrum

SLACK_TOL = 1e-10
SHRINK_TOL = 1e-12
GAP_TOL = 1e-10
STRICT_TOL = 1e-9
EQUALITY_TOL = 1e-10
IMAGE_TOL = 1e-14
MODES = ("uniform", "random-cells")


def worker_count() -> int:
    raw = os.environ.get("NLSPEC_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ExperimentError(f"NLSPEC_THREADS must be an integer, got {raw!r}") from None


def ordered_map(fn: Callable, items: Iterable) -> list:
    """map() over a thread pool capped by NLSPEC_THREADS; results keep input order."""
    items = list(items)
    workers = min(worker_count(), max(1, len(items)))
    if workers == 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _solve(system: DiscreteOperator, weight: Weight, base: Pencil | None = None) -> tuple[Pencil, Spectrum]:
    B = system.weight_matrix(weight)
    pencil = Pencil(system.stiffness, B) if base is None else base.with_weight(B)
    return pencil, solve_spectrum(pencil)


def _branch_indices(spectra: Sequence[Spectrum], kmax: int) -> list[int]:
    """Indices |k| <= kmax present in every spectrum, positive branch first."""
    ks = [k for k in range(1, kmax + 1)] + [-k for k in range(1, kmax + 1)]
    return [k for k in ks if all(sp.has(k) for sp in spectra)]


# ------------------------------------------------------------- continuity


@dataclass(frozen=True)
class ContinuityRow:
    eps: float
    sup_distance: float
    operator_distance: float
    k: int
    deviation: float

    @property
    def slack(self) -> float:
        return self.operator_distance - self.deviation


@dataclass(frozen=True)
class ContinuityReport:
    mode: str
    rows: tuple[ContinuityRow, ...]
    skipped: tuple[float, ...]
    converged: bool | None  # None when eps_list is not a same-sign shrinking sequence

    @property
    def worst_slack(self) -> float:
        return min((r.slack for r in self.rows), default=float("inf"))

    @property
    def passed(self) -> bool:
        return self.worst_slack >= -SLACK_TOL and self.converged is not False

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def table(self) -> list[dict]:
        return [dict(asdict(r), slack=r.slack) for r in self.rows]


def _perturbation(rho: Weight, mode: str, seed: int) -> np.ndarray:
    if mode == "uniform":
        return np.ones(rho.n_cells)
    if mode == "random-cells":
        rng = np.random.default_rng(seed)
        mask = np.zeros(rho.n_cells)
        mask[rng.permutation(rho.n_cells)[: rho.n_cells // 2]] = 1.0
        return mask
    raise ExperimentError(f"unknown continuity mode {mode!r} (expected one of {MODES})")


def _shrinking(eps_list: Sequence[float]) -> bool:
    e = np.asarray(eps_list, dtype=float)
    if e.size < 2 or np.any(e == 0.0):
        return False
    return bool(np.all(np.sign(e) == np.sign(e[0])) and np.all(np.abs(e[1:]) < np.abs(e[:-1])))


def continuity_sweep(
    system: DiscreteOperator,
    rho: Weight,
    eps_list: Sequence[float],
    mode: str = "uniform",
    kmax: int = 6,
    seed: int = 0,
) -> ContinuityReport:
    """Compare the spectrum of rho with that of rho + eps * mask for each eps.

    ``mode="uniform"`` shifts every cell; ``"random-cells"`` shifts one
    seeded random half of the cells, the same half for every eps. Each row
    compares |1/lam_k(rho_eps) - 1/lam_k(rho)| with the operator distance of
    the two weights, which bounds it.
    """
    if rho.is_zero:
        raise ExperimentError("weight identically zero")
    mask = _perturbation(rho, mode, seed)
    base, sp0 = _solve(system, rho)

    def step(eps: float):
        rho_eps = Weight(rho.cell_values + eps * mask)
        if rho_eps.is_zero:
            return None
        pencil, sp = _solve(system, rho_eps, base)
        dist = operator_distance(base, pencil)
        sup = float(np.max(np.abs(rho_eps.cell_values - rho.cell_values)))
        return [
            ContinuityRow(float(eps), sup, dist, k, abs(sp.mu(k) - sp0.mu(k)))
            for k in _branch_indices([sp0, sp], kmax)
        ]

    results = ordered_map(step, [float(e) for e in eps_list])
    rows, skipped = [], []
    for eps, res in zip(eps_list, results):
        if res is None:
            skipped.append(float(eps))
        else:
            rows.extend(res)

    converged = None
    if _shrinking(eps_list) and not skipped:
        converged = True
        by_k: dict[int, list[float]] = {}
        for r in rows:
            by_k.setdefault(r.k, []).append(r.deviation)
        for devs in by_k.values():
            if len(devs) == len(eps_list) and np.any(np.diff(devs) > SHRINK_TOL):
                converged = False
    return ContinuityReport(mode, tuple(rows), tuple(skipped), converged)


# ------------------------------------------------------------ zero sets


@dataclass(frozen=True)
class ZeroSetReport:
    k: int
    tau: float
    zero_cells: tuple[int, ...]
    h: float
    n_cells: int
    classification: str

    @property
    def measure(self) -> float:
        return len(self.zero_cells) * self.h

    def to_dict(self) -> dict:
        d = asdict(self)
        d["measure"] = self.measure
        return d


def cell_magnitudes(nodal: np.ndarray) -> np.ndarray:
    """Largest |u| over the interior nodes of each cell."""
    padded = np.abs(np.concatenate([[0.0], nodal, [0.0]]))
    return np.maximum(padded[:-1], padded[1:])


def _classify(zero: np.ndarray) -> str:
    if not zero.any():
        return "nonvanishing"
    # a run of zero cells with nonzero cells on both sides sits strictly inside the domain
    nz = np.flatnonzero(~zero)
    if nz.size and np.any(zero[nz[0] : nz[-1] + 1]):
        return "open zero set"
    return "positive-measure zero set"


def zero_set(
    spectrum: Spectrum, mesh: Mesh, k: int, tau: float, free: np.ndarray | None = None
) -> ZeroSetReport:
    """Cells on which the k-th eigenvector is below ``tau`` times its maximum.

    ``free`` maps the unknowns to interior mesh nodes when some nodes are
    pinned to zero (see :class:`DiscreteOperator`).
    """
    if not 0.0 < tau <= 1.0:
        raise ExperimentError(f"tau must lie in (0, 1], got {tau}")
    vec = spectrum.vector(k)
    if free is None:
        nodal = vec
    else:
        nodal = np.zeros(mesh.n)
        nodal[free] = vec
    if nodal.size != mesh.n:
        raise ExperimentError(f"eigenvector has {nodal.size} nodal values, mesh has {mesh.n}")
    mags = cell_magnitudes(nodal)
    zero = mags <= tau * np.max(np.abs(nodal))
    return ZeroSetReport(k, float(tau), tuple(int(j) for j in np.flatnonzero(zero)), mesh.h, mesh.n_cells, _classify(zero))


# ---------------------------------------------------------- monotonicity


@dataclass(frozen=True)
class MonotonicityRow:
    k: int
    lam_rho: float
    lam_tilde: float
    strict: bool
    zero_fraction: float

    @property
    def gap(self) -> float:
        return self.lam_rho - self.lam_tilde


@dataclass(frozen=True)
class MonotonicityReport:
    rows: tuple[MonotonicityRow, ...]
    support: tuple[int, ...]

    @property
    def worst_gap(self) -> float:
        # gaps are compared on the scale of the eigenvalue
        return min((r.gap / max(1.0, abs(r.lam_rho)) for r in self.rows), default=float("inf"))

    @property
    def passed(self) -> bool:
        return self.worst_gap >= -GAP_TOL

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def table(self) -> list[dict]:
        return [dict(asdict(r), gap=r.gap) for r in self.rows]


def compare_weights(
    system: DiscreteOperator,
    rho: Weight,
    rho_tilde: Weight,
    kmax: int = 8,
    tau: float = 1e-6,
) -> MonotonicityReport:
    """Eigenvalues of rho against those of a cellwise larger weight rho_tilde.

    Every row satisfies lam_k(rho) >= lam_k(rho_tilde) up to rounding; a row
    is strict when the gap exceeds 1e-9 * max(1, |lam_k(rho)|). The zero
    fraction is the share of cells of supp(rho_tilde - rho) on which the
    eigenvector of rho is below ``tau`` of its maximum.
    """
    if rho.n_cells != rho_tilde.n_cells:
        raise ExperimentError("weights not comparable or equal: different cell counts")
    diff = rho_tilde.cell_values - rho.cell_values
    if np.any(diff < 0.0) or not np.any(diff > 0.0):
        raise ExperimentError("weights not comparable or equal")
    (_, sp), (_, sp_t) = ordered_map(lambda w: _solve(system, w), [rho, rho_tilde])
    support = np.flatnonzero(diff > 0.0)
    free = system.free
    rows = []
    for k in _branch_indices([sp, sp_t], kmax):
        lam, lam_t = sp.lam(k), sp_t.lam(k)
        zs = zero_set(sp, system.mesh, k, tau, free)
        frac = float(np.isin(support, zs.zero_cells).mean())
        strict = lam - lam_t > STRICT_TOL * max(1.0, abs(lam))
        rows.append(MonotonicityRow(k, lam, lam_t, bool(strict), frac))
    return MonotonicityReport(tuple(rows), tuple(int(j) for j in support))


# ------------------------------------------------- equal-eigenvalue edit


@dataclass(frozen=True)
class ConstructionReport:
    k: int
    epsilon: float
    zero_cells: tuple[int, ...]
    lam_rho: float
    lam_eps: float
    image_defect: float
    index_stable: bool
    neighbor: float | None
    weights_differ: bool
    ordered: bool
    classification: str = field(default="")

    @property
    def difference(self) -> float:
        return abs(self.lam_eps - self.lam_rho)

    @property
    def equal(self) -> bool:
        return self.difference <= EQUALITY_TOL * max(1.0, abs(self.lam_rho))

    @property
    def passed(self) -> bool:
        return self.equal and self.index_stable and self.weights_differ and self.ordered and self.image_defect <= IMAGE_TOL

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> dict:
        d = asdict(self)
        d.update(difference=self.difference, equal=self.equal, verdict=self.verdict)
        return d


def _separated(sp: Spectrum, k: int) -> bool:
    """Is lam_k strictly below the next eigenvalue of its branch (in magnitude)?"""
    nxt = k + 1 if k > 0 else k - 1
    if not sp.has(nxt):
        return True
    return abs(sp.lam(nxt)) - abs(sp.lam(k)) > STRICT_TOL * abs(sp.lam(k))


def rev_construct(
    system: DiscreteOperator,
    rho: Weight,
    k: int,
    epsilon: float,
    zero_tau: float = 1e-10,
) -> tuple[Weight, ConstructionReport]:
    """Raise (k > 0) or lower (k < 0) the weight on the zero set of e_k.

    When e_k vanishes on the cells A, the edited weight rho + epsilon * 1_A
    leaves B e_k unchanged, so lam_k stays an eigenvalue. The edit is only
    reported as passing if lam_k also keeps its index k.
    """
    pencil, sp = _solve(system, rho)
    if not sp.has(k):
        raise ExperimentError(f"index {k} not in the spectrum of the weight")
    if epsilon == 0.0 or np.sign(epsilon) != np.sign(k):
        raise ExperimentError("epsilon must be nonzero with the sign of k")
    if not _separated(sp, k):
        raise ExperimentError(f"eigenvalue lam_{k} is degenerate with its successor; construction needs a simple gap")
    zs = zero_set(sp, system.mesh, k, zero_tau, system.free)
    if not zs.zero_cells:
        raise ExperimentError("u.c.p. holds at this tolerance; construction inapplicable")

    cells = np.array(zs.zero_cells)
    vals = rho.cell_values.copy()
    vals[cells] += epsilon
    rho_eps = Weight(vals)
    new_pencil, sp_eps = _solve(system, rho_eps, pencil)

    lam = sp.lam(k)
    nxt = k + 1 if k > 0 else k - 1
    neighbor = sp_eps.lam(nxt) if sp_eps.has(nxt) else None
    if neighbor is not None and abs(neighbor) <= abs(lam) * (1.0 + STRICT_TOL):
        raise ExperimentError(
            f"eigenvalue crossing: lam_{nxt}(rho_eps) = {neighbor:.6g} reaches lam_{k}(rho) = {lam:.6g}; use a smaller |epsilon|"
        )
    e = sp.vector(k)
    image_defect = float(np.max(np.abs(new_pencil.B @ e - pencil.B @ e)))
    # index stability: the closest eigenvalue of the new branch sits at position k
    branch = sp_eps.lam_pos if k > 0 else sp_eps.lam_neg
    position = int(np.argmin(np.abs(branch - lam))) + 1 if branch.size else 0
    lam_eps = sp_eps.lam(k) if sp_eps.has(k) else float("nan")
    diff = rho_eps.cell_values - rho.cell_values
    report = ConstructionReport(
        k=k,
        epsilon=float(epsilon),
        zero_cells=zs.zero_cells,
        lam_rho=lam,
        lam_eps=lam_eps,
        image_defect=image_defect,
        index_stable=position == abs(k),
        neighbor=neighbor,
        weights_differ=bool(np.any(diff != 0.0)),
        ordered=bool(np.all(diff >= 0.0) if k > 0 else np.all(diff <= 0.0)),
        classification=zs.classification,
    )
    return rho_eps, report
