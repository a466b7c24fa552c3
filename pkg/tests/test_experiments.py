import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nlspec.discretization import DiscreteOperator, Mesh, Weight, block_surrogate
from nlspec.errors import ExperimentError
from nlspec.experiments import (
    cell_magnitudes,
    compare_weights,
    continuity_sweep,
    ordered_map,
    rev_construct,
    zero_set,
)
from nlspec.kernel import Kernel
from nlspec.pencil import Pencil, solve_spectrum

from conftest import half_split, random_weight


def _spectrum(system, w):
    return solve_spectrum(Pencil(system.stiffness, system.weight_matrix(w)))


# ------------------------------------------------------------ continuity


def test_zero_step_is_exact(frac32):
    rep = continuity_sweep(frac32, half_split(frac32.mesh), [0.0])
    assert rep.rows and all(r.deviation == 0.0 and r.operator_distance == 0.0 for r in rep.rows)
    assert rep.converged is None


def test_uniform_shift_of_constant_weight(frac32):
    one = Weight.constant(1.0, frac32.mesh)
    eps_list = [0.1, 0.05, 0.025]
    rep = continuity_sweep(frac32, one, eps_list, "uniform", kmax=6)
    assert rep.worst_slack >= -1e-10
    assert rep.converged is True and rep.verdict == "PASS"
    lam1 = _spectrum(frac32, one).lam(1)
    for eps in eps_list:
        # lam_1(1 + eps) = lam_1(1) / (1 + eps)
        lam_eps = _spectrum(frac32, Weight.constant(1.0 + eps, frac32.mesh)).lam(1)
        assert lam_eps == pytest.approx(lam1 / (1.0 + eps), rel=1e-10)
        row = next(r for r in rep.rows if r.eps == eps and r.k == 1)
        assert row.deviation == pytest.approx(abs(1.0 / lam_eps - 1.0 / lam1), rel=1e-9)


def test_random_cells_reproducible(frac32):
    w = half_split(frac32.mesh)
    r1 = continuity_sweep(frac32, w, [0.1, 0.01], "random-cells", 4, seed=17)
    r2 = continuity_sweep(frac32, w, [0.1, 0.01], "random-cells", 4, seed=17)
    r3 = continuity_sweep(frac32, w, [0.1, 0.01], "random-cells", 4, seed=18)
    assert r1 == r2
    assert r1 != r3


def test_zero_weight_step_is_skipped():
    sur = block_surrogate()
    one = Weight.constant(1.0, sur.mesh)
    rep = continuity_sweep(sur, one, [-1.0, 0.5])
    assert rep.skipped == (-1.0,)
    assert {r.eps for r in rep.rows} == {0.5}


def test_continuity_argument_checks(frac32):
    with pytest.raises(ExperimentError, match="mode"):
        continuity_sweep(frac32, half_split(frac32.mesh), [0.1], "sideways")
    with pytest.raises(ExperimentError, match="identically zero"):
        continuity_sweep(frac32, Weight.constant(0.0, frac32.mesh), [0.1])


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), mode=st.sampled_from(["uniform", "random-cells"]))
def test_continuity_bound_random(frac32, seed, mode):
    rng = np.random.default_rng(seed)
    w = random_weight(rng, 33)
    eps = float(rng.choice([-1, 1]) * 10 ** rng.uniform(-3, -1))
    rep = continuity_sweep(frac32, w, [eps, eps / 2, eps / 4], mode, 6, seed)
    assert rep.worst_slack >= -1e-10
    assert rep.converged is True


def test_thread_pool_keeps_order(monkeypatch, frac32):
    w = half_split(frac32.mesh)
    serial = continuity_sweep(frac32, w, [0.1, 0.05, 0.02, 0.01], "random-cells", 4, 1)
    monkeypatch.setenv("NLSPEC_THREADS", "3")
    assert ordered_map(lambda x: x * x, range(7)) == [x * x for x in range(7)]
    threaded = continuity_sweep(frac32, w, [0.1, 0.05, 0.02, 0.01], "random-cells", 4, 1)
    assert threaded == serial
    monkeypatch.setenv("NLSPEC_THREADS", "many")
    with pytest.raises(ExperimentError):
        ordered_map(abs, [1, 2])


# ----------------------------------------------------------- zero sets


def test_cell_magnitudes():
    np.testing.assert_array_equal(cell_magnitudes(np.array([1.0, -3.0, 0.0])), [1, 3, 3, 0])


def test_first_eigenvector_has_no_zero_cells(frac32):
    sp = _spectrum(frac32, Weight.constant(1.0, frac32.mesh))
    rep = zero_set(sp, frac32.mesh, 1, 1e-6)
    assert rep.zero_cells == () and rep.classification == "nonvanishing"
    assert np.all(np.sign(sp.vector(1)) == 1)


def test_full_threshold_flags_everything(frac32):
    sp = _spectrum(frac32, half_split(frac32.mesh))
    for k in (2, -3):
        rep = zero_set(sp, frac32.mesh, k, 1.0)
        assert len(rep.zero_cells) == frac32.mesh.n_cells
        assert rep.measure == pytest.approx(frac32.mesh.length)


def test_measure_monotone_in_tau(frac32):
    sp = _spectrum(frac32, half_split(frac32.mesh))
    m = [zero_set(sp, frac32.mesh, 4, t).measure for t in np.geomspace(1e-6, 1.0, 12)]
    assert np.all(np.diff(m) >= 0)
    assert 0.0 <= min(m) and max(m) <= frac32.mesh.length


def test_block_eigenvector_vanishes_on_other_block():
    sur = block_surrogate()
    sp = _spectrum(sur, Weight.constant(1.0, sur.mesh))
    rep = zero_set(sp, sur.mesh, 1, 1e-10, sur.free)
    # block 2 spans the cells from the separator node to the right end
    assert rep.measure == pytest.approx(5 * sur.mesh.h)
    assert rep.classification == "positive-measure zero set"


def test_interior_zero_run_is_open():
    # e_1 = (1, 0, 0, 0, 1) / sqrt 2: cells 2 and 3 are zero with nonzero cells on both sides
    B = np.zeros((5, 5))
    B[0, 0] = B[4, 4] = B[0, 4] = B[4, 0] = 1.0
    sp = solve_spectrum(Pencil(np.eye(5), B))
    rep = zero_set(sp, Mesh(0.0, 1.0, 5), 1, 1e-12)
    assert rep.zero_cells == (2, 3)
    assert rep.classification == "open zero set"


def test_zero_set_tau_range(frac32):
    sp = _spectrum(frac32, half_split(frac32.mesh))
    with pytest.raises(ExperimentError):
        zero_set(sp, frac32.mesh, 1, 0.0)


# --------------------------------------------------------- monotonicity


def test_doubling_the_weight(frac32):
    one, two = Weight.constant(1.0, frac32.mesh), Weight.constant(2.0, frac32.mesh)
    rep = compare_weights(frac32, one, two, kmax=8)
    assert len(rep.rows) == 8
    for r in rep.rows:
        assert r.lam_tilde == pytest.approx(r.lam_rho / 2, rel=1e-10)
        assert r.strict
    assert rep.verdict == "PASS"


def test_single_cell_bump_is_strict(frac32):
    one = Weight.constant(1.0, frac32.mesh)
    vals = one.cell_values.copy()
    vals[11] += 0.5
    rep = compare_weights(frac32, one, Weight(vals), kmax=2)
    assert rep.support == (11,)
    assert rep.rows[0].k == 1 and rep.rows[0].strict
    assert rep.rows[0].zero_fraction == 0.0


def test_equal_or_unordered_weights_rejected(frac32):
    w = half_split(frac32.mesh)
    with pytest.raises(ExperimentError, match="weights not comparable or equal"):
        compare_weights(frac32, w, w)
    with pytest.raises(ExperimentError, match="weights not comparable"):
        compare_weights(frac32, Weight.constant(1.0, frac32.mesh), w)


def test_missing_sign_part_drops_branch(frac32):
    rep = compare_weights(frac32, Weight.constant(-2.0, frac32.mesh), Weight.constant(-1.0, frac32.mesh), kmax=3)
    assert [r.k for r in rep.rows] == [-1, -2, -3]
    assert rep.passed


def test_weak_monotonicity_random_pairs(frac32):
    rng = np.random.default_rng(77)
    for _ in range(15):
        w = random_weight(rng, 33)
        bump = np.where(rng.random(33) < 0.3, rng.uniform(0, 0.5, 33), 0.0)
        bump[rng.integers(33)] += 0.1
        rep = compare_weights(frac32, w, Weight(w.cell_values + bump), kmax=8)
        assert rep.worst_gap >= -1e-10


def test_surrogate_bump_on_zero_set_is_not_strict():
    sur = block_surrogate()
    one = Weight.constant(1.0, sur.mesh)
    vals = one.cell_values.copy()
    vals[7] += 1.0
    rep = compare_weights(sur, one, Weight(vals), kmax=1, tau=1e-10)
    assert not rep.rows[0].strict
    assert rep.rows[0].zero_fraction == 1.0


# ------------------------------------------------- equal-eigenvalue edit


def test_construction_positive_branch():
    sur = block_surrogate()
    rho = Weight.constant(1.0, sur.mesh)
    rho_eps, rep = rev_construct(sur, rho, 1, 0.5)
    assert rep.verdict == "PASS"
    assert rep.lam_eps == pytest.approx(rep.lam_rho, rel=1e-10)
    assert np.all(rho_eps.cell_values >= rho.cell_values) and not rho_eps.equals(rho)
    assert rep.index_stable
    # B(rho_eps) e_1 == B(rho) e_1 by direct multiplication
    e = _spectrum(sur, rho).vector(1)
    assert np.max(np.abs(sur.weight_matrix(rho_eps) @ e - sur.weight_matrix(rho) @ e)) <= 1e-14


def test_construction_negative_branch():
    sur = block_surrogate()
    rho = Weight.constant(-1.0, sur.mesh)
    rho_eps, rep = rev_construct(sur, rho, -1, -0.5)
    assert rep.verdict == "PASS"
    assert np.all(rho_eps.cell_values <= rho.cell_values)
    assert rep.lam_eps == pytest.approx(rep.lam_rho, rel=1e-10)


def test_construction_inapplicable_for_fractional(frac32):
    with pytest.raises(ExperimentError, match="construction inapplicable"):
        rev_construct(frac32, Weight.constant(1.0, frac32.mesh), 1, 0.5, 1e-6)


def test_construction_crossing_detected():
    sur = block_surrogate()
    with pytest.raises(ExperimentError, match="smaller"):
        rev_construct(sur, Weight.constant(1.0, sur.mesh), 1, 5.0)


def test_construction_argument_checks():
    sur = block_surrogate()
    rho = Weight.constant(1.0, sur.mesh)
    with pytest.raises(ExperimentError, match="sign"):
        rev_construct(sur, rho, 1, -0.5)
    with pytest.raises(ExperimentError, match="not in the spectrum"):
        rev_construct(sur, rho, -1, -0.5)
    equal = block_surrogate((3, 3), (1.0, 1.0))
    with pytest.raises(ExperimentError, match="degenerate"):
        rev_construct(equal, Weight.constant(1.0, equal.mesh), 1, 0.1)


def test_construction_on_small_kernel_mesh_runs_through_operator():
    # a kernel operator with a mostly-zero weight is still coupled: no zero cells
    op = DiscreteOperator.from_kernel(Kernel.fractional(0.5), Mesh(0.0, 1.0, 8))
    with pytest.raises(ExperimentError, match="inapplicable"):
        rev_construct(op, Weight.constant(1.0, op.mesh), 2, 0.1, 1e-8)
