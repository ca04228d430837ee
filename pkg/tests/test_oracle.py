import numpy as np
import pytest

from quarter_green.exceptions import NonConvergenceError
from quarter_green.oracle import (
    CACHE_ENV,
    SimulationConfig,
    TruncationConfig,
    absorption_from_grid,
    absorption_truncated,
    functional_equation_residual,
    green_truncated,
    green_truncated_many,
    nested_dissection_order,
    simulate,
    transition_matrix,
)
from quarter_green.walk_model import SU3, cartesian_kernel

SU3_11 = 1.0479691190621598


@pytest.fixture(scope="module")
def su3_grid():
    return green_truncated(SU3, 1, 1, TruncationConfig(N=200))


def test_transition_rows_are_substochastic():
    P = transition_matrix(SU3, 30)
    rows = np.asarray(P.sum(axis=1)).ravel()
    assert np.all(rows <= 1 + 1e-15)
    assert np.all(P.data >= 0)
    # interior rows keep all their mass
    assert rows[(10 - 1) * 30 + (10 - 1)] == pytest.approx(1.0)
    assert rows[0] == pytest.approx(1 / 3)


def test_nested_dissection_is_a_permutation():
    for N in (16, 37, 100):
        order = nested_dissection_order(N)
        assert np.array_equal(np.sort(order), np.arange(N * N))


def test_box_size_validation():
    with pytest.raises(ValueError):
        TruncationConfig(N=8)
    with pytest.raises(ValueError):
        green_truncated(SU3, 50, 1, TruncationConfig(N=20))


def test_values_increase_with_box(su3_grid):
    small = green_truncated(SU3, 1, 1, TruncationConfig(N=50))
    assert np.all(su3_grid.values[:50, :50] >= small.values - 1e-13)
    assert su3_grid[1, 1] == pytest.approx(SU3_11, rel=1e-8)
    assert small[1, 1] < su3_grid[1, 1]


def test_extrapolated_grid_reports_change():
    grid = green_truncated(SU3, 1, 1, TruncationConfig(N=40, extrapolate=True))
    assert grid.meta["refined_N"] == 80
    assert grid.meta["monotone"]
    est = grid.estimate(1, 1)
    assert est.abs_error > 0
    assert abs(est.value - SU3_11) < est.abs_error
    assert est.meta["N"] == 40


def test_absorption_mass_defect(su3_grid):
    ab = absorption_from_grid(SU3, su3_grid)
    assert 0 < 1 - ab.total < 1e-5
    assert ab.horizontal[0] == pytest.approx(SU3[0, -1] * su3_grid[1, 1] + SU3[-1, -1] * su3_grid[2, 1])


def test_symmetric_kernel_absorption_is_symmetric():
    ab = absorption_truncated(cartesian_kernel(1 / 6), 3, 3, TruncationConfig(N=60))
    assert np.allclose(ab.horizontal, ab.vertical, rtol=1e-10, atol=1e-15)


def test_functional_equation_at_origin_is_exact(su3_grid):
    # at (0, 0) only G(1, 1), the corner absorption and the start monomial survive
    assert abs(functional_equation_residual(SU3, 1, 1, 0.0, 0.0, grid=su3_grid)) < 1e-15


def test_functional_equation_inside_polydisc(su3_grid):
    assert abs(functional_equation_residual(SU3, 1, 1, 0.5, 0.4, grid=su3_grid)) < 1e-10
    assert abs(functional_equation_residual(SU3, 1, 1, 0.3 + 0.4j, -0.2j, grid=su3_grid)) < 1e-10
    with pytest.raises(ValueError):
        functional_equation_residual(SU3, 1, 1, 1.2, 0.0, grid=su3_grid)


def test_refinement_budget_is_enforced():
    with pytest.raises(NonConvergenceError):
        green_truncated(SU3, 1, 1, TruncationConfig(N=20, solver_tol=0.0, max_refinements=1))


def test_disk_cache_round_trip(tmp_path, monkeypatch):
    monkeypatch.setenv(CACHE_ENV, str(tmp_path))
    first = green_truncated_many(SU3, [(1, 1), (2, 2)], TruncationConfig(N=30))
    assert len(list(tmp_path.glob("*.npy"))) == 2
    second = green_truncated_many(SU3, [(2, 2)], TruncationConfig(N=30))
    assert np.array_equal(first[(2, 2)].values, second[(2, 2)].values)


def test_simulation_agrees_with_oracle(su3_grid):
    targets = [(1, 1), (2, 1), (3, 2)]
    sim = simulate(SU3, 1, 1, SimulationConfig(paths=4000, step_cap=20000, seed=3), targets)
    for t, mean, se in zip(targets, sim.visits, sim.visits_se):
        assert abs(mean - su3_grid[t]) <= 4 * se + 1e-3
    ab = absorption_from_grid(SU3, su3_grid)
    p, se = sim.absorption_horizontal(1)
    assert abs(p - ab.horizontal[0]) <= 4 * se


def test_simulation_is_seed_deterministic():
    cfg = SimulationConfig(paths=300, step_cap=2000, seed=42)
    a = simulate(SU3, 2, 2, cfg, [(2, 2)])
    b = simulate(SU3, 2, 2, cfg, [(2, 2)])
    assert np.array_equal(a.visits, b.visits)
    assert a.horizontal_hits == b.horizontal_hits
    assert a.truncated_paths == b.truncated_paths
