import numpy as np
import pytest

from kinetic.dynamics.meanfield import (
    DEFAULT_PANEL,
    MeanFieldRow,
    is_strictly_decreasing,
    meanfield_experiment,
    median_errors,
    replica_seeds,
    sample_from_grid,
)
from kinetic.dynamics.nbody import free_streaming
from kinetic.dynamics.potentials import Potential
from kinetic.dynamics.vlasov import maxwellian_grid, shear
from kinetic.errors import ArityError, ConfigError
from kinetic.polyparse import parse_polynomial
from kinetic.states import GridState1D, iota_EM


def test_sampling_is_deterministic():
    grid = maxwellian_grid(10.0, 8.0, 32, 32, 5.0, 1.0)
    a = sample_from_grid(grid, 50, 7).as_arrays()
    b = sample_from_grid(grid, 50, 7).as_arrays()
    c = sample_from_grid(grid, 50, 8).as_arrays()
    np.testing.assert_array_equal(a[0], b[0])
    np.testing.assert_array_equal(a[1], b[1])
    assert not np.array_equal(a[0], c[0])


def test_samples_stay_in_occupied_cells():
    values = np.zeros((4, 4))
    values[1, 2] = 1.0
    grid = GridState1D(4.0, 2.0, values)
    x, v = sample_from_grid(grid, 200, 3).as_arrays()
    assert np.all((1.0 <= x) & (x < 2.0))
    assert np.all((0.0 <= v) & (v < 1.0))


def test_sampling_frequencies_follow_cell_masses():
    values = np.zeros((2, 2))
    values[0, 0], values[1, 1] = 0.25, 0.75
    grid = GridState1D(2.0, 1.0, values)
    n = 4000
    x, _ = sample_from_grid(grid, n, 11).as_arrays()
    hits = int(np.sum(x < 1.0))
    sigma = np.sqrt(n * 0.25 * 0.75)
    assert abs(hits - 0.25 * n) < 4 * sigma


def test_sampling_rejects_bad_input():
    grid = maxwellian_grid(10.0, 8.0, 16, 16, 5.0, 1.0)
    with pytest.raises(ArityError):
        sample_from_grid(grid, 0, 1)
    with pytest.raises(ConfigError):
        sample_from_grid(grid.with_values(2 * grid.values), 10, 1)


def test_replica_seeds():
    seeds = replica_seeds(42, 5)
    assert seeds == replica_seeds(42, 5)
    assert len(set(seeds)) == 5
    assert replica_seeds(42, 3) == seeds[:3]


def test_median_errors_and_trend():
    rows = [
        MeanFieldRow(10, 1, "x", 0.0, 0.0, 0.4),
        MeanFieldRow(10, 1, "v", 0.0, 0.0, 0.2),
        MeanFieldRow(10, 2, "x", 0.0, 0.0, 0.1),
        MeanFieldRow(10, 2, "v", 0.0, 0.0, 0.1),
        MeanFieldRow(100, 1, "x", 0.0, 0.0, 0.05),
        MeanFieldRow(100, 1, "v", 0.0, 0.0, 0.05),
    ]
    med = median_errors(rows)
    assert med == {10: pytest.approx(0.2), 100: pytest.approx(0.05)}
    assert is_strictly_decreasing(list(med.values()))
    assert not is_strictly_decreasing([0.3, 0.3])


def test_small_experiment_table():
    grid = maxwellian_grid(10.0, 8.0, 32, 32, 5.0, 1.0)
    rows = meanfield_experiment(grid, Potential.gaussian(1.0, 1.0), [4, 16], T=0.1, dt=0.01, seed=3, replicas=2)
    assert len(rows) == 2 * 2 * len(DEFAULT_PANEL)
    assert {r.N for r in rows} == {4, 16}
    assert all(r.abs_error == pytest.approx(abs(r.empirical_value - r.grid_value)) for r in rows)
    again = meanfield_experiment(grid, Potential.gaussian(1.0, 1.0), [4, 16], T=0.1, dt=0.01, seed=3, replicas=2)
    assert rows == again


@pytest.mark.slow
def test_error_shrinks_with_N():
    grid = maxwellian_grid(10.0, 8.0, 32, 32, 5.0, 1.0)
    rows = meanfield_experiment(grid, Potential.gaussian(1.0, 1.0), [64, 256, 1024], T=0.5, dt=0.01, seed=1, replicas=20)
    assert {r.seed for r in rows if r.N == 1024} == set(replica_seeds(1, 20))
    assert is_strictly_decreasing(list(median_errors(rows).values()))


def test_free_streaming_control():
    grid = maxwellian_grid(10.0, 8.0, 64, 64, 5.0, 1.0, drift=0.3)
    N, T = 1024, 0.5
    rows = meanfield_experiment(grid, Potential.zero(1), [N], T=T, dt=0.05, seed=2, replicas=3)
    exact = shear(grid, T)
    for seed in {r.seed for r in rows}:
        emp = iota_EM(free_streaming(sample_from_grid(grid, N, seed), T))
        for r in (r for r in rows if r.seed == seed):
            f = parse_polynomial(r.observable, 1, 1)
            assert r.empirical_value == pytest.approx(float(emp.pair(f)), abs=1e-9)
            sd = np.sqrt(max(float(emp.pair(f * f)) - float(emp.pair(f)) ** 2, 0.0))
            assert abs(r.empirical_value - float(exact.pair(f))) <= 5 * sd / np.sqrt(N) + 0.01
