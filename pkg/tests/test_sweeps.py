"""Tests for the region sweep over tie payoffs."""

import numpy as np
import pytest
from scipy.spatial import cKDTree

from app.dynamics.errors import InvalidParams
from app.dynamics.game_core import PayoffParams
from app.dynamics.stability import b1, b2, curve_a, curve_b, curve_c, curve_d
from app.dynamics.sweeps import CYCLE_IDS, grid_values, run_region_sweep


@pytest.mark.unit
def test_grid_values_are_cell_centres():
    values = grid_values(11)
    assert len(values) == 11
    assert values[0] == pytest.approx(-1 + 1 / 11)
    assert values[5] == pytest.approx(0.0, abs=1e-15)
    assert np.all((values > -1) & (values < 1))


@pytest.mark.unit
def test_resolution_lower_bound():
    with pytest.raises(InvalidParams):
        run_region_sweep(5)


@pytest.mark.integration
def test_region_sweep_labels():
    grid = run_region_sweep(21)
    assert grid.resolution == 21
    assert set(grid.cells) == set(CYCLE_IDS)
    # zero-sum diagonal is a stability boundary for every cycle
    for i in range(21):
        assert grid.label('C0', i, 20 - i) == 'Boundary'
    assert grid.label_at('C0', -0.3, -0.3) == 'EAS'
    assert grid.label_at('C0', 0.5, 0.3) == 'NonAttractor'
    assert grid.label_at('C2', 0.9, 0.5) == 'FAS'
    assert grid.label_at('C1', 0.5, 0.9) == 'FAS'
    assert set(label for row in grid.cells['C3'] for label in row) <= {'CU', 'Boundary'}
    assert set(label for row in grid.cells['C4'] for label in row) <= {'CU', 'Boundary'}


@pytest.mark.integration
def test_region_sweep_rows_and_counts():
    grid = run_region_sweep(11)
    rows = list(grid.rows())
    assert len(rows) == 121
    assert len(rows[0]) == 2 + len(CYCLE_IDS)
    counts = grid.counts()
    assert sum(counts['C0'].values()) == 121
    assert counts['C0']['Boundary'] >= 11


@pytest.mark.slow
@pytest.mark.integration
def test_region_sweep_in_process_pool():
    serial = run_region_sweep(11)
    parallel = run_region_sweep(11, workers=2)
    assert parallel.cells == serial.cells


# ============================================================================
# Region Boundaries at Full Resolution
# ============================================================================

def _curve_points(*curves):
    t = np.linspace(-1.0, 1.0, 4001)
    return np.vstack([np.column_stack([t, [curve(x) for x in t]]) for curve in curves])


def _label_changes(grid, cycle_id):
    """Midpoints between neighbouring cells whose labels differ."""
    values = grid.eps_values
    cells = grid.cells[cycle_id]
    midpoints = []
    for i in range(grid.resolution):
        for j in range(grid.resolution):
            if j + 1 < grid.resolution and cells[i][j] != cells[i][j + 1]:
                midpoints.append((values[i], (values[j] + values[j + 1]) / 2))
            if i + 1 < grid.resolution and cells[i][j] != cells[i + 1][j]:
                midpoints.append(((values[i] + values[i + 1]) / 2, values[j]))
    return np.array(midpoints)


@pytest.fixture(scope='module')
def fine_grid():
    return run_region_sweep(201)


@pytest.mark.slow
@pytest.mark.integration
@pytest.mark.parametrize('cycle_id, curves', [
    ('C0', (curve_a,)),
    ('C1', (curve_a, curve_b, curve_d)),
    ('C2', (curve_a, curve_b, curve_c)),
])
def test_label_changes_follow_region_curves(fine_grid, cycle_id, curves):
    changes = _label_changes(fine_grid, cycle_id)
    assert len(changes) > 0
    distances, _ = cKDTree(_curve_points(*curves)).query(changes)
    cell = 2.0 / fine_grid.resolution
    assert np.all(distances <= cell), changes[distances > cell]


@pytest.mark.slow
@pytest.mark.integration
def test_labels_match_sign_conditions(fine_grid):
    for eps_x, eps_y, c0, c1, c2, _, _ in fine_grid.rows():
        params = PayoffParams(eps_x, eps_y)
        s, d = eps_x + eps_y, eps_x - eps_y
        if c0 != 'Boundary':
            assert c0 == ('EAS' if s < 0 else 'NonAttractor')
        if c1 != 'Boundary':
            assert c1 == ('FAS' if s > 0 and d < 0 and b1(params) > 0 else 'CU')
        if c2 != 'Boundary':
            assert c2 == ('FAS' if s > 0 and d > 0 and b2(params) > 0 else 'CU')
