"""Classification of every cycle over a grid of tie payoffs."""
from __future__ import annotations

import logging
import multiprocessing as mp
import time
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from app.dynamics.errors import InvalidParams
from app.dynamics.game_core import PayoffParams
from app.dynamics.network import CYCLES
from app.dynamics.stability import BOUNDARY_BAND, classify

logger = logging.getLogger(__name__)

MIN_RESOLUTION = 11
CYCLE_IDS = tuple(CYCLES)


def grid_values(resolution: int) -> np.ndarray:
    """Cell centres of a uniform partition of (-1, 1); odd resolutions include 0."""
    k = np.arange(resolution)
    return -1.0 + (k + 0.5) * (2.0 / resolution)


def _classify_row(task):
    eps_x, eps_values, band = task
    row = []
    for eps_y in eps_values:
        params = PayoffParams(eps_x, eps_y)
        row.append(tuple(classify(cycle_id, params, band).classification.value for cycle_id in CYCLE_IDS))
    return row


@dataclass
class RegionGrid:
    resolution: int
    eps_values: np.ndarray
    # cycle id -> resolution x resolution labels, indexed [eps_x index][eps_y index]
    cells: dict = field(repr=False)

    def label(self, cycle_id: str, i: int, j: int) -> str:
        return self.cells[cycle_id][i][j]

    def nearest_index(self, value: float) -> int:
        return int(np.argmin(np.abs(self.eps_values - value)))

    def label_at(self, cycle_id: str, eps_x: float, eps_y: float) -> str:
        return self.label(cycle_id, self.nearest_index(eps_x), self.nearest_index(eps_y))

    def rows(self):
        for i, eps_x in enumerate(self.eps_values):
            for j, eps_y in enumerate(self.eps_values):
                yield (float(eps_x), float(eps_y)) + tuple(self.cells[c][i][j] for c in CYCLE_IDS)

    def counts(self) -> dict:
        return {
            cycle_id: dict(Counter(label for row in self.cells[cycle_id] for label in row))
            for cycle_id in CYCLE_IDS
        }


def run_region_sweep(resolution: int = 201, band: float = BOUNDARY_BAND, workers: int = 1) -> RegionGrid:
    """Classify C0-C4 at every cell centre of a ``resolution`` x ``resolution`` grid.

    Rows are computed in a process pool when ``workers > 1``; results are
    assembled in row order either way.
    """
    if resolution < MIN_RESOLUTION:
        raise InvalidParams(f"resolution must be at least {MIN_RESOLUTION}, got {resolution}")
    values = grid_values(resolution)
    tasks = [(float(eps_x), values, band) for eps_x in values]
    started = time.perf_counter()
    if workers > 1:
        with mp.Pool(workers) as pool:
            rows = pool.map(_classify_row, tasks)
    else:
        rows = [_classify_row(task) for task in tasks]
    logger.info(
        "Region sweep of %d cells finished in %.2fs (workers=%d)",
        resolution * resolution, time.perf_counter() - started, workers,
    )
    cells = {
        cycle_id: [[row[j][c] for j in range(resolution)] for row in rows]
        for c, cycle_id in enumerate(CYCLE_IDS)
    }
    return RegionGrid(resolution=resolution, eps_values=values, cells=cells)
