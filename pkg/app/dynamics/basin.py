"""Monte Carlo estimate of how much of a cycle's neighbourhood it attracts.

Initial states are drawn close to the connections of the cycle and integrated
together as one batch. A sample counts as converged when its itinerary keeps
to the cycle's node order while the entry distance to the cycle shrinks:

* a window of at least ``PATTERN_TRANSITIONS`` consecutive pattern-following
  transitions whose last visit starts closer to the cycle than its first; or
* at the horizon, a pattern-following run of at least ``m + 2`` visits
  (``m`` nodes in the cycle) that is still inside an unfinished visit, with
  residence times growing at every node and the entry distance shrinking.
  Residence times grow geometrically near an attracting cycle, so the
  first rule can be out of reach within any practical horizon.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field

import numpy as np

from app.dynamics.errors import InvalidParams
from app.dynamics.flow import (
    DEFAULT_NEAR_THRESHOLD,
    MIN_VISIT_STEPS,
    VisitRecorder,
    advance,
    cycle_segments,
    distance_to_segments,
    nearest_node_labels,
)
from app.dynamics.game_core import PayoffParams, apply_gamma, payoff_matrices
from app.dynamics.network import Cycle, get_cycle

logger = logging.getLogger(__name__)

PATTERN_TRANSITIONS = 8
DEFAULT_DT = 1e-2
DEFAULT_HORIZON = 500.0
DEFAULT_SEED = 42
MAX_DELTA = 0.2
MIN_SAMPLES = 100


@dataclass(frozen=True)
class BasinEstimate:
    cycle: str
    params: PayoffParams
    delta: float
    samples: int
    horizon: float
    seed: int
    converged: int
    rejected: int = 0
    dt: float = DEFAULT_DT
    itineraries: tuple = field(default=(), repr=False, compare=False)

    @property
    def fraction(self) -> float:
        return self.converged / self.samples

    def to_dict(self):
        return {
            'cycle': self.cycle,
            'eps_x': self.params.eps_x,
            'eps_y': self.params.eps_y,
            'delta': self.delta,
            'samples': self.samples,
            'horizon': self.horizon,
            'dt': self.dt,
            'seed': self.seed,
            'converged': self.converged,
            'rejected': self.rejected,
            'fraction': self.fraction,
        }


def sample_generator(seed: int, index: int) -> np.random.Generator:
    """Independent counter-based stream for sample ``index``."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(index,))))


def seed_state(cycle: Cycle, rng: np.random.Generator, delta: float) -> np.ndarray:
    """Random state within ``delta`` of a random connection of ``cycle``.

    A point is placed on the middle part of the connection's representative
    edge, pushed off the edge into all three zero coordinates, and moved to a
    random member of the group orbit.
    """
    connection = cycle.connections[int(rng.integers(cycle.length))]
    power = int(rng.integers(3))
    s = rng.uniform(0.2, 0.8)
    offsets = rng.uniform(0.0, delta / 3.0, size=3)
    (p0, q0), (p1, q1) = connection.representative

    moving, fixed = np.zeros(3), np.zeros(3)
    if q0 == q1:
        a, b, pure = p0, p1, q0
    else:
        a, b, pure = q0, q1, p0
    moving[a], moving[b] = 1.0 - s, s
    moving *= 1.0 - offsets[0]
    moving[3 - a - b] = offsets[0]
    others = [k for k in range(3) if k != pure]
    fixed[pure] = 1.0 - offsets[1] - offsets[2]
    fixed[others[0]], fixed[others[1]] = offsets[1], offsets[2]

    state = np.concatenate([moving, fixed]) if q0 == q1 else np.concatenate([fixed, moving])
    return apply_gamma(state, power)


def _successors(cycle: Cycle) -> dict:
    return {int(node): int(cycle.successor(node)) for node in cycle.nodes}


def _trailing_run(visits, successors):
    """Longest suffix of ``visits`` that follows the cycle's node order."""
    if not visits or int(visits[-1].node) not in successors:
        return []
    start = len(visits) - 1
    while start > 0:
        previous = int(visits[start - 1].node)
        if successors.get(previous) != int(visits[start].node):
            break
        start -= 1
    return visits[start:]


def window_converged(visits, successors) -> bool:
    run = _trailing_run(visits, successors)
    if len(run) < PATTERN_TRANSITIONS + 1:
        return False
    window = run[-(PATTERN_TRANSITIONS + 1):]
    return window[-1].entry_distance < window[0].entry_distance


def slowing_converged(itinerary, successors, cycle_length: int) -> bool:
    if itinerary.open_visit is None:
        return False
    run = _trailing_run(list(itinerary.visits) + [itinerary.open_visit], successors)
    if len(run) < cycle_length + 2:
        return False
    closed = run[:-1]
    growing = all(
        closed[i + cycle_length].residence > closed[i].residence
        for i in range(len(closed) - cycle_length)
    )
    return growing and run[-1].entry_distance < run[0].entry_distance


def estimate_basin_fraction(cycle, params: PayoffParams, delta: float = 0.05, samples: int = 500,
                            horizon: float = DEFAULT_HORIZON, seed: int = DEFAULT_SEED,
                            dt: float = DEFAULT_DT, near_threshold: float = DEFAULT_NEAR_THRESHOLD,
                            keep_itineraries: bool = False) -> BasinEstimate:
    """Fraction of random near-cycle initial states that converge to ``cycle``."""
    cycle = get_cycle(cycle)
    if not 0.0 < delta < MAX_DELTA:
        raise InvalidParams(f"delta must lie in (0, {MAX_DELTA}), got {delta}")
    if samples < MIN_SAMPLES:
        raise InvalidParams(f"at least {MIN_SAMPLES} samples are required, got {samples}")
    if not horizon > 0 or not dt > 0:
        raise InvalidParams("horizon and dt must be positive")

    started = time.perf_counter()
    pair = payoff_matrices(params)
    segments = cycle_segments(cycle)
    successors = _successors(cycle)

    z = np.array([seed_state(cycle, sample_generator(seed, n), delta) for n in range(samples)])
    labels = nearest_node_labels(z, near_threshold)
    recorders = [VisitRecorder(MIN_VISIT_STEPS * dt) for _ in range(samples)]
    for n in np.flatnonzero(labels >= 0):
        recorders[n].observe(labels[n], 0.0, float(distance_to_segments(z[n], segments)))

    active = np.ones(samples, dtype=bool)
    rejected = np.zeros(samples, dtype=bool)
    converged = np.zeros(samples, dtype=bool)
    stop_time = np.full(samples, np.nan)
    steps = int(np.ceil(horizon / dt - 1e-9))

    for k in range(1, steps + 1):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        t = k * dt
        stepped, _, bad = advance(z[idx], pair, dt)
        if np.any(bad):
            rejected[idx[bad]] = True
            active[idx[bad]] = False
            stop_time[idx[bad]] = t
        good = idx[~bad]
        z[good] = stepped[~bad]

        new_labels = nearest_node_labels(z[good], near_threshold)
        changed = good[new_labels != labels[good]]
        labels[good] = new_labels
        for n in changed:
            label = int(labels[n])
            distance = float(distance_to_segments(z[n], segments)) if label >= 0 else None
            recorder = recorders[n]
            before = (len(recorder.visits), recorder.visits[-1] if recorder.visits else None)
            recorder.observe(label, t, distance)
            after = (len(recorder.visits), recorder.visits[-1] if recorder.visits else None)
            if after != before and window_converged(recorder.visits, successors):
                converged[n] = True
                active[n] = False
                stop_time[n] = t

    end_time = steps * dt
    itineraries = []
    for n in range(samples):
        itinerary = recorders[n].finish(end_time if np.isnan(stop_time[n]) else float(stop_time[n]))
        if not converged[n] and not rejected[n] and slowing_converged(itinerary, successors, cycle.length):
            converged[n] = True
        if keep_itineraries:
            itineraries.append((bool(converged[n]), itinerary))

    if np.any(rejected):
        logger.warning("%d of %d basin samples left the state space (dt=%s)", int(rejected.sum()), samples, dt)
    logger.info(
        "Basin estimate for %s at (%s, %s): %d/%d converged in %.1fs",
        cycle.id, params.eps_x, params.eps_y, int(converged.sum()), samples, time.perf_counter() - started,
    )
    return BasinEstimate(
        cycle=cycle.id,
        params=params,
        delta=delta,
        samples=samples,
        horizon=horizon,
        seed=seed,
        converged=int(converged.sum()),
        rejected=int(rejected.sum()),
        dt=dt,
        itineraries=tuple(itineraries),
    )
