"""Fixed-step integration of the replicator flow and symbolic itineraries.

States are handled as ``(..., 6)`` arrays internally; :class:`GameState`
objects are only built at the public boundary.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np

from app.dynamics.errors import InvalidParams, StepRejected
from app.dynamics.game_core import GameState, PayoffParams, field_array, payoff_matrices
from app.dynamics.network import Node, network_edges, vertex_states

logger = logging.getLogger(__name__)

DEFAULT_DT = 1e-3
DEFAULT_NEAR_THRESHOLD = 0.1
REJECT_TOLERANCE = 1e-9
# visits shorter than this many steps are grazing passes
MIN_VISIT_STEPS = 5

_VERTEX_STATES, _VERTEX_NODES = vertex_states()


def _segments(edges) -> np.ndarray:
    """Stack vertex pairs as a (E, 2, 6) array of segment endpoints."""
    out = np.empty((len(edges), 2, 6))
    for i, ((p0, q0), (p1, q1)) in enumerate(edges):
        out[i, 0] = GameState.vertex(p0, q0).as_array()
        out[i, 1] = GameState.vertex(p1, q1).as_array()
    return out


NETWORK_SEGMENTS = _segments(network_edges())


def _check_step(dt):
    if not dt > 0:
        raise InvalidParams(f"time step must be positive, got {dt}")


def advance(z: np.ndarray, pair, dt: float):
    """One classical RK4 step followed by clamp-and-renormalise.

    Returns ``(states, drift, rejected)`` where ``drift`` is the largest
    deviation of a simplex sum from 1 before renormalising and ``rejected``
    marks rows with a coordinate below ``-REJECT_TOLERANCE``.
    """
    k1 = field_array(z, pair)
    k2 = field_array(z + 0.5 * dt * k1, pair)
    k3 = field_array(z + 0.5 * dt * k2, pair)
    k4 = field_array(z + dt * k3, pair)
    raw = z + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)

    rejected = np.min(raw, axis=-1) < -REJECT_TOLERANCE
    clamped = np.where(raw < 0.0, 0.0, raw)
    sx = clamped[..., :3].sum(axis=-1, keepdims=True)
    sy = clamped[..., 3:].sum(axis=-1, keepdims=True)
    drift = float(max(np.max(np.abs(sx - 1.0)), np.max(np.abs(sy - 1.0)))) if raw.size else 0.0
    out = np.concatenate([clamped[..., :3] / sx, clamped[..., 3:] / sy], axis=-1)
    return out, drift, rejected


def rk4_step(z: np.ndarray, pair, dt: float, time: Optional[float] = None) -> np.ndarray:
    out, _, rejected = advance(z, pair, dt)
    if np.any(rejected):
        raise StepRejected(
            f"step of size {dt} left the state space (t={time}); reduce dt", time=time
        )
    return out


@dataclass
class Trajectory:
    """Sampled solution; ``times`` and the rows of ``array`` are aligned."""

    times: np.ndarray
    array: np.ndarray = field(repr=False)
    dt: float
    max_drift: float = 0.0

    def __len__(self):
        return len(self.times)

    @cached_property
    def states(self):
        return [GameState.from_array(row) for row in self.array]

    @property
    def final_state(self) -> GameState:
        return GameState.from_array(self.array[-1])


def integrate(initial: GameState, params: PayoffParams, t_max: float,
              dt: float = DEFAULT_DT, record_every: int = 1) -> Trajectory:
    """Integrate the replicator equations from ``initial`` up to ``t_max``.

    Coordinates that are exactly zero initially stay exactly zero.
    """
    _check_step(dt)
    if not t_max > 0:
        raise InvalidParams(f"t_max must be positive, got {t_max}")
    if record_every < 1:
        raise InvalidParams(f"record_every must be at least 1, got {record_every}")

    pair = payoff_matrices(params)
    steps = int(np.ceil(t_max / dt - 1e-9))
    z = initial.as_array()
    recorded_steps = [0]
    rows = [z]
    max_drift = 0.0
    for k in range(1, steps + 1):
        z, drift, rejected = advance(z, pair, dt)
        if rejected:
            logger.warning("Integration rejected at t=%s with dt=%s", k * dt, dt)
            raise StepRejected(
                f"step of size {dt} left the state space (t={k * dt}); reduce dt", time=k * dt
            )
        max_drift = max(max_drift, drift)
        if k % record_every == 0 or k == steps:
            recorded_steps.append(k)
            rows.append(z)
    times = np.array(recorded_steps, dtype=float) * dt
    return Trajectory(times=times, array=np.array(rows), dt=dt * record_every, max_drift=max_drift)


def integrate_batch(initial: np.ndarray, params: PayoffParams, t_max: float,
                    dt: float = DEFAULT_DT):
    """Integrate many states at once; returns final states and a rejected mask.

    A rejected sample keeps its last accepted state.
    """
    _check_step(dt)
    pair = payoff_matrices(params)
    z = np.array(initial, dtype=float)
    rejected = np.zeros(len(z), dtype=bool)
    steps = int(np.ceil(t_max / dt - 1e-9))
    for _ in range(steps):
        active = ~rejected
        if not np.any(active):
            break
        stepped, _, bad = advance(z[active], pair, dt)
        idx = np.flatnonzero(active)
        rejected[idx[bad]] = True
        z[idx[~bad]] = stepped[~bad]
    return z, rejected


# ---------------------------------------------------------------------------
# Distances
# ---------------------------------------------------------------------------

def distance_to_segments(z: np.ndarray, segments: np.ndarray) -> np.ndarray:
    """Euclidean distance from each state in ``z`` (..., 6) to the nearest segment."""
    z = np.asarray(z, dtype=float)
    start = segments[:, 0]
    direction = segments[:, 1] - start
    rel = z[..., None, :] - start
    s = np.clip(np.sum(rel * direction, axis=-1) / np.sum(direction * direction, axis=-1), 0.0, 1.0)
    nearest = start + s[..., None] * direction
    return np.min(np.linalg.norm(z[..., None, :] - nearest, axis=-1), axis=-1)


def distance_to_network(state: GameState) -> float:
    """Distance to the closure of the heteroclinic network (vertices and connections)."""
    return float(distance_to_segments(state.as_array(), NETWORK_SEGMENTS))


def cycle_segments(cycle) -> np.ndarray:
    return _segments(cycle.edges())


def distance_to_cycle(state: GameState, cycle) -> float:
    return float(distance_to_segments(state.as_array(), cycle_segments(cycle)))


def nearest_node_labels(z: np.ndarray, near_threshold: float) -> np.ndarray:
    """Node index of the closest vertex within ``near_threshold``, else -1."""
    d2 = np.sum((np.asarray(z)[..., None, :] - _VERTEX_STATES) ** 2, axis=-1)
    nearest = np.argmin(d2, axis=-1)
    inside = np.take_along_axis(d2, nearest[..., None], axis=-1)[..., 0] < near_threshold ** 2
    return np.where(inside, _VERTEX_NODES[nearest], -1)


# ---------------------------------------------------------------------------
# Itineraries
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Visit:
    node: Node
    entry: float
    exit: float
    entry_distance: Optional[float] = None

    @property
    def residence(self) -> float:
        return self.exit - self.entry

    def to_row(self):
        return self.node.label, self.entry, self.exit


@dataclass(frozen=True)
class Itinerary:
    """Completed visits in entry order; ``open_visit`` is the one still running."""

    visits: tuple = ()
    open_visit: Optional[Visit] = None

    def labels(self):
        return [visit.node for visit in self.visits]

    def residence_times(self):
        return [visit.residence for visit in self.visits]

    def __len__(self):
        return len(self.visits)


class VisitRecorder:
    """Turns a stream of label changes into visits.

    Visits shorter than ``min_duration`` are dropped; a re-entry into the node
    of the previous visit extends that visit.
    """

    def __init__(self, min_duration: float):
        self.min_duration = min_duration
        self.visits = []
        self.current = None

    def observe(self, label: int, time: float, distance: Optional[float] = None):
        if self.current is not None:
            node, entry, entry_distance = self.current
            if time - entry >= self.min_duration * (1.0 - 1e-9):
                if self.visits and self.visits[-1].node == node:
                    last = self.visits[-1]
                    self.visits[-1] = Visit(node, last.entry, time, last.entry_distance)
                else:
                    self.visits.append(Visit(node, entry, time, entry_distance))
        self.current = (Node(int(label)), time, distance) if label >= 0 else None

    def finish(self, time: float) -> Itinerary:
        open_visit = None
        if self.current is not None:
            node, entry, entry_distance = self.current
            if self.visits and self.visits[-1].node == node:
                last = self.visits.pop()
                open_visit = Visit(node, last.entry, time, last.entry_distance)
            else:
                open_visit = Visit(node, entry, time, entry_distance)
        return Itinerary(tuple(self.visits), open_visit)


def itinerary(traj: Trajectory, near_threshold: float = DEFAULT_NEAR_THRESHOLD) -> Itinerary:
    """Sequence of node visits along a trajectory."""
    if not 0.0 < near_threshold < 0.5:
        raise InvalidParams(f"near_threshold must lie in (0, 0.5), got {near_threshold}")
    labels = nearest_node_labels(traj.array, near_threshold)
    recorder = VisitRecorder(MIN_VISIT_STEPS * traj.dt)
    if len(labels) == 0:
        return Itinerary()

    def entry_distance(i):
        return float(distance_to_segments(traj.array[i], NETWORK_SEGMENTS))

    if labels[0] >= 0:
        recorder.observe(labels[0], float(traj.times[0]), entry_distance(0))
    for i in np.flatnonzero(labels[1:] != labels[:-1]) + 1:
        distance = entry_distance(i) if labels[i] >= 0 else None
        recorder.observe(labels[i], float(traj.times[i]), distance)
    return recorder.finish(float(traj.times[-1]))
