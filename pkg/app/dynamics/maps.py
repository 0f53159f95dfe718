"""Return maps around the cycles of the quotient network.

Near each node the flow is replaced by its linearisation (``local_map``), and
along each connection by a coordinate permutation (``global_map``). In
logarithmic section coordinates their composition is linear; the matrices of
these linear maps are the basic transition matrices, and their products
around a cycle the composite ones.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from app.dynamics.errors import InvalidParams, NodeNotInCycle, OutsideDomain
from app.dynamics.flow import advance
from app.dynamics.game_core import PayoffParams, apply_gamma_inverse, payoff_matrices
from app.dynamics.network import CYCLES, Cycle, LocalEigenData, Node, get_cycle, local_eigen

logger = logging.getLogger(__name__)

INCOMING = "incoming"
OUTGOING = "outgoing"


@dataclass(frozen=True)
class SectionPoint:
    """Point on a cross section: ``(w, z1, z2)`` incoming, ``(v, z1, z2)`` outgoing."""

    kind: str
    coords: tuple

    def __post_init__(self):
        if self.kind not in (INCOMING, OUTGOING):
            raise ValueError(f"section kind must be '{INCOMING}' or '{OUTGOING}', got {self.kind!r}")
        coords = tuple(float(c) for c in self.coords)
        if len(coords) != 3:
            raise ValueError(f"a section point has 3 coordinates, got {len(coords)}")
        if not all(0.0 < c < 1.0 for c in coords):
            raise OutsideDomain("section_bounds", f"section coordinates must lie in (0, 1), got {coords}")
        object.__setattr__(self, "coords", coords)

    @classmethod
    def incoming(cls, w, z1, z2) -> SectionPoint:
        return cls(INCOMING, (w, z1, z2))

    @classmethod
    def outgoing(cls, v, z1, z2) -> SectionPoint:
        return cls(OUTGOING, (v, z1, z2))

    def as_array(self) -> np.ndarray:
        return np.array(self.coords)


@dataclass(frozen=True)
class LogCoords:
    eta: tuple

    def __post_init__(self):
        eta = tuple(float(e) for e in self.eta)
        if len(eta) != 3 or not all(e < 0.0 for e in eta):
            raise OutsideDomain("log_bounds", f"log coordinates must be three negative reals, got {eta}")
        object.__setattr__(self, "eta", eta)

    def as_array(self) -> np.ndarray:
        return np.array(self.eta)


@dataclass(frozen=True)
class TransitionMatrix:
    entries: np.ndarray = field(repr=False)
    cycle: str
    node: Node
    kind: str

    def __matmul__(self, other):
        return self.entries @ (other.entries if isinstance(other, TransitionMatrix) else other)

    def to_dict(self):
        return {
            'cycle': self.cycle,
            'node': self.node.label,
            'kind': self.kind,
            'entries': self.entries.tolist(),
        }


def to_log(point: SectionPoint) -> LogCoords:
    coords = point.as_array()
    if np.any(coords <= 0.0):
        raise OutsideDomain("nonpositive", f"cannot take logarithms of {point.coords}")
    return LogCoords(tuple(np.log(coords)))


def from_log(log: LogCoords, kind: str = INCOMING) -> SectionPoint:
    return SectionPoint(kind, tuple(np.exp(log.as_array())))


# ---------------------------------------------------------------------------
# Local and global maps
# ---------------------------------------------------------------------------

def local_map(eig: LocalEigenData, point: SectionPoint) -> SectionPoint:
    """Linearised passage past a node from its incoming to its outgoing section."""
    if point.kind != INCOMING:
        raise ValueError("local_map expects a point on an incoming section")
    w, z1, z2 = point.coords
    ratio, ratio_t, ratio_e = eig.exponents()
    if not z2 < w ** ratio_e:
        raise OutsideDomain(
            "transverse_escape",
            f"z2={z2!r} is not below w^{ratio_e:.6g}={w ** ratio_e!r} at {eig.node.label}",
        )
    out = (w ** ratio, z1 * w ** ratio_t, z2 * w ** -ratio_e)
    if min(out) <= 0.0:
        raise OutsideDomain("underflow", f"local map underflowed at {eig.node.label}: {out}")
    return SectionPoint.outgoing(*out)


def local_log_matrix(eig: LocalEigenData) -> np.ndarray:
    ratio, ratio_t, ratio_e = eig.exponents()
    return np.array([
        [ratio, 0.0, 0.0],
        [ratio_t, 1.0, 0.0],
        [-ratio_e, 0.0, 1.0],
    ])


# Output incoming coordinates (w', z1', z2') taken from (v, z1, z2) at these
# positions, keyed by the cycle and the node the connection leaves from.
GLOBAL_PERMUTATIONS = {
    ('C0', Node.XI0): (1, 2, 0),
    ('C0', Node.XI1): (1, 2, 0),
    ('C1', Node.XI1): (1, 0, 2),
    ('C1', Node.XI2): (2, 1, 0),
    ('C2', Node.XI0): (1, 0, 2),
    ('C2', Node.XI2): (2, 1, 0),
    ('C3', Node.XI0): (1, 2, 0),
    ('C3', Node.XI1): (2, 1, 0),
    ('C3', Node.XI2): (1, 0, 2),
    ('C4', Node.XI0): (2, 1, 0),
    ('C4', Node.XI2): (1, 0, 2),
    ('C4', Node.XI1): (1, 2, 0),
}

_TWO_CYCLE_OF = {
    frozenset((Node.XI0, Node.XI1)): 'C0',
    frozenset((Node.XI1, Node.XI2)): 'C1',
    frozenset((Node.XI0, Node.XI2)): 'C2',
}


def _permutation(cycle: Cycle, node: Node):
    return GLOBAL_PERMUTATIONS[(cycle.id, cycle.require(node))]


def global_map(connection, point: SectionPoint, cycle=None) -> SectionPoint:
    """Leading-order transfer along a connection: a permutation of coordinates.

    The permutation depends on the cycle the connection is followed in; by
    default the two-node cycle containing the connection is used.
    """
    if point.kind != OUTGOING:
        raise ValueError("global_map expects a point on an outgoing section")
    cycle = get_cycle(cycle or _TWO_CYCLE_OF[frozenset((connection.source, connection.target))])
    if not cycle.contains_connection(connection):
        raise NodeNotInCycle(f"{connection.key} is not a connection of {cycle.id}")
    order = _permutation(cycle, connection.source)
    return SectionPoint.incoming(*(point.coords[i] for i in order))


def node_map(cycle: Cycle, node: Node, params: PayoffParams, point: SectionPoint) -> SectionPoint:
    """Local map at ``node`` followed by the global map to the next node of ``cycle``."""
    node = cycle.require(node)
    eig = local_eigen(node, cycle.context(node), params)
    connection = cycle.connections[cycle.nodes.index(node)]
    return global_map(connection, local_map(eig, point), cycle)


# ---------------------------------------------------------------------------
# Transition matrices
# ---------------------------------------------------------------------------

def _printed_matrices(params: PayoffParams):
    x, y = params.eps_x, params.eps_y
    return {
        ('C0', Node.XI0): [[(1 - y) / 2, 1, 0], [-(1 + x) / 2, 0, 1], [1, 0, 0]],
        ('C0', Node.XI1): [[(1 - x) / 2, 1, 0], [-(1 + y) / 2, 0, 1], [1, 0, 0]],
        ('C1', Node.XI1): [[2 / (1 + y), 1, 0], [(1 - x) / (1 + y), 0, 0], [-2 / (1 + y), 0, 1]],
        ('C1', Node.XI2): [[-(1 - y) / (1 - x), 0, 1], [(1 + x) / (1 - x), 1, 0],
                           [(1 + y) / (1 - x), 0, 0]],
        ('C2', Node.XI0): [[2 / (1 + x), 1, 0], [(1 - y) / (1 + x), 0, 0], [-2 / (1 + x), 0, 1]],
        ('C2', Node.XI2): [[-(1 - x) / (1 - y), 0, 1], [(1 + y) / (1 - y), 1, 0],
                           [(1 + x) / (1 - y), 0, 0]],
        ('C3', Node.XI1): [[-2 / (1 + y), 0, 1], [(1 - x) / (1 + y), 1, 0], [2 / (1 + y), 0, 0]],
        ('C3', Node.XI2): [[(1 + x) / (1 - y), 1, 0], [(1 + y) / (1 - y), 0, 0],
                           [-(1 - x) / (1 - y), 0, 1]],
        ('C3', Node.XI0): [[1, 1, 0], [-(1 + x) / 2, 0, 1], [(1 - y) / 2, 0, 0]],
        ('C4', Node.XI0): [[-2 / (1 + x), 0, 1], [(1 - y) / (1 + x), 1, 0], [2 / (1 + x), 0, 0]],
        ('C4', Node.XI2): [[(1 + y) / (1 - x), 1, 0], [(1 + x) / (1 - x), 0, 0],
                           [-(1 - y) / (1 - x), 0, 1]],
        ('C4', Node.XI1): [[1, 1, 0], [-(1 + y) / 2, 0, 1], [(1 - x) / 2, 0, 0]],
    }


def basic_transition_matrix(cycle, node, params: PayoffParams) -> TransitionMatrix:
    """Matrix of the node-plus-connection map ``g_j`` in log coordinates."""
    cycle = get_cycle(cycle)
    node = cycle.require(node)
    entries = np.array(_printed_matrices(params)[(cycle.id, node)], dtype=float)
    return TransitionMatrix(entries, cycle.id, node, 'basic')


def linearised_basic_matrix(cycle, node, params: PayoffParams) -> TransitionMatrix:
    """The same matrix rebuilt from node eigenvalues and the global permutation."""
    cycle = get_cycle(cycle)
    node = cycle.require(node)
    eig = local_eigen(node, cycle.context(node), params)
    order = _permutation(cycle, node)
    entries = local_log_matrix(eig)[list(order)]
    return TransitionMatrix(entries, cycle.id, node, 'linearised')


def cycle_nodes_from(cycle: Cycle, base: Node):
    start = cycle.nodes.index(base)
    return [cycle.nodes[(start + i) % cycle.length] for i in range(cycle.length)]


def cycle_transition_matrix(cycle, base, params: PayoffParams) -> TransitionMatrix:
    """Composite matrix of the return map to the incoming section at ``base``.

    The basic matrix of ``base`` acts first, followed by those of the nodes
    met along the cycle, so for C0 the result at ξ0 is ``M1 @ M0``. Each
    factor maps the incoming section at its node to the incoming section at
    the next node of ``cycle.nodes``; for C3 (ξ0→ξ1→ξ2) the composite at ξ0
    is therefore ``M2 @ M1 @ M0`` and for C4 (ξ0→ξ2→ξ1) it is ``M1 @ M2 @ M0``.
    """
    cycle = get_cycle(cycle)
    base = cycle.require(base)
    product = np.eye(3)
    for node in cycle_nodes_from(cycle, base):
        product = basic_transition_matrix(cycle, node, params).entries @ product
    return TransitionMatrix(product, cycle.id, base, 'composite')


def partial_products(cycle, base, params: PayoffParams):
    """``[M_base, M_next @ M_base, ..., composite]`` along the cycle."""
    cycle = get_cycle(cycle)
    base = cycle.require(base)
    product = np.eye(3)
    out = []
    for node in cycle_nodes_from(cycle, base):
        product = basic_transition_matrix(cycle, node, params).entries @ product
        out.append(product.copy())
    return out


# ---------------------------------------------------------------------------
# Poincare maps
# ---------------------------------------------------------------------------

_C0_DOMAIN_REASONS = ("z2_bound", "z1_bound")


def poincare_map(cycle, base, params: PayoffParams, point: SectionPoint) -> SectionPoint:
    """First return to the incoming section at ``base`` by composing node maps.

    Raises :class:`OutsideDomain` when the orbit leaves the domain of one of
    the local maps; for C0 the reason is ``z2_bound`` or ``z1_bound`` after
    the inequality that failed.
    """
    cycle = get_cycle(cycle)
    base = cycle.require(base)
    current = point
    for step, node in enumerate(cycle_nodes_from(cycle, base)):
        try:
            current = node_map(cycle, node, params, current)
        except OutsideDomain as exc:
            if exc.reason != "transverse_escape":
                raise
            reason = _C0_DOMAIN_REASONS[step] if cycle.id == 'C0' else f"escape_at_{node.label}"
            raise OutsideDomain(reason, str(exc)) from exc
    return current


def poincare_map_linear(cycle, base, params: PayoffParams, point: SectionPoint) -> SectionPoint:
    """Same return map evaluated as ``exp(M @ log(point))``."""
    matrix = cycle_transition_matrix(cycle, base, params)
    eta = matrix.entries @ to_log(point).as_array()
    return from_log(LogCoords(tuple(eta)))


def printed_c0_return(base, params: PayoffParams, point: SectionPoint) -> SectionPoint:
    """Closed-form return maps of C0 at ξ0 and at ξ1, with their domains."""
    base = CYCLES['C0'].require(base)
    a, b = (params.eps_x, params.eps_y) if base is Node.XI0 else (params.eps_y, params.eps_x)
    w, z1, z2 = point.coords
    if not z2 < w ** ((1 + a) / 2):
        raise OutsideDomain("z2_bound", f"z2={z2!r} must be below w^{(1 + a) / 2:.6g}")
    if not z1 > w ** ((3 + b * b) / (2 * (1 + b))):
        raise OutsideDomain("z1_bound", f"z1={z1!r} must exceed w^{(3 + b * b) / (2 * (1 + b)):.6g}")
    return SectionPoint.incoming(
        z2 * z1 ** ((1 - a) / 2) * w ** ((-1 - 3 * a - b + a * b) / 4),
        z1 ** (-(1 + b) / 2) * w ** ((3 + b * b) / 4),
        z1 * w ** ((1 - b) / 2),
    )


# ---------------------------------------------------------------------------
# Comparison with the flow
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FirstReturn:
    delta: float
    observed: np.ndarray
    predicted: np.ndarray
    time: float

    @property
    def relative_error(self) -> float:
        return float(np.linalg.norm(self.observed - self.predicted) / np.linalg.norm(self.predicted))

    def to_dict(self):
        return {
            'delta': self.delta,
            'observed': self.observed.tolist(),
            'predicted': self.predicted.tolist(),
            'relative_error': self.relative_error,
            'time': self.time,
        }


_RP = np.array([1.0, 0.0, 0.0, 0.0, 0.0, 1.0])


def flow_first_return(params: PayoffParams, delta: float, section_offset: float = 0.05,
                      dt: float = 5e-3, t_max: float = 200.0) -> FirstReturn:
    """Integrate from the incoming section of C0 at (R,P) until the flow
    returns to the symmetric copy of that section, and compare the log
    coordinates of the hit with the composite transition matrix.

    Section coordinates are scaled by ``section_offset``: a point with
    ``w = z1 = z2 = delta`` sits at ``x_S = y_R = x_P = delta * h`` and
    ``y_S = h``.
    """
    h = section_offset
    if not 0.0 < delta < 1.0:
        raise InvalidParams(f"delta must lie in (0, 1), got {delta}")
    dh = delta * h
    z = np.array([1.0 - 2.0 * dh, dh, dh, dh, h, 1.0 - h - dh])
    pair = payoff_matrices(params)
    predicted = cycle_transition_matrix('C0', Node.XI0, params).entries @ np.log([delta] * 3)

    def section_coords(state):
        mapped = apply_gamma_inverse(state)
        return mapped, np.log(mapped[[1, 3, 2]] / h), mapped[4]

    _, prev_eta, prev_v = section_coords(z)
    steps = int(np.ceil(t_max / dt))
    for k in range(1, steps + 1):
        z, _, rejected = advance(z, pair, dt)
        if rejected:
            raise OutsideDomain("integration", f"integration left the state space at t={k * dt}")
        mapped, eta, v = section_coords(z)
        if prev_v > h >= v and np.linalg.norm(mapped - _RP) < 0.5:
            theta = (np.log(prev_v) - np.log(h)) / (np.log(prev_v) - np.log(v))
            observed = (1.0 - theta) * prev_eta + theta * eta
            logger.debug("First return for delta=%s after t=%.4f", delta, (k - 1 + theta) * dt)
            return FirstReturn(delta, observed, predicted, (k - 1 + theta) * dt)
        prev_eta, prev_v = eta, v
    raise OutsideDomain("no_return", f"no return to the section within t={t_max}")
