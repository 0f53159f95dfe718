"""Quotient heteroclinic network of the Rock-Scissors-Paper game.

The symmetry group generated by gamma collapses the nine pure-strategy states
into three nodes:

* ``XI0`` = {(R,P), (S,R), (P,S)}: player X loses,
* ``XI1`` = {(R,S), (S,P), (P,R)}: player X wins,
* ``XI2`` = {(R,R), (S,S), (P,P)}: tie.

Six connections join the nodes and combine into five cycles. Linearisation
data at every node comes in two flavours: the printed eigenvalue table and a
reconciled table that agrees with the Jacobian of the vector field.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy import linalg

from app.dynamics.errors import InvalidContext, NodeNotInCycle, NotAVertex
from app.dynamics.game_core import (
    STRATEGIES,
    GameState,
    PayoffParams,
    all_vertices,
    field_array,
    nash_point,
    payoff_matrices,
)

logger = logging.getLogger(__name__)

JACOBIAN_STEP = 1e-6
# Table eigenvalues are the Jacobian eigenvalues of the field divided by two
TABLE_TIME_SCALE = 0.5


class Node(IntEnum):
    XI0 = 0
    XI1 = 1
    XI2 = 2

    @property
    def label(self) -> str:
        return f"xi{self.value}"

    @property
    def symbol(self) -> str:
        return f"ξ{self.value}"

    @classmethod
    def parse(cls, text) -> Node:
        if isinstance(text, Node):
            return text
        raw = str(text).strip().lower()
        for prefix in ("xi", "ξ"):
            if raw.startswith(prefix):
                raw = raw[len(prefix):]
        try:
            return cls(int(raw))
        except ValueError:
            raise NodeNotInCycle(f"unknown node {text!r}")

    def members(self):
        """Vertex pairs ``(p, q)`` in this node's group orbit, starting at the representative."""
        return [vertex for vertex in _ORBIT_ORDER if node_of_vertex(*vertex) is self]


_ORBIT_ORDER = [(0, 2), (1, 0), (2, 1), (0, 1), (1, 2), (2, 0), (0, 0), (1, 1), (2, 2)]


def node_of_vertex(p: int, q: int) -> Node:
    """Node containing the pure state where X plays ``p`` and Y plays ``q``."""
    return {0: Node.XI2, 1: Node.XI1, 2: Node.XI0}[(q - p) % 3]


def shift_vertex(vertex, power: int):
    p, q = vertex
    return (p + power) % 3, (q + power) % 3


def vertex_label(vertex) -> str:
    return f"({STRATEGIES[vertex[0]]},{STRATEGIES[vertex[1]]})"


@dataclass(frozen=True)
class Connection:
    source: Node
    target: Node
    representative: tuple
    face_p: str
    space_q: str

    @property
    def key(self) -> str:
        return f"{self.source.label}->{self.target.label}"

    def orbit(self):
        """The three vertex-to-vertex edges in this connection's group orbit."""
        start, end = self.representative
        return [(shift_vertex(start, r), shift_vertex(end, r)) for r in range(3)]

    def to_dict(self):
        start, end = self.representative
        return {
            'from': self.source.label,
            'to': self.target.label,
            'representative': [vertex_label(start), vertex_label(end)],
            'face_p': self.face_p,
            'space_q': self.space_q,
        }


CONNECTIONS = {
    (Node.XI0, Node.XI1): Connection(
        Node.XI0, Node.XI1, ((0, 2), (1, 2)), "(x1,x2,0;0,0,1)", "(x1,x2,0;0,0,y3)"),
    (Node.XI1, Node.XI0): Connection(
        Node.XI1, Node.XI0, ((1, 2), (1, 0)), "(0,1,0;y1,0,y3)", "(0,x2,0;y1,0,y3)"),
    (Node.XI1, Node.XI2): Connection(
        Node.XI1, Node.XI2, ((0, 1), (0, 0)), "(1,0,0;y1,y2,0)", "(x1,0,0;y1,y2,0)"),
    (Node.XI2, Node.XI1): Connection(
        Node.XI2, Node.XI1, ((0, 0), (2, 0)), "(x1,0,x3;1,0,0)", "(x1,0,x3;y1,0,0)"),
    (Node.XI0, Node.XI2): Connection(
        Node.XI0, Node.XI2, ((1, 0), (0, 0)), "(x1,x2,0;1,0,0)", "(x1,x2,0;y1,0,0)"),
    (Node.XI2, Node.XI0): Connection(
        Node.XI2, Node.XI0, ((0, 0), (0, 2)), "(1,0,0;y1,0,y3)", "(x1,0,0;y1,0,y3)"),
}


@dataclass(frozen=True)
class Cycle:
    id: str
    nodes: tuple

    @property
    def length(self) -> int:
        return len(self.nodes)

    @property
    def connections(self):
        return tuple(
            CONNECTIONS[(node, self.nodes[(i + 1) % self.length])]
            for i, node in enumerate(self.nodes)
        )

    def require(self, node) -> Node:
        node = Node.parse(node)
        if node not in self.nodes:
            raise NodeNotInCycle(f"{node.label} is not a node of {self.id}")
        return node

    def successor(self, node) -> Node:
        node = self.require(node)
        return self.nodes[(self.nodes.index(node) + 1) % self.length]

    def predecessor(self, node) -> Node:
        node = self.require(node)
        return self.nodes[(self.nodes.index(node) - 1) % self.length]

    def context(self, node):
        """``(incoming, outgoing)`` neighbours of ``node`` along the cycle."""
        return self.predecessor(node), self.successor(node)

    def contains_connection(self, connection: Connection) -> bool:
        return connection in self.connections

    def edges(self):
        """Vertex-to-vertex edges of the network covered by this cycle."""
        return [edge for connection in self.connections for edge in connection.orbit()]

    def vertex_path(self):
        """Lift the quotient cycle to a closed loop of vertices."""
        start = self.connections[0].representative[0]
        path = [start]
        current, index = start, 0
        while True:
            connection = self.connections[index % self.length]
            rep_start, rep_end = connection.representative
            power = (current[0] - rep_start[0]) % 3
            current = shift_vertex(rep_end, power)
            index += 1
            if current == start and index % self.length == 0:
                break
            path.append(current)
        return path

    def to_dict(self):
        return {
            'id': self.id,
            'nodes': [node.label for node in self.nodes],
            'connections': [connection.key for connection in self.connections],
            'vertex_path': [vertex_label(v) for v in self.vertex_path()],
        }


CYCLES = {
    'C0': Cycle('C0', (Node.XI0, Node.XI1)),
    'C1': Cycle('C1', (Node.XI1, Node.XI2)),
    'C2': Cycle('C2', (Node.XI0, Node.XI2)),
    'C3': Cycle('C3', (Node.XI0, Node.XI1, Node.XI2)),
    'C4': Cycle('C4', (Node.XI0, Node.XI2, Node.XI1)),
}


def get_cycle(cycle) -> Cycle:
    if isinstance(cycle, Cycle):
        return cycle
    key = str(cycle).strip().upper()
    if key not in CYCLES:
        raise NodeNotInCycle(f"unknown cycle {cycle!r}; expected one of {', '.join(CYCLES)}")
    return CYCLES[key]


def build_quotient_network():
    """Return ``(nodes, connections, cycles)`` of the quotient network."""
    return list(Node), list(CONNECTIONS.values()), list(CYCLES.values())


def network_edges():
    """All eighteen directed vertex-to-vertex edges of the full network."""
    return [edge for connection in CONNECTIONS.values() for edge in connection.orbit()]


# ---------------------------------------------------------------------------
# Eigenvalue tables
# ---------------------------------------------------------------------------

def _reconciled_rates(params: PayoffParams):
    x, y = params.eps_x, params.eps_y
    expanding = {
        (0, 1): 1.0, (0, 2): (1 + x) / 2,
        (1, 0): 1.0, (1, 2): (1 + y) / 2,
        (2, 0): (1 - y) / 2, (2, 1): (1 - x) / 2,
    }
    contracting = {
        (0, 1): 1.0, (0, 2): (1 - y) / 2,
        (1, 0): 1.0, (1, 2): (1 - x) / 2,
        (2, 0): (1 + x) / 2, (2, 1): (1 + y) / 2,
    }
    return expanding, contracting


def _printed_rates(params: PayoffParams):
    expanding, contracting = _reconciled_rates(params)
    contracting = dict(contracting)
    # printed as "-c10 = 1" and "-c21 = -(1-eps_x)/2"
    contracting[(1, 0)] = -1.0
    contracting[(2, 1)] = (1 - params.eps_x) / 2
    return expanding, contracting


@dataclass(frozen=True)
class LocalEigenData:
    """Linearisation at ``node`` for a passage ``incoming -> node -> outgoing``.

    ``contracting`` is -c_ji and ``expanding`` is e_jk; ``transverse`` holds
    (-c_jl, e_jm) for the remaining directions.
    """

    node: Node
    context: tuple
    contracting: float
    expanding: float
    transverse: tuple

    def exponents(self):
        """``(c/e, c_t/e, e_t/e)`` as used by the local map."""
        c = -self.contracting
        e = self.expanding
        c_t = -self.transverse[0]
        e_t = self.transverse[1]
        return c / e, c_t / e, e_t / e

    def to_dict(self):
        return {
            'node': self.node.label,
            'context': [n.label for n in self.context],
            'contracting': self.contracting,
            'expanding': self.expanding,
            'transverse': list(self.transverse),
        }


def local_eigen(node, context, params: PayoffParams, printed: bool = False) -> LocalEigenData:
    node = Node.parse(node)
    incoming, outgoing = (Node.parse(n) for n in context)
    if incoming == node or outgoing == node:
        raise InvalidContext(
            f"context ({incoming.label}, {outgoing.label}) passes through {node.label} itself"
        )
    if incoming == outgoing:
        l_node = m_node = next(n for n in Node if n not in (node, incoming))
    else:
        l_node, m_node = outgoing, incoming

    expanding, contracting = (_printed_rates if printed else _reconciled_rates)(params)
    j = int(node)
    return LocalEigenData(
        node=node,
        context=(incoming, outgoing),
        contracting=-contracting[(j, int(incoming))],
        expanding=expanding[(j, int(outgoing))],
        transverse=(-contracting[(j, int(l_node))], expanding[(j, int(m_node))]),
    )


def eigen_table(params: PayoffParams, printed: bool = False):
    """Per node: ``{'expanding': {k: e_jk}, 'contracting': {i: -c_ji}}``."""
    expanding, contracting = (_printed_rates if printed else _reconciled_rates)(params)
    table = {}
    for node in Node:
        j = int(node)
        table[node.label] = {
            'expanding': {Node(k).label: v for (a, k), v in expanding.items() if a == j},
            'contracting': {Node(i).label: -v for (a, i), v in contracting.items() if a == j},
        }
    return table


def eigen_table_discrepancies(params: PayoffParams):
    """Entries where the printed table differs from the Jacobian-consistent one."""
    _, printed = _printed_rates(params)
    _, reconciled = _reconciled_rates(params)
    rows = []
    for key in sorted(printed):
        if printed[key] != reconciled[key]:
            j, i = key
            rows.append({
                'node': Node(j).label,
                'entry': f"-c{j}{i}",
                'printed': -printed[key],
                'reconciled': -reconciled[key],
            })
    return rows


# ---------------------------------------------------------------------------
# Jacobian at equilibria
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class JacobianEigen:
    eigenvalues: np.ndarray
    tangent: np.ndarray

    def normal(self):
        """Eigenvalues of the full Jacobian not matched by a tangent eigenvalue."""
        remaining = list(self.eigenvalues)
        for value in self.tangent:
            index = int(np.argmin([abs(value - r) for r in remaining]))
            remaining.pop(index)
        return np.array(remaining)


def _tangent_basis() -> np.ndarray:
    constraints = np.array([[1.0, 1.0, 1.0, 0.0, 0.0, 0.0], [0.0, 0.0, 0.0, 1.0, 1.0, 1.0]])
    return linalg.null_space(constraints)


def _is_equilibrium_input(state: GameState) -> bool:
    if state.pure_strategies() is not None:
        return True
    return bool(np.allclose(state.as_array(), nash_point().as_array(), rtol=0.0, atol=1e-12))


def jacobian(state: GameState, params: PayoffParams, step: float = JACOBIAN_STEP) -> np.ndarray:
    """Central-difference Jacobian of the replicator field in the ambient 6-space."""
    pair = payoff_matrices(params)
    z = state.as_array()
    offsets = np.eye(6) * step
    forward = field_array(z + offsets, pair)
    backward = field_array(z - offsets, pair)
    return ((forward - backward) / (2.0 * step)).T


def jacobian_eigen_at_vertex(state: GameState, params: PayoffParams,
                             time_scale: float = TABLE_TIME_SCALE) -> JacobianEigen:
    """Eigenvalues of the linearisation at a vertex (or the Nash point).

    Values are multiplied by ``time_scale``; the default puts them in the time
    units of the eigenvalue table.
    """
    if not _is_equilibrium_input(state):
        raise NotAVertex(f"{state.label()} is neither a pure-strategy state nor the Nash point")
    jac = jacobian(state, params) * time_scale
    basis = _tangent_basis()
    tangent = np.linalg.eigvals(basis.T @ jac @ basis)
    full = np.linalg.eigvals(jac)
    logger.debug("Jacobian eigenvalues at %s: tangent=%s", state.label(), tangent)
    return JacobianEigen(eigenvalues=full, tangent=tangent)


def representative_state(node) -> GameState:
    node = Node.parse(node)
    return GameState.vertex(*node.members()[0])


def vertex_states():
    """All nine pure states as a (9, 6) array, with their node indices."""
    vertices = all_vertices()
    states = np.array([GameState.vertex(p, q).as_array() for p, q in vertices])
    nodes = np.array([int(node_of_vertex(p, q)) for p, q in vertices])
    return states, nodes
