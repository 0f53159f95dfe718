"""Tests for the quotient network, eigenvalue tables and vertex linearisations."""

import numpy as np
import pytest

from app.dynamics.errors import InvalidContext, NodeNotInCycle, NotAVertex
from app.dynamics.game_core import GameState, PayoffParams, SimplexPoint, nash_point
from app.dynamics.network import (
    CONNECTIONS,
    CYCLES,
    Node,
    build_quotient_network,
    eigen_table,
    eigen_table_discrepancies,
    get_cycle,
    jacobian_eigen_at_vertex,
    local_eigen,
    network_edges,
    node_of_vertex,
    representative_state,
    vertex_label,
)


# ============================================================================
# Quotient Network
# ============================================================================

@pytest.mark.smoke
@pytest.mark.unit
def test_quotient_network_shape():
    nodes, connections, cycles = build_quotient_network()
    assert nodes == [Node.XI0, Node.XI1, Node.XI2]
    assert len(connections) == 6
    assert [c.id for c in cycles] == ['C0', 'C1', 'C2', 'C3', 'C4']
    assert len(network_edges()) == 18


@pytest.mark.unit
def test_node_members():
    assert [vertex_label(v) for v in Node.XI0.members()] == ['(R,P)', '(S,R)', '(P,S)']
    assert sorted(vertex_label(v) for v in Node.XI2.members()) == ['(P,P)', '(R,R)', '(S,S)']
    for node in Node:
        assert all(node_of_vertex(*v) is node for v in node.members())


@pytest.mark.unit
def test_node_parse():
    assert Node.parse('xi1') is Node.XI1
    assert Node.parse('ξ2') is Node.XI2
    assert Node.parse(0) is Node.XI0
    with pytest.raises(NodeNotInCycle):
        Node.parse('xi7')


@pytest.mark.unit
def test_first_connection_row():
    connection = CONNECTIONS[(Node.XI0, Node.XI1)]
    assert [vertex_label(v) for v in connection.representative] == ['(R,P)', '(S,P)']
    assert connection.space_q == '(x1,x2,0;0,0,y3)'
    assert connection.to_dict()['from'] == 'xi0'


@pytest.mark.unit
def test_connection_endpoints_belong_to_nodes():
    for (source, target), connection in CONNECTIONS.items():
        for start, end in connection.orbit():
            assert node_of_vertex(*start) is source
            assert node_of_vertex(*end) is target


@pytest.mark.unit
def test_cycle_node_orders():
    assert CYCLES['C0'].nodes == (Node.XI0, Node.XI1)
    assert CYCLES['C3'].nodes == (Node.XI0, Node.XI1, Node.XI2)
    assert CYCLES['C4'].nodes == (Node.XI0, Node.XI2, Node.XI1)
    assert CYCLES['C3'].successor(Node.XI2) is Node.XI0
    assert CYCLES['C4'].context(Node.XI2) == (Node.XI0, Node.XI1)


@pytest.mark.unit
def test_cycle_lookup():
    assert get_cycle('c2') is CYCLES['C2']
    with pytest.raises(NodeNotInCycle):
        get_cycle('C9')
    with pytest.raises(NodeNotInCycle):
        CYCLES['C0'].require(Node.XI2)


@pytest.mark.unit
def test_vertex_path_closes_and_follows_cycle():
    """The lifted loop of C0 visits six vertices alternating between its nodes."""
    path = CYCLES['C0'].vertex_path()
    assert [vertex_label(v) for v in path] == ['(R,P)', '(S,P)', '(S,R)', '(P,R)', '(P,S)', '(R,S)']
    for cycle in CYCLES.values():
        path = cycle.vertex_path()
        nodes = [node_of_vertex(*v) for v in path]
        assert len(path) % cycle.length == 0
        assert all(nodes[i] is cycle.nodes[i % cycle.length] for i in range(len(path)))


# ============================================================================
# Eigenvalue Tables
# ============================================================================

@pytest.mark.unit
@pytest.mark.numerics
def test_local_eigen_xi0_in_c0():
    eig = local_eigen(Node.XI0, (Node.XI1, Node.XI1), PayoffParams(0.2, -0.4))
    assert eig.contracting == pytest.approx(-1.0)
    assert eig.expanding == pytest.approx(1.0)
    assert eig.transverse == pytest.approx((-0.7, 0.6))
    assert eig.exponents() == pytest.approx((1.0, 0.7, 0.6))


@pytest.mark.unit
@pytest.mark.numerics
def test_printed_xi1_row(zero_sum):
    row = eigen_table(zero_sum, printed=True)['xi1']
    assert row['expanding'] == {'xi0': 1.0, 'xi2': 0.5}
    assert row['contracting'] == {'xi0': 1.0, 'xi2': -0.5}
    assert eigen_table(zero_sum)['xi1']['contracting']['xi0'] == -1.0


@pytest.mark.unit
@pytest.mark.numerics
def test_printed_xi2_row():
    params = PayoffParams(0.5, 0.0)
    row = eigen_table(params, printed=True)['xi2']
    assert row['expanding'] == pytest.approx({'xi0': 0.5, 'xi1': 0.25})
    assert row['contracting'] == pytest.approx({'xi0': -0.75, 'xi1': -0.25})
    assert eigen_table(params)['xi2']['contracting']['xi1'] == pytest.approx(-0.5)


@pytest.mark.unit
def test_discrepancies_list_both_entries():
    rows = eigen_table_discrepancies(PayoffParams(0.5, 0.0))
    assert [row['entry'] for row in rows] == ['-c10', '-c21']


@pytest.mark.unit
def test_local_eigen_rejects_self_context():
    with pytest.raises(InvalidContext):
        local_eigen(Node.XI0, (Node.XI0, Node.XI1), PayoffParams(0.0, 0.0))


@pytest.mark.unit
def test_three_node_context_roles():
    """In C3 the transverse expansion at ξ1 leads back to ξ0."""
    params = PayoffParams(0.1, 0.3)
    eig = local_eigen(Node.XI1, CYCLES['C3'].context(Node.XI1), params)
    assert eig.contracting == pytest.approx(-1.0)
    assert eig.expanding == pytest.approx((1 + 0.3) / 2)
    assert eig.transverse == pytest.approx((-(1 - 0.1) / 2, 1.0))


# ============================================================================
# Linearisation at Vertices
# ============================================================================

@pytest.mark.unit
@pytest.mark.numerics
def test_jacobian_at_rp():
    result = jacobian_eigen_at_vertex(GameState.vertex(0, 2), PayoffParams(0.2, -0.4))
    np.testing.assert_allclose(np.sort(result.tangent.real), [-1.0, -0.7, 0.6, 1.0], atol=1e-6)
    np.testing.assert_allclose(result.tangent.imag, 0.0, atol=1e-9)
    assert len(result.normal()) == 2


@pytest.mark.unit
@pytest.mark.numerics
@pytest.mark.parametrize('eps', [(0.2, -0.4), (-0.55, 0.35), (0.8, 0.1)])
def test_jacobian_matches_reconciled_table(eps):
    """Tangent spectrum at each representative vertex equals the table row."""
    params = PayoffParams(*eps)
    table = eigen_table(params)
    for node in Node:
        row = table[node.label]
        expected = sorted(list(row['expanding'].values()) + list(row['contracting'].values()))
        tangent = jacobian_eigen_at_vertex(representative_state(node), params).tangent
        np.testing.assert_allclose(np.sort(tangent.real), expected, atol=1e-6)


@pytest.mark.unit
@pytest.mark.numerics
def test_jacobian_matches_reconciled_table_on_grid():
    grid = np.linspace(-0.9, 0.9, 21)
    for eps_x in grid:
        for eps_y in grid:
            params = PayoffParams(float(eps_x), float(eps_y))
            table = eigen_table(params)
            for node in Node:
                row = table[node.label]
                expected = sorted(list(row['expanding'].values()) + list(row['contracting'].values()))
                tangent = jacobian_eigen_at_vertex(representative_state(node), params).tangent
                np.testing.assert_allclose(np.sort(tangent.real), expected, atol=1e-6)
                np.testing.assert_allclose(tangent.imag, 0.0, atol=1e-9)


@pytest.mark.unit
@pytest.mark.numerics
def test_jacobian_symmetric_at_rr(zero_sum):
    tangent = jacobian_eigen_at_vertex(GameState.vertex(0, 0), zero_sum).tangent
    np.testing.assert_allclose(np.sort(tangent.real), [-0.5, -0.5, 0.5, 0.5], atol=1e-6)


@pytest.mark.unit
@pytest.mark.numerics
def test_jacobian_at_nash_is_a_center(zero_sum):
    tangent = jacobian_eigen_at_vertex(nash_point(), zero_sum).tangent
    np.testing.assert_allclose(tangent.real, 0.0, atol=1e-6)
    np.testing.assert_allclose(np.sort(np.abs(tangent.imag)), [0.5 / np.sqrt(3)] * 4, atol=1e-6)


@pytest.mark.unit
def test_jacobian_rejects_interior_point(zero_sum):
    state = GameState(SimplexPoint(0.5, 0.25, 0.25), SimplexPoint(0.2, 0.3, 0.5))
    with pytest.raises(NotAVertex):
        jacobian_eigen_at_vertex(state, zero_sum)
