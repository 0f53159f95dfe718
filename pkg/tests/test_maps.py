"""Tests for local, global and return maps and the transition matrices."""

import numpy as np
import pytest

from app.dynamics.errors import NodeNotInCycle, OutsideDomain
from app.dynamics.game_core import PayoffParams
from app.dynamics.maps import (
    GLOBAL_PERMUTATIONS,
    LogCoords,
    SectionPoint,
    basic_transition_matrix,
    cycle_transition_matrix,
    flow_first_return,
    from_log,
    global_map,
    linearised_basic_matrix,
    local_map,
    partial_products,
    poincare_map,
    poincare_map_linear,
    printed_c0_return,
    to_log,
)
from app.dynamics.network import CONNECTIONS, CYCLES, Node, local_eigen
from app.dynamics.stability import char_poly


# ============================================================================
# Section and Log Coordinates
# ============================================================================

@pytest.mark.unit
def test_section_point_bounds():
    with pytest.raises(OutsideDomain) as excinfo:
        SectionPoint.incoming(0.5, 1.0, 0.2)
    assert excinfo.value.reason == 'section_bounds'
    with pytest.raises(ValueError):
        SectionPoint('sideways', (0.1, 0.2, 0.3))


@pytest.mark.unit
def test_log_coordinates():
    point = SectionPoint.incoming(np.exp(-1), np.exp(-2), np.exp(-3))
    assert to_log(point).eta == pytest.approx((-1.0, -2.0, -3.0))
    with pytest.raises(OutsideDomain) as excinfo:
        LogCoords((-1.0, 0.5, -2.0))
    assert excinfo.value.reason == 'log_bounds'


@pytest.mark.unit
def test_log_round_trip():
    rng = np.random.default_rng(5)
    for coords in rng.uniform(1e-6, 0.99, size=(20, 3)):
        back = from_log(to_log(SectionPoint.incoming(*coords)))
        np.testing.assert_allclose(back.as_array(), coords, rtol=1e-14)


# ============================================================================
# Local and Global Maps
# ============================================================================

def _c0_xi0_eigen(params):
    return local_eigen(Node.XI0, CYCLES['C0'].context(Node.XI0), params)


@pytest.mark.unit
@pytest.mark.numerics
def test_local_map_exponent_arithmetic(zero_sum):
    out = local_map(_c0_xi0_eigen(zero_sum), SectionPoint.incoming(1e-4, 1e-2, 1e-6))
    assert out.kind == 'outgoing'
    np.testing.assert_allclose(out.as_array(), [1e-4, 1e-4, 1e-4], rtol=1e-12)


@pytest.mark.unit
def test_local_map_boundary_is_excluded(zero_sum):
    eig = _c0_xi0_eigen(zero_sum)
    w = 1e-4
    with pytest.raises(OutsideDomain) as excinfo:
        local_map(eig, SectionPoint.incoming(w, 1e-2, w ** eig.exponents()[2]))
    assert excinfo.value.reason == 'transverse_escape'


@pytest.mark.unit
def test_local_map_is_continuous_at_w_one(c0_stable):
    eig = _c0_xi0_eigen(c0_stable)
    out = local_map(eig, SectionPoint.incoming(1 - 1e-9, 0.3, 0.2))
    np.testing.assert_allclose(out.as_array(), [1.0, 0.3, 0.2], rtol=1e-8)


@pytest.mark.unit
def test_local_map_needs_incoming_point(zero_sum):
    with pytest.raises(ValueError):
        local_map(_c0_xi0_eigen(zero_sum), SectionPoint.outgoing(0.1, 0.2, 0.3))


@pytest.mark.unit
def test_global_map_permutation():
    out = global_map(CONNECTIONS[(Node.XI0, Node.XI1)], SectionPoint.outgoing(0.1, 0.2, 0.3))
    assert out.kind == 'incoming'
    assert out.coords == (0.2, 0.3, 0.1)


@pytest.mark.unit
def test_global_map_rejects_foreign_cycle():
    with pytest.raises(NodeNotInCycle):
        global_map(CONNECTIONS[(Node.XI1, Node.XI0)], SectionPoint.outgoing(0.1, 0.2, 0.3), cycle='C3')


@pytest.mark.unit
def test_every_cycle_node_has_a_permutation():
    for cycle in CYCLES.values():
        for node in cycle.nodes:
            assert sorted(GLOBAL_PERMUTATIONS[(cycle.id, node)]) == [0, 1, 2]


# ============================================================================
# Transition Matrices
# ============================================================================

@pytest.mark.unit
@pytest.mark.numerics
@pytest.mark.parametrize('cycle_id, node, expected', [
    ('C0', Node.XI0, [[0.5, 1, 0], [-0.5, 0, 1], [1, 0, 0]]),
    ('C1', Node.XI1, [[2, 1, 0], [1, 0, 0], [-2, 0, 1]]),
    ('C3', Node.XI0, [[1, 1, 0], [-0.5, 0, 1], [0.5, 0, 0]]),
])
def test_basic_matrices_at_zero_sum(zero_sum, cycle_id, node, expected):
    np.testing.assert_allclose(basic_transition_matrix(cycle_id, node, zero_sum).entries, expected)


@pytest.mark.unit
@pytest.mark.numerics
@pytest.mark.parametrize('eps', [(0.0, 0.0), (-0.5, 0.25), (0.7, -0.3), (0.9, 0.5)])
def test_basic_matrices_rebuilt_from_eigenvalues(eps):
    """Every basic matrix is the local log matrix with rows permuted by the global map."""
    params = PayoffParams(*eps)
    for cycle in CYCLES.values():
        for node in cycle.nodes:
            np.testing.assert_allclose(
                linearised_basic_matrix(cycle, node, params).entries,
                basic_transition_matrix(cycle, node, params).entries,
                atol=1e-14,
            )


@pytest.mark.unit
def test_basic_matrix_requires_cycle_node(zero_sum):
    with pytest.raises(NodeNotInCycle):
        basic_transition_matrix('C0', Node.XI2, zero_sum)


@pytest.mark.unit
@pytest.mark.numerics
def test_c0_composite_at_zero_sum(zero_sum):
    composite = cycle_transition_matrix('C0', Node.XI0, zero_sum)
    np.testing.assert_allclose(composite.entries, [[-0.25, 0.5, 1], [0.75, -0.5, 0], [0.5, 1, 0]])
    assert composite.kind == 'composite'


@pytest.mark.unit
@pytest.mark.numerics
def test_c0_composite_coefficients():
    cp = char_poly(cycle_transition_matrix('C0', Node.XI0, PayoffParams(-0.5, -0.5)))
    assert cp.tr == pytest.approx(0.0625)
    assert cp.b == pytest.approx(-1.4375)
    assert cp.det == pytest.approx(1.0)


@pytest.mark.unit
@pytest.mark.numerics
@pytest.mark.parametrize('cycle_id', list(CYCLES))
def test_composites_at_different_bases_are_similar(cycle_id):
    params = PayoffParams(0.35, -0.2)
    cycle = CYCLES[cycle_id]
    polys = [char_poly(cycle_transition_matrix(cycle, node, params)) for node in cycle.nodes]
    for cp in polys[1:]:
        assert cp.tr == pytest.approx(polys[0].tr, abs=1e-12)
        assert cp.b == pytest.approx(polys[0].b, abs=1e-12)
        assert cp.det == pytest.approx(polys[0].det, abs=1e-12)


@pytest.mark.unit
@pytest.mark.numerics
def test_c0_composites_share_char_poly_at_random_points():
    rng = np.random.default_rng(20240611)
    for eps_x, eps_y in rng.uniform(-0.9, 0.9, size=(50, 2)):
        params = PayoffParams(float(eps_x), float(eps_y))
        at_xi0 = char_poly(cycle_transition_matrix('C0', Node.XI0, params))
        at_xi1 = char_poly(cycle_transition_matrix('C0', Node.XI1, params))
        np.testing.assert_allclose(
            [at_xi1.tr, at_xi1.b, at_xi1.det], [at_xi0.tr, at_xi0.b, at_xi0.det],
            rtol=1e-12, atol=1e-12,
        )


@pytest.mark.unit
@pytest.mark.numerics
@pytest.mark.parametrize('cycle_id, order', [
    ('C3', (Node.XI0, Node.XI1, Node.XI2)),
    ('C4', (Node.XI0, Node.XI2, Node.XI1)),
])
def test_three_node_composite_follows_cycle_order(cycle_id, order):
    """Factors are applied in the order the cycle visits its nodes."""
    params = PayoffParams(0.35, -0.2)
    first, second, third = (basic_transition_matrix(cycle_id, node, params).entries for node in order)
    composite = cycle_transition_matrix(cycle_id, Node.XI0, params).entries
    np.testing.assert_allclose(composite, third @ second @ first, atol=1e-12)


@pytest.mark.unit
def test_partial_products_end_with_composite():
    params = PayoffParams(0.1, 0.6)
    products = partial_products('C3', Node.XI1, params)
    assert len(products) == 3
    np.testing.assert_allclose(products[0], basic_transition_matrix('C3', Node.XI1, params).entries)
    np.testing.assert_allclose(products[-1], cycle_transition_matrix('C3', Node.XI1, params).entries)


# ============================================================================
# Return Maps
# ============================================================================

@pytest.mark.unit
@pytest.mark.numerics
def test_c0_return_at_zero_sum(zero_sum):
    point = SectionPoint.incoming(1e-4, 1e-2, 1e-6)
    expected = [1e-6, 1e-2, 1e-4]
    np.testing.assert_allclose(poincare_map('C0', Node.XI0, zero_sum, point).as_array(), expected, rtol=1e-12)
    np.testing.assert_allclose(printed_c0_return(Node.XI0, zero_sum, point).as_array(), expected, rtol=1e-12)
    np.testing.assert_allclose(
        poincare_map_linear('C0', Node.XI0, zero_sum, point).as_array(), expected, rtol=1e-12
    )


@pytest.mark.unit
@pytest.mark.numerics
@pytest.mark.parametrize('base', [Node.XI0, Node.XI1])
def test_printed_c0_return_matches_matrix(base):
    params = PayoffParams(-0.2, 0.1)
    point = SectionPoint.incoming(1e-3, 1e-2, 1e-5)
    np.testing.assert_allclose(
        printed_c0_return(base, params, point).as_array(),
        poincare_map_linear('C0', base, params, point).as_array(),
        rtol=1e-10,
    )


@pytest.mark.unit
def test_c0_return_domain_violation(zero_sum):
    point = SectionPoint.incoming(1e-2, 1e-4, 1e-3)
    with pytest.raises(OutsideDomain) as excinfo:
        printed_c0_return(Node.XI0, zero_sum, point)
    assert excinfo.value.reason == 'z1_bound'
    with pytest.raises(OutsideDomain) as excinfo:
        poincare_map('C0', Node.XI0, zero_sum, point)
    assert excinfo.value.reason == 'z1_bound'


@pytest.mark.unit
def test_c0_return_first_passage_escape(zero_sum):
    with pytest.raises(OutsideDomain) as excinfo:
        poincare_map('C0', Node.XI0, zero_sum, SectionPoint.incoming(1e-4, 1e-2, 0.5))
    assert excinfo.value.reason == 'z2_bound'


@pytest.mark.simulation
def test_flow_first_return_agrees_with_composite(c0_stable):
    """Integrated return to the C0 section is close to the linear prediction."""
    result = flow_first_return(c0_stable, 1e-6)
    assert result.time > 0
    assert np.all(result.observed < 0)
    assert result.relative_error < 0.5
    assert set(result.to_dict()) == {'delta', 'observed', 'predicted', 'relative_error', 'time'}


@pytest.mark.simulation
@pytest.mark.slow
def test_flow_first_return_error_shrinks_with_delta(c0_stable):
    """The linear prediction improves as the seed moves closer to the cycle."""
    errors = [flow_first_return(c0_stable, delta).relative_error for delta in (1e-2, 1e-3, 1e-4)]
    assert errors[0] > errors[1] > errors[2]
