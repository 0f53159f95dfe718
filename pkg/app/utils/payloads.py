"""JSON payloads shared by the command line and the HTTP API."""
from app.dynamics.game_core import PayoffParams, payoff_matrices
from app.dynamics.maps import basic_transition_matrix, cycle_transition_matrix
from app.dynamics.network import (
    CYCLES,
    build_quotient_network,
    eigen_table,
    eigen_table_discrepancies,
    get_cycle,
    vertex_label,
)
from app.dynamics.stability import (
    char_poly,
    classify,
    dominance,
    stability_indices_matrix_path,
    BOUNDARY_BAND,
)
from app.dynamics.errors import BoundaryParams, TieBreak
from app.utils.formatting import encode_complex, encode_matrix, encode_real

INDEX_PATHS = ('closed', 'matrix', 'both')


def _encode_table(table):
    return {
        node: {role: {k: encode_real(v) for k, v in values.items()} for role, values in roles.items()}
        for node, roles in table.items()
    }


def network_payload(params: PayoffParams):
    nodes, connections, cycles = build_quotient_network()
    return {
        'eps_x': params.eps_x,
        'eps_y': params.eps_y,
        'nodes': [
            {'label': node.label, 'symbol': node.symbol, 'members': [vertex_label(v) for v in node.members()]}
            for node in nodes
        ],
        'connections': [connection.to_dict() for connection in connections],
        'cycles': [cycle.to_dict() for cycle in cycles],
        'payoffs': {
            'a': encode_matrix(payoff_matrices(params).a),
            'b': encode_matrix(payoff_matrices(params).b),
        },
        'eigenvalues': {
            'printed': _encode_table(eigen_table(params, printed=True)),
            'reconciled': _encode_table(eigen_table(params)),
            'discrepancies': [
                {**row, 'printed': encode_real(row['printed']), 'reconciled': encode_real(row['reconciled'])}
                for row in eigen_table_discrepancies(params)
            ],
        },
    }


def _cycle_maps(cycle, params):
    composites = {}
    for node in cycle.nodes:
        composite = cycle_transition_matrix(cycle, node, params)
        cp = char_poly(composite)
        composites[node.label] = {
            'matrix': encode_matrix(composite.entries),
            'tr': encode_real(cp.tr),
            'b': encode_real(cp.b),
            'det': encode_real(cp.det),
            'dominance': _dominance(composite),
        }
    return {
        'cycle': cycle.id,
        'nodes': [node.label for node in cycle.nodes],
        'basic': {
            node.label: encode_matrix(basic_transition_matrix(cycle, node, params).entries)
            for node in cycle.nodes
        },
        'composite': composites,
    }


def maps_payload(params: PayoffParams, cycle_ids=None):
    cycle_ids = cycle_ids or list(CYCLES)
    return {
        'eps_x': params.eps_x,
        'eps_y': params.eps_y,
        'cycles': [_cycle_maps(get_cycle(cycle_id), params) for cycle_id in cycle_ids],
    }


def _encode_sigma(indices):
    return {node.label: encode_real(value) for node, value in indices.items()}


def _check_path(path):
    if path not in INDEX_PATHS:
        raise ValueError(f"path must be one of {', '.join(INDEX_PATHS)}")


def _index_report(cycle_id, params, path, band):
    """Classification report of one cycle and, for ``path='both'``, the matrix-path indices."""
    cycle = get_cycle(cycle_id)
    method = 'matrix' if path == 'matrix' else 'closed_form'
    report = classify(cycle, params, band, method=method)
    matrix_indices = None
    if path == 'both':
        try:
            matrix_indices = stability_indices_matrix_path(cycle, params, band)
        except BoundaryParams:
            matrix_indices = {}
    return report, matrix_indices


def index_result(cycle_id, params: PayoffParams, path='closed', band=BOUNDARY_BAND):
    report, matrix_indices = _index_report(cycle_id, params, path, band)
    result = {
        'cycle': report.cycle,
        'eps_x': params.eps_x,
        'eps_y': params.eps_y,
        'sigma': _encode_sigma(report.indices),
        'classification': report.classification.value,
    }
    if matrix_indices is not None:
        result['sigma_matrix'] = _encode_sigma(matrix_indices)
    return result


def indices_payload(params: PayoffParams, cycle_ids=None, path='closed', band=BOUNDARY_BAND):
    _check_path(path)
    cycle_ids = cycle_ids or list(CYCLES)
    return {
        'path': path,
        'band': band,
        'results': [index_result(cycle_id, params, path, band) for cycle_id in cycle_ids],
    }


def index_csv_header(path='closed'):
    header = ['cycle', 'eps_x', 'eps_y', 'node', 'sigma']
    if path == 'both':
        header.append('sigma_matrix')
    return header + ['classification']


def index_rows(params: PayoffParams, cycle_ids=None, path='closed', band=BOUNDARY_BAND):
    """One row per (cycle, node) with unrounded indices; boundary cycles get a single row
    with empty node and index cells."""
    _check_path(path)
    rows = []
    for cycle_id in cycle_ids or list(CYCLES):
        report, matrix_indices = _index_report(cycle_id, params, path, band)
        for node in list(report.indices) or [None]:
            row = [report.cycle, params.eps_x, params.eps_y]
            row += ['', ''] if node is None else [node.label, report.indices[node]]
            if matrix_indices is not None:
                row.append(matrix_indices.get(node, ''))
            row.append(report.classification.value)
            rows.append(row)
    return rows


def _dominance(matrix):
    try:
        dom = dominance(matrix)
    except TieBreak:
        return None
    return {
        'lambda_max': encode_complex(dom.lambda_max),
        'eigenvalues': [encode_complex(v) for v in dom.eigenvalues],
        'w_max': None if dom.w_max is None else [encode_real(v) for v in dom.w_max],
        'cond_i': dom.cond_i,
        'cond_ii': dom.cond_ii,
        'cond_iii': dom.cond_iii,
    }


def regions_payload(grid):
    return {
        'resolution': grid.resolution,
        'eps_values': [encode_real(v) for v in grid.eps_values],
        'cells': grid.cells,
        'counts': grid.counts(),
    }
