from flask import Blueprint, jsonify, request, current_app, abort
from app import limiter
from app.dynamics.game_core import PayoffParams
from app.dynamics.sweeps import MIN_RESOLUTION, run_region_sweep
from app.models import AnalysisRun
from app.utils.formatting import versioned
from app.utils.payloads import (
    INDEX_PATHS,
    indices_payload,
    maps_payload,
    network_payload,
    regions_payload,
)

api_bp = Blueprint('api', __name__)


def _tie_payoffs():
    """Tie payoffs from the query string; both default to 0."""
    eps_x = request.args.get('eps_x', 0.0, type=float)
    eps_y = request.args.get('eps_y', 0.0, type=float)
    return PayoffParams(eps_x, eps_y)


def _cycle_ids():
    return [c for c in request.args.getlist('cycle') if c.strip()] or None


@api_bp.route('/api/network')
def network():
    """Quotient network, payoff matrices and local eigenvalue tables"""
    return jsonify(versioned(network_payload(_tie_payoffs())))


@api_bp.route('/api/maps')
def maps():
    """Basic and composite transition matrices for the requested cycles"""
    return jsonify(versioned(maps_payload(_tie_payoffs(), _cycle_ids())))


@api_bp.route('/api/indices')
def indices():
    """Stability indices and classification"""
    path = request.args.get('path', 'closed')
    if path not in INDEX_PATHS:
        abort(400, description=f"path must be one of {', '.join(INDEX_PATHS)}")
    band = request.args.get('band', current_app.config['BOUNDARY_BAND'], type=float)
    if band < 0:
        abort(400, description='band must be non-negative')
    return jsonify(versioned(indices_payload(_tie_payoffs(), _cycle_ids(), path, band)))


@api_bp.route('/api/regions')
@limiter.limit(lambda: current_app.config['REGIONS_RATE_LIMIT'])
def regions():
    """Classification grid over the tie-payoff square"""
    cap = current_app.config['API_MAX_RESOLUTION']
    resolution = request.args.get('resolution', cap, type=int)
    if not MIN_RESOLUTION <= resolution <= cap:
        abort(400, description=f'resolution must lie between {MIN_RESOLUTION} and {cap}')
    grid = run_region_sweep(resolution, band=current_app.config['BOUNDARY_BAND'])
    return jsonify(versioned(regions_payload(grid)))


@api_bp.route('/api/runs')
def runs():
    """Recently recorded analysis runs"""
    limit = min(max(request.args.get('limit', 20, type=int), 1), 100)
    query = AnalysisRun.query
    kind = request.args.get('kind')
    if kind:
        if kind not in AnalysisRun.KINDS:
            abort(400, description=f"kind must be one of {', '.join(AnalysisRun.KINDS)}")
        query = query.filter_by(kind=kind)
    records = query.order_by(AnalysisRun.created_at.desc(), AnalysisRun.id.desc()).limit(limit).all()
    return jsonify(versioned({'runs': [run.to_dict() for run in records]}))


@api_bp.route('/api/runs/<int:run_id>')
def run_detail(run_id):
    run = AnalysisRun.query.get_or_404(run_id)
    return jsonify(versioned(run.to_dict()))
