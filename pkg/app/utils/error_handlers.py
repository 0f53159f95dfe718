from flask import request, jsonify
from werkzeug.exceptions import HTTPException
import traceback

from app.dynamics.errors import DynamicsError, OutsideDomain


def register_error_handlers(app):
    """Register JSON error handlers for the application"""

    @app.errorhandler(404)
    def not_found_error(error):
        return jsonify({'error': 'Not found', 'path': request.path}), 404

    @app.errorhandler(400)
    def bad_request_error(error):
        return jsonify({'error': getattr(error, 'description', None) or 'Bad request'}), 400

    @app.errorhandler(429)
    def rate_limited_error(error):
        return jsonify({'error': 'Too many requests', 'limit': str(getattr(error, 'description', ''))}), 429

    @app.errorhandler(500)
    def internal_error(error):
        return jsonify({'error': 'Internal server error'}), 500

    @app.errorhandler(HTTPException)
    def handle_http_exception(error):
        return jsonify({'error': error.description}), error.code

    @app.errorhandler(DynamicsError)
    def handle_dynamics_error(error):
        app.logger.info(f'Rejected analysis request {request.path}: {error}')
        payload = {'error': str(error), 'type': type(error).__name__}
        if isinstance(error, OutsideDomain):
            payload['reason'] = error.reason
        return jsonify(payload), 400

    @app.errorhandler(ValueError)
    def handle_value_error(error):
        return jsonify({'error': str(error)}), 400

    @app.errorhandler(Exception)
    def handle_exception(error):
        app.logger.error(f'Unhandled exception: {error}')
        app.logger.error(traceback.format_exc())
        return jsonify({'error': 'Internal server error'}), 500
