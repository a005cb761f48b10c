import numpy as np
from flask import jsonify, request

from app.blueprints.asymptotics import asymptotics_bp
from app.models.noise_model import NoiseCovariance
from app.utils import harness
from app.utils.errors import ConfigError, SpecvError
from app.utils.logger import logger
from app.utils.payload import json_ready

MAX_POINTS = 401
MAX_SAMPLES = 200


@asymptotics_bp.route('/avar', methods=['GET'])
def avar():
    """Asymptotic variance curve over rho

    Query parameters: rho_min, rho_max, points, sigma_x, sigma_y, eta_x, eta_y,
    eta_xy, time_varying (0/1), constants ("N,D,C")
    """
    try:
        args = request.args
        points = args.get('points', 39, type=int)
        if not 1 <= points <= MAX_POINTS:
            raise ConfigError("invalid number of grid points", {"points": f"must lie in [1, {MAX_POINTS}]"})
        grid = np.linspace(args.get('rho_min', -0.95, type=float), args.get('rho_max', 0.95, type=float), points)
        if np.any(np.abs(grid) >= 1.0):
            raise ConfigError("correlations must lie in (-1, 1)", {"rho": "out of range"})
        noise = NoiseCovariance.from_levels(
            args.get('eta_x', 0.1, type=float), args.get('eta_y', 0.1, type=float), args.get('eta_xy', 0.0, type=float)
        )
        constants = args.get('constants')
        if constants:
            constants = tuple(float(part) for part in constants.split(","))
            if len(constants) != 3:
                raise ConfigError("constants must be N,D,C", {"constants": args.get('constants')})
        frame = harness.variance_curves(
            grid,
            args.get('sigma_x', 1.0, type=float),
            args.get('sigma_y', 1.0, type=float),
            noise,
            constants or None,
            args.get('time_varying', 0, type=int) == 1,
        )
        return jsonify({'status': 'success', 'data': json_ready(frame.to_dict('records'))}), 200
    except (SpecvError, ValueError) as e:
        logger.error(f"Error in avar: {str(e)}")
        return jsonify({'status': 'error', 'error': str(e), 'fields': getattr(e, 'fields', {})}), 400
    except Exception as e:
        logger.error(f"Unexpected error in avar: {str(e)}")
        return jsonify({'status': 'error', 'message': 'An unexpected error occurred'}), 500


@asymptotics_bp.route('/check', methods=['GET'])
def check():
    """Residuals of the exact identities (query: samples, seed)"""
    try:
        samples = request.args.get('samples', 20, type=int)
        if not 1 <= samples <= MAX_SAMPLES:
            raise ConfigError("invalid sample count", {"samples": f"must lie in [1, {MAX_SAMPLES}]"})
        report = harness.run_identity_checks(samples=samples, seed=request.args.get('seed', 0, type=int))
        return jsonify({
            'status': 'success',
            'passed': bool(report['passed'].all()),
            'data': json_ready(report.to_dict('records')),
        }), 200
    except (SpecvError, ValueError) as e:
        logger.error(f"Error in check: {str(e)}")
        return jsonify({'status': 'error', 'error': str(e), 'fields': getattr(e, 'fields', {})}), 400
    except Exception as e:
        logger.error(f"Unexpected error in check: {str(e)}")
        return jsonify({'status': 'error', 'message': 'An unexpected error occurred'}), 500
