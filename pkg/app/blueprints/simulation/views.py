from flask import jsonify, request

from app.blueprints.simulation import simulation_bp
from app.models.observation_model import Seed
from app.utils import harness
from app.utils.errors import SpecvError
from app.utils.logger import logger
from app.utils.payload import config_pairs, json_ready
from app.utils.simulation import simulate_observations

MODEL_KEYS = ("preset", "n", "h_inv", "model_tag", "eta_x", "eta_y", "eta_xy", "sigma_x", "sigma_y", "rho", "master_seed")


@simulation_bp.route('/simulate', methods=['POST'])
def simulate():
    """Simulate one noisy observation set

    Request body:
    {
        "preset": "parametric_s4",
        "n": 3000,
        "h_inv": 30,
        "master_seed": 7,
        "stream": 0
    }

    Returns:
        JSON with the meta record and the t, x, y series
    """
    try:
        data = request.get_json(silent=True) or {}
        cfg = harness.parse_config(config_pairs(data, MODEL_KEYS))
        stream = int(data.get('stream', 0))
        obs = simulate_observations(harness.build_model(cfg), cfg.n, Seed(cfg.master_seed, stream), h_inv=cfg.h_inv)
        meta = {key: value for key, value in (line[2:].split("=", 1) for line in obs.meta.to_lines())}
        return jsonify({
            'status': 'success',
            'data': json_ready({'meta': meta, 't': obs.times, 'x': obs.x, 'y': obs.y}),
        }), 200
    except (SpecvError, ValueError) as e:
        logger.error(f"Error in simulate: {str(e)}")
        return jsonify({'status': 'error', 'error': str(e), 'fields': getattr(e, 'fields', {})}), 400
    except Exception as e:
        logger.error(f"Unexpected error in simulate: {str(e)}")
        return jsonify({'status': 'error', 'message': 'An unexpected error occurred'}), 500
