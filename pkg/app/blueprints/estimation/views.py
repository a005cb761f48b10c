from flask import jsonify, request

from app.blueprints.estimation import estimation_bp
from app.models.geometry_model import BlockGeometry
from app.models.observation_model import ObservationMeta, ObservationSet, Seed
from app.utils import harness
from app.utils.errors import ConfigError, SpecvError
from app.utils.logger import logger
from app.utils.payload import config_pairs, json_ready
from app.utils.simulation import simulate_observations

CONFIG_KEYS = (
    "preset", "n", "h_inv", "J", "r_ratio", "K", "model_tag", "eta_x", "eta_y", "eta_xy",
    "sigma_x", "sigma_y", "rho", "master_seed", "noise_variant", "msrc_M",
)


def _observations(data, pairs):
    series = data.get('observations')
    if series is None:
        cfg = harness.parse_config(pairs)
        stream = int(data.get('stream', 0))
        return cfg, simulate_observations(harness.build_model(cfg), cfg.n, Seed(cfg.master_seed, stream), h_inv=cfg.h_inv)

    if not all(key in series for key in ('t', 'x', 'y')):
        raise ConfigError("observations need t, x and y", {"observations": "missing series"})
    n = len(series['t']) - 1
    obs = ObservationSet(series['t'], series['x'], series['y'], ObservationMeta(n=n))
    pairs['n'] = str(n)
    pairs.setdefault('h_inv', str(BlockGeometry.default(n).h_inv))
    return harness.parse_config(pairs), obs


@estimation_bp.route('/estimate', methods=['POST'])
def estimate():
    """Run one estimator on posted or simulated observations

    Request body:
    {
        "mode": "specv_adaptive",
        "noise_source": "estimated",
        "observations": {"t": [...], "x": [...], "y": [...]},
        "h_inv": 30
    }

    Without "observations" the configured model is simulated first.
    """
    try:
        data = request.get_json(silent=True) or {}
        mode = data.get('mode', 'specv_adaptive')
        if mode not in harness.ESTIMATORS:
            raise ConfigError("unknown estimator", {"mode": mode})
        cfg, obs = _observations(data, config_pairs(data, CONFIG_KEYS))
        source = data.get('noise_source') or cfg.source_for(mode)
        if source not in harness.NOISE_SOURCES:
            raise ConfigError("unknown noise source", {"noise_source": source})

        report = harness.run_estimator(mode, obs, harness.estimation_context(cfg), source)
        payload = report.to_row()
        if report.clamp_report is not None:
            payload['clamp_report'] = report.clamp_report.to_dict()
        if report.spot is not None:
            payload['spot'] = report.spot.to_frame().to_dict('list')
        return jsonify({'status': 'success', 'data': json_ready(payload)}), 200
    except (SpecvError, ValueError) as e:
        logger.error(f"Error in estimate: {str(e)}")
        return jsonify({'status': 'error', 'error': str(e), 'fields': getattr(e, 'fields', {})}), 400
    except Exception as e:
        logger.error(f"Unexpected error in estimate: {str(e)}")
        return jsonify({'status': 'error', 'message': 'An unexpected error occurred'}), 500
