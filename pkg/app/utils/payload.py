import math

import numpy as np

from app.utils.errors import ConfigError


def json_ready(value):
    """Recursively convert numpy scalars and arrays to JSON types; NaN and inf become None"""
    if isinstance(value, dict):
        return {str(key): json_ready(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(item) for item in value]
    if isinstance(value, np.ndarray):
        return json_ready(value.tolist())
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def config_pairs(data, keys):
    """Pick the config keys of a JSON body as strings for harness.parse_config"""
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("request body must be a JSON object", {"body": type(data).__name__})
    pairs = {}
    for key in keys:
        if data.get(key) is not None:
            value = data[key]
            pairs[key] = ",".join(str(v) for v in value) if isinstance(value, (list, tuple)) else str(value)
    return pairs
