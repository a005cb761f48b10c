import os
import tempfile

# Keep test logs out of the working tree; must run before app modules import the logger
os.environ.setdefault("SPECV_LOG_DIR", os.path.join(tempfile.gettempdir(), "specv-test-log"))

import numpy as np  # noqa: E402
import pytest  # noqa: E402

from app.models.geometry_model import BlockGeometry  # noqa: E402
from app.models.noise_model import NoiseCovariance  # noqa: E402
from app.models.observation_model import ObservationMeta, ObservationSet, Seed  # noqa: E402
from app.models.path_model import SpotPath, preset  # noqa: E402
from app.utils.simulation import add_noise, simulate_signal  # noqa: E402


def make_observations(x, y):
    x = np.asarray(x, dtype=float)
    n = len(x) - 1
    return ObservationSet(np.arange(n + 1) / n, x, y, ObservationMeta(n=n))


def random_walk(rng, n, noise_level=0.0):
    steps = rng.standard_normal((n, 2)) / np.sqrt(n)
    x = np.concatenate(([0.0], np.cumsum(steps[:, 0])))
    y = np.concatenate(([0.0], np.cumsum(steps[:, 1])))
    if noise_level:
        x = x + noise_level * rng.standard_normal(n + 1)
        y = y + noise_level * rng.standard_normal(n + 1)
    return make_observations(x, y)


def simulate(path, noise, n, master=0, stream=0):
    seed = Seed(master, stream)
    x, y = simulate_signal(path, n, seed=seed)
    return add_noise(x, y, noise, seed)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def parametric():
    return preset("parametric_s4")


@pytest.fixture
def timevarying():
    return preset("timevarying_s4")


@pytest.fixture
def constant_path():
    return SpotPath.constant(1.0, 1.0, 0.5)


@pytest.fixture
def noise():
    return NoiseCovariance.from_levels(0.1, 0.1)


@pytest.fixture
def small_geometry():
    return BlockGeometry(n=600, h_inv=10, J=60, r_ratio=2, K=3)


@pytest.fixture
def client():
    from app import create_app

    app = create_app()
    app.config["TESTING"] = True
    return app.test_client()
