import numpy as np
import pytest
from scipy import stats

from app.models.geometry_model import BlockGeometry
from app.models.noise_model import NoiseCovariance
from app.models.observation_model import ObservationMeta, ObservationSet, Seed
from app.models.path_model import SpotPath, preset
from app.utils.baselines import realized_covariance
from app.utils.errors import BadGeometry, DegenerateInput, TooFewObservations
from app.utils.simulation import add_noise, simulate_observations, simulate_signal, simulate_signal_blockwise
from app.utils.spectral import compute_coefficients
from tests.conftest import simulate


def test_simulation_is_reproducible_per_stream(constant_path):
    first = simulate_signal(constant_path, 200, seed=Seed(7, 3))
    again = simulate_signal(constant_path, 200, seed=Seed(7, 3))
    other = simulate_signal(constant_path, 200, seed=Seed(7, 4))
    np.testing.assert_array_equal(first[0], again[0])
    assert not np.array_equal(first[0], other[0])
    assert first[0][0] == 0.0 and len(first[0]) == 201


def test_perfect_correlation_gives_identical_paths():
    path = SpotPath.constant(1.0, 1.0, 1.0)
    x, y = simulate_signal(path, 500, seed=Seed(1))
    np.testing.assert_array_equal(x, y)


def test_zero_noise_returns_the_signal(constant_path):
    x, y = simulate_signal(constant_path, 100, seed=Seed(2))
    obs = add_noise(x, y, NoiseCovariance.zero(), Seed(2))
    np.testing.assert_array_equal(obs.x, x)
    assert obs.n == 100


def test_noise_has_the_requested_covariance():
    n = 100_000
    zeros = np.zeros(n + 1)
    H = NoiseCovariance(0.01, 0.02, 0.005)
    obs = add_noise(zeros, zeros, H, Seed(11))
    sample = np.cov(np.vstack([obs.x, obs.y]))
    np.testing.assert_allclose(sample, H.as_matrix(), atol=5e-4)


def test_realized_covariance_is_unbiased_without_noise(constant_path):
    values = [realized_covariance(simulate(constant_path, NoiseCovariance.zero(), 500, 3, i)) for i in range(400)]
    se = np.std(values) / np.sqrt(len(values))
    assert abs(np.mean(values) - 0.5) < 4 * se


def test_signal_variance_follows_the_path(timevarying):
    # increments scaled by the spot volatility are standard normal
    n = 20000
    x, _ = simulate_signal(timevarying.path, n, seed=Seed(5))
    t = np.arange(n) / n
    sx, _, _ = timevarying.path.evaluate(t + 0.5 / n)
    z = np.diff(x) / (sx / np.sqrt(n))
    assert np.var(z) == pytest.approx(1.0, abs=0.05)


def test_blockwise_model_freezes_left_endpoint(timevarying):
    x, _ = simulate_signal_blockwise(timevarying.path, 3000, 30, Seed(9))
    assert len(x) == 3001
    with pytest.raises(BadGeometry):
        simulate_signal_blockwise(timevarying.path, 100, 7, Seed(9))


def test_too_few_observations(constant_path):
    with pytest.raises(TooFewObservations):
        simulate_signal(constant_path, 1)


def test_simulate_observations_fills_meta():
    spec = preset("parametric_s4")
    obs = simulate_observations(spec, 300, Seed(4, 2))
    assert obs.meta.seed_master == 4 and obs.meta.seed_stream == 2
    assert obs.meta.preset == "parametric_s4"
    assert obs.meta.h_inv is None


def test_csv_round_trip_is_exact(tmp_path):
    spec = preset("timevarying_s4")
    obs = simulate_observations(spec, 400, Seed(8))
    target = tmp_path / "obs.csv"
    obs.write_csv(str(target))
    back = ObservationSet.read_csv(str(target))
    np.testing.assert_array_equal(back.x, obs.x)
    np.testing.assert_array_equal(back.y, obs.y)
    np.testing.assert_array_equal(back.times, obs.times)
    assert back.meta == obs.meta


def test_observation_set_validates_times():
    with pytest.raises(DegenerateInput):
        ObservationSet([0.0, 0.6, 0.5, 1.0], np.zeros(4), np.zeros(4), ObservationMeta(n=3))


def test_blockwise_model_has_the_same_law_for_constant_paths(constant_path):
    smooth, frozen = [], []
    for i in range(2000):
        x, y = simulate_signal(constant_path, 8, seed=Seed(21, i))
        smooth.append((x[-1], y[3]))
        x, y = simulate_signal_blockwise(constant_path, 8, 2, Seed(22, i))
        frozen.append((x[-1], y[3]))
    smooth, frozen = np.array(smooth), np.array(frozen)
    for column in range(2):
        assert stats.ks_2samp(smooth[:, column], frozen[:, column]).pvalue > 0.001


def test_coefficients_of_different_blocks_are_uncorrelated(timevarying):
    geometry = BlockGeometry(n=60, h_inv=3, J=20, r_ratio=1, K=1)
    first, second = [], []
    for i in range(2000):
        obs = simulate(timevarying.path, timevarying.noise, geometry.n, 23, i)
        coeffs = compute_coefficients(obs, geometry)
        first.append(coeffs.xt[0, 0])
        second.append(coeffs.xt[1, 0])
    correlation = np.corrcoef(first, second)[0, 1]
    assert abs(correlation) < 4.0 / np.sqrt(len(first))
