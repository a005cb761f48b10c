import numpy as np
import pytest

from app.models.geometry_model import BlockGeometry
from app.models.noise_model import NoiseCovariance
from app.utils.errors import BadGeometry
from app.utils.estimators import specv_uniform
from app.utils.spectral import (
    block_interior_covariation, compute_coefficients, empirical_norm_sq, orthogonality_residuals, parseval_residual,
    phi, phi_antiderivative, sbp_residual,
)
from tests.conftest import make_observations, random_walk


@pytest.fixture
def geometry():
    return BlockGeometry(n=240, h_inv=8, J=30, r_ratio=2, K=3)


def test_fast_and_direct_sine_sums_agree(rng, geometry):
    obs = random_walk(rng, geometry.n, noise_level=0.05)
    fast = compute_coefficients(obs, geometry, method="dst")
    direct = compute_coefficients(obs, geometry, method="direct")
    np.testing.assert_allclose(fast.xt, direct.xt, rtol=1e-10, atol=1e-12)
    np.testing.assert_allclose(fast.yt, direct.yt, rtol=1e-10, atol=1e-12)


def test_cutoff_restricts_frequencies(rng, geometry):
    obs = random_walk(rng, geometry.n)
    full = compute_coefficients(obs, geometry.with_cutoff(geometry.nh))
    cut = compute_coefficients(obs, geometry.with_cutoff(5))
    assert cut.xt.shape == (geometry.h_inv, 5)
    np.testing.assert_array_equal(cut.xt, full.xt[:, :5])
    frame = cut.to_frame()
    assert list(frame.columns) == ["k", "j", "x_coef", "y_coef", "norm_sq"]
    assert len(frame) == geometry.h_inv * 5


def test_geometry_must_match_observations(rng, geometry):
    obs = random_walk(rng, 120)
    with pytest.raises(BadGeometry):
        compute_coefficients(obs, geometry)
    with pytest.raises(BadGeometry):
        compute_coefficients(random_walk(rng, geometry.n), geometry, method="fast")


@pytest.mark.parametrize("nh", [4, 16, 100, 1000])
def test_discrete_orthogonality(nh):
    o1, o2 = orthogonality_residuals(nh)
    assert o1 < 1e-10
    assert o2 < 1e-10


def test_orthogonality_holds_on_later_blocks():
    o1, o2 = orthogonality_residuals(12, h_inv=3, k=2)
    assert max(o1, o2) < 1e-10


def test_antiderivative_vanishes_at_block_ends():
    n, h = 60, 0.25
    for j in (1, 7, 14):
        values = phi_antiderivative(j, 1, h, n, np.array([0.25, 0.5]))
        np.testing.assert_allclose(values, 0.0, atol=1e-12)
    assert np.all(empirical_norm_sq(np.arange(1, 16), n, h) > 0)
    assert empirical_norm_sq(15, n, h) == pytest.approx(1.0 / (4.0 * n * n), rel=1e-14)


def test_summation_by_parts(rng, geometry):
    obs = random_walk(rng, geometry.n, noise_level=0.1)
    scale = np.max(np.abs(obs.y))
    for j, k in [(1, 0), (3, 4), (geometry.nh - 1, geometry.h_inv - 1)]:
        assert sbp_residual(obs, geometry, j, k) / scale < 1e-10


def test_parseval_is_exact(rng, geometry):
    assert parseval_residual(random_walk(rng, geometry.n, noise_level=0.02), geometry) < 1e-10


def test_noiseless_uniform_estimator_is_block_interior_covariation(rng, geometry):
    obs = random_walk(rng, geometry.n)
    full = geometry.with_cutoff(geometry.nh)
    value = specv_uniform(compute_coefficients(obs, full), NoiseCovariance.zero()).value
    assert value == pytest.approx(block_interior_covariation(obs, full), rel=1e-10)


def test_block_closing_increment_never_enters(rng, geometry):
    obs = random_walk(rng, geometry.n)
    dx, dy = obs.increments()
    closing = np.arange(1, geometry.h_inv + 1) * geometry.nh - 1
    dx[closing] += 5.0
    dy[closing] -= 3.0
    shifted = make_observations(np.concatenate(([0.0], np.cumsum(dx))), np.concatenate(([0.0], np.cumsum(dy))))
    before = compute_coefficients(obs, geometry)
    after = compute_coefficients(shifted, geometry)
    np.testing.assert_allclose(after.xt, before.xt, atol=1e-12)
    np.testing.assert_allclose(after.yt, before.yt, atol=1e-12)


@pytest.mark.parametrize("j,k,h,t,expected", [
    (1, 0, 1.0, 0.0, np.sqrt(2.0)),
    (1, 0, 1.0, 1.0, -np.sqrt(2.0)),
    (2, 1, 0.5, 0.875, 0.0),
    (1, 1, 0.5, 0.25, 0.0),
])
def test_cosine_basis_values(j, k, h, t, expected):
    assert float(phi(j, k, h, t)) == pytest.approx(expected, abs=1e-12)


def test_antiderivative_values():
    assert float(phi_antiderivative(1, 0, 1.0, 4, 0.5)) == pytest.approx(0.4619397662556434, rel=1e-12)
    n, h, k = 40, 0.25, 2
    nh = 10
    peak = phi_antiderivative(nh, k, h, n, k * h + 1.0 / (2 * n))
    assert float(peak) == pytest.approx(1.0 / (np.sqrt(2.0 * h) * n), rel=1e-12)
    assert float(phi_antiderivative(1, k, h, n, 0.1)) == 0.0


def test_empirical_norm_values():
    assert float(empirical_norm_sq(1, 4, 1.0)) == pytest.approx(0.42677669529663687, rel=1e-12)
    exact = float(empirical_norm_sq(1, 10_000, 1.0))
    assert abs(exact * np.pi ** 2 - 1.0) < 1e-7


def test_coefficients_only_read_their_own_block(rng, geometry):
    obs = random_walk(rng, geometry.n, noise_level=0.1)
    k = 3
    lo, hi = k * geometry.nh, (k + 1) * geometry.nh
    x = np.array(obs.x)
    y = np.array(obs.y)
    outside = np.ones(geometry.n + 1, dtype=bool)
    outside[lo:hi + 1] = False
    x[outside] += rng.standard_normal(outside.sum())
    y[outside] -= 2.0 * rng.standard_normal(outside.sum())
    before = compute_coefficients(obs, geometry)
    after = compute_coefficients(make_observations(x, y), geometry)
    np.testing.assert_allclose(after.xt[k], before.xt[k], rtol=0, atol=1e-13)
    np.testing.assert_allclose(after.yt[k], before.yt[k], rtol=0, atol=1e-13)
    assert not np.allclose(after.xt[k - 1], before.xt[k - 1])
