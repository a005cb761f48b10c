"""Closed-form variance integrals checked against numerical quadrature"""

import math

import numpy as np
import pytest
from scipy import integrate

from app.models.noise_model import NoiseCovariance
from app.models.path_model import SpotPath, preset
from app.utils.asymptotics import (
    QuarticCoefficients, clt_variance, gaussian_product_variance, integral_f1_closed, integral_f2_closed, local_variance, quadrature_oracle,
    spev_clt_variance, tuning_constant, tuning_objective, variance_terms,
)
from app.utils.errors import DegenerateInput, NonPositiveInputs
from app.utils.quadrature import integrate_adaptive_simpson, integrate_half_line, integrate_unit_interval


@pytest.mark.parametrize("A,B", [(2.0, 5.0), (0.1, 4.0), (10.0, 1.0), (1.0, 1.0), (3.0, 9.0 * (1 + 1e-12)), (3.0, 9.0 * (1 - 5e-10))])
def test_f1_integral_matches_quadrature(A, B):
    closed = integral_f1_closed(A, B)
    numeric = quadrature_oracle(QuarticCoefficients.f1(A, B))
    assert abs(closed - numeric) / numeric < 1e-9
    assert closed == pytest.approx(1.0 / math.sqrt(B * (A + math.sqrt(B))), rel=1e-9)


@pytest.mark.parametrize("A,B", [(0.0, 1.0), (1.0, 0.0), (-1.0, 2.0)])
def test_f1_integral_rejects_degenerate_inputs(A, B):
    with pytest.raises(DegenerateInput):
        integral_f1_closed(A, B)


def test_f2_integral_special_values():
    assert integral_f2_closed(0.0, 2.0) == pytest.approx(1.0 / 32.0)
    assert integral_f2_closed(0.5, 1.0) == pytest.approx(0.217287, abs=1e-6)
    with pytest.raises(DegenerateInput):
        integral_f2_closed(0.3, 0.0)


@pytest.mark.parametrize("rho", [-0.9, -0.5, 0.1, 0.5, 0.99])
@pytest.mark.parametrize("sigma", [0.5, 1.0, 2.0])
def test_f2_integral_matches_quadrature(rho, sigma):
    numeric = quadrature_oracle(QuarticCoefficients.f2(rho, sigma))
    assert integral_f2_closed(rho, sigma) == pytest.approx(numeric, rel=1e-9)


def test_variance_terms_of_the_parametric_design():
    terms = variance_terms(1.0, 1.0, 0.5, NoiseCovariance.from_levels(0.1, 0.1))
    assert terms.A == pytest.approx(2.0)
    assert terms.B == pytest.approx(5.0)
    assert terms.scale == pytest.approx(0.1)
    with pytest.raises(DegenerateInput):
        variance_terms(1.0, 1.0, 0.5, NoiseCovariance.zero())


def test_local_variance_is_reciprocal_of_the_integral():
    noise = NoiseCovariance.from_levels(0.1, 0.1)
    value = local_variance(1.0, 1.0, 0.5, noise)
    assert value * integral_f1_closed(2.0, 5.0) == pytest.approx(1.0, rel=1e-14)
    with pytest.raises(DegenerateInput):
        local_variance(0.0, 1.0, 0.5, noise)


def test_clt_variance_of_the_parametric_design():
    spec = preset("parametric_s4")
    assert clt_variance(spec.path, spec.noise) == pytest.approx(0.46022, abs=1e-5)


def test_clt_variance_scales_with_the_noise_level(constant_path):
    low = clt_variance(constant_path, NoiseCovariance.from_levels(0.05, 0.05))
    high = clt_variance(constant_path, NoiseCovariance.from_levels(0.1, 0.1))
    assert high == pytest.approx(2.0 * low, rel=1e-10)


def test_clt_variance_is_symmetric_in_rho():
    noise = NoiseCovariance.from_levels(0.1, 0.2)
    for rho in (0.2, 0.6, 0.9):
        plus = clt_variance(SpotPath.constant(1.0, 2.0, rho), noise)
        minus = clt_variance(SpotPath.constant(1.0, 2.0, -rho), noise)
        assert plus == pytest.approx(minus, rel=1e-12)


def test_clt_variance_needs_noise(constant_path):
    with pytest.raises(DegenerateInput):
        clt_variance(constant_path, NoiseCovariance.zero())


def test_spev_variance():
    spec = preset("timevarying_s4")
    expected, _ = integrate.quad(lambda t: float(spec.path.sigma_x(t)) ** 3, 0.0, 1.0)
    assert spev_clt_variance(spec.path, "X", spec.noise) == pytest.approx(0.8 * expected, rel=1e-7)
    with pytest.raises(DegenerateInput):
        spev_clt_variance(spec.path, "Y", NoiseCovariance.zero())


@pytest.mark.parametrize("N,D,C", [(1.0, 1.0, 0.0), (0.5, 2.0, 3.0), (2.0, 0.3, -1.0), (1e-3, 1e3, -1e2)])
def test_tuning_constant_minimizes_the_objective(N, D, C):
    c = tuning_constant(N, D, C)
    best = tuning_objective(c, N, D, C)
    assert best <= tuning_objective(c * 1.01, N, D, C)
    assert best <= tuning_objective(c * 0.99, N, D, C)
    assert -3.0 * N / c ** 4 + D - C / c ** 2 == pytest.approx(0.0, abs=1e-9 * (D + abs(C) / c ** 2 + N / c ** 4))


def test_tuning_constant_rejects_non_positive_inputs():
    with pytest.raises(NonPositiveInputs):
        tuning_constant(0.0, 1.0, 1.0)
    with pytest.raises(NonPositiveInputs):
        tuning_constant(1.0, -1.0, 1.0)


@pytest.mark.parametrize(
    "f,a,b,expected",
    [
        (lambda x: x * x, 0.0, 1.0, 1.0 / 3.0),
        (math.sin, 0.0, math.pi, 2.0),
        (math.exp, 1.0, 0.0, 1.0 - math.e),
    ],
)
def test_adaptive_simpson(f, a, b, expected):
    value, error = integrate_adaptive_simpson(f, a, b)
    assert abs(value - expected) < 1e-10
    assert error < 1e-10


def test_unit_interval_rule():
    assert integrate_unit_interval(lambda t: math.cos(20.0 * t)) == pytest.approx(math.sin(20.0) / 20.0, abs=1e-11)
    with pytest.raises(ValueError):
        integrate_unit_interval(lambda t: t, quad_points=2)


@pytest.mark.parametrize("subdivisions", [1, 4])
def test_half_line_rule(subdivisions):
    value = integrate_half_line(lambda z: 1.0 / (1.0 + z * z), subdivisions=subdivisions)
    assert abs(value - np.pi / 2.0) < 1e-11


def test_gaussian_product_variance(rng):
    assert gaussian_product_variance(2.0, 1.0, 0.5) == pytest.approx(5.0)
    cov = [[4.0, 1.0], [1.0, 1.0]]
    draws = rng.multivariate_normal([0.0, 0.0], cov, size=200_000)
    assert np.var(draws[:, 0] * draws[:, 1]) == pytest.approx(5.0, rel=0.03)
