"""Asymptotic variances of the spectral estimators.

The local variance at time t is the reciprocal of the integral over the
positive half line of 1 / f1(z) with

    f1(z) = pi^4 z^4 + pi^2 A z^2 + B / 4,

where A and B collect the spot covariance and the noise level. The integral is
evaluated in closed form by residues; ``quadrature_oracle`` computes the same
integrals numerically for verification. All variances are reported in the
n^(1/4) normalization: the variance of an estimate is avar / sqrt(n).
"""

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from app.utils.errors import DegenerateInput, NonPositiveInputs
from app.utils.logger import logger
from app.utils.quadrature import integrate_half_line
from app.utils.settings import DEFAULT_QUAD_POINTS

BRANCH_SWITCH = 1e-9


@dataclass(frozen=True)
class VarianceTerms:
    A: float
    B: float
    scale: float


@dataclass(frozen=True)
class QuarticCoefficients:
    """f(z) = quartic z^4 + quadratic z^2 + constant"""
    quartic: float
    quadratic: float
    constant: float

    @classmethod
    def f1(cls, A, B):
        return cls(math.pi ** 4, math.pi ** 2 * A, B / 4.0)

    @classmethod
    def f2(cls, rho, sigma):
        """Specialization sigma_x = sigma_y = sigma, eta_x = eta_y, eta_xy = 0"""
        return cls(math.pi ** 4, 2.0 * math.pi ** 2 * sigma ** 2, (1.0 + rho ** 2) * sigma ** 4)

    def __call__(self, z):
        z2 = z * z
        return self.quartic * z2 * z2 + self.quadratic * z2 + self.constant


def gaussian_product_variance(sigma_x, sigma_y, rho):
    """Var(XY) for centred jointly Gaussian X, Y"""
    return (1.0 + rho * rho) * sigma_x * sigma_x * sigma_y * sigma_y


def variance_terms(sigma_x, sigma_y, rho, noise):
    scale_sq = noise.determinant_scale
    if scale_sq <= 0:
        raise DegenerateInput("variance terms need a non-degenerate noise level (H != 0)")
    root = math.sqrt(scale_sq)
    A = (noise.eta_y_sq * sigma_x ** 2 + noise.eta_x_sq * sigma_y ** 2 + 2.0 * rho * sigma_x * sigma_y * noise.eta_xy) / root
    B = 4.0 * (sigma_x * sigma_y) ** 2 * (1.0 + rho * rho)
    return VarianceTerms(A=A, B=B, scale=math.sqrt(root))


def _upper_half_plane(root):
    if root.imag < 0:
        return -root
    return root


def integral_f1_closed(A, B):
    """Closed-form integral of 1 / f1 over (0, inf)

    Roots are taken in the upper half plane. Within a relative distance of
    1e-9 of A^2 = B the first-order expansion around the switch is used.
    """
    if B <= 0:
        logger.error(f"integral_f1_closed called with B={B}")
        raise DegenerateInput(f"B={B} must be positive")
    if A <= 0:
        raise DegenerateInput(f"A={A} must be positive")
    sqrt_b = math.sqrt(B)
    discriminant = A * A - B
    if abs(discriminant) < BRANCH_SWITCH * B:
        eps = discriminant / (A + sqrt_b)
        return (1.0 + eps / (4.0 * A)) / math.sqrt(2.0 * A * B)

    root_d = cmath.sqrt(discriminant)
    upper = _upper_half_plane(cmath.sqrt(A + root_d))
    lower = _upper_half_plane(cmath.sqrt(A - root_d))
    sign = 1.0 if discriminant > 0 else -1.0
    value = (upper - sign * lower) / (math.sqrt(2.0) * root_d * sqrt_b)
    return value.real


def integral_f2_closed(rho, sigma):
    """Integral of 1 / f2 over (0, inf); 1 / (4 sigma^3) at rho = 0"""
    if sigma <= 0:
        raise DegenerateInput(f"sigma={sigma} must be positive")
    if rho == 0:
        return 1.0 / (4.0 * sigma ** 3)
    angle = cmath.phase(complex(-rho, 1.0))
    return math.sin(0.5 * (angle - 0.5 * math.pi)) / (2.0 * sigma ** 3 * rho * (1.0 + rho * rho) ** 0.25)


def local_variance(sigma_x, sigma_y, rho, noise):
    """Local asymptotic variance, the reciprocal of the f1 integral"""
    terms = variance_terms(sigma_x, sigma_y, rho, noise)
    if terms.B <= 0:
        logger.error(f"local_variance: degenerate volatility sigma_x={sigma_x}, sigma_y={sigma_y}")
        raise DegenerateInput("local variance needs sigma_x * sigma_y > 0")
    return 1.0 / integral_f1_closed(terms.A, terms.B)


def quadrature_oracle(coeffs, tol=1e-12, subdivisions=1):
    """Numerical integral of 1 / f over (0, inf)"""
    if coeffs.quartic <= 0 or coeffs.constant <= 0:
        raise DegenerateInput("quadrature oracle needs positive quartic and constant coefficients")
    return integrate_half_line(lambda z: 1.0 / coeffs(z), tol=tol, subdivisions=subdivisions)


def clt_variance(path, noise, quad_points=DEFAULT_QUAD_POINTS):
    """(eta_x^2 eta_y^2 + eta_xy^2)^(1/4) times the time integral of the local variance"""
    if noise.determinant_scale <= 0:
        raise DegenerateInput("clt_variance requires H != 0")

    def integrand(t):
        sx, sy, rho = path.evaluate(t)
        return local_variance(float(sx), float(sy), float(rho), noise)

    value, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=1e-13, epsrel=1e-10, limit=max(50, 4 * quad_points))
    return noise.determinant_scale ** 0.25 * value


def spev_clt_variance(path, which, noise, quad_points=DEFAULT_QUAD_POINTS):
    """8 eta times the integral of sigma^3, the univariate counterpart of clt_variance"""
    eta = noise.eta_x if which == "X" else noise.eta_y
    sigma = path.sigma_x if which == "X" else path.sigma_y
    if eta <= 0:
        raise DegenerateInput("spev_clt_variance requires a positive noise level")
    value, _ = integrate.quad(lambda t: float(sigma(np.asarray(t))) ** 3, 0.0, 1.0, epsabs=1e-13, epsrel=1e-10,
                              limit=max(50, 4 * quad_points))
    return 8.0 * eta * value


def tuning_constant(N, D, C):
    """Minimizer of N c^-3 + D c + C c^-1 over c > 0

    Positive root of D c^4 - C c^2 - 3N = 0 in c^2, written so that neither
    sign of C cancels.
    """
    if N <= 0 or D <= 0:
        logger.error(f"tuning_constant called with N={N}, D={D}")
        raise NonPositiveInputs(f"N={N} and D={D} must both be positive")
    root = math.sqrt(C * C + 12.0 * N * D)
    if C >= 0:
        c_sq = (C + root) / (2.0 * D)
    else:
        c_sq = 6.0 * N / (root - C)
    return math.sqrt(c_sq)


def tuning_objective(c, N, D, C):
    return N / c ** 3 + D * c + C / c
