"""Numerical integration used for ground truth and as an oracle for the closed forms.

Ground-truth functionals of the volatility paths use a deterministic adaptive
Simpson rule started from an equidistant partition; improper integrals over the
positive half line go through ``scipy.integrate.quad`` after the substitution
z = u / (1 - u).
"""

from collections.abc import Callable

import numpy as np
from scipy import integrate

from app.utils.errors import ToleranceNotMet
from app.utils.logger import logger
from app.utils.settings import GROUND_TRUTH_TOLERANCE


def integrate_adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = GROUND_TRUTH_TOLERANCE,
    max_depth: int = 50,
) -> tuple[float, float]:
    """Adaptive Simpson's rule on [a, b].

    Args:
        f: Scalar integrand.
        a: Lower bound.
        b: Upper bound.
        tol: Absolute error tolerance.
        max_depth: Maximum recursion depth.

    Returns:
        Tuple of (integral_value, error_estimate).
    """
    if a == b:
        return 0.0, 0.0

    if a > b:
        result, error = integrate_adaptive_simpson(f, b, a, tol, max_depth)
        return -result, error

    def _simpson(fa, fm, fb, h):
        return h / 3.0 * (fa + 4.0 * fm + fb)

    def _adaptive(a, b, fa, fm, fb, s_whole, depth, tol):
        m = (a + b) / 2.0
        h = (b - a) / 2.0
        lm = (a + m) / 2.0
        rm = (m + b) / 2.0
        flm = f(lm)
        frm = f(rm)

        s_left = _simpson(fa, flm, fm, h / 2.0)
        s_right = _simpson(fm, frm, fb, h / 2.0)
        s_combined = s_left + s_right

        error_estimate = (s_combined - s_whole) / 15.0

        if depth >= max_depth or abs(error_estimate) < tol:
            # Richardson extrapolation
            return s_combined + error_estimate, abs(error_estimate)

        left_result, left_error = _adaptive(a, m, fa, flm, fm, s_left, depth + 1, tol / 2.0)
        right_result, right_error = _adaptive(m, b, fm, frm, fb, s_right, depth + 1, tol / 2.0)

        return left_result + right_result, left_error + right_error

    fa = f(a)
    fb = f(b)
    m = (a + b) / 2.0
    fm = f(m)
    s_whole = _simpson(fa, fm, fb, (b - a) / 2.0)

    return _adaptive(a, b, fa, fm, fb, s_whole, 0, tol)


def integrate_unit_interval(f: Callable[[float], float], quad_points: int = 64, tol: float = GROUND_TRUTH_TOLERANCE) -> float:
    """Integrate f over [0, 1] by adaptive Simpson on quad_points - 1 equal panels.

    The panel split keeps oscillating integrands from fooling the first
    Simpson comparison; the tolerance budget is shared equally across panels.
    """
    if quad_points < 3:
        raise ValueError("quad_points must be at least 3")
    nodes = np.linspace(0.0, 1.0, quad_points)
    panels = quad_points - 1
    total = 0.0
    for a, b in zip(nodes[:-1], nodes[1:]):
        value, _ = integrate_adaptive_simpson(f, float(a), float(b), tol=tol / panels)
        total += value
    return total


def integrate_half_line(f: Callable[[float], float], tol: float = 1e-12, subdivisions: int = 1) -> float:
    """Integrate f over [0, inf) via z = u / (1 - u) and scipy.integrate.quad.

    Args:
        f: Integrand on the positive half line; must decay at least like z^-2.
        tol: Absolute tolerance for the whole integral.
        subdivisions: Number of equal u-panels integrated separately.

    Raises:
        ToleranceNotMet: if the summed error estimate exceeds tol.
    """
    def g(u):
        if u >= 1.0:
            return 0.0
        one_minus = 1.0 - u
        return f(u / one_minus) / (one_minus * one_minus)

    edges = np.linspace(0.0, 1.0, subdivisions + 1)
    value = 0.0
    error = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        piece, piece_err = integrate.quad(g, float(a), float(b), epsabs=tol / subdivisions, epsrel=0.0, limit=500)
        value += piece
        error += piece_err

    if error > tol:
        logger.error(f"Half-line quadrature error estimate {error:.3e} exceeds tolerance {tol:.3e}")
        raise ToleranceNotMet(f"quadrature error estimate {error:.3e} exceeds tolerance {tol:.3e}")
    return value
