"""Spectral estimators of integrated (co)volatility.

Every spectral estimator is a weighted sum over blocks k and frequencies j of
the bias-corrected products ||Phi_j||^-2 (x_jk y_jk - eta_xy / n). Weights are
proportional to the inverse variances of those products; the oracle plugs the
true spot covariance in, the adaptive version a pilot estimate from the j = 1
coefficients on a coarser grid.
"""

import functools
import math

import numpy as np

from app.models.noise_model import NoiseCovariance
from app.models.path_model import SpotPath
from app.models.report_model import ClampReport, EstimateReport, SpotEstimate, Tuning, WeightTable
from app.utils.asymptotics import clt_variance, spev_clt_variance
from app.utils.errors import BadGeometry, DegenerateDenominator, DegenerateInput, TooFewObservations
from app.utils.logger import logger
from app.utils.quadrature import integrate_unit_interval
from app.utils.settings import VARIANCE_FLOOR
from app.utils.spectral import compute_coefficients, empirical_norm_sq

NOISE_VARIANTS = ("half_quadratic", "lag_one")


def estimate_noise_covariance(obs, variant="lag_one"):
    """Noise covariance from the observed increments

    half_quadratic uses (2n)^-1 sum dX dY. lag_one uses minus the mean of
    dY_l dX_{l+1} over the n - 1 adjacent pairs: the sum is divided by n - 1,
    not n, so that pure noise gives an unbiased estimate. The result is
    clamped to the PSD cone.
    """
    n = obs.n
    if n < 2:
        raise TooFewObservations(f"noise estimation needs n >= 2, got n={n}")
    dx, dy = obs.increments()
    if variant == "half_quadratic":
        ex = float(dx @ dx) / (2 * n)
        ey = float(dy @ dy) / (2 * n)
        exy = float(dx @ dy) / (2 * n)
    elif variant == "lag_one":
        pairs = n - 1
        ex = -float(dx[:-1] @ dx[1:]) / pairs
        ey = -float(dy[:-1] @ dy[1:]) / pairs
        exy = -float(dy[:-1] @ dx[1:]) / pairs
    else:
        raise DegenerateInput(f"unknown noise estimator '{variant}', expected one of {NOISE_VARIANTS}")

    noise = NoiseCovariance.clamped(ex, ey, exy)
    if (noise.eta_x_sq, noise.eta_y_sq, noise.eta_xy) != (ex, ey, exy):
        logger.warning(f"Noise estimate ({ex:.3e}, {ey:.3e}, {exy:.3e}) clamped to the PSD cone")
    return noise


def _block_times(geometry, r_ratio=None):
    """Time at which block k reads the spot covariance: the left end of its coarse block"""
    ratio = geometry.r_ratio if r_ratio is None else r_ratio
    k = np.arange(geometry.h_inv)
    return (k // ratio) * ratio / geometry.h_inv


def _inverse_precision(inverse_norms_sq, n, sigma_x, sigma_y, rho, noise):
    """Variance of ||Phi_j||^-2 x_j y_j for the given spot values (broadcasts)"""
    a = inverse_norms_sq
    cross = sigma_x ** 2 * noise.eta_y_sq + sigma_y ** 2 * noise.eta_x_sq + 2.0 * rho * sigma_x * sigma_y * noise.eta_xy
    return (
        a * a * noise.determinant_scale / (n * n)
        + (1.0 + rho * rho) * (sigma_x * sigma_y) ** 2
        + a * cross / n
    )


def _live_frequencies(geometry):
    """False at j = nh, where Phi_j vanishes on the grid and x_jk = y_jk = 0"""
    return np.arange(1, geometry.J + 1) < geometry.nh


def _normalize(variances, live):
    if np.any(np.all((variances <= 0) | ~live, axis=-1)):
        logger.error("All frequency variances vanish on some block: zero noise and zero volatility")
        raise DegenerateDenominator("weights undefined: every frequency has zero variance")
    with np.errstate(divide="ignore"):
        precision = np.where(live, 1.0 / variances, 0.0)
    w = precision / precision.sum(axis=-1, keepdims=True)
    return w, precision


def oracle_weights(sigma_x, sigma_y, rho, noise, geometry):
    """Variance-optimal weights w_1..w_J for constant spot values

    The last frequency j = nh carries no data and always gets weight 0 when
    J = nh, so without noise the weights are 1/(J - 1) below it rather than
    1/J. Both choices are unbiased.
    """
    a = 1.0 / empirical_norm_sq(np.arange(1, geometry.J + 1), geometry.n, geometry.h)
    variances = _inverse_precision(a, geometry.n, sigma_x, sigma_y, rho, noise)
    variances = np.broadcast_to(variances, a.shape)
    w, _ = _normalize(variances, _live_frequencies(geometry))
    return w


def _weight_table(coeffs, sigma_x, sigma_y, rho, noise):
    geometry = coeffs.geometry
    variances = _inverse_precision(
        coeffs.inverse_norms_sq[None, :], geometry.n,
        sigma_x[:, None], sigma_y[:, None], rho[:, None], noise,
    )
    variances = np.broadcast_to(variances, (geometry.h_inv, geometry.J))
    w, precision = _normalize(variances, _live_frequencies(geometry))
    return WeightTable(geometry, w, precision)


def _weighted_sum(coeffs, w, bias_products):
    """h * sum_k sum_j w_jk ||Phi_j||^-2 (products_jk - bias / n)"""
    geometry = coeffs.geometry
    terms = coeffs.inverse_norms_sq * bias_products
    return float(np.sum(np.sum(w * terms, axis=1)) * geometry.h)


def _covolatility_products(coeffs, noise):
    products = coeffs.xt * coeffs.yt - noise.eta_xy / coeffs.geometry.n
    return np.where(_live_frequencies(coeffs.geometry), products, 0.0)


@functools.lru_cache(maxsize=64)
def _covolatility_avar(path, noise, n):
    """Plug-in variance in the n^(1/4) normalization

    Without noise the realized-covariance variance n^-1/2 int (1 + rho^2) sigma_x^2 sigma_y^2 is used.
    """
    if noise.determinant_scale > 0:
        return clt_variance(path, noise)

    def integrand(t):
        sx, sy, rho = path.evaluate(t)
        return float((1.0 + rho * rho) * (sx * sy) ** 2)

    return integrate_unit_interval(integrand) / math.sqrt(n)


@functools.lru_cache(maxsize=64)
def _volatility_avar(path, which, noise, n):
    eta = noise.eta_x if which == "X" else noise.eta_y
    if eta > 0:
        return spev_clt_variance(path, which, noise)
    sigma = path.sigma_x if which == "X" else path.sigma_y
    return 2.0 * integrate_unit_interval(lambda t: float(sigma(np.asarray(t))) ** 4) / math.sqrt(n)


def _seed_label(obs):
    meta = getattr(obs, "meta", None)
    if meta is None or meta.seed_master is None:
        return None
    return f"{meta.seed_master}:{meta.seed_stream}"


def specv_oracle(coeffs, path, noise, seed=None, noise_source="known"):
    """Oracle spectral covolatility estimator: weights from the true Sigma_{kh}"""
    geometry = coeffs.geometry
    sx, sy, rho = path.evaluate(_block_times(geometry, r_ratio=1))
    table = _weight_table(coeffs, sx, sy, rho, noise)
    value = _weighted_sum(coeffs, table.w, _covolatility_products(coeffs, noise))
    avar = _covolatility_avar(path, noise, geometry.n)
    return EstimateReport(
        value=value,
        plugin_avar=avar,
        mode="oracle",
        tuning=Tuning.from_geometry(geometry, seed, noise_source),
        weights=table,
    )


def specv_uniform(coeffs, noise, path=None, seed=None, noise_source="known"):
    """Spectral covolatility with equal weights 1/J on every block

    With a path, plugin_avar is the exact finite-sample variance scaled by sqrt(n).
    """
    geometry = coeffs.geometry
    w = np.full((geometry.h_inv, geometry.J), 1.0 / geometry.J)
    value = _weighted_sum(coeffs, w, _covolatility_products(coeffs, noise))
    avar = math.nan
    if path is not None:
        sx, sy, rho = path.evaluate(_block_times(geometry, r_ratio=1))
        variances = _inverse_precision(coeffs.inverse_norms_sq[None, :], geometry.n,
                                       sx[:, None], sy[:, None], rho[:, None], noise)
        variances = np.where(_live_frequencies(geometry), variances, 0.0)
        avar = float(np.sum(w * w * variances) * geometry.h ** 2 * math.sqrt(geometry.n))
    return EstimateReport(value, avar, "uniform", Tuning.from_geometry(geometry, seed, noise_source))


def specv_j1(coeffs, noise, path=None, seed=None, noise_source="known"):
    """Lowest-frequency estimator h sum_k ||Phi_1||^-2 (x_1k y_1k - eta_xy / n)"""
    geometry = coeffs.geometry
    a1 = coeffs.inverse_norms_sq[0]
    products = coeffs.xt[:, 0] * coeffs.yt[:, 0] - noise.eta_xy / geometry.n
    value = float(geometry.h * np.sum(a1 * products))
    avar = math.nan
    if path is not None:
        sx, sy, rho = path.evaluate(_block_times(geometry, r_ratio=1))
        variances = _inverse_precision(a1, geometry.n, sx, sy, rho, noise)
        avar = float(np.sum(variances) * geometry.h ** 2 * math.sqrt(geometry.n))
    return EstimateReport(value, avar, "j1", Tuning.from_geometry(geometry, seed, noise_source))


def _window(center, K, h_inv):
    lo = max(center - K // 2, 0)
    hi = min(center - K // 2 + K - 1, h_inv - 1)
    return lo, hi


def _clamp_spot(sxx, syy, cov):
    floored = int(np.sum(sxx < VARIANCE_FLOOR) + np.sum(syy < VARIANCE_FLOOR))
    sxx = np.maximum(sxx, VARIANCE_FLOOR)
    syy = np.maximum(syy, VARIANCE_FLOOR)

    matrices = np.empty((len(sxx), 2, 2))
    matrices[:, 0, 0] = sxx
    matrices[:, 1, 1] = syy
    matrices[:, 0, 1] = matrices[:, 1, 0] = cov
    eigenvalues, vectors = np.linalg.eigh(matrices)
    needs = np.any(eigenvalues < VARIANCE_FLOOR, axis=1)
    projected = int(np.sum(needs))
    if projected:
        clipped = np.maximum(eigenvalues[needs], VARIANCE_FLOOR)
        v = vectors[needs]
        repaired = np.einsum("lij,lj,lkj->lik", v, clipped, v)
        matrices[needs] = repaired
    return matrices[:, 0, 0], matrices[:, 1, 1], matrices[:, 0, 1], floored, projected


def _j1_statistics(coeffs, noise):
    """Bias-corrected j = 1 block statistics (xx, yy, xy), one value per block"""
    n = coeffs.geometry.n
    a1 = coeffs.inverse_norms_sq[0]
    x1, y1 = coeffs.xt[:, 0], coeffs.yt[:, 0]
    block_xx = a1 * (x1 * x1 - noise.eta_x_sq / n)
    block_yy = a1 * (y1 * y1 - noise.eta_y_sq / n)
    block_cov = a1 * (x1 * y1 - noise.eta_xy / n)
    return block_xx, block_yy, block_cov


def _clamped_report(sxx, syy, cov, block_cov):
    sxx, syy, cov, floored, projected = _clamp_spot(sxx, syy, cov)
    pooled = float(np.sum(block_cov))
    sign_flips = int(np.sum(np.sign(cov) * np.sign(pooled) < 0))
    report = ClampReport(floored=floored, projected=projected, sign_flips=sign_flips)
    if report.total or sign_flips:
        logger.warning(f"Pilot clamping: {report.to_dict()}")
    return sxx, syy, cov, report


def spot_pilot(coeffs, noise, geometry=None):
    """Pilot spot covariance on the coarse grid l * r from the j = 1 coefficients

    Each coarse time averages the K blocks whose left ends are nearest to it
    (ties to the left), truncated at the domain ends. Variances are floored and
    every 2x2 estimate is projected onto matrices with eigenvalues >= the floor.
    """
    geometry = geometry or coeffs.geometry
    if geometry != coeffs.geometry:
        raise BadGeometry("pilot geometry differs from the coefficient geometry")
    block_xx, block_yy, block_cov = _j1_statistics(coeffs, noise)

    centers = np.arange(geometry.n_coarse) * geometry.r_ratio
    sxx = np.empty(len(centers))
    syy = np.empty(len(centers))
    cov = np.empty(len(centers))
    for i, center in enumerate(centers):
        lo, hi = _window(int(center), geometry.K, geometry.h_inv)
        sxx[i] = np.mean(block_xx[lo:hi + 1])
        syy[i] = np.mean(block_yy[lo:hi + 1])
        cov[i] = np.mean(block_cov[lo:hi + 1])

    sxx, syy, cov, report = _clamped_report(sxx, syy, cov, block_cov)
    return SpotEstimate(
        grid=centers / geometry.h_inv,
        sigma_x_sq_hat=sxx,
        sigma_y_sq_hat=syy,
        covol_hat=cov,
        K=geometry.K,
        clamp_report=report,
    )


def _pilot_block_values(spot, geometry):
    index = np.arange(geometry.h_inv) // geometry.r_ratio
    sx = np.sqrt(spot.sigma_x_sq_hat[index])
    sy = np.sqrt(spot.sigma_y_sq_hat[index])
    rho = np.clip(spot.covol_hat[index] / (sx * sy), -1.0, 1.0)
    return sx, sy, rho


def held_out_members(k, geometry):
    """Blocks averaged into the weights of block k: its coarse window without k

    A window that holds only block k falls back to the direct neighbours, and
    to block k itself when there are none (h_inv = 1).
    """
    center = (k // geometry.r_ratio) * geometry.r_ratio
    lo, hi = _window(center, geometry.K, geometry.h_inv)
    members = [b for b in range(lo, hi + 1) if b != k]
    if not members:
        members = [b for b in (k - 1, k + 1) if 0 <= b < geometry.h_inv] or [k]
    return members


def held_out_block_values(coeffs, noise):
    """Per-block pilot (sigma_x, sigma_y, rho) that never reads the block it weights

    Block k is weighted from the pilot of its coarse window with block k left
    out, so its weights are independent of its own coefficients.
    """
    geometry = coeffs.geometry
    block_xx, block_yy, block_cov = _j1_statistics(coeffs, noise)
    sxx = np.empty(geometry.h_inv)
    syy = np.empty(geometry.h_inv)
    cov = np.empty(geometry.h_inv)
    for k in range(geometry.h_inv):
        members = held_out_members(k, geometry)
        sxx[k] = np.mean(block_xx[members])
        syy[k] = np.mean(block_yy[members])
        cov[k] = np.mean(block_cov[members])

    sxx, syy, cov, report = _clamped_report(sxx, syy, cov, block_cov)
    sx, sy = np.sqrt(sxx), np.sqrt(syy)
    rho = np.clip(cov / (sx * sy), -1.0, 1.0)
    return sx, sy, rho, report


def pilot_path(spot):
    """Tabulated SpotPath through the pilot values, extended flat to t = 1"""
    grid = np.asarray(spot.grid, dtype=float)
    sx = np.sqrt(spot.sigma_x_sq_hat)
    sy = np.sqrt(spot.sigma_y_sq_hat)
    rho = spot.correlation()
    if grid[-1] < 1.0:
        grid = np.append(grid, 1.0)
        sx, sy, rho = np.append(sx, sx[-1]), np.append(sy, sy[-1]), np.append(rho, rho[-1])
    return SpotPath.from_table(grid, sx, sy, rho)


def _resolve_noise(obs, noise):
    if isinstance(noise, NoiseCovariance):
        return noise, "known"
    return estimate_noise_covariance(obs, noise), "estimated"


def specv_adaptive(obs, geometry, noise="lag_one", pilot=None):
    """Adaptive spectral covolatility estimator

    Args:
        obs (ObservationSet): observations
        geometry (BlockGeometry): block layout, coarse ratio and window
        noise (NoiseCovariance|str): known H, or the name of a noise estimator
        pilot (SpotPath|None): injected spot path read on the coarse grid in
            place of the j = 1 pilot

    The same H feeds the weights and the bias correction. Without an injected
    path, block k is weighted by the held-out pilot of its coarse window; the
    coarse-grid pilot is still reported and drives the plug-in variance.
    """
    coeffs = compute_coefficients(obs, geometry)
    H, source = _resolve_noise(obs, noise)
    if pilot is not None:
        sx, sy, rho = pilot.evaluate(_block_times(geometry))
        spot, clamp, avar_path = None, ClampReport(), pilot
    else:
        spot = spot_pilot(coeffs, H)
        sx, sy, rho, clamp = held_out_block_values(coeffs, H)
        avar_path = pilot_path(spot)

    table = _weight_table(coeffs, sx, sy, rho, H)
    value = _weighted_sum(coeffs, table.w, _covolatility_products(coeffs, H))
    avar = _covolatility_avar(avar_path, H, geometry.n)
    logger.debug(f"Adaptive SPECV value={value:.6g} noise={source} clamps={clamp.to_dict()}")
    return EstimateReport(
        value=value,
        plugin_avar=avar,
        mode="adaptive",
        tuning=Tuning.from_geometry(geometry, _seed_label(obs), source),
        weights=table,
        spot=spot,
        clamp_report=clamp,
    )


def spev(coeffs, which, path_or_pilot, noise, seed=None, noise_source="known"):
    """Spectral estimator of integrated volatility of X or Y

    path_or_pilot is a SpotPath (oracle weights), a SpotEstimate read on the
    coarse grid, or None for the held-out j = 1 pilot of each block.
    """
    if which not in ("X", "Y"):
        raise DegenerateInput(f"which must be 'X' or 'Y', got '{which}'")
    geometry = coeffs.geometry
    n = geometry.n
    values = coeffs.xt if which == "X" else coeffs.yt
    eta_sq = noise.eta_x_sq if which == "X" else noise.eta_y_sq

    if isinstance(path_or_pilot, SpotPath):
        sx, sy, _ = path_or_pilot.evaluate(_block_times(geometry, r_ratio=1))
        avar_path = path_or_pilot
    elif isinstance(path_or_pilot, SpotEstimate):
        sx, sy, _ = _pilot_block_values(path_or_pilot, geometry)
        avar_path = pilot_path(path_or_pilot)
    else:
        sx, sy, _, _ = held_out_block_values(coeffs, noise)
        avar_path = pilot_path(spot_pilot(coeffs, noise))
    sigma = sx if which == "X" else sy

    live = _live_frequencies(geometry)
    a = coeffs.inverse_norms_sq[None, :]
    variances = (a * eta_sq / n + sigma[:, None] ** 2) ** 2
    variances = np.broadcast_to(variances, (geometry.h_inv, geometry.J))
    w, precision = _normalize(variances, live)
    value = _weighted_sum(coeffs, w, np.where(live, values * values - eta_sq / n, 0.0))
    avar = _volatility_avar(avar_path, which, noise, n)
    return EstimateReport(
        value=value,
        plugin_avar=avar,
        mode=f"spev_{which.lower()}",
        tuning=Tuning.from_geometry(geometry, seed, noise_source),
        weights=WeightTable(geometry, w, precision),
    )
