"""Realized covariance and the multi-scale realized covariance (MSRC).

The lag-m subsampled realized covariance averages the products of lag-m
increments over all n - m + 1 starting points,

    S_m = n / (m (n - m + 1)) * sum_{l=m}^{n} (X_l - X_{l-m}) (Y_l - Y_{l-m}),

which is unbiased for the integrated covariance without noise and carries a
noise bias of 2 n eta_xy / m. MSRC combines S_1..S_M with weights that sum to
one and kill every term proportional to 1/m.
"""

import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from scipy import signal

from app.models.report_model import EstimateReport, Tuning
from app.utils.errors import BadLag, DegenerateInput, TooFewObservations, WeightConstraintViolation
from app.utils.logger import logger

CONSTRAINT_TOLERANCE = 1e-10
SCALE_GRID_STEPS = 13
WIDEN_LIMIT = 8


def realized_covariance(obs):
    """sum_l dX_l dY_l"""
    if obs.n < 1:
        raise TooFewObservations("realized covariance needs at least one increment")
    dx, dy = obs.increments()
    return float(dx @ dy)


def realized(obs):
    """realized_covariance wrapped in an EstimateReport (no plug-in variance)"""
    return EstimateReport(realized_covariance(obs), math.nan, "realized", Tuning(n=obs.n, noise_source="none"))


def _normalization(n, m):
    return n / (m * (n - m + 1))


def subsampled_rc(obs, m):
    """Lag-m subsampled realized covariance over all offsets 0..m-1

    The classical subsample average divides by m alone. The factor
    n / (m (n - m + 1)) used here also rescales the n - m + 1 available lag-m
    products to the full interval, so S_m has no signal bias of order m / n.
    """
    n = obs.n
    if not isinstance(m, (int, np.integer)) or not 1 <= m <= n:
        raise BadLag(f"lag m={m} must be an integer in [1, {n}]")
    x = np.asarray(obs.x)
    y = np.asarray(obs.y)
    products = (x[m:] - x[:-m]) @ (y[m:] - y[:-m])
    return float(_normalization(n, m) * products)


def subsampled_all_lags(obs, max_lag, method="fft"):
    """S_1..S_max_lag in one pass

    The lag-m product sums are expanded into two partial sums of X_l Y_l and
    two cross-correlation terms; 'fft' evaluates the latter with
    scipy.signal.correlate, 'direct' loops over m.
    """
    n = obs.n
    if not 1 <= max_lag <= n:
        raise BadLag(f"max_lag={max_lag} must lie in [1, {n}]")
    lags = np.arange(1, max_lag + 1)
    if method == "direct":
        return np.array([subsampled_rc(obs, int(m)) for m in lags])
    if method != "fft":
        raise DegenerateInput(f"unknown lag method '{method}'")

    x = np.asarray(obs.x) - obs.x[0]
    y = np.asarray(obs.y) - obs.y[0]
    size = n + 1
    partial = np.cumsum(x * y)
    cross = signal.correlate(x, y, mode="full", method="fft")
    tail = partial[-1] - partial[lags - 1]
    head = partial[n - lags]
    sums = tail + head - cross[size - 1 + lags] - cross[size - 1 - lags]
    return _normalization(n, lags) * sums


def msrc_weights(M):
    """a_m = 12 m (m - M/2 - 1/2) / (M (M^2 - 1)), m = 1..M"""
    if M < 2:
        raise WeightConstraintViolation(f"the multi-scale weights need M >= 2, got M={M}")
    m = np.arange(1, M + 1, dtype=float)
    return 12.0 * m * (m - M / 2.0 - 0.5) / (M * (M * M - 1.0))


@dataclass(frozen=True, eq=False)
class MsrcConfig:
    """Number of scales, weights a_1..a_M and how M was chosen

    For M >= 2 the weights must satisfy sum a_m = 1 and sum a_m / m = 0.
    M = 1 degenerates to realized covariance and waives both constraints.
    """
    M: int
    weights: np.ndarray = None
    tuned_by: str = "explicit"
    scale: float | None = None
    grid_report: pd.DataFrame | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.M < 1:
            raise WeightConstraintViolation(f"M={self.M} must be positive")
        if self.tuned_by not in ("explicit", "grid_oracle"):
            raise WeightConstraintViolation(f"unknown tuning mode '{self.tuned_by}'")
        if self.weights is None:
            weights = np.ones(1) if self.M == 1 else msrc_weights(self.M)
        else:
            weights = np.asarray(self.weights, dtype=float)
        object.__setattr__(self, "weights", weights)
        if weights.shape != (self.M,):
            raise WeightConstraintViolation(f"expected {self.M} weights, got shape {weights.shape}")
        if self.M > 1:
            m = np.arange(1, self.M + 1)
            level = abs(weights.sum() - 1.0)
            bias = abs(np.sum(weights / m))
            if level > CONSTRAINT_TOLERANCE or bias > CONSTRAINT_TOLERANCE:
                raise WeightConstraintViolation(
                    f"weights violate the bias constraints: |sum a - 1|={level:.2e}, |sum a/m|={bias:.2e}"
                )

    @property
    def waived(self):
        return self.M == 1

    def constraint_residuals(self):
        m = np.arange(1, self.M + 1)
        return float(self.weights.sum() - 1.0), float(np.sum(self.weights / m))


def msrc_from_lags(lag_values, cfg):
    """sum_m a_m S_m from precomputed S_1..S_L, L >= M"""
    lag_values = np.asarray(lag_values, dtype=float)
    if lag_values.shape[-1] < cfg.M:
        raise BadLag(f"need {cfg.M} lags, got {lag_values.shape[-1]}")
    return lag_values[..., : cfg.M] @ cfg.weights


def msrc(obs, cfg, seed=None):
    """Multi-scale realized covariance with the scales and weights of cfg"""
    if cfg.M > obs.n:
        raise BadLag(f"M={cfg.M} exceeds n={obs.n}")
    if cfg.waived:
        logger.warning("MSRC with M=1 is plain realized covariance; bias constraints waived")
    value = float(msrc_from_lags(subsampled_all_lags(obs, cfg.M), cfg))
    return EstimateReport(value, math.nan, "msrc", Tuning(n=obs.n, seed=seed, noise_source="none", M=cfg.M))


def default_scale_grid():
    """Geometric grid c = 0.25 * 2^(k/2), k = 0..12"""
    return 0.25 * 2.0 ** (np.arange(SCALE_GRID_STEPS) / 2.0)


def candidate_scales(n, grid):
    """Map c to M = ceil(c sqrt(n)), keep M >= 2 and drop duplicates"""
    pairs = {}
    for c in sorted(float(value) for value in grid):
        M = max(2, math.ceil(c * math.sqrt(n)))
        if M <= n:
            pairs.setdefault(M, c)
    return [(c, M) for M, c in sorted(pairs.items())]


def scale_ladder(n, grid=None):
    """Every (c, M) the oracle search may visit: the grid plus WIDEN_LIMIT sqrt(2)-steps on each side"""
    grid = sorted(float(c) for c in (default_scale_grid() if grid is None else grid))
    step = math.sqrt(2.0)
    below = [grid[0] / step ** k for k in range(1, WIDEN_LIMIT + 1)]
    above = [grid[-1] * step ** k for k in range(1, WIDEN_LIMIT + 1)]
    return candidate_scales(n, below + grid + above)


def msrc_candidates(obs, ladder):
    """MSRC values of one ObservationSet for every M of the ladder"""
    lags = subsampled_all_lags(obs, ladder[-1][1])
    return np.array([msrc_from_lags(lags, MsrcConfig(M)) for _, M in ladder])


def grid_oracle_scale(estimates, ladder, truth, n, grid=None):
    """Pick M minimizing the Monte Carlo MSE against the known truth

    Args:
        estimates (np.ndarray): (replications, len(ladder)) MSRC values
        ladder (list): (c, M) pairs from scale_ladder
        truth (float): integrated covolatility of the simulated design
        n (int): number of increments
        grid: scale constants c the search starts from; M = ceil(c sqrt(n))

    Returns:
        tuple: (MsrcConfig tuned by grid_oracle, list of warnings)

    A minimum on an edge of the current window moves that edge one ladder
    step outward. A minimum that stays on an edge is reported in the
    warnings, except at the smallest admissible M = 2.
    """
    estimates = np.atleast_2d(np.asarray(estimates, dtype=float))
    if estimates.shape[1] != len(ladder):
        raise BadLag(f"{estimates.shape[1]} estimate columns for a ladder of {len(ladder)} scales")
    mse = np.nanmean((estimates - truth) ** 2, axis=0)
    base = {M for _, M in candidate_scales(n, default_scale_grid() if grid is None else grid)}
    inside = [i for i, (_, M) in enumerate(ladder) if M in base]
    if not inside:
        raise BadLag("no scale of the grid is on the ladder")
    lo, hi = min(inside), max(inside)
    warnings = []
    while True:
        best = lo + int(np.argmin(mse[lo:hi + 1]))
        if best == lo and lo > 0:
            lo -= 1
            warnings.append(f"msrc grid widened below c={ladder[lo + 1][0]:.4g}")
        elif best == hi and hi < len(ladder) - 1:
            hi += 1
            warnings.append(f"msrc grid widened beyond c={ladder[hi - 1][0]:.4g}")
        else:
            break

    c, M = ladder[best]
    if best == hi and hi > lo:
        warnings.append(f"msrc grid minimum at the upper edge M={M}")
    elif best == lo and M > 2 and hi > lo:
        warnings.append(f"msrc grid minimum at the lower edge M={M}")
    for message in warnings:
        logger.warning(message)
    report = pd.DataFrame({
        "c": [ladder[i][0] for i in range(lo, hi + 1)],
        "M": [ladder[i][1] for i in range(lo, hi + 1)],
        "mse": mse[lo:hi + 1],
    })
    logger.info(f"MSRC grid oracle selected M={M} (c={c:.4g}, mse={mse[best]:.3e})")
    return MsrcConfig(M, tuned_by="grid_oracle", scale=c, grid_report=report), warnings
