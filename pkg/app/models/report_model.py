import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from app.models.geometry_model import BlockGeometry
from app.utils.errors import WeightConstraintViolation

WEIGHT_SUM_TOLERANCE = 1e-12
CI_QUANTILE = 1.96

REPORT_COLUMNS = [
    "mode", "value", "plugin_avar", "ci_lo", "ci_hi", "n", "h_inv", "J", "r_inv", "K", "seed", "noise_source",
]


@dataclass(frozen=True, eq=False)
class WeightTable:
    geometry: BlockGeometry
    w: np.ndarray
    precision: np.ndarray

    def __post_init__(self):
        expected = (self.geometry.h_inv, self.geometry.J)
        if self.w.shape != expected or self.precision.shape != expected:
            raise WeightConstraintViolation(f"weight table shape {self.w.shape} does not match {expected}")
        if np.any(self.w < 0):
            raise WeightConstraintViolation("weights must be non-negative")
        gap = np.max(np.abs(self.w.sum(axis=1) - 1.0))
        if gap > WEIGHT_SUM_TOLERANCE:
            raise WeightConstraintViolation(f"weight rows deviate from 1 by {gap:.3e}")


@dataclass(frozen=True)
class ClampReport:
    floored: int = 0
    projected: int = 0
    sign_flips: int = 0

    @property
    def total(self):
        return self.floored + self.projected

    def to_dict(self):
        return {"floored": self.floored, "projected": self.projected, "sign_flips": self.sign_flips}


@dataclass(frozen=True, eq=False)
class SpotEstimate:
    """Pilot spot (co)volatilities on the coarse grid l * r"""
    grid: np.ndarray
    sigma_x_sq_hat: np.ndarray
    sigma_y_sq_hat: np.ndarray
    covol_hat: np.ndarray
    K: int
    clamp_report: ClampReport = field(default_factory=ClampReport)

    def correlation(self):
        scale = np.sqrt(self.sigma_x_sq_hat * self.sigma_y_sq_hat)
        return np.clip(self.covol_hat / scale, -1.0, 1.0)

    def to_frame(self):
        return pd.DataFrame({
            "t": self.grid,
            "sigma_x_sq": self.sigma_x_sq_hat,
            "sigma_y_sq": self.sigma_y_sq_hat,
            "covol": self.covol_hat,
        })


@dataclass(frozen=True)
class Tuning:
    n: int
    h_inv: int | None = None
    J: int | None = None
    r_ratio: int | None = None
    K: int | None = None
    seed: str | None = None
    noise_source: str = "known"
    M: int | None = None

    @classmethod
    def from_geometry(cls, geometry, seed=None, noise_source="known"):
        return cls(geometry.n, geometry.h_inv, geometry.J, geometry.r_ratio, geometry.K, seed, noise_source)


@dataclass(frozen=True, eq=False)
class EstimateReport:
    """Point estimate with its plug-in variance in the n^(1/4) normalization

    The confidence interval is value +/- 1.96 * sqrt(plugin_avar / sqrt(n)).
    """
    value: float
    plugin_avar: float
    mode: str
    tuning: Tuning
    weights: WeightTable | None = None
    spot: SpotEstimate | None = None
    clamp_report: ClampReport | None = None

    @property
    def ci95(self):
        if not math.isfinite(self.plugin_avar) or self.plugin_avar < 0:
            return (math.nan, math.nan)
        half = CI_QUANTILE * math.sqrt(self.plugin_avar / math.sqrt(self.tuning.n))
        return (self.value - half, self.value + half)

    @property
    def standard_error(self):
        if not math.isfinite(self.plugin_avar) or self.plugin_avar <= 0:
            return math.nan
        return math.sqrt(self.plugin_avar / math.sqrt(self.tuning.n))

    def to_row(self):
        t = self.tuning
        lo, hi = self.ci95
        r_inv = None if t.h_inv is None or t.r_ratio is None else t.h_inv / t.r_ratio
        return {
            "mode": self.mode,
            "value": self.value,
            "plugin_avar": self.plugin_avar,
            "ci_lo": lo,
            "ci_hi": hi,
            "n": t.n,
            "h_inv": t.h_inv,
            "J": t.J,
            "r_inv": r_inv,
            "K": t.K,
            "seed": t.seed,
            "noise_source": t.noise_source,
        }

    def to_frame(self):
        return pd.DataFrame([self.to_row()], columns=REPORT_COLUMNS)


@dataclass(frozen=True, eq=False)
class McReport:
    """Aggregated Monte Carlo results

    summary: one row per estimator; replications: one row per (replication,
    estimator); timings: accumulated runtime per estimator.
    """
    summary: pd.DataFrame
    replications: pd.DataFrame
    timings: pd.DataFrame
    config: dict
    truths: dict
    warnings: tuple = ()
