import math
from dataclasses import dataclass

import numpy as np

from app.utils.errors import NotPSD
from app.utils.logger import logger
from app.utils.settings import PSD_TOLERANCE


@dataclass(frozen=True)
class NoiseCovariance:
    """Covariance H of the i.i.d. Gaussian observation noise

    eta_x_sq and eta_y_sq are variances, eta_xy the covariance.
    """
    eta_x_sq: float = 0.0
    eta_y_sq: float = 0.0
    eta_xy: float = 0.0

    def __post_init__(self):
        ex, ey, exy = float(self.eta_x_sq), float(self.eta_y_sq), float(self.eta_xy)
        if ex < 0 or ey < 0 or exy * exy > ex * ey * (1.0 + PSD_TOLERANCE) + PSD_TOLERANCE ** 2:
            logger.error(f"Rejected noise covariance ({ex}, {ey}, {exy}): not positive semi-definite")
            raise NotPSD(f"noise covariance ({ex}, {ey}, {exy}) is not positive semi-definite")

    @classmethod
    def from_levels(cls, eta_x, eta_y, eta_xy=0.0):
        """Build H from noise standard deviations and the covariance"""
        return cls(float(eta_x) ** 2, float(eta_y) ** 2, float(eta_xy))

    @classmethod
    def zero(cls):
        return cls(0.0, 0.0, 0.0)

    @classmethod
    def clamped(cls, eta_x_sq, eta_y_sq, eta_xy):
        """Nearest admissible H: variances floored at 0, |eta_xy| capped by sqrt(eta_x_sq * eta_y_sq)"""
        ex = max(float(eta_x_sq), 0.0)
        ey = max(float(eta_y_sq), 0.0)
        bound = math.sqrt(ex * ey)
        exy = min(max(float(eta_xy), -bound), bound)
        return cls(ex, ey, exy)

    @property
    def eta_x(self):
        return math.sqrt(self.eta_x_sq)

    @property
    def eta_y(self):
        return math.sqrt(self.eta_y_sq)

    @property
    def is_zero(self):
        return self.eta_x_sq == 0.0 and self.eta_y_sq == 0.0 and self.eta_xy == 0.0

    @property
    def determinant_scale(self):
        """eta_x^2 eta_y^2 + eta_xy^2"""
        return self.eta_x_sq * self.eta_y_sq + self.eta_xy * self.eta_xy

    @property
    def min_eigenvalue(self):
        half_trace = 0.5 * (self.eta_x_sq + self.eta_y_sq)
        radius = math.sqrt(0.25 * (self.eta_x_sq - self.eta_y_sq) ** 2 + self.eta_xy ** 2)
        return half_trace - radius

    def as_matrix(self):
        return np.array([[self.eta_x_sq, self.eta_xy], [self.eta_xy, self.eta_y_sq]])

    def to_dict(self):
        return {"eta_x_sq": self.eta_x_sq, "eta_y_sq": self.eta_y_sq, "eta_xy": self.eta_xy}
