from dataclasses import dataclass, field

import numpy as np

from app.models.noise_model import NoiseCovariance
from app.utils.errors import DegenerateInput, NonMonotoneScheme, NotPSD
from app.utils.logger import logger
from app.utils.quadrature import integrate_unit_interval
from app.utils.settings import DEFAULT_QUAD_POINTS

EVALUATION_POINTS = 1001
RHO_TOLERANCE = 1e-12


class ConstantFunction:
    """Picklable constant t -> value"""

    def __init__(self, value):
        self.value = float(value)

    def __call__(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value)

    def __repr__(self):
        return f"ConstantFunction({self.value})"


class InterpolatedFunction:
    """Linear interpolation of tabulated values on an increasing grid"""

    def __init__(self, grid, values):
        self.grid = np.asarray(grid, dtype=float)
        self.values = np.asarray(values, dtype=float)

    def __call__(self, t):
        return np.interp(np.asarray(t, dtype=float), self.grid, self.values)


class QuantileVolatility:
    """sigma(F^-1(s)) * sqrt((F^-1)'(s)) with (F^-1)'(s) = 1 / F'(F^-1(s))"""

    def __init__(self, sigma, f_inverse, f_prime):
        self.sigma = sigma
        self.f_inverse = f_inverse
        self.f_prime = f_prime

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        u = self.f_inverse(s)
        with np.errstate(divide="ignore"):
            derivative = 1.0 / np.asarray(self.f_prime(u), dtype=float)
        return self.sigma(u) * np.sqrt(derivative)


class Composed:
    """g(F^-1(s)), used for the correlation which a time change leaves unscaled"""

    def __init__(self, g, f_inverse):
        self.g = g
        self.f_inverse = f_inverse

    def __call__(self, s):
        return self.g(self.f_inverse(np.asarray(s, dtype=float)))


# Time-varying design: high volatility at the open and the close, slowly moving correlation
def timevarying_sigma_x(t):
    return 0.1 - 0.08 * np.sin(np.pi * np.asarray(t, dtype=float))


def timevarying_sigma_y(t):
    return 0.15 - 0.07 * np.sin((6.0 / 7.0) * np.pi * np.asarray(t, dtype=float))


def timevarying_rho(t):
    return 0.5 + 0.01 * np.sin(np.pi * np.asarray(t, dtype=float))


@dataclass(frozen=True)
class SpotPath:
    """Deterministic spot volatilities and correlation on [0, 1]

    Callables must accept numpy arrays. Validation runs on an equidistant
    evaluation grid; sigma is allowed to touch 0 so that time-changed paths
    with vanishing speed at an endpoint remain representable.
    """
    sigma_x: object
    sigma_y: object
    rho: object
    holder_note: str = ""

    def __post_init__(self):
        self.validate()

    @classmethod
    def constant(cls, sigma_x, sigma_y, rho, holder_note="constant"):
        return cls(ConstantFunction(sigma_x), ConstantFunction(sigma_y), ConstantFunction(rho), holder_note)

    @classmethod
    def from_table(cls, grid, sigma_x, sigma_y, rho, resolution=None):
        """Build a path from tabulated values with linear interpolation

        Args:
            grid: increasing times covering [0, 1]
            sigma_x, sigma_y, rho: values on the grid
            resolution: declared grid spacing, recorded in holder_note
        """
        grid = np.asarray(grid, dtype=float)
        if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
            raise DegenerateInput("tabulated grid must be strictly increasing with at least two points")
        if grid[0] > 0.0 or grid[-1] < 1.0:
            raise DegenerateInput("tabulated grid must cover [0, 1]")
        if resolution is None:
            resolution = float(np.max(np.diff(grid)))
        return cls(
            InterpolatedFunction(grid, sigma_x),
            InterpolatedFunction(grid, sigma_y),
            InterpolatedFunction(grid, rho),
            f"tabulated, linear interpolation, resolution={resolution:.6g}",
        )

    def evaluate(self, t):
        """Return (sigma_x, sigma_y, rho) arrays at times t"""
        t = np.asarray(t, dtype=float)
        return (
            np.asarray(self.sigma_x(t), dtype=float),
            np.asarray(self.sigma_y(t), dtype=float),
            np.asarray(self.rho(t), dtype=float),
        )

    def covariance(self, t):
        """Return the entries (c11, c12, c22) of the spot covariance at times t"""
        sx, sy, rho = self.evaluate(t)
        return sx * sx, rho * sx * sy, sy * sy

    def validate(self, points=EVALUATION_POINTS):
        grid = np.linspace(0.0, 1.0, points)
        sx, sy, rho = self.evaluate(grid)
        if not (np.all(np.isfinite(sx)) and np.all(np.isfinite(sy)) and np.all(np.isfinite(rho))):
            raise DegenerateInput("spot path evaluates to non-finite values")
        if np.any(sx < 0) or np.any(sy < 0):
            raise DegenerateInput("spot volatilities must be non-negative")
        if np.any(np.abs(rho) > 1.0 + RHO_TOLERANCE):
            logger.error(f"Spot correlation leaves [-1, 1]: max |rho| = {np.max(np.abs(rho))}")
            raise NotPSD("spot correlation must lie in [-1, 1]")

    def min_eigenvalue(self, points=10_000):
        """Smallest eigenvalue of the spot covariance over an equidistant grid"""
        c11, c12, c22 = self.covariance(np.linspace(0.0, 1.0, points))
        half_trace = 0.5 * (c11 + c22)
        radius = np.sqrt(0.25 * (c11 - c22) ** 2 + c12 * c12)
        return float(np.min(half_trace - radius))


@dataclass(frozen=True)
class SamplingScheme:
    """Observation design t_i = F^-1(i/n); equidistant when kind == 'equidistant'"""
    kind: str = "equidistant"
    f_inverse: object = None
    f_prime: object = None

    def __post_init__(self):
        if self.kind not in ("equidistant", "quantile"):
            raise DegenerateInput(f"unknown sampling scheme kind '{self.kind}'")
        if self.kind == "quantile" and (self.f_inverse is None or self.f_prime is None):
            raise DegenerateInput("quantile schemes need both f_inverse and f_prime")

    @classmethod
    def equidistant(cls):
        return cls("equidistant")

    @classmethod
    def quantile(cls, f_inverse, f_prime):
        return cls("quantile", f_inverse, f_prime)

    def times(self, n):
        grid = np.arange(n + 1, dtype=float) / n
        if self.kind == "equidistant":
            return grid
        times = np.asarray(self.f_inverse(grid), dtype=float)
        if np.any(np.diff(times) <= 0):
            raise NonMonotoneScheme("f_inverse is not strictly increasing on the observation grid")
        times[0], times[-1] = 0.0, 1.0
        return times


@dataclass(frozen=True)
class ModelSpec:
    """Ground truth of an experiment: volatility path, noise and observation design"""
    path: SpotPath
    noise: NoiseCovariance
    scheme: SamplingScheme = field(default_factory=SamplingScheme.equidistant)
    tag: str = "E0"
    name: str = "custom"

    def __post_init__(self):
        if self.tag not in ("E0", "E3"):
            raise DegenerateInput(f"model tag must be E0 or E3, got '{self.tag}'")


def quantile_transform(path, scheme, points=EVALUATION_POINTS):
    """Equidistant-time representation of a path observed on t_i = F^-1(i/n)

    The returned path has spot covariance Sigma_{F^-1(s)} * (F^-1)'(s), so its
    integrated covariance equals that of the original path.
    """
    if scheme.kind == "equidistant":
        return path
    grid = np.linspace(0.0, 1.0, points)
    values = np.asarray(scheme.f_inverse(grid), dtype=float)
    if np.any(np.diff(values) <= 0):
        logger.error("Quantile transform rejected: f_inverse is not strictly increasing")
        raise NonMonotoneScheme("f_inverse must be strictly increasing on [0, 1]")
    return SpotPath(
        QuantileVolatility(path.sigma_x, scheme.f_inverse, scheme.f_prime),
        QuantileVolatility(path.sigma_y, scheme.f_inverse, scheme.f_prime),
        Composed(path.rho, scheme.f_inverse),
        f"quantile transform of: {path.holder_note}",
    )


def _scalar(function):
    return lambda t: float(function(np.asarray(t, dtype=float)))


def true_integrated_covolatility(path, quad_points=DEFAULT_QUAD_POINTS):
    """Integral of rho * sigma_x * sigma_y over [0, 1] by adaptive Simpson"""
    def integrand(t):
        sx, sy, rho = path.evaluate(t)
        return float(rho * sx * sy)
    return integrate_unit_interval(integrand, quad_points)


def integrated_volatility(path, which="X", quad_points=DEFAULT_QUAD_POINTS):
    sigma = _pick_sigma(path, which)
    return integrate_unit_interval(_scalar(lambda t: sigma(t) ** 2), quad_points)


def blockwise_truth(path, h_inv, which="XY"):
    """Sum over blocks of h times the functional at the left block endpoint"""
    t = np.arange(h_inv, dtype=float) / h_inv
    sx, sy, rho = path.evaluate(t)
    if which == "XY":
        values = rho * sx * sy
    elif which == "X":
        values = sx * sx
    elif which == "Y":
        values = sy * sy
    else:
        raise DegenerateInput(f"unknown functional '{which}'")
    return float(np.sum(values) / h_inv)


def _pick_sigma(path, which):
    if which == "X":
        return path.sigma_x
    if which == "Y":
        return path.sigma_y
    raise DegenerateInput(f"which must be 'X' or 'Y', got '{which}'")


PRESETS = ("parametric_s4", "timevarying_s4")


def preset(name, eta_x=0.1, eta_y=0.1, eta_xy=0.0):
    """Named designs of the simulation study (a '_small' suffix is accepted)"""
    base = name[:-len("_small")] if name.endswith("_small") else name
    noise = NoiseCovariance.from_levels(eta_x, eta_y, eta_xy)
    if base == "parametric_s4":
        path = SpotPath.constant(1.0, 1.0, 0.5)
    elif base == "timevarying_s4":
        path = SpotPath(timevarying_sigma_x, timevarying_sigma_y, timevarying_rho, "smooth (analytic)")
    else:
        raise DegenerateInput(f"unknown preset '{name}'")
    return ModelSpec(path=path, noise=noise, name=name)
