"""Exact Gaussian simulation of the noisy bivariate diffusion.

Signal increments are drawn from their exact law: centred Gaussians whose
covariance is the integral of the spot covariance over the step, evaluated
with a 9-node composite Simpson rule. The blockwise model freezes the spot
covariance at the left end of each block instead.
"""

import numpy as np

from app.models.observation_model import NOISE_SUBKEY, SIGNAL_SUBKEY, ObservationMeta, ObservationSet, Seed
from app.models.path_model import SamplingScheme
from app.utils.errors import BadGeometry, DegenerateStep, TooFewObservations
from app.utils.logger import logger
from app.utils.settings import PSD_TOLERANCE

SIMPSON_NODES = 9
SIMPSON_WEIGHTS = np.array([1.0, 4.0, 2.0, 4.0, 2.0, 4.0, 2.0, 4.0, 1.0]) / 24.0


def _cholesky_increments(c11, c12, c22, draws):
    """Map standard normal pairs to increments with the given 2x2 covariances

    L22 is floored at 0 so degenerate (rank one) steps are allowed.
    """
    l11 = np.sqrt(np.maximum(c11, 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(c11 > 0, c12 / c11, 0.0)
        schur = np.where(c11 > 0, np.maximum(c11 * c22 - c12 * c12, 0.0) / c11, np.maximum(c22, 0.0))
    l21 = ratio * l11
    l22 = np.sqrt(schur)
    dx = l11 * draws[:, 0]
    dy = l21 * draws[:, 0] + l22 * draws[:, 1]
    return dx, dy


def _check_psd(c11, c12, c22, label):
    det = c11 * c22 - c12 * c12
    bad = (c11 < -PSD_TOLERANCE) | (c22 < -PSD_TOLERANCE) | (det < -PSD_TOLERANCE * np.maximum(c11 * c22, np.finfo(float).tiny))
    if np.any(bad):
        first = int(np.argmax(bad))
        logger.error(f"{label}: step {first} has a covariance outside the PSD cone")
        raise DegenerateStep(f"{label}: integrated covariance of step {first} is not positive semi-definite")


def _cumulate(dx, dy):
    x = np.concatenate(([0.0], np.cumsum(dx)))
    y = np.concatenate(([0.0], np.cumsum(dy)))
    return x, y


def simulate_signal(path, n, scheme=None, seed=None):
    """Signal (X, Y) at t_i = F^-1(i/n), i = 0..n, started at (0, 0)

    Args:
        path (SpotPath): spot volatilities and correlation
        n (int): number of increments
        scheme (SamplingScheme|None): observation design, equidistant by default
        seed (Seed): replication seed; the signal uses subkey 0

    Returns:
        tuple: (X, Y) numpy arrays of length n + 1
    """
    if n < 2:
        raise TooFewObservations(f"n={n} must be at least 2")
    scheme = scheme or SamplingScheme.equidistant()
    seed = seed or Seed(0)
    times = scheme.times(n)
    dt = np.diff(times)
    offsets = np.linspace(0.0, 1.0, SIMPSON_NODES)
    nodes = times[:-1, None] + dt[:, None] * offsets[None, :]
    c11, c12, c22 = path.covariance(nodes)
    c11 = (c11 @ SIMPSON_WEIGHTS) * dt
    c12 = (c12 @ SIMPSON_WEIGHTS) * dt
    c22 = (c22 @ SIMPSON_WEIGHTS) * dt
    _check_psd(c11, c12, c22, "simulate_signal")

    draws = seed.rng(SIGNAL_SUBKEY).standard_normal((n, 2))
    return _cumulate(*_cholesky_increments(c11, c12, c22, draws))


def simulate_signal_blockwise(path, n, h_inv, seed=None):
    """Signal with spot covariance frozen at Sigma_{kh} on block k

    Every increment of block k has covariance Sigma_{kh} / n.
    """
    if h_inv < 1 or n % h_inv != 0:
        logger.error(f"Blockwise simulation rejected: n={n}, h_inv={h_inv}")
        raise BadGeometry(f"n*h = {n}/{h_inv} is not an integer")
    if n < 2:
        raise TooFewObservations(f"n={n} must be at least 2")
    seed = seed or Seed(0)
    nh = n // h_inv
    c11, c12, c22 = path.covariance(np.arange(h_inv, dtype=float) / h_inv)
    c11 = np.repeat(c11 / n, nh)
    c12 = np.repeat(c12 / n, nh)
    c22 = np.repeat(c22 / n, nh)
    _check_psd(c11, c12, c22, "simulate_signal_blockwise")

    draws = seed.rng(SIGNAL_SUBKEY).standard_normal((n, 2))
    return _cumulate(*_cholesky_increments(c11, c12, c22, draws))


def add_noise(x, y, noise, seed=None, times=None, meta=None):
    """Add i.i.d. N(0, H) noise to every one of the n + 1 points

    The noise stream (subkey 1) is independent of the signal stream. Noise at
    index 0 never reaches the spectral statistics since Phi vanishes at 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise TooFewObservations("signal sequences must be one-dimensional and of equal length")
    n = len(x) - 1
    if times is None:
        times = np.arange(n + 1, dtype=float) / n
    if meta is None:
        meta = ObservationMeta(n=n, seed_master=None if seed is None else seed.master,
                               seed_stream=None if seed is None else seed.stream)

    if noise.is_zero:
        return ObservationSet(times, x.copy(), y.copy(), meta)

    seed = seed or Seed(0)
    draws = seed.rng(NOISE_SUBKEY).standard_normal((n + 1, 2))
    full = np.ones(n + 1)
    ex, ey = _cholesky_increments(noise.eta_x_sq * full, noise.eta_xy * full, noise.eta_y_sq * full, draws)
    return ObservationSet(times, x + ex, y + ey, meta)


def simulate_observations(spec, n, seed, h_inv=None):
    """Full pipeline: signal of the spec's model (E0 or E3), then noise

    E3 requires h_inv; quantile schemes are simulated on their own time grid.
    """
    if spec.tag == "E3":
        if h_inv is None:
            raise BadGeometry("the blockwise model needs h_inv")
        x, y = simulate_signal_blockwise(spec.path, n, h_inv, seed)
        times = np.arange(n + 1, dtype=float) / n
    else:
        x, y = simulate_signal(spec.path, n, spec.scheme, seed)
        times = spec.scheme.times(n)
    meta = ObservationMeta(
        n=n,
        scheme=spec.scheme.kind,
        seed_master=seed.master,
        seed_stream=seed.stream,
        model_tag=spec.tag,
        h_inv=h_inv if spec.tag == "E3" else None,
        preset=spec.name,
    )
    logger.debug(f"Simulated {spec.name} ({spec.tag}) with n={n}, seed=({seed.master}, {seed.stream})")
    return add_noise(x, y, spec.noise, seed, times=times, meta=meta)
