"""Blockwise sine basis, empirical scalar products and spectral coefficients.

On block k = [kh, (k+1)h] the basis functions are

    phi_jk(t) = sqrt(2/h) cos(j pi (t - kh) / h)
    Phi_jk(t) = sin(j pi (t - kh) / h) / (sqrt(2h) n sin(j pi / (2nh)))

and the coefficients x_jk = sum_l (X_l - X_{l-1}) Phi_jk(l/n) only involve the
increments of block k. Phi_jk vanishes at both block ends, so the last
increment of every block never enters, and Phi_{nh,k} vanishes on the whole
grid.
"""

from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy import fft

from app.models.geometry_model import BlockGeometry
from app.utils.errors import BadGeometry
from app.utils.logger import logger

SUPPORT_SLACK = 1e-12


def _block_size(n, h):
    nh = n * h
    if abs(nh - round(nh)) > 1e-9 or round(nh) < 1:
        raise BadGeometry(f"n*h = {nh} is not a positive integer")
    return int(round(nh))


def _support(k, h, t):
    return (t >= k * h - SUPPORT_SLACK) & (t <= (k + 1) * h + SUPPORT_SLACK)


def phi(j, k, h, t):
    """sqrt(2/h) cos(j pi (t - kh)/h) on [kh, (k+1)h], zero elsewhere"""
    t = np.asarray(t, dtype=float)
    value = np.sqrt(2.0 / h) * np.cos(j * np.pi * (t - k * h) / h)
    return np.where(_support(k, h, t), value, 0.0)


def phi_antiderivative(j, k, h, n, t):
    """Discretely renormalized antiderivative Phi_jk, zero outside block k"""
    nh = _block_size(n, h)
    t = np.asarray(t, dtype=float)
    scale = 1.0 / (np.sqrt(2.0 * h) * n * np.sin(j * np.pi / (2.0 * nh)))
    value = scale * np.sin(j * np.pi * (t - k * h) / h)
    return np.where(_support(k, h, t), value, 0.0)


def empirical_norm_sq(j, n, h):
    """||Phi_jk||_n^2 = (4 n^2 sin^2(j pi / (2nh)))^-1, the same for every block"""
    nh = _block_size(n, h)
    j = np.asarray(j, dtype=float)
    return 1.0 / (4.0 * n * n * np.sin(j * np.pi / (2.0 * nh)) ** 2)


@dataclass(frozen=True, eq=False)
class SpectralCoefficients:
    geometry: BlockGeometry
    xt: np.ndarray
    yt: np.ndarray
    norms_sq: np.ndarray

    @property
    def inverse_norms_sq(self):
        return 1.0 / self.norms_sq

    def to_frame(self):
        h_inv, J = self.xt.shape
        k, j = np.meshgrid(np.arange(h_inv), np.arange(1, J + 1), indexing="ij")
        return pd.DataFrame({
            "k": k.ravel(),
            "j": j.ravel(),
            "x_coef": self.xt.ravel(),
            "y_coef": self.yt.ravel(),
            "norm_sq": np.broadcast_to(self.norms_sq, self.xt.shape).ravel(),
        })


def _scale_factors(geometry):
    j = np.arange(1, geometry.J + 1, dtype=float)
    return 1.0 / (np.sqrt(2.0 * geometry.h) * geometry.n * np.sin(j * np.pi / (2.0 * geometry.nh)))


def _block_increments(series, geometry):
    return np.diff(np.asarray(series, dtype=float)).reshape(geometry.h_inv, geometry.nh)


def _sine_sums_dst(increments, J):
    """sum_{m=1}^{nh-1} d_m sin(j pi m / nh) for j = 1..J, via a type-I DST per block"""
    h_inv, nh = increments.shape
    sums = np.zeros((h_inv, nh))
    sums[:, : nh - 1] = 0.5 * fft.dst(increments[:, : nh - 1], type=1, axis=-1)
    return sums[:, :J]


def _sine_sums_direct(increments, J):
    nh = increments.shape[1]
    j = np.arange(1, J + 1, dtype=float)[:, None]
    m = np.arange(1, nh + 1, dtype=float)[None, :]
    return increments @ np.sin(np.pi * j * m / nh).T


def compute_coefficients(obs, geometry, method="dst"):
    """Blockwise spectral statistics of both series

    Args:
        obs (ObservationSet): observations, used in tick time
        geometry (BlockGeometry): block layout and cut-off
        method (str): 'dst' (fast sine transform) or 'direct' (explicit sums)

    Returns:
        SpectralCoefficients
    """
    if obs.n != geometry.n:
        logger.error(f"Geometry for n={geometry.n} applied to {obs.n} increments")
        raise BadGeometry(f"geometry is built for n={geometry.n}, observations have n={obs.n}")
    if method == "dst":
        sums = _sine_sums_dst
    elif method == "direct":
        sums = _sine_sums_direct
    else:
        raise BadGeometry(f"unknown coefficient method '{method}'")

    scale = _scale_factors(geometry)
    xt = sums(_block_increments(obs.x, geometry), geometry.J) * scale
    yt = sums(_block_increments(obs.y, geometry), geometry.J) * scale
    norms_sq = empirical_norm_sq(np.arange(1, geometry.J + 1), geometry.n, geometry.h)
    return SpectralCoefficients(geometry, xt, yt, norms_sq)


def sbp_residual(obs, geometry, j, k):
    """Residual of the discrete summation-by-parts identity on block k

    |sum_l dY_l Phi_jk(l/n) + sum_l Y_l phi_jk((l + 1/2)/n) / n|
    """
    if not (1 <= j and 0 <= k < geometry.h_inv):
        raise BadGeometry(f"invalid indices j={j}, k={k}")
    n, h, nh = geometry.n, geometry.h, geometry.nh
    y = np.asarray(obs.y, dtype=float)
    l = np.arange(k * nh, (k + 1) * nh + 1)
    grid_values = phi_antiderivative(j, k, h, n, l / n)
    increments = y[l[1:]] - y[l[:-1]]
    left = np.sum(increments * grid_values[1:])
    mids = l[:-1]
    right = np.sum(y[mids] * phi(j, k, h, (mids + 0.5) / n)) / n
    return float(abs(left + right))


def orthogonality_residuals(nh, h_inv=1, k=0):
    """Max deviations from discrete orthogonality of phi and Phi on one block

    Returns (o1, o2): o1 is the largest |[phi_j, phi_r]_n - delta_jr| and o2 the
    largest |<Phi_j, Phi_r>_n - delta_jr ||Phi_j||^2| / (||Phi_j|| ||Phi_r||).
    Diagonal terms are compared for j <= nh - 1 only: phi_nh and Phi_nh vanish
    on the grid.
    """
    n = nh * h_inv
    h = 1.0 / h_inv
    j = np.arange(1, nh + 1)
    l = np.arange(k * nh + 1, (k + 1) * nh + 1)

    cos_values = np.array([phi(jj, k, h, (l - 0.5) / n) for jj in j])
    gram = cos_values @ cos_values.T / n
    target = np.eye(nh)
    target[-1, -1] = 0.0
    o1 = float(np.max(np.abs(gram - target)))

    sin_values = np.array([phi_antiderivative(jj, k, h, n, l / n) for jj in j])
    gram = sin_values @ sin_values.T / n
    norms = empirical_norm_sq(j, n, h)
    expected = np.diag(norms)
    expected[-1, -1] = 0.0
    o2 = float(np.max(np.abs(gram - expected) / np.sqrt(np.outer(norms, norms))))
    return o1, o2


def block_interior_covariation(obs, geometry):
    """sum of dX dY over the increments m = 1..nh-1 of every block

    This is what the spectral sum over all frequencies reproduces exactly.
    """
    dx = _block_increments(obs.x, geometry)[:, : geometry.nh - 1]
    dy = _block_increments(obs.y, geometry)[:, : geometry.nh - 1]
    return float(np.sum(dx * dy))


def parseval_residual(obs, geometry):
    """Relative gap between (nh)^-1 sum_j ||Phi_j||^-2 x_jk y_jk and h^-1 sum_interior dX dY

    Computed block by block with J = nh; returns the largest relative gap.
    """
    full = geometry.with_cutoff(geometry.nh)
    coeffs = compute_coefficients(obs, full)
    spectral = (coeffs.xt * coeffs.yt * coeffs.inverse_norms_sq).sum(axis=1) / full.nh
    dx = _block_increments(obs.x, full)[:, : full.nh - 1]
    dy = _block_increments(obs.y, full)[:, : full.nh - 1]
    direct = (dx * dy).sum(axis=1) * full.h_inv
    scale = np.maximum(np.abs(dx * dy).sum(axis=1) * full.h_inv, np.finfo(float).tiny)
    return float(np.max(np.abs(spectral - direct) / scale))
