"""One-ring ULA covariance, its truncated eigen-structure and channel draws."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz

GL_NODES = 64
# max phase (radians) swept by the integrand within one Gauss-Legendre panel
_PANEL_PHASE = 8.0


@dataclass(frozen=True)
class GroupChannelModel:
    covariance: np.ndarray
    eigenvectors: np.ndarray  # (M, r_g)
    eigenvalues: np.ndarray  # (r_g,), descending

    @property
    def effective_rank(self):
        return len(self.eigenvalues)

    @property
    def num_antennas(self):
        return self.eigenvectors.shape[0]

    def truncated_covariance(self):
        u, lam = self.eigenvectors, self.eigenvalues
        return (u * lam) @ u.conj().T

    def sqrt_factor(self):
        """U Lambda^{1/2}, the M x r_g channel colouring matrix."""
        return self.eigenvectors * np.sqrt(self.eigenvalues)


def _gl_panels(lo, hi, panels, nodes=GL_NODES):
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = np.linspace(lo, hi, panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    t = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    wt = (half[:, None] * w[None, :]).ravel()
    return t, wt


def covariance_lags(geom, nodes=GL_NODES):
    """First column of the Toeplitz covariance: entry (n, 0) for n = 0..M-1."""
    lo = geom.aoa - geom.angular_spread
    hi = geom.aoa + geom.angular_spread
    lags = np.arange(geom.num_antennas)
    span = 2 * math.pi * geom.antenna_spacing * (geom.num_antennas - 1) * abs(
        math.sin(hi) - math.sin(lo))
    panels = max(1, math.ceil(span / _PANEL_PHASE))
    t, wt = _gl_panels(lo, hi, panels, nodes)
    phase = -2j * np.pi * geom.antenna_spacing * np.outer(lags, np.sin(t))
    col = np.exp(phase) @ wt / (2.0 * geom.angular_spread)
    col[0] = 1.0
    return col


def one_ring_covariance(geom, nodes=GL_NODES):
    """M x M Hermitian covariance of the one-ring model for one group.

    Only the first column is integrated; the Toeplitz structure fills the
    rest, with the upper triangle the conjugate of the lower.
    """
    col = covariance_lags(geom, nodes)
    return toeplitz(col, col.conj())


def eigendecompose(covariance, energy_fraction=0.99, hermitian_tol=1e-9):
    """Keep the smallest set of dominant eigenpairs holding ``energy_fraction``
    of the trace."""
    cov = np.asarray(covariance)
    scale = max(np.abs(cov).max(), 1.0)
    if np.abs(cov - cov.conj().T).max() > hermitian_tol * scale:
        raise np.linalg.LinAlgError("covariance is not Hermitian")
    lam, u = np.linalg.eigh(cov)
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0.0, None)
    u = u[:, order]
    total = lam.sum()
    if total <= 0:
        raise np.linalg.LinAlgError("covariance has no positive eigenvalue")
    cum = np.cumsum(lam) / total
    rank = int(np.searchsorted(cum, energy_fraction - 1e-12) + 1)
    rank = min(rank, int(np.count_nonzero(lam > 0)))
    return GroupChannelModel(cov, u[:, :rank], lam[:rank])


def build_group_model(geom, energy_fraction=0.99):
    return eigendecompose(one_ring_covariance(geom), energy_fraction)


def complex_normal(rng, shape):
    """Circularly-symmetric CN(0, 1) samples."""
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def draw_channel(model, rng, count=None):
    """h = U Lambda^{1/2} w. Returns an M-vector, or M x count if ``count``."""
    shape = (model.effective_rank,) if count is None else (model.effective_rank, count)
    return model.sqrt_factor() @ complex_normal(rng, shape)
