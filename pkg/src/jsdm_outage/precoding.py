"""Two-stage JSDM precoding: statistical first stage, per-group zero forcing."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .channel import build_group_model, complex_normal
from .errors import PrecodingError

RANK_TOL = 1e-10


def _orth(a, tol=RANK_TOL):
    if a.size == 0:
        return a.reshape(a.shape[0], 0)
    u, s, _ = np.linalg.svd(a, full_matrices=False)
    keep = s > tol * s[0] if s.size else np.zeros(0, bool)
    return u[:, keep]


def build_first_stage(models, beams, subspace_cap=None):
    """First-stage matrices B_g (M x B_g), one per group.

    Each group's coloured eigenspace U_g Lambda_g^{1/2} is projected onto the
    orthogonal complement of the other groups' dominant eigenvectors, and the
    B_g strongest left singular directions of the projection are kept. The
    result has orthonormal columns and B_g^H R_g B_g is diagonal.
    """
    m = models[0].num_antennas
    dims = [mod.effective_rank if subspace_cap is None
            else min(mod.effective_rank, subspace_cap) for mod in models]
    out = []
    for g, (mod, b) in enumerate(zip(models, beams)):
        if b > mod.effective_rank:
            raise PrecodingError(
                f"group {g}: B_g={b} exceeds effective rank {mod.effective_rank}")
        others = [models[k].eigenvectors[:, :dims[k]] for k in range(len(models)) if k != g]
        if others:
            basis = _orth(np.hstack(others))
            if basis.shape[1] + b > m:
                raise PrecodingError(
                    f"group {g}: null space of the other groups has dimension "
                    f"{m - basis.shape[1]} < B_g={b}")
            a = mod.sqrt_factor()
            a = a - basis @ (basis.conj().T @ a)
        else:
            a = mod.sqrt_factor()
        u, s, _ = np.linalg.svd(a, full_matrices=False)
        if s.size < b or s[b - 1] <= RANK_TOL * max(s[0], 1.0):
            raise PrecodingError(
                f"group {g}: projected subspace has fewer than {b} usable directions")
        out.append(u[:, :b])
    return out


def normalization(b, model):
    """Diagonal of C_g = diag(diag(V V^H))^{1/2}, V = B^H U Lambda^{1/2}."""
    v = b.conj().T @ model.sqrt_factor()
    c2 = np.einsum("ij,ij->i", v, v.conj()).real
    if np.any(c2 <= 1e-14):
        raise PrecodingError("degenerate beam: zero diagonal in V V^H")
    return np.sqrt(c2)


def normalize_effective_channel(b, u, lam, h):
    """Return (h_bar, ||C^{-1} B^H||_F) for a channel vector or matrix ``h``."""
    v = b.conj().T @ (u * np.sqrt(lam))
    c2 = np.einsum("ij,ij->i", v, v.conj()).real
    if np.any(c2 <= 1e-14):
        raise PrecodingError("degenerate beam: zero diagonal in V V^H")
    g = b.conj().T / np.sqrt(c2)[:, None]
    nf = np.linalg.norm(g)
    return (g @ h) / nf, nf


def zf_second_stage(hbar):
    """Zero-forcing beams for the columns of ``hbar`` (B_g x K_g).

    Column k of the result is the normalised projection of user k's effective
    channel onto the null space of the other users' channels.
    """
    hbar = np.asarray(hbar)
    bdim, k_users = hbar.shape
    if k_users > bdim:
        raise PrecodingError(f"K_g={k_users} users exceed B_g={bdim} dimensions")
    p = np.empty_like(hbar, dtype=complex)
    for k in range(k_users):
        others = np.delete(hbar, k, axis=1)
        if others.shape[1]:
            _, s, vh = np.linalg.svd(others.conj().T, full_matrices=True)
            rank = int(np.sum(s > RANK_TOL * s[0])) if s.size else 0
            if rank < others.shape[1]:
                raise PrecodingError(f"user {k}: other users' channels are rank deficient")
            q = vh[rank:].conj().T
            proj = q @ (q.conj().T @ hbar[:, k])
        else:
            proj = hbar[:, k].astype(complex)
        norm = np.linalg.norm(proj)
        if norm <= RANK_TOL * max(np.linalg.norm(hbar[:, k]), 1e-300):
            raise PrecodingError(f"user {k}: channel lies in the span of the others")
        p[:, k] = proj / norm
    return p


@dataclass(frozen=True)
class PrecoderSet:
    """Per-drop precoders of one macro BS."""

    first_stage: list
    normalization: list
    norm_factors: list
    channels: list  # per group, M x K_g
    effective_channels: list  # per group, B_g x K_g (normalised)
    zf_columns: list  # per group, B_g x K_g


class JSDMPrecoder:
    """Long-term JSDM structure of a macro BS for a given configuration."""

    def __init__(self, cfg):
        self.cfg = cfg
        self.models = [build_group_model(g, cfg.energy_fraction) for g in cfg.groups]
        self.first_stage = build_first_stage(self.models, cfg.beams, cfg.subspace_cap)
        self.norms = [normalization(b, mod) for b, mod in zip(self.first_stage, self.models)]
        self.norm_factors = [
            float(np.linalg.norm(b.conj().T / c[:, None]))
            for b, c in zip(self.first_stage, self.norms)]

    def norm_factor_sq(self, group):
        """||C_g^{-1} B_g^H||_F^2, the deterministic factor inside xi_m."""
        return self.norm_factors[group] ** 2

    def draw(self, rng):
        """Draw K_g channels per group and build both precoding stages."""
        chans, effs, zfs = [], [], []
        for g, (mod, b, k) in enumerate(zip(self.models, self.first_stage,
                                            self.cfg.streams_per_group)):
            w = complex_normal(rng, (mod.effective_rank, k))
            h = mod.sqrt_factor() @ w
            hbar = (b.conj().T @ h) / self.norms[g][:, None] / self.norm_factors[g]
            chans.append(h)
            effs.append(hbar)
        for hbar in effs:
            zfs.append(zf_second_stage(hbar))
        return PrecoderSet(self.first_stage, self.norms, self.norm_factors,
                           chans, effs, zfs)


_CACHE = {}


def precoder_for(cfg):
    """Shared precoder; only array, group and stream fields select the entry."""
    key = (cfg.groups, cfg.beams, cfg.streams_per_group, cfg.energy_fraction,
           cfg.subspace_cap, cfg.num_antennas, cfg.antenna_spacing)
    if key not in _CACHE:
        _CACHE[key] = JSDMPrecoder(cfg)
    return _CACHE[key]
