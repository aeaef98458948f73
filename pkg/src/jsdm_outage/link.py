"""Per-drop link budget of the typical user: useful power, interference, noise."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import ServingKind


def noise_power(bandwidth, noise_figure_db):
    """Thermal noise in watts: -174 dBm/Hz + 10 log10(B) + NF."""
    if bandwidth <= 0:
        raise ValueError("bandwidth must be positive")
    n_dbm = -174.0 + 10.0 * math.log10(bandwidth) + noise_figure_db
    return 10.0 ** ((n_dbm - 30.0) / 10.0)


@dataclass(frozen=True)
class LinkBudget:
    useful_power: float
    interference_macro: float
    interference_pico: float
    noise_power: float
    # residual intra/inter-group power from the serving macro BS
    self_interference: float = 0.0

    @property
    def interference(self):
        return self.interference_macro + self.interference_pico + self.self_interference

    @property
    def sinr(self):
        return self.useful_power / (self.noise_power + self.interference)

    @property
    def snr(self):
        return self.useful_power / self.noise_power


def aggregate_interference(distances, power, kappa2, alphas, gains):
    """sum_i power * kappa^2 * d_i^{-alpha_i} * gain_i."""
    distances = np.asarray(distances, dtype=float)
    if distances.size == 0:
        return 0.0
    return float(np.sum(power * kappa2 * distances ** (-np.asarray(alphas)) * gains))


def _interferers(tier_drop, tier, serving_distance, serving_alpha, mode, exclude=None):
    """Distances and exponents of the interferers seen from one tier."""
    d = tier_drop.distances
    keep = np.ones(d.shape, bool)
    if exclude is not None:
        keep[exclude] = False
    if mode == "analysis_match":
        keep &= d >= serving_distance
        d = d[keep]
        return d, np.full(d.shape, serving_alpha)
    d = d[keep]
    return d, np.where(d < tier.los_radius, tier.alpha_los, tier.alpha_nlos)


def interferer_gains(rng, count, cfg, precoder=None, macro=False):
    """Fading gains of ``count`` interfering links.

    Pico links and, by default, macro beams are unit-mean exponential. With
    ``beam_gain_model == "full"`` each macro interferer's gain is |h_bar^H p|^2
    for a freshly drawn effective channel and ZF beam of that BS.
    """
    if not macro or cfg.beam_gain_model == "exponential" or precoder is None:
        return rng.exponential(1.0, count)
    gains = np.empty(count)
    weights = cfg.group_weights()
    for i in range(count):
        g = rng.choice(len(weights), p=weights)
        ps = precoder.draw(rng)
        mod = precoder.models[g]
        h = mod.sqrt_factor() @ (
            (rng.standard_normal(mod.effective_rank)
             + 1j * rng.standard_normal(mod.effective_rank)) / math.sqrt(2.0))
        hbar = (ps.first_stage[g].conj().T @ h) / ps.normalization[g] / ps.norm_factors[g]
        p = ps.zf_columns[g][:, rng.integers(ps.zf_columns[g].shape[1])]
        gains[i] = abs(np.vdot(hbar, p)) ** 2
    return gains


def macro_served_sinr(realization, outcome, precoders, cfg, rng, group=0, user=0,
                      precoding_mode="zf", precoder=None, mode=None):
    """Link budget of a user served by the nearest macro BS.

    ``precoders`` is the serving BS's :class:`PrecoderSet`; ``group``/``user``
    locate the typical user in it. ``precoding_mode="none"`` sends each
    stream on its own first-stage beam (P_g = I).
    """
    if outcome.kind is not ServingKind.MACRO:
        raise ValueError("outcome is not macro-served")
    if precoders is None:
        raise ValueError("missing precoder for the serving macro BS")
    mode = cfg.interference_mode if mode is None else mode
    k2 = cfg.kappa2
    pm = cfg.macro_power
    path = pm * k2 * outcome.serving_distance ** (-outcome.serving_alpha)

    hbar = precoders.effective_channels[group][:, user]
    if precoding_mode == "zf":
        beams = [z for z in precoders.zf_columns]
    elif precoding_mode == "none":
        beams = [np.eye(b.shape[0], z.shape[1]) for b, z in
                 zip(precoders.effective_channels, precoders.zf_columns)]
    else:
        raise ValueError(f"unknown precoding mode {precoding_mode!r}")
    own = np.abs(hbar.conj() @ beams[group]) ** 2
    useful = path * own[user]
    intra = path * (own.sum() - own[user])
    h = precoders.channels[group][:, user]
    inter = 0.0
    for g2, (b, p) in enumerate(zip(precoders.first_stage, beams)):
        if g2 != group:
            inter += path * float(np.sum(np.abs(h.conj() @ b @ p) ** 2))

    dm, am = _interferers(realization.macro, cfg.macro, outcome.serving_distance,
                          outcome.serving_alpha, mode, exclude=outcome.serving_index)
    ds, as_ = _interferers(realization.pico, cfg.pico, outcome.serving_distance,
                           outcome.serving_alpha, mode)
    gm = interferer_gains(rng, dm.size, cfg, precoder, macro=True)
    gs = interferer_gains(rng, ds.size, cfg)
    i1 = aggregate_interference(dm, pm, k2, am, gm)
    i2 = aggregate_interference(ds, cfg.pico_power, k2, as_, gs)
    return LinkBudget(useful, i1, i2, cfg.noise_power, intra + inter)


def pico_served_sinr(realization, outcome, cfg, rng, fading=None, precoder=None,
                     mode=None):
    """Link budget of a user served by the nearest pico BS (scalar channel)."""
    if outcome.kind is not ServingKind.PICO:
        raise ValueError("outcome is not pico-served")
    mode = cfg.interference_mode if mode is None else mode
    k2 = cfg.kappa2
    if fading is None:
        fading = rng.exponential(1.0)
    useful = cfg.pico_power * k2 * outcome.serving_distance ** (-outcome.serving_alpha) * fading
    dm, am = _interferers(realization.macro, cfg.macro, outcome.serving_distance,
                          outcome.serving_alpha, mode)
    ds, as_ = _interferers(realization.pico, cfg.pico, outcome.serving_distance,
                           outcome.serving_alpha, mode, exclude=outcome.serving_index)
    gm = interferer_gains(rng, dm.size, cfg, precoder, macro=True)
    gs = interferer_gains(rng, ds.size, cfg)
    i3 = aggregate_interference(dm, cfg.macro_power, k2, am, gm)
    i4 = aggregate_interference(ds, cfg.pico_power, k2, as_, gs)
    return LinkBudget(useful, i3, i4, cfg.noise_power)
