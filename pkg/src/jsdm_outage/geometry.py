"""PPP drops on discs, LOS-ball flags and max-received-power association."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np


class ServingKind(enum.Enum):
    NO_BS = "nobs"
    MACRO = "macro"
    PICO = "pico"


@dataclass(frozen=True)
class TierDrop:
    positions: np.ndarray  # (n, 2)
    distances: np.ndarray  # (n,)
    los: np.ndarray  # (n,) bool

    @property
    def count(self):
        return len(self.distances)

    def nearest(self):
        i = int(np.argmin(self.distances))
        return i, float(self.distances[i])


@dataclass(frozen=True)
class NetworkRealization:
    macro: TierDrop
    pico: TierDrop

    @property
    def macro_positions(self):
        return self.macro.positions

    @property
    def pico_positions(self):
        return self.pico.positions


@dataclass(frozen=True)
class AssociationOutcome:
    kind: ServingKind
    serving_index: int = -1
    serving_distance: float = float("nan")
    serving_alpha: float = float("nan")


def sample_disc(rng, count, radius):
    """``count`` points uniform on a disc, by inverse CDF on the radius."""
    d = radius * np.sqrt(rng.random(count))
    phi = 2.0 * np.pi * rng.random(count)
    return np.column_stack((d * np.cos(phi), d * np.sin(phi)))


def tier_from_positions(positions, tier):
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    distances = np.hypot(positions[:, 0], positions[:, 1])
    return TierDrop(positions, distances, distances < tier.los_radius)


def sample_tier(rng, tier):
    n = rng.poisson(tier.mean_count()) if tier.density > 0 else 0
    return tier_from_positions(sample_disc(rng, n, tier.disc_radius), tier)


def sample_realization(cfg, rng):
    """One independent drop of both tiers; macro tier is drawn first."""
    macro = sample_tier(rng, cfg.macro)
    pico = sample_tier(rng, cfg.pico)
    return NetworkRealization(macro, pico)


def nearest_distance_pdf(density, d):
    """Density of the distance to the nearest point of a planar PPP."""
    d = np.asarray(d, dtype=float)
    return 2.0 * density * np.pi * d * np.exp(-density * np.pi * d * d)


def nearest_distance_cdf(density, d):
    d = np.asarray(d, dtype=float)
    return -np.expm1(-density * np.pi * d * d)


def associate(realization, cfg, kappa2=None):
    """Serve the typical user from the tier with the larger mean received power.

    Each candidate link uses its own LOS-ball exponent; ties go to the pico
    tier. ``kappa2`` defaults to the configured free-space constant and
    cancels from the comparison.
    """
    kappa2 = cfg.kappa2 if kappa2 is None else kappa2
    have_m = realization.macro.count > 0
    have_s = realization.pico.count > 0
    if not have_m and not have_s:
        return AssociationOutcome(ServingKind.NO_BS)
    if have_m:
        im, rm = realization.macro.nearest()
        am = cfg.macro.alpha(rm)
    if have_s:
        js, rs = realization.pico.nearest()
        a_s = cfg.pico.alpha(rs)
    if have_m and have_s:
        pico_rx = cfg.pico_power * kappa2 * rs ** (-a_s)
        macro_rx = cfg.macro_power * kappa2 * rm ** (-am)
        if pico_rx >= macro_rx:
            return AssociationOutcome(ServingKind.PICO, js, rs, a_s)
        return AssociationOutcome(ServingKind.MACRO, im, rm, am)
    if have_m:
        return AssociationOutcome(ServingKind.MACRO, im, rm, am)
    return AssociationOutcome(ServingKind.PICO, js, rs, a_s)
