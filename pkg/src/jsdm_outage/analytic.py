"""Semi-analytical outage: Laplace transforms of PPP interference, conditional
user outage, and the total outage split by association event."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from .errors import ConvergenceError
from .precoding import precoder_for
from .regions import Case, Tier, integrate_marginal, integrate_over_region

LAPLACE_RTOL = 1e-6


class Mode(enum.Enum):
    SINR = "sinr"
    NOISE_LIMITED = "snr"


class Source(enum.Enum):
    ANALYTIC_SINR = "analytic_sinr"
    ANALYTIC_SNR = "analytic_snr"
    SIMULATED = "simulated"


class Scenario(enum.Enum):
    ONE_TIER = "one_tier"
    TWO_TIER = "two_tier"


@dataclass
class OutageCurve:
    thresholds_db: np.ndarray
    values: np.ndarray
    source: Source
    scenario: Scenario
    components: np.ndarray | None = None  # (n, 3): no-BS, macro, pico
    extra: dict = field(default_factory=dict)


def scenario_config(cfg, scenario):
    return cfg.one_tier() if Scenario(scenario) is Scenario.ONE_TIER else cfg


def xi(cfg, tier, group=0):
    """Noise-to-signal scale: N0 ||C^-1 B^H||^2 / (P_m kappa^2) or N0 / (P_s kappa^2)."""
    if Tier(tier) is Tier.MACRO:
        nf2 = precoder_for(cfg).norm_factor_sq(group)
        return cfg.noise_power * nf2 / (cfg.macro_power * cfg.kappa2)
    return cfg.noise_power / (cfg.pico_power * cfg.kappa2)


def laplace_interference(serving_distance, serving_alpha, threshold, xi_value,
                         interferer_density, interferer_power, upper, cfg,
                         form=None):
    """Laplace transform of the interference from one PPP tier.

    Interferers lie in [serving_distance, upper] with unit-mean exponential
    gains and the serving link's exponent. In the ``"campbell"`` form the
    exponent is int 2 pi lambda x c / (x^alpha + c) dx with
    c = xi d^alpha T P kappa^2 / N0; ``"as_written"`` uses the radial factor
    alpha x^alpha and omits the 1/N0 scaling. Vectorised over distance.
    """
    form = cfg.laplace_form if form is None else form
    d = np.atleast_1d(np.asarray(serving_distance, dtype=float))
    out = np.ones(d.shape)
    if interferer_density <= 0 or threshold <= 0:
        return out if np.ndim(serving_distance) else float(out[0])
    a = serving_alpha
    c = xi_value * d ** a * threshold * interferer_power * cfg.kappa2
    if form == "campbell":
        c = c / cfg.noise_power
    live = (d < upper) & (c > 0)
    if np.any(live):
        dl, cl = d[live], c[live]
        width = upper - dl

        if form == "campbell":
            def f(u):
                x = dl + width * u
                return width * 2 * math.pi * interferer_density * x * cl / (x ** a + cl)
        else:
            def f(u):
                x = dl + width * u
                return width * 2 * math.pi * interferer_density * a * x ** a * cl / (x ** a + cl)

        val, err = integrate.quad_vec(f, 0.0, 1.0, epsrel=LAPLACE_RTOL, epsabs=1e-13)
        if not np.all(np.isfinite(val)):
            raise ConvergenceError("Laplace integral is not finite")
        out[live] = np.exp(-val)
    return out if np.ndim(serving_distance) else float(out[0])


def user_outage(tier, serving_distance, serving_alpha, threshold, cfg,
                mode=Mode.SINR, other_tier=True):
    """Conditional outage of a user at ``serving_distance`` from its BS.

    Macro-served users are averaged over the groups, weighted by K_g / K.
    ``other_tier=False`` keeps only same-tier interference (the cases where
    the other tier has no BS).
    """
    tier = Tier(tier)
    mode = Mode(mode)
    d = np.asarray(serving_distance, dtype=float)
    groups = range(len(cfg.groups)) if tier is Tier.MACRO else [None]
    weights = cfg.group_weights() if tier is Tier.MACRO else [1.0]
    success = np.zeros(d.shape)
    for g, w in zip(groups, weights):
        x = xi(cfg, tier, g)
        term = np.exp(-x * d ** serving_alpha * threshold)
        if mode is Mode.SINR:
            same_density = cfg.macro.density if tier is Tier.MACRO else cfg.pico.density
            same_power = cfg.macro_power if tier is Tier.MACRO else cfg.pico_power
            same_upper = cfg.macro.disc_radius if tier is Tier.MACRO else cfg.pico.disc_radius
            term = term * laplace_interference(d, serving_alpha, threshold, x, same_density,
                                               same_power, same_upper, cfg)
            if other_tier:
                od = cfg.pico.density if tier is Tier.MACRO else cfg.macro.density
                op = cfg.pico_power if tier is Tier.MACRO else cfg.macro_power
                ou = cfg.pico.disc_radius if tier is Tier.MACRO else cfg.macro.disc_radius
                term = term * laplace_interference(d, serving_alpha, threshold, x, od, op,
                                                   ou, cfg)
        success = success + w * term
    out = 1.0 - success
    return out if out.ndim else float(out)


def no_bs_probability(cfg):
    return math.exp(-cfg.macro.mean_count() - cfg.pico.mean_count())


def total_outage(threshold, cfg, mode=Mode.SINR, rtol=1e-4):
    """Total outage and its (no-BS, macro-served, pico-served) components."""
    mode = Mode(mode)
    p0 = no_bs_probability(cfg)
    no_pico = math.exp(-cfg.pico.mean_count())
    no_macro = math.exp(-cfg.macro.mean_count())

    def region_term(case, tier):
        if tier is Tier.MACRO:
            alpha = cfg.macro.alpha_los if case.macro_los else cfg.macro.alpha_nlos
            fn = lambda m, s: user_outage(tier, m, alpha, threshold, cfg, mode)  # noqa: E731
        else:
            alpha = cfg.pico.alpha_los if case.pico_los else cfg.pico.alpha_nlos
            fn = lambda m, s: user_outage(tier, s, alpha, threshold, cfg, mode)  # noqa: E731
        return integrate_over_region(case, tier, cfg, fn, rtol=rtol)

    def single_term(tier, los):
        params = cfg.macro if tier is Tier.MACRO else cfg.pico
        alpha = params.alpha_los if los else params.alpha_nlos
        fn = lambda d: user_outage(tier, d, alpha, threshold, cfg, mode,  # noqa: E731
                                   other_tier=False)
        return integrate_marginal(tier, los, cfg, fn, rtol=rtol)

    p1 = p2 = 0.0
    if cfg.macro.density > 0 and cfg.pico.density > 0:
        for case in Case:
            p1 += region_term(case, Tier.MACRO)
            p2 += region_term(case, Tier.PICO)
    if cfg.macro.density > 0:
        p1 += no_pico * sum(single_term(Tier.MACRO, los) for los in (True, False))
    if cfg.pico.density > 0:
        p2 += no_macro * sum(single_term(Tier.PICO, los) for los in (True, False))
    return p0 + p1 + p2, (p0, p1, p2)


def outage_curve(cfg, thresholds_db, mode=Mode.SINR, scenario=Scenario.TWO_TIER,
                 rtol=1e-4):
    """Total outage on a dB threshold grid; asserts monotonicity in T."""
    thresholds_db = np.asarray(thresholds_db, dtype=float)
    if thresholds_db.size == 0:
        raise ValueError("threshold grid is empty")
    scen_cfg = scenario_config(cfg, scenario)
    totals, comps = [], []
    for t_db in thresholds_db:
        total, parts = total_outage(10.0 ** (t_db / 10.0), scen_cfg, mode, rtol)
        totals.append(total)
        comps.append(parts)
    values = np.clip(np.array(totals), 0.0, 1.0)
    comps = np.array(comps)
    if not cfg.include_nobs:
        p0 = comps[0, 0]
        values = (values - p0) / (1.0 - p0)
    order = np.argsort(thresholds_db)
    if np.any(np.diff(values[order]) < -1e-6):
        raise ConvergenceError("analytic outage curve is not monotone in the threshold")
    source = Source.ANALYTIC_SINR if Mode(mode) is Mode.SINR else Source.ANALYTIC_SNR
    return OutageCurve(thresholds_db, values, source, Scenario(scenario), comps)
