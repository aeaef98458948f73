"""Monte Carlo outage estimation over independent PPP drops.

Every drop owns a generator seeded by ``(seed, drop_index)``, so results do
not depend on how drops are split across worker processes.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytic import Mode, Scenario, outage_curve, scenario_config, total_outage
from .errors import JSDMError
from .geometry import ServingKind, associate, sample_realization
from .link import macro_served_sinr, pico_served_sinr
from .precoding import precoder_for

log = logging.getLogger(__name__)

MAX_ERROR_FRACTION = 1e-3
_KIND_CODE = {ServingKind.NO_BS: 0, ServingKind.MACRO: 1, ServingKind.PICO: 2}


@dataclass(frozen=True)
class SimPlan:
    num_drops: int
    seed: int
    thresholds_db: tuple
    scenario: Scenario = Scenario.TWO_TIER
    interference_mode: str | None = None  # None -> config value
    precoding_mode: str = "zf"  # "zf" or "none"

    def __post_init__(self):
        if self.num_drops < 1:
            raise ValueError("num_drops must be >= 1")
        t = np.asarray(self.thresholds_db, dtype=float)
        if t.size == 0 or np.any(np.diff(t) <= 0):
            raise ValueError("thresholds_db must be a nonempty ascending grid")
        object.__setattr__(self, "thresholds_db", tuple(float(x) for x in t))
        object.__setattr__(self, "scenario", Scenario(self.scenario))


@dataclass
class SimResult:
    thresholds_db: np.ndarray
    outage: np.ndarray
    ci_half_width: np.ndarray
    snr_outage: np.ndarray
    snr_ci_half_width: np.ndarray
    counts: dict
    mean_inr: float
    errors: int
    num_drops: int
    sinr: np.ndarray = field(repr=False, default=None)
    snr: np.ndarray = field(repr=False, default=None)
    kinds: np.ndarray = field(repr=False, default=None)


def simulate_drop(cfg, rng, precoding_mode="zf", mode=None):
    """One drop: returns (kind code, sinr, snr, interference-to-noise ratio)."""
    real = sample_realization(cfg, rng)
    out = associate(real, cfg)
    weights = cfg.group_weights()
    group = int(rng.choice(len(weights), p=weights))
    if out.kind is ServingKind.NO_BS:
        return 0, 0.0, 0.0, 0.0
    precoder = precoder_for(cfg)
    if out.kind is ServingKind.MACRO:
        ps = precoder.draw(rng)
        lb = macro_served_sinr(real, out, ps, cfg, rng, group=group, user=0,
                               precoding_mode=precoding_mode, precoder=precoder,
                               mode=mode)
    else:
        lb = pico_served_sinr(real, out, cfg, rng, precoder=precoder, mode=mode)
    return _KIND_CODE[out.kind], lb.sinr, lb.snr, lb.interference / lb.noise_power


def _run_chunk(args):
    cfg, seed, start, stop, precoding_mode, mode = args
    rows = np.zeros((stop - start, 4))
    for i, drop in enumerate(range(start, stop)):
        rng = np.random.default_rng([seed, drop])
        try:
            rows[i] = simulate_drop(cfg, rng, precoding_mode, mode)
        except (JSDMError, np.linalg.LinAlgError) as exc:
            log.warning("drop %d failed: %s", drop, exc)
            rows[i] = (-1, np.nan, np.nan, np.nan)
    return rows


def binomial_ci(p, n):
    return 1.96 * np.sqrt(p * (1.0 - p) / n)


def run(plan, cfg, workers=1, chunk=500):
    """Estimate SINR and SNR outage on ``plan.thresholds_db``."""
    sim_cfg = scenario_config(cfg, plan.scenario)
    precoder_for(sim_cfg)
    jobs = [(sim_cfg, plan.seed, a, min(a + chunk, plan.num_drops), plan.precoding_mode,
             plan.interference_mode) for a in range(0, plan.num_drops, chunk)]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_chunk, jobs))
    else:
        parts = [_run_chunk(j) for j in jobs]
    rows = np.vstack(parts)
    kinds = rows[:, 0].astype(int)
    failed = kinds < 0
    n_err = int(failed.sum())
    if n_err > MAX_ERROR_FRACTION * plan.num_drops:
        raise JSDMError(f"{n_err} of {plan.num_drops} drops failed; aborting run")
    ok = ~failed
    if not cfg.include_nobs:
        ok &= kinds != 0
    sinr, snr = rows[ok, 1], rows[ok, 2]
    n = int(ok.sum())
    t_lin = 10.0 ** (np.asarray(plan.thresholds_db) / 10.0)
    out = (sinr[:, None] < t_lin[None, :]).mean(axis=0)
    snr_out = (snr[:, None] < t_lin[None, :]).mean(axis=0)
    served = ok & (kinds > 0)
    counts = {"nobs": int(np.sum(kinds == 0)), "macro": int(np.sum(kinds == 1)),
              "pico": int(np.sum(kinds == 2)), "failed": n_err}
    mean_inr = float(rows[served, 3].mean()) if served.any() else 0.0
    return SimResult(np.asarray(plan.thresholds_db), out, binomial_ci(out, n), snr_out,
                     binomial_ci(snr_out, n), counts, mean_inr, n_err, n,
                     rows[:, 1], rows[:, 2], kinds)


def sweep_density_ratio(cfg, ratios, threshold_db=0.0, engine="analytic",
                        num_drops=10_000, seed=None, rtol=1e-7, workers=1):
    """Total outage versus lambda_pico / lambda_macro at a fixed threshold.

    Returns a list of ``(ratio, outage, ci_half_width)``; the half-width is 0
    for the analytic engine.
    """
    ratios = np.asarray(ratios, dtype=float)
    if np.any(np.diff(ratios) <= 0):
        raise ValueError("ratios must be ascending")
    seed = cfg.seed if seed is None else seed
    t_lin = 10.0 ** (threshold_db / 10.0)
    rows = []
    for ratio in ratios:
        c = cfg.with_tier("pico", density=cfg.macro.density * ratio)
        if engine == "analytic":
            total, parts = total_outage(t_lin, c, Mode.SINR, rtol=rtol)
            if not cfg.include_nobs:
                total = (total - parts[0]) / (1.0 - parts[0])
            rows.append((float(ratio), float(min(max(total, 0.0), 1.0)), 0.0))
        elif engine == "simulated":
            plan = SimPlan(num_drops, seed, (threshold_db,), Scenario.TWO_TIER)
            res = run(plan, c, workers=workers)
            rows.append((float(ratio), float(res.outage[0]), float(res.ci_half_width[0])))
        else:
            raise ValueError(f"unknown engine {engine!r}")
    return rows


def analytic_and_simulated(cfg, thresholds_db, num_drops, seed, scenario, workers=1):
    """Convenience pairing used by the figure drivers and acceptance tests."""
    ana = outage_curve(cfg, thresholds_db, Mode.SINR, scenario)
    sim = run(SimPlan(num_drops, seed, tuple(thresholds_db), scenario), cfg, workers)
    return ana, sim


def association_counts(cfg, num_drops, seed=None):
    """Serving-kind counts of ``num_drops`` geometry-only drops.

    Uses the same per-drop generators as :func:`run`, so the kinds agree
    drop for drop with a full simulation of the same seed.
    """
    seed = cfg.seed if seed is None else seed
    counts = {"nobs": 0, "macro": 0, "pico": 0}
    for drop in range(num_drops):
        rng = np.random.default_rng([seed, drop])
        counts[associate(sample_realization(cfg, rng), cfg).kind.value] += 1
    return counts


def expected_nobs(cfg):
    return math.exp(-cfg.macro.mean_count() - cfg.pico.mean_count())
