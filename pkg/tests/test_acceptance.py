"""Acceptance criteria, each checked at its stated tolerance.

Every test prints one ``[PASS]``/``[FAIL]`` line; the lines are repeated in
the pytest terminal summary under "acceptance criteria".
"""

import math

import numpy as np
import pytest
from scipy import stats

from conftest import record
from jsdm_outage.analytic import Mode, Scenario, laplace_interference, no_bs_probability, \
    outage_curve, xi
from jsdm_outage.channel import complex_normal
from jsdm_outage.config import DEFAULTS
from jsdm_outage.experiments import FIG1_GRID, FIG3_RATIOS
from jsdm_outage.montecarlo import SimPlan, association_counts, run, sweep_density_ratio
from jsdm_outage.precoding import precoder_for
from jsdm_outage.regions import (Case, Tier, boundary_margin, case_rectangle,
                                 oracle_membership, region_masks, region_membership)

DROPS = 10_000
SEED = 2024
GRID = np.array(FIG1_GRID)


@pytest.fixture(scope="module")
def analytic():
    return {(scen, mode): outage_curve(DEFAULTS, GRID, mode, scen).values
            for scen in Scenario for mode in Mode}


@pytest.fixture(scope="module")
def simulated():
    return {scen: run(SimPlan(DROPS, SEED, FIG1_GRID, scen), DEFAULTS) for scen in Scenario}


@pytest.fixture(scope="module")
def simulated_nss():
    return run(SimPlan(DROPS, SEED, FIG1_GRID, Scenario.TWO_TIER, precoding_mode="none"),
               DEFAULTS)


def test_1_analysis_simulation_agreement(analytic, simulated):
    ana = analytic[(Scenario.TWO_TIER, Mode.SINR)]
    sim = simulated[Scenario.TWO_TIER]
    tol = np.maximum(0.03, 2 * sim.ci_half_width)
    gap = np.abs(ana - sim.outage)
    ok = bool(np.all(gap <= tol))
    worst = int(np.argmax(gap - tol))
    record("A1 analysis-simulation agreement", ok,
           f"max |analytic - MC| = {gap.max():.4f} over {GRID.size} thresholds, "
           f"worst slack {gap[worst] - tol[worst]:+.4f} at {GRID[worst]:g} dB")
    assert ok


def test_2_two_tier_gain(analytic, simulated):
    a_two = analytic[(Scenario.TWO_TIER, Mode.SINR)]
    a_one = analytic[(Scenario.ONE_TIER, Mode.SINR)]
    s_two = simulated[Scenario.TWO_TIER].outage
    s_one = simulated[Scenario.ONE_TIER].outage
    ok_a = bool(np.all(a_two <= a_one))
    ok_s = bool(np.all(s_two <= s_one))
    record("A2 two-tier gain", ok_a and ok_s,
           f"analytic min margin {np.min(a_one - a_two):.4f}, "
           f"simulated min margin {np.min(s_one - s_two):.4f}")
    assert ok_a and ok_s


def test_3_noise_limited(analytic, simulated):
    gaps = {}
    for scen in Scenario:
        gaps[f"{scen.value} analytic"] = np.max(np.abs(
            analytic[(scen, Mode.SINR)] - analytic[(scen, Mode.NOISE_LIMITED)]))
        sim = simulated[scen]
        gaps[f"{scen.value} simulated"] = np.max(np.abs(sim.outage - sim.snr_outage))
    ok = all(g < 0.02 for g in gaps.values())
    record("A3 SINR vs SNR outage", ok,
           ", ".join(f"{k} {v:.4f}" for k, v in gaps.items()))
    assert ok


def test_4_zero_forcing_benefit(simulated, simulated_nss):
    zf = simulated[Scenario.TWO_TIER].outage
    nss = simulated_nss.outage
    ok = bool(np.all(zf <= nss))
    record("A4 ZF vs no second stage", ok,
           f"min (NSS - ZF) {np.min(nss - zf):.4f}, max {np.max(nss - zf):.4f}")
    assert ok


def test_5_optimal_density_ratio():
    rows = sweep_density_ratio(DEFAULTS, FIG3_RATIOS, threshold_db=0.0)
    vals = np.array([r[1] for r in rows])
    k = int(np.argmin(vals))
    ok = 0 < k < len(vals) - 1 and vals[k] < vals[0] and vals[k] < vals[-1]
    record("A5 interior optimum of density ratio", ok,
           f"min {vals[k]:.6f} at ratio {rows[k][0]:.4g}; "
           f"endpoints {vals[0]:.4f} (ratio {rows[0][0]:.4g}), "
           f"{vals[-1]:.6f} (ratio {rows[-1][0]:.4g})")
    assert ok


def test_6_no_bs_mass():
    p0 = no_bs_probability(DEFAULTS)
    n = 100_000
    counts = association_counts(DEFAULTS, n, SEED)
    frac = counts["nobs"] / n
    sigma = math.sqrt(p0 * (1 - p0) / n)
    # exact value is exp(-0.76 pi) = 0.091849; the quoted 0.0919 is that
    # number rounded twice, so it is matched to one unit in its last digit
    exact = math.exp(-0.76 * math.pi)
    ok_a = abs(p0 - exact) < 1e-15 and abs(p0 - 0.0919) <= 1e-4
    ok_s = abs(frac - p0) <= 3 * sigma
    record("A6 no-BS mass", ok_a and ok_s,
           f"analytic {p0:.6f} (exp(-0.76 pi) = {exact:.6f}), "
           f"MC {frac:.5f} ({(frac - p0) / sigma:+.2f} sigma, n={n})")
    assert ok_a and ok_s


def _random_config(rng):
    a_los = rng.choice([2.0, 2.5, 3.0, 4.0])
    a_nlos = max(a_los, rng.choice([3.0, 3.5, 4.0]))
    cfg = DEFAULTS.with_tier("macro", alpha_los=a_los, alpha_nlos=a_nlos,
                            los_radius=rng.uniform(5, 60), disc_radius=rng.uniform(80, 400))
    return cfg.with_tier("pico", alpha_los=a_los, alpha_nlos=a_nlos,
                         los_radius=rng.uniform(5, 40), disc_radius=rng.uniform(45, 120),
                         tx_power=10 ** rng.uniform(-3, 2) * cfg.macro_power)


def test_7_region_correctness():
    rng = np.random.default_rng(SEED)
    n_params, per = 1000, 100
    disagree = {(c, t): 0 for c in Case for t in Tier}
    checked = {(c, t): 0 for c in Case for t in Tier}
    for _ in range(n_params):
        cfg = _random_config(rng)
        for case in Case:
            (m0, m1), (s0, s1) = case_rectangle(case, cfg)
            m = rng.uniform(m0, m1, per)
            s = rng.uniform(s0, s1, per)
            clear = boundary_margin(case, cfg, m, s) > 1e-9
            for tier in Tier:
                a = region_membership(case, tier, cfg, m, s)
                b = oracle_membership(case, tier, cfg, m, s)
                disagree[(case, tier)] += int(np.count_nonzero((a != b) & clear))
                checked[(case, tier)] += per
    _, _, masks, diff = region_masks(DEFAULTS, 201)
    mm, ss = np.meshgrid(np.linspace(0, DEFAULTS.macro.disc_radius, 201),
                         np.linspace(0, DEFAULTS.pico.disc_radius, 201), indexing="ij")
    partition = True
    for case in Case:
        (m0, m1), (s0, s1) = case_rectangle(case, DEFAULTS)
        inside = (mm > m0) & (mm < m1) & (ss > s0) & (ss < s1)
        inside &= boundary_margin(case, DEFAULTS, mm, ss) > 1e-9
        total = masks[(case, Tier.MACRO)] + masks[(case, Tier.PICO)]
        partition &= bool(np.all(total[inside] == 1))
    ok = sum(disagree.values()) == 0 and not diff.any() and partition
    record("A7 region correctness", ok,
           f"{min(checked.values())} draws per region, "
           f"{sum(disagree.values())} disagreements, oracle-diff cells {int(diff.sum())}, "
           f"partition {'holds' if partition else 'broken'}")
    assert ok


def test_8_precoding_invariants():
    pre = precoder_for(DEFAULTS)
    rng = np.random.default_rng(SEED)
    worst_cross = 0.0
    for _ in range(500):
        ps = pre.draw(rng)
        for hbar, p in zip(ps.effective_channels, ps.zf_columns):
            g = hbar.conj().T @ p
            worst_cross = max(worst_cross, np.abs(g - np.diag(np.diag(g))).max())
    worst_orth = max(np.abs(b.conj().T @ b - np.eye(b.shape[1])).max()
                     for b in pre.first_stage)
    pvals = []
    for mod, b, c in zip(pre.models, pre.first_stage, pre.norms):
        w = complex_normal(rng, (mod.effective_rank, 100_000))
        z = (b.conj().T @ (mod.sqrt_factor() @ w)) / c[:, None]
        x = math.sqrt(2.0) * np.concatenate([z[0].real, z[0].imag])
        pvals.append(stats.kstest(x, "norm").pvalue)
    ok = worst_cross < 1e-10 and worst_orth < 1e-10 and min(pvals) > 0.01
    record("A8 precoding invariants", ok,
           f"max cross term {worst_cross:.2e}, max |B^H B - I| {worst_orth:.2e}, "
           f"KS p-values {', '.join(f'{p:.3f}' for p in pvals)}")
    assert ok


def _laplace_mc(d, s, lam, power, k2, upper, rng, n=400_000):
    counts = rng.poisson(lam * math.pi * (upper ** 2 - d ** 2), n)
    x = np.sqrt(d ** 2 + (upper ** 2 - d ** 2) * rng.random(counts.sum()))
    terms = power * k2 * rng.exponential(1.0, x.size) * x ** -4.0
    interference = np.bincount(np.repeat(np.arange(n), counts), weights=terms, minlength=n)
    return float(np.mean(np.exp(-s * interference)))


def _two_sig_figs(a, b):
    return abs(a - b) <= 0.5 * 10.0 ** (math.floor(math.log10(abs(a))) - 1)


def test_9_laplace_oracle():
    cfg = DEFAULTS
    rng = np.random.default_rng(SEED)
    points = [(Tier.MACRO, 50.0, 0.0, "macro"), (Tier.PICO, 20.0, 20.0, "pico"),
              (Tier.MACRO, 30.0, 10.0, "pico")]
    ok, parts = True, []
    for serving, d, t_db, source in points:
        t = 10 ** (t_db / 10)
        x = xi(cfg, serving, 0)
        tier = cfg.macro if source == "macro" else cfg.pico
        power = cfg.macro_power if source == "macro" else cfg.pico_power
        a = laplace_interference(d, 4.0, t, x, tier.density, power, tier.disc_radius, cfg)
        m = _laplace_mc(d, x * d ** 4 * t / cfg.noise_power, tier.density, power,
                        cfg.kappa2, tier.disc_radius, rng)
        ok &= _two_sig_figs(a, m)
        parts.append(f"{serving.value}@{d:g}m/{t_db:g}dB/{source}: {a:.4f} vs {m:.4f}")
    record("A9 Laplace functional oracle", ok, "; ".join(parts))
    assert ok
