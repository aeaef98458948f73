import math

import numpy as np
import pytest

from jsdm_outage.config import DEFAULTS
from jsdm_outage.geometry import (AssociationOutcome, NetworkRealization, ServingKind,
                                  associate, sample_realization, tier_from_positions)
from jsdm_outage.link import (LinkBudget, aggregate_interference, macro_served_sinr,
                              noise_power, pico_served_sinr)
from jsdm_outage.precoding import precoder_for


def _real(cfg, macro, pico):
    return NetworkRealization(tier_from_positions(macro, cfg.macro),
                              tier_from_positions(pico, cfg.pico))


def test_noise_power_values():
    assert noise_power(1e9, 10) == pytest.approx(10 ** (-10.4), rel=1e-12)
    assert noise_power(1e9, 10) == pytest.approx(3.981e-11, rel=1e-3)
    assert 10 * math.log10(noise_power(1.0, 0.0)) + 30 == pytest.approx(-174.0)
    ratio = 10 * math.log10(noise_power(2e9, 10) / noise_power(1e9, 10))
    assert ratio == pytest.approx(3.0103, abs=1e-4)
    with pytest.raises(ValueError):
        noise_power(0.0, 10)


def test_budget_properties():
    lb = LinkBudget(2.0, 0.5, 0.25, 1.0, 0.25)
    assert lb.interference == 1.0
    assert lb.sinr == 1.0
    assert lb.snr == 2.0


def test_aggregate_interference():
    assert aggregate_interference([], 1.0, 1.0, [], []) == 0.0
    v = aggregate_interference([10.0, 20.0], 2.0, 0.5, [2.0, 4.0], [1.0, 3.0])
    assert v == pytest.approx(2 * 0.5 * (1e-2 + 3 * 20.0 ** -4))


def test_lone_macro_has_no_interference(rng):
    cfg = DEFAULTS
    real = _real(cfg, [[30.0, 40.0]], np.empty((0, 2)))
    out = associate(real, cfg)
    assert out.kind is ServingKind.MACRO and out.serving_distance == pytest.approx(50.0)
    pre = precoder_for(cfg)
    lb = macro_served_sinr(real, out, pre.draw(rng), cfg, rng, precoder=pre)
    assert lb.interference_macro == 0.0 and lb.interference_pico == 0.0
    assert lb.self_interference < 1e-12 * lb.useful_power
    assert lb.sinr == pytest.approx(lb.snr, rel=1e-9)


def test_pico_useful_power_unit_fading(rng):
    cfg = DEFAULTS
    real = _real(cfg, np.empty((0, 2)), [[10.0, 0.0]])
    out = associate(real, cfg)
    lb = pico_served_sinr(real, out, cfg, rng, fading=1.0)
    # LOS at 10 m with alpha 4
    assert lb.useful_power == pytest.approx(cfg.pico_power * cfg.kappa2 * 1e-4)
    assert lb.interference == 0.0


def test_single_pico_interferer_term():
    cfg = DEFAULTS
    real = _real(cfg, [[150.0, 0.0]], [[20.0, 0.0], [0.0, 40.0]])
    out = associate(real, cfg)
    assert out.kind is ServingKind.PICO

    class FixedGain:
        def exponential(self, scale, size=None):
            return 1.0 if size is None else np.ones(size)

    lb = pico_served_sinr(real, out, cfg, FixedGain(), fading=1.0)
    k2 = cfg.kappa2
    assert lb.interference_pico == pytest.approx(cfg.pico_power * k2 * 40.0 ** -4)
    assert lb.interference_macro == pytest.approx(cfg.macro_power * k2 * 150.0 ** -4)


def test_analysis_match_drops_closer_interferers():
    cfg = DEFAULTS

    class FixedGain:
        def exponential(self, scale, size=None):
            return 1.0 if size is None else np.ones(size)

    # macro at 30 m outpowers the pico at 25 m but the pico is closer
    real = _real(cfg, [[30.0, 0.0]], [[0.0, 25.0]])
    out = associate(real, cfg)
    assert out.kind is ServingKind.MACRO
    pre = precoder_for(cfg)
    ps = pre.draw(np.random.default_rng(0))
    a = macro_served_sinr(real, out, ps, cfg, FixedGain(), mode="analysis_match")
    b = macro_served_sinr(real, out, ps, cfg, FixedGain(), mode="physical")
    assert a.interference_pico == 0.0
    assert b.interference_pico == pytest.approx(cfg.pico_power * cfg.kappa2 * 25.0 ** -4)


def test_wrong_kind_rejected(rng):
    cfg = DEFAULTS
    real = _real(cfg, [[30.0, 0.0]], np.empty((0, 2)))
    with pytest.raises(ValueError):
        pico_served_sinr(real, AssociationOutcome(ServingKind.MACRO, 0, 30.0, 4.0), cfg, rng)
    with pytest.raises(ValueError):
        macro_served_sinr(real, AssociationOutcome(ServingKind.PICO, 0, 30.0, 4.0),
                          None, cfg, rng)


def test_random_drops_snr_bounds_sinr(rng):
    cfg = DEFAULTS
    pre = precoder_for(cfg)
    seen = set()
    for _ in range(200):
        real = sample_realization(cfg, rng)
        out = associate(real, cfg)
        if out.kind is ServingKind.NO_BS:
            continue
        seen.add(out.kind)
        for mode in ("analysis_match", "physical"):
            if out.kind is ServingKind.MACRO:
                lb = macro_served_sinr(real, out, pre.draw(rng), cfg, rng, precoder=pre,
                                       mode=mode)
                assert lb.self_interference < 1e-10 * lb.useful_power
            else:
                lb = pico_served_sinr(real, out, cfg, rng, mode=mode)
            assert lb.snr >= lb.sinr > 0
    assert seen == {ServingKind.MACRO, ServingKind.PICO}


def test_no_second_stage_leaks_intra_group(rng):
    cfg = DEFAULTS
    real = _real(cfg, [[30.0, 40.0]], np.empty((0, 2)))
    out = associate(real, cfg)
    pre = precoder_for(cfg)
    ps = pre.draw(rng)
    lb = macro_served_sinr(real, out, ps, cfg, rng, precoding_mode="none")
    assert lb.self_interference > 0
    assert lb.sinr < lb.snr
