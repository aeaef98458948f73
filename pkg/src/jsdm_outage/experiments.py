"""Figure drivers and CSV emission.

Every CSV starts with ``#`` metadata lines (seed, config hash, drops) followed
by a header row; floats are written with ``repr`` so they round-trip exactly.
"""

from __future__ import annotations

import csv
import os
from pathlib import Path

import numpy as np

from .analytic import Mode, Scenario, outage_curve
from .montecarlo import SimPlan, run, sweep_density_ratio
from .regions import region_masks

OUT_ENV = "JSDM_OUTAGE_OUT"
FIG1_GRID = tuple(float(t) for t in range(-10, 31))
FIG3_RATIOS = tuple(10.0 * np.logspace(-1, 3, 17))


def output_dir(out=None):
    path = Path(out or os.environ.get(OUT_ENV) or "results")
    path.mkdir(parents=True, exist_ok=True)
    return path


def _fmt(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


def write_csv(path, header, rows, meta):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        for key, value in meta.items():
            fh.write(f"# {key}={value}\n")
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return path


def read_csv(path):
    """Return (meta dict, header, float array) of a file written by write_csv."""
    meta, lines = {}, []
    with Path(path).open() as fh:
        for line in fh:
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
            else:
                lines.append(line)
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    return meta, header, np.array([[float(x) for x in r] for r in body])


def check_digest(meta, cfg):
    if meta.get("config_hash") != cfg.digest():
        raise ValueError("config hash mismatch: file was produced by another config")


def _meta(cfg, seed, drops=None, **extra):
    meta = {"seed": seed, "config_hash": cfg.digest()}
    if drops is not None:
        meta["drops"] = drops
    meta.update(extra)
    return meta


def analyze(cfg, thresholds_db, out_dir):
    """Analytic SINR and SNR curves for both scenarios."""
    cols, header = [], ["threshold_db"]
    for scen in Scenario:
        for mode in Mode:
            curve = outage_curve(cfg, thresholds_db, mode, scen)
            cols.append(curve.values)
            header.append(f"{scen.value}_analytic_{mode.value}")
    rows = np.column_stack([thresholds_db] + cols)
    return [write_csv(Path(out_dir) / "analyze.csv", header, rows, _meta(cfg, cfg.seed))]


def simulate(cfg, thresholds_db, drops, seed, out_dir, scenario=Scenario.TWO_TIER,
             precoding_mode="zf", workers=1):
    res = run(SimPlan(drops, seed, tuple(thresholds_db), scenario,
                      precoding_mode=precoding_mode), cfg, workers)
    rows = np.column_stack([thresholds_db, res.outage, res.ci_half_width,
                            res.snr_outage, res.snr_ci_half_width])
    header = ["threshold_db", "sinr_outage", "sinr_ci", "snr_outage", "snr_ci"]
    meta = _meta(cfg, seed, drops, scenario=Scenario(scenario).value,
                 nobs=res.counts["nobs"], macro=res.counts["macro"],
                 pico=res.counts["pico"], failed=res.counts["failed"],
                 mean_inr=repr(res.mean_inr))
    return [write_csv(Path(out_dir) / f"simulate_{Scenario(scenario).value}.csv",
                      header, rows, meta)]


def figure1(cfg, drops, seed, out_dir, workers=1):
    grid = np.array(FIG1_GRID)
    header, cols = ["threshold_db"], []
    ci_header, ci_cols = [], []
    for scen in Scenario:
        ana = outage_curve(cfg, grid, Mode.SINR, scen)
        sim = run(SimPlan(drops, seed, FIG1_GRID, scen), cfg, workers)
        header += [f"{scen.value}_analytic", f"{scen.value}_simulated"]
        cols += [ana.values, sim.outage]
        ci_header.append(f"{scen.value}_simulated_ci")
        ci_cols.append(sim.ci_half_width)
    rows = np.column_stack([grid] + cols + ci_cols)
    return [write_csv(Path(out_dir) / "fig1.csv", header + ci_header, rows,
                      _meta(cfg, seed, drops))]


def figure2(cfg, drops, seed, out_dir, workers=1):
    grid = np.array(FIG1_GRID)
    header, cols = ["threshold_db"], []
    for scen in Scenario:
        sinr = outage_curve(cfg, grid, Mode.SINR, scen)
        snr = outage_curve(cfg, grid, Mode.NOISE_LIMITED, scen)
        zf = run(SimPlan(drops, seed, FIG1_GRID, scen, precoding_mode="zf"), cfg, workers)
        nss = run(SimPlan(drops, seed, FIG1_GRID, scen, precoding_mode="none"), cfg, workers)
        p = scen.value
        header += [f"{p}_analytic_sinr", f"{p}_analytic_snr", f"{p}_simulated_sinr",
                   f"{p}_simulated_snr", f"{p}_simulated_sinr_no_second_stage"]
        cols += [sinr.values, snr.values, zf.outage, zf.snr_outage, nss.outage]
    rows = np.column_stack([grid] + cols)
    return [write_csv(Path(out_dir) / "fig2.csv", header, rows, _meta(cfg, seed, drops))]


def figure3(cfg, drops, seed, out_dir, ratios=FIG3_RATIOS, threshold_db=0.0,
            simulate=True, workers=1):
    ana = sweep_density_ratio(cfg, ratios, threshold_db, "analytic")
    header = ["ratio", "analytic"]
    cols = [np.array(ratios), np.array([r[1] for r in ana])]
    if simulate:
        sim = sweep_density_ratio(cfg, ratios, threshold_db, "simulated", drops, seed,
                                  workers=workers)
        header += ["simulated", "simulated_ci"]
        cols += [np.array([r[1] for r in sim]), np.array([r[2] for r in sim])]
    return [write_csv(Path(out_dir) / "fig3.csv", header, np.column_stack(cols),
                      _meta(cfg, seed, drops if simulate else None,
                            threshold_db=threshold_db))]


def run_figure(figure_id, cfg, out_dir, drops=10_000, seed=None, workers=1):
    seed = cfg.seed if seed is None else seed
    fid = str(figure_id).lower().removeprefix("fig")
    if fid == "1":
        return figure1(cfg, drops, seed, out_dir, workers)
    if fid == "2":
        return figure2(cfg, drops, seed, out_dir, workers)
    if fid == "3":
        return figure3(cfg, drops, seed, out_dir, workers=workers)
    raise ValueError(f"unknown figure {figure_id!r}")


def dump_regions(cfg, grid_resolution, out_dir):
    """One 0/1 CSV grid per region plus the oracle-difference mask.

    Rows index r_m, columns index r_s; the first row and column carry the
    grid coordinates.
    """
    m, s, masks, diff = region_masks(cfg, grid_resolution)
    paths = []
    header = ["r_m\\r_s"] + [repr(float(v)) for v in s]

    def emit(name, mask):
        rows = [[float(mv)] + [int(x) for x in row] for mv, row in zip(m, mask)]
        paths.append(write_csv(Path(out_dir) / name, header, rows, _meta(cfg, cfg.seed)))

    for (case, tier), mask in masks.items():
        emit(f"region_{case.name}_{tier.value}.csv", mask)
    emit("region_oracle_diff.csv", diff)
    return paths
