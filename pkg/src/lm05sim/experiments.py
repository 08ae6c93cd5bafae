"""Experiment drivers behind the CLI: single sessions, angle sweeps, the
imperfection band and the information threshold.

Each driver returns its data and, given an output directory, writes it.
Output is a pure function of the configuration: per-point seeds are derived
from the base seed and the point index, and rows are assembled in index
order whatever the number of worker processes.
"""
from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Iterable, Optional, Sequence

import numpy as np

from .channel_noise import PHI_MAX, AttackSpec, NoiseModel
from .config import ExperimentConfig, SweepGrid, BandSpec, serialize
from .eavesdrop import predict
from .infosec import Averaging, InfoReport, curve_table, find_threshold, info_curves, info_from_partials
from .protocol import QberReport, SessionConfig, run_session, sift_and_estimate
from .quantum_core import Basis

HIST_BIN = 0.005
HIST_MAX = 0.6

SWEEP_COLUMNS = (
    "index", "phi", "seed", "qab_m", "qab_s", "q1z", "q1x", "q2z", "q2x", "qab_z", "qab_x",
    "pred_qab_s", "pred_qab_x", "pred_q_ae", "i_ab", "i_ae", "i_be", "margin",
    "i_ab_meas", "i_ae_meas", "i_be_meas",
)
BAND_COLUMNS = ("trial", "delta", "xi", "phi_forward", "phi_backward", "qab_s", "qab_m")
HIST_COLUMNS = ("qab_s_lo", "qab_m_lo", "count", "normalized")
CURVE_COLUMNS = ("phi", "q_ab_s", "i_ab", "i_ae", "i_be", "margin")


class OutputError(OSError):
    pass


def derived_seed(base: int, index: int) -> int:
    return int(np.random.SeedSequence([base, index]).generate_state(1, np.uint64)[0])


# --- output -----------------------------------------------------------------

def prepare_output_dir(path: str) -> str:
    """Create ``path`` and prove it is writable; raises OutputError otherwise."""
    try:
        os.makedirs(path, exist_ok=True)
        probe = os.path.join(path, ".lm05sim-write-test")
        with open(probe, "w") as fh:
            fh.write("")
        os.remove(probe)
    except OSError as exc:
        raise OutputError(f"output directory {path!r} is not writable: {exc.strerror}") from None
    return path


def _meta(cfg: ExperimentConfig, command: str) -> dict:
    return {"command": command, "seed": cfg.session.seed, "config_sha256": cfg.digest()}


def _cell(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def write_table(path: str, columns: Sequence[str], rows: Iterable[Sequence], meta: dict,
                fmt: str = "csv") -> str:
    rows = list(rows)
    if fmt == "json":
        path = os.path.splitext(path)[0] + ".json"
        doc = {"meta": meta, "columns": list(columns),
               "rows": [dict(zip(columns, [_json_value(v) for v in row])) for row in rows]}
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        return path
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
    return path


def _json_value(v):
    if isinstance(v, (np.floating, float)):
        return None if math.isnan(v) else float(v)
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_json(path: str, payload: dict, meta: dict) -> str:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump({"meta": meta, **payload}, fh, indent=1, default=_json_value)
        fh.write("\n")
    return path


# --- run ----------------------------------------------------------------------

@dataclass(frozen=True)
class RunResult:
    qber: QberReport
    info: InfoReport
    info_measured: Optional[InfoReport]


def measured_info(report: QberReport, axis: Optional[Basis],
                  convention: Averaging = Averaging.ACTUAL_ATTACK) -> Optional[InfoReport]:
    """Information curves evaluated at the measured partial QBERs."""
    disturbed = Basis.X if axis in (None, Basis.Z) else Basis.Z
    invariant = Basis.Z if disturbed == Basis.X else Basis.X
    rates = [report.partial(leg, b) for b in (disturbed, invariant) for leg in (1, 2)]
    if any(r is None for r in rates):
        return None
    q1d, q2d, q1i, q2i = (r.value for r in rates)
    return info_from_partials(q1d, q2d, q1i, q2i, convention)


def cmd_run(cfg: ExperimentConfig, out_dir: Optional[str] = None) -> RunResult:
    log = run_session(cfg.session, cfg.noise)
    report = sift_and_estimate(log)
    result = RunResult(report, info_curves(cfg.noise.attack, cfg.eve_averaging),
                       measured_info(report, cfg.noise.attack.axis, cfg.eve_averaging))
    if out_dir is not None:
        meta = _meta(cfg, "run")
        with open(os.path.join(out_dir, "transcript.csv"), "w", encoding="utf-8", newline="") as fh:
            fh.write("# " + " ".join(f"{k}={v}" for k, v in meta.items()) + "\n")
            log.write_csv(fh)
        payload = {
            "qber": report.to_dict(),
            "info": result.info.to_dict(),
            "info_measured": None if result.info_measured is None else result.info_measured.to_dict(),
        }
        if cfg.output_format == "json":
            write_json(os.path.join(out_dir, "report.json"), payload, meta)
        else:
            rows = sorted(_flatten(payload).items())
            write_table(os.path.join(out_dir, "report.csv"), ("key", "value"), rows, meta)
    return result


def _flatten(d: dict, prefix: str = "") -> dict:
    flat = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            flat.update(_flatten(v, key + "."))
        else:
            flat[key] = v
    return flat


# --- sweep --------------------------------------------------------------------

def _value(rate) -> float:
    return math.nan if rate is None else rate.value


def _sweep_point(args) -> tuple:
    index, phi, seed, grid, cfg = args
    axis = cfg.noise.attack.axis if cfg.noise.attack.axis is not None else Basis.Z
    attack = AttackSpec(axis, phi, phi)
    noise = replace(cfg.noise, attack=attack)
    session = SessionConfig(grid.rounds, cfg.session.control_prob, seed)
    report = sift_and_estimate(run_session(session, noise))
    pred = predict(attack)
    info = info_curves(attack, cfg.eve_averaging)
    meas = measured_info(report, axis, cfg.eve_averaging)

    def opt(v):
        return math.nan if v is None else v

    return (
        index, phi, seed, opt(report.qab_m), opt(report.qab_s),
        _value(report.q1z), _value(report.q1x), _value(report.q2z), _value(report.q2x),
        _value(report.qab_z), _value(report.qab_x),
        0.5 * (pred.qab_z + pred.qab_x), pred.qab_x if axis == Basis.Z else pred.qab_z, pred.q_ae,
        info.i_ab, info.i_ae, info.i_be, info.margin,
        math.nan if meas is None else meas.i_ab,
        math.nan if meas is None else meas.i_ae,
        math.nan if meas is None else meas.i_be,
    )


def _map(fn, tasks, jobs: int):
    if jobs <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(fn, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))


def cmd_sweep(cfg: ExperimentConfig, out_dir: Optional[str] = None, jobs: int = 1) -> list[tuple]:
    grid = cfg.sweep if cfg.sweep is not None else SweepGrid()
    for phi in grid.angles():
        if not (0.0 <= phi <= PHI_MAX + 1e-12):
            raise ValueError(f"sweep angle {phi!r} outside [0, pi/2]")
    tasks = [(i, min(phi, PHI_MAX), derived_seed(cfg.session.seed, i), grid, cfg)
             for i, phi in enumerate(grid.angles())]
    rows = _map(_sweep_point, tasks, jobs)
    if out_dir is not None:
        write_table(os.path.join(out_dir, "sweep.csv"), SWEEP_COLUMNS, rows,
                    _meta(cfg, "sweep"), cfg.output_format)
    return rows


# --- band ---------------------------------------------------------------------

def band_trial(index: int, cfg: ExperimentConfig, band: BandSpec) -> tuple:
    """One scatter point: random imperfections and attack angles, short session."""
    rng = np.random.default_rng(np.random.SeedSequence([cfg.session.seed, index]))
    delta = rng.uniform(0.0, band.delta_max)
    xi = rng.uniform(0.0, band.xi_max)
    phi_f, phi_b = rng.uniform(0.0, PHI_MAX, 2)
    seed = int(rng.integers(0, 2**63))
    axis = cfg.noise.attack.axis if cfg.noise.attack.axis is not None else Basis.Z
    noise = replace(cfg.noise, attack=AttackSpec(axis, phi_f, phi_b), delta=delta, xi=xi)
    report = sift_and_estimate(
        run_session(SessionConfig(band.rounds_per_trial, cfg.session.control_prob, seed), noise))
    qab_s = math.nan if report.qab_s is None else report.qab_s
    qab_m = math.nan if report.qab_m is None else report.qab_m
    return (index, delta, xi, float(phi_f), float(phi_b), qab_s, qab_m)


def _band_block(args) -> list[tuple]:
    start, stop, cfg, band = args
    return [band_trial(i, cfg, band) for i in range(start, stop)]


def band_histogram(qab_s: np.ndarray, qab_m: np.ndarray) -> list[tuple]:
    """Non-empty 0.005 x 0.005 bins, counts normalized to the fullest bin."""
    ok = ~(np.isnan(qab_s) | np.isnan(qab_m))
    edges = np.linspace(0.0, HIST_MAX, int(round(HIST_MAX / HIST_BIN)) + 1)
    counts, _, _ = np.histogram2d(qab_s[ok], qab_m[ok], bins=(edges, edges))
    peak = counts.max() if counts.size and counts.max() > 0 else 1.0
    rows = []
    for i, j in zip(*np.nonzero(counts)):
        rows.append((float(edges[i]), float(edges[j]), int(counts[i, j]), float(counts[i, j] / peak)))
    return rows


def cmd_band(cfg: ExperimentConfig, out_dir: Optional[str] = None, jobs: int = 1,
             block: int = 2000) -> tuple[list[tuple], list[tuple]]:
    band = cfg.band if cfg.band is not None else BandSpec()
    tasks = [(s, min(s + block, band.n_trials), cfg, band) for s in range(0, band.n_trials, block)]
    rows = [row for chunk in _map(_band_block, tasks, jobs) for row in chunk]
    arr = np.array([(r[5], r[6]) for r in rows], dtype=float).reshape(-1, 2)
    hist = band_histogram(arr[:, 0], arr[:, 1])
    if out_dir is not None:
        meta = _meta(cfg, "band")
        write_table(os.path.join(out_dir, "band.csv"), BAND_COLUMNS, rows, meta, cfg.output_format)
        write_table(os.path.join(out_dir, "band_hist.csv"), HIST_COLUMNS, hist, meta, cfg.output_format)
    return rows, hist


# --- threshold ----------------------------------------------------------------

def cmd_threshold(cfg: ExperimentConfig, out_dir: Optional[str] = None) -> dict:
    results = {c: find_threshold(c) for c in Averaging}
    rows = []
    for conv, res in results.items():
        # the Alice-Bob / Alice-Eve gap changes sign at the crossing; the
        # one-way margin itself stays >= 0 whenever Bob-Eve is the smaller term
        diag = [math.nan] * 4
        if res.crossed:
            eps = 1e-3
            near = [info_curves(AttackSpec(Basis.Z, p, p), conv)
                    for p in (res.phi_star - eps, res.phi_star + eps)]
            diag = [near[0].i_ab - near[0].i_ae, near[1].i_ab - near[1].i_ae,
                    near[0].margin, near[1].margin]
        rows.append((conv.value, res.q_star, res.phi_star, res.iterations, int(res.monotone),
                     res.gap_at_bracket[0], res.gap_at_bracket[1], *diag))
    if out_dir is not None:
        meta = _meta(cfg, "threshold")
        write_table(os.path.join(out_dir, "threshold.csv"),
                    ("convention", "q_star", "phi_star", "iterations", "monotone",
                     "gap_lo", "gap_hi", "gap_below", "gap_above", "margin_below", "margin_above"),
                    rows, meta, cfg.output_format)
        grid = cfg.sweep.angles() if cfg.sweep is not None else np.linspace(0.0, PHI_MAX, 1001)
        write_table(os.path.join(out_dir, "curves.csv"), CURVE_COLUMNS,
                    curve_table(grid, cfg.eve_averaging), meta, cfg.output_format)
    return {"results": results, "rows": rows}
