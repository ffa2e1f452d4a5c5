"""Command-line entry point: relax, propagate, sweep, analyze, export.

Owns all file layout conventions.  A run directory contains the canonical
config echo, the observable time series, the instantaneous spectrum, the
well trajectory table and optionally the density table and a final-state
checkpoint, all stamped with the config hash.  A sweep directory holds one
run directory per (point, variant) plus a shared relaxed state and a
summary table.  Sweep work is distributed over spawned worker processes;
outputs are byte-identical for any worker count because every task runs
with single-threaded kernels and fixed reduction orders.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from hashlib import sha256
from multiprocessing import get_context
from pathlib import Path

import numpy as np

from . import __version__, analysis, potential
from .analysis import AnalysisError
from .config import (
    ConfigError,
    ExperimentConfig,
    canonical_text,
    config_hash,
    derive_kinematics,
    parse_config,
    point_config,
    sweep_points,
    validate,
)
from .grid import build_grid
from .observables import energy_decomposition, evaluate_record, one_body_density
from .onebody import EigensolverError, OneBodySolver, classify
from .potential import fwhm_bounds, well_centers
from .storage import (
    StorageError,
    format_float,
    load_state,
    read_manifest,
    read_table,
    save_state,
    write_manifest,
    write_table,
)
from .twobody import (
    PropagationError,
    RelaxationError,
    TwoBodyWavefunction,
    propagate,
    relax_ground_state,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

TIMESERIES_FILE = "timeseries.tsv"
SPECTRUM_FILE = "spectrum.tsv"
TRAJECTORY_FILE = "trajectory.tsv"
DENSITY_FILE = "density.tsv"
SUMMARY_FILE = "summary.tsv"
STATE_FILE = "state.npz"
MANIFEST_FILE = "manifest.txt"
CONFIG_FILE = "config.txt"
REPORT_FILE = "analysis_report.txt"
N_POPULATIONS = 8


def well_fingerprint(config: ExperimentConfig) -> str:
    """Hash of everything the relaxed initial state depends on."""
    parts = (
        f"n={config.grid.n};x_min={format_float(config.grid.x_min)};"
        f"x_max={format_float(config.grid.x_max)};boundary={config.grid.boundary};"
        f"v0={format_float(config.V0)};mu0={format_float(config.mu0)};"
        f"g={format_float(config.g)}"
    )
    return sha256(parts.encode()).hexdigest()[:16]


def relax_config(config: ExperimentConfig) -> ExperimentConfig:
    """Initial-state protocol: second well off, no kinematics."""
    return replace(config, V0_prime=0.0, acceleration=None, v_final_inverse=None, sweep=None)


def _timeseries_columns(k: int) -> list[str]:
    cols = [
        "t", "com", "com_pos", "com_neg",
        "energy_total", "energy_kinetic", "energy_potential", "energy_interaction",
        "occ_under_barrier", "occ_over_barrier", "occ_untrapped",
        "untrapped_fraction", "entropy", "entropy_ratio", "norm_error",
    ]
    cols += [f"natpop_{i + 1}" for i in range(N_POPULATIONS)]
    cols += [f"occ_state_{j}" for j in range(k)]
    return cols


class RunRecorder:
    """Observer that accumulates all output rows for one run."""

    def __init__(self, grid, params, solver: OneBodySolver, write_density: bool):
        self.grid = grid
        self.params = params
        self.solver = solver
        self.write_density = write_density
        self.timeseries: list[list[float]] = []
        self.spectrum: list[list[float]] = []
        self.trajectory: list[list[float]] = []
        self.density_blocks: list[np.ndarray] = []

    def __call__(self, step: int, t: float, psi: np.ndarray) -> None:
        eig = self.solver.decompose(t)
        cls = classify(eig)
        record = evaluate_record(
            psi, self.grid, self.params, t, eig, cls, n_populations=N_POPULATIONS
        )
        sample = well_centers(self.params, t)
        row = [
            t, record.com, record.com_pos, record.com_neg,
            record.energy.total, record.energy.kinetic,
            record.energy.potential, record.energy.interaction,
            record.occ_under_barrier, record.occ_over_barrier, record.occ_untrapped,
            record.untrapped, record.entropy, record.entropy_ratio,
            math.nan,  # norm_error filled from the propagation log at write time
        ]
        row.extend(record.populations)
        row.extend(record.occupations)
        self.timeseries.append(row)
        self.spectrum.append([t, sample.d, eig.barrier, *eig.energies])

        left, right = fwhm_bounds(self.params, t)
        self.trajectory.append([
            t, sample.mu, sample.mu_prime, sample.d, eig.barrier,
            *(left if left is not None else (math.nan, math.nan)),
            *(right if right is not None else (math.nan, math.nan)),
        ])
        if self.write_density:
            rho = one_body_density(psi, self.grid)
            block = np.column_stack([np.full(self.grid.n, t), self.grid.points, rho])
            self.density_blocks.append(block)


def run_relax(config: ExperimentConfig, out_dir: Path, *, fft_workers: int = 1, resume: bool = False) -> Path:
    """Relax the initial state and write checkpoint, report and manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    state_path = out_dir / STATE_FILE
    rcfg = relax_config(config)
    rhash = config_hash(rcfg)
    fingerprint = well_fingerprint(config)
    manifest_path = out_dir / MANIFEST_FILE
    if resume and manifest_path.exists() and state_path.exists():
        entries = read_manifest(manifest_path)
        if entries.get("status") == "complete" and entries.get("config_hash") == rhash:
            return state_path

    started = time.perf_counter()
    grid = build_grid(config.grid)
    params = potential.WellParameters(
        V0=config.V0, V0_prime=0.0, alpha=config.alpha,
        mu0=config.mu0, mu0_prime=config.mu0_prime, a=0.0, g=config.g,
    )
    state, relax_energy, info = relax_ground_state(
        params, grid, config.relaxation, fft_workers=fft_workers
    )
    save_state(state_path, state.psi, 0.0, rhash, fingerprint)

    full_params = replace(params, V0_prime=config.V0_prime)
    full = energy_decomposition(state.psi, grid, full_params, 0.0)
    report = [
        f"# relaxation report (config {rhash})",
        f"relax_energy_single_well = {format_float(relax_energy)}",
        f"relax_steps = {info.steps}",
        f"relax_energy_delta_per_step = {format_float(info.energy_delta_per_step)}",
        f"energy_total_full = {format_float(full.total)}",
        f"energy_kinetic_full = {format_float(full.kinetic)}",
        f"energy_potential_full = {format_float(full.potential)}",
        f"energy_interaction_full = {format_float(full.interaction)}",
    ]
    (out_dir / "relax_report.txt").write_text("\n".join(report) + "\n")
    (out_dir / CONFIG_FILE).write_text(canonical_text(rcfg))
    write_manifest(manifest_path, {
        "kind": "relax",
        "status": "complete",
        "config_hash": rhash,
        "well_fingerprint": fingerprint,
        "code_version": __version__,
        "wall_seconds": f"{time.perf_counter() - started:.1f}",
        "file.state": STATE_FILE,
        "file.report": "relax_report.txt",
    })
    return state_path


def _check_state(config: ExperimentConfig, state_path: Path):
    grid = build_grid(config.grid)
    stored = load_state(state_path)
    if stored.psi.shape != (grid.n, grid.n):
        raise ConfigError(
            f"initial state grid {stored.psi.shape} does not match config n={grid.n}"
        )
    if stored.well_fingerprint != well_fingerprint(config):
        raise ConfigError(
            "initial state was relaxed for different wells/grid "
            f"(fingerprint {stored.well_fingerprint} != {well_fingerprint(config)})"
        )
    if stored.t != 0.0:
        raise ConfigError(f"initial state must be at t=0, got t={stored.t}")
    return grid, stored


def run_single(
    config: ExperimentConfig,
    state_path: Path,
    out_dir: Path,
    *,
    write_density: bool = False,
    snapshot: bool = False,
    fft_workers: int = 1,
) -> dict[str, str]:
    """Propagate one run from the relaxed state and write all outputs."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    started = time.perf_counter()
    grid, stored = _check_state(config, state_path)
    kin = derive_kinematics(config)
    params = potential.from_config(config, kin)
    solver = OneBodySolver(grid, params, config.eigensolver_count)
    recorder = RunRecorder(grid, params, solver, write_density)
    psi0 = TwoBodyWavefunction(psi=stored.psi, grid=grid)

    log = propagate(
        psi0, params, kin.t_f, config.dt, config.output_stride, recorder,
        fft_workers=fft_workers, collect_energy=False,
    )
    for row, drift in zip(recorder.timeseries, log.norm_errors):
        row[14] = drift

    chash = config_hash(config)
    meta = {
        "config_hash": chash,
        "code_version": __version__,
        "v_final_inverse": format_float(1.0 / kin.v_f),
        "acceleration": format_float(kin.a),
        "t_final": format_float(kin.t_f),
        "units": "dimensionless program units",
    }
    (out_dir / CONFIG_FILE).write_text(canonical_text(config))
    write_table(out_dir / TIMESERIES_FILE, meta,
                _timeseries_columns(config.eigensolver_count), recorder.timeseries)
    write_table(out_dir / SPECTRUM_FILE, meta,
                ["t", "separation", "barrier"] + [f"energy_{i}" for i in range(config.eigensolver_count)],
                recorder.spectrum)
    write_table(out_dir / TRAJECTORY_FILE, meta,
                ["t", "mu", "mu_prime", "separation", "barrier",
                 "fwhm_left_lo", "fwhm_left_hi", "fwhm_right_lo", "fwhm_right_hi"],
                recorder.trajectory)
    files = {
        "file.timeseries": TIMESERIES_FILE,
        "file.spectrum": SPECTRUM_FILE,
        "file.trajectory": TRAJECTORY_FILE,
        "file.config": CONFIG_FILE,
    }
    if write_density:
        write_table(out_dir / DENSITY_FILE, meta, ["t", "x", "density"],
                    np.vstack(recorder.density_blocks))
        files["file.density"] = DENSITY_FILE
    if snapshot:
        save_state(out_dir / STATE_FILE, log.final.psi, kin.t_f, chash, well_fingerprint(config))
        files["file.final_state"] = STATE_FILE

    entries = {
        "kind": "run",
        "status": "complete",
        "config_hash": chash,
        "code_version": __version__,
        "grid": f"n={grid.n} {config.grid.boundary} [{config.grid.x_min}, {config.grid.x_max}]",
        "v_final_inverse": format_float(1.0 / kin.v_f),
        "acceleration": format_float(kin.a),
        "t_final": format_float(kin.t_f),
        "wall_seconds": f"{time.perf_counter() - started:.1f}",
        **files,
    }
    write_manifest(out_dir / MANIFEST_FILE, entries)
    return entries


def _run_complete(run_dir: Path, expected_hash: str) -> bool:
    manifest = run_dir / MANIFEST_FILE
    if not manifest.exists():
        return False
    try:
        entries = read_manifest(manifest)
    except (StorageError, OSError):
        return False
    if entries.get("status") != "complete" or entries.get("config_hash") != expected_hash:
        return False
    return all(
        (run_dir / value).exists()
        for key, value in entries.items()
        if key.startswith("file.")
    )


def _sweep_task(args) -> tuple[str, str, str]:
    """Run one (point, variant) task in a worker; never raises."""
    (config, v_inverse, single_well, run_dir, state_path,
     write_density, snapshot, fft_workers) = args
    os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
    label = f"v={v_inverse:.6f}"
    variant = "single_well" if single_well else "two_well"
    try:
        cfg = point_config(config, v_inverse, single_well)
        run_single(
            cfg, Path(state_path), Path(run_dir),
            write_density=write_density, snapshot=snapshot, fft_workers=fft_workers,
        )
        return label, variant, "complete"
    except Exception as exc:  # failures are recorded, the sweep continues
        try:
            Path(run_dir).mkdir(parents=True, exist_ok=True)
            write_manifest(Path(run_dir) / MANIFEST_FILE, {
                "kind": "run", "status": f"failed: {exc}", "config_hash": "",
            })
        except OSError:
            pass
        return label, variant, f"failed: {exc}"


def point_dir(sweep_dir: Path, v_inverse: float, single_well: bool) -> Path:
    variant = "single_well" if single_well else "two_well"
    return Path(sweep_dir) / "points" / f"v_{v_inverse:.6f}" / variant


class SweepError(RuntimeError):
    """Raised when one or more sweep points failed."""


def run_sweep(
    config: ExperimentConfig,
    out_dir: Path,
    *,
    workers: int = 1,
    resume: bool = False,
    write_density: bool = False,
    snapshot: bool = False,
    fft_workers: int = 1,
    include_single_well: bool | None = None,
) -> Path:
    """Run all sweep points (and twins) over a worker pool; write summary.

    Completed points are skipped when resume is set.  Per-point failures
    are recorded and the sweep continues; a SweepError listing them is
    raised at the end after the summary over completed points is written.
    """
    if config.sweep is None:
        raise ConfigError("config has no [sweep] section")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    sweep = config.sweep
    if include_single_well is not None:
        sweep = replace(sweep, include_single_well=include_single_well)
    points = [float(v) for v in sweep_points(sweep)]

    state_path = run_relax(config, out_dir / "relaxed", fft_workers=fft_workers, resume=resume)

    tasks = []
    statuses: dict[tuple[float, bool], str] = {}
    for v in points:
        for single in (False, True) if sweep.include_single_well else (False,):
            run_dir = point_dir(out_dir, v, single)
            expected = config_hash(point_config(config, v, single))
            if resume and _run_complete(run_dir, expected):
                statuses[(v, single)] = "complete"
                continue
            tasks.append((config, v, single, str(run_dir), str(state_path),
                          write_density, snapshot, fft_workers))

    if tasks:
        saved = {key: os.environ.get(key) for key in
                 ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS")}
        for key in saved:
            os.environ[key] = "1"
        try:
            with ProcessPoolExecutor(
                max_workers=max(1, workers), mp_context=get_context("spawn")
            ) as pool:
                for label, variant, status in pool.map(_sweep_task, tasks):
                    v = float(label.split("=")[1])
                    statuses[(v, variant == "single_well")] = status
        finally:
            for key, value in saved.items():
                if value is None:
                    del os.environ[key]
                else:
                    os.environ[key] = value

    failures = {key: st for key, st in statuses.items() if st != "complete"}
    base_hash = config_hash(config)
    entries = {
        "kind": "sweep",
        "status": "complete" if not failures else f"failed_points={len(failures)}",
        "config_hash": base_hash,
        "code_version": __version__,
        "points": str(len(points)),
        "include_single_well": "true" if sweep.include_single_well else "false",
        "file.summary": SUMMARY_FILE,
        "file.relaxed_state": "relaxed/" + STATE_FILE,
    }
    for v in points:
        for single in (False, True) if sweep.include_single_well else (False,):
            variant = "single_well" if single else "two_well"
            entries[f"point.{v:.6f}.{variant}"] = statuses.get((v, single), "missing")
    write_manifest(out_dir / MANIFEST_FILE, entries)
    (out_dir / CONFIG_FILE).write_text(canonical_text(config))

    _write_summary(config, out_dir, points, sweep.include_single_well, statuses)
    if failures:
        listing = "; ".join(f"v={v:.6f}/{'single' if s else 'two'}: {st}"
                            for (v, s), st in failures.items())
        raise SweepError(f"{len(failures)} sweep point(s) failed: {listing}")
    return out_dir / SUMMARY_FILE


def summarize_run(run_dir: Path) -> dict[str, float]:
    """Final-state values plus transport-window crossing count for one run."""
    series = read_table(Path(run_dir) / TIMESERIES_FILE)
    spectrum = read_table(Path(run_dir) / SPECTRUM_FILE)
    window = analysis.transport_window(
        spectrum.column("t"), spectrum.column("energy_2"), spectrum.column("barrier")
    )
    n_crossings = analysis.count_zero_crossings(series.column("t"), series.column("com"), window)
    last = {name: float(series.column(name)[-1]) for name in series.columns}
    return {
        "com_final": last["com"],
        "n_crossings": float(n_crossings),
        "window_start": window.t_start if window is not None else math.nan,
        "window_end": window.t_end if window is not None else math.nan,
        "energy_total": last["energy_total"],
        "energy_kinetic": last["energy_kinetic"],
        "energy_potential": last["energy_potential"],
        "energy_interaction": last["energy_interaction"],
        "occ_under_barrier": last["occ_under_barrier"],
        "occ_over_barrier": last["occ_over_barrier"],
        "occ_untrapped": last["occ_untrapped"],
        "untrapped_fraction": last["untrapped_fraction"],
        "entropy": last["entropy"],
        "entropy_ratio": last["entropy_ratio"],
        "natpop_1": last["natpop_1"],
        "natpop_2": last["natpop_2"],
    }

SUMMARY_COLUMNS = [
    "v_f_inverse", "acceleration", "t_final",
    "com_final", "n_crossings", "window_start", "window_end",
    "energy_total", "energy_kinetic", "energy_potential", "energy_interaction",
    "occ_under_barrier", "occ_over_barrier", "occ_untrapped",
    "untrapped_fraction", "entropy", "entropy_ratio", "natpop_1", "natpop_2",
    "untrapped_fraction_single", "energy_total_single", "energy_kinetic_single",
    "delta_untrapped",
]


def _write_summary(config, out_dir: Path, points, include_single: bool, statuses) -> None:
    rows = []
    for v in points:
        if statuses.get((v, False)) != "complete":
            continue
        cfg = point_config(config, v, False)
        kin = derive_kinematics(cfg)
        two = summarize_run(point_dir(out_dir, v, False))
        row = [v, kin.a, kin.t_f,
               two["com_final"], two["n_crossings"], two["window_start"], two["window_end"],
               two["energy_total"], two["energy_kinetic"], two["energy_potential"],
               two["energy_interaction"], two["occ_under_barrier"], two["occ_over_barrier"],
               two["occ_untrapped"], two["untrapped_fraction"], two["entropy"],
               two["entropy_ratio"], two["natpop_1"], two["natpop_2"]]
        if include_single and statuses.get((v, True)) == "complete":
            single = summarize_run(point_dir(out_dir, v, True))
            row += [single["untrapped_fraction"], single["energy_total"],
                    single["energy_kinetic"],
                    two["untrapped_fraction"] - single["untrapped_fraction"]]
        else:
            row += [math.nan, math.nan, math.nan, math.nan]
        rows.append(row)
    write_table(out_dir / SUMMARY_FILE,
                {"config_hash": config_hash(config), "code_version": __version__},
                SUMMARY_COLUMNS, rows)


def _descending_zero(v: np.ndarray, y: np.ndarray) -> float:
    """Largest v below which y is still positive: last +/- sign change."""
    crossing = math.nan
    for i in range(len(v) - 1):
        if y[i] > 0.0 >= y[i + 1]:
            crossing = v[i] + (v[i + 1] - v[i]) * y[i] / (y[i] - y[i + 1])
    return crossing


def run_analyze(sweep_dir: Path) -> Path:
    """Post-process a sweep: fits, staircase, emission peaks, entropy, dipole."""
    sweep_dir = Path(sweep_dir)
    summary_path = sweep_dir / SUMMARY_FILE
    if not summary_path.exists():
        raise StorageError(f"no sweep summary at {summary_path}")
    summary = read_table(summary_path)
    v = summary.column("v_f_inverse")
    lines: list[str] = [f"# sweep analysis (config {summary.meta.get('config_hash', '?')})"]

    lines.append("[cosine_fit]")
    try:
        fit = analysis.fit_cosine(v, summary.column("com_final"))
        lines += [
            f"period = {format_float(fit.period)}",
            f"amplitude = {format_float(fit.amplitude)}",
            f"phase = {format_float(fit.phase)}",
            f"offset = {format_float(fit.offset)}",
            f"rms_residual = {format_float(fit.rms_residual)}",
            f"degenerate = {'true' if fit.degenerate else 'false'}",
        ]
        dense = np.linspace(float(np.min(v)), float(np.max(v)), 400)
        model = fit.amplitude * np.cos(2 * np.pi * dense / fit.period + fit.phase) + fit.offset
        write_table(sweep_dir / "fitted_cosine.tsv", dict(summary.meta),
                    ["v_f_inverse", "com_final_fit"], np.column_stack([dense, model]))
    except AnalysisError as exc:
        lines.append(f"error = {exc}")

    lines.append("[staircase]")
    widths = analysis.staircase_step_widths(v, summary.column("n_crossings"))
    lines.append(f"n_steps = {widths.size + 1}")
    if widths.size:
        lines.append(f"mean_width = {format_float(float(np.mean(widths)))}")

    lines.append("[emission_peaks]")
    single = summary.column("untrapped_fraction_single")
    if np.all(np.isfinite(single)):
        delta = analysis.delta_untrapped(v, summary.column("untrapped_fraction"), single)
        write_table(sweep_dir / "delta_untrapped.tsv", dict(summary.meta),
                    ["v_f_inverse", "delta_untrapped"], np.column_stack([v, delta]))
        peaks = analysis.find_peaks(v, delta, min_prominence=0.05)
        lines.append(f"n_peaks = {len(peaks)}")
        for i, peak in enumerate(peaks, start=1):
            lines.append(f"peak_{i}_location = {format_float(peak.location)}")
            lines.append(f"peak_{i}_height = {format_float(peak.height)}")
            lines.append(f"peak_{i}_prominence = {format_float(peak.prominence)}")
    else:
        lines.append("notice = single-well twins absent; emission differencing skipped")

    lines.append("[entropy]")
    ratio = summary.column("entropy_ratio")
    best = int(np.argmax(ratio))
    lines += [
        f"max_entropy_ratio = {format_float(float(ratio[best]))}",
        f"max_entropy = {format_float(float(summary.column('entropy')[best]))}",
        f"location = {format_float(float(v[best]))}",
        f"natpop_1 = {format_float(float(summary.column('natpop_1')[best]))}",
        f"natpop_2 = {format_float(float(summary.column('natpop_2')[best]))}",
    ]

    lines.append("[energy_thresholds]")
    two_zero = _descending_zero(v, summary.column("energy_total"))
    lines.append(f"two_well_zero_crossing = {format_float(two_zero)}")
    single_e = summary.column("energy_total_single")
    if np.all(np.isfinite(single_e)):
        lines.append(f"single_well_zero_crossing = {format_float(_descending_zero(v, single_e))}")

    lines.append("[dipole]")
    dipole_rows = []
    for vi, t_end, t_f in zip(v, summary.column("window_end"), summary.column("t_final")):
        run = point_dir(sweep_dir, float(vi), False)
        if not math.isfinite(t_end):
            continue
        series = read_table(run / TIMESERIES_FILE)
        metrics = analysis.dipole_metrics(
            series.column("t"), series.column("com_pos"), series.column("com_neg"),
            (float(t_end), float(t_f)),
        )
        if metrics is None:
            continue
        dipole_rows.append([
            float(vi), metrics.period, metrics.phase_difference,
            metrics.n_extrema_pos, metrics.n_extrema_neg,
            metrics.amplitude_pos, metrics.amplitude_neg,
        ])
    write_table(sweep_dir / "dipole_metrics.tsv", dict(summary.meta),
                ["v_f_inverse", "period", "phase_difference",
                 "n_extrema_pos", "n_extrema_neg", "amplitude_pos", "amplitude_neg"],
                dipole_rows)
    lines.append(f"n_points_with_oscillation = {len(dipole_rows)}")
    if dipole_rows:
        periods = [row[1] for row in dipole_rows]
        lines.append(f"period_min = {format_float(min(periods))}")
        lines.append(f"period_max = {format_float(max(periods))}")

    report_path = sweep_dir / REPORT_FILE
    report_path.write_text("\n".join(lines) + "\n")
    return report_path


def export_figure_data(target_dir: Path) -> Path:
    """Ensure all derived plotting inputs exist; write a figure-data manifest."""
    target_dir = Path(target_dir)
    manifest = read_manifest(target_dir / MANIFEST_FILE)
    available: dict[str, str] = {"kind": "figdata", "status": "complete",
                                 "config_hash": manifest.get("config_hash", "")}
    if manifest.get("kind") == "sweep":
        if not (target_dir / REPORT_FILE).exists():
            run_analyze(target_dir)
        for name in (SUMMARY_FILE, REPORT_FILE, "fitted_cosine.tsv",
                     "delta_untrapped.tsv", "dipole_metrics.tsv"):
            if (target_dir / name).exists():
                available[f"file.{name}"] = name
    elif manifest.get("kind") == "run":
        for key, value in manifest.items():
            if key.startswith("file."):
                available[key] = value
    else:
        raise StorageError(f"{target_dir} is neither a run nor a sweep directory")
    path = target_dir / "figdata_manifest.txt"
    write_manifest(path, available)
    return path


def _load_config(path: str) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return parse_config(text)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wellcollider",
        description="Two bosons in colliding Gaussian wells: exact grid simulator.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    relax = sub.add_parser("relax", help="relax the initial state (second well off)")
    relax.add_argument("--config", required=True)
    relax.add_argument("--out", required=True)
    relax.add_argument("--resume", action="store_true")
    relax.add_argument("--fft-threads", type=int, default=1)

    prop = sub.add_parser("propagate", help="propagate one run from a relaxed state")
    prop.add_argument("--config", required=True)
    prop.add_argument("--initial-state", required=True)
    prop.add_argument("--out", required=True)
    prop.add_argument("--density", action="store_true", default=True)
    prop.add_argument("--no-density", dest="density", action="store_false")
    prop.add_argument("--snapshot-wavefunction", action="store_true")
    prop.add_argument("--fft-threads", type=int, default=1)

    sweep = sub.add_parser("sweep", help="run a sweep over inverse final speeds")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--workers", type=int, default=1)
    sweep.add_argument("--resume", action="store_true")
    sweep.add_argument("--single-well-twin", action="store_true", default=None)
    sweep.add_argument("--density", action="store_true", default=False)
    sweep.add_argument("--snapshot-wavefunction", action="store_true")
    sweep.add_argument("--fft-threads", type=int, default=1)

    ana = sub.add_parser("analyze", help="post-process a finished sweep")
    ana.add_argument("--in", dest="target", required=True)

    figdata = sub.add_parser("export-figure-data", help="prepare plotting inputs")
    figdata.add_argument("--in", dest="target", required=True)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "relax":
            config = _load_config(args.config)
            path = run_relax(config, Path(args.out), fft_workers=args.fft_threads,
                             resume=args.resume)
            print(f"relaxed state written to {path}")
        elif args.command == "propagate":
            config = _load_config(args.config)
            entries = run_single(
                config, Path(args.initial_state), Path(args.out),
                write_density=args.density, snapshot=args.snapshot_wavefunction,
                fft_workers=args.fft_threads,
            )
            print(f"run complete in {entries['wall_seconds']} s: {args.out}")
        elif args.command == "sweep":
            config = _load_config(args.config)
            summary = run_sweep(
                config, Path(args.out), workers=args.workers, resume=args.resume,
                write_density=args.density, snapshot=args.snapshot_wavefunction,
                fft_workers=args.fft_threads,
                include_single_well=args.single_well_twin,
            )
            print(f"sweep summary written to {summary}")
        elif args.command == "analyze":
            report = run_analyze(Path(args.target))
            print(f"analysis report written to {report}")
        elif args.command == "export-figure-data":
            path = export_figure_data(Path(args.target))
            print(f"figure data manifest written to {path}")
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (RelaxationError, PropagationError, EigensolverError, AnalysisError,
            SweepError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (StorageError, OSError) as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
