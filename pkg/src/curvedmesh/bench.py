"""Benchmark driver: N-sweeps of sample -> assemble -> solve -> error metrics.

Each (sample size, trial) cell is fully independent: its cloud is derived
from SeedSequence([seed, stream, n, trial]), so runs are reproducible
cell-by-cell and the sweep order never matters. Aggregation (means, standard
errors, log-log rate fits) is deterministic.

Outputs per sweep: runs.csv (one row per cell), summary.csv (one row per N),
rates.json (fitted convergence rates) and manifest.json (config echo, hash,
versions, assembly statistics, pencil diagnostics).
"""

import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .analytic import (
    AnalyticSpectrum,
    sphere_spectrum,
    torus_hodge_spectrum_fd,
    torus_lb_spectrum_fd,
)
from .config import RunConfig
from .eigensolve import pencil_diagnostics
from .errors import CurvedMeshError
from .io import write_json, write_table_csv
from .metrics import eigenvalue_error, eigenvector_error, fit_convergence_rate
from .pipeline import build_geometry, build_pencil, solve_pencil
from .sampling import PointCloud, add_radial_noise, sample_sphere, sample_torus

STREAM_SAMPLE = 1
STREAM_NOISE = 2

_VECTOR_OPERATORS = ("bochner", "hodge")
# cumulative analytic cluster sizes on the sphere: level 1 -> 6 fields, etc.
_LEVEL_CUMULATIVE = ((1, 6), (2, 16), (3, 30))


def trial_seed(base_seed: int, stream: int, n: int, trial: int) -> int:
    """Derived integer seed, decorrelated across (stream, n, trial) cells."""
    ss = np.random.SeedSequence([base_seed, stream, n, trial])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def make_cloud(manifold: str, n: int, trial: int, base_seed: int,
               noise: float = 0.0) -> PointCloud:
    seed = trial_seed(base_seed, STREAM_SAMPLE, n, trial)
    if manifold == "sphere":
        cloud = sample_sphere(n, seed)
        if noise > 0.0:
            cloud = add_radial_noise(cloud, noise,
                                     trial_seed(base_seed, STREAM_NOISE, n, trial))
        return cloud
    if manifold == "torus":
        return sample_torus(n, seed)
    raise ValueError(f"unknown manifold {manifold!r}")


def reference_spectrum(manifold: str, operator: str, n_modes: int) -> AnalyticSpectrum:
    if manifold == "sphere":
        return sphere_spectrum(operator, n_modes)
    if manifold == "torus":
        if operator == "laplace_beltrami":
            return torus_lb_spectrum_fd(n_modes)
        if operator == "hodge":
            return torus_hodge_spectrum_fd(n_modes)
        raise ValueError("no torus reference spectrum for the Bochner operator")
    raise ValueError(f"unknown manifold {manifold!r}")


def _eigenvector_levels(n_modes: int):
    levels = []
    for level, cumulative in _LEVEL_CUMULATIVE:
        levels.append(level)
        if cumulative >= n_modes:
            return tuple(levels)
    raise ValueError(f"eigenvector_modes={n_modes} exceeds the analytic table "
                     f"({_LEVEL_CUMULATIVE[-1][1]} fields)")


@dataclass
class TrialOutcome:
    n: int
    trial: int
    seed: int
    eigenvalue_error: float
    eigenvector_error: float      # nan when the metric is off
    geometry_seconds: float
    assemble_seconds: float
    solve_seconds: float
    sigma: float
    method: str
    max_residual: float
    dropped_fraction: float
    n_failed_points: int
    failure: str = ""             # exception name when the cell failed

    def as_row(self):
        return [self.n, self.trial, self.seed, self.eigenvalue_error,
                self.eigenvector_error, self.geometry_seconds,
                self.assemble_seconds, self.solve_seconds, self.sigma,
                self.method, self.max_residual, self.dropped_fraction,
                self.n_failed_points, self.failure]


RUNS_HEADER = ["n", "trial", "seed", "eigenvalue_error", "eigenvector_error",
               "geometry_seconds", "assemble_seconds", "solve_seconds",
               "sigma", "method", "max_residual", "dropped_fraction",
               "n_failed_points", "failure"]


def failed_outcome(cfg: RunConfig, n: int, trial: int, exc: Exception) -> TrialOutcome:
    """Placeholder row for a cell that died with a numerical error."""
    nan = float("nan")
    return TrialOutcome(
        n=n, trial=trial, seed=trial_seed(cfg.seed, STREAM_SAMPLE, n, trial),
        eigenvalue_error=nan, eigenvector_error=nan,
        geometry_seconds=0.0, assemble_seconds=0.0, solve_seconds=0.0,
        sigma=nan, method="none", max_residual=nan, dropped_fraction=nan,
        n_failed_points=-1, failure=type(exc).__name__,
    )


def run_cell(cfg: RunConfig, n: int, trial: int, geometry=None,
             spectrum: AnalyticSpectrum | None = None):
    """One (n, trial) cell; returns (TrialOutcome, pencil, geometry, result)."""
    if spectrum is None:
        spectrum = reference_spectrum(cfg.manifold, cfg.operator, cfg.num_modes)
    n_request = cfg.num_modes + spectrum.n_zero_modes()
    t0 = time.perf_counter()
    if geometry is None:
        cloud = make_cloud(cfg.manifold, n, trial, cfg.seed, cfg.noise)
        geometry = build_geometry(cloud, k=cfg.k_or_auto)
    t1 = time.perf_counter()
    pencil, geometry = build_pencil(cfg.operator, geometry=geometry,
                                    frame_mode=cfg.frame_mode,
                                    metric_mode=cfg.metric_mode,
                                    stiffness_rule=cfg.stiffness_rule,
                                    mass_rule=cfg.mass_rule)
    t2 = time.perf_counter()
    result = solve_pencil(pencil, n_request, tol=cfg.tol, sigma=cfg.sigma_or_auto)
    t3 = time.perf_counter()
    ev_err = eigenvalue_error(result.eigenvalues, spectrum, cfg.num_modes)
    vec_err = float("nan")
    if (cfg.eigenvector_modes > 0 and cfg.manifold == "sphere"
            and cfg.operator in _VECTOR_OPERATORS and cfg.noise == 0.0):
        report = eigenvector_error(result.eigenvalues, result.eigenvectors,
                                   geometry.frames, geometry.cloud, cfg.operator,
                                   levels=_eigenvector_levels(cfg.eigenvector_modes))
        vec_err = report.mean_error
    outcome = TrialOutcome(
        n=n, trial=trial,
        seed=trial_seed(cfg.seed, STREAM_SAMPLE, n, trial),
        eigenvalue_error=ev_err,
        eigenvector_error=vec_err,
        geometry_seconds=t1 - t0,
        assemble_seconds=t2 - t1,
        solve_seconds=t3 - t2,
        sigma=result.sigma,
        method=result.method,
        max_residual=float(result.residuals.max()),
        dropped_fraction=pencil.stats.dropped_fraction,
        n_failed_points=geometry.n_failed,
    )
    return outcome, pencil, geometry, result


@dataclass
class SweepResult:
    config: RunConfig
    outcomes: list
    summary_rows: list
    eigenvalue_rate: dict | None
    eigenvector_rate: dict | None
    diagnostics: dict
    mode_table: list
    total_seconds: float


SUMMARY_HEADER = ["n", "trials", "failed",
                  "mean_eigenvalue_error", "stderr_eigenvalue_error",
                  "mean_eigenvector_error", "stderr_eigenvector_error"]


def _mean_stderr(values):
    values = [v for v in values if np.isfinite(v)]
    if not values:
        return float("nan"), float("nan")
    mean = float(np.mean(values))
    if len(values) < 2:
        return mean, 0.0
    return mean, float(np.std(values, ddof=1) / np.sqrt(len(values)))


def run_sweep(cfg: RunConfig, progress=None) -> SweepResult:
    """All (n, trial) cells of a config, plus aggregation and diagnostics."""
    spectrum = reference_spectrum(cfg.manifold, cfg.operator, cfg.num_modes)
    t_start = time.perf_counter()
    outcomes = []
    diagnostics = {}
    mode_table = []
    for n in cfg.sample_sizes:
        for trial in range(cfg.trials):
            try:
                outcome, pencil, geometry, result = run_cell(cfg, n, trial,
                                                             spectrum=spectrum)
            except CurvedMeshError as exc:
                # a dead cell is a data point (the noise study relies on
                # recording where the method stops working), not a crash
                outcomes.append(failed_outcome(cfg, n, trial, exc))
                if progress is not None:
                    progress(outcomes[-1])
                continue
            outcomes.append(outcome)
            if progress is not None:
                progress(outcome)
            if str(n) not in diagnostics:
                diag = pencil_diagnostics(pencil.stiffness, pencil.mass)
                diagnostics[str(n)] = {
                    "a_min_eig": diag.a_min_eig,
                    "b_min_eig": diag.b_min_eig,
                    "crawford_lower_bound": diag.crawford_lower_bound,
                    "mass_near_singular": diag.mass_near_singular,
                    "assembly": pencil.stats.as_dict(),
                }
            if n == max(cfg.sample_sizes) and not mode_table:
                ref = spectrum.expand(len(result.eigenvalues))
                for i, (est, lam) in enumerate(zip(result.eigenvalues, ref)):
                    rel = abs(est - lam) / lam if lam > 0 else float("nan")
                    mode_table.append([i, float(est), float(lam), rel])
    summary_rows = []
    ev_per_n, vec_per_n = [], []
    for n in cfg.sample_sizes:
        evs = [o.eigenvalue_error for o in outcomes if o.n == n]
        vecs = [o.eigenvector_error for o in outcomes if o.n == n]
        failed = sum(1 for o in outcomes if o.n == n and o.failure)
        ev_per_n.append([v for v in evs if np.isfinite(v)])
        vec_per_n.append([v for v in vecs if np.isfinite(v)])
        m1, s1 = _mean_stderr(evs)
        m2, s2 = _mean_stderr(vecs)
        summary_rows.append([n, len(evs), failed, m1, s1, m2, s2])
    # a rate needs at least two sizes and at least one surviving trial per size
    eigenvalue_rate = None
    if len(ev_per_n) >= 2 and all(len(v) > 0 for v in ev_per_n):
        eigenvalue_rate = fit_convergence_rate(cfg.sample_sizes, ev_per_n).as_dict()
    eigenvector_rate = None
    if len(vec_per_n) >= 2 and all(len(v) > 0 for v in vec_per_n):
        eigenvector_rate = fit_convergence_rate(cfg.sample_sizes, vec_per_n).as_dict()
    return SweepResult(
        config=cfg,
        outcomes=outcomes,
        summary_rows=summary_rows,
        eigenvalue_rate=eigenvalue_rate,
        eigenvector_rate=eigenvector_rate,
        diagnostics=diagnostics,
        mode_table=mode_table,
        total_seconds=time.perf_counter() - t_start,
    )


MODES_HEADER = ["index", "estimated", "reference", "rel_error"]


def write_outputs(sweep: SweepResult, outdir: str) -> dict:
    """runs.csv, summary.csv, modes.csv, rates.json, manifest.json under outdir."""
    import os

    os.makedirs(outdir, exist_ok=True)
    paths = {
        "runs": os.path.join(outdir, "runs.csv"),
        "summary": os.path.join(outdir, "summary.csv"),
        "modes": os.path.join(outdir, "modes.csv"),
        "rates": os.path.join(outdir, "rates.json"),
        "manifest": os.path.join(outdir, "manifest.json"),
    }
    write_table_csv(paths["runs"], RUNS_HEADER,
                    [o.as_row() for o in sweep.outcomes])
    write_table_csv(paths["summary"], SUMMARY_HEADER, sweep.summary_rows)
    write_table_csv(paths["modes"], MODES_HEADER, sweep.mode_table)
    rates = {"eigenvalue": sweep.eigenvalue_rate}
    if sweep.eigenvector_rate is not None:
        rates["eigenvector"] = sweep.eigenvector_rate
    write_json(paths["rates"], rates)
    cfg = sweep.config
    manifest = {
        "config": cfg.as_dict(),
        "config_hash": cfg.config_hash(),
        "version": __version__,
        "total_seconds": sweep.total_seconds,
        "cells": len(sweep.outcomes),
        "diagnostics": sweep.diagnostics,
        "timings": {
            "geometry_seconds": sum(o.geometry_seconds for o in sweep.outcomes),
            "assemble_seconds": sum(o.assemble_seconds for o in sweep.outcomes),
            "solve_seconds": sum(o.solve_seconds for o in sweep.outcomes),
        },
        "rates": rates,
    }
    write_json(paths["manifest"], manifest)
    return paths


def run_benchmark(cfg: RunConfig, progress=None) -> tuple[SweepResult, dict]:
    sweep = run_sweep(cfg, progress=progress)
    return sweep, write_outputs(sweep, cfg.output_dir)
