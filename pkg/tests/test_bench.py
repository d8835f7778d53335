"""Benchmark driver: seeding, cell runs, sweep aggregation, output files."""

import math
import os

import numpy as np
import pytest

import curvedmesh.bench as bench
from curvedmesh.analytic import sphere_spectrum, torus_lb_spectrum_fd
from curvedmesh.bench import (
    RUNS_HEADER,
    SUMMARY_HEADER,
    _eigenvector_levels,
    _mean_stderr,
    failed_outcome,
    make_cloud,
    reference_spectrum,
    run_cell,
    run_sweep,
    trial_seed,
    write_outputs,
)
from curvedmesh.config import RunConfig
from curvedmesh.errors import IndefiniteMassError
from curvedmesh.io import read_json


def tiny_config(**overrides):
    base = dict(operator="laplace_beltrami", sample_sizes=[60, 90], trials=2,
                seed=5, num_modes=2, eigenvector_modes=0,
                output_dir="unused")
    base.update(overrides)
    return RunConfig(**base)


class TestSeeding:
    def test_trial_seed_deterministic(self):
        assert trial_seed(7, 1, 1000, 3) == trial_seed(7, 1, 1000, 3)

    def test_trial_seed_decorrelated_across_cells(self):
        seeds = {trial_seed(7, s, n, t)
                 for s in (1, 2) for n in (100, 200) for t in (0, 1)}
        assert len(seeds) == 8

    def test_make_cloud_reproducible(self):
        a = make_cloud("sphere", 40, 0, 7)
        b = make_cloud("sphere", 40, 0, 7)
        assert np.array_equal(a.points, b.points)

    def test_make_cloud_noise_uses_separate_stream(self):
        clean = make_cloud("sphere", 40, 0, 7)
        noisy = make_cloud("sphere", 40, 0, 7, noise=0.05)
        radii = np.linalg.norm(noisy.points, axis=1)
        assert np.allclose(noisy.points / radii[:, None], clean.points)
        assert radii.std() > 1e-3

    def test_make_cloud_torus_and_unknown(self):
        cloud = make_cloud("torus", 40, 0, 7)
        assert cloud.n_points == 40
        with pytest.raises(ValueError):
            make_cloud("plane", 40, 0, 7)


class TestReferenceSpectrum:
    def test_sphere_routes_to_analytic_tables(self):
        spec = reference_spectrum("sphere", "bochner", 6)
        assert spec.entries[0] == (1.0, 6)

    def test_torus_routes_to_fd_oracle(self):
        spec = reference_spectrum("torus", "laplace_beltrami", 8)
        ref = torus_lb_spectrum_fd(8)
        assert np.array_equal(spec.expand(8), ref.expand(8))

    def test_torus_bochner_unsupported(self):
        with pytest.raises(ValueError):
            reference_spectrum("torus", "bochner", 6)

    def test_unknown_manifold(self):
        with pytest.raises(ValueError):
            reference_spectrum("plane", "hodge", 6)


class TestEigenvectorLevels:
    def test_cumulative_cluster_boundaries(self):
        assert _eigenvector_levels(6) == (1,)
        assert _eigenvector_levels(7) == (1, 2)
        assert _eigenvector_levels(16) == (1, 2)
        assert _eigenvector_levels(30) == (1, 2, 3)

    def test_beyond_table_raises(self):
        with pytest.raises(ValueError):
            _eigenvector_levels(31)


class TestMeanStderr:
    def test_all_nan_gives_nan(self):
        mean, se = _mean_stderr([float("nan"), float("nan")])
        assert math.isnan(mean) and math.isnan(se)

    def test_single_value_zero_stderr(self):
        assert _mean_stderr([2.5]) == (2.5, 0.0)

    def test_two_values(self):
        mean, se = _mean_stderr([1.0, 3.0])
        assert mean == 2.0
        assert abs(se - np.std([1.0, 3.0], ddof=1) / np.sqrt(2)) <= 1e-15


class TestFailedOutcome:
    def test_placeholder_row_shape(self):
        cfg = tiny_config()
        out = failed_outcome(cfg, 60, 1, IndefiniteMassError("mass not SPD"))
        assert out.failure == "IndefiniteMassError"
        assert out.n == 60 and out.trial == 1
        assert out.seed == trial_seed(cfg.seed, bench.STREAM_SAMPLE, 60, 1)
        assert math.isnan(out.eigenvalue_error)
        assert out.method == "none"
        assert len(out.as_row()) == len(RUNS_HEADER)


class TestRunCell:
    def test_scalar_cell_smoke(self):
        cfg = tiny_config(sample_sizes=[150], trials=1, num_modes=4)
        outcome, pencil, geometry, result = run_cell(cfg, 150, 0)
        assert outcome.n == 150 and outcome.trial == 0
        assert np.isfinite(outcome.eigenvalue_error)
        # 150 points is deliberately coarse; this only guards against garbage
        assert outcome.eigenvalue_error <= 0.5
        assert math.isnan(outcome.eigenvector_error)  # scalar operator
        assert outcome.geometry_seconds > 0.0
        assert outcome.n_failed_points == 0
        assert pencil.dim == 150
        assert geometry.n_points == 150
        assert len(result.eigenvalues) == cfg.num_modes + 1  # kernel mode extra

    def test_vector_cell_reports_eigenvector_error(self, sphere400):
        _, geo = sphere400
        cfg = tiny_config(operator="bochner", sample_sizes=[400], trials=1,
                          num_modes=6, eigenvector_modes=6)
        outcome, pencil, _, result = run_cell(cfg, 400, 0, geometry=geo)
        assert pencil.dim == 800
        assert len(result.eigenvalues) == 6  # no kernel for this operator
        assert np.isfinite(outcome.eigenvector_error)
        assert outcome.eigenvector_error <= 0.1
        assert outcome.eigenvalue_error <= 0.15

    def test_cell_seed_matches_trial_seed(self):
        cfg = tiny_config(sample_sizes=[60], trials=1)
        outcome, _, _, _ = run_cell(cfg, 60, 0)
        assert outcome.seed == trial_seed(cfg.seed, bench.STREAM_SAMPLE, 60, 0)


class TestRunSweep:
    def test_sweep_aggregation(self):
        cfg = tiny_config()
        seen = []
        sweep = run_sweep(cfg, progress=seen.append)
        assert len(sweep.outcomes) == 4
        assert len(seen) == 4
        assert [row[0] for row in sweep.summary_rows] == [60, 90]
        for row in sweep.summary_rows:
            assert row[1] == 2 and row[2] == 0        # trials, failed
            assert np.isfinite(row[3]) and row[4] >= 0.0
        assert sweep.eigenvalue_rate is not None
        assert set(sweep.eigenvalue_rate) == {"sample_sizes", "mean_errors",
                                              "stderr", "rate", "rate_stderr",
                                              "intercept"}
        assert sweep.eigenvector_rate is None
        assert set(sweep.diagnostics) == {"60", "90"}
        for diag in sweep.diagnostics.values():
            assert diag["b_min_eig"] > 0.0
            assert diag["mass_near_singular"] is False
            assert diag["assembly"]["operator"] == "laplace_beltrami"
        # mode table comes from the largest size and includes the kernel mode
        assert len(sweep.mode_table) == cfg.num_modes + 1
        assert sweep.mode_table[0][0] == 0
        assert math.isnan(sweep.mode_table[0][3])     # kernel has no rel error
        assert sweep.total_seconds > 0.0

    def test_failed_cell_becomes_row_not_crash(self, monkeypatch):
        cfg = tiny_config()
        real_run_cell = bench.run_cell

        def flaky(cfg_, n, trial, geometry=None, spectrum=None):
            if n == 90 and trial == 0:
                raise IndefiniteMassError("injected")
            return real_run_cell(cfg_, n, trial, geometry=geometry,
                                 spectrum=spectrum)

        monkeypatch.setattr(bench, "run_cell", flaky)
        sweep = run_sweep(cfg)
        failures = [o for o in sweep.outcomes if o.failure]
        assert len(failures) == 1
        assert failures[0].failure == "IndefiniteMassError"
        assert failures[0].n == 90 and failures[0].trial == 0
        row_90 = next(r for r in sweep.summary_rows if r[0] == 90)
        assert row_90[2] == 1                          # failed count
        assert np.isfinite(row_90[3])                  # surviving trial mean
        assert sweep.eigenvalue_rate is not None       # one trial per n left

    def test_all_failed_size_nulls_rate(self, monkeypatch):
        cfg = tiny_config(trials=1)

        def always_dead(cfg_, n, trial, geometry=None, spectrum=None):
            raise IndefiniteMassError("injected")

        monkeypatch.setattr(bench, "run_cell", always_dead)
        sweep = run_sweep(cfg)
        assert all(o.failure for o in sweep.outcomes)
        assert sweep.eigenvalue_rate is None
        for row in sweep.summary_rows:
            assert math.isnan(row[3])


class TestWriteOutputs:
    def test_files_and_manifest(self, tmp_path):
        cfg = tiny_config(output_dir=str(tmp_path / "out"))
        sweep = run_sweep(cfg)
        paths = write_outputs(sweep, cfg.output_dir)
        assert set(paths) == {"runs", "summary", "modes", "rates", "manifest"}
        for path in paths.values():
            assert os.path.exists(path)
        runs_lines = open(paths["runs"]).read().splitlines()
        assert runs_lines[0] == ",".join(RUNS_HEADER)
        assert len(runs_lines) == 1 + len(sweep.outcomes)
        summary_lines = open(paths["summary"]).read().splitlines()
        assert summary_lines[0] == ",".join(SUMMARY_HEADER)
        manifest = read_json(paths["manifest"])
        assert manifest["config_hash"] == cfg.config_hash()
        assert manifest["config"] == cfg.as_dict()
        assert manifest["cells"] == 4
        assert manifest["rates"]["eigenvalue"]["rate"] == pytest.approx(
            sweep.eigenvalue_rate["rate"])
        assert set(manifest["timings"]) == {"geometry_seconds",
                                            "assemble_seconds",
                                            "solve_seconds"}

    def test_mode_table_columns(self, tmp_path):
        cfg = tiny_config(sample_sizes=[60], trials=1,
                          output_dir=str(tmp_path / "out"))
        sweep = run_sweep(cfg)
        paths = write_outputs(sweep, cfg.output_dir)
        lines = open(paths["modes"]).read().splitlines()
        assert lines[0] == "index,estimated,reference,rel_error"
        ref = sphere_spectrum("laplace_beltrami").expand(3)
        first = lines[1].split(",")
        assert int(first[0]) == 0
        assert float(first[2]) == ref[0]
