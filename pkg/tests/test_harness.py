"""Harness tests: experiment drivers, determinism, CSV output, workers."""

from pathlib import Path

import numpy as np
import pytest

from xldma.config import ExperimentConfig
from xldma import harness
from xldma.harness import (
    Workbench,
    run_beam_gain,
    run_coherence,
    run_model_error,
    run_nmse_sweep,
    run_timing,
    write_csv,
)

SMALL = ExperimentConfig(
    elems_per_strip=32, num_pilots=12, trials=3, snr_db=(0.0, 12.0),
    el_search_points=128, coherence_seeds=3, timing_elems=(16, 32),
    timing_trials=2, mmo_power_draws=10,
    coherence_modes=("dma_optimized", "dma_random"))


class TestModelError:
    def test_row_count_and_reference_element(self):
        cfg = SMALL.replace(num_strips=3, elems_per_strip=8)
        header, rows = run_model_error(cfg)
        assert len(rows) == 3 * 8
        first = rows[0]
        cols = {name: first[i] for i, name in enumerate(header)}
        assert cols["strip"] == 1 and cols["elem"] == 1
        vals = [cols[m] for m in ("spherical", "taylor2", "oblong", "planar")]
        assert all(v == cfg.eval_range for v in vals)

    def test_planar_gap_exceeds_oblong_gap(self):
        cfg = ExperimentConfig(num_strips=8, elems_per_strip=128,
                               carrier_hz=28e9)
        header, rows = run_model_error(cfg)
        idx = {name: i for i, name in enumerate(header)}
        sph = np.array([r[idx["spherical"]] for r in rows])
        obl = np.array([r[idx["oblong"]] for r in rows])
        pla = np.array([r[idx["planar"]] for r in rows])
        assert np.max(np.abs(pla - sph)) > np.max(np.abs(obl - sph))


class TestBeamGain:
    def test_spherical_reference_is_unity(self):
        header, rows = run_beam_gain(SMALL.replace(gain_range_points=10))
        idx = {name: i for i, name in enumerate(header)}
        for row in rows:
            if row[idx["model"]] == "spherical":
                assert row[idx["gain"]] == pytest.approx(1.0, abs=1e-12)

    def test_grid_covers_requested_range(self):
        cfg = SMALL.replace(gain_range_bounds=(5.0, 100.0), gain_range_points=7)
        header, rows = run_beam_gain(cfg)
        idx = {name: i for i, name in enumerate(header)}
        ranges = sorted({row[idx["range_m"]] for row in rows})
        assert ranges[0] == pytest.approx(5.0)
        assert ranges[-1] == pytest.approx(100.0)
        assert len(ranges) == 7


class TestNmseSweep:
    def test_oracle_consistent_model_noiseless(self):
        cfg = SMALL.replace(trials=1, snr_db=(300.0,), truth_model="oblong",
                            estimators=("oracle_ls",))
        header, rows, _ = run_nmse_sweep(cfg)
        nmse = rows[0][header.index("nmse")]
        assert nmse < 1e-20

    def test_rows_cover_grid_and_sorted(self):
        header, rows, times = run_nmse_sweep(SMALL)
        assert len(rows) == len(SMALL.estimators) * 2 * 3
        keys = [(r[5], r[6]) for r in rows]
        assert keys == sorted(keys)
        assert len(times) == len(rows)

    def test_byte_identical_rerun(self, tmp_path):
        run_nmse_sweep(SMALL, tmp_path / "a")
        run_nmse_sweep(SMALL, tmp_path / "b")
        assert (tmp_path / "a/nmse.csv").read_bytes() \
            == (tmp_path / "b/nmse.csv").read_bytes()

    def test_seed_changes_results(self):
        _, rows1, _ = run_nmse_sweep(SMALL.replace(trials=1))
        _, rows2, _ = run_nmse_sweep(SMALL.replace(trials=1, seed=2))
        assert rows1 != rows2

    def test_parallel_matches_sequential(self, tmp_path):
        cfg = SMALL.replace(trials=2, estimators=("el_az_decoupled_og",
                                                  "oracle_ls"))
        run_nmse_sweep(cfg, tmp_path / "seq")
        run_nmse_sweep(cfg.replace(threads=2), tmp_path / "par")
        assert (tmp_path / "seq/nmse.csv").read_bytes() \
            == (tmp_path / "par/nmse.csv").read_bytes()


class TestTimingAndCoherence:
    def test_timing_outputs_every_size(self, tmp_path):
        cfg = SMALL.replace(estimators=("el_az_decoupled", "oracle_ls"))
        header, rows, times = run_timing(cfg, tmp_path)
        sizes = {r[header.index("elems")] for r in rows}
        assert sizes == {16, 32}
        assert (Path(tmp_path) / "timing.times.csv").exists()
        tidx = 7  # wall_time_s column in the sidecar
        assert all(t[tidx] >= 0 for t in times)

    def test_coherence_deterministic_and_ordered(self):
        header, rows1 = run_coherence(SMALL)
        header, rows2 = run_coherence(SMALL)
        assert rows1 == rows2
        idx = {name: i for i, name in enumerate(header)}
        by_mode = {}
        for r in rows1:
            by_mode.setdefault(r[idx["mode"]], []).append(r[idx["coherence"]])
        assert np.mean(by_mode["dma_optimized"]) < np.mean(by_mode["dma_random"])

    def test_coherence_forms_agree(self):
        header, rows = run_coherence(SMALL.replace(coherence_seeds=2))
        idx = {name: i for i, name in enumerate(header)}
        for r in rows:
            assert r[idx["coherence"]] == pytest.approx(
                r[idx["coherence_reduced"]], rel=1e-6)


class TestWorkbench:
    def test_design_reuse_roundtrip(self, tmp_path):
        from xldma.harness import build_and_save_design
        cfg = SMALL.replace(trials=1, estimators=("el_az_decoupled",))
        build_and_save_design(cfg, tmp_path / "design")
        _, rows_inline, _ = run_nmse_sweep(cfg)
        _, rows_loaded, _ = run_nmse_sweep(
            cfg.replace(design_path=str(tmp_path / "design")))
        assert rows_inline == rows_loaded

    def test_unknown_estimator_rejected_at_dispatch(self):
        bench = Workbench(SMALL.replace(estimators=("oracle_ls",), trials=1))
        with pytest.raises(ValueError):
            bench.run_estimator("nonsense", None, None, None)


class TestCsvWriter:
    def test_formatting(self, tmp_path):
        p = write_csv(tmp_path / "x.csv", ["a", "b", "c"],
                      [(1, 0.5, "name"), (np.int64(2), np.float64(0.25), "x")])
        text = p.read_text()
        assert text.splitlines()[0] == "a,b,c"
        assert text.splitlines()[1] == "1,0.5,name"
        assert text.splitlines()[2] == "2,0.25,x"
