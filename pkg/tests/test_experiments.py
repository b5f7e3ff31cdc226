import json

import numpy as np
import pytest

from hesscond import (
    CircleGrid,
    SweepConfig,
    build_soar,
    config_from_json,
    gram,
    make_operator,
    run_bounds_sweep,
    run_cg_sweep,
    run_condition_sweep,
    run_spectrum_export,
    run_table1,
)
from hesscond.cli import main as cli_main
from hesscond.experiments import DEFAULT_GRID, TABLE1_LENGTHSCALES

SMALL = SweepConfig(
    n=16, p=8, lb_grid=(0.2, 0.5, 0.8), lr_grid=(0.2, 0.5, 0.8),
    operators=("first-half", "alternate"), seed=5,
)


def read_body(path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# ")
    return "\n".join(lines[1:])


class TestSweepConfig:
    def test_defaults(self):
        cfg = SweepConfig()
        assert cfg.n == 200 and cfg.p == 100
        assert len(DEFAULT_GRID) == 20
        assert cfg.lb_grid == DEFAULT_GRID

    def test_round_trip_lossless(self):
        cfg = SweepConfig(n=16, p=8, lb_grid=(0.1, 0.37), lr_grid=(0.2,),
                          operators=("alternate",), seed=9, tolerance=1e-8,
                          output_dir="out/dir")
        again = config_from_json(json.loads(json.dumps(cfg.to_json_dict())))
        assert again == cfg
        assert again.config_hash() == cfg.config_hash()

    def test_hash_tracks_content(self):
        a = SweepConfig(seed=1)
        b = SweepConfig(seed=2)
        assert a.config_hash() != b.config_hash()
        assert a.config_hash() == SweepConfig(seed=1).config_hash()

    def test_validation(self):
        with pytest.raises(ValueError, match="n = 2p"):
            SweepConfig(n=10, p=4)
        with pytest.raises(ValueError, match="positive"):
            SweepConfig(lb_grid=(0.5, -0.1))
        with pytest.raises(ValueError, match="unknown"):
            SweepConfig(operators=("alternate", "bogus"))


class TestTable1:
    def test_requires_canonical_lengthscales(self):
        with pytest.raises(ValueError, match="lengthscales"):
            run_table1(SMALL)

    def test_rows_and_ordering(self, tmp_path):
        cfg = SweepConfig(lb_grid=TABLE1_LENGTHSCALES, lr_grid=TABLE1_LENGTHSCALES)
        rows = run_table1(cfg, tmp_path / "t1.csv")
        assert len(rows) == 10
        assert [r["matrix"] for r in rows] == ["B"] * 5 + ["R"] * 5
        for r in rows:
            assert r["lambda_min"] < r["lambda_max"]
            assert r["dim"] == (200 if r["matrix"] == "B" else 100)
            assert r["config_hash"] == cfg.config_hash()
        assert (tmp_path / "t1.csv").exists()


class TestConditionSweep:
    def test_rows_sorted_and_tagged(self):
        rows = run_condition_sweep(SMALL)
        assert len(rows) == 2 * 3 * 3
        keys = [(r["operator"], r["lengthscale_b"], r["lengthscale_r"]) for r in rows]
        assert keys == sorted(keys)
        assert all(r["status"] == "ok" for r in rows)
        assert all(r["config_hash"] == SMALL.config_hash() for r in rows)

    def test_equal_lengthscales_minimize_kappa_for_alternate(self):
        cfg = SweepConfig(lb_grid=(0.5,), lr_grid=tuple(np.round(np.arange(1, 11) * 0.1, 2)),
                          operators=("alternate",))
        rows = run_condition_sweep(cfg)
        best = min(rows, key=lambda r: r["kappa"])
        assert best["lengthscale_r"] == pytest.approx(0.5)
        assert best["kappa"] == pytest.approx(2.0, rel=1e-10)

    def test_alternate_product_reproduces_r_at_equal_lengthscales(self):
        # At L_B = L_R the sampled background kernel coincides with the
        # observation kernel entry for entry.
        b = build_soar(CircleGrid(200), 0.5)
        r = build_soar(CircleGrid(100), 0.5)
        h = make_operator("alternate", 100, 200).to_dense()
        assert np.array_equal(h @ b.entries @ h.T, r.entries)

    def test_cell_failures_become_error_rows(self, monkeypatch):
        calls = {"count": 0}

        def flaky(model):
            calls["count"] += 1
            if calls["count"] == 2:
                raise RuntimeError("synthetic failure")
            return 2.0

        import hesscond.experiments as exp
        monkeypatch.setattr(exp, "kappa_via_rank_p", flaky)
        rows = run_condition_sweep(SMALL)
        bad = [r for r in rows if r["status"] != "ok"]
        assert len(bad) == 1
        assert "synthetic failure" in bad[0]["status"]
        assert bad[0]["kappa"] is None
        assert len(rows) == 18


class TestBoundsSweep:
    def test_rows_carry_sandwich(self, tmp_path):
        rows = run_bounds_sweep(SMALL, tmp_path / "b.csv")
        assert len(rows) == 18
        for r in rows:
            assert r["status"] == "ok"
            lower = max(r["general_lower_1"], r["general_lower_2"], r["general_lower_3"])
            upper = min(r["general_upper_1"], r["general_upper_2"])
            assert lower <= r["kappa_exact"] * (1 + 1e-8)
            assert r["kappa_exact"] <= upper * (1 + 1e-8)
        body = read_body(tmp_path / "b.csv")
        assert body.splitlines()[0].startswith("operator,")


class TestCGSweep:
    def test_rows_and_traces(self, tmp_path):
        cfg = SweepConfig(lb_grid=(0.3, 0.6), lr_grid=(0.3, 0.6),
                          operators=("alternate", "smoothed-alternate"))
        rows = run_cg_sweep(cfg, tmp_path / "cg.csv", trace_path=tmp_path / "tr.json")
        assert len(rows) == 8
        for r in rows:
            assert r["status"] == "ok"
            assert r["converged"] is True
            assert r["final_relative_residual"] <= cfg.tolerance
            assert r["iterations"] <= cfg.p + 2
        traces = json.loads((tmp_path / "tr.json").read_text())
        assert len(traces["traces"]) == 8
        assert traces["traces"][0]["trace"]

    def test_signal_needs_room_for_default_wavenumbers(self):
        with pytest.raises(ValueError, match="wavenumber"):
            run_cg_sweep(SMALL)


class TestSpectrumExport:
    def test_unknown_cell_rejected(self):
        with pytest.raises(ValueError, match="unknown operator"):
            run_spectrum_export(SMALL, [("bogus", 0.5, 0.5)])

    def test_smooth_versus_clustered_cells(self, tmp_path):
        cfg = SweepConfig()
        cells = [(k, lb, 0.7) for k in ("first-half", "alternate", "smoothed-alternate")
                 for lb in (0.1, 0.5)]
        records = run_spectrum_export(cfg, cells, out_dir=tmp_path)
        by_key = {(r["model"]["operator"], r["model"]["lengthscale_b"]): r for r in records}
        for kind in ("first-half", "alternate", "smoothed-alternate"):
            smooth = by_key[(kind, 0.1)]["distinct_cluster_count"]
            clustered = by_key[(kind, 0.5)]["distinct_cluster_count"]
            # Small background lengthscale spreads the spectrum (many
            # clusters); L_B = 0.5 packs it around unity.
            assert smooth >= 10
            assert clustered <= 10
            assert clustered < smooth
        for rec in records:
            assert len(rec["update_eigenvalues"]) == 100
            assert rec["kappa"] == pytest.approx(1.0 + rec["update_eigenvalues"][0])
        assert len(list(tmp_path.glob("spectrum_*.json"))) == 6


class TestDeterminism:
    def test_byte_identical_bodies(self, tmp_path):
        run_condition_sweep(SMALL, tmp_path / "a.csv")
        run_condition_sweep(SMALL, tmp_path / "b.csv")
        assert read_body(tmp_path / "a.csv") == read_body(tmp_path / "b.csv")

    def test_header_carries_metadata(self, tmp_path):
        run_condition_sweep(SMALL, tmp_path / "a.csv")
        header = json.loads((tmp_path / "a.csv").read_text().splitlines()[0][2:])
        assert header["config_hash"] == SMALL.config_hash()
        assert header["seed"] == SMALL.seed
        assert "tool_version" in header and "written_at" in header


class TestCli:
    def test_table1_command(self, tmp_path):
        code = cli_main(["table1", "--out", str(tmp_path)])
        assert code == 0
        assert (tmp_path / "table1.csv").exists()

    def test_sweep_cond_small(self, tmp_path):
        code = cli_main([
            "sweep-cond", "--n", "16", "--p", "8",
            "--lb-grid", "0.3,0.6", "--lr-grid", "0.3,0.6",
            "--operator", "alternate", "--out", str(tmp_path),
        ])
        assert code == 0
        body = read_body(tmp_path / "condition_sweep.csv")
        assert len(body.splitlines()) == 1 + 4

    def test_config_file_overrides_flags(self, tmp_path):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"n": 16, "p": 8, "lb_grid": [0.4], "lr_grid": [0.4]}))
        code = cli_main([
            "sweep-cond", "--n", "200", "--p", "100",
            "--operator", "alternate", "--out", str(tmp_path),
            "--config", str(cfg_file),
        ])
        assert code == 0
        body = read_body(tmp_path / "condition_sweep.csv")
        rows = body.splitlines()[1:]
        assert len(rows) == 1  # the config file's 1x1 grid won
        assert rows[0].startswith("alternate,0.4,0.4")

    def test_spectrum_command(self, tmp_path):
        code = cli_main([
            "spectrum", "--cell", "alternate:0.5:0.2", "--out", str(tmp_path),
        ])
        assert code == 0
        assert (tmp_path / "spectrum_alternate_0.5_0.2.json").exists()
