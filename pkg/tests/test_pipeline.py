"""Full-run orchestration: staging, manifest accounting, determinism."""

import json
import math

import pytest

from bookshape.book import IntervalWindow
from bookshape.convexity import ConvexityEstimate
from bookshape.errors import InvalidConfig, StageError
from bookshape.io import ingest_snapshots, read_records_csv, write_snapshots_csv
from bookshape.pipeline import RunConfig, _assemble_records, config_digest, prepare_panel, run_pipeline
from bookshape.synthetic import SynthConfig, generate

from conftest import make_window

EXPECTED_OUTPUTS = [
    "rejects.csv",
    "records.csv",
    "panel.csv",
    "failures.csv",
    "summary.csv",
    "acf_logc_bid.csv",
    "long_memory_bid.csv",
    "acf_logc_ask.csv",
    "long_memory_ask.csv",
    "acf_kappa_bid.csv",
    "acf_kappa_ask.csv",
    "ar1_kappa_bid.csv",
    "ar1_kappa_ask.csv",
    "intraday_bid.csv",
    "intraday_ask.csv",
    "dynamics_bid.csv",
    "dynamics_ask.csv",
    "discovery.csv",
    "manifest.json",
]


@pytest.fixture(scope="module")
def input_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("input")
    generate(SynthConfig(seed=5, n_stocks=2, n_days=3), path)
    return path


@pytest.fixture(scope="module")
def run(input_dir, tmp_path_factory):
    out_dir = tmp_path_factory.mktemp("out")
    config = RunConfig(
        snapshots=str(input_dir / "snapshots.csv"),
        out_dir=str(out_dir),
        trades=str(input_dir / "trades.csv"),
    )
    return config, run_pipeline(config)


class TestRunConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"interval_seconds": 0},
            {"spacing_seconds": 7},
            {"n_intervals": 0},
            {"min_snapshots": 0},
            {"min_points": 0},
            {"max_lag": 0},
            {"min_pairs": 0},
            {"ar1_min_pairs": 0},
            {"min_days": -1},
        ],
    )
    def test_validate_rejects(self, kwargs):
        config = RunConfig(snapshots="in.csv", out_dir="out", **kwargs)
        with pytest.raises(InvalidConfig):
            config.validate()

    def test_digest_tracks_field_values(self):
        a = RunConfig(snapshots="in.csv", out_dir="out")
        b = RunConfig(snapshots="in.csv", out_dir="out")
        c = RunConfig(snapshots="in.csv", out_dir="out", max_lag=30)
        assert config_digest(a) == config_digest(b)
        assert config_digest(a) != config_digest(c)


class TestRunPipeline:
    def test_outputs_in_canonical_order(self, run):
        config, result = run
        assert result.manifest["outputs"] == EXPECTED_OUTPUTS
        for name in EXPECTED_OUTPUTS:
            assert (result.out_dir / name).is_file()

    def test_manifest_accounting(self, run):
        config, result = run
        manifest = result.manifest
        counts = manifest["counts"]
        assert manifest["status"] == "complete"
        assert manifest["config_sha256"] == config_digest(config)
        assert manifest["discovery"] == "written"
        assert counts["rows_accepted"] + counts["rows_rejected"] == counts["rows_total"]
        assert counts["rows_rejected"] == 0
        assert counts["rows_accepted"] == 2 * 3 * 48 * 30
        assert counts["stocks"] == 2
        assert counts["stock_days"] == 6
        assert counts["windows_total"] == 6 * 48
        assert counts["windows_empty"] == 0
        assert counts["estimates"] == 2 * counts["windows_total"] - counts["window_failures"]
        assert counts["records"] == counts["windows_total"]
        assert counts["trade_rows"] > 0

    def test_manifest_file_matches_returned_manifest(self, run):
        _, result = run
        on_disk = json.loads((result.out_dir / "manifest.json").read_text())
        assert on_disk == result.manifest

    def test_records_chain_returns_within_days(self, run):
        _, result = run
        records = read_records_csv(result.out_dir / "records.csv")
        assert len(records) == result.manifest["counts"]["records"]
        for rec in records:
            if rec.t == 1:
                assert math.isnan(rec.r)
            else:
                assert math.isfinite(rec.r)

    def test_rerun_is_byte_identical(self, run):
        config, result = run
        first = {
            name: (result.out_dir / name).read_bytes() for name in EXPECTED_OUTPUTS
        }
        run_pipeline(config)
        for name, blob in first.items():
            assert (result.out_dir / name).read_bytes() == blob, name

    def test_without_trades_discovery_is_skipped(self, input_dir, tmp_path):
        config = RunConfig(
            snapshots=str(input_dir / "snapshots.csv"),
            out_dir=str(tmp_path / "out"),
        )
        result = run_pipeline(config)
        assert result.manifest["discovery"] == "skipped (no trades)"
        assert "discovery.csv" not in result.manifest["outputs"]
        assert "trade_rows" not in result.manifest["counts"]
        assert not (result.out_dir / "discovery.csv").exists()
        records = read_records_csv(result.out_dir / "records.csv")
        assert all(math.isnan(rec.v_buy) and math.isnan(rec.v_sell) for rec in records)

    def test_min_days_drops_thin_stocks(self, input_dir, tmp_path):
        accepted, _ = ingest_snapshots(input_dir / "snapshots.csv")
        kept = [s for s in accepted if s.stock_id == "S00" or s.day_id == "D000"]
        snap_path = tmp_path / "snapshots.csv"
        write_snapshots_csv(snap_path, kept)
        config = RunConfig(
            snapshots=str(snap_path), out_dir=str(tmp_path / "out"), min_days=2
        )
        result = run_pipeline(config)
        counts = result.manifest["counts"]
        assert counts["stocks_dropped_min_days"] == 1
        assert counts["stocks"] == 1
        assert counts["stock_days"] == 3

    def test_missing_input_fails_the_ingest_stage(self, tmp_path):
        config = RunConfig(
            snapshots=str(tmp_path / "nope.csv"), out_dir=str(tmp_path / "out")
        )
        with pytest.raises(StageError, match=r"\[ingest\]") as err:
            run_pipeline(config)
        assert err.value.stage == "ingest"
        manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
        assert manifest["status"] == "failed"
        assert manifest["failed_stage"] == "ingest"
        assert manifest["error"]

    def test_missing_trades_fails_the_trades_stage(self, input_dir, tmp_path):
        config = RunConfig(
            snapshots=str(input_dir / "snapshots.csv"),
            out_dir=str(tmp_path / "out"),
            trades=str(tmp_path / "nope.csv"),
        )
        with pytest.raises(StageError) as err:
            run_pipeline(config)
        assert err.value.stage == "trades"

    def test_invalid_config_fails_before_writing(self, tmp_path):
        config = RunConfig(
            snapshots="in.csv", out_dir=str(tmp_path / "out"), spacing_seconds=7
        )
        with pytest.raises(StageError) as err:
            run_pipeline(config)
        assert err.value.stage == "config"
        assert not (tmp_path / "out").exists()


class TestPreparePanel:
    def test_matches_pipeline_counts(self, input_dir, run):
        config, result = run
        data = prepare_panel(config)
        counts = result.manifest["counts"]
        assert len(data.snapshots) == counts["rows_accepted"]
        assert len(data.windows) == counts["windows_total"]
        assert len(data.estimates) == counts["estimates"]
        assert len(data.records) == counts["records"]
        assert data.trade_rows == counts["trade_rows"]
        assert sorted(data.panel.keys()) == data.panel.keys()


def _loose_config(**kwargs):
    return RunConfig(snapshots="in.csv", out_dir="out", min_snapshots=1, **kwargs)


def _estimate(t, side, c, degenerate=False):
    return ConvexityEstimate("S00", "D000", t, side, 2e-4, c, 5e3, 0.9, 60, degenerate)


class TestAssembleRecords:
    def test_gap_breaks_the_return_chain(self):
        windows = [
            make_window([10.0], t=1),
            make_window([10.01], t=2),
            IntervalWindow("S00", "D000", 3),
            make_window([10.02], t=4),
        ]
        records = _assemble_records(windows, [], None, _loose_config())
        assert [rec.t for rec in records] == [1, 2, 4]
        assert math.isnan(records[0].r)
        assert records[1].r == pytest.approx(math.log(10.01 / 10.0), rel=1e-12)
        assert math.isnan(records[2].r)

    def test_day_change_resets_the_chain(self):
        windows = [
            make_window([10.0], day_id="D000", t=1),
            make_window([10.01], day_id="D001", t=1),
        ]
        records = _assemble_records(windows, [], None, _loose_config())
        assert all(math.isnan(rec.r) for rec in records)

    def test_degenerate_estimates_are_masked_by_default(self):
        windows = [make_window([10.0], t=1)]
        estimates = [_estimate(1, "bid", -0.05, degenerate=True), _estimate(1, "ask", 0.58)]
        masked = _assemble_records(windows, estimates, None, _loose_config())
        assert math.isnan(masked[0].c_bid) and math.isnan(masked[0].W_bid)
        assert masked[0].c_ask == 0.58

        kept = _assemble_records(
            windows, estimates, None, _loose_config(include_degenerate=True)
        )
        assert kept[0].c_bid == -0.05

    def test_volumes_default_to_zero_when_trades_given(self):
        windows = [make_window([10.0], t=1), make_window([10.0], t=2)]
        volumes = {("S00", "D000", 1): (120.0, 30.0)}
        records = _assemble_records(windows, [], volumes, _loose_config())
        assert (records[0].v_buy, records[0].v_sell) == (120.0, 30.0)
        assert (records[1].v_buy, records[1].v_sell) == (0.0, 0.0)

    def test_undersampled_windows_are_not_recorded(self):
        windows = [make_window([10.0, 10.01], t=1), make_window([10.0], t=2)]
        config = RunConfig(snapshots="in.csv", out_dir="out", min_snapshots=2)
        records = _assemble_records(windows, [], None, config)
        assert [rec.t for rec in records] == [1]
