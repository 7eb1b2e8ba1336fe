import filecmp
from pathlib import Path

import numpy as np
import pytest

from nenona import cli, network, pipeline
from nenona.features import CodeVector
from nenona.ingest import CODES, PipelineConfig, UnitId
from nenona.network import NetworkAccumulator
from nenona.pipeline import SchemaMismatch, StageError
from nenona.synth import CouplingSpec

SMALL = CouplingSpec(trials_per_condition=3)
CONFIG = PipelineConfig(ica_enabled=False)


def make_inputs(root, n=3, seed=5):
    in_dir = root / "in"
    pipeline.stage_synth(in_dir, n_participants=n, coupling=SMALL, seed=seed)
    return in_dir


def tree_files(root):
    return sorted(p.relative_to(root) for p in Path(root).rglob("*") if p.is_file())


class TestInterchange:
    def test_code_table_roundtrip(self, tmp_path):
        rng = np.random.default_rng(0)
        vectors = [CodeVector(i, tuple(int(v) for v in rng.integers(0, 2, 7)),
                              UnitId("p1", "feedback")) for i in range(6)]
        path = tmp_path / "codes.csv"
        pipeline.write_code_table(path, vectors)
        assert pipeline.read_code_table(path) == vectors

    def test_code_table_schema_mismatch(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("foo,bar\n1,2\n")
        with pytest.raises(SchemaMismatch):
            pipeline.read_code_table(path)

    def test_adjacency_roundtrip(self, tmp_path):
        rng = np.random.default_rng(1)
        w = rng.random((7, 7))
        acc = NetworkAccumulator("directed", CODES, w, UnitId("p1", "feedback"), 3)
        path = tmp_path / "adj.csv"
        pipeline.write_adjacency(path, acc)
        assert np.allclose(pipeline.read_adjacency(path), w, atol=1e-9)

    def test_adjacency_schema_mismatch(self, tmp_path):
        path = tmp_path / "adj.csv"
        path.write_text(",a,b\na,0,1\nb,1,0\n")
        with pytest.raises(SchemaMismatch):
            pipeline.read_adjacency(path)

    def test_points_roundtrip(self, tmp_path):
        units = (UnitId("p1", "feedback"), UnitId("p2", "no_feedback"))
        pts = np.array([[0.125, -3.5], [2.0, 0.875]])
        path = tmp_path / "points.csv"
        pipeline.write_points(path, units, pts)
        r_units, r_pts = pipeline.read_points(path)
        assert r_units == units
        assert np.array_equal(r_pts, pts)

    def test_layout_roundtrip(self, tmp_path):
        rng = np.random.default_rng(2)
        layout_in = np.round(rng.normal(size=(7, 2)), 6)
        from nenona.projection import NodeLayout
        path = tmp_path / "layout.csv"
        pipeline.write_layout(path, NodeLayout(layout_in, 0.0))
        assert np.array_equal(pipeline.read_layout(path).positions, layout_in)

    def test_manifest_roundtrip(self, tmp_path):
        entries = [{"participant": "p1", "condition": "feedback",
                    "kind": "symmetric", "update_count": "4", "file": "a.csv"}]
        path = tmp_path / "manifest.csv"
        pipeline.write_network_manifest(path, entries)
        assert pipeline.read_network_manifest(path) == entries


class TestStages:
    def test_missing_trial_log_names_participant(self, tmp_path):
        in_dir = make_inputs(tmp_path)
        (in_dir / "P02_trials.csv").unlink()
        with pytest.raises(StageError, match="P02"):
            pipeline.discover_participants(in_dir)

    def test_empty_input_dir(self, tmp_path):
        with pytest.raises(StageError):
            pipeline.discover_participants(tmp_path)

    def test_run_all_produces_expected_outputs(self, tmp_path):
        in_dir = make_inputs(tmp_path)
        out = tmp_path / "out"
        manifest = pipeline.run_all(in_dir, out, config=CONFIG)
        assert manifest["stages"] == list(pipeline.STAGES)
        for name in ("nena_feedback.svg", "nena_no_feedback.svg", "nena_diff.svg",
                     "nona_feedback.svg", "nona_no_feedback.svg", "nona_diff.svg",
                     "points_symmetric.svg", "points_directed.svg"):
            assert (out / "render" / name).is_file()
        assert (out / "run_manifest.json").is_file()
        assert (out / "summary.txt").is_file()
        assert not (out / ".partial").exists()

    def test_run_all_matches_manual_stage_composition(self, tmp_path):
        in_dir = make_inputs(tmp_path)
        auto = tmp_path / "auto"
        manual = tmp_path / "manual"
        pipeline.run_all(in_dir, auto, config=CONFIG)

        participants = pipeline.discover_participants(in_dir)
        cleaned = pipeline.stage_preprocess(participants, CONFIG, manual / "preprocess")
        table = pipeline.stage_features(cleaned, CONFIG, manual / "codes")
        pipeline.stage_accumulate(table, CONFIG, manual / "networks")
        pipeline.stage_project(manual / "networks", CONFIG, manual / "projection")
        pipeline.stage_stats(manual / "projection", manual / "stats")
        pipeline.stage_render(manual / "networks", manual / "projection",
                              CONFIG, manual / "render")

        manual_files = tree_files(manual)
        auto_files = [f for f in tree_files(auto)
                      if f.name not in ("run_manifest.json", "summary.txt")]
        assert auto_files == manual_files
        for rel in manual_files:
            assert filecmp.cmp(auto / rel, manual / rel, shallow=False), rel

    def test_stage_subset_resumes_from_preprocess(self, tmp_path):
        in_dir = make_inputs(tmp_path)
        out = tmp_path / "out"
        pipeline.run_all(in_dir, out, config=CONFIG, stages=["preprocess"])
        assert not (out / "codes").exists()
        manifest = pipeline.run_all(in_dir, out, config=CONFIG,
                                    stages=["features", "accumulate"])
        assert manifest["stages"] == ["features", "accumulate"]
        assert (out / "networks" / "manifest.csv").is_file()

    def test_unknown_stage_rejected(self, tmp_path):
        with pytest.raises(StageError):
            pipeline.run_all(make_inputs(tmp_path), tmp_path / "out",
                             config=CONFIG, stages=["preprocess", "polish"])

    def test_partial_marker_on_stage_failure(self, tmp_path):
        in_dir = make_inputs(tmp_path)
        out = tmp_path / "out"
        pipeline.run_all(in_dir, out, config=CONFIG, stages=["preprocess"])
        (out / "preprocess" / "P01_clean.csv").write_text("garbage\n")
        with pytest.raises(StageError):
            pipeline.run_all(in_dir, out, config=CONFIG, stages=["features"])
        assert (out / ".partial").is_file()
        assert not (out / "run_manifest.json").exists()

    def test_window_changes_directed_networks(self, tmp_path):
        in_dir = make_inputs(tmp_path)
        out = tmp_path / "out"
        pipeline.run_all(in_dir, out, config=CONFIG,
                         stages=["preprocess", "features"])
        table = out / "codes" / "code_table.csv"
        pipeline.stage_accumulate(table, CONFIG, tmp_path / "w2", window=2)
        pipeline.stage_accumulate(table, CONFIG, tmp_path / "w3", window=3)
        a = pipeline.read_adjacency(tmp_path / "w2" / "nona_P01_feedback.csv")
        b = pipeline.read_adjacency(tmp_path / "w3" / "nona_P01_feedback.csv")
        assert not np.array_equal(a, b)
        # symmetric accumulation ignores the window entirely
        s2 = pipeline.read_adjacency(tmp_path / "w2" / "nena_P01_feedback.csv")
        s3 = pipeline.read_adjacency(tmp_path / "w3" / "nena_P01_feedback.csv")
        assert np.array_equal(s2, s3)


class TestCli:
    def test_full_run_exit_ok(self, tmp_path, capsys):
        in_dir = tmp_path / "in"
        assert cli.main(["synth", "--out", str(in_dir), "--participants", "3",
                         "--seed", "5"]) == cli.EXIT_OK
        out = tmp_path / "out"
        assert cli.main(["run", "--in", str(in_dir), "--out", str(out),
                         "--no-ica"]) == cli.EXIT_OK
        assert (out / "run_manifest.json").is_file()
        assert "completed stages" in capsys.readouterr().out

    def test_missing_input_dir_exit_input(self, tmp_path, capsys):
        code = cli.main(["run", "--in", str(tmp_path / "nope"),
                         "--out", str(tmp_path / "out")])
        assert code == cli.EXIT_INPUT
        assert "error" in capsys.readouterr().err

    def test_partial_failure_exit_partial(self, tmp_path, capsys):
        in_dir = make_inputs(tmp_path)
        out = tmp_path / "out"
        assert cli.main(["run", "--in", str(in_dir), "--out", str(out),
                         "--no-ica", "--stages", "preprocess"]) == cli.EXIT_OK
        (out / "preprocess" / "P01_clean.csv").write_text("garbage\n")
        code = cli.main(["run", "--in", str(in_dir), "--out", str(out),
                         "--no-ica", "--stages", "features,accumulate"])
        assert code == cli.EXIT_PARTIAL

    def test_network_window_flag_beats_config(self, tmp_path):
        in_dir = make_inputs(tmp_path)
        out = tmp_path / "out"
        cli.main(["run", "--in", str(in_dir), "--out", str(out), "--no-ica",
                  "--stages", "preprocess,features"])
        table = out / "codes" / "code_table.csv"
        config = tmp_path / "cfg.txt"
        config.write_text("nona_window=4\n")
        assert cli.main(["network", "--codes", str(table), "--config", str(config),
                         "--out", str(tmp_path / "cfg_run")]) == cli.EXIT_OK
        assert cli.main(["network", "--codes", str(table), "--config", str(config),
                         "--window", "2",
                         "--out", str(tmp_path / "flag_run")]) == cli.EXIT_OK
        # flag overrides the config file: equals a plain window-2 run
        vectors = pipeline.read_code_table(table)
        unit_vecs = {v.unit: v for v in vectors if v.unit.participant == "P01"}
        assert unit_vecs  # sanity: P01 contributed epochs
        flag = pipeline.read_adjacency(tmp_path / "flag_run" / "nona_P01_feedback.csv")
        cfg = pipeline.read_adjacency(tmp_path / "cfg_run" / "nona_P01_feedback.csv")
        seq = sorted((v for v in vectors
                      if v.unit == UnitId("P01", "feedback")),
                     key=lambda v: v.epoch_index)
        expected2 = network.accumulate_directed(seq, window=2).weights
        expected4 = network.accumulate_directed(seq, window=4).weights
        assert np.array_equal(flag, expected2)
        assert np.array_equal(cfg, expected4)

    def test_stats_subcommand_reports(self, tmp_path, capsys):
        in_dir = make_inputs(tmp_path)
        out = tmp_path / "out"
        cli.main(["run", "--in", str(in_dir), "--out", str(out), "--no-ica"])
        code = cli.main(["stats", "--projection", str(out / "projection"),
                         "--out", str(tmp_path / "stats2")])
        assert code == cli.EXIT_OK
        text = (tmp_path / "stats2" / "stats_symmetric.txt").read_text()
        assert "SVD1" in text and "Cohen's d" in text
