import csv
import json

import numpy as np
import pytest

from syncurator import EmbeddingBundle, generate_pair, write_embedding_bundle, write_pair
from syncurator.cli import main
from syncurator.synth import MotionParams, SynthSpec


@pytest.fixture
def corpus(tmp_path):
    """Six-pair corpus: lags 0..3 with noise, plus two clean identical pairs."""
    directory = tmp_path / "corpus"
    for lag in range(4):
        spec = SynthSpec(n_frames=41, lag_frames=lag, noise_sigma=0.002, seed=lag)
        write_pair(generate_pair(spec), directory)
    for seed in (100, 101):
        write_pair(generate_pair(SynthSpec(n_frames=41, seed=seed)), directory)
    return directory


def read_json(path):
    return json.loads(path.read_bytes())


class TestScore:
    def test_happy_path(self, corpus, tmp_path):
        out = tmp_path / "run"
        assert main(["score", str(corpus), "--out", str(out)]) == 0
        doc = read_json(out / "scores.json")
        assert len(doc["scores"]) == 6
        assert doc["version"]
        assert doc["config"]["weights"]["speech"] == 0.4
        identical = [r for r in doc["scores"] if r["kind"] == "identical_pair"]
        assert len(identical) == 2
        assert all(abs(r["sync_score"] - 1.0) < 1e-6 for r in identical)

    def test_partial_failure(self, corpus, tmp_path):
        bad = corpus / "zz-broken.pair.json"
        bad.write_text("{not json")
        out = tmp_path / "run"
        assert main(["score", str(corpus), "--out", str(out)]) == 1
        doc = read_json(out / "scores.json")
        assert len(doc["scores"]) == 6
        assert len(doc["errors"]) == 1
        assert "zz-broken" in doc["errors"][0]["path"]

    def test_rerun_byte_identical(self, corpus, tmp_path):
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert main(["score", str(corpus), "--out", str(out1)]) == 0
        assert main(["score", str(corpus), "--out", str(out2), "--jobs", "3"]) == 0
        first = (out1 / "scores.json").read_bytes()
        second = (out2 / "scores.json").read_bytes()
        # jobs appears in the config echo; outputs must agree otherwise.
        assert first.replace(b'"jobs": null', b'"jobs": 3') == second

    def test_no_files(self, tmp_path):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["score", str(empty), "--out", str(tmp_path / "o")]) == 1


class TestFilter:
    def test_filtered_composition(self, corpus, tmp_path):
        out = tmp_path / "run"
        main(["score", str(corpus), "--out", str(out)])
        code = main(
            [
                "filter",
                "--scores",
                str(out / "scores.json"),
                "--out",
                str(out),
                "--target-size",
                "4",
                "--ratio",
                "3:1",
            ]
        )
        assert code == 0
        doc = read_json(out / "manifest.json")
        kinds = [e["kind"] for e in doc["accepted"]]
        assert kinds.count("edited_pair") == 3
        assert kinds.count("identical_pair") == 1
        scores = [e["sync_score"] for e in doc["accepted"]]
        assert scores == sorted(scores, reverse=True)

    def test_insufficient_pool(self, corpus, tmp_path, capsys):
        out = tmp_path / "run"
        main(["score", str(corpus), "--out", str(out)])
        code = main(
            ["filter", "--scores", str(out / "scores.json"), "--out", str(out),
             "--target-size", "512"]
        )
        assert code == 1
        assert "shortfall" in capsys.readouterr().err

    def test_random_seeded_determinism(self, corpus, tmp_path):
        out = tmp_path / "run"
        main(["score", str(corpus), "--out", str(out)])
        args = [
            "filter", "--scores", str(out / "scores.json"), "--target-size", "4",
            "--composition", "random", "--seed", "7",
        ]
        main(args + ["--out", str(tmp_path / "m1")])
        main(args + ["--out", str(tmp_path / "m2")])
        assert (tmp_path / "m1" / "manifest.json").read_bytes() == (
            tmp_path / "m2" / "manifest.json"
        ).read_bytes()


def toy_embedding(pair_id, seed, text=True, identical=False):
    rng = np.random.default_rng(seed)
    dim, face_dim, frames = 12, 8, 6
    src = rng.normal(size=(frames, dim))
    face = rng.normal(size=face_dim)
    if identical:
        edit, key, src_first = src, src[0].copy(), src[0].copy()
        faces = np.tile(face, (frames, 1))
    else:
        edit = src + rng.normal(size=(frames, dim))
        key, src_first = rng.normal(size=dim), rng.normal(size=dim)
        faces = rng.normal(size=(frames, face_dim))
    return EmbeddingBundle(
        pair_id=pair_id,
        src_frames=src,
        edit_frames=edit,
        key=key,
        src_first=src_first,
        face_edit_frames=faces,
        face_key=face,
        text_source=rng.normal(size=dim) if text else None,
        text_target=rng.normal(size=dim) if text else None,
    )


class TestEval:
    def test_missing_text_marks_na(self, corpus, tmp_path):
        emb_dir = tmp_path / "emb"
        emb_dir.mkdir()
        pair_id = "synth-f41-l+1-n0.002-d0-s1"
        write_embedding_bundle(
            toy_embedding(pair_id, seed=1, text=False), emb_dir / f"{pair_id}.emb.json"
        )
        out = tmp_path / "run"
        code = main(
            ["eval", "--pairs", str(corpus / f"{pair_id}.pair.json"),
             "--embeddings", str(emb_dir), "--out", str(out)]
        )
        assert code == 0
        rows = {
            (row["block"], row["metric"]): row
            for row in csv.DictReader((out / "metrics.csv").open())
        }
        assert rows[("Edit Fidelity", "Directional CLIP (text-dual)")]["mean"] == "N/A"
        assert rows[("Edit Fidelity", "CLIP-Text Align.")]["mean"] == "N/A"
        assert rows[("Edit Fidelity", "Directional CLIP (image)")]["mean"] != "N/A"
        assert rows[("Synchronization", "Speech Corr.")]["mean"] != "N/A"

    def test_identity_inputs(self, tmp_path):
        pair_id = "synth-f41-l+0-n0-d0-s100"
        corpus = tmp_path / "c"
        write_pair(generate_pair(SynthSpec(n_frames=41, seed=100)), corpus)
        emb_dir = tmp_path / "emb"
        emb_dir.mkdir()
        write_embedding_bundle(
            toy_embedding(pair_id, seed=2, identical=True), emb_dir / f"{pair_id}.emb.json"
        )
        out = tmp_path / "run"
        assert main(
            ["eval", "--pairs", str(corpus), "--embeddings", str(emb_dir), "--out", str(out)]
        ) == 0
        doc = read_json(out / "metrics.json")
        row = doc["pairs"][0]
        for key in ("speech_corr", "gaze_corr", "blink_corr", "pose_corr"):
            assert abs(row[key] - 1.0) < 1e-9
        assert abs(row["arcface_sim"] - 1.0) < 1e-9
        # identical embeddings leave the edit direction undefined -> N/A
        assert row["directional_clip_image"] is None
        assert "directional_clip_image" in row["unavailable"]

    def test_matches_library_calls(self, corpus, tmp_path):
        from syncurator import compute_metrics, load_pair
        from syncurator.evalmetrics import eval_sync
        from syncurator.channels import Channel

        pair_id = "synth-f41-l+2-n0.002-d0-s2"
        emb_dir = tmp_path / "emb"
        emb_dir.mkdir()
        bundle = toy_embedding(pair_id, seed=3)
        write_embedding_bundle(bundle, emb_dir / f"{pair_id}.emb.json")
        out = tmp_path / "run"
        main(["eval", "--pairs", str(corpus / f"{pair_id}.pair.json"),
              "--embeddings", str(emb_dir), "--out", str(out)])
        row = read_json(out / "metrics.json")["pairs"][0]
        sync = eval_sync(load_pair(corpus / f"{pair_id}.pair.json"))
        report = compute_metrics(bundle)
        assert row["speech_corr"] == sync[Channel.SPEECH]
        assert row["directional_clip_image"] == report.directional_clip_image
        assert row["clip_text_align"] == report.clip_text_align
        assert row["arcface_sim"] == report.arcface_sim


class TestTrace:
    def test_blink_peaks_differ_by_injected_lag(self, tmp_path):
        lag = 3
        # Period 40 over 41 frames: exactly one closure peak per view.
        spec = SynthSpec(
            n_frames=41, lag_frames=lag, motion=MotionParams(blink_period=40.0)
        )
        record = write_pair(generate_pair(spec), tmp_path / "c")
        out = tmp_path / "run"
        assert main(["trace", str(record), "--out", str(out)]) == 0
        trace_file = out / f"{spec.pair_id}.trace.csv"
        peaks = {}
        rows = [
            row
            for row in csv.DictReader(trace_file.open())
            if row["channel"] == "blink" and row["stage"] == "normalized"
        ]
        for view in ("source", "edited"):
            series = [float(r["value"]) for r in rows if r["view"] == view]
            peaks[view] = int(np.argmax(series))
        assert abs(peaks["source"] - peaks["edited"]) == lag

    def test_default_exports_all_channels_and_stages(self, tmp_path):
        record = write_pair(generate_pair(SynthSpec(n_frames=21)), tmp_path / "c")
        out = tmp_path / "run"
        main(["trace", str(record), "--out", str(out)])
        trace_file = next(out.glob("*.trace.csv"))
        rows = list(csv.DictReader(trace_file.open()))
        assert {r["channel"] for r in rows} == {"speech", "gaze", "blink", "pose"}
        assert {r["stage"] for r in rows} == {"raw", "interpolated", "smoothed", "normalized"}
        assert {r["view"] for r in rows} == {"source", "edited"}

    def test_raw_stage_missing_values_are_empty_cells(self, tmp_path):
        spec = SynthSpec(n_frames=21, dropout_rate=0.3, seed=5)
        record = write_pair(generate_pair(spec), tmp_path / "c")
        out = tmp_path / "run"
        main(["trace", str(record), "--stage", "raw", "--out", str(out)])
        rows = list(csv.DictReader(next(out.glob("*.trace.csv")).open()))
        assert {r["stage"] for r in rows} == {"raw"}
        empties = [r for r in rows if r["value"] == ""]
        assert empties, "dropout frames must serialize as empty cells"

    def test_channel_subset(self, tmp_path):
        record = write_pair(generate_pair(SynthSpec(n_frames=21)), tmp_path / "c")
        out = tmp_path / "run"
        main(["trace", str(record), "--channels", "blink,speech", "--out", str(out)])
        rows = list(csv.DictReader(next(out.glob("*.trace.csv")).open()))
        assert {r["channel"] for r in rows} == {"speech", "blink"}


class TestSynthCommand:
    def test_emits_consumable_corpus(self, tmp_path):
        out = tmp_path / "synth"
        code = main(
            ["synth", "--out", str(out), "--lags", "0:1", "--noise", "0.001",
             "--identical", "1", "--n-frames", "21"]
        )
        assert code == 0
        index = read_json(out / "synth_index.json")
        assert len(index["pair_files"]) == 3
        run = tmp_path / "run"
        assert main(["score", str(out), "--out", str(run)]) == 0
        assert len(read_json(run / "scores.json")["scores"]) == 3


class TestReport:
    def test_combines_outputs(self, corpus, tmp_path):
        out = tmp_path / "run"
        main(["score", str(corpus), "--out", str(out)])
        main(["filter", "--scores", str(out / "scores.json"), "--out", str(out),
              "--target-size", "4"])
        pair_file = next(corpus.glob("*l+1*.pair.json"))
        main(["trace", str(pair_file), "--out", str(out)])
        trace_file = next(out.glob("*.trace.csv"))
        code = main(
            ["report", "--scores", str(out / "scores.json"),
             "--manifest", str(out / "manifest.json"),
             "--traces", str(trace_file), "--out", str(out)]
        )
        assert code == 0
        doc = read_json(out / "report.json")
        assert doc["tool"] == "syncurator"
        assert len(doc["scores"]["scores"]) == 6
        assert len(doc["manifest"]["accepted"]) == 4
        assert doc["traces"][0]["rows"] > 0


class TestInvocation:
    def test_invalid_invocation_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["score"])  # missing required positional
        assert excinfo.value.code == 2

    def test_unknown_command_exits_2(self):
        with pytest.raises(SystemExit) as excinfo:
            main(["frobnicate"])
        assert excinfo.value.code == 2


class TestConfigPrecedence:
    def test_flags_beat_file(self, corpus, tmp_path):
        config = tmp_path / "run.toml"
        config.write_text(
            'target_size = 2\nratio = "1:1"\n\n[weights]\n'
            "speech = 0.7\ngaze = 0.1\nblink = 0.1\npose = 0.1\n"
        )
        out = tmp_path / "run"
        main(["score", str(corpus), "--out", str(out), "--config", str(config)])
        doc = read_json(out / "scores.json")
        assert doc["weights"]["speech"] == 0.7
        main(
            ["filter", "--scores", str(out / "scores.json"), "--out", str(out),
             "--config", str(config), "--target-size", "4", "--ratio", "3:1"]
        )
        manifest = read_json(out / "manifest.json")
        assert len(manifest["accepted"]) == 4  # flag overrode file's 2
        assert manifest["ratio"] == "3:1"

    def test_env_var_fallback(self, corpus, tmp_path, monkeypatch):
        config = tmp_path / "run.json"
        config.write_text(json.dumps({"weights": {"speech": 0.55, "gaze": 0.25,
                                                  "blink": 0.1, "pose": 0.1}}))
        monkeypatch.setenv("SYNCURATOR_CONFIG", str(config))
        out = tmp_path / "run"
        main(["score", str(corpus), "--out", str(out)])
        assert read_json(out / "scores.json")["weights"]["speech"] == 0.55

    def test_drop_channel_flag(self, corpus, tmp_path):
        out = tmp_path / "run"
        main(["score", str(corpus), "--out", str(out), "--drop-channel", "speech"])
        doc = read_json(out / "scores.json")
        assert doc["weights"]["speech"] == 0.0
        assert doc["weights"]["gaze"] == pytest.approx(0.5)
        assert doc["config"]["drop_channel"] == "speech"

    def test_rerun_from_config_echo_reproduces_output(self, corpus, tmp_path):
        out1 = tmp_path / "r1"
        main(["score", str(corpus), "--out", str(out1), "--drop-channel", "blink",
              "--seed", "5"])
        echo = read_json(out1 / "scores.json")["config"]
        config = tmp_path / "echo.json"
        config.write_text(json.dumps(echo))
        out2 = tmp_path / "r2"
        main(["score", str(corpus), "--out", str(out2), "--config", str(config)])
        assert (out1 / "scores.json").read_bytes() == (out2 / "scores.json").read_bytes()
