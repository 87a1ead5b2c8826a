import numpy as np
import pytest

from specklecnn.cli import build_parser, main
from specklecnn.imageio import load_image, save_ppm


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture(scope="module")
def trained(tmp_path_factory):
    """A small synth dataset trained for two epochs (tiny profile)."""
    root = tmp_path_factory.mktemp("pipeline")
    data = root / "data"
    model = root / "model.spkl"
    history = root / "history.csv"
    assert run(["synth", "--classes", 3, "--per-class", 6, "--side", 64,
                "--out", data, "--laser", "green", "--seed", 1]) == 0
    assert run(["train", "--data", data, "--laser", "green", "--profile",
                "tiny", "--epochs", 2, "--seed", 1, "--out", model,
                "--history", history]) == 0
    return {"root": root, "data": data, "model": model,
            "history": history}


class TestArgErrors:
    def test_missing_data_flag_exits_2(self, capsys):
        with pytest.raises(SystemExit) as exc:
            run(["train"])
        assert exc.value.code == 2
        assert "usage" in capsys.readouterr().err

    def test_unknown_command_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            run(["frobnicate"])
        assert exc.value.code == 2

    def test_synth_single_class_exits_2(self, tmp_path, capsys):
        assert run(["synth", "--classes", 1, "--per-class", 5,
                    "--out", tmp_path / "x"]) == 2
        assert "at least 2" in capsys.readouterr().err

    def test_bad_epochs_exits_2(self, tmp_path, capsys):
        assert run(["train", "--data", tmp_path, "--epochs", 0]) == 2

    def test_help_documents_defaults(self, capsys):
        parser = build_parser()
        for sub, fragments in {
            "train": ["default: 100", "default: 0.001", "default: 32",
                      "default: 0.2", "default: full", "default: green",
                      "default: 0.9", "default: 0.999"],
            "synth": ["default: 64", "default: 0"],
        }.items():
            with pytest.raises(SystemExit):
                parser.parse_args([sub, "--help"])
            text = capsys.readouterr().out
            for fragment in fragments:
                assert fragment in text, (sub, fragment)


class TestSynth:
    def test_tree_written(self, tmp_path, capsys):
        out = tmp_path / "ds"
        assert run(["synth", "--classes", 2, "--per-class", 3, "--side",
                    32, "--out", out, "--seed", 3]) == 0
        assert "6 images" in capsys.readouterr().out
        assert len(list(out.glob("mat*/img*.ppm"))) == 6
        assert (out / "manifest.csv").exists()

    def test_unwritable_out_exits_4(self, tmp_path):
        blocker = tmp_path / "file.txt"
        blocker.write_text("block")
        assert run(["synth", "--classes", 2, "--per-class", 1,
                    "--out", blocker / "sub"]) == 4


class TestTrain:
    def test_history_rows_match_epochs(self, trained):
        lines = trained["history"].read_text().strip().splitlines()
        assert lines[0] == "epoch,train_loss,train_acc,val_loss,val_acc"
        assert len(lines) == 1 + 2

    def test_checkpoint_written(self, trained):
        from specklecnn import load_checkpoint
        params, meta = load_checkpoint(trained["model"])
        assert params.input_side == 64
        assert meta["laser"] == "green"
        assert meta["class_names"] == ["mat00", "mat01", "mat02"]
        assert meta["epochs"] == 2 and meta["lr"] == 0.001

    def test_missing_dataset_exits_3(self, tmp_path, capsys):
        assert run(["train", "--data", tmp_path / "nope",
                    "--out", tmp_path / "m.spkl",
                    "--history", tmp_path / "h.csv"]) == 3

    def test_unwritable_history_exits_4(self, trained, tmp_path):
        assert run(["train", "--data", trained["data"], "--profile",
                    "tiny", "--epochs", 1,
                    "--out", tmp_path / "m.spkl",
                    "--history", tmp_path / "no" / "dir" / "h.csv"]) == 4


class TestEval:
    def test_eval_writes_reports(self, trained, tmp_path, capsys):
        report = tmp_path / "report.csv"
        cmatrix = tmp_path / "confusion.csv"
        assert run(["eval", trained["model"], "--data", trained["data"],
                    "--report", report, "--confusion", cmatrix]) == 0
        out = capsys.readouterr().out
        assert "accuracy " in out and "macro_f1 " in out
        lines = report.read_text().strip().splitlines()
        assert len(lines) == 1 + 3 + 3  # header + classes + aggregates
        assert cmatrix.read_text().startswith("true\\pred,mat00,mat01,mat02")

    def test_laser_mismatch_exits_5(self, trained, tmp_path, capsys):
        assert run(["eval", trained["model"], "--data", trained["data"],
                    "--laser", "red",
                    "--report", tmp_path / "r.csv",
                    "--confusion", tmp_path / "c.csv"]) == 5
        assert "--force" in capsys.readouterr().err

    def test_laser_mismatch_forced(self, trained, tmp_path):
        assert run(["eval", trained["model"], "--data", trained["data"],
                    "--laser", "red", "--force",
                    "--report", tmp_path / "r.csv",
                    "--confusion", tmp_path / "c.csv"]) == 0

    def test_missing_checkpoint_exits_4(self, trained, tmp_path):
        assert run(["eval", tmp_path / "missing.spkl",
                    "--data", trained["data"]]) == 4

    def test_corrupt_checkpoint_exits_4(self, trained, tmp_path):
        bad = tmp_path / "bad.spkl"
        bad.write_bytes(b"JUNKJUNKJUNK")
        assert run(["eval", bad, "--data", trained["data"]]) == 4

    def test_class_count_mismatch_exits_3(self, trained, tmp_path):
        extra = trained["data"] / "mat9"
        extra.mkdir()
        try:
            img = np.zeros((64, 64, 3), dtype=np.uint8)
            save_ppm(extra / "img.ppm", img)
            assert run(["eval", trained["model"],
                        "--data", trained["data"],
                        "--report", tmp_path / "r.csv",
                        "--confusion", tmp_path / "c.csv"]) == 3
        finally:
            for p in extra.iterdir():
                p.unlink()
            extra.rmdir()


class TestPredict:
    def test_prints_class_and_probability(self, trained, capsys):
        image = next(trained["data"].glob("mat00/*.ppm"))
        assert run(["predict", trained["model"], image]) == 0
        out = capsys.readouterr().out.strip()
        name, prob = out.split()
        assert name in ("mat00", "mat01", "mat02")
        assert 0.0 < float(prob) <= 1.0
        assert len(prob.split(".")[1]) == 4

    def test_retint_Channel_swap_identical_output(self, trained, tmp_path,
                                                  capsys):
        src = next(trained["data"].glob("mat01/*.ppm"))
        assert run(["predict", trained["model"], src,
                    "--laser", "green"]) == 0
        green_line = capsys.readouterr().out

        img = load_image(src)
        retinted = img.copy()
        retinted[:, :, 0] = img[:, :, 1]
        retinted[:, :, 1] = img[:, :, 0]
        moved = tmp_path / "retinted.ppm"
        save_ppm(moved, retinted)
        assert run(["predict", trained["model"], moved,
                    "--laser", "red"]) == 0
        assert capsys.readouterr().out == green_line

    def test_nonexistent_image_exits_3(self, trained, tmp_path, capsys):
        assert run(["predict", trained["model"],
                    tmp_path / "missing.ppm"]) == 3

    def test_undecodable_image_exits_3(self, trained, tmp_path):
        bad = tmp_path / "bad.ppm"
        bad.write_bytes(b"P6\n9 9\n255\nshort")
        assert run(["predict", trained["model"], bad]) == 3
