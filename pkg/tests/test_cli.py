import json

import pytest

from mmgesture import __version__
from mmgesture.cli import build_parser, main
from mmgesture.services import storage


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["--out", str(out), "--seed", "5", "synth", "--kinds", "PH,LS", "--per-class", "1"]) == 0
    return out


def _json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.startswith("{")]


def test_version(capsys):
    with pytest.raises(SystemExit):
        build_parser().parse_args(["--version"])
    assert __version__ in capsys.readouterr().out


def test_synth_writes_a_manifest(synth_dir):
    manifest = storage.load_manifest(synth_dir / "manifest.json")
    assert [e.path for e in manifest.entries] == ["PH_000.drai", "LS_000.drai"]
    assert all(e.user == "synthetic" for e in manifest.entries)
    for stem in ("PH_000", "LS_000"):
        assert (synth_dir / f"{stem}.mmwc").exists()
        assert (synth_dir / f"{stem}.rdi.npz").exists()
    assert len(storage.load_dataset(synth_dir / "manifest.json")) == 2


def test_process(synth_dir, tmp_path):
    code = main(["--out", str(tmp_path), "process", "--input", str(synth_dir / "PH_000.mmwc"), "--label", "push"])
    assert code == 0
    seq = storage.read_drai_sequence(tmp_path / "PH_000.drai")
    original = storage.read_drai_sequence(synth_dir / "PH_000.drai")
    assert seq.label.name == "PH"
    assert seq.stack().shape == original.stack().shape


def test_augment(synth_dir, tmp_path):
    code = main(["--out", str(tmp_path), "augment", "--manifest", str(synth_dir / "manifest.json"), "--factor", "2"])
    assert code == 0
    assert len(storage.load_manifest(tmp_path / "manifest.json").entries) == 4


def test_segment_finds_the_gesture(synth_dir, capsys):
    assert main(["segment", "--input", str(synth_dir / "PH_000.mmwc"), "--plot"]) == 0
    out = capsys.readouterr().out
    windows = _json_lines(out)
    assert windows
    assert windows[0]["stream_id"] == "PH_000"
    assert "Motion indicator" in out


def test_train_then_eval(synth_dir, tmp_path, capsys):
    manifest = str(synth_dir / "manifest.json")
    code = main(["--out", str(tmp_path), "train", "--manifest", manifest, "--steps", "1", "--preset", "lite"])
    assert code == 0
    assert (tmp_path / "model.digm").exists()
    assert main(["eval", "--manifest", manifest, "--model", str(tmp_path / "model.digm")]) == 0
    out = capsys.readouterr().out
    assert "accuracy:" in out
    assert "domains: 1 rooms x 1 users" in out


def test_stream_with_templates(capsys):
    assert main(["--seed", "2", "stream", "--synthetic", "2", "--oracle-dtw", "--no-pace"]) == 0
    captured = capsys.readouterr()
    for record in _json_lines(captured.out):
        assert record["class"] in {"PH", "PL", "LS", "RS", "CT", "AT"}
        assert record["start_frame"] <= record["end_frame"]
    assert "frames:" in captured.err
    assert "CRA" in captured.err


@pytest.mark.parametrize(
    "argv",
    [
        ["bench", "--trials", "10"],
        ["--config", "absent.yaml", "bench"],
        ["stream", "--synthetic", "1", "--no-pace"],
    ],
)
def test_usage_errors_exit_with_two(argv, capsys):
    assert main(argv) == 2
    assert "mmgesture:" in capsys.readouterr().err


def test_missing_input_file_exits_with_one(tmp_path):
    assert main(["segment", "--input", str(tmp_path / "absent.mmwc")]) == 1
