import csv
import json
import tempfile
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from PIL import Image

from lplc2 import io
from lplc2.attention import DetectionEvent
from lplc2.cli import main
from lplc2.config import ModelConfig
from lplc2.detector import Detector, run_detector


def save_frames(d, frames):
    d.mkdir(parents=True, exist_ok=True)
    for t, f in enumerate(frames):
        Image.fromarray(f.astype(np.uint8)).save(d / f"img{t}.png")


def test_ingest_directory_numeric_order(tmp_path, rng):
    frames = [rng.integers(0, 256, (10, 12)) for _ in range(12)]
    save_frames(tmp_path / "in", frames)
    got = io.ingest(tmp_path / "in", 33)
    assert len(got) == 12
    # img10 sorts after img9, not after img1
    assert all(np.array_equal(g, f) for g, f in zip(got, frames))


def test_ingest_fifty_frames(tmp_path):
    save_frames(tmp_path / "in", [np.full((100, 100), t) for t in range(50)])
    got = io.ingest(tmp_path / "in", 33)
    assert len(got) == 50 and all(g.shape == (100, 100) for g in got)


def test_ingest_color_luminance(tmp_path):
    d = tmp_path / "c"
    d.mkdir()
    rgb = np.zeros((4, 4, 3), np.uint8)
    rgb[..., 0] = 200
    for t in range(2):
        Image.fromarray(rgb).save(d / f"f{t}.png")
    got = io.ingest(d, 33)
    assert got[0][0, 0] == pytest.approx(0.299 * 200)


def test_ingest_errors(tmp_path):
    d = tmp_path / "mixed"
    save_frames(d, [np.zeros((100, 100)), np.zeros((100, 99))])
    with pytest.raises(io.IngestError, match="inconsistent"):
        io.ingest(d, 33)
    one = tmp_path / "one"
    save_frames(one, [np.zeros((5, 5))])
    with pytest.raises(io.IngestError, match="at least 2"):
        io.ingest(one, 33)
    bad = tmp_path / "bad"
    bad.mkdir()
    (bad / "a0.png").write_bytes(b"not an image")
    (bad / "a1.png").write_bytes(b"not an image")
    with pytest.raises(io.IngestError, match="cannot read"):
        io.ingest(bad, 33)
    with pytest.raises(io.IngestError):
        io.ingest(tmp_path / "missing", 33)
    with pytest.raises(io.IngestError):
        io.ingest(d, 0)


def test_raw_round_trip(tmp_path, rng):
    frames = rng.integers(0, 256, (7, 6, 5), dtype=np.uint8)
    p = tmp_path / "x.raw"
    frames.tofile(p)
    got = io.ingest(p, 33, width=5, height=6)
    assert len(got) == 7
    assert all(np.array_equal(g, f) for g, f in zip(got, frames))
    with pytest.raises(io.IngestError):
        io.ingest(p, 33, width=4, height=6)
    with pytest.raises(io.IngestError):
        io.ingest(p, 33)


def _event(t, afs, created=(), removed=()):
    return DetectionEvent(t, afs, list(created), list(removed))


def _af(i, resp=1.0):
    return {"id": i, "cx": 3, "cy": 4, "radius": 40, "response": resp, "age_frames": 0, "windowed_sum": resp}


def test_emit_empty(tmp_path):
    written = io.emit([], tmp_path / "o")
    assert (tmp_path / "o" / "events.jsonl").read_text() == ""
    assert not list((tmp_path / "o").glob("af_*.csv"))
    assert "figure" not in written


def test_emit_rows_and_schema(tmp_path):
    events = [_event(t, [_af(0, 0.1 * t)] if 10 <= t <= 20 else []) for t in range(1, 30)]
    io.emit(events, tmp_path)
    with open(tmp_path / "af_0.csv") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["frame", "response"]
    assert len(rows) - 1 == 11
    recs = io.read_events(tmp_path / "events.jsonl")
    assert len(recs) == 29
    assert list(recs[9]) == ["frame_index", "afs", "created", "removed"]
    assert list(recs[9]["afs"][0]) == ["id", "cx", "cy", "radius", "response", "age_frames", "windowed_sum"]
    assert [r["frame_index"] for r in recs] == list(range(1, 30))
    assert (tmp_path / "responses.png").stat().st_size > 0


def test_nine_significant_digits():
    rec = io.event_to_record(_event(1, [_af(0, 1 / 3)]))
    assert rec["afs"][0]["response"] == 0.333333333
    rec = io.event_to_record(_event(1, [_af(0, 123456.7890123)]))
    assert rec["afs"][0]["response"] == 123456.789


def test_emit_unwritable(tmp_path):
    f = tmp_path / "file"
    f.write_text("x")
    with pytest.raises(OSError):
        io.emit([], f / "sub")


def _loom_frames():
    from lplc2 import stimuli

    return stimuli.render(stimuli.scenario("dark_loom"))


def test_detector_stream_properties():
    frames = _loom_frames()
    events = run_detector(frames, ModelConfig(variant="center"))
    assert [e.frame_index for e in events] == list(range(1, 50))
    prev = set()
    for e in events:
        cur = {a["id"] for a in e.afs}
        assert set(e.created) == cur - prev
        assert set(e.removed) == (prev | set(e.created)) - cur
        prev = cur
    with pytest.raises(ValueError):
        run_detector(frames[:1], ModelConfig())
    with pytest.raises(ValueError):
        Detector(ModelConfig()).step(np.zeros((2, 2, 2)))


def test_constant_stream_has_no_fields():
    events = run_detector([np.full((30, 30), 77.0)] * 6, ModelConfig(t_a=1e-6))
    assert all(e.afs == [] for e in events)


def test_end_to_end_byte_determinism(tmp_path):
    for k in (1, 2):
        assert main(["run-scenario", "--scenario", "dark_loom", "--variant", "multi",
                     "--out", str(tmp_path / f"r{k}")]) == 0
    names = sorted(p.name for p in (tmp_path / "r1").iterdir())
    assert "events.jsonl" in names and "af_0.csv" in names
    for name in names:
        assert (tmp_path / "r1" / name).read_bytes() == (tmp_path / "r2" / name).read_bytes(), name


def test_cli_render_then_detect(tmp_path, capsys):
    assert main(["render-stimulus", "--scenario", "grating", "--out", str(tmp_path / "s")]) == 0
    assert len(list((tmp_path / "s").glob("frame_*.png"))) == 50
    assert (tmp_path / "s" / "stimulus.yaml").exists()
    cfg = tmp_path / "c.yaml"
    cfg.write_text("t_a: 0.5\nboundary: zero\n")
    rc = main(["detect", "--input", str(tmp_path / "s"), "--fps", "33", "--variant", "center",
               "--config", str(cfg), "--out", str(tmp_path / "o"), "--dump-fields", "--set", "leak_slope=0.05"])
    assert rc == 0
    used = (tmp_path / "o" / "config.yaml").read_text()
    assert "boundary: zero" in used and "leak_slope: 0.05" in used and "variant: center" in used
    assert len(list((tmp_path / "o" / "fields").glob("*.npz"))) == 49
    dumped = np.load(tmp_path / "o" / "fields" / "frame_0001.npz")
    assert set(dumped.files) == {"lm_r", "lm_l", "lm_u", "lm_d", "magnitude"}
    lines = (tmp_path / "o" / "events.jsonl").read_text().splitlines()
    assert len(lines) == 49 and json.loads(lines[0])["created"] == [0]


def test_cli_raw_input(tmp_path):
    frames = np.zeros((4, 8, 9), np.uint8)
    frames[2:, 3:5, 3:5] = 255
    frames.tofile(tmp_path / "v.raw")
    rc = main(["detect", "--input", str(tmp_path / "v.raw"), "--width", "9", "--height", "8",
               "--out", str(tmp_path / "o"), "--set", "r_di=6", "--set", "r_de=2", "--set", "r_dc=2"])
    assert rc == 0
    assert len((tmp_path / "o" / "events.jsonl").read_text().splitlines()) == 3


@pytest.mark.parametrize("argv", [
    ["detect", "--input", "/nonexistent/x", "--out", "o"],
    ["detect", "--input", "IN", "--out", "o", "--set", "sigma_e=0"],
    ["detect", "--input", "IN", "--out", "o", "--set", "bogus=1"],
    ["detect", "--input", "IN", "--out", "o", "--fps", "-3"],
    ["detect", "--input", "IN", "--out", "o", "--config", "/nonexistent/c.yaml"],
])
def test_cli_errors_exit_nonzero(tmp_path, capsys, argv):
    save_frames(tmp_path / "in", [np.zeros((30, 30))] * 3)
    argv = [str(tmp_path / "in") if a == "IN" else (str(tmp_path / a) if a == "o" else a) for a in argv]
    assert main(argv) != 0
    assert "error" in capsys.readouterr().err


def test_cli_unknown_scenario(capsys):
    with pytest.raises(SystemExit) as e:
        main(["render-stimulus", "--scenario", "nope", "--out", "x"])
    assert e.value.code != 0


def test_module_entry_point():
    import subprocess
    import sys

    out = subprocess.run([sys.executable, "-m", "lplc2", "--help"], capture_output=True, text=True)
    assert out.returncode == 0 and "run-scenario" in out.stdout


@settings(max_examples=15)
@given(seed=st.integers(0, 2**31), variant=st.sampled_from(["multi", "single", "center"]))
def test_byte_determinism_property(seed, variant):
    r = np.random.default_rng(seed)
    frames = list(r.uniform(0, 255, (5, 16, 16)))
    cfg = ModelConfig(variant=variant, r_de=2, r_di=5, r_dc=2, t_a=0.05, t_d=1.0, r_af=5, d_frames=2)
    with tempfile.TemporaryDirectory() as tmp:
        dirs = [Path(tmp) / "a", Path(tmp) / "b"]
        for d in dirs:
            io.emit(run_detector([f.copy() for f in frames], cfg), d)
        names = sorted(p.name for p in dirs[0].iterdir())
        assert names == sorted(p.name for p in dirs[1].iterdir())
        for name in names:
            assert (dirs[0] / name).read_bytes() == (dirs[1] / name).read_bytes()
