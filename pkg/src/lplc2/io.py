"""Frame ingestion and event output."""
from __future__ import annotations

import csv
import json
import re
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

import numpy as np
from PIL import Image

from .attention import DetectionEvent
from .retina import to_grayscale

IMAGE_SUFFIXES = {".png", ".pgm", ".ppm", ".bmp", ".jpg", ".jpeg", ".tif", ".tiff", ".gif"}
EVENT_FIELDS = ("frame_index", "afs", "created", "removed")
AF_FIELDS = ("id", "cx", "cy", "radius", "response", "age_frames", "windowed_sum")
EVENTS_FILE = "events.jsonl"


class IngestError(ValueError):
    pass


def read_image(path: Path) -> np.ndarray:
    """Grayscale float64 image in [0, 255]; color is luminance-weighted."""
    try:
        with Image.open(path) as img:
            if img.mode in ("L", "I", "F", "I;16"):
                arr = np.asarray(img, dtype=np.float64)
            else:
                arr = to_grayscale(np.asarray(img.convert("RGB"), dtype=np.float64))
    except (OSError, ValueError) as exc:
        raise IngestError(f"cannot read image {path}: {exc}") from exc
    return arr


def _frame_key(path: Path):
    nums = re.findall(r"\d+", path.stem)
    return (int(nums[-1]) if nums else -1, path.name)


def list_frame_files(directory: Path) -> List[Path]:
    files = [p for p in directory.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES]
    return sorted(files, key=_frame_key)


def read_raw(path: Path, width: int, height: int) -> List[np.ndarray]:
    """Concatenated 8-bit grayscale frames, row-major, no header."""
    if width is None or height is None or width < 1 or height < 1:
        raise IngestError("raw input needs positive --width and --height")
    try:
        data = np.fromfile(path, dtype=np.uint8)
    except OSError as exc:
        raise IngestError(f"cannot read {path}: {exc}") from exc
    size = width * height
    if data.size % size:
        raise IngestError(f"{path}: {data.size} bytes is not a whole number of {width}x{height} frames")
    return [f.astype(np.float64) for f in data.reshape(-1, height, width)]


def ingest(source, fps: float = 33.0, width: Optional[int] = None,
           height: Optional[int] = None) -> List[np.ndarray]:
    """Load a directory of numbered images or a raw frame file.

    ``fps`` only has to be valid here; callers fold it into the config.
    """
    if not fps > 0:
        raise IngestError("fps must be > 0")
    source = Path(source)
    if source.is_dir():
        files = list_frame_files(source)
        frames = [read_image(p) for p in files]
        for p, f in zip(files, frames):
            if f.shape != frames[0].shape:
                raise IngestError(
                    f"inconsistent frame dimensions: {files[0].name} is {frames[0].shape[::-1]}, "
                    f"{p.name} is {f.shape[::-1]} (width, height)")
    elif source.is_file():
        frames = read_raw(source, width, height)
    else:
        raise IngestError(f"input {source} does not exist")
    if len(frames) < 2:
        raise IngestError(f"need at least 2 frames, found {len(frames)}")
    return frames


def write_frames(frames: Sequence[np.ndarray], out_dir, prefix: str = "frame") -> List[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    digits = max(4, len(str(len(frames) - 1)))
    paths = []
    for t, f in enumerate(frames):
        p = out_dir / f"{prefix}_{t:0{digits}d}.png"
        Image.fromarray(np.clip(np.rint(f), 0, 255).astype(np.uint8), mode="L").save(p)
        paths.append(p)
    return paths


def _num(x: float):
    """Round to 9 significant digits, keeping the value a JSON number."""
    return float(f"{x:.9g}")


def event_to_record(ev: DetectionEvent) -> Dict:
    afs = []
    for a in ev.afs:
        rec = {k: a[k] for k in AF_FIELDS}
        rec["response"] = _num(rec["response"])
        rec["windowed_sum"] = _num(rec["windowed_sum"])
        afs.append(rec)
    return {"frame_index": ev.frame_index, "afs": afs,
            "created": list(ev.created), "removed": list(ev.removed)}


def af_series(events: Iterable[DetectionEvent]) -> Dict[int, List[tuple]]:
    series: Dict[int, List[tuple]] = {}
    for ev in events:
        for a in ev.afs:
            series.setdefault(a["id"], []).append((ev.frame_index, a["response"]))
    return series


def emit(events: Sequence[DetectionEvent], out_dir, motions=None, figure: bool = True) -> Dict[str, Path]:
    """Write the event stream, per-field CSVs and optional extras to ``out_dir``.

    ``motions`` maps frame index to DirectionalMotion; when given, each
    frame's five maps are saved as ``fields/frame_<t>.npz``.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc}") from exc
    written = {}
    events_path = out_dir / EVENTS_FILE
    with open(events_path, "w", encoding="utf-8", newline="\n") as fh:
        for ev in events:
            fh.write(json.dumps(event_to_record(ev), separators=(",", ":")) + "\n")
    written["events"] = events_path

    series = af_series(events)
    for af_id, rows in sorted(series.items()):
        p = out_dir / f"af_{af_id}.csv"
        with open(p, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["frame", "response"])
            for frame, value in rows:
                writer.writerow([frame, f"{value:.9g}"])
        written[f"af_{af_id}"] = p

    if motions:
        fdir = out_dir / "fields"
        fdir.mkdir(exist_ok=True)
        for t, dm in sorted(motions.items()):
            np.savez(fdir / f"frame_{t:04d}.npz", lm_r=dm.lm_r, lm_l=dm.lm_l,
                     lm_u=dm.lm_u, lm_d=dm.lm_d, magnitude=dm.magnitude)
        written["fields"] = fdir

    if figure and series:
        from .plotting import plot_responses
        written["figure"] = plot_responses(series, out_dir / "responses.png")
    return written


def read_events(path) -> List[dict]:
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]
