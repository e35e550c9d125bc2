"""Command-line entry point: detect, render-stimulus, run-scenario."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from . import io, stimuli
from .config import (CALIBRATED_THRESHOLDS, VARIANTS, ConfigError, ModelConfig, dump_config,
                     load_config, parse_override, read_document)
from .detector import Detector

def _overrides(items) -> dict:
    out = {}
    for item in items or []:
        key, value = parse_override(item)
        out[key] = value
    return out


def build_config(config_path: Optional[str], variant: Optional[str], fps: Optional[float],
                 sets, base: Optional[dict] = None) -> ModelConfig:
    """Defaults < ``base`` < config file < --variant/--fps < --set."""
    data = dict(base or {})
    if config_path:
        data.update(read_document(Path(config_path)))
    if variant:
        data["variant"] = variant
        data.pop("max_afs", None)
    if fps is not None:
        if not fps > 0:
            raise ConfigError("fps", "must be > 0")
        data["frame_interval_ms"] = 1000.0 / fps
    data.update(_overrides(sets))
    return load_config(data)


def run_frames(frames, config: ModelConfig, out_dir: Path, dump_fields: bool = False) -> int:
    det = Detector(config)
    events = []
    motions = {} if dump_fields else None
    for frame in frames:
        ev = det.step(frame)
        if ev is not None:
            events.append(ev)
            if motions is not None:
                motions[ev.frame_index] = det.motion
    written = io.emit(events, out_dir, motions=motions)
    (Path(out_dir) / "config.yaml").write_text(dump_config(config))
    n_ids = len({i for ev in events for i in ev.created})
    print(f"{len(events)} events, {n_ids} attention fields; wrote {written['events']}")
    return 0


def cmd_detect(args) -> int:
    frames = io.ingest(args.input, fps=args.fps or 33.0, width=args.width, height=args.height)
    base = dict(CALIBRATED_THRESHOLDS) if args.calibrated else None
    config = build_config(args.config, args.variant, args.fps, args.set, base)
    return run_frames(frames, config, Path(args.out), args.dump_fields)


def cmd_render(args) -> int:
    spec = stimuli.scenario(args.scenario)
    out = Path(args.out)
    paths = io.write_frames(stimuli.render(spec), out)
    (out / "stimulus.yaml").write_text(spec.dump())
    print(f"wrote {len(paths)} frames to {out}")
    return 0


def cmd_run_scenario(args) -> int:
    spec = stimuli.scenario(args.scenario)
    config = build_config(args.config, args.variant, spec.fps, args.set, dict(CALIBRATED_THRESHOLDS))
    return run_frames(stimuli.render(spec), config, Path(args.out), args.dump_fields)


def make_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="lplc2", description="Multi-attention LPLC2 looming detector")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--variant", choices=VARIANTS, default=None)
        sp.add_argument("--config", default=None, help="YAML/JSON config document")
        sp.add_argument("--out", required=True, help="output directory")
        sp.add_argument("--dump-fields", action="store_true", help="save per-frame motion maps")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config field")

    d = sub.add_parser("detect", help="run the detector on frames from disk")
    d.add_argument("--input", required=True, help="directory of numbered images or a raw uint8 file")
    d.add_argument("--fps", type=float, default=None,
                   help="input frame rate in Hz (default 33, or the config's frame_interval_ms)")
    d.add_argument("--width", type=int, default=None, help="frame width for raw input")
    d.add_argument("--height", type=int, default=None, help="frame height for raw input")
    d.add_argument("--calibrated", action="store_true",
                   help=f"start from the calibrated thresholds {CALIBRATED_THRESHOLDS}")
    common(d)
    d.set_defaults(func=cmd_detect)

    r = sub.add_parser("render-stimulus", help="write a built-in scenario as numbered PNGs")
    r.add_argument("--scenario", required=True, choices=sorted(stimuli.builtin_scenarios()))
    r.add_argument("--out", required=True)
    r.set_defaults(func=cmd_render)

    s = sub.add_parser("run-scenario", help="render a built-in scenario and detect on it")
    s.add_argument("--scenario", required=True, choices=sorted(stimuli.builtin_scenarios()))
    common(s)
    s.set_defaults(func=cmd_run_scenario)
    return p


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, io.IngestError, stimuli.StimulusError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
