"""Synthetic stimulus sequences: looming/receding squares, translation,
gratings and multi-object scenes over static or shifting backgrounds."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml
from scipy import ndimage

DARK = 0.0
BRIGHT = 255.0
GRAY = 128.0

SHAPES = ("square", "bar", "grating")
POLARITIES = ("dark", "bright")


class StimulusError(ValueError):
    pass


@dataclass
class ObjectTrack:
    """One object, present on frames ``onset <= t < offset``.

    ``center_path[k]`` and ``size_path[k]`` describe frame ``onset + k``.
    For a grating, the centre x is the phase and the size the period.
    """

    shape: str
    polarity: str
    center_path: List[Tuple[float, float]]
    size_path: List[float]
    onset: int
    offset: int
    aspect: float = 1.0  # bar height / width

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise StimulusError(f"unknown shape {self.shape!r}")
        if self.polarity not in POLARITIES:
            raise StimulusError(f"unknown polarity {self.polarity!r}")
        n = self.offset - self.onset
        if n < 1:
            raise StimulusError("offset must be after onset")
        self.center_path = [tuple(c) for c in self.center_path]
        self.size_path = list(self.size_path)
        if len(self.center_path) != n or len(self.size_path) != n:
            raise StimulusError(f"paths must have {n} entries (offset - onset)")
        if any(s < 0 for s in self.size_path):
            raise StimulusError("sizes must be nonnegative")

    @property
    def level(self) -> float:
        return DARK if self.polarity == "dark" else BRIGHT


@dataclass
class StimulusSpec:
    width: int
    height: int
    frames: int
    fps: float = 33.0
    background: Dict = field(default_factory=lambda: {"kind": "uniform", "level": GRAY})
    objects: List[ObjectTrack] = field(default_factory=list)

    def __post_init__(self):
        if self.frames < 2:
            raise StimulusError("a stimulus needs at least 2 frames")
        if not self.fps > 0:
            raise StimulusError("fps must be > 0")
        if self.width < 1 or self.height < 1:
            raise StimulusError("frame dimensions must be positive")
        self.objects = [o if isinstance(o, ObjectTrack) else ObjectTrack(**o) for o in self.objects]
        for o in self.objects:
            if o.onset < 0 or o.offset > self.frames:
                raise StimulusError("object track extends beyond the stimulus duration")
        kind = self.background.get("kind")
        if kind not in ("uniform", "shifting_image"):
            raise StimulusError(f"unknown background kind {kind!r}")

    def to_dict(self) -> dict:
        d = asdict(self)
        for o in d["objects"]:
            o["center_path"] = [list(c) for c in o["center_path"]]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "StimulusSpec":
        return cls(**d)

    def dump(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False)

    @classmethod
    def load(cls, source) -> "StimulusSpec":
        text = Path(source).read_text() if isinstance(source, Path) or "\n" not in str(source) else source
        return cls.from_dict(yaml.safe_load(text))


def cluttered_texture(width: int, height: int, seed: int = 7, scale: float = 24.0,
                      low: float = 80.0, high: float = 176.0) -> np.ndarray:
    """Deterministic smooth noise profile, periodic in x and constant down each column.

    Column invariance means a horizontal shift carries no vertical motion.
    """
    rng = np.random.default_rng(seed)
    profile = ndimage.gaussian_filter1d(rng.random(width), scale, mode="wrap")
    profile -= profile.min()
    profile /= profile.max()
    return np.tile(low + (high - low) * profile, (height, 1))


def _background_image(spec: StimulusSpec) -> Optional[np.ndarray]:
    bg = spec.background
    if bg["kind"] != "shifting_image":
        return None
    source = bg.get("source", "texture")
    if source == "texture":
        return cluttered_texture(spec.width, spec.height, seed=int(bg.get("seed", 7)),
                                 scale=float(bg.get("scale", 24.0)),
                                 low=float(bg.get("low", 80.0)), high=float(bg.get("high", 176.0)))
    from .io import read_image  # local import keeps stimuli free of I/O at import time
    img = read_image(Path(source))
    if img.shape[0] < spec.height or img.shape[1] < spec.width:
        raise StimulusError(f"background image {img.shape} smaller than the frame")
    return img[:spec.height]


def _square_span(center: float, size: float) -> Tuple[int, int]:
    n = int(round(size))
    lo = int(math.floor(center - n / 2.0 + 0.5))
    return lo, lo + n


def _paint(frame: np.ndarray, obj: ObjectTrack, k: int) -> None:
    h, w = frame.shape
    cx, cy = obj.center_path[k]
    size = obj.size_path[k]
    if obj.shape == "grating":
        period = max(int(round(size)), 2)
        phase = int(round(cx))
        x = (np.arange(w) - phase) % period
        stripes = x < period // 2
        frame[:, stripes] = obj.level
        frame[:, ~stripes] = BRIGHT if obj.level == DARK else DARK
        return
    x0, x1 = _square_span(cx, size)
    y0, y1 = _square_span(cy, size * obj.aspect if obj.shape == "bar" else size)
    if x1 <= x0 or y1 <= y0:
        return
    if x0 < 0 or y0 < 0 or x1 > w or y1 > h:
        raise StimulusError(
            f"object leaves the frame at frame {obj.onset + k}: x[{x0},{x1}) y[{y0},{y1})")
    frame[y0:y1, x0:x1] = obj.level


def render(spec: StimulusSpec) -> List[np.ndarray]:
    """Render every frame of ``spec`` as float arrays in [0, 255]."""
    image = _background_image(spec)
    shift = int(spec.background.get("px_per_frame", 0))
    frames = []
    for t in range(spec.frames):
        if image is None:
            frame = np.full((spec.height, spec.width), float(spec.background.get("level", GRAY)))
        else:
            frame = np.roll(image, -shift * t, axis=1)[:, :spec.width].copy()
        for obj in spec.objects:
            if obj.onset <= t < obj.offset:
                _paint(frame, obj, t - obj.onset)
        frames.append(frame)
    return frames


def linear_path(start: float, end: float, n: int, integer: bool = True) -> List[float]:
    if n == 1:
        vals = [start]
    else:
        vals = [start + (end - start) * k / (n - 1) for k in range(n)]
    return [float(round(v)) for v in vals] if integer else vals


def loom_track(cx: float, cy: float, frames: int, polarity: str = "dark",
               start: float = 6.0, end: float = 60.0, onset: int = 0) -> ObjectTrack:
    return ObjectTrack(shape="square", polarity=polarity, center_path=[(cx, cy)] * frames,
                       size_path=linear_path(start, end, frames), onset=onset, offset=onset + frames)


def reversed_track(track: ObjectTrack, total_frames: int) -> ObjectTrack:
    """The same track played backwards within a stimulus of ``total_frames``."""
    return ObjectTrack(shape=track.shape, polarity=track.polarity,
                       center_path=list(reversed(track.center_path)),
                       size_path=list(reversed(track.size_path)),
                       onset=total_frames - track.offset, offset=total_frames - track.onset,
                       aspect=track.aspect)


def phase_track(cx: float, cy: float, onset: int, start: float, end: float,
                approach: int = 40, hold: int = 20, recede: int = 40) -> ObjectTrack:
    """Approach, hold still, then recede back to the starting size."""
    sizes = (linear_path(start, end, approach)
             + [float(end)] * hold
             + linear_path(end, start, recede))
    n = approach + hold + recede
    return ObjectTrack(shape="square", polarity="dark", center_path=[(cx, cy)] * n,
                       size_path=sizes, onset=onset, offset=onset + n)


# Built-in scenario geometry. Object sizes and speeds are not published, so
# these are chosen to cover sub- to supra-field expansion at each resolution.
CHAR_SIZE = (100, 100, 50)
LOOM_SIZES = (6.0, 80.0)  # ends at the attention-field diameter
MULTI_SIZE = (320, 240)
FOUR_PHASE_CENTERS = {
    1: [(160, 120)],
    2: [(240, 60)],
    3: [(80, 180)],
    4: [(80, 60), (240, 180)],
}
SIX_OBJECT_ONSETS = (5, 15, 25, 45, 55, 65)
SIX_OBJECT_CENTERS = ((60, 60), (160, 180), (260, 60), (60, 180), (160, 60), (260, 180))
MULTI_OBJECT_SIZES = (6.0, 40.0)
SIX_OBJECT_LIFETIME = 30


def shifting_texture_background(**extra) -> dict:
    bg = {"kind": "shifting_image", "source": "texture", "px_per_frame": 1}
    bg.update(extra)
    return bg


def builtin_scenarios() -> Dict[str, StimulusSpec]:
    w, h, n = CHAR_SIZE
    cx, cy = w / 2, h / 2
    start, end = LOOM_SIZES
    dark = loom_track(cx, cy, n, "dark", start, end)
    bright = loom_track(cx, cy, n, "bright", start, end)

    translate = ObjectTrack(shape="square", polarity="dark",
                            center_path=[(x, cy) for x in linear_path(16, 84, n)],
                            size_path=[20.0] * n, onset=0, offset=n)
    grating = ObjectTrack(shape="grating", polarity="dark",
                          center_path=[(2.0 * t, cy) for t in range(n)],
                          size_path=[20.0] * n, onset=0, offset=n)

    small, large = MULTI_OBJECT_SIZES
    mw, mh = MULTI_SIZE
    four = []
    for phase, centers in FOUR_PHASE_CENTERS.items():
        for (x, y) in centers:
            four.append(phase_track(x, y, onset=(phase - 1) * 100, start=small, end=large))

    six = []
    for onset, (x, y) in zip(SIX_OBJECT_ONSETS, SIX_OBJECT_CENTERS):
        six.append(loom_track(x, y, SIX_OBJECT_LIFETIME, "dark", small, large, onset=onset))
    six_frames = SIX_OBJECT_ONSETS[-1] + SIX_OBJECT_LIFETIME + 25

    return {
        "dark_loom": StimulusSpec(w, h, n, objects=[dark]),
        "dark_recede": StimulusSpec(w, h, n, objects=[reversed_track(dark, n)]),
        "bright_loom": StimulusSpec(w, h, n, objects=[bright]),
        "bright_recede": StimulusSpec(w, h, n, objects=[reversed_track(bright, n)]),
        "translate": StimulusSpec(w, h, n, objects=[translate]),
        "grating": StimulusSpec(w, h, n, objects=[grating]),
        "four_phase": StimulusSpec(mw, mh, 400, background=shifting_texture_background(),
                                   objects=four),
        "six_object": StimulusSpec(mw, mh, six_frames, background=shifting_texture_background(),
                                   objects=six),
    }


def scenario(name: str) -> StimulusSpec:
    specs = builtin_scenarios()
    if name not in specs:
        raise KeyError(f"unknown scenario {name!r}; choose from {sorted(specs)}")
    return specs[name]


def first_object_frame(frames: Sequence[np.ndarray], background: Sequence[np.ndarray],
                       region: Tuple[slice, slice]) -> Optional[int]:
    """Index of the first frame where ``region`` differs from the bare background."""
    for t, (f, b) in enumerate(zip(frames, background)):
        if np.any(f[region] != b[region]):
            return t
    return None
