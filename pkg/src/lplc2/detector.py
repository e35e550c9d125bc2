"""Frame-by-frame orchestration of the full model."""
from __future__ import annotations

from typing import Iterable, List, Optional

import numpy as np

from . import attention, lobula, retina
from .attention import DetectionEvent, EnsembleState
from .config import ModelConfig
from .medulla import Medulla


class Detector:
    """Streaming detector; feed frames in order with :meth:`step`.

    The first frame only primes the retina, so events start at frame 1.
    """

    def __init__(self, config: ModelConfig):
        self.config = config
        self.ensemble = EnsembleState()
        self.medulla: Optional[Medulla] = None
        self.previous: Optional[np.ndarray] = None
        self.frame_index = 0
        self.motion: Optional[lobula.DirectionalMotion] = None

    def step(self, frame: np.ndarray) -> Optional[DetectionEvent]:
        frame = np.asarray(frame, dtype=np.float64)
        if frame.ndim != 2:
            raise ValueError(f"expected a 2D grayscale frame, got shape {frame.shape}")
        index = self.frame_index
        self.frame_index += 1
        if self.previous is None:
            self.previous = frame
            self.medulla = Medulla(frame.shape, self.config)
            return None

        cfg = self.config
        change = retina.frame_difference(frame, self.previous)
        self.previous = frame
        on, off = retina.half_wave_split(retina.vdog(change, cfg))
        maps = self.medulla.step(on, off)
        self.motion = lobula.integrate(maps, cfg)
        return attention.step(self.ensemble, self.motion, cfg, frame_index=index)


def run_detector(frames: Iterable[np.ndarray], config: ModelConfig) -> List[DetectionEvent]:
    det = Detector(config)
    events = []
    count = 0
    for frame in frames:
        count += 1
        ev = det.step(frame)
        if ev is not None:
            events.append(ev)
    if count < 2:
        raise ValueError("at least two frames are required")
    return events
