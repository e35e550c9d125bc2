"""Bottom-up attention fields and the LPLC2 ensemble built on them."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np

from .config import ModelConfig
from .lobula import DirectionalMotion


@dataclass
class AttentionField:
    id: int
    cx: int
    cy: int
    radius: int
    birth_frame: int
    response_history: List[float] = field(default_factory=list)
    _geometry: Optional[tuple] = field(default=None, repr=False, compare=False)

    @property
    def center(self) -> Tuple[int, int]:
        return self.cx, self.cy

    @property
    def age(self) -> int:
        return len(self.response_history) - 1

    def windowed_sum(self, d_frames: int) -> float:
        return float(sum(self.response_history[-d_frames:]))

    def geometry(self, shape) -> tuple:
        """Window slices into the frame plus disk/quadrant masks inside it."""
        if self._geometry is None or self._geometry[0] != shape:
            h, w = shape
            r = self.radius
            y0, y1 = max(self.cy - r, 0), min(self.cy + r + 1, h)
            x0, x1 = max(self.cx - r, 0), min(self.cx + r + 1, w)
            yy, xx = np.mgrid[y0:y1, x0:x1]
            dx, dy = xx - self.cx, yy - self.cy
            disk = dx * dx + dy * dy <= r * r
            right, left = dx > 0, dx < 0
            above, below = dy < 0, dy > 0
            quads = (disk & right & above, disk & left & above,
                     disk & left & below, disk & right & below)
            self._geometry = (shape, (slice(y0, y1), slice(x0, x1)), disk, quads)
        return self._geometry


@dataclass
class EnsembleState:
    fields: List[AttentionField] = field(default_factory=list)
    next_id: int = 0
    frame_index: int = 0


@dataclass
class DetectionEvent:
    frame_index: int
    afs: List[dict]
    created: List[int]
    removed: List[int]


def _excluded(shape, fields: List[AttentionField]) -> np.ndarray:
    mask = np.zeros(shape, dtype=bool)
    for af in fields:
        _, window, disk, _ = af.geometry(shape)
        mask[window] |= disk
    return mask


def find_candidate(magnitude: np.ndarray, state: EnsembleState,
                   config: ModelConfig) -> Optional[Tuple[int, int, float]]:
    """Strongest motion outside every existing field, if it beats ``t_a``.

    Ties resolve to the smallest (y, x).
    """
    lm = np.array(magnitude, dtype=np.float64)
    lm[_excluded(lm.shape, state.fields)] = -np.inf
    flat = int(np.argmax(lm))
    y, x = divmod(flat, lm.shape[1])
    value = lm[y, x]
    if not np.isfinite(value) or value <= config.t_a:
        return None
    return x, y, float(value)


def quadrant_integrals(af: AttentionField, dm: DirectionalMotion) -> Tuple[float, float, float, float]:
    """Raw (unrectified) outward-motion sums over the four quadrants of ``af``."""
    _, window, _, (q1, q2, q3, q4) = af.geometry(dm.lm_r.shape)
    r, l, u, d = (dm.lm_r[window], dm.lm_l[window], dm.lm_u[window], dm.lm_d[window])
    return (float(np.sum((r + u)[q1])), float(np.sum((l + u)[q2])),
            float(np.sum((l + d)[q3])), float(np.sum((r + d)[q4])))


def integrate_af(af: AttentionField, dm: DirectionalMotion, config: ModelConfig) -> float:
    """LPLC2 response of one field; fires only when all four quadrants see outward motion."""
    qs = [max(q, 0.0) for q in quadrant_integrals(af, dm)]
    if all(q > config.gate_epsilon for q in qs):
        value = qs[0] + qs[1] + qs[2] + qs[3]
    else:
        value = 0.0
    af.response_history.append(value)
    return value


CENTROID_SLACK = 1e-9


def motion_centroid(magnitude: np.ndarray) -> Optional[Tuple[int, int]]:
    total = float(magnitude.sum())
    if total <= 0.0:
        return None
    h, w = magnitude.shape
    cy = float((magnitude.sum(axis=1) * np.arange(h)).sum()) / total
    cx = float((magnitude.sum(axis=0) * np.arange(w)).sum()) / total
    # half rounds up; the slack absorbs summation-order noise on exact halves
    return int(np.floor(cx + 0.5 + CENTROID_SLACK)), int(np.floor(cy + 0.5 + CENTROID_SLACK))


def _new_field(state: EnsembleState, cx: int, cy: int, config: ModelConfig) -> AttentionField:
    af = AttentionField(id=state.next_id, cx=cx, cy=cy, radius=config.r_af,
                        birth_frame=state.frame_index)
    state.next_id += 1
    state.fields.append(af)
    return af


def _removals(state: EnsembleState, config: ModelConfig) -> List[AttentionField]:
    d = config.d_frames
    doomed = [af for af in state.fields
              if af.age >= d and af.windowed_sum(d) < config.t_d]
    if doomed and len(doomed) == len(state.fields):
        keep = max(doomed, key=lambda af: (af.windowed_sum(d), -af.id))
        doomed.remove(keep)
    return doomed


def step(state: EnsembleState, dm: DirectionalMotion, config: ModelConfig,
         frame_index: Optional[int] = None) -> DetectionEvent:
    """Advance the ensemble by one frame: create, integrate, then prune."""
    if frame_index is not None:
        state.frame_index = frame_index
    created: List[int] = []
    shape = dm.magnitude.shape

    if config.variant == "center":
        if not state.fields:
            h, w = shape
            created.append(_new_field(state, w // 2, h // 2, config).id)
    elif config.variant == "single":
        # placed once; the retention rule then keeps it for the rest of the run
        if not state.fields and float(dm.magnitude.max()) > config.t_a:
            c = motion_centroid(dm.magnitude)
            created.append(_new_field(state, c[0], c[1], config).id)
    else:
        if config.max_afs is None or len(state.fields) < config.max_afs:
            cand = find_candidate(dm.magnitude, state, config)
            if cand is not None:
                created.append(_new_field(state, cand[0], cand[1], config).id)

    for af in state.fields:
        integrate_af(af, dm, config)

    removed: List[int] = []
    if config.variant != "center":
        for af in _removals(state, config):
            state.fields.remove(af)
            removed.append(af.id)

    records = [
        {
            "id": af.id,
            "cx": af.cx,
            "cy": af.cy,
            "radius": af.radius,
            "response": af.response_history[-1],
            "age_frames": af.age,
            "windowed_sum": af.windowed_sum(config.d_frames),
        }
        for af in state.fields
    ]
    event = DetectionEvent(frame_index=state.frame_index, afs=records,
                           created=created, removed=removed)
    state.frame_index += 1
    return event
