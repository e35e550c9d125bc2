"""Naive reference implementation of the whole model, for tests only.

Every stage is written out per pixel with explicit loops and shares no
numeric code with the main pipeline; agreement between the two is what
makes either trustworthy. Only tiny inputs are accepted.
"""
from __future__ import annotations

import math
from typing import List, Sequence

import numpy as np

from .attention import DetectionEvent
from .config import ModelConfig

MAX_SIDE = 16
MAX_FRAMES = 20


class OracleGuardError(ValueError):
    pass


def _gauss(sigma: float, radius: int) -> np.ndarray:
    w = np.zeros((2 * radius + 1, 2 * radius + 1))
    for v in range(-radius, radius + 1):
        for u in range(-radius, radius + 1):
            w[v + radius, u + radius] = math.exp(-(u * u + v * v) / (2.0 * sigma * sigma))
    return w / w.sum()


def _sample(f: np.ndarray, y: int, x: int, boundary: str) -> float:
    h, w = f.shape
    if 0 <= y < h and 0 <= x < w:
        return float(f[y, x])
    if boundary == "zero":
        return 0.0
    return float(f[min(max(y, 0), h - 1), min(max(x, 0), w - 1)])


def _conv(f: np.ndarray, sigma: float, radius: int, boundary: str) -> np.ndarray:
    h, w = f.shape
    if radius >= min(h, w):
        raise OracleGuardError("kernel radius must be smaller than the field")
    k = _gauss(sigma, radius)
    offsets = np.arange(-radius, radius + 1)
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            ys, xs = y + offsets, x + offsets
            if boundary == "zero":
                win = np.zeros((len(ys), len(xs)))
                vy = (ys >= 0) & (ys < h)
                vx = (xs >= 0) & (xs < w)
                win[np.ix_(vy, vx)] = f[np.ix_(ys[vy], xs[vx])]
            else:
                win = f[np.ix_(np.clip(ys, 0, h - 1), np.clip(xs, 0, w - 1))]
            out[y, x] = float(np.sum(k * win))
    return out


def _lamina(change: np.ndarray, c: ModelConfig):
    """Polarity-separated DoG, returning the rectified ON and OFF fields."""
    h, w = change.shape
    pos = np.zeros((h, w))
    neg = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            pos[y, x] = max(change[y, x], 0.0)
            neg[y, x] = max(-change[y, x], 0.0)

    def band(f):
        e = _conv(f, c.sigma_e, c.r_de, c.boundary)
        i = _conv(f, c.sigma_i, c.r_di, c.boundary)
        return e - i

    bp, bn = band(pos), band(neg)
    on = np.zeros((h, w))
    off = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            s = max(bp[y, x], 0.0) - max(bn[y, x], 0.0)
            on[y, x] = max(s, 0.0)
            off[y, x] = max(-s, 0.0)
    return on, off


def _normalize(raw: np.ndarray, c: ModelConfig) -> np.ndarray:
    pooled = _conv(raw, c.sigma_c, c.r_dc, c.boundary)
    h, w = raw.shape
    out = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            out[y, x] = math.tanh(raw[y, x] / (c.epsilon + pooled[y, x]))
    return out


# upstream neighbour offset (dx, dy) per preferred direction, y pointing down
_UP = {"r": (-1, 0), "l": (1, 0), "u": (0, 1), "d": (0, -1)}
_OPP = {"r": "l", "l": "r", "u": "d", "d": "u"}


def _delays(c: ModelConfig) -> List[float]:
    if c.n_c == 1:
        return [c.tau_nc_start]
    return [c.tau_nc_start + (i - 1) * (c.tau_nc_end - c.tau_nc_start) / (c.n_c - 1)
            for i in range(1, c.n_c + 1)]


def _alpha(tau: float, c: ModelConfig) -> float:
    return c.frame_interval_ms / (c.frame_interval_ms + tau)


class _Channel:
    def __init__(self, shape, c: ModelConfig):
        self.c = c
        self.d = np.zeros(shape)
        self.acc = {v: np.zeros(shape) for v in _UP}
        self.acc_steps = {v: [np.zeros(shape) for _ in range(c.n_c)] for v in _UP}

    def step(self, raw: np.ndarray) -> dict:
        c = self.c
        n = _normalize(raw, c)
        h, w = n.shape
        out = {}
        delays = _delays(c)
        for v, (ux, uy) in _UP.items():
            terms = []
            for i in range(1, c.n_c + 1):
                m = np.zeros((h, w))
                for y in range(h):
                    for x in range(w):
                        ns = _sample(n, y + uy * i, x + ux * i, c.boundary)
                        ds = _sample(self.d, y + uy * i, x + ux * i, c.boundary)
                        m[y, x] = (n[y, x] * self.d[y, x] * ds
                                   - c.beta * ns * self.d[y, x] * ds)
                terms.append(m)
            if c.delay_mode == "sum":
                a2 = _alpha(sum(delays) / len(delays), c)
                total = np.zeros((h, w))
                for m in terms:
                    total = total + m
                self.acc[v] = a2 * total + (1 - a2) * self.acc[v]
                out[v] = self.acc[v]
            else:
                res = np.zeros((h, w))
                for k, m in enumerate(terms):
                    a = _alpha(delays[k], c)
                    self.acc_steps[v][k] = a * m + (1 - a) * self.acc_steps[v][k]
                    res = res + self.acc_steps[v][k]
                out[v] = res
        a1 = _alpha(c.tau_1, c)
        self.d = a1 * n + (1 - a1) * self.d
        return out


def _lobula(t4: dict, t5: dict, c: ModelConfig):
    h, w = t4["r"].shape
    lm = {v: np.zeros((h, w)) for v in _UP}
    for v in _UP:
        o = _OPP[v]
        for y in range(h):
            for x in range(w):
                b = [val if val > c.power_floor else 0.0
                     for val in (t4[v][y, x], t5[v][y, x], t4[o][y, x], t5[o][y, x])]
                pref = b[0] ** c.gamma_1 + b[1] ** c.gamma_2
                null = b[2] ** c.gamma_1 + b[3] ** c.gamma_2
                s = pref - null
                lm[v][y, x] = s if s > 0 else c.leak_slope * s
    mag = np.zeros((h, w))
    for y in range(h):
        for x in range(w):
            hh = max(lm["r"][y, x], lm["l"][y, x])
            vv = max(lm["u"][y, x], lm["d"][y, x])
            mag[y, x] = math.sqrt(hh * hh + vv * vv)
    return lm, mag


class _AF:
    def __init__(self, ident, cx, cy, radius, birth):
        self.id, self.cx, self.cy, self.radius, self.birth = ident, cx, cy, radius, birth
        self.history: List[float] = []


def _inside(af: _AF, x: int, y: int) -> bool:
    return (x - af.cx) ** 2 + (y - af.cy) ** 2 <= af.radius ** 2


def _response(af: _AF, lm: dict, c: ModelConfig) -> float:
    h, w = lm["r"].shape
    q = [0.0, 0.0, 0.0, 0.0]
    for y in range(h):
        for x in range(w):
            if not _inside(af, x, y) or x == af.cx or y == af.cy:
                continue
            right, up = x > af.cx, y < af.cy
            hv = lm["r"][y, x] if right else lm["l"][y, x]
            vv = lm["u"][y, x] if up else lm["d"][y, x]
            k = (0 if up else 3) if right else (1 if up else 2)
            q[k] += hv + vv
    q = [max(v, 0.0) for v in q]
    if min(q) > c.gate_epsilon:
        return q[0] + q[1] + q[2] + q[3]
    return 0.0


def oracle_run(frames: Sequence[np.ndarray], config: ModelConfig) -> List[DetectionEvent]:
    """Events for frames 1..T-1, computed the slow way."""
    frames = [np.asarray(f, dtype=np.float64) for f in frames]
    if len(frames) < 2:
        raise OracleGuardError("at least two frames are required")
    if len(frames) > MAX_FRAMES:
        raise OracleGuardError(f"oracle accepts at most {MAX_FRAMES} frames")
    shape = frames[0].shape
    if any(f.shape != shape for f in frames):
        raise OracleGuardError("frames differ in shape")
    h, w = shape
    if h > MAX_SIDE or w > MAX_SIDE:
        raise OracleGuardError(f"oracle accepts frames up to {MAX_SIDE}x{MAX_SIDE}")

    c = config
    on_ch, off_ch = _Channel(shape, c), _Channel(shape, c)
    afs: List[_AF] = []
    next_id = 0
    events = []
    for t in range(1, len(frames)):
        on, off = _lamina(frames[t] - frames[t - 1], c)
        t4 = on_ch.step(on)
        t5 = off_ch.step(off)
        lm, mag = _lobula(t4, t5, c)

        created = []
        if c.variant == "center":
            if not afs:
                afs.append(_AF(next_id, w // 2, h // 2, c.r_af, t))
                created.append(next_id)
                next_id += 1
        elif c.variant == "single":
            peak = max(mag[y, x] for y in range(h) for x in range(w))
            if not afs and peak > c.t_a:
                tot = sx = sy = 0.0
                for y in range(h):
                    for x in range(w):
                        tot += mag[y, x]
                        sx += x * mag[y, x]
                        sy += y * mag[y, x]
                # round half up, treating anything within 1e-9 of a half as a half
                cx, cy = math.floor(sx / tot + 0.5 + 1e-9), math.floor(sy / tot + 0.5 + 1e-9)
                afs.append(_AF(next_id, cx, cy, c.r_af, t))
                created.append(next_id)
                next_id += 1
        elif c.max_afs is None or len(afs) < c.max_afs:
            best = None
            for y in range(h):
                for x in range(w):
                    if any(_inside(a, x, y) for a in afs):
                        continue
                    if best is None or mag[y, x] > best[2]:
                        best = (x, y, mag[y, x])
            if best is not None and best[2] > c.t_a:
                afs.append(_AF(next_id, best[0], best[1], c.r_af, t))
                created.append(next_id)
                next_id += 1

        for a in afs:
            a.history.append(_response(a, lm, c))

        removed = []
        if c.variant != "center":
            d = c.d_frames
            doomed = [a for a in afs if t - a.birth >= d and sum(a.history[-d:]) < c.t_d]
            if doomed and len(doomed) == len(afs):
                best = doomed[0]
                for a in doomed[1:]:
                    if sum(a.history[-d:]) > sum(best.history[-d:]):
                        best = a
                doomed = [a for a in doomed if a is not best]
            for a in doomed:
                afs.remove(a)
                removed.append(a.id)

        records = [{"id": a.id, "cx": a.cx, "cy": a.cy, "radius": a.radius,
                    "response": a.history[-1], "age_frames": t - a.birth,
                    "windowed_sum": sum(a.history[-c.d_frames:])} for a in afs]
        events.append(DetectionEvent(frame_index=t, afs=records, created=created, removed=removed))
    return events
