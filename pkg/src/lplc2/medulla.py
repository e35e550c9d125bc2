"""Medulla: contrast normalization, temporal delays and T4/T5 motion maps."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from .config import ModelConfig, alpha_for_delay, step_delays
from .retina import ShapeMismatchError, build_gaussian_kernel, convolve

DIRECTIONS = ("r", "l", "u", "d")
OPPOSITE = {"r": "l", "l": "r", "u": "d", "d": "u"}

# (dx, dy) of the upstream neighbour for unit distance; y grows downwards,
# so upward motion arrives from larger y.
UPSTREAM = {"r": (-1, 0), "l": (1, 0), "u": (0, 1), "d": (0, -1)}


def contrast_normalize(raw: np.ndarray, config: ModelConfig) -> np.ndarray:
    """tanh of the field divided by its Gaussian-pooled neighbourhood plus epsilon."""
    pooled = convolve(raw, build_gaussian_kernel(config.sigma_c, config.r_dc), config.boundary)
    return np.tanh(raw / (config.epsilon + pooled))


def temporal_lowpass(current: np.ndarray, state: np.ndarray, alpha: float) -> np.ndarray:
    if current.shape != state.shape:
        raise ShapeMismatchError(f"low-pass shapes differ: {current.shape} vs {state.shape}")
    return alpha * current + (1.0 - alpha) * state


class _Padded:
    """Edge-padded copy of a field serving shifted views without re-padding."""

    def __init__(self, f: np.ndarray, pad: int, boundary: str):
        self.h, self.w = f.shape
        self.pad = pad
        if boundary == "replicate":
            self.data = np.pad(f, pad, mode="edge")
        else:
            self.data = np.pad(f, pad, mode="constant")

    def at(self, dx: int, dy: int) -> np.ndarray:
        y0 = self.pad + dy
        x0 = self.pad + dx
        return self.data[y0:y0 + self.h, x0:x0 + self.w]


def shifted(f: np.ndarray, dx: int, dy: int, boundary: str = "replicate") -> np.ndarray:
    """``out[y, x] = f[y + dy, x + dx]`` with off-frame samples per ``boundary``."""
    return _Padded(f, max(abs(dx), abs(dy)), boundary).at(dx, dy).copy()


def _check_distance(shape, direction: str, distance: int) -> None:
    if distance < 1:
        raise ValueError("correlation distance must be >= 1")
    extent = shape[1] if direction in ("r", "l") else shape[0]
    if distance >= extent:
        raise ValueError(f"distance {distance} exceeds frame extent {extent} along {direction!r}")


def hrc_triple(
    n_field: np.ndarray,
    d_field: np.ndarray,
    direction: str,
    distance: int,
    beta: float,
    boundary: str = "replicate",
) -> np.ndarray:
    """Triple-correlation detector tuned to ``direction``.

    The second input is taken ``distance`` pixels upstream, i.e. where a
    feature moving in the preferred direction passes first.
    """
    _check_distance(n_field.shape, direction, distance)
    ux, uy = UPSTREAM[direction]
    n_s = shifted(n_field, ux * distance, uy * distance, boundary)
    d_s = shifted(d_field, ux * distance, uy * distance, boundary)
    return n_field * d_field * d_s - beta * n_s * d_field * d_s


def _accumulated(n_pad: _Padded, d_pad: _Padded, n: np.ndarray, d: np.ndarray,
                 direction: str, config: ModelConfig):
    """Yield the HRC output for each correlation step 1..n_c."""
    ux, uy = UPSTREAM[direction]
    for i in range(1, config.n_c + 1):
        d_s = d_pad.at(ux * i, uy * i)
        yield d * d_s * (n - config.beta * n_pad.at(ux * i, uy * i))


@dataclass
class ChannelState:
    """Stream state for one polarity channel (ON feeds T4, OFF feeds T5)."""

    channel: str
    shape: tuple
    normalized: Optional[np.ndarray] = None
    delayed: np.ndarray = None
    accum_delay: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        if self.delayed is None:
            self.delayed = np.zeros(self.shape)

    def reset(self) -> None:
        self.normalized = None
        self.delayed = np.zeros(self.shape)
        self.accum_delay.clear()


def directional_map(state: ChannelState, direction: str, config: ModelConfig,
                    _pads=None) -> np.ndarray:
    """Accumulate HRCs over distances 1..n_c and low-pass the result.

    ``state.normalized`` must hold the current frame and ``state.delayed``
    the delay-filter output up to the previous frame. Updates
    ``state.accum_delay[direction]``.
    """
    n, d = state.normalized, state.delayed
    for i in (1, config.n_c):
        _check_distance(n.shape, direction, i)
    if _pads is None:
        _pads = (_Padded(n, config.n_c, config.boundary), _Padded(d, config.n_c, config.boundary))
    n_pad, d_pad = _pads
    terms = _accumulated(n_pad, d_pad, n, d, direction, config)

    if config.delay_mode == "sum":
        m_hat = sum(terms)
        alpha_2 = alpha_for_delay(float(np.mean(step_delays(config))), config.frame_interval_ms)
        prev = state.accum_delay.get(direction)
        if prev is None:
            prev = np.zeros(n.shape)
        out = temporal_lowpass(m_hat, prev, alpha_2)
        state.accum_delay[direction] = out
        return out

    # per_step: each distance keeps its own low-pass with its own delay
    prev = state.accum_delay.get(direction)
    if prev is None:
        prev = [np.zeros(n.shape) for _ in range(config.n_c)]
    new = []
    for m_i, p_i, tau in zip(terms, prev, step_delays(config)):
        new.append(temporal_lowpass(m_i, p_i, alpha_for_delay(tau, config.frame_interval_ms)))
    state.accum_delay[direction] = new
    return sum(new)


@dataclass
class DirectionalMaps:
    t4: Dict[str, np.ndarray]
    t5: Dict[str, np.ndarray]


class Medulla:
    """Frame-sequential T4 (ON) / T5 (OFF) motion extraction."""

    def __init__(self, shape, config: ModelConfig):
        self.config = config
        self.on = ChannelState("ON", tuple(shape))
        self.off = ChannelState("OFF", tuple(shape))
        self.alpha_1 = alpha_for_delay(config.tau_1, config.frame_interval_ms)

    def reset(self) -> None:
        self.on.reset()
        self.off.reset()

    def _channel(self, state: ChannelState, raw: np.ndarray) -> Dict[str, np.ndarray]:
        cfg = self.config
        state.normalized = contrast_normalize(raw, cfg)
        pads = (_Padded(state.normalized, cfg.n_c, cfg.boundary),
                _Padded(state.delayed, cfg.n_c, cfg.boundary))
        maps = {v: directional_map(state, v, cfg, pads) for v in DIRECTIONS}
        # the correlators see the delay line as it stood before this frame
        state.delayed = temporal_lowpass(state.normalized, state.delayed, self.alpha_1)
        return maps

    def step(self, on: np.ndarray, off: np.ndarray) -> DirectionalMaps:
        return DirectionalMaps(t4=self._channel(self.on, on), t5=self._channel(self.off, off))
