"""Lobula plate: fuse T4/T5 into signed local motion and its magnitude."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ModelConfig
from .medulla import DIRECTIONS, OPPOSITE, DirectionalMaps


@dataclass
class DirectionalMotion:
    lm_r: np.ndarray
    lm_l: np.ndarray
    lm_u: np.ndarray
    lm_d: np.ndarray
    magnitude: np.ndarray = None

    def __post_init__(self):
        if self.magnitude is None:
            self.magnitude = motion_magnitude(self)

    def get(self, direction: str) -> np.ndarray:
        return getattr(self, "lm_" + direction)


def leaky_relu(x: np.ndarray, slope: float) -> np.ndarray:
    return np.where(x > 0, x, slope * x)


def fuse_direction(t4_pref, t5_pref, t4_null, t5_null, config: ModelConfig) -> np.ndarray:
    """Opponent fusion of ON/OFF preferred and null direction signals.

    Bases are rectified before the fractional exponents; anything at or
    below ``power_floor`` counts as zero.
    """
    g1, g2, floor = config.gamma_1, config.gamma_2, config.power_floor

    def base(t):
        return np.where(t > floor, t, 0.0)

    pref = base(t4_pref) ** g1 + base(t5_pref) ** g2
    null = base(t4_null) ** g1 + base(t5_null) ** g2
    return leaky_relu(pref - null, config.leak_slope)


def motion_magnitude(dm: DirectionalMotion) -> np.ndarray:
    h = np.maximum(dm.lm_r, dm.lm_l)
    v = np.maximum(dm.lm_d, dm.lm_u)
    return np.sqrt(h * h + v * v)


def integrate(maps: DirectionalMaps, config: ModelConfig) -> DirectionalMotion:
    lm = {}
    for v in DIRECTIONS:
        o = OPPOSITE[v]
        lm[v] = fuse_direction(maps.t4[v], maps.t5[v], maps.t4[o], maps.t5[o], config)
    return DirectionalMotion(lm_r=lm["r"], lm_l=lm["l"], lm_u=lm["u"], lm_d=lm["d"])
