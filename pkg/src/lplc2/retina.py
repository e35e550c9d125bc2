"""Retina and lamina: frame differencing, vDoG filtering, ON/OFF split.

Fields are plain 2D float64 arrays indexed ``[y, x]`` (row-major, y down).
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from .config import ModelConfig

_SCIPY_MODE = {"replicate": "nearest", "zero": "constant"}


class ShapeMismatchError(ValueError):
    pass


class KernelTooLargeError(ValueError):
    pass


@dataclass(frozen=True)
class Kernel:
    radius: int
    weights: np.ndarray
    # 1D factor when weights == outer(profile, profile); enables the fast path
    profile: Optional[np.ndarray] = None

    @property
    def size(self) -> int:
        return 2 * self.radius + 1


def to_grayscale(image: np.ndarray) -> np.ndarray:
    """Luminance of an RGB(A) or already-gray image, as float64."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 2:
        return image
    if image.ndim == 3 and image.shape[2] in (3, 4):
        return image[..., 0] * 0.299 + image[..., 1] * 0.587 + image[..., 2] * 0.114
    raise ValueError(f"cannot convert array of shape {image.shape} to grayscale")


def frame_difference(current: np.ndarray, previous: np.ndarray) -> np.ndarray:
    current = np.asarray(current, dtype=np.float64)
    previous = np.asarray(previous, dtype=np.float64)
    if current.shape != previous.shape:
        raise ShapeMismatchError(f"frame shapes differ: {current.shape} vs {previous.shape}")
    return current - previous


@lru_cache(maxsize=64)
def build_gaussian_kernel(sigma: float, radius: int) -> Kernel:
    """Gaussian on a (2r+1)^2 grid, renormalized to unit sum after truncation."""
    if not sigma > 0:
        raise ValueError("sigma must be > 0")
    if radius < 1:
        raise ValueError("radius must be >= 1")
    u = np.arange(-radius, radius + 1, dtype=np.float64)
    g = np.exp(-(u * u) / (2.0 * sigma * sigma))
    profile = g / g.sum()
    weights = np.outer(profile, profile)
    profile.setflags(write=False)
    weights.setflags(write=False)
    return Kernel(radius=radius, weights=weights, profile=profile)


def raw_gaussian_value(sigma: float, u: float, v: float) -> float:
    """Continuous 2D Gaussian density at offset (u, v), before truncation."""
    return float(np.exp(-(u * u + v * v) / (2.0 * sigma * sigma)) / (2.0 * np.pi * sigma * sigma))


def convolve(field: np.ndarray, kernel: Kernel, boundary: str = "replicate") -> np.ndarray:
    """Windowed correlation of ``field`` with ``kernel``; output keeps the input shape."""
    field = np.asarray(field, dtype=np.float64)
    if kernel.radius >= min(field.shape):
        raise KernelTooLargeError(
            f"kernel radius {kernel.radius} must be smaller than field extent {min(field.shape)}"
        )
    mode = _SCIPY_MODE[boundary]
    if kernel.profile is not None:
        out = ndimage.correlate1d(field, kernel.profile, axis=0, mode=mode, cval=0.0)
        return ndimage.correlate1d(out, kernel.profile, axis=1, mode=mode, cval=0.0)
    return ndimage.correlate(field, kernel.weights, mode=mode, cval=0.0)


def dog(field: np.ndarray, config: ModelConfig) -> np.ndarray:
    """Linear difference of Gaussians: narrow excitation minus broad inhibition."""
    k_e = build_gaussian_kernel(config.sigma_e, config.r_de)
    k_i = build_gaussian_kernel(config.sigma_i, config.r_di)
    return convolve(field, k_e, config.boundary) - convolve(field, k_i, config.boundary)


def vdog(luminance_change: np.ndarray, config: ModelConfig) -> np.ndarray:
    """Polarity-selective DoG.

    Brightening and darkening are filtered separately and each result is
    kept only where it retains its own sign, so the DoG surround never
    leaks one polarity into the opposite channel. Returns the signed
    combination: positive for ON, negative for OFF.
    """
    on_in, off_in = half_wave_split(luminance_change)
    on = np.maximum(dog(on_in, config), 0.0)
    off = np.maximum(dog(off_in, config), 0.0)
    return on - off


def half_wave_split(field: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    field = np.asarray(field, dtype=np.float64)
    return np.maximum(field, 0.0), np.maximum(-field, 0.0)
