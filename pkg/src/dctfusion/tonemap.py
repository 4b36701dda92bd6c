"""Global photographic tone mapping of radiance maps to unit-range images."""
from __future__ import annotations

import math

import numpy as np

from dctfusion.errors import DomainError, RangeError
from dctfusion.image import LINEAR, UNIT, ImageRGB

REC709 = np.array([0.2126, 0.7152, 0.0722])


def luminance(rgb) -> np.ndarray:
    return np.asarray(rgb, dtype=np.float64) @ REC709


def log_average(lum: np.ndarray, eps: float = 1e-6) -> float:
    # fsum keeps the reduction independent of array layout
    flat = np.log(eps + np.asarray(lum, dtype=np.float64)).ravel()
    return math.exp(math.fsum(flat) / flat.size)


def tonemap_global(radiance: ImageRGB, key: float = 0.18, eps: float = 1e-6,
                   average: float | None = None) -> ImageRGB:
    """Compress luminance with ``L' / (1 + L')`` where ``L' = key * L / L_avg``.

    ``average`` overrides the log-average luminance, e.g. to tone map several
    maps on a common scale. Channels are rescaled by ``L_d / L`` so hue ratios
    survive, then clamped to ``[0, 1]``.
    """
    if radiance.value_range != LINEAR:
        raise RangeError("tonemap_global expects a linear-range radiance map")
    if not key > 0 or not eps > 0:
        raise DomainError("key and eps must be positive")
    rgb = radiance.data
    lum = luminance(rgb)
    if average is None:
        average = log_average(lum, eps)
    if not average > 0:
        raise DomainError("log-average luminance must be positive")
    scaled = key * lum / average
    display = scaled / (1.0 + scaled)
    ratio = np.divide(display, lum, out=np.zeros_like(lum), where=lum > 0)
    out = np.clip(rgb * ratio[..., None], 0.0, 1.0)
    return ImageRGB(out, UNIT)
