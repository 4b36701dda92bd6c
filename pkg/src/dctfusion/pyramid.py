"""Gaussian and Laplacian pyramids with the 5-tap binomial kernel."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import correlate1d

from dctfusion.errors import DomainError
from dctfusion.image import as_plane

KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0

# Mirror padding keeps the parity of zero-inserted samples, so expand() preserves
# constants right up to the border.
_MODE = "mirror"


def _blur(plane: np.ndarray, gain: float = 1.0) -> np.ndarray:
    k = KERNEL * gain
    out = correlate1d(plane, k, axis=0, mode=_MODE)
    return correlate1d(out, k, axis=1, mode=_MODE)


def reduce(plane: np.ndarray) -> np.ndarray:
    """Blur, then keep even rows and columns."""
    return _blur(plane)[::2, ::2]


def expand(plane: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Zero-insert up to ``shape`` and interpolate with the kernel at gain 2 per axis."""
    up = np.zeros(shape, dtype=np.float64)
    up[::2, ::2] = plane
    return _blur(up, gain=2.0)


def _check_levels(plane: np.ndarray, levels: int) -> None:
    if levels < 1:
        raise DomainError(f"pyramid needs at least one level, got {levels}")
    if min(plane.shape) < 2 ** (levels - 1):
        raise DomainError(
            f"plane {plane.shape} too small for {levels} pyramid levels"
        )


def gaussian_pyramid(plane, levels: int) -> list[np.ndarray]:
    g = as_plane(plane)
    _check_levels(g, levels)
    pyramid = [g]
    for _ in range(levels - 1):
        pyramid.append(reduce(pyramid[-1]))
    return pyramid


def laplacian_pyramid(plane, levels: int) -> list[np.ndarray]:
    """Band-pass levels ``G_i - expand(G_i+1)`` plus the coarsest Gaussian residual."""
    gauss = gaussian_pyramid(plane, levels)
    bands = [
        gauss[i] - expand(gauss[i + 1], gauss[i].shape) for i in range(levels - 1)
    ]
    bands.append(gauss[-1])
    return bands


def collapse(pyramid: list[np.ndarray]) -> np.ndarray:
    out = pyramid[-1]
    for band in reversed(pyramid[:-1]):
        out = band + expand(out, band.shape)
    return out
