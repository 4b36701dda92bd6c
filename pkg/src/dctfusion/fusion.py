"""Exposure fusion: transform-domain averaging, spatial mean, and a pyramid baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate

from dctfusion import pyramid, transform
from dctfusion.errors import DomainError
from dctfusion.image import UNIT, ExposureStack, ImageRGB, as_plane

LAPLACIAN_KERNEL = np.array([[0.0, 1.0, 0.0], [1.0, -4.0, 1.0], [0.0, 1.0, 0.0]])
WELL_EXPOSED_SIGMA = 0.2


@dataclass(frozen=True, eq=False)
class FusionResult:
    """Fused unit image plus the unclamped result it was clamped from."""

    image: ImageRGB
    raw: np.ndarray
    excursion: float


@dataclass(frozen=True)
class MertensParams:
    contrast: float = 1.0
    saturation: float = 1.0
    exposedness: float = 1.0
    levels: int | None = None
    eps: float = 1e-12

    def __post_init__(self):
        for name in ("contrast", "saturation", "exposedness"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise DomainError(f"{name} exponent must be finite and >= 0, got {value}")
        if not self.eps > 0:
            raise DomainError("eps must be positive")


def _finish(raw: np.ndarray) -> FusionResult:
    below = max(0.0, -float(raw.min()))
    above = max(0.0, float(raw.max()) - 1.0)
    return FusionResult(ImageRGB(np.clip(raw, 0.0, 1.0), UNIT), raw, max(below, above))


def _canonical_mean(values: np.ndarray) -> np.ndarray:
    # sort along the stack axis so the summation order, hence the result,
    # does not depend on how the caller ordered the images
    return np.sort(values, axis=0).sum(axis=0) / values.shape[0]


def _as_stack(stack) -> ExposureStack:
    if isinstance(stack, ExposureStack):
        return stack
    images = list(stack)
    if not images:
        raise DomainError("cannot fuse an empty stack")
    return ExposureStack(images, [1.0] * len(images))


def fuse_dct(stack, block: int | None = None) -> FusionResult:
    """Average the per-image DCT coefficients and invert, channel by channel.

    ``block`` of ``None`` or ``0`` selects the full-frame transform; otherwise
    a tile size from :data:`dctfusion.transform.BLOCK_SIZES`.
    """
    stack = _as_stack(stack)
    channels = []
    for ch in range(3):
        grids = [transform.forward(img.plane(ch), block) for img in stack.images]
        mean = _canonical_mean(np.stack([g.coefficients for g in grids]))
        channels.append(transform.inverse(grids[0].with_coefficients(mean)))
    return _finish(np.stack(channels, axis=-1))


def fuse_spatial_mean(stack) -> FusionResult:
    """Per-pixel arithmetic mean across the stack."""
    stack = _as_stack(stack)
    return _finish(_canonical_mean(stack.array()))


def luma(rgb: np.ndarray) -> np.ndarray:
    return np.asarray(rgb, dtype=np.float64).mean(axis=-1)


def quality_contrast(plane) -> np.ndarray:
    """Absolute discrete-Laplacian response with replicated edges."""
    return np.abs(correlate(as_plane(plane), LAPLACIAN_KERNEL, mode="nearest"))


def quality_saturation(rgb) -> np.ndarray:
    """Population standard deviation across the last (channel) axis."""
    return np.asarray(rgb, dtype=np.float64).std(axis=-1)


def quality_wellexposed(rgb, sigma: float = WELL_EXPOSED_SIGMA) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    return np.prod(np.exp(-((rgb - 0.5) ** 2) / (2.0 * sigma**2)), axis=-1)


def default_levels(height: int, width: int) -> int:
    return max(1, int(math.floor(math.log2(min(height, width)))) - 2)


def mertens_weights(stack, params: MertensParams = MertensParams()) -> np.ndarray:
    """Normalised weight maps, shape ``(J, H, W)``, summing to one per pixel."""
    stack = _as_stack(stack)
    raw = []
    for img in stack.images:
        w = (
            quality_contrast(luma(img.data)) ** params.contrast
            * quality_saturation(img.data) ** params.saturation
            * quality_wellexposed(img.data) ** params.exposedness
        )
        raw.append(w + params.eps)
    raw = np.stack(raw)
    return raw / raw.sum(axis=0)


def fuse_mertens(stack, params: MertensParams = MertensParams()) -> FusionResult:
    stack = _as_stack(stack)
    h, w = stack.shape
    levels = params.levels if params.levels is not None else default_levels(h, w)
    max_levels = max(1, int(math.floor(math.log2(min(h, w)))))
    if levels < 1 or levels > max_levels:
        raise DomainError(
            f"pyramid levels must be in [1, {max_levels}] for a {h}x{w} stack, got {levels}"
        )
    weights = mertens_weights(stack, params)
    weight_pyramids = [pyramid.gaussian_pyramid(wm, levels) for wm in weights]
    channels = []
    for ch in range(3):
        blended = [np.zeros_like(level) for level in weight_pyramids[0]]
        for img, wpyr in zip(stack.images, weight_pyramids):
            lap = pyramid.laplacian_pyramid(img.plane(ch), levels)
            for i in range(levels):
                blended[i] += wpyr[i] * lap[i]
        channels.append(pyramid.collapse(blended))
    return _finish(np.stack(channels, axis=-1))


METHODS = ("dct", "mean", "mertens")


def fuse(stack, method: str = "dct", block: int | None = None,
         params: MertensParams = MertensParams()) -> FusionResult:
    if method == "dct":
        return fuse_dct(stack, block)
    if method == "mean":
        return fuse_spatial_mean(stack)
    if method == "mertens":
        return fuse_mertens(stack, params)
    raise DomainError(f"unknown fusion method {method!r}")
