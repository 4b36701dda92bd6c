"""Full-reference quality measures: IMMSE, PSNR and SSIM."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from dctfusion.errors import DomainError, ShapeError
from dctfusion.image import ImageRGB

WINDOW = 11
SIGMA = 1.5
K1 = 0.01
K2 = 0.03


def _pixels(image) -> np.ndarray:
    return image.data if isinstance(image, ImageRGB) else np.asarray(image, dtype=np.float64)


def _pair(a, b) -> tuple[np.ndarray, np.ndarray]:
    a, b = _pixels(a), _pixels(b)
    if a.shape != b.shape:
        raise ShapeError(f"image sizes differ: {a.shape} vs {b.shape}")
    return a, b


def immse(a, b, scale: str = "unit") -> float:
    """Mean squared error over all samples; ``scale="byte"`` works in 0-255 units."""
    a, b = _pair(a, b)
    if scale == "byte":
        a, b = a * 255.0, b * 255.0
    elif scale != "unit":
        raise DomainError(f"unknown scale {scale!r}")
    return float(np.mean((a - b) ** 2))


def psnr_from_mse(mse: float, peak: float = 1.0) -> float:
    if not peak > 0:
        raise DomainError("peak must be positive")
    if mse == 0:
        return math.inf
    return 10.0 * math.log10(peak * peak / mse)


def psnr(a, b, peak: float = 1.0) -> float:
    """PSNR in dB; identical inputs give ``math.inf``.

    With ``peak=255`` the samples are compared on the byte scale.
    """
    scale = "byte" if peak == 255 else "unit"
    return psnr_from_mse(immse(a, b, scale), peak)


def gaussian_window(size: int = WINDOW, sigma: float = SIGMA) -> np.ndarray:
    x = np.arange(size) - (size - 1) / 2.0
    g = np.exp(-(x**2) / (2.0 * sigma**2))
    return g / g.sum()


def _filter_valid(plane: np.ndarray, g: np.ndarray) -> np.ndarray:
    r = len(g) // 2
    out = correlate1d(correlate1d(plane, g, axis=0), g, axis=1)
    return out[r : plane.shape[0] - r, r : plane.shape[1] - r]


def ssim_map(a: np.ndarray, b: np.ndarray, data_range: float = 1.0) -> np.ndarray:
    """SSIM index for every full window position of two planes."""
    if min(a.shape) < WINDOW:
        raise DomainError(f"image {a.shape} is smaller than the {WINDOW}x{WINDOW} window")
    g = gaussian_window()
    c1 = (K1 * data_range) ** 2
    c2 = (K2 * data_range) ** 2
    mu_a = _filter_valid(a, g)
    mu_b = _filter_valid(b, g)
    var_a = _filter_valid(a * a, g) - mu_a * mu_a
    var_b = _filter_valid(b * b, g) - mu_b * mu_b
    cov = _filter_valid(a * b, g) - mu_a * mu_b
    num = (2.0 * (mu_a * mu_b) + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return num / den


def ssim(a, b) -> float:
    """Mean SSIM over windows and channels, Gaussian window, dynamic range 1."""
    a, b = _pair(a, b)
    if a.ndim == 2:
        return float(ssim_map(a, b).mean())
    return float(np.mean([ssim_map(a[..., c], b[..., c]).mean() for c in range(a.shape[-1])]))


@dataclass(frozen=True)
class MetricReport:
    name: str
    psnr: float
    immse: float
    ssim: float
    peak: float = 1.0

    HEADER = "name,psnr_db,immse,ssim"

    def csv_row(self) -> str:
        psnr_text = "inf" if math.isinf(self.psnr) else f"{self.psnr:.6f}"
        return f"{self.name},{psnr_text},{self.immse:.9g},{self.ssim:.6f}"


def compare(a, b, name: str = "image", peak: float = 1.0) -> MetricReport:
    scale = "byte" if peak == 255 else "unit"
    mse = immse(a, b, scale)
    return MetricReport(name, psnr_from_mse(mse, peak), mse, ssim(a, b), peak)
