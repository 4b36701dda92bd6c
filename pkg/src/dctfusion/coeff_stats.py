"""Distribution fits and Kolmogorov-Smirnov distances for block-DCT coefficients."""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import ndtr

from dctfusion.errors import DomainError
from dctfusion.transform import CoeffGrid

LAPLACIAN = "laplacian"
GAUSSIAN = "gaussian"
CSV_HEADER = "band,family,location,scale,ks_d,winner"

# spreads this small relative to the sample magnitude are rounding noise
DEGENERATE_RTOL = 1e-12


@dataclass(frozen=True)
class Band:
    """Which coefficients to pull from each tile: ``dc``, ``allac`` or ``ac`` at (u, v)."""

    kind: str
    u: int = 0
    v: int = 0

    def __post_init__(self):
        if self.kind not in ("dc", "ac", "allac"):
            raise DomainError(f"unknown band kind {self.kind!r}")
        if self.kind == "ac" and (self.u, self.v) == (0, 0):
            raise DomainError("AC band cannot be (0, 0); that is the DC term")

    def __str__(self):
        return f"ac({self.u};{self.v})" if self.kind == "ac" else self.kind

    @classmethod
    def parse(cls, text: str) -> "Band":
        text = text.strip().lower()
        if text in ("dc", "allac"):
            return cls(text)
        m = re.fullmatch(r"ac[:(]?(\d+)[,;](\d+)\)?", text)
        if not m:
            raise DomainError(f"cannot parse band {text!r}; use dc, allac or ac:u,v")
        return cls("ac", int(m.group(1)), int(m.group(2)))


DC = Band("dc")
ALL_AC = Band("allac")


def extract_band(grid: CoeffGrid, band: Band) -> np.ndarray:
    """Coefficient sample for ``band``, tiles in raster order."""
    if not grid.is_block:
        raise DomainError("band extraction needs a block-layout grid")
    tiles = grid.tiles()
    b = grid.block
    if band.kind == "dc":
        return tiles[:, :, 0, 0].ravel().copy()
    if band.kind == "ac":
        if not (0 <= band.u < b and 0 <= band.v < b):
            raise DomainError(f"AC index ({band.u}, {band.v}) outside {b}x{b} tile")
        return tiles[:, :, band.u, band.v].ravel().copy()
    mask = np.ones((b, b), dtype=bool)
    mask[0, 0] = False
    return tiles[:, :, mask].ravel().copy()


@dataclass(frozen=True)
class FitResult:
    family: str
    location: float
    scale: float
    degenerate: bool = False

    def cdf(self, x):
        x = np.asarray(x, dtype=np.float64)
        if self.degenerate:
            return (x >= self.location).astype(np.float64)
        z = (x - self.location) / self.scale
        if self.family == LAPLACIAN:
            return np.where(z < 0, 0.5 * np.exp(np.minimum(z, 0)), 1.0 - 0.5 * np.exp(-np.maximum(z, 0)))
        return ndtr(z)


def _sample(values) -> np.ndarray:
    x = np.asarray(values, dtype=np.float64).ravel()
    if x.size == 0:
        raise DomainError("empty sample")
    if not np.all(np.isfinite(x)):
        raise DomainError("sample contains non-finite values")
    return x


def _negligible(scale: float, x: np.ndarray) -> bool:
    return scale <= DEGENERATE_RTOL * max(1.0, float(np.max(np.abs(x))))


def fit_laplacian(values) -> FitResult:
    """Maximum-likelihood Laplacian: median location, mean absolute deviation scale."""
    x = _sample(values)
    mu = float(np.median(x))
    b = float(np.mean(np.abs(x - mu)))
    if _negligible(b, x):
        return FitResult(LAPLACIAN, mu, 0.0, degenerate=True)
    return FitResult(LAPLACIAN, mu, b)


def fit_gaussian(values) -> FitResult:
    """Maximum-likelihood Gaussian (population standard deviation)."""
    x = _sample(values)
    mu = float(np.mean(x))
    sigma = float(np.std(x))
    if _negligible(sigma, x):
        return FitResult(GAUSSIAN, mu, 0.0, degenerate=True)
    return FitResult(GAUSSIAN, mu, sigma)


def ks_statistic(values, cdf: Callable) -> float:
    """One-sample KS distance ``sup |F_n - F|`` evaluated at the order statistics."""
    x = np.sort(_sample(values))
    n = x.size
    f = np.asarray(cdf(x), dtype=np.float64)
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n), 0.0))


@dataclass(frozen=True)
class FitComparison:
    band: str
    laplacian: FitResult
    gaussian: FitResult
    laplacian_d: float
    gaussian_d: float

    @property
    def tie(self) -> bool:
        return self.laplacian_d == self.gaussian_d

    @property
    def winner(self) -> str:
        return LAPLACIAN if self.laplacian_d <= self.gaussian_d else GAUSSIAN

    @property
    def degenerate(self) -> bool:
        return self.laplacian.degenerate or self.gaussian.degenerate

    def csv_rows(self) -> list[str]:
        winner = self.winner + ("(tie)" if self.tie else "")
        return [
            f"{self.band},{fit.family},{fit.location:.9g},{fit.scale:.9g},{d:.9g},{winner}"
            for fit, d in ((self.laplacian, self.laplacian_d), (self.gaussian, self.gaussian_d))
        ]


def compare_sample(values, band: str = "sample") -> FitComparison:
    x = _sample(values)
    lap, gau = fit_laplacian(x), fit_gaussian(x)
    return FitComparison(band, lap, gau, ks_statistic(x, lap.cdf), ks_statistic(x, gau.cdf))


def compare_fits(grid: CoeffGrid, band: Band = ALL_AC) -> FitComparison:
    """Fit both families to one band of a block grid; the smaller KS distance wins."""
    return compare_sample(extract_band(grid, band), str(band))
