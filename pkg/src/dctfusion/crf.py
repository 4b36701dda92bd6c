"""Camera response recovery and radiance-map assembly.

The response is represented by its log inverse ``h(z) = ln f^-1(z)`` sampled
at the 256 8-bit codes, one curve per channel, anchored so that ``h(128) = 0``.
Recovery solves a weighted, smoothness-regularised linear least-squares system
over the unknown curve values and the log irradiance of a set of sampled
pixels.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass

import numpy as np

from dctfusion.errors import DomainError, EstimationError, ParseError
from dctfusion.image import LINEAR, ExposureStack, ImageRGB, quantize8

log = logging.getLogger(__name__)

LEVELS = 256
ANCHOR = 128
DEFAULT_LAMBDA = 50.0
DEFAULT_SAMPLES = 70


class MonotonicityWarning(UserWarning):
    """The least-squares curve decreased somewhere and was projected."""


def weight_hat(z):
    """Triangular weight: ``z`` up to 127, ``255 - z`` above; zero at both ends."""
    z = np.asarray(z)
    return np.where(z <= 127, z, 255 - z).astype(np.float64)


WEIGHTS = weight_hat(np.arange(LEVELS))


@dataclass(frozen=True, eq=False)
class ResponseCurve:
    """Log inverse response per channel, ``h`` of shape ``(256, 3)``.

    ``projection_rms`` is the RMS distance moved by the isotonic projection
    (zero when the raw solution was already monotone).
    """

    h: np.ndarray
    projection_rms: float = 0.0

    def __post_init__(self):
        h = np.array(self.h, dtype=np.float64)
        if h.ndim == 1:
            h = np.repeat(h[:, None], 3, axis=1)
        if h.shape != (LEVELS, 3):
            raise DomainError(f"response curve must have shape (256, 3), got {h.shape}")
        if np.any(np.isnan(h)) or np.any(h == np.inf):
            raise DomainError("response curve has NaN or +inf entries")
        if np.any(np.diff(h, axis=0) < 0):
            raise DomainError("response curve must be non-decreasing")
        if np.any(h[ANCHOR] != 0.0):
            raise DomainError("response curve must be anchored at h[128] = 0")
        h.setflags(write=False)
        object.__setattr__(self, "h", h)

    @classmethod
    def linear(cls) -> "ResponseCurve":
        """``h(z) = ln(z / 128)``, the curve of an ideal linear sensor."""
        with np.errstate(divide="ignore"):
            h = np.log(np.arange(LEVELS) / ANCHOR)
        return cls(h)

    def to_text(self) -> str:
        # repr of a Python float is the shortest exact round-trip form
        rows = [" ".join([str(z)] + [repr(float(v)) for v in self.h[z]]) for z in range(LEVELS)]
        return "\n".join(rows) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ResponseCurve":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if len(lines) != LEVELS:
            raise ParseError(f"response curve needs {LEVELS} lines, found {len(lines)}")
        h = np.empty((LEVELS, 3))
        for i, line in enumerate(lines):
            parts = line.split()
            try:
                if len(parts) != 4 or int(parts[0]) != i:
                    raise ValueError
                h[i] = [float(p) for p in parts[1:]]
            except ValueError:
                raise ParseError(f"bad response curve line {i + 1}: {line!r}") from None
        try:
            return cls(h)
        except DomainError as exc:
            raise ParseError(f"invalid response curve: {exc}") from None


def exposure_from_irradiance(irradiance, exposure_time: float, response: str = "linear",
                             gamma: float = 2.2) -> np.ndarray:
    """Simulate a camera: apply ``f`` to ``I * dt``, clamp to [0, 1], quantise to 8 bits."""
    x = np.clip(np.asarray(irradiance, dtype=np.float64) * exposure_time, 0.0, 1.0)
    if response == "linear":
        y = x
    elif response == "gamma":
        y = x ** (1.0 / gamma)
    else:
        raise DomainError(f"unknown response {response!r}")
    return quantize8(y)


def synthetic_stack(irradiance, exposure_times, response: str = "linear",
                    gamma: float = 2.2) -> ExposureStack:
    """Build an exposure stack from an ``(H, W)`` or ``(H, W, 3)`` irradiance field."""
    irradiance = np.asarray(irradiance, dtype=np.float64)
    if irradiance.ndim == 2:
        irradiance = np.repeat(irradiance[:, :, None], 3, axis=2)
    images = [
        ImageRGB(exposure_from_irradiance(irradiance, t, response, gamma) / 255.0)
        for t in exposure_times
    ]
    return ExposureStack(images, exposure_times)


def _codes(stack: ExposureStack) -> np.ndarray:
    """Stack as 8-bit codes, shape ``(J, H, W, 3)``."""
    return quantize8(stack.array())


def sample_plan(codes: np.ndarray, n_samples: int) -> np.ndarray:
    """Flat pixel indices spread evenly over the middle exposure's intensity range.

    ``codes`` is ``(J, H, W)`` for one channel. For each of ``n_samples``
    evenly spaced target intensities the nearest populated intensity level is
    found and its next unused pixel taken, moving to neighbouring levels once
    a level runs dry. Deterministic: pixels within a level go in raster order.
    """
    mid = codes[len(codes) // 2].ravel().astype(np.int64)
    n_samples = min(n_samples, mid.size)
    by_level = [np.flatnonzero(mid == v) for v in range(LEVELS)]
    used = np.zeros(LEVELS, dtype=np.int64)
    populated = np.array([len(p) > 0 for p in by_level])
    levels = np.flatnonzero(populated)
    chosen = []
    for t in np.linspace(levels[0], levels[-1], n_samples):
        for v in sorted(levels, key=lambda v: (abs(v - t), v)):
            if used[v] < len(by_level[v]):
                chosen.append(by_level[v][used[v]])
                used[v] += 1
                break
    return np.array(sorted(chosen), dtype=np.int64)


def default_samples(n_exposures: int) -> int:
    # enough equations to pin all 256 codes without leaning on smoothness alone
    return max(DEFAULT_SAMPLES, math.ceil(LEVELS / max(1, n_exposures - 1)))


def _solve_channel(z: np.ndarray, log_dt: np.ndarray, lam: float) -> np.ndarray:
    """Least-squares curve for one channel; ``z`` is ``(P, J)`` integer codes."""
    p, j = z.shape
    n_data = p * j
    rows = n_data + 1 + (LEVELS - 2)
    a = np.zeros((rows, LEVELS + p))
    b = np.zeros(rows)

    w = WEIGHTS[z].ravel()
    idx = np.arange(n_data)
    a[idx, z.ravel()] = w
    a[idx, LEVELS + np.repeat(np.arange(p), j)] = -w
    b[:n_data] = w * np.tile(log_dt, p)

    a[n_data, ANCHOR] = 1.0

    # smoothness rows scaled by lam * w(z), matching the data rows' w(z) scaling
    k = n_data + 1 + np.arange(LEVELS - 2)
    zs = np.arange(1, LEVELS - 1)
    s = lam * WEIGHTS[zs]
    a[k, zs - 1] = s
    a[k, zs] = -2.0 * s
    a[k, zs + 1] = s

    x, _, rank, _ = np.linalg.lstsq(a, b, rcond=None)
    if rank < LEVELS + p and lam > 0:
        log.debug("response system rank %d of %d", rank, LEVELS + p)
    return x[:LEVELS]


def isotonic(y: np.ndarray) -> np.ndarray:
    """Pool-adjacent-violators projection onto non-decreasing sequences."""
    values, counts = [], []
    for v in np.asarray(y, dtype=np.float64):
        values.append(v)
        counts.append(1)
        while len(values) > 1 and values[-2] > values[-1]:
            c = counts[-2] + counts[-1]
            values[-2] = (values[-2] * counts[-2] + values[-1] * counts[-1]) / c
            counts[-2] = c
            values.pop()
            counts.pop()
    return np.repeat(values, counts)


def solve_response(stack: ExposureStack, lam: float = DEFAULT_LAMBDA,
                   n_samples: int | None = None) -> ResponseCurve:
    """Recover the per-channel log inverse response from an exposure stack."""
    if len(stack) < 2:
        raise EstimationError("at least two exposures are needed to recover a response curve")
    times = np.array(stack.exposure_times)
    if np.unique(times).size < 2:
        raise EstimationError("all exposures share one exposure time; the system is singular")
    if not (math.isfinite(lam) and lam >= 0):
        raise DomainError(f"smoothness weight must be finite and >= 0, got {lam}")
    if n_samples is None:
        n_samples = default_samples(len(stack))
    log_dt = np.log(times)
    codes = _codes(stack)
    j = len(stack)
    if n_samples * (j - 1) < LEVELS - 1:
        log.info("only %d samples over %d exposures; smoothness term fills gaps", n_samples, j)

    curves = np.empty((LEVELS, 3))
    for ch in range(3):
        chan = codes[..., ch].reshape(j, -1)
        plan = sample_plan(codes[..., ch], n_samples)
        z = chan[:, plan].T
        if np.all(WEIGHTS[z] == 0):
            raise EstimationError(f"channel {ch}: every sample is clipped")
        curves[:, ch] = _solve_channel(z, log_dt, lam)
    if not np.all(np.isfinite(curves)):
        raise EstimationError("response solve produced non-finite values")

    projected = np.column_stack([isotonic(curves[:, ch]) for ch in range(3)])
    moved = float(np.sqrt(np.mean((projected - curves) ** 2)))
    if moved > 0:
        warnings.warn(
            f"recovered response was not monotone; projected (RMS change {moved:.3g})",
            MonotonicityWarning,
            stacklevel=2,
        )
    projected -= projected[ANCHOR]
    return ResponseCurve(projected, moved)


@dataclass(frozen=True, eq=False)
class RadianceResult:
    radiance: ImageRGB
    fallback_count: int


def radiance_map(stack: ExposureStack, curve: ResponseCurve) -> RadianceResult:
    """Weighted log-domain average of ``h(Z) - ln dt`` over the exposures.

    Pixels whose codes are all weightless fall back to the exposure nearest
    mid-gray with unit weight; ``fallback_count`` counts such pixel locations.
    """
    codes = _codes(stack)
    log_dt = np.log(np.array(stack.exposure_times))[:, None, None, None]
    h = curve.h
    chan = np.arange(3)
    hz = h[codes, chan]
    w = WEIGHTS[codes]
    num = np.sum(w * (hz - log_dt), axis=0)
    den = np.sum(w, axis=0)

    dead = den == 0
    with np.errstate(invalid="ignore", divide="ignore"):
        log_i = num / np.where(dead, 1.0, den)
    if np.any(dead):
        nearest = np.argmin(np.abs(codes.astype(np.float64) - 127.5), axis=0)
        fb_h = np.take_along_axis(hz, nearest[None], axis=0)[0]
        fb_dt = np.take_along_axis(
            np.broadcast_to(log_dt, codes.shape), nearest[None], axis=0
        )[0]
        log_i = np.where(dead, fb_h - fb_dt, log_i)
    with np.errstate(over="ignore"):
        radiance = np.exp(log_i)
    if not np.all(np.isfinite(radiance)):
        raise EstimationError("radiance overflowed; check the response curve")
    return RadianceResult(ImageRGB(radiance, LINEAR), int(np.any(dead, axis=-1).sum()))
