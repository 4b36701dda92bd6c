"""Pixel containers and bit-exact binary PPM / Radiance RGBE file I/O.

Images are held as ``float64`` arrays of shape ``(height, width, 3)``.  A
:class:`ImageRGB` additionally carries a value-range tag: ``"unit"`` images
are display-referred and live in ``[0, 1]``; ``"linear"`` images are
scene-referred, unbounded above and non-negative.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from dctfusion.errors import DomainError, ParseError, RangeError, ShapeError

UNIT = "unit"
LINEAR = "linear"

RGBE_MIN = 1e-32


def as_plane(data) -> np.ndarray:
    """Validate and return a 2-D float64 plane (an ``ImagePlane``)."""
    plane = np.asarray(data, dtype=np.float64)
    if plane.ndim != 2:
        raise ShapeError(f"expected a 2-D plane, got shape {plane.shape}")
    if plane.shape[0] < 1 or plane.shape[1] < 1:
        raise ShapeError(f"plane dimensions must be >= 1, got {plane.shape}")
    return plane


@dataclass(frozen=True, eq=False)
class ImageRGB:
    """Three equally sized float planes plus a value-range tag."""

    data: np.ndarray
    value_range: str = UNIT

    def __post_init__(self):
        data = np.array(self.data, dtype=np.float64)
        if data.ndim != 3 or data.shape[2] != 3:
            raise ShapeError(f"expected an (H, W, 3) array, got shape {data.shape}")
        if data.shape[0] < 1 or data.shape[1] < 1:
            raise ShapeError(f"image dimensions must be >= 1, got {data.shape[:2]}")
        if not np.all(np.isfinite(data)):
            raise DomainError("image samples must be finite")
        if self.value_range == UNIT:
            if data.min() < 0.0 or data.max() > 1.0:
                raise RangeError("unit-range image has samples outside [0, 1]")
        elif self.value_range == LINEAR:
            if data.min() < 0.0:
                raise RangeError("linear-range image has negative samples")
        else:
            raise DomainError(f"unknown value range {self.value_range!r}")
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.data.shape[:2]

    def plane(self, channel: int) -> np.ndarray:
        return self.data[:, :, channel]

    @classmethod
    def from_planes(cls, r, g, b, value_range: str = UNIT) -> "ImageRGB":
        planes = [as_plane(p) for p in (r, g, b)]
        if not planes[0].shape == planes[1].shape == planes[2].shape:
            raise ShapeError("R, G and B planes differ in size")
        return cls(np.stack(planes, axis=-1), value_range)


# A radiance map is simply a linear-tagged image.
RadianceMap = ImageRGB


@dataclass(frozen=True, eq=False)
class ExposureStack:
    """Co-registered unit-range images with their exposure times in seconds."""

    images: tuple
    exposure_times: tuple

    def __init__(self, images: Sequence[ImageRGB], exposure_times: Sequence[float]):
        images = tuple(images)
        times = tuple(float(t) for t in exposure_times)
        if not images:
            raise DomainError("exposure stack needs at least one image")
        if len(images) != len(times):
            raise ShapeError(
                f"{len(images)} images but {len(times)} exposure times"
            )
        for img in images:
            if not isinstance(img, ImageRGB) or img.value_range != UNIT:
                raise RangeError("stack images must be unit-range ImageRGB")
            if img.shape != images[0].shape:
                raise ShapeError(
                    f"stack image of size {img.shape} differs from {images[0].shape}"
                )
        for t in times:
            if not (math.isfinite(t) and t > 0):
                raise DomainError(f"exposure time must be positive and finite, got {t}")
        object.__setattr__(self, "images", images)
        object.__setattr__(self, "exposure_times", times)

    def __len__(self):
        return len(self.images)

    @property
    def shape(self) -> tuple[int, int]:
        return self.images[0].shape

    def array(self) -> np.ndarray:
        """All images as one ``(J, H, W, 3)`` array."""
        return np.stack([img.data for img in self.images])


# ---------------------------------------------------------------------------
# PPM (P6, maxval 255)
# ---------------------------------------------------------------------------

_WHITESPACE = b" \t\n\r\v\f"


def _read_token(buf: bytes, pos: int) -> tuple[bytes, int, int]:
    """Return (token, token_start, position after token), skipping comments."""
    n = len(buf)
    while pos < n:
        c = buf[pos : pos + 1]
        if c in (b"#",):
            while pos < n and buf[pos : pos + 1] not in (b"\n", b"\r"):
                pos += 1
        elif c and c in _WHITESPACE:
            pos += 1
        else:
            break
    start = pos
    while pos < n and buf[pos : pos + 1] not in _WHITESPACE and buf[pos : pos + 1] != b"#":
        pos += 1
    if start == pos:
        raise ParseError("unexpected end of PPM header", start)
    return buf[start:pos], start, pos


def load_ppm(data: bytes) -> ImageRGB:
    """Decode a binary P6 PPM with maxval 255 into a unit-range image."""
    data = bytes(data)
    if data[:2] != b"P6":
        raise ParseError(f"bad magic {data[:2]!r}, expected b'P6'", 0)
    pos = 2
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE + b"#":
        raise ParseError("missing whitespace after magic", pos)
    values = []
    for name in ("width", "height", "maxval"):
        token, start, pos = _read_token(data, pos)
        if not token.isdigit():
            raise ParseError(f"invalid {name} {token!r}", start)
        value = int(token)
        if name != "maxval" and value == 0:
            raise ParseError(f"zero {name}", start)
        if name == "maxval" and value != 255:
            raise ParseError(f"unsupported maxval {value}, only 255 is accepted", start)
        values.append(value)
    width, height, _ = values
    if pos >= len(data) or data[pos : pos + 1] not in _WHITESPACE:
        raise ParseError("missing single whitespace byte before raster", pos)
    pos += 1
    expected = width * height * 3
    payload = data[pos : pos + expected]
    if len(payload) < expected:
        raise ParseError(
            f"truncated payload: need {expected} bytes, found {len(payload)}",
            pos + len(payload),
        )
    raster = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3)
    return ImageRGB(raster.astype(np.float64) / 255.0, UNIT)


def quantize8(values) -> np.ndarray:
    """Map unit-range floats to 8-bit codes, rounding half away from zero."""
    v = np.asarray(values, dtype=np.float64) * 255.0
    return np.clip(np.floor(v + 0.5), 0, 255).astype(np.uint8)


def save_ppm(image: ImageRGB) -> bytes:
    """Encode a unit-range image as a byte-deterministic P6 PPM."""
    if image.value_range != UNIT:
        raise RangeError("save_ppm needs a unit-range image; tonemap linear data first")
    header = f"P6 {image.width} {image.height} 255\n".encode("ascii")
    return header + quantize8(image.data).tobytes()


def read_ppm(path) -> ImageRGB:
    with open(path, "rb") as fh:
        return load_ppm(fh.read())


def write_ppm(path, image: ImageRGB) -> None:
    with open(path, "wb") as fh:
        fh.write(save_ppm(image))


# ---------------------------------------------------------------------------
# RGBE
# ---------------------------------------------------------------------------


def encode_rgbe(r: float, g: float, b: float) -> bytes:
    """Shared-exponent encoding of one linear RGB triple."""
    rgb = (float(r), float(g), float(b))
    for c in rgb:
        if not math.isfinite(c) or c < 0:
            raise DomainError(f"RGBE components must be finite and >= 0, got {c}")
    out = encode_rgbe_array(np.array(rgb).reshape(1, 3))
    return out.tobytes()


def encode_rgbe_array(rgb: np.ndarray) -> np.ndarray:
    """Vectorised RGBE encoding of an ``(..., 3)`` array into ``(..., 4)`` uint8.

    Mantissas are rounded to nearest so the decoded error is at most half a
    mantissa step, i.e. 1/256 of the pixel's largest component.
    """
    rgb = np.asarray(rgb, dtype=np.float64)
    if not np.all(np.isfinite(rgb)) or np.any(rgb < 0):
        raise DomainError("RGBE components must be finite and >= 0")
    out = np.zeros(rgb.shape[:-1] + (4,), dtype=np.uint8)
    peak = rgb.max(axis=-1)
    live = peak >= RGBE_MIN
    if not np.any(live):
        return out
    _, exp = np.frexp(peak[live])
    vals = rgb[live]
    scale = np.ldexp(256.0, -exp)[:, None]
    mant = np.floor(vals * scale + 0.5)
    # rounding the largest component up to 256 needs the next exponent
    carry = mant.max(axis=-1) >= 256
    if np.any(carry):
        exp = exp + carry
        scale = np.ldexp(256.0, -exp)[:, None]
        mant = np.floor(vals * scale + 0.5)
    if np.any(exp + 128 > 255):
        raise DomainError("value too large for RGBE")
    packed = np.empty(vals.shape[:-1] + (4,), dtype=np.uint8)
    packed[:, :3] = np.clip(mant, 0, 255)
    packed[:, 3] = np.clip(exp + 128, 0, 255)
    # exponents below the representable range underflow to black
    packed[exp + 128 < 1] = 0
    out[live] = packed
    return out


def decode_rgbe(data: bytes) -> tuple[float, float, float]:
    """Decode 4 RGBE bytes. Total: every 4-byte input maps to a triple."""
    quad = np.frombuffer(bytes(data), dtype=np.uint8)
    if quad.size != 4:
        raise DomainError(f"decode_rgbe takes exactly 4 bytes, got {quad.size}")
    r, g, b = decode_rgbe_array(quad.reshape(1, 4))[0]
    return float(r), float(g), float(b)


def decode_rgbe_array(rgbe: np.ndarray) -> np.ndarray:
    rgbe = np.asarray(rgbe, dtype=np.uint8)
    exp = rgbe[..., 3].astype(np.int64)
    factor = np.where(exp == 0, 0.0, np.ldexp(1.0, exp - 136))
    return rgbe[..., :3].astype(np.float64) * factor[..., None]


# ---------------------------------------------------------------------------
# Radiance .hdr
# ---------------------------------------------------------------------------

_RESOLUTION = re.compile(rb"^-Y (\d+) \+X (\d+)$")


def write_hdr(image: ImageRGB) -> bytes:
    """Serialise a radiance map with flat (non-RLE) scanlines."""
    if image.value_range != LINEAR:
        raise RangeError("write_hdr needs a linear-range image")
    header = (
        b"#?RADIANCE\nFORMAT=32-bit_rle_rgbe\n\n"
        + f"-Y {image.height} +X {image.width}\n".encode("ascii")
    )
    return header + encode_rgbe_array(image.data).tobytes()


def _read_line(data: bytes, pos: int) -> tuple[bytes, int]:
    end = data.find(b"\n", pos)
    if end < 0:
        raise ParseError("unterminated header line", pos)
    return data[pos:end], end + 1


def _decode_rle_scanline(data: bytes, pos: int, width: int) -> tuple[np.ndarray, int]:
    line = np.empty((width, 4), dtype=np.uint8)
    for ch in range(4):
        x = 0
        while x < width:
            if pos >= len(data):
                raise ParseError("truncated RLE scanline", pos)
            count = data[pos]
            pos += 1
            if count > 128:
                count -= 128
                if x + count > width or pos >= len(data):
                    raise ParseError("bad RLE run", pos - 1)
                line[x : x + count, ch] = data[pos]
                pos += 1
            else:
                if count == 0 or x + count > width or pos + count > len(data):
                    raise ParseError("bad RLE literal", pos - 1)
                line[x : x + count, ch] = np.frombuffer(data, np.uint8, count, pos)
                pos += count
            x += count
    return line, pos


def read_hdr(data: bytes) -> ImageRGB:
    """Parse a Radiance .hdr file with flat or new-style RLE scanlines."""
    data = bytes(data)
    line, pos = _read_line(data, 0)
    if line.strip() != b"#?RADIANCE":
        raise ParseError("missing '#?RADIANCE' signature", 0)
    fmt = None
    while True:
        start = pos
        line, pos = _read_line(data, pos)
        if not line.strip():
            break
        if line.startswith(b"FORMAT="):
            fmt = line[len(b"FORMAT=") :].strip()
    if fmt is not None and fmt != b"32-bit_rle_rgbe":
        raise ParseError(f"unsupported FORMAT {fmt!r}", start)
    start = pos
    line, pos = _read_line(data, pos)
    m = _RESOLUTION.match(line.strip())
    if not m:
        raise ParseError(f"unsupported resolution line {line!r}", start)
    height, width = int(m.group(1)), int(m.group(2))
    if height < 1 or width < 1:
        raise ParseError("zero image dimension", start)

    pixels = np.empty((height, width, 4), dtype=np.uint8)
    for y in range(height):
        head = data[pos : pos + 4]
        rle = (
            8 <= width < 32768
            and len(head) == 4
            and head[0] == 2
            and head[1] == 2
            and not head[2] & 0x80
        )
        if rle:
            if (head[2] << 8 | head[3]) != width:
                raise ParseError("RLE scanline width does not match resolution", pos)
            pixels[y], pos = _decode_rle_scanline(data, pos + 4, width)
        else:
            need = width * 4
            if pos + need > len(data):
                raise ParseError(
                    f"truncated pixel data: scanline {y} needs {need} bytes", pos
                )
            pixels[y] = np.frombuffer(data, np.uint8, need, pos).reshape(width, 4)
            pos += need
    if pos != len(data):
        raise ParseError("trailing bytes after last scanline; resolution mismatch", pos)
    return ImageRGB(decode_rgbe_array(pixels), LINEAR)


def read_hdr_file(path) -> ImageRGB:
    with open(path, "rb") as fh:
        return read_hdr(fh.read())


def write_hdr_file(path, image: ImageRGB) -> None:
    with open(path, "wb") as fh:
        fh.write(write_hdr(image))
