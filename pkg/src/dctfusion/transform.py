"""Orthonormal 2-D DCT (type II forward, type III inverse).

Two layouts are supported: full-frame, where each image axis is transformed
with a single basis, and fixed-size blocks, where the plane is edge-padded to
a multiple of the block size and every tile is transformed independently.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.fft

from dctfusion.errors import DomainError, ShapeError
from dctfusion.image import as_plane

BLOCK_SIZES = (4, 8, 16)

# Below this length the literal matrix product is used; above it, scipy's FFT-based DCT.
FAST_PATH_MIN = 16


@lru_cache(maxsize=64)
def _basis(n: int) -> np.ndarray:
    k = np.arange(n, dtype=np.float64)[:, None]
    j = np.arange(n, dtype=np.float64)[None, :]
    v = np.sqrt(2.0) / np.sqrt(n) * np.cos(np.pi * (2.0 * j + 1.0) * k / (2.0 * n))
    v[0, :] = 1.0 / np.sqrt(n)
    v.setflags(write=False)
    return v


def dct_matrix(n: int) -> np.ndarray:
    """The n x n orthonormal DCT-II basis; row k holds the k-th cosine.

    >>> dct_matrix(1)
    array([[1.]])
    """
    n = int(n)
    if n < 1:
        raise DomainError(f"DCT length must be >= 1, got {n}")
    return _basis(n).copy()


@dataclass(frozen=True, eq=False)
class CoeffGrid:
    """Transform-domain representation of one plane.

    ``coefficients`` has the padded shape for block layouts; ``height`` and
    ``width`` always refer to the source plane. ``block`` is ``None`` for the
    full-frame layout.
    """

    coefficients: np.ndarray
    height: int
    width: int
    block: int | None = None

    @property
    def is_block(self) -> bool:
        return self.block is not None

    def tiles(self) -> np.ndarray:
        """View the block layout as ``(tiles_y, tiles_x, b, b)``."""
        if self.block is None:
            raise DomainError("full-frame grid has no tiles")
        b = self.block
        ty, tx = self.coefficients.shape[0] // b, self.coefficients.shape[1] // b
        return self.coefficients.reshape(ty, b, tx, b).swapaxes(1, 2)

    def with_coefficients(self, coefficients: np.ndarray) -> "CoeffGrid":
        coefficients = np.asarray(coefficients, dtype=np.float64)
        if coefficients.shape != self.coefficients.shape:
            raise ShapeError("replacement coefficients differ in shape")
        return CoeffGrid(coefficients, self.height, self.width, self.block)


def _transform_axis(x: np.ndarray, axis: int, inverse: bool) -> np.ndarray:
    n = x.shape[axis]
    if n >= FAST_PATH_MIN:
        if inverse:
            return scipy.fft.idct(x, type=2, norm="ortho", axis=axis)
        return scipy.fft.dct(x, type=2, norm="ortho", axis=axis)
    v = _basis(n)
    m = v.T if inverse else v
    return np.moveaxis(np.tensordot(m, np.moveaxis(x, axis, 0), axes=(1, 0)), 0, axis)


def dct2_matrix(plane) -> np.ndarray:
    """Literal separable product ``V_h @ X @ V_w.T`` with no fast path."""
    x = as_plane(plane)
    return _basis(x.shape[0]) @ x @ _basis(x.shape[1]).T


def idct2_matrix(coefficients) -> np.ndarray:
    c = as_plane(coefficients)
    return _basis(c.shape[0]).T @ c @ _basis(c.shape[1])


def dct2(plane) -> CoeffGrid:
    """Full-frame forward DCT of a plane."""
    x = as_plane(plane)
    c = _transform_axis(_transform_axis(x, 0, False), 1, False)
    return CoeffGrid(c, x.shape[0], x.shape[1], None)


def idct2(grid: CoeffGrid) -> np.ndarray:
    """Inverse of :func:`dct2`."""
    if grid.block is not None:
        raise DomainError("idct2 expects a full-frame grid; use block_idct2")
    c = as_plane(grid.coefficients)
    return _transform_axis(_transform_axis(c, 0, True), 1, True)


def _check_block(b: int) -> int:
    if b not in BLOCK_SIZES:
        raise DomainError(f"block size must be one of {BLOCK_SIZES}, got {b}")
    return b


def pad_to_block(plane: np.ndarray, b: int) -> np.ndarray:
    h, w = plane.shape
    return np.pad(plane, ((0, (-h) % b), (0, (-w) % b)), mode="edge")


def block_dct2(plane, b: int = 8) -> CoeffGrid:
    """Tile-wise DCT over ``b x b`` blocks of an edge-padded plane."""
    b = _check_block(b)
    x = as_plane(plane)
    padded = pad_to_block(x, b)
    ty, tx = padded.shape[0] // b, padded.shape[1] // b
    tiles = padded.reshape(ty, b, tx, b).swapaxes(1, 2)
    v = _basis(b)
    coeffs = np.einsum("ki,yxij,lj->yxkl", v, tiles, v, optimize=True)
    return CoeffGrid(
        np.ascontiguousarray(coeffs.swapaxes(1, 2).reshape(padded.shape)),
        x.shape[0],
        x.shape[1],
        b,
    )


def block_idct2(grid: CoeffGrid) -> np.ndarray:
    """Inverse of :func:`block_dct2`, cropped back to the source size."""
    if grid.block is None:
        raise DomainError("block_idct2 expects a block grid; use idct2")
    b = _check_block(grid.block)
    tiles = grid.tiles()
    v = _basis(b)
    pixels = np.einsum("ik,yxkl,lj->yxij", v.T, tiles, v, optimize=True)
    full = pixels.swapaxes(1, 2).reshape(grid.coefficients.shape)
    return np.ascontiguousarray(full[: grid.height, : grid.width])


def forward(plane, block: int | None = None) -> CoeffGrid:
    """Dispatch to the full-frame (``block`` None or 0) or block transform."""
    if not block:
        return dct2(plane)
    return block_dct2(plane, block)


def inverse(grid: CoeffGrid) -> np.ndarray:
    if grid.block is None:
        return idct2(grid)
    return block_idct2(grid)
