"""Multi-exposure fusion in the DCT domain, with HDR merge, metrics and coefficient statistics."""

from dctfusion.crf import ResponseCurve, radiance_map, solve_response
from dctfusion.errors import (
    DctFusionError,
    DomainError,
    EstimationError,
    ParseError,
    RangeError,
    ShapeError,
)
from dctfusion.fusion import MertensParams, fuse, fuse_dct, fuse_mertens, fuse_spatial_mean
from dctfusion.image import ExposureStack, ImageRGB, RadianceMap
from dctfusion.metrics import immse, psnr, ssim
from dctfusion.tonemap import tonemap_global
from dctfusion.transform import CoeffGrid, block_dct2, block_idct2, dct2, dct_matrix, idct2

__version__ = "0.1.0"
