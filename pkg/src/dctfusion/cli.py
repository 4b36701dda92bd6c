"""Command-line front end.

Binary artifacts go to ``--out`` paths; CSV goes to standard output and
diagnostics to standard error. Exit codes: 0 success, 2 I/O or parse error,
3 image size mismatch, 4 underdetermined estimation.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

from dctfusion import coeff_stats, crf, fusion, metrics, tonemap, transform
from dctfusion.errors import DctFusionError, EstimationError, ParseError, ShapeError
from dctfusion.image import ExposureStack, read_hdr_file, read_ppm, write_hdr_file, write_ppm

EXIT_OK = 0
EXIT_IO = 2
EXIT_SHAPE = 3
EXIT_ESTIMATION = 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_IO):
        super().__init__(message)
        self.code = code


def _load_image(path):
    try:
        return read_ppm(path)
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from None
    except ParseError as exc:
        raise CliError(f"{path}: {exc}") from None


def read_manifest(path) -> ExposureStack:
    """Parse ``<image-path> <exposure-seconds>`` lines; paths are relative to the manifest."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise CliError(f"{path}: {exc.strerror or exc}") from None
    images, times, names = [], [], []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.rsplit(None, 1)
        if len(parts) != 2:
            raise CliError(f"{path}:{lineno}: expected '<image-path> <exposure-time>'")
        try:
            t = float(parts[1])
        except ValueError:
            raise CliError(f"{path}:{lineno}: bad exposure time {parts[1]!r}") from None
        if not (t > 0 and t != float("inf")):
            raise CliError(f"{path}:{lineno}: exposure time must be positive, got {parts[1]}")
        image_path = Path(parts[0])
        if not image_path.is_absolute():
            image_path = path.parent / image_path
        img = _load_image(image_path)
        if images and img.shape != images[0].shape:
            raise CliError(
                f"{image_path}: size {img.width}x{img.height} differs from "
                f"{names[0]} ({images[0].width}x{images[0].height})",
                EXIT_SHAPE,
            )
        images.append(img)
        times.append(t)
        names.append(image_path)
    if not images:
        raise CliError(f"{path}: manifest lists no images")
    return ExposureStack(images, times)


def cmd_fuse(args) -> int:
    stack = read_manifest(args.manifest)
    params = fusion.MertensParams(args.wc, args.ws, args.we, args.levels)
    result = fusion.fuse(stack, args.method, args.block or None, params)
    write_ppm(args.out, result.image)
    if args.plot and args.method == "mertens":
        from dctfusion.plotting import plot_weight_maps

        plot_weight_maps(fusion.mertens_weights(stack, params), args.plot)
    h, w = stack.shape
    print(f"{args.method},{len(stack)},{w}x{h},{result.excursion:.6g}")
    return EXIT_OK


def cmd_response(args) -> int:
    stack = read_manifest(args.manifest)
    if len(stack) < 2:
        raise CliError("at least two exposures are required to recover a response curve",
                       EXIT_ESTIMATION)
    curve = crf.solve_response(stack, args.lam, args.samples)
    Path(args.out).write_text(curve.to_text())
    if args.plot:
        from dctfusion.plotting import plot_response_curve

        plot_response_curve(curve, args.plot)
    return EXIT_OK


def cmd_merge_hdr(args) -> int:
    try:
        curve = crf.ResponseCurve.from_text(Path(args.curve).read_text())
    except OSError as exc:
        raise CliError(f"{args.curve}: {exc.strerror or exc}") from None
    except ParseError as exc:
        raise CliError(f"{args.curve}: {exc}") from None
    stack = read_manifest(args.manifest)
    result = crf.radiance_map(stack, curve)
    write_hdr_file(args.out, result.radiance)
    print(f"fallback_pixels,{result.fallback_count}")
    return EXIT_OK


def cmd_tonemap(args) -> int:
    try:
        radiance = read_hdr_file(args.hdr)
    except OSError as exc:
        raise CliError(f"{args.hdr}: {exc.strerror or exc}") from None
    except ParseError as exc:
        raise CliError(f"{args.hdr}: {exc}") from None
    write_ppm(args.out, tonemap.tonemap_global(radiance, args.key))
    return EXIT_OK


def cmd_metrics(args) -> int:
    a, b = _load_image(args.a), _load_image(args.b)
    if a.shape != b.shape:
        raise CliError(f"{args.b}: size differs from {args.a}", EXIT_SHAPE)
    name = args.name or Path(args.b).stem
    print(metrics.compare(a, b, name, args.peak).csv_row())
    return EXIT_OK


def cmd_stats(args) -> int:
    img = _load_image(args.image)
    band = coeff_stats.Band.parse(args.band)
    grid = transform.block_dct2(fusion.luma(img.data), args.block)
    values = coeff_stats.extract_band(grid, band)
    report = coeff_stats.compare_sample(values, str(band))
    if report.degenerate:
        print(f"warning: degenerate fit for band {band}; sample is constant", file=sys.stderr)
    print(coeff_stats.CSV_HEADER)
    for row in report.csv_rows():
        print(row)
    if args.plot:
        from dctfusion.plotting import plot_coefficient_fit

        plot_coefficient_fit(values, report, args.plot)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dctfusion", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fuse", help="fuse an exposure stack into one PPM")
    p.add_argument("manifest")
    p.add_argument("--method", choices=fusion.METHODS, default="dct")
    p.add_argument("--block", type=int, choices=(0,) + transform.BLOCK_SIZES, default=0,
                   help="DCT tile size; 0 means full frame")
    p.add_argument("--wc", type=float, default=1.0, help="contrast exponent (mertens)")
    p.add_argument("--ws", type=float, default=1.0, help="saturation exponent (mertens)")
    p.add_argument("--we", type=float, default=1.0, help="well-exposedness exponent (mertens)")
    p.add_argument("--levels", type=int, default=None, help="pyramid levels (mertens)")
    p.add_argument("--plot", help="write mertens weight maps to this image file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("response", help="recover the camera response curve")
    p.add_argument("manifest")
    p.add_argument("--lambda", dest="lam", type=float, default=crf.DEFAULT_LAMBDA)
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--plot", help="write a response-curve figure to this file")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_response)

    p = sub.add_parser("merge-hdr", help="assemble a Radiance .hdr from a stack and curve")
    p.add_argument("manifest")
    p.add_argument("--curve", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_merge_hdr)

    p = sub.add_parser("tonemap", help="tone map a .hdr file to PPM")
    p.add_argument("hdr")
    p.add_argument("--key", type=float, default=0.18)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tonemap)

    p = sub.add_parser("metrics", help="PSNR / IMMSE / SSIM between two PPMs")
    p.add_argument("a")
    p.add_argument("b")
    p.add_argument("--peak", type=float, default=1.0)
    p.add_argument("--name", default=None)
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("stats", help="fit block-DCT coefficient distributions")
    p.add_argument("image")
    p.add_argument("--block", type=int, choices=transform.BLOCK_SIZES, default=8)
    p.add_argument("--band", default="allac", help="dc, allac or ac:u,v")
    p.add_argument("--plot", help="write a histogram with fitted densities to this file")
    p.set_defaults(func=cmd_stats)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", crf.MonotonicityWarning)
        try:
            code = args.func(args)
        except CliError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = exc.code
        except EstimationError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = EXIT_ESTIMATION
        except ShapeError as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = EXIT_SHAPE
        except (DctFusionError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            code = EXIT_IO
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
