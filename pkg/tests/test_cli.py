import numpy as np
import pytest

from dctfusion.cli import main
from dctfusion.crf import synthetic_stack
from dctfusion.image import LINEAR, ImageRGB, read_hdr_file, read_ppm, write_hdr_file, write_ppm


def write_stack(tmp_path, stack, name="stack.txt"):
    lines = []
    for i, (img, t) in enumerate(zip(stack.images, stack.exposure_times)):
        write_ppm(tmp_path / f"img{i}.ppm", img)
        lines.append(f"img{i}.ppm {t!r}")
    manifest = tmp_path / name
    manifest.write_text("# exposure stack\n" + "\n".join(lines) + "\n")
    return manifest


@pytest.fixture
def camera_manifest(tmp_path):
    rng = np.random.default_rng(11)
    irradiance = np.exp(rng.uniform(np.log(1e-3), np.log(8.0), (60, 60)))
    return write_stack(tmp_path, synthetic_stack(irradiance, [0.25, 1.0, 4.0]))


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_fuse_dct_matches_mean(tmp_path, camera_manifest, capsys):
    code, out, _ = run(capsys, "fuse", camera_manifest, "--method", "dct", "--out", tmp_path / "d.ppm")
    assert code == 0
    assert out.strip().split(",")[:3] == ["dct", "3", "60x60"]
    assert float(out.strip().split(",")[3]) <= 1e-9
    run(capsys, "fuse", camera_manifest, "--method", "mean", "--out", tmp_path / "m.ppm")
    run(capsys, "fuse", camera_manifest, "--block", "8", "--out", tmp_path / "b.ppm")
    d, m, b = (read_ppm(tmp_path / f"{n}.ppm").data for n in "dmb")
    assert np.max(np.abs(d - m)) <= 1 / 255 + 1e-12
    assert np.max(np.abs(b - m)) <= 1 / 255 + 1e-12


@pytest.mark.parametrize("method", ["dct", "mean", "mertens"])
def test_fuse_single_image_identity(tmp_path, capsys, method):
    img = ImageRGB(np.random.default_rng(0).random((20, 24, 3)))
    write_ppm(tmp_path / "one.ppm", img)
    (tmp_path / "one.txt").write_text("one.ppm 1\n")
    code, _, _ = run(capsys, "fuse", tmp_path / "one.txt", "--method", method, "--out", tmp_path / "o.ppm")
    assert code == 0
    assert (tmp_path / "o.ppm").read_bytes() == (tmp_path / "one.ppm").read_bytes()


def test_fuse_mertens_with_weight_plot(tmp_path, camera_manifest, capsys):
    code, out, _ = run(capsys, "fuse", camera_manifest, "--method", "mertens", "--levels", "3",
                       "--wc", "1", "--ws", "0.5", "--we", "2",
                       "--plot", tmp_path / "w.png", "--out", tmp_path / "f.ppm")
    assert code == 0 and out.startswith("mertens,3,60x60,")
    assert (tmp_path / "w.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_fuse_missing_file(tmp_path, capsys):
    (tmp_path / "m.txt").write_text("nowhere.ppm 1\n")
    code, _, err = run(capsys, "fuse", tmp_path / "m.txt", "--out", tmp_path / "o.ppm")
    assert code == 2 and "nowhere.ppm" in err


def test_fuse_bad_manifest(tmp_path, capsys):
    (tmp_path / "m.txt").write_text("x.ppm fast\n")
    assert run(capsys, "fuse", tmp_path / "m.txt", "--out", tmp_path / "o.ppm")[0] == 2
    (tmp_path / "e.txt").write_text("\n# nothing\n")
    assert run(capsys, "fuse", tmp_path / "e.txt", "--out", tmp_path / "o.ppm")[0] == 2
    assert run(capsys, "fuse", tmp_path / "absent.txt", "--out", tmp_path / "o.ppm")[0] == 2


def test_fuse_corrupt_ppm(tmp_path, capsys):
    (tmp_path / "bad.ppm").write_bytes(b"P5 1 1 255\n\x00")
    (tmp_path / "m.txt").write_text("bad.ppm 1\n")
    code, _, err = run(capsys, "fuse", tmp_path / "m.txt", "--out", tmp_path / "o.ppm")
    assert code == 2 and "bad.ppm" in err and "offset" in err


def test_fuse_dimension_mismatch(tmp_path, capsys):
    write_ppm(tmp_path / "a.ppm", ImageRGB(np.zeros((4, 4, 3))))
    write_ppm(tmp_path / "b.ppm", ImageRGB(np.zeros((4, 5, 3))))
    (tmp_path / "m.txt").write_text("a.ppm 1\nb.ppm 2\n")
    code, _, err = run(capsys, "fuse", tmp_path / "m.txt", "--out", tmp_path / "o.ppm")
    assert code == 3 and "b.ppm" in err


def test_response_linear_camera(tmp_path, camera_manifest, capsys):
    code, _, _ = run(capsys, "response", camera_manifest, "--out", tmp_path / "c.txt",
                     "--plot", tmp_path / "c.png")
    assert code == 0
    rows = np.loadtxt(tmp_path / "c.txt")
    assert rows.shape == (256, 4)
    assert np.array_equal(rows[:, 0], np.arange(256))
    z = np.arange(20, 236)
    assert np.max(np.abs(rows[z, 1:] - np.log(z / 128)[:, None])) <= 0.05
    assert (tmp_path / "c.png").stat().st_size > 0


def test_response_single_exposure(tmp_path, capsys):
    write_ppm(tmp_path / "a.ppm", ImageRGB(np.full((4, 4, 3), 0.5)))
    (tmp_path / "m.txt").write_text("a.ppm 1\n")
    assert run(capsys, "response", tmp_path / "m.txt", "--out", tmp_path / "c.txt")[0] == 4


def test_response_zero_lambda(tmp_path, camera_manifest, capsys):
    code, _, err = run(capsys, "response", camera_manifest, "--lambda", "0", "--out", tmp_path / "c.txt")
    assert code == 0
    assert err == "" or "monotone" in err


def test_merge_hdr_identity_curve(tmp_path, capsys):
    from dctfusion.crf import ResponseCurve

    codes = np.arange(1, 255, dtype=float).reshape(2, 127)
    img = ImageRGB(np.repeat(codes[:, :, None], 3, axis=2) / 255)
    write_ppm(tmp_path / "a.ppm", img)
    (tmp_path / "m.txt").write_text("a.ppm 1.0\n")
    (tmp_path / "c.txt").write_text(ResponseCurve.linear().to_text())
    code, out, _ = run(capsys, "merge-hdr", tmp_path / "m.txt", "--curve", tmp_path / "c.txt",
                       "--out", tmp_path / "s.hdr")
    assert code == 0 and out.strip() == "fallback_pixels,0"
    hdr = read_hdr_file(tmp_path / "s.hdr").data[..., 0]
    expected = codes / 128
    assert np.all(np.abs(hdr - expected) <= expected / 256)


def test_merge_hdr_consistent_pair(tmp_path, capsys):
    from dctfusion.crf import ResponseCurve

    rng = np.random.default_rng(2)
    pair = synthetic_stack(rng.uniform(0.1, 0.49, (16, 16)), [1.0, 2.0])
    manifest = write_stack(tmp_path, pair)
    (tmp_path / "c.txt").write_text(ResponseCurve.linear().to_text())
    (tmp_path / "one.txt").write_text("img0.ppm 1.0\n")
    run(capsys, "merge-hdr", manifest, "--curve", tmp_path / "c.txt", "--out", tmp_path / "both.hdr")
    run(capsys, "merge-hdr", tmp_path / "one.txt", "--curve", tmp_path / "c.txt", "--out", tmp_path / "one.hdr")
    both = read_hdr_file(tmp_path / "both.hdr").data
    one = read_hdr_file(tmp_path / "one.hdr").data
    assert np.max(np.abs(both - one) / one) <= 0.02


def test_merge_hdr_missing_curve(tmp_path, camera_manifest, capsys):
    code, _, err = run(capsys, "merge-hdr", camera_manifest, "--curve", tmp_path / "none.txt",
                       "--out", tmp_path / "s.hdr")
    assert code == 2 and "none.txt" in err
    (tmp_path / "bad.txt").write_text("0 1 2\n")
    assert run(capsys, "merge-hdr", camera_manifest, "--curve", tmp_path / "bad.txt",
               "--out", tmp_path / "s.hdr")[0] == 2


def test_tonemap_black(tmp_path, capsys):
    write_hdr_file(tmp_path / "k.hdr", ImageRGB(np.zeros((3, 5, 3)), LINEAR))
    assert run(capsys, "tonemap", tmp_path / "k.hdr", "--out", tmp_path / "k.ppm")[0] == 0
    assert (tmp_path / "k.ppm").read_bytes() == b"P6 5 3 255\n" + bytes(45)


def test_tonemap_bad_file(tmp_path, capsys):
    (tmp_path / "x.hdr").write_bytes(b"not an hdr\n")
    assert run(capsys, "tonemap", tmp_path / "x.hdr", "--out", tmp_path / "k.ppm")[0] == 2


def test_metrics_identical(tmp_path, capsys):
    write_ppm(tmp_path / "a.ppm", ImageRGB(np.random.default_rng(1).random((16, 16, 3))))
    code, out, _ = run(capsys, "metrics", tmp_path / "a.ppm", tmp_path / "a.ppm")
    assert code == 0
    name, p, mse, s = out.strip().split(",")
    assert (name, p, float(mse), float(s)) == ("a", "inf", 0.0, 1.0)


def test_metrics_mismatch(tmp_path, capsys):
    write_ppm(tmp_path / "a.ppm", ImageRGB(np.zeros((16, 16, 3))))
    write_ppm(tmp_path / "b.ppm", ImageRGB(np.zeros((16, 17, 3))))
    assert run(capsys, "metrics", tmp_path / "a.ppm", tmp_path / "b.ppm")[0] == 3


def test_metrics_byte_peak(tmp_path, capsys):
    write_ppm(tmp_path / "a.ppm", ImageRGB(np.zeros((16, 16, 3))))
    write_ppm(tmp_path / "b.ppm", ImageRGB(np.full((16, 16, 3), 0.5)))
    _, out, _ = run(capsys, "metrics", tmp_path / "a.ppm", tmp_path / "b.ppm", "--peak", "255",
                    "--name", "half")
    name, p, mse, _ = out.strip().split(",")
    # 0.5 is stored as code 128
    assert name == "half" and float(mse) == 128.0**2
    assert float(p) == pytest.approx(10 * np.log10(255**2 / 128**2), abs=1e-6)


def test_stats_constant_image(tmp_path, capsys):
    write_ppm(tmp_path / "c.ppm", ImageRGB(np.full((16, 16, 3), 0.5)))
    code, out, err = run(capsys, "stats", tmp_path / "c.ppm", "--block", "8", "--band", "allac")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "band,family,location,scale,ks_d,winner"
    assert len(lines) == 3
    assert all(float(line.split(",")[3]) == 0 for line in lines[1:])
    assert "degenerate" in err


def test_stats_plot(tmp_path, capsys):
    write_ppm(tmp_path / "n.ppm", ImageRGB(np.random.default_rng(4).random((32, 32, 3))))
    code, out, _ = run(capsys, "stats", tmp_path / "n.ppm", "--band", "ac:0,1", "--plot", tmp_path / "h.png")
    assert code == 0 and out.splitlines()[1].startswith("ac(0;1),laplacian,")
    assert (tmp_path / "h.png").stat().st_size > 0


def test_stats_bad_band(tmp_path, capsys):
    write_ppm(tmp_path / "n.ppm", ImageRGB(np.zeros((8, 8, 3))))
    assert run(capsys, "stats", tmp_path / "n.ppm", "--band", "ac:0,0")[0] == 2


def test_argparse_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["fuse"])
    assert info.value.code == 2
