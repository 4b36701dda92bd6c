import numpy as np
import pytest

from dctfusion.image import ExposureStack, ImageRGB


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_image(rng, h, w):
    return ImageRGB(rng.random((h, w, 3)))


def random_stack(rng, k, h, w):
    return ExposureStack([random_image(rng, h, w) for _ in range(k)], [2.0**i for i in range(k)])


def natural_images():
    """Bundled natural photographs from scikit-image, as unit-range RGB arrays."""
    skdata = pytest.importorskip("skimage.data")
    out = {}
    for name in ("astronaut", "coffee", "chelsea"):
        out[name] = getattr(skdata, name)().astype(np.float64) / 255.0
    cam = skdata.camera().astype(np.float64) / 255.0
    out["camera"] = np.repeat(cam[:, :, None], 3, axis=2)
    return out


ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py::" in report.nodeid:
        ACCEPTANCE_RESULTS[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    from test_acceptance import CRITERIA, TIMINGS

    terminalreporter.section("acceptance criteria")
    for name, title in CRITERIA.items():
        outcome = ACCEPTANCE_RESULTS.get(name)
        if outcome is None:
            continue
        status = "PASS" if outcome == "passed" else "FAIL"
        took = TIMINGS.get(name)
        timing = f" ({took:.2f}s)" if took is not None else ""
        terminalreporter.write_line(f"{status}  {title}{timing}")
