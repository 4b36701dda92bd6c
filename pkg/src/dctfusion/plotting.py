"""Figures written next to the CSV reports. Uses the non-interactive Agg backend."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

CHANNEL_COLORS = ("tab:red", "tab:green", "tab:blue")


def _save(fig, path):
    # fixed metadata keeps PNG output reproducible between runs
    fig.savefig(path, dpi=100, metadata={"Software": None})
    plt.close(fig)


def plot_response_curve(curve, path, title="Recovered response"):
    """Pixel code against log exposure, one line per channel."""
    z = np.arange(curve.h.shape[0])
    fig, ax = plt.subplots(figsize=(5, 4))
    for ch, color in enumerate(CHANNEL_COLORS):
        finite = np.isfinite(curve.h[:, ch])
        ax.plot(curve.h[finite, ch], z[finite], color=color, lw=1.2, label="RGB"[ch])
    ax.set_xlabel("log exposure h(z)")
    ax.set_ylabel("pixel value z")
    ax.set_ylim(0, 255)
    ax.set_title(title)
    ax.legend(frameon=False)
    ax.grid(alpha=0.3)
    fig.tight_layout()
    _save(fig, path)


def plot_coefficient_fit(values, comparison, path, bins=201):
    """Histogram of a coefficient band with both fitted densities, log scale."""
    values = np.asarray(values, dtype=np.float64)
    fig, ax = plt.subplots(figsize=(5, 4))
    spread = np.percentile(np.abs(values - np.median(values)), 99.5) or 1.0
    lo, hi = np.median(values) - spread, np.median(values) + spread
    ax.hist(values, bins=bins, range=(lo, hi), density=True, color="0.7", label="coefficients")
    x = np.linspace(lo, hi, 400)
    for fit, d, style in (
        (comparison.laplacian, comparison.laplacian_d, "-"),
        (comparison.gaussian, comparison.gaussian_d, "--"),
    ):
        if fit.degenerate:
            continue
        pdf = np.gradient(fit.cdf(x), x)
        ax.plot(x, pdf, style, lw=1.4, label=f"{fit.family} (D={d:.3f})")
    ax.set_yscale("log")
    ax.set_xlabel("coefficient value")
    ax.set_ylabel("density")
    ax.set_title(f"band {comparison.band}: {comparison.winner} fits best")
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_weight_maps(weights, path):
    """Normalised per-exposure weight maps side by side."""
    k = len(weights)
    fig, axes = plt.subplots(1, k, figsize=(2.5 * k, 2.5), squeeze=False)
    for i, (ax, w) in enumerate(zip(axes[0], weights)):
        ax.imshow(w, cmap="gray", vmin=0, vmax=1)
        ax.set_title(f"exposure {i}")
        ax.set_axis_off()
    fig.tight_layout()
    _save(fig, path)
