"""Report figures, rendered off-screen to PNG files."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def rcs_figure(azimuths, curves: dict, path, title: str = "") -> Path:
    """RCS (dBsm) against azimuth, one line per entry of ``curves``."""
    fig, ax = plt.subplots(figsize=(7, 4))
    for name, rcs in curves.items():
        with np.errstate(divide="ignore"):
            ax.plot(azimuths, 10 * np.log10(np.asarray(rcs)), label=name)
    ax.set_xlabel("azimuth (deg)")
    ax.set_ylabel("RCS (dBsm)")
    ax.grid(True, alpha=0.3)
    if title:
        ax.set_title(title)
    if len(curves) > 1:
        ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return Path(path)


def report_figures(report, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    files = {}
    if report.coverage:
        keys = sorted(report.coverage)
        fig, ax = plt.subplots(figsize=(7, 0.4 * len(keys) + 1.5))
        ax.barh([f"{lab} / {dep:g} / {par}" for lab, dep, par in keys], [report.coverage[k] for k in keys])
        ax.set_xlabel("chips")
        ax.set_title(f"coverage ({len(report.gaps)} gaps)")
        fig.tight_layout()
        files["coverage.png"] = out / "coverage.png"
        fig.savefig(files["coverage.png"], dpi=100)
        plt.close(fig)
    peaks = [c["peak_db"] for c in report.chips if c["peak_db"] is not None]
    floors = [c["floor_db"] for c in report.chips if c["floor_db"] is not None]
    if peaks:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.hist(peaks, bins=30, alpha=0.7, label="peak")
        ax.hist(floors, bins=30, alpha=0.7, label="clutter floor")
        ax.set_xlabel("power (dB)")
        ax.legend()
        fig.tight_layout()
        files["chip_levels.png"] = out / "chip_levels.png"
        fig.savefig(files["chip_levels.png"], dpi=100)
        plt.close(fig)
    if report.similarity:
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot([s["azimuth"] for s in report.similarity], [s["ncc"] for s in report.similarity], "o")
        ax.set_xlabel("azimuth (deg)")
        ax.set_ylabel("NCC centers vs sbr")
        ax.set_ylim(-1, 1)
        fig.tight_layout()
        files["similarity.png"] = out / "similarity.png"
        fig.savefig(files["similarity.png"], dpi=100)
        plt.close(fig)
    return files


def compare_figure(chip_a, chip_b, result: dict, path, dynamic_range: float = 50.0) -> Path:
    from .imaging.preview import to_preview

    fig, axes = plt.subplots(1, 2, figsize=(8, 4))
    for ax, chip, name in zip(axes, (chip_a, chip_b), ("a", "b")):
        ax.imshow(to_preview(chip, dynamic_range), cmap="gray", origin="lower")
        ax.set_title(name)
        ax.set_xticks([])
        ax.set_yticks([])
    fig.suptitle(f"NCC {result['ncc']:.3f}")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)
    return Path(path)
