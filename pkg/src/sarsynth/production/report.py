"""Dataset metrics: coverage, gaps, per-chip statistics and cross-paradigm similarity."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import product
from pathlib import Path

import numpy as np

from ..imaging.chipio import read_chip
from ..imaging.sensor import RadarChip
from .manifest import DatasetManifest, load_manifest


def _mag(chip) -> np.ndarray:
    return np.abs(chip.data if isinstance(chip, RadarChip) else np.asarray(chip))


def compare_paradigms(chip_a, chip_b) -> dict:
    """Peak-aligned NCC of magnitudes and per-quadrant mean power delta (dB, a over b).

    ``b`` is cyclically shifted so its peak sits on the peak of ``a``. The
    NCC is the Pearson coefficient of the two magnitude grids; when either
    grid is constant (e.g. all zero) it is 0 and ``degenerate`` is set.
    """
    a, b = _mag(chip_a), _mag(chip_b)
    if a.shape != b.shape:
        raise ValueError(f"chip dimensions differ: {a.shape} vs {b.shape}")
    pa = np.unravel_index(np.argmax(a), a.shape)
    pb = np.unravel_index(np.argmax(b), b.shape)
    shift = (int(pa[0] - pb[0]), int(pa[1] - pb[1]))
    b = np.roll(b, shift, axis=(0, 1))
    da, db = a - a.mean(), b - b.mean()
    na, nb = float(np.sum(da * da)), float(np.sum(db * db))
    degenerate = na == 0.0 or nb == 0.0
    ncc = 0.0 if degenerate else float(np.clip(np.sum(da * db) / np.sqrt(na * nb), -1.0, 1.0))
    h, w = a.shape[0] // 2, a.shape[1] // 2
    quads = {}
    for name, (rs, cs) in {"near_left": (slice(0, h), slice(0, w)), "near_right": (slice(0, h), slice(w, None)),
                           "far_left": (slice(h, None), slice(0, w)), "far_right": (slice(h, None), slice(w, None))}.items():
        pa_, pb_ = float(np.mean(a[rs, cs] ** 2)), float(np.mean(b[rs, cs] ** 2))
        quads[name] = None if pa_ == 0.0 or pb_ == 0.0 else 10.0 * np.log10(pa_ / pb_)
    return {"ncc": ncc, "degenerate": degenerate, "shift": list(shift), "quadrant_delta_db": quads}


def chip_statistics(chip) -> dict:
    """Peak power and clutter floor (median pixel power), both in dB."""
    p = _mag(chip) ** 2
    peak, floor = float(p.max()), float(np.median(p))
    db = lambda x: None if x <= 0 else 10.0 * np.log10(x)  # noqa: E731
    return {"peak_db": db(peak), "floor_db": db(floor)}


@dataclass
class MetricsReport:
    coverage: dict[tuple, int] = field(default_factory=dict)
    gaps: list[tuple] = field(default_factory=list)
    missing_files: list[str] = field(default_factory=list)
    chips: list[dict] = field(default_factory=list)
    similarity: list[dict] = field(default_factory=list)
    errors: int = 0

    @property
    def total(self) -> int:
        return sum(self.coverage.values())

    def write(self, out_dir) -> dict[str, Path]:
        """CSV tables (and figures when matplotlib is importable) under ``out_dir``."""
        from .. import plots

        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        files = {}

        def table(name, header, rows):
            path = out / name
            with open(path, "w", newline="", encoding="utf-8") as fh:
                w = csv.writer(fh)
                w.writerow(header)
                w.writerows(rows)
            files[name] = path

        table("coverage.csv", ["label", "depression", "paradigm", "count"],
              [(*k, v) for k, v in sorted(self.coverage.items())])
        table("gaps.csv", ["label", "azimuth", "depression", "paradigm"], sorted(self.gaps))
        table("missing.csv", ["path"], [(p,) for p in self.missing_files])
        table("chips.csv", ["path", "label", "azimuth", "depression", "paradigm", "peak_db", "floor_db"],
              [(c["path"], c["label"], c["azimuth"], c["depression"], c["paradigm"], c["peak_db"], c["floor_db"])
               for c in self.chips])
        quad = ["near_left", "near_right", "far_left", "far_right"]
        table("similarity.csv", ["label", "azimuth", "depression", "variant", "ncc", "degenerate"] + quad,
              [(s["label"], s["azimuth"], s["depression"], s["variant"], s["ncc"], s["degenerate"],
                *[s["quadrant_delta_db"][q] for q in quad]) for s in self.similarity])
        files.update(plots.report_figures(self, out))
        return files


def summarize(manifest, expected: dict | None = None, with_stats: bool = True) -> MetricsReport:
    """Coverage table, explicit gaps and per-chip statistics of a manifest.

    ``expected`` may fix the grid with keys ``labels``, ``azimuths``,
    ``depressions`` and ``paradigms``; otherwise the grid is the product of
    the values seen in the manifest. A cell is a gap when no readable chip
    covers it. Missing files are listed, never fatal.
    """
    m = manifest if isinstance(manifest, DatasetManifest) else load_manifest(manifest)
    rep = MetricsReport(errors=len(m.errors))
    chips = m.chips
    missing = {r["path"] for r in m.missing()}
    rep.missing_files = sorted(missing)
    for r in chips:
        key = (r["label"], r["depression"], r["paradigm"])
        rep.coverage[key] = rep.coverage.get(key, 0) + 1
    exp = expected or {}
    labels = exp.get("labels") or sorted({r["label"] for r in chips} | {r["label"] for r in m.errors})
    azimuths = exp.get("azimuths") or sorted({r["azimuth"] for r in chips} | {r["azimuth"] for r in m.errors})
    deps = exp.get("depressions") or sorted({r["depression"] for r in chips} | {r["depression"] for r in m.errors})
    pars = exp.get("paradigms") or sorted({r["paradigm"] for r in chips} | {r["paradigm"] for r in m.errors})
    present = {(r["label"], r["azimuth"], r["depression"], r["paradigm"]) for r in chips if r["path"] not in missing}
    rep.gaps = [cell for cell in product(labels, azimuths, deps, pars) if cell not in present]
    if with_stats:
        by_cell: dict[tuple, dict] = {}
        for r in chips:
            if r["path"] in missing:
                continue
            chip = read_chip(m.chip_path(r))
            rep.chips.append({**{k: r[k] for k in ("path", "label", "azimuth", "depression", "paradigm")},
                              **chip_statistics(chip)})
            by_cell.setdefault((r["label"], r["azimuth"], r["depression"], r.get("variant", 0)), {})[r["paradigm"]] = chip
        for (lab, az, dep, var), d in sorted(by_cell.items()):
            if "centers" in d and "sbr" in d:
                rep.similarity.append({"label": lab, "azimuth": az, "depression": dep, "variant": var,
                                       **compare_paradigms(d["centers"], d["sbr"])})
    return rep
