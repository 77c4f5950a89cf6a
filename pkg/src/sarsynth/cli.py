"""Command-line interface: ``sarsynth plan | produce | combine | compare | summarize | preview | rcs``."""
from __future__ import annotations

import csv
import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from .production import (
    ConfigError,
    ProductionError,
    combine_datasets,
    compare_paradigms,
    load_config,
    load_manifest,
    plan_production,
    run_production,
    summarize,
)

PARADIGM = click.option("--paradigm", type=click.Choice(["centers", "sbr", "both"]), default=None,
                        help="Override the paradigm given in the config.")


def _config(path, paradigm):
    try:
        cfg = load_config(path)
        if paradigm:
            cfg.paradigm = paradigm
            cfg.__post_init__()
        return cfg
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)


@click.group()
@click.option("-v", "--verbose", count=True, help="Repeat for more logging.")
def main(verbose):
    """Synthetic SAR target-signature and dataset tool."""
    level = logging.WARNING - 10 * min(verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")


@main.command()
@click.argument("config", type=click.Path(dir_okay=False))
@PARADIGM
def plan(config, paradigm):
    """Print the job count of a production config."""
    cfg = _config(config, paradigm)
    try:
        jobs = plan_production(cfg)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    per = {}
    for j in jobs:
        per[j.paradigm] = per.get(j.paradigm, 0) + 1
    click.echo(f"{len(jobs)} jobs")
    for k in sorted(per):
        click.echo(f"  {k}: {per[k]}")


@main.command()
@click.argument("config", type=click.Path(dir_okay=False))
@PARADIGM
@click.option("--workers", type=int, default=None, help="Worker processes (SARSYNTH_WORKERS overrides the config).")
@click.option("--policy", type=click.Choice(["continue", "fail-fast"]), default=None, help="Per-job error policy.")
@click.option("--no-resume", is_flag=True, help="Recompute chips that already exist.")
def produce(config, paradigm, workers, policy, no_resume):
    """Run a production and write chips plus manifest."""
    cfg = _config(config, paradigm)
    try:
        res = run_production(cfg, workers=workers, resume=not no_resume, error_policy=policy)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(1)
    except ProductionError as exc:
        click.echo(f"aborted: {exc}", err=True)
        sys.exit(2)
    click.echo(f"{res.planned} planned, {res.executed} produced, {res.skipped} reused, {len(res.errors)} failed")
    click.echo(f"manifest: {res.manifest_path}")
    sys.exit(res.exit_code)


@main.command()
@click.argument("output", type=click.Path(dir_okay=False))
@click.argument("manifests", nargs=-1, required=True, type=click.Path(exists=True))
def combine(output, manifests):
    """Merge manifests into OUTPUT (paths rebased onto its directory)."""
    out = Path(output).resolve()
    try:
        merged = combine_datasets(list(manifests), root=out.parent)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    merged.save(out)
    click.echo(f"{len(merged)} records, paradigms: {', '.join(merged.paradigms) or '-'}")


@main.command()
@click.argument("chip_a", type=click.Path())
@click.argument("chip_b", type=click.Path())
@click.option("--out", type=click.Path(), default=None, help="CSV file for the similarity record (figure alongside).")
def compare(chip_a, chip_b, out):
    """Peak-aligned NCC and quadrant power deltas between two chips."""
    from .imaging.chipio import read_chip

    a, b = read_chip(chip_a), read_chip(chip_b)
    try:
        res = compare_paradigms(a, b)
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(res, indent=2))
    if out:
        from .plots import compare_figure

        q = res["quadrant_delta_db"]
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["chip_a", "chip_b", "ncc", "degenerate", *q])
            w.writerow([chip_a, chip_b, res["ncc"], res["degenerate"], *q.values()])
        compare_figure(a, b, res, Path(out).with_suffix(".png"))


@main.command("summarize")
@click.argument("manifest", type=click.Path(exists=True))
@click.option("--out", type=click.Path(file_okay=False), default="report", help="Directory for CSV tables and figures.")
@click.option("--config", "config", type=click.Path(dir_okay=False), default=None,
              help="Production config fixing the expected coverage grid.")
def summarize_cmd(manifest, out, config):
    """Coverage, gaps, chip statistics and cross-paradigm similarity."""
    expected = None
    if config:
        cfg = _config(config, None)
        expected = {"labels": [t.label for t in cfg.targets], "azimuths": cfg.azimuth.values(),
                    "depressions": cfg.depressions, "paradigms": list(cfg.paradigms)}
    rep = summarize(load_manifest(manifest), expected)
    rep.write(out)
    click.echo(f"{rep.total} chips, {len(rep.gaps)} gaps, {len(rep.missing_files)} missing files, {rep.errors} errors")
    for g in rep.gaps[:20]:
        click.echo(f"  gap: {g}")


@main.command()
@click.argument("chip", type=click.Path())
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="PNG path (default: next to the chip).")
@click.option("--range", "dyn", type=float, default=50.0, show_default=True, help="Dynamic range in dB.")
def preview(chip, out, dyn):
    """Render a chip to an 8-bit PNG."""
    from .imaging.chipio import chip_files, read_chip
    from .imaging.preview import save_preview

    path = Path(out) if out else Path(str(chip_files(chip)[0])[:-4] + ".png")
    save_preview(read_chip(chip), path, dyn)
    click.echo(str(path))


def _parse_sweep(text: str) -> np.ndarray:
    parts = [float(x) for x in text.split(":")]
    if len(parts) == 1:
        return np.array(parts)
    if len(parts) != 3 or parts[2] <= 0:
        raise click.BadParameter("use start:stop:step with step > 0")
    start, stop, step = parts
    return start + step * np.arange(int(np.floor((stop - start) / step + 1e-9)) + 1)


@main.command()
@click.argument("target")
@click.option("--azimuth", default="0:360:1", show_default=True, help="start:stop:step in degrees.")
@click.option("--depression", type=float, default=0.0, show_default=True)
@click.option("--frequency", type=float, default=10e9, show_default=True)
@click.option("--ray-area", type=float, default=1e-6, show_default=True)
@click.option("--bounces", type=int, default=5, show_default=True)
@click.option("--param", multiple=True, help="Built-in shape parameter key=value (e.g. a=0.3).")
@click.option("--out", type=click.Path(file_okay=False), default="rcs", show_default=True)
@click.option("--paradigm", type=click.Choice(["centers", "sbr", "both"]), default="sbr", show_default=True)
def rcs(target, azimuth, depression, frequency, ray_area, bounces, param, out, paradigm):
    """Monostatic RCS sweep of TARGET (mesh file or shape:<name>) to CSV and PNG."""
    from .centers import DetectionConfig, assemble_m3d
    from .plots import rcs_figure
    from .production.config import TargetEntry
    from .sbr import SbrConfig, rcs_estimate, trace_paths
    from .scene import AcquisitionGeometry, build_index

    params = {}
    for p in param:
        k, _, v = p.partition("=")
        try:
            params[k] = json.loads(v)
        except json.JSONDecodeError:
            params[k] = v
    entry = TargetEntry("target", target if target.startswith("shape:") else str(Path(target).resolve()),
                        params=params)
    try:
        entry.check()
    except ConfigError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    mesh = entry.load()
    index = build_index(mesh)
    az = _parse_sweep(azimuth)
    cfg = SbrConfig(max_bounces=bounces, ray_area=ray_area)
    curves = {}
    for par in (["centers", "sbr"] if paradigm == "both" else [paradigm]):
        vals = []
        for a in az:
            g = AcquisitionGeometry(a, depression, frequency)
            if par == "sbr":
                vals.append(rcs_estimate(trace_paths(index, g, cfg)))
            else:
                vals.append(assemble_m3d(mesh, g, cfg=DetectionConfig(), index=index).coherent_rcs())
        curves[par] = np.array(vals)
    od = Path(out)
    od.mkdir(parents=True, exist_ok=True)
    with open(od / "rcs.csv", "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["azimuth_deg", *[f"{k}_dbsm" for k in curves]])
        with np.errstate(divide="ignore"):
            for i, a in enumerate(az):
                w.writerow([f"{a:g}", *[f"{10 * np.log10(v[i]):.4f}" if v[i] > 0 else "-inf" for v in curves.values()]])
    rcs_figure(az, curves, od / "rcs.png", title=f"{target} at {depression:g} deg depression")
    click.echo(f"wrote {od / 'rcs.csv'} and {od / 'rcs.png'}")


if __name__ == "__main__":
    main()
