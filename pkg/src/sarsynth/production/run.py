"""Batch execution: jobs grouped per simulation, a process pool, resumable output and the manifest."""
from __future__ import annotations

import logging
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from itertools import groupby
from pathlib import Path

import numpy as np

from ..augment import augment_chip, render_chip
from ..centers.detect import assemble_m3d
from ..imaging.chipio import read_sidecar, verify_chip, write_chip
from ..sbr.tracer import trace_paths
from ..scene.bvh import build_index
from ..scene.geometry import AcquisitionGeometry
from .config import ProductionConfig
from .manifest import MANIFEST_NAME, DatasetManifest
from .plan import Job, job_seed, plan_production

log = logging.getLogger(__name__)

# per-process cache: target index -> (mesh, accel index)
_TARGETS: dict = {}


class ProductionError(RuntimeError):
    """A job failed under the fail-fast policy."""


@dataclass
class ProductionResult:
    manifest: DatasetManifest
    manifest_path: Path
    planned: int
    executed: int = 0
    skipped: int = 0
    errors: list[dict] = field(default_factory=list)

    @property
    def exit_code(self) -> int:
        return 2 if self.errors else 0


def _target(config: ProductionConfig, ti: int):
    key = (ti, repr(config.targets[ti].to_dict()))
    if key not in _TARGETS:
        mesh = config.targets[ti].load()
        _TARGETS[key] = (mesh, build_index(mesh))
    return _TARGETS[key]


def _geometry(config: ProductionConfig, job: Job) -> AcquisitionGeometry:
    pol = config.polarization.upper()
    return AcquisitionGeometry(job.azimuth, job.depression, config.frequency, pol[0], pol[1])


def record_for(job: Job, sidecar: dict) -> dict:
    """Manifest record of a finished job, built only from deterministic fields."""
    meta = sidecar["meta"]
    return {
        "kind": "chip",
        "label": job.label,
        "azimuth": job.azimuth,
        "depression": job.depression,
        "paradigm": job.paradigm,
        "variant": job.variant,
        "seed": job.seed,
        "seeds": meta["seeds"],
        "sensor": meta["sensor"],
        "path": job.path + ".raw",
        "sidecar": job.path + ".json",
        "checksum": sidecar["checksum"],
    }


def _error_record(job: Job, message: str) -> dict:
    return {"kind": "error", "label": job.label, "azimuth": job.azimuth, "depression": job.depression,
            "paradigm": job.paradigm, "variant": job.variant, "seed": job.seed, "path": job.path + ".raw",
            "error": message}


def _run_group(args) -> list[dict]:
    config, root, jobs = args
    first = jobs[0]
    geom = _geometry(config, first)
    try:
        mesh, index = _target(config, first.target)
        if first.paradigm == "centers":
            sim_seed = job_seed(config.seed, first.label, first.azimuth, first.depression, "centers", -1)
            sim = assemble_m3d(mesh, geom, None, config.detection, sim_seed, index)
        else:
            sim = trace_paths(index, geom, config.sbr)
    except Exception as exc:  # recorded per job, the batch goes on
        msg = f"{type(exc).__name__}: {exc}"
        log.debug("simulation failed: %s", traceback.format_exc())
        return [_error_record(j, msg) for j in jobs]
    out = []
    for job in jobs:
        try:
            if config.randomization is not None:
                policy = replace(config.randomization, master_seed=job.seed)
                chip = augment_chip(sim, geom, policy, job.variant, config.sensor, config.chip)
                p = chip.meta["randomization"]
                seeds = {k: p[k] for k in ("clutter_seed", "noise_seed", "diffuse_seed")}
            else:
                s = np.random.default_rng(job.seed).integers(2 ** 63, size=3)
                seeds = {"clutter_seed": int(s[0]), "noise_seed": int(s[1]), "diffuse_seed": int(s[2])}
                chip = render_chip(sim, geom, config.sensor, config.chip, config.clutter, **seeds)
            chip.meta.update({
                "label": job.label, "paradigm": job.paradigm, "variant": job.variant, "job_seed": job.seed,
                "seeds": seeds, "frequency": config.frequency, "target": Path(config.targets[job.target].mesh).name,
            })
            side = write_chip(chip, Path(root) / job.path)
            out.append(record_for(job, side))
        except Exception as exc:
            out.append(_error_record(job, f"{type(exc).__name__}: {exc}"))
    return out


def run_production(config: ProductionConfig, workers: int | None = None, resume: bool = True,
                   error_policy: str | None = None) -> ProductionResult:
    """Execute every planned job once and write ``manifest.jsonl`` last.

    Completed chips (sidecar checksum matches the raw file) are skipped on
    rerun. Results do not depend on ``workers``: each job's randomness comes
    only from its own seed and the manifest is written in plan order.
    """
    jobs = plan_production(config)
    root = config.output_dir
    root.mkdir(parents=True, exist_ok=True)
    policy = error_policy or config.error_policy
    workers = config.effective_workers() if workers is None else max(1, int(workers))
    done: dict[str, dict] = {}
    todo = []
    for j in jobs:
        if resume and verify_chip(root / j.path):
            done[j.path] = record_for(j, read_sidecar(root / j.path))
        else:
            todo.append(j)
    groups = [list(g) for _, g in groupby(todo, key=lambda j: j.geometry_key)]
    log.info("%d jobs planned, %d already complete, %d groups to run on %d worker(s)",
             len(jobs), len(done), len(groups), workers)
    result = ProductionResult(DatasetManifest([], root), root / MANIFEST_NAME, len(jobs), skipped=len(done))
    errors: list[dict] = []
    args = [(config, str(root), g) for g in groups]

    def consume(records) -> bool:
        for r in records:
            if r["kind"] == "error":
                errors.append(r)
            else:
                done[r["path"][:-4]] = r
                result.executed += 1
        return policy == "fail-fast" and any(r["kind"] == "error" for r in records)

    stop = False
    if workers == 1 or len(groups) <= 1:
        for a in args:
            if consume(_run_group(a)):
                stop = True
                break
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_run_group, a) for a in args]
            for f in futures:
                if consume(f.result()):
                    stop = True
                    for g in futures:
                        g.cancel()
                    break
    records = [done[j.path] for j in jobs if j.path in done]
    result.manifest = DatasetManifest(records + errors, root)
    result.errors = errors
    result.manifest.save(result.manifest_path)
    if stop:
        raise ProductionError(f"job failed ({errors[0]['path']}): {errors[0]['error']}")
    return result
