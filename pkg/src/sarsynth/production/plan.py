"""Job planning: the cartesian sweep with stable per-job seeds and output paths."""
from __future__ import annotations

import hashlib
import re
from dataclasses import asdict, dataclass

from .config import ProductionConfig


@dataclass(frozen=True)
class Job:
    label: str
    target: int
    azimuth: float
    depression: float
    paradigm: str
    variant: int
    seed: int
    path: str

    @property
    def geometry_key(self) -> tuple:
        """Jobs sharing this key reuse one simulation (M3D or traced contributions)."""
        return (self.target, self.azimuth, self.depression, self.paradigm)

    def to_dict(self) -> dict:
        return asdict(self)


def job_seed(master: int, label: str, azimuth: float, depression: float, paradigm: str, variant: int = 0) -> int:
    """63-bit seed hashed from the job identity, independent of plan order."""
    key = f"{int(master)}|{label}|{azimuth:.9f}|{depression:.9f}|{paradigm}|{int(variant)}"
    return int.from_bytes(hashlib.sha256(key.encode("utf-8")).digest()[:8], "little") >> 1


def _slug(label: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", label)


def job_path(label: str, azimuth: float, depression: float, paradigm: str, variant: int, variants: int) -> str:
    stem = f"{paradigm}/{_slug(label)}/dep{depression:06.3f}/az{azimuth:07.3f}"
    return stem + (f"_v{variant:04d}" if variants > 1 else "")


def plan_production(config: ProductionConfig, check_paths: bool = True) -> list[Job]:
    """All jobs, ordered target, depression, azimuth, paradigm, variant."""
    if check_paths:
        for t in config.targets:
            t.check()
    azimuths = config.azimuth.values()
    jobs = []
    for ti, t in enumerate(config.targets):
        for dep in config.depressions:
            for az in azimuths:
                for par in config.paradigms:
                    for v in range(config.variants):
                        jobs.append(Job(t.label, ti, az, dep, par, v,
                                        job_seed(config.seed, t.label, az, dep, par, v),
                                        job_path(t.label, az, dep, par, v, config.variants)))
    seen = {}
    for j in jobs:
        if j.path in seen:
            raise ValueError(f"jobs {seen[j.path]} and {j} map to the same path {j.path}")
        seen[j.path] = j
    return jobs
