"""Production configuration: targets, geometry sweep, sensor, paradigm and randomization."""
from __future__ import annotations

import os
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import yaml

from ..augment import RandomizationPolicy
from ..centers.model import DetectionConfig
from ..imaging.clutter import ClutterModel
from ..imaging.ipr import SensorModel, sensor_preset
from ..imaging.raster import GridConfig
from ..sbr.tracer import SbrConfig
from ..scene import shapes
from ..scene.materials import load_material_table
from ..scene.mesh import TargetMesh, load_mesh

PARADIGMS = ("centers", "sbr")
WORKERS_ENV = "SARSYNTH_WORKERS"

_SHAPES = {
    "plate": shapes.plate, "dihedral": shapes.dihedral, "trihedral": shapes.trihedral,
    "box": shapes.box, "sphere": shapes.sphere, "vehicle": shapes.vehicle,
}


class ConfigError(ValueError):
    """Invalid production configuration."""


@dataclass(frozen=True)
class TargetEntry:
    """One class of target.

    ``mesh`` is an OBJ/STL path (relative to the config file) or
    ``shape:<name>`` for a built-in test target with keyword ``params``.
    ``material_map`` maps mesh groups to entries of the ``materials`` table.
    """

    label: str
    mesh: str
    materials: str | None = None
    material_map: dict = field(default_factory=dict)
    unit_scale: float = 1.0
    params: dict = field(default_factory=dict)

    @property
    def is_builtin(self) -> bool:
        return self.mesh.startswith("shape:")

    def resolve(self, base: Path) -> "TargetEntry":
        if self.is_builtin:
            return self
        mats = None if self.materials is None else str((base / self.materials).resolve())
        return TargetEntry(self.label, str((base / self.mesh).resolve()), mats, dict(self.material_map),
                           self.unit_scale, dict(self.params))

    def check(self) -> None:
        if self.is_builtin:
            name = self.mesh[len("shape:"):]
            if name not in _SHAPES:
                raise ConfigError(f"target {self.label!r}: unknown built-in shape {name!r}")
        elif not Path(self.mesh).is_file():
            raise ConfigError(f"target {self.label!r}: mesh file {self.mesh} does not exist")
        if self.materials is not None and not Path(self.materials).is_file():
            raise ConfigError(f"target {self.label!r}: material table {self.materials} does not exist")

    def load(self) -> TargetMesh:
        """Mesh centred horizontally on its bounding box and resting on z = 0."""
        if self.is_builtin:
            mesh = _SHAPES[self.mesh[len("shape:"):]](**self.params)
            return mesh.transformed(np.eye(3) * self.unit_scale) if self.unit_scale != 1.0 else mesh
        table = load_material_table(self.materials) if self.materials else None
        mmap = {g: table[m] for g, m in self.material_map.items()} if table else None
        return load_mesh(self.mesh, self.unit_scale, mmap).centered(on_ground=True)

    def to_dict(self) -> dict:
        return {"label": self.label, "mesh": self.mesh, "materials": self.materials,
                "material_map": dict(self.material_map), "unit_scale": self.unit_scale, "params": dict(self.params)}


@dataclass(frozen=True)
class AzimuthSweep:
    """``start`` to ``stop`` inclusive by ``step`` degrees; values wrap at 360 and repeats are dropped."""

    start: float = 0.0
    stop: float = 360.0
    step: float = 1.0

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigError("azimuth step must be > 0")
        if not (0.0 <= self.start <= 360.0 and 0.0 <= self.stop <= 360.0):
            raise ConfigError("azimuth range must lie within [0, 360]")
        if self.stop < self.start:
            raise ConfigError("azimuth stop must not precede start")

    def values(self) -> list[float]:
        n = int(np.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        out, seen = [], set()
        for i in range(n):
            a = round((self.start + i * self.step) % 360.0, 9)
            if a not in seen:
                seen.add(a)
                out.append(a)
        return out


@dataclass
class ProductionConfig:
    targets: list[TargetEntry]
    depressions: list[float]
    azimuth: AzimuthSweep
    sensor: SensorModel = field(default_factory=SensorModel)
    paradigm: str = "centers"
    randomization: RandomizationPolicy | None = None
    variants: int = 1
    output: str = "dataset"
    seed: int = 0
    workers: int = 1
    error_policy: str = "continue"
    frequency: float = 9.6e9
    polarization: str = "HH"
    chip: GridConfig = field(default_factory=GridConfig)
    clutter: ClutterModel | None = None
    sbr: SbrConfig = field(default_factory=lambda: SbrConfig(ray_area=1e-5))
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    base: str = "."

    def __post_init__(self):
        labels = [t.label for t in self.targets]
        if any(not str(lab).strip() for lab in labels):
            raise ConfigError("target labels must be non-empty")
        dup = sorted({lab for lab in labels if labels.count(lab) > 1})
        if dup:
            raise ConfigError(f"duplicate target labels: {dup}")
        if self.paradigm not in PARADIGMS + ("both",):
            raise ConfigError(f"paradigm must be one of centers, sbr, both; got {self.paradigm!r}")
        if self.error_policy not in ("continue", "fail-fast"):
            raise ConfigError("error_policy must be 'continue' or 'fail-fast'")
        for d in self.depressions:
            if not 0.0 <= d < 90.0:
                raise ConfigError(f"depression {d} outside [0, 90)")
        if self.variants < 1:
            raise ConfigError("variants must be >= 1")
        if abs(self.sensor.pixel_spacing - self.chip.spacing) > 1e-12:
            raise ConfigError(
                f"chip spacing {self.chip.spacing} m differs from sensor pixel spacing {self.sensor.pixel_spacing} m")
        if len(self.polarization) != 2 or any(c not in "HV" for c in self.polarization.upper()):
            raise ConfigError("polarization must be two letters from H/V, e.g. 'HH'")

    @property
    def paradigms(self) -> tuple[str, ...]:
        return PARADIGMS if self.paradigm == "both" else (self.paradigm,)

    @property
    def output_dir(self) -> Path:
        return (Path(self.base) / self.output).resolve()

    def effective_workers(self) -> int:
        env = os.environ.get(WORKERS_ENV)
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise ConfigError(f"{WORKERS_ENV} must be an integer, got {env!r}") from None
        return max(1, int(self.workers))

    def snapshot(self) -> dict:
        """Settings that shape every chip (used in sidecars)."""
        return {
            "sensor": self.sensor.to_dict(),
            "chip": self.chip.to_dict(),
            "frequency": self.frequency,
            "polarization": self.polarization,
            "clutter": None if self.clutter is None else self.clutter.to_dict(),
        }


def _pick(cls, d: dict | None, what: str, **defaults):
    d = dict(defaults, **(d or {}))
    names = {f.name for f in fields(cls)}
    extra = sorted(set(d) - names)
    if extra:
        raise ConfigError(f"{what}: unknown field(s) {extra}")
    try:
        return cls(**d)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{what}: {exc}") from exc


def _sensor(raw) -> SensorModel:
    if raw is None:
        return sensor_preset("mstar")
    if isinstance(raw, str):
        try:
            return sensor_preset(raw)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    raw = dict(raw)
    base = sensor_preset(raw.pop("preset", "mstar")).to_dict()
    return _pick(SensorModel, {**base, **raw}, "sensor")


def config_from_dict(raw: dict, base: str | Path = ".") -> ProductionConfig:
    if not isinstance(raw, dict):
        raise ConfigError("configuration must be a mapping")
    known = {"targets", "depressions", "azimuth", "sensor", "paradigm", "randomization", "variants", "output",
             "seed", "workers", "error_policy", "frequency", "polarization", "chip", "clutter", "sbr", "detection"}
    extra = sorted(set(raw) - known)
    if extra:
        raise ConfigError(f"unknown configuration key(s): {extra}")
    base = Path(base)
    targets = []
    for i, t in enumerate(raw.get("targets") or []):
        if not isinstance(t, dict) or "label" not in t or "mesh" not in t:
            raise ConfigError(f"target #{i} needs 'label' and 'mesh'")
        targets.append(_pick(TargetEntry, t, f"target #{i}").resolve(base))
    az = raw.get("azimuth", {})
    if isinstance(az, str):
        parts = [float(x) for x in az.split(":")]
        if len(parts) != 3:
            raise ConfigError("azimuth string must be 'start:stop:step'")
        az = dict(zip(("start", "stop", "step"), parts))
    sensor = _sensor(raw.get("sensor"))
    rnd = raw.get("randomization")
    try:
        policy = None if rnd is None else RandomizationPolicy.from_dict(rnd)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"randomization: {exc}") from exc
    dep = raw.get("depressions", [])
    try:
        return ProductionConfig(
            targets=targets,
            depressions=[float(d) for d in (dep if isinstance(dep, list) else [dep])],
            azimuth=_pick(AzimuthSweep, az, "azimuth"),
            sensor=sensor,
            paradigm=str(raw.get("paradigm", "centers")),
            randomization=policy,
            variants=int(raw.get("variants", 1)),
            output=str(raw.get("output", "dataset")),
            seed=int(raw.get("seed", 0)),
            workers=int(raw.get("workers", 1)),
            error_policy=str(raw.get("error_policy", "continue")),
            frequency=float(raw.get("frequency", 9.6e9)),
            polarization=str(raw.get("polarization", "HH")).upper(),
            chip=_pick(GridConfig, raw.get("chip"), "chip", spacing=sensor.pixel_spacing),
            clutter=None if raw.get("clutter") is None else _pick(ClutterModel, raw["clutter"], "clutter"),
            sbr=_pick(SbrConfig, raw.get("sbr"), "sbr", ray_area=1e-5),
            detection=_pick(DetectionConfig, raw.get("detection"), "detection"),
            base=str(base),
        )
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc)) from exc


def load_config(path: str | Path) -> ProductionConfig:
    path = Path(path)
    try:
        raw = yaml.safe_load(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return config_from_dict(raw or {}, path.parent)
