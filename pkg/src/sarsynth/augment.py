"""Per-image domain randomization of the imaging chain.

Every image index owns an independent random stream seeded by
``(master_seed, index)``, so results never depend on production order or
on how work is split across processes.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace
from typing import Iterator

import numpy as np

from .centers.model import M3dModel
from .imaging.clutter import FAMILIES, ClutterModel, synth_clutter
from .imaging.ipr import SensorModel
from .imaging.raster import GridConfig, SourceImage, rasterize
from .imaging.sensor import RadarChip, apply_sensor
from .sbr.contributions import Contributions
from .scene.geometry import AcquisitionGeometry

_SEED_SPACE = 2 ** 63


def _interval(x) -> tuple[float, float]:
    lo, hi = (float(x), float(x)) if np.isscalar(x) else (float(x[0]), float(x[1]))
    if not lo <= hi:
        raise ValueError(f"interval [{lo}, {hi}] is empty")
    return lo, hi


@dataclass(frozen=True)
class RandomizationPolicy:
    """Intervals to draw from. Each interval is ``(lo, hi)``; a scalar means ``lo = hi``."""

    range_resolution: tuple[float, float] = (0.3, 0.3)
    cross_resolution: tuple[float, float] = (0.3, 0.3)
    clutter_sigma0_db: tuple[float, float] = (-20.0, -20.0)
    clutter_families: tuple[str, ...] = ("rayleigh",)
    clutter_shape: tuple[float, float] = (2.0, 2.0)
    nesigma0_db: tuple[float, float] = (-30.0, -30.0)
    translation: int = 8
    max_dropout: int = 10
    master_seed: int = 0

    def __post_init__(self):
        for name in ("range_resolution", "cross_resolution", "clutter_sigma0_db", "clutter_shape", "nesigma0_db"):
            object.__setattr__(self, name, _interval(getattr(self, name)))
        fams = tuple(f.lower() for f in ([self.clutter_families] if isinstance(self.clutter_families, str)
                                         else self.clutter_families))
        if not fams or any(f not in FAMILIES for f in fams):
            raise ValueError(f"clutter families must be a non-empty subset of {FAMILIES}")
        object.__setattr__(self, "clutter_families", fams)
        if self.translation < 0:
            raise ValueError("translation limit must be >= 0")
        if self.max_dropout < 0:
            raise ValueError("max_dropout must be >= 0")
        if min(self.range_resolution[0], self.cross_resolution[0]) <= 0:
            raise ValueError("resolutions must be positive")

    @classmethod
    def identity(cls, sensor: SensorModel, clutter: ClutterModel | None = None, master_seed: int = 0):
        """Degenerate policy reproducing ``sensor`` (and ``clutter``) with no shift or dropout."""
        clutter = clutter or ClutterModel(sigma0_db=-300.0)
        return cls((sensor.range_resolution,) * 2, (sensor.cross_resolution,) * 2,
                   (clutter.sigma0_db,) * 2, (clutter.family,), (clutter.shape,) * 2,
                   (sensor.nesigma0_db,) * 2, 0, 0, master_seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        return {k: list(v) if isinstance(v, tuple) else v for k, v in d.items()}

    @classmethod
    def from_dict(cls, d: dict) -> "RandomizationPolicy":
        d = dict(d)
        for k in ("range_resolution", "cross_resolution", "clutter_sigma0_db", "clutter_shape", "nesigma0_db"):
            if k in d and not np.isscalar(d[k]):
                d[k] = tuple(d[k])
        if "clutter_families" in d and not isinstance(d["clutter_families"], str):
            d["clutter_families"] = tuple(d["clutter_families"])
        return cls(**d)


@dataclass(frozen=True)
class RandomizedParams:
    index: int
    range_resolution: float
    cross_resolution: float
    clutter_sigma0_db: float
    clutter_family: str
    clutter_shape: float
    nesigma0_db: float
    shift_range: int
    shift_cross: int
    dropout: int
    clutter_seed: int
    noise_seed: int
    diffuse_seed: int

    def to_dict(self) -> dict:
        return asdict(self)


def _uniform(rng, lo_hi):
    lo, hi = lo_hi
    return lo if lo == hi else float(rng.uniform(lo, hi))


def sample_params(policy: RandomizationPolicy, index: int) -> RandomizedParams:
    """One draw of every policy field for image ``index``."""
    rng = np.random.default_rng([policy.master_seed, index])
    fam = policy.clutter_families[int(rng.integers(len(policy.clutter_families)))]
    t = policy.translation
    return RandomizedParams(
        index=int(index),
        range_resolution=_uniform(rng, policy.range_resolution),
        cross_resolution=_uniform(rng, policy.cross_resolution),
        clutter_sigma0_db=_uniform(rng, policy.clutter_sigma0_db),
        clutter_family=fam,
        clutter_shape=_uniform(rng, policy.clutter_shape),
        nesigma0_db=_uniform(rng, policy.nesigma0_db),
        shift_range=int(rng.integers(-t, t + 1)),
        shift_cross=int(rng.integers(-t, t + 1)),
        dropout=int(rng.integers(0, policy.max_dropout + 1)),
        clutter_seed=int(rng.integers(_SEED_SPACE)),
        noise_seed=int(rng.integers(_SEED_SPACE)),
        diffuse_seed=int(rng.integers(_SEED_SPACE)),
    )


def iter_params(policy: RandomizationPolicy, start: int = 0, stop: int | None = None) -> Iterator[RandomizedParams]:
    """Stream of independent work units ``(index, params)``; endless when ``stop`` is None."""
    i = start
    while stop is None or i < stop:
        yield sample_params(policy, i)
        i += 1


def _magnitude_order(amp: np.ndarray, k: int) -> np.ndarray:
    """Indices of the ``k`` largest magnitudes, earlier entries winning ties."""
    order = np.argsort(-np.abs(amp), kind="stable")
    return order[:k]


def drop_bright_points(inputs: M3dModel | Contributions, k: int, channel=None):
    """Remove the ``k`` entries of largest |amplitude|.

    Contributions are ranked on ``channel`` (default: the geometry channel).
    """
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return inputs
    if isinstance(inputs, M3dModel):
        amp = np.array([s.amplitude for s in inputs.scatterers], dtype=complex)
        gone = set(_magnitude_order(amp, k).tolist())
        return inputs.with_scatterers([s for i, s in enumerate(inputs.scatterers) if i not in gone])
    if isinstance(inputs, Contributions):
        keep = np.ones(len(inputs), bool)
        keep[_magnitude_order(inputs.channel(channel), k)] = False
        out = inputs.take(np.flatnonzero(keep))
        return out
    raise TypeError(f"cannot drop points from {type(inputs).__name__}")


def translate_target(source: SourceImage, dx: int, dy: int) -> SourceImage:
    """Shift the content by ``(dx, dy)`` output pixels (range, cross-range).

    Raises when non-zero content would leave the grid.
    """
    os_ = int(source.oversampling)
    sr, sc = int(dx) * os_, int(dy) * os_
    if sr == 0 and sc == 0:
        return source.with_data(source.data.copy())
    data = source.data
    rows = np.flatnonzero(np.any(data != 0, axis=1))
    cols = np.flatnonzero(np.any(data != 0, axis=0))
    if rows.size:
        n0, n1 = data.shape
        if rows[0] + sr < 0 or rows[-1] + sr >= n0 or cols[0] + sc < 0 or cols[-1] + sc >= n1:
            raise ValueError(f"translation by ({dx}, {dy}) output pixels pushes content off the grid")
    return source.with_data(np.roll(data, (sr, sc), axis=(0, 1)))


def render_chip(inputs: M3dModel | Contributions, geom: AcquisitionGeometry, sensor: SensorModel,
                grid: GridConfig = GridConfig(), clutter: ClutterModel | None = None, clutter_seed: int = 0,
                noise_seed: int | None = None, diffuse_seed: int | None = None, shift=(0, 0)) -> RadarChip:
    """Chip at fixed settings: rasterize, translate, add clutter, apply the sensor."""
    src = rasterize(inputs, geom, grid, diffuse_seed=diffuse_seed if isinstance(inputs, M3dModel) else None)
    src = translate_target(src, *shift)
    field_ = None if clutter is None else synth_clutter(clutter, src.shape, src.pixel_ground_area, clutter_seed)
    chip = apply_sensor(src, field_, sensor, noise_seed)
    chip.meta["grid"] = grid.to_dict()
    if clutter is not None:
        chip.meta["clutter"] = clutter.to_dict()
        chip.meta["clutter_seed"] = clutter_seed
    return chip


def augment_chip(inputs: M3dModel | Contributions, geom: AcquisitionGeometry, policy: RandomizationPolicy,
                 index: int, sensor: SensorModel = SensorModel(), grid: GridConfig = GridConfig(),
                 params: RandomizedParams | None = None) -> RadarChip:
    """Randomized chip for image ``index``.

    Order: draw parameters, drop bright points, rasterize, translate, add
    clutter, apply the sensor with the drawn resolutions and NESigma0.
    """
    p = sample_params(policy, index) if params is None else params
    sen = replace(sensor, range_resolution=p.range_resolution, cross_resolution=p.cross_resolution,
                  nesigma0_db=p.nesigma0_db)
    chip = render_chip(drop_bright_points(inputs, p.dropout), geom, sen, grid,
                       ClutterModel(p.clutter_family, p.clutter_sigma0_db, p.clutter_shape),
                       p.clutter_seed, p.noise_seed, p.diffuse_seed, (p.shift_range, p.shift_cross))
    chip.meta["randomization"] = p.to_dict()
    return chip
