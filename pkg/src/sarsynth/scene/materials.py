"""Electromagnetic materials and the material table file.

Time convention is ``exp(+j omega t)``: lossy dielectrics carry a relative
permittivity with a non-positive imaginary part, e.g. ``4 - 0.2j``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml


@dataclass(frozen=True)
class Material:
    name: str
    kind: str = "pec"
    permittivity: complex = complex(1.0, 0.0)
    reflectivity: float = 1.0
    roughness: float = 0.0
    sigma0_db: float = -15.0

    def __post_init__(self):
        kind = self.kind.lower()
        if kind not in ("pec", "dielectric"):
            raise ValueError(f"material {self.name!r}: kind must be 'pec' or 'dielectric'")
        object.__setattr__(self, "kind", kind)
        eps = complex(self.permittivity)
        object.__setattr__(self, "permittivity", eps)
        if kind == "dielectric":
            if not np.isfinite(eps.real) or not np.isfinite(eps.imag):
                raise ValueError(f"material {self.name!r}: permittivity must be finite")
            if eps.imag > 0.0:
                raise ValueError(
                    f"material {self.name!r}: permittivity imaginary part must be <= 0 "
                    "under the exp(+j omega t) convention"
                )
        if not 0.0 <= self.reflectivity <= 1.0:
            raise ValueError(f"material {self.name!r}: reflectivity must lie in [0, 1]")
        if self.roughness < 0.0:
            raise ValueError(f"material {self.name!r}: roughness must be >= 0")
        if not np.isfinite(self.sigma0_db):
            raise ValueError(f"material {self.name!r}: sigma0 must be finite")

    @property
    def sigma0(self) -> float:
        return 10.0 ** (self.sigma0_db / 10.0)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "permittivity": [self.permittivity.real, self.permittivity.imag],
            "reflectivity": self.reflectivity,
            "roughness": self.roughness,
            "sigma0_db": self.sigma0_db,
        }

    @classmethod
    def from_dict(cls, name: str, d: dict) -> "Material":
        eps = d.get("permittivity", [1.0, 0.0])
        if isinstance(eps, (list, tuple)):
            eps = complex(eps[0], eps[1])
        elif isinstance(eps, str):
            eps = complex(eps.replace(" ", ""))
        return cls(
            name=name,
            kind=d.get("kind", "pec"),
            permittivity=eps,
            reflectivity=float(d.get("reflectivity", 1.0)),
            roughness=float(d.get("roughness", 0.0)),
            sigma0_db=float(d.get("sigma0_db", -15.0)),
        )


PEC = Material("pec")


@dataclass
class MaterialTable:
    materials: dict[str, Material] = field(default_factory=dict)

    def __getitem__(self, name: str) -> Material:
        return self.materials[name]

    def __contains__(self, name: str) -> bool:
        return name in self.materials

    def to_dict(self) -> dict:
        return {name: m.to_dict() for name, m in sorted(self.materials.items())}


def load_material_table(path: str | Path) -> MaterialTable:
    """Read a YAML/JSON table ``name -> {kind, permittivity, reflectivity, roughness, sigma0_db}``."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = yaml.safe_load(fh) or {}
    if "materials" in raw and isinstance(raw["materials"], dict):
        raw = raw["materials"]
    return MaterialTable({name: Material.from_dict(name, d or {}) for name, d in raw.items()})


def save_material_table(table: MaterialTable, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        yaml.safe_dump({"materials": table.to_dict()}, fh, sort_keys=True)


def fresnel_coefficients(material: Material, cos_i: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Reflection coefficients ``(gamma_s, gamma_p)`` at local incidence cosine ``cos_i``.

    The (s, p) basis is chosen so that a perfect conductor gives
    ``(-1, +1)``; the infinite-permittivity limit of the dielectric formulas
    agrees with it.
    """
    cos_i = np.asarray(cos_i, dtype=float)
    r = material.reflectivity
    if material.kind == "pec":
        ones = np.ones_like(cos_i, dtype=complex)
        return -r * ones, r * ones
    eps = material.permittivity
    sin2 = 1.0 - cos_i**2
    root = np.sqrt(eps - sin2 + 0j)
    gs = (cos_i - root) / (cos_i + root)
    gp = (eps * cos_i - root) / (eps * cos_i + root)
    return r * gs, r * gp
