"""Random perturbation of a scattering-center model (position jitter, effect dropout and duplication)."""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .model import KINDS, M3dModel

DIRECTIVE = ("plate", "dihedral", "trihedral")


@dataclass(frozen=True)
class PerturbPolicy:
    """Jitter ``sigma_pos`` (m) plus per-kind drop / duplicate probabilities.

    Only directive kinds are eligible for drop/add; a duplicate is an extra
    copy of the scatterer with its own independent jitter.
    """

    sigma_pos: float = 0.0
    drop: dict = field(default_factory=dict)
    add: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.sigma_pos < 0:
            raise ValueError("sigma_pos must be non-negative")
        for table in (self.drop, self.add):
            for kind, p in table.items():
                if kind not in KINDS:
                    raise ValueError(f"unknown scatterer kind {kind!r}")
                if not 0.0 <= p <= 1.0:
                    raise ValueError(f"probability for {kind!r} must lie in [0, 1]")


def perturb_m3d(model: M3dModel, policy: PerturbPolicy, seed: int = 0) -> M3dModel:
    """Return a perturbed copy; ``model`` is left untouched."""
    rng = np.random.default_rng(seed)
    out = []
    for s in model.scatterers:
        u_drop, u_add = rng.random(2)
        copies = 1
        if s.kind in DIRECTIVE:
            if u_drop < policy.drop.get(s.kind, 0.0):
                copies = 0
            elif u_add < policy.add.get(s.kind, 0.0):
                copies = 2
        jit = rng.normal(0.0, 1.0, (2, 3)) * policy.sigma_pos
        for k in range(copies):
            out.append(replace(s, position=s.position + jit[k]) if policy.sigma_pos > 0 else s)
    return model.with_scatterers(out)
