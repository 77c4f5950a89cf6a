"""Scattering-centers paradigm: canonical-effect detection and M3D models."""
from .detect import (
    assemble_m3d,
    backscatter_fill,
    coplanar_clusters,
    detect_dihedrals,
    detect_plates,
    detect_trihedrals,
)
from .model import (
    KINDS,
    PATTERNS,
    DetectionConfig,
    M3dModel,
    Scatterer,
    read_m3d,
    render_terms,
    write_m3d,
    write_summary,
)
from .perturb import PerturbPolicy, perturb_m3d
from .visibility import silhouette_area, visible_set

__all__ = [
    "KINDS", "PATTERNS", "DetectionConfig", "M3dModel", "Scatterer", "PerturbPolicy",
    "assemble_m3d", "backscatter_fill", "coplanar_clusters", "detect_dihedrals", "detect_plates",
    "detect_trihedrals", "perturb_m3d", "read_m3d", "render_terms", "silhouette_area",
    "visible_set", "write_m3d", "write_summary",
]
