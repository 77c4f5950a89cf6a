"""Scene description shared by both signature paradigms."""
from .bvh import AccelIndex, EmptyMeshError, brute_force_intersect, build_index
from .geometry import CHANNELS, SPEED_OF_LIGHT, AcquisitionGeometry, channel_index, image_coordinates, los_frame
from .ground import GroundPatch, ground_heights, synthesize_rough_ground
from .materials import PEC, Material, MaterialTable, fresnel_coefficients, load_material_table, save_material_table
from .mesh import MeshError, TargetMesh, load_mesh, merge_meshes, mesh_from_triangles, save_obj, save_stl

__all__ = [
    "AccelIndex", "EmptyMeshError", "brute_force_intersect", "build_index",
    "CHANNELS", "SPEED_OF_LIGHT", "AcquisitionGeometry", "channel_index", "image_coordinates", "los_frame",
    "GroundPatch", "ground_heights", "synthesize_rough_ground",
    "PEC", "Material", "MaterialTable", "fresnel_coefficients", "load_material_table", "save_material_table",
    "MeshError", "TargetMesh", "load_mesh", "merge_meshes", "mesh_from_triangles", "save_obj", "save_stl",
]
