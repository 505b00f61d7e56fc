"""Closed surfaces in hypercube 2-skeleta: search, classification, 5D→3D projection and printable meshes."""
from .cells import (
    Cell,
    CubicalComplex,
    build_complex,
    cube_boundary,
    full_skeleton,
    parse_cell,
    read_complex,
    write_complex,
)
from .export import BeamMesh, build_beam_mesh, read_obj, write_obj, write_stl_binary
from .metrics import MetricsReport, compute_metrics
from .optimizer import AgentPolicy, RewardConfig, optimize
from .projection import EmbeddingState, ProjectionConstants, apply_state
from .surfaces import SurfaceClass, SurfaceTarget, classify, enumerate_closed_surfaces, is_closed_surface

__all__ = [
    "AgentPolicy", "BeamMesh", "Cell", "CubicalComplex", "EmbeddingState", "MetricsReport",
    "ProjectionConstants", "RewardConfig", "SurfaceClass", "SurfaceTarget", "apply_state",
    "build_beam_mesh", "build_complex", "classify", "compute_metrics", "cube_boundary",
    "enumerate_closed_surfaces", "full_skeleton", "is_closed_surface", "optimize", "parse_cell",
    "read_complex", "read_obj", "write_complex", "write_obj", "write_stl_binary",
]

__version__ = "0.1.0"
