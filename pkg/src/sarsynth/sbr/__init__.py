"""Ray-tracing signature paradigm (shooting and bouncing rays)."""
from .contributions import Contributions, coherent_sum, rcs_estimate, read_dump, to_db, write_dump
from .tracer import RayBudgetError, RayBundle, SbrConfig, launch_grid, sweep_rcs, trace_paths

__all__ = [
    "Contributions", "coherent_sum", "rcs_estimate", "read_dump", "to_db", "write_dump",
    "RayBudgetError", "RayBundle", "SbrConfig", "launch_grid", "sweep_rcs", "trace_paths",
]
