"""Dataset production: configuration, planning, batch runs, manifests and metrics."""
from .config import (
    PARADIGMS,
    WORKERS_ENV,
    AzimuthSweep,
    ConfigError,
    ProductionConfig,
    TargetEntry,
    config_from_dict,
    load_config,
)
from .manifest import MANIFEST_NAME, DatasetManifest, combine_datasets, load_manifest
from .plan import Job, job_seed, plan_production
from .report import MetricsReport, chip_statistics, compare_paradigms, summarize
from .run import ProductionError, ProductionResult, run_production

__all__ = [
    "MANIFEST_NAME", "PARADIGMS", "WORKERS_ENV", "AzimuthSweep", "ConfigError", "DatasetManifest", "Job",
    "MetricsReport", "ProductionConfig", "ProductionError", "ProductionResult", "TargetEntry", "chip_statistics",
    "combine_datasets", "compare_paradigms", "config_from_dict", "job_seed", "load_config", "load_manifest",
    "plan_production", "run_production", "summarize",
]
