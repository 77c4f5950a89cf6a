"""Source images, the sensor model, clutter and chip I/O."""
from .chipio import checksum, chip_files, read_chip, read_sidecar, verify_chip, write_chip
from .clutter import FAMILIES, ClutterModel, synth_clutter
from .ipr import (
    RECT_WIDTH,
    SENSOR_PRESETS,
    IprKernel,
    SensorModel,
    broadening_factor,
    ipr_kernel,
    measure_ipr,
    sensor_preset,
    taylor,
    taylor_coefficients,
)
from .preview import save_preview, to_preview
from .raster import GridConfig, OffGridError, SourceImage, rasterize, splat
from .sensor import RadarChip, apply_sensor, convolve, kernel_energy, noise_power

__all__ = [
    "FAMILIES", "RECT_WIDTH", "SENSOR_PRESETS", "ClutterModel", "GridConfig", "IprKernel", "OffGridError",
    "RadarChip", "SensorModel", "SourceImage", "apply_sensor", "broadening_factor", "checksum", "chip_files", "convolve",
    "ipr_kernel", "kernel_energy", "measure_ipr", "noise_power", "rasterize", "read_chip", "read_sidecar", "save_preview",
    "sensor_preset", "splat", "synth_clutter", "taylor", "taylor_coefficients", "to_preview", "verify_chip",
    "write_chip",
]
