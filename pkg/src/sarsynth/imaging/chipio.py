"""Chip files: raw little-endian float32 magnitude grid plus a JSON sidecar."""
from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

import numpy as np

from .sensor import RadarChip


def chip_bytes(chip: RadarChip) -> bytes:
    return np.abs(chip.data).astype("<f4").tobytes()


def checksum(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def chip_files(path) -> tuple[Path, Path]:
    """(raw, sidecar) paths for a chip stem; a trailing .raw or .json is ignored.

    Suffixes are appended rather than substituted because stems such as
    ``az012.500`` contain dots.
    """
    p = str(path)
    for ext in (".raw", ".json"):
        if p.endswith(ext):
            p = p[: -len(ext)]
    return Path(p + ".raw"), Path(p + ".json")


def _atomic_write(path: Path, payload: bytes) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    os.replace(tmp, path)


def write_chip(chip: RadarChip, path) -> dict:
    """Write ``<path>.raw`` and ``<path>.json``; return the sidecar dict.

    The sidecar lands last, so a present sidecar whose checksum matches the
    raw file marks a completed write.
    """
    raw_path, side_path = chip_files(path)
    raw = chip_bytes(chip)
    side = {
        "format": "float32-le magnitude",
        "shape": list(chip.shape),
        "spacing": chip.spacing,
        "checksum": checksum(raw),
        "meta": chip.meta,
    }
    raw_path.parent.mkdir(parents=True, exist_ok=True)
    _atomic_write(raw_path, raw)
    _atomic_write(side_path, (json.dumps(side, indent=2, sort_keys=True) + "\n").encode())
    return side


def read_sidecar(path) -> dict:
    return json.loads(chip_files(path)[1].read_text(encoding="utf-8"))


def read_chip(path) -> RadarChip:
    raw_path, side_path = chip_files(path)
    side = json.loads(side_path.read_text(encoding="utf-8"))
    raw = raw_path.read_bytes()
    if checksum(raw) != side["checksum"]:
        raise ValueError(f"{path}: checksum mismatch")
    mag = np.frombuffer(raw, dtype="<f4").reshape(side["shape"]).astype(float)
    return RadarChip(mag.astype(complex), side["spacing"], side["meta"])


def verify_chip(path) -> bool:
    """True when both files exist and the raw grid matches the sidecar checksum."""
    raw_path, side_path = chip_files(path)
    try:
        side = json.loads(side_path.read_text(encoding="utf-8"))
        return checksum(raw_path.read_bytes()) == side["checksum"]
    except (OSError, ValueError, KeyError):
        return False
