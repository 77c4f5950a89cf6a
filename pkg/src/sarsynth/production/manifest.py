"""Dataset manifest: one JSON object per line, chips first in plan order, then errors."""
from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from ..imaging.chipio import verify_chip

MANIFEST_NAME = "manifest.jsonl"


@dataclass
class DatasetManifest:
    records: list[dict] = field(default_factory=list)
    root: Path = Path(".")

    def __len__(self) -> int:
        return len(self.chips)

    @property
    def chips(self) -> list[dict]:
        return [r for r in self.records if r.get("kind", "chip") == "chip"]

    @property
    def errors(self) -> list[dict]:
        return [r for r in self.records if r.get("kind") == "error"]

    @property
    def paradigms(self) -> list[str]:
        return sorted({r["paradigm"] for r in self.chips})

    def chip_path(self, record: dict) -> Path:
        return (self.root / record["path"]).resolve()

    def missing(self) -> list[dict]:
        """Chip records whose files are absent or fail their checksum."""
        return [r for r in self.chips if not verify_chip(self.chip_path(r))]

    def dumps(self) -> str:
        return "".join(json.dumps(r, sort_keys=True) + "\n" for r in self.chips + self.errors)

    def save(self, path) -> Path:
        """Atomic write (temporary file then rename)."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text(self.dumps(), encoding="utf-8")
        os.replace(tmp, path)
        return path


def load_manifest(path) -> DatasetManifest:
    path = Path(path)
    if path.is_dir():
        path = path / MANIFEST_NAME
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for n, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                records.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}:{n}: {exc}") from exc
    return DatasetManifest(records, path.parent.resolve())


def combine_datasets(manifests, root=None) -> DatasetManifest:
    """Union of manifests; record paths are rebased onto ``root``.

    ``root`` defaults to the common parent of the inputs. Two records that
    point at the same file raise an error naming the path.
    """
    manifests = [load_manifest(m) if not isinstance(m, DatasetManifest) else m for m in manifests]
    if root is None:
        roots = [str(m.root) for m in manifests] or ["."]
        root = Path(os.path.commonpath(roots)) if manifests else Path(".")
    root = Path(root).resolve()
    out, owner = [], {}
    for mi, m in enumerate(manifests):
        for r in m.records:
            r = dict(r)
            if r.get("kind", "chip") == "chip":
                full = m.chip_path(r)
                if full in owner:
                    raise ValueError(f"path collision: {full} appears in manifests #{owner[full]} and #{mi}")
                owner[full] = mi
                r["path"] = os.path.relpath(full, root)
            out.append(r)
    return DatasetManifest(out, root)
