"""
Generation Provenance

The manifest written next to every generated dataset: what produced it,
from which inputs, and the sieve metrics gathered along the way.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from vqasieve.engine.steps import TemplateMetrics

# Fields that vary between otherwise identical runs
TIMING_FIELDS = ("duration_seconds", "predicate_time_avg_ms", "apply_time_avg_ms")


@dataclass
class GenerationManifest:
    """
    Reproducibility record of one generation run.

    Invariant: category_counts sums to total_pairs.
    """

    tool_version: str
    config_digest: str
    seed: int
    source_files: list[dict[str, str]] = field(default_factory=list)
    scene_counts: dict[str, int] = field(default_factory=dict)
    template_metrics: dict[str, TemplateMetrics] = field(default_factory=dict)
    category_counts: dict[str, int] = field(default_factory=dict)
    total_pairs: int = 0
    faults: list[dict[str, str]] = field(default_factory=list)
    ingest: dict[str, Any] = field(default_factory=dict)
    partial: bool = False
    duration_seconds: float = 0.0

    def to_dict(self) -> dict[str, Any]:
        return {
            "tool_version": self.tool_version,
            "config_digest": self.config_digest,
            "seed": self.seed,
            "source_files": list(self.source_files),
            "scene_counts": dict(self.scene_counts),
            "template_metrics": {k: m.to_dict() for k, m in self.template_metrics.items()},
            "category_counts": dict(self.category_counts),
            "total_pairs": self.total_pairs,
            "faults": list(self.faults),
            "ingest": dict(self.ingest),
            "partial": self.partial,
            "duration_seconds": self.duration_seconds,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GenerationManifest":
        return cls(
            tool_version=data["tool_version"],
            config_digest=data["config_digest"],
            seed=int(data["seed"]),
            source_files=list(data.get("source_files", [])),
            scene_counts=dict(data.get("scene_counts", {})),
            template_metrics={
                k: TemplateMetrics.from_dict(v)
                for k, v in data.get("template_metrics", {}).items()
            },
            category_counts=dict(data.get("category_counts", {})),
            total_pairs=int(data.get("total_pairs", 0)),
            faults=list(data.get("faults", [])),
            ingest=dict(data.get("ingest", {})),
            partial=bool(data.get("partial", False)),
            duration_seconds=float(data.get("duration_seconds", 0.0)),
        )

    def digest(self) -> str:
        """SHA-256 of the manifest with timing fields removed."""
        data = _strip_timing(self.to_dict())
        text = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def sha256_file(path: Path, chunk_size: int = 1024 * 1024) -> str:
    """SHA-256 of a file, read in chunks."""
    hasher = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            hasher.update(chunk)
    return hasher.hexdigest()


def source_file_entry(path: Path) -> dict[str, str]:
    """Name and content hash of one input file."""
    path = Path(path)
    return {"path": path.name, "sha256": sha256_file(path)}


def _strip_timing(value):
    if isinstance(value, dict):
        return {k: _strip_timing(v) for k, v in value.items() if k not in TIMING_FIELDS}
    if isinstance(value, list):
        return [_strip_timing(v) for v in value]
    return value


def write_manifest(manifest: GenerationManifest, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest.to_dict(), f, indent=2)
        f.write("\n")
    return path


def load_manifest(path: Path) -> GenerationManifest:
    with open(path, "r", encoding="utf-8") as f:
        return GenerationManifest.from_dict(json.load(f))
