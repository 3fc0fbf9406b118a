"""
vqasieve Project Configuration

Dataclasses for template thresholds and generation runs.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Literal


@dataclass(frozen=True)
class TemplateConfig:
    """
    Thresholds shared by the template library.

    Every margin ratio is a multiplicative gap (> 1) that two compared
    quantities must clear before a question is asked; comparisons are
    inclusive (>=).
    """

    # Margins
    count_margin_ratio: float = 1.5
    area_margin_ratio: float = 1.5
    rank_gap_ratio: float = 1.5
    depth_margin_ratio: float = 1.5
    threshold_question_ratio: float = 2.0
    separation_margin_px: float = 20.0

    # Directional
    half_image_rule: bool = True
    vertical_overlap_gate: bool = False
    vertical_overlap_fraction: float = 0.25  # of the smaller box height

    # Shape and placement
    aspect_ratio_threshold: float = 1.2
    reversed_aspect_phrasing: bool = False
    buffer_frac: float = 0.02
    grid_margin_frac: float = 0.02

    # Arrangement
    row_variance_threshold: float = 1e-4
    row_normalization: Literal["height", "width", "diagonal"] = "height"
    row_min_detections: int = 3
    cluster_min_detections: int = 9
    eps_frac: float = 0.05
    min_pts: int = 3
    distractor_search_limit: int = 200
    distractor_pool_size: int = 8

    # Counting
    multichoice_min_count: int = 4

    # Depth
    depth_percentile: float = 0.10

    def validate(self) -> list[str]:
        """Return a list of problems (empty when valid)."""
        problems = []
        for name in (
            "count_margin_ratio",
            "area_margin_ratio",
            "rank_gap_ratio",
            "depth_margin_ratio",
            "threshold_question_ratio",
            "aspect_ratio_threshold",
        ):
            if not getattr(self, name) > 1.0:
                problems.append(f"{name} must be > 1 (got {getattr(self, name)})")
        for name in (
            "vertical_overlap_fraction",
            "grid_margin_frac",
            "eps_frac",
        ):
            if not 0.0 <= getattr(self, name) < 1.0:
                problems.append(f"{name} must be in [0, 1) (got {getattr(self, name)})")
        if not 0.0 <= self.depth_percentile <= 1.0:
            problems.append(f"depth_percentile must be in [0, 1] (got {self.depth_percentile})")
        if not 0.0 <= self.buffer_frac < 1.0 / 6.0:
            problems.append(f"buffer_frac must be in [0, 1/6) (got {self.buffer_frac})")
        if self.eps_frac <= 0:
            problems.append("eps_frac must be > 0")
        if self.separation_margin_px < 0:
            problems.append("separation_margin_px must be >= 0")
        if self.row_variance_threshold < 0:
            problems.append("row_variance_threshold must be >= 0")
        if self.row_normalization not in ("height", "width", "diagonal"):
            problems.append(f"row_normalization must be height/width/diagonal")
        if self.min_pts < 2:
            problems.append("min_pts must be >= 2")
        if self.row_min_detections < 3:
            problems.append("row_min_detections must be >= 3")
        if self.cluster_min_detections < self.min_pts:
            problems.append("cluster_min_detections must be >= min_pts")
        if self.multichoice_min_count < 1:
            problems.append("multichoice_min_count must be >= 1")
        if self.distractor_search_limit < 1 or self.distractor_pool_size < 3:
            problems.append("distractor_search_limit >= 1 and distractor_pool_size >= 3")
        return problems

    def with_overrides(self, overrides: dict[str, Any]) -> "TemplateConfig":
        """Copy with some fields replaced; unknown keys raise KeyError."""
        known = {f.name for f in fields(self)}
        unknown = set(overrides) - known
        if unknown:
            raise KeyError(f"Unknown template settings: {sorted(unknown)}")
        return replace(self, **overrides)

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)


DEPTH_TEMPLATES = ("Closer", "Farther", "DepthRanking(3)")

DEFAULT_TEMPLATES = (
    "IsObjectCentered",
    "WidthVsHeight",
    "LeftMost",
    "RightMost",
    "LargestAppearance",
    "RankLargestK(3)",
    "MostAppearance",
    "LeastAppearance",
    "LeftOf",
    "RightOf",
    "HowMany",
    "AreMore",
    "WhichMore",
    "Quadrants(2,2)",
    "Quadrants(3,3)",
    "LeftMostWidthVsHeight",
    "RightMostWidthVsHeight",
    "MoreThanThresholdHowMany",
    "LessThanThresholdHowMany",
    "MultiChoiceHowMany",
    "ObjectsInRow",
    "ObjectsInLine",
    "MostClusteredObjects",
)


@dataclass
class OutputPaths:
    """Files written by a generation run inside the output directory."""

    root: Path

    def qa(self, split: str | None = None) -> Path:
        return self.root / (f"qa_{split}.jsonl" if split else "qa.jsonl")

    @property
    def manifest(self) -> Path:
        return self.root / "manifest.json"

    @property
    def stats_text(self) -> Path:
        return self.root / "stats.txt"

    @property
    def stats_csv(self) -> Path:
        return self.root / "stats.csv"


@dataclass
class RunConfig:
    """
    Complete configuration of a generation run.

    Loaded from a YAML file (see project.structure.load_run_config); every
    field can be overridden from the command line.
    """

    inputs: list[Path] = field(default_factory=list)
    format: Literal["coco", "native"] = "native"
    depth_dir: Path | None = None
    inline_depth: bool = False  # native detections carry their own depth
    variant: Literal["without_depth", "with_depth"] = "without_depth"
    templates: list[str] | None = None  # None -> variant defaults
    template_config: TemplateConfig = field(default_factory=TemplateConfig)
    template_overrides: dict[str, dict[str, Any]] = field(default_factory=dict)
    seed: int = 0
    workers: int = 1
    output_dir: Path = Path("out")
    split_fraction: float | None = None
    frame_select: bool = False
    frame_group_key: str = "segment"
    frame_camera: str | None = None
    plugin_dir: Path | None = None
    use_sieve: bool = True

    @property
    def enabled_templates(self) -> list[str]:
        """Template ids this run generates."""
        if self.templates is not None:
            return list(self.templates)
        if self.variant == "with_depth":
            return list(DEFAULT_TEMPLATES) + list(DEPTH_TEMPLATES)
        return list(DEFAULT_TEMPLATES)

    @property
    def paths(self) -> OutputPaths:
        return OutputPaths(root=Path(self.output_dir))

    def to_dict(self) -> dict[str, Any]:
        """Plain-data view for YAML/JSON serialization."""
        return {
            "inputs": [str(p) for p in self.inputs],
            "format": self.format,
            "depth_dir": str(self.depth_dir) if self.depth_dir else None,
            "inline_depth": self.inline_depth,
            "variant": self.variant,
            "templates": {
                "enabled": self.enabled_templates,
                "settings": self.template_config.to_dict(),
                "overrides": self.template_overrides,
            },
            "seed": self.seed,
            "workers": self.workers,
            "output_dir": str(self.output_dir),
            "split_fraction": self.split_fraction,
            "frame_select": {
                "enabled": self.frame_select,
                "group_key": self.frame_group_key,
                "camera": self.frame_camera,
            },
            "plugin_dir": str(self.plugin_dir) if self.plugin_dir else None,
        }

    def digest(self) -> str:
        """
        SHA-256 of the settings that shape the generated QA pairs.

        Worker count and output location are left out: they do not change
        the output.
        """
        data = self.to_dict()
        for key in ("workers", "output_dir", "inputs", "depth_dir", "plugin_dir"):
            data.pop(key)
        text = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()
