"""
vqasieve Data Descriptors

Core scene model: boxes, detections, depth summaries, scenes and QA pairs.

GUIDING RULE: every record is immutable once built. Ingest clamps and
drops bad geometry before a record exists; nothing downstream repairs it.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Mapping

if TYPE_CHECKING:
    from vqasieve.data.depth import DepthGrid
    from vqasieve.data.masks import RLEMask


class VqaSieveError(Exception):
    """Base class for every error raised by vqasieve."""


# =============================================================================
# Geometry atoms
# =============================================================================


@dataclass(frozen=True)
class BBox:
    """
    Axis-aligned box in pixel space, corners (x_min, y_min) and (x_max, y_max).

    Origin is the top-left corner of the image; y grows downward.
    """

    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def __post_init__(self):
        coords = (self.x_min, self.y_min, self.x_max, self.y_max)
        if not all(math.isfinite(c) for c in coords):
            raise ValueError(f"BBox coordinates must be finite: {coords}")
        if self.x_min < 0 or self.y_min < 0:
            raise ValueError(f"BBox coordinates must be >= 0: {coords}")
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError(f"BBox must have positive extent: {coords}")
        # Store as doubles even when the source gave integers
        for name, value in zip(("x_min", "y_min", "x_max", "y_max"), coords):
            object.__setattr__(self, name, float(value))

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return ((self.x_min + self.x_max) / 2.0, (self.y_min + self.y_max) / 2.0)

    def as_list(self) -> list[float]:
        return [self.x_min, self.y_min, self.x_max, self.y_max]


@dataclass(frozen=True)
class DepthSummary:
    """Per-object depth estimate sampled from a depth map (or given directly)."""

    representative_depth: float
    percentile_used: float
    sample_count: int

    def __post_init__(self):
        if not (math.isfinite(self.representative_depth) and self.representative_depth > 0):
            raise ValueError(
                f"representative_depth must be > 0, got {self.representative_depth}"
            )
        if not (0.0 <= self.percentile_used <= 1.0):
            raise ValueError(f"percentile_used must be in [0, 1], got {self.percentile_used}")
        if self.sample_count < 1:
            raise ValueError(f"sample_count must be >= 1, got {self.sample_count}")


@dataclass(frozen=True)
class Detection:
    """One annotated object instance."""

    class_label: str
    bbox: BBox
    mask: "RLEMask | None" = None
    depth_summary: DepthSummary | None = None

    def __post_init__(self):
        if not self.class_label:
            raise ValueError("Detection class_label must be non-empty")


# =============================================================================
# Scenes
# =============================================================================


class Split(str, Enum):
    TRAIN = "train"
    VAL = "val"
    UNASSIGNED = "unassigned"


@dataclass(frozen=True, eq=False)
class SceneRecord:
    """
    One image's metadata and detections; the unit of work for generation.

    Attributes:
        image_id: Unique id within the dataset
        width, height: Image dimensions in pixels
        detections: Ordered detections (all boxes inside the image)
        depth_grid: Optional in-memory depth map
        depth_file: Optional path of a depth map on disk (loaded lazily)
        source_split: Split given by the source dataset, if any
        file_name: Source image file name, if known
        attributes: Free-form string attributes (segment, camera, ...)
    """

    image_id: str
    width: int
    height: int
    detections: tuple[Detection, ...] = ()
    depth_grid: "DepthGrid | None" = None
    depth_file: str | None = None
    source_split: Split = Split.UNASSIGNED
    file_name: str | None = None
    attributes: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.image_id:
            raise ValueError("SceneRecord image_id must be non-empty")
        if self.width <= 0 or self.height <= 0:
            raise ValueError(
                f"Scene {self.image_id}: dimensions must be positive, "
                f"got {self.width}x{self.height}"
            )
        object.__setattr__(self, "detections", tuple(self.detections))
        object.__setattr__(self, "source_split", Split(self.source_split))
        object.__setattr__(self, "attributes", dict(self.attributes))
        for det in self.detections:
            if det.bbox.x_max > self.width or det.bbox.y_max > self.height:
                raise ValueError(
                    f"Scene {self.image_id}: box {det.bbox.as_list()} "
                    f"exceeds image {self.width}x{self.height}"
                )
            if det.mask is not None and (det.mask.width, det.mask.height) != (
                self.width,
                self.height,
            ):
                raise ValueError(
                    f"Scene {self.image_id}: mask size {det.mask.width}x{det.mask.height} "
                    f"differs from image {self.width}x{self.height}"
                )
        grid = self.depth_grid
        if grid is not None and (grid.width, grid.height) != (self.width, self.height):
            raise ValueError(
                f"Scene {self.image_id}: depth grid {grid.width}x{grid.height} "
                f"differs from image {self.width}x{self.height}"
            )

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SceneRecord):
            return NotImplemented
        return (
            self.image_id == other.image_id
            and self.width == other.width
            and self.height == other.height
            and self.detections == other.detections
            and self.depth_file == other.depth_file
            and self.source_split == other.source_split
            and self.file_name == other.file_name
            and dict(self.attributes) == dict(other.attributes)
            and (self.depth_grid is None) == (other.depth_grid is None)
        )

    __hash__ = None  # type: ignore[assignment]

    @property
    def image_area(self) -> float:
        return float(self.width * self.height)

    @property
    def has_depth(self) -> bool:
        """True when every detection carries a depth summary."""
        return bool(self.detections) and all(
            d.depth_summary is not None for d in self.detections
        )

    def replace_detections(self, detections) -> "SceneRecord":
        """Return a copy of this scene with a different detection list."""
        return SceneRecord(
            image_id=self.image_id,
            width=self.width,
            height=self.height,
            detections=tuple(detections),
            depth_grid=self.depth_grid,
            depth_file=self.depth_file,
            source_split=self.source_split,
            file_name=self.file_name,
            attributes=dict(self.attributes),
        )


def class_groups(scene: SceneRecord) -> dict[str, list[Detection]]:
    """
    Group a scene's detections by class label.

    Keys are exactly the labels present, in first-appearance order; every
    detection lands in exactly one list.
    """
    groups: dict[str, list[Detection]] = {}
    for det in scene.detections:
        groups.setdefault(det.class_label, []).append(det)
    return groups


def class_counts(scene: SceneRecord) -> dict[str, int]:
    """Number of detections per class label."""
    return {label: len(dets) for label, dets in class_groups(scene).items()}


# =============================================================================
# QA pairs
# =============================================================================


class Category(str, Enum):
    SPATIAL_RELATIONS = "SpatialRelations"
    COUNTING = "Counting"
    RANKING_EXTREMES = "RankingExtremes"
    LOCALIZATION = "Localization"
    SIZE_ASPECT = "SizeAspect"


CHOICE_LETTERS = ("A", "B", "C", "D")


@dataclass(frozen=True)
class QAPair:
    """A realized question with its answer and provenance."""

    image_id: str
    template_id: str
    category: Category
    question: str
    answer: str
    choices: tuple[str, ...] | None = None
    objects_involved: tuple[str, ...] = ()
    generation_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "category", Category(self.category))
        object.__setattr__(self, "objects_involved", tuple(self.objects_involved))
        if self.choices is not None:
            object.__setattr__(self, "choices", tuple(self.choices))
            letters = CHOICE_LETTERS[: len(self.choices)]
            if self.answer not in letters:
                raise ValueError(
                    f"Answer '{self.answer}' is not a choice letter of {letters}"
                )
        if not self.question or not self.answer:
            raise ValueError("QAPair question and answer must be non-empty")

    def sort_key(self) -> tuple[str, str, str, str]:
        """Canonical output order."""
        return (self.image_id, self.template_id, self.question, self.answer)


# =============================================================================
# Seeding
# =============================================================================


def derive_seed(*parts: object) -> int:
    """
    Stable 64-bit seed from any sequence of values.

    Independent of PYTHONHASHSEED and platform, so generation is reproducible
    across processes.
    """
    text = "\x1f".join(str(p) for p in parts)
    digest = hashlib.blake2b(text.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little")
