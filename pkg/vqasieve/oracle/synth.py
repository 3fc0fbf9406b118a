"""
Synthetic Scenes

Seeded generator of SceneRecords with controlled placement, used to drive
the differential checks and the property tests.

Box coordinates are multiples of 0.25 px so geometric comparisons in the
checks are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Literal, Mapping

import numpy as np

from vqasieve.data.descriptors import (
    BBox,
    DepthSummary,
    Detection,
    SceneRecord,
    VqaSieveError,
)
from vqasieve.utils.geometry import intersection_area

MAX_PLACEMENT_TRIES = 1000

Placement = Literal["uniform", "row", "cluster", "left_right"]


class PlacementInfeasible(VqaSieveError):
    """A box could not be placed without overlap within the retry budget."""


@dataclass(frozen=True)
class SceneRecipe:
    """
    How to build one synthetic scene.

    Attributes:
        seed: Drives every random draw
        width, height: Image size in pixels
        counts: class label -> inclusive (min, max) instance count
        placement: uniform, row (centers on y = row_y +- jitter),
            cluster (centers within radius of cluster_center) or left_right
            (boxes strictly ordered left to right in creation order)
        overlap: "forbid" rejects any box intersecting an earlier one
        box_size: Inclusive (min, max) side length in pixels
        depth_range: Per-detection depth drawn uniformly, or None for no depth
    """

    seed: int
    width: int = 640
    height: int = 480
    counts: Mapping[str, tuple[int, int]] = field(
        default_factory=lambda: {"car": (0, 3), "person": (0, 3), "truck": (0, 2)}
    )
    placement: Placement = "uniform"
    row_y: float = 240.0
    jitter: float = 0.0
    cluster_center: tuple[float, float] = (320.0, 240.0)
    cluster_radius: float = 40.0
    overlap: Literal["allow", "forbid"] = "allow"
    box_size: tuple[float, float] = (10.0, 120.0)
    depth_range: tuple[float, float] | None = None

    @property
    def image_id(self) -> str:
        return f"synth-{self.seed:06d}"

    def validate(self) -> list[str]:
        problems = []
        if self.width <= 0 or self.height <= 0:
            problems.append("image dimensions must be positive")
        lo, hi = self.box_size
        if not 0 < lo <= hi or hi > min(self.width, self.height):
            problems.append(f"box_size {self.box_size} does not fit the image")
        for label, (c_lo, c_hi) in self.counts.items():
            if not 0 <= c_lo <= c_hi:
                problems.append(f"count range for {label} is invalid: {(c_lo, c_hi)}")
        if self.depth_range is not None and not 0 < self.depth_range[0] <= self.depth_range[1]:
            problems.append(f"depth_range {self.depth_range} must be positive")
        return problems


def _quarter(value: float) -> float:
    return round(value * 4.0) / 4.0


def _half(value: float) -> float:
    return max(0.5, round(value * 2.0) / 2.0)


def synth_scene(recipe: SceneRecipe) -> SceneRecord:
    """
    Build the scene a recipe describes; the same recipe always gives the
    same scene.

    Raises:
        ValueError: The recipe is invalid
        PlacementInfeasible: A box could not be placed within MAX_PLACEMENT_TRIES
    """
    problems = recipe.validate()
    if problems:
        raise ValueError("; ".join(problems))

    rng = np.random.default_rng(recipe.seed)
    labels: list[str] = []
    for label in sorted(recipe.counts):
        lo, hi = recipe.counts[label]
        labels.extend([label] * int(rng.integers(lo, hi + 1)))
    labels = [labels[int(i)] for i in rng.permutation(len(labels))]

    boxes: list[BBox] = []
    for index in range(len(labels)):
        boxes.append(_place_box(recipe, rng, index, len(labels), boxes))

    detections = []
    for label, box in zip(labels, boxes):
        depth = None
        if recipe.depth_range is not None:
            value = round(float(rng.uniform(*recipe.depth_range)), 3)
            depth = DepthSummary(representative_depth=value, percentile_used=0.10, sample_count=1)
        detections.append(Detection(class_label=label, bbox=box, depth_summary=depth))

    return SceneRecord(
        image_id=recipe.image_id,
        width=recipe.width,
        height=recipe.height,
        detections=tuple(detections),
    )


def _place_box(
    recipe: SceneRecipe, rng: np.random.Generator, index: int, total: int, placed: list[BBox]
) -> BBox:
    W, H = float(recipe.width), float(recipe.height)
    for _ in range(MAX_PLACEMENT_TRIES):
        bw = _half(rng.uniform(*recipe.box_size))
        bh = _half(rng.uniform(*recipe.box_size))

        if recipe.placement == "uniform":
            x0 = _quarter(rng.uniform(0.0, W - bw))
            y0 = _quarter(rng.uniform(0.0, H - bh))
        elif recipe.placement == "row":
            x0 = _quarter(rng.uniform(0.0, W - bw))
            cy = _quarter(recipe.row_y + rng.uniform(-recipe.jitter, recipe.jitter))
            y0 = cy - bh / 2.0
        elif recipe.placement == "cluster":
            cx0, cy0 = recipe.cluster_center
            r = recipe.cluster_radius
            x0 = _quarter(cx0 + rng.uniform(-r, r)) - bw / 2.0
            y0 = _quarter(cy0 + rng.uniform(-r, r)) - bh / 2.0
        elif recipe.placement == "left_right":
            slot = W / max(1, total)
            bw = min(bw, _half(slot * 0.8))
            x0 = _quarter(index * slot + rng.uniform(0.0, slot - bw - 1.0))
            y0 = _quarter(rng.uniform(0.0, H - bh))
        else:
            raise ValueError(f"Unknown placement mode: {recipe.placement}")

        x1, y1 = x0 + bw, y0 + bh
        if x0 < 0 or y0 < 0 or x1 > W or y1 > H or not (x0 < x1 and y0 < y1):
            continue
        box = BBox(x0, y0, x1, y1)
        if recipe.overlap == "forbid" and any(intersection_area(box, p) > 0 for p in placed):
            continue
        return box

    raise PlacementInfeasible(
        f"Recipe seed {recipe.seed}: box {index + 1}/{total} not placed in "
        f"{MAX_PLACEMENT_TRIES} tries"
    )


# =============================================================================
# Recipe suites
# =============================================================================

VOCABULARY = ("bicycle", "bus", "car", "person", "traffic light", "truck")


def random_recipe(seed: int, with_depth: bool = False) -> SceneRecipe:
    """
    A varied recipe derived from seed: vocabulary size, counts, placement
    and overlap policy all change with it.
    """
    rng = np.random.default_rng([seed, 7919])
    n_classes = int(rng.integers(1, len(VOCABULARY) + 1))
    chosen = sorted(rng.choice(len(VOCABULARY), size=n_classes, replace=False).tolist())
    placement = ("uniform", "uniform", "row", "cluster", "left_right")[int(rng.integers(0, 5))]
    dense = placement in ("cluster", "row")
    counts = {
        VOCABULARY[i]: (0, int(rng.integers(1, 7 if dense else 5))) for i in chosen
    }
    sparse = sum(hi for _, hi in counts.values()) <= 8
    forbid = placement == "left_right" or (placement == "uniform" and sparse and rng.random() < 0.5)
    return SceneRecipe(
        seed=seed,
        counts=counts,
        placement=placement,
        row_y=float(rng.integers(100, 380)),
        jitter=float(rng.choice([0.0, 0.0, 2.0, 30.0])),
        cluster_center=(float(rng.integers(150, 490)), float(rng.integers(120, 360))),
        cluster_radius=float(rng.choice([10.0, 20.0, 60.0])),
        overlap="forbid" if forbid else "allow",
        box_size=(10.0, 60.0) if dense else (10.0, 160.0),
        depth_range=(1.0, 80.0) if with_depth else None,
    )


def recipe_suite(count: int, start: int = 0, with_depth: bool = False) -> list[SceneRecipe]:
    return [random_recipe(seed, with_depth) for seed in range(start, start + count)]
