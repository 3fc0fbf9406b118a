"""
vqasieve Template Predicates

Cheap scene-level preconditions checked before a template realizes
anything. A template lists its predicates in evaluation order; the runner
stops at the first one that fails.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Callable

from vqasieve.data.descriptors import SceneRecord, class_counts
from vqasieve.utils.geometry import iou


@dataclass(frozen=True)
class Predicate:
    """A named boolean check on a scene."""

    name: str
    check: Callable[[SceneRecord], bool]

    def __call__(self, scene: SceneRecord) -> bool:
        return bool(self.check(scene))


def at_least_x_classes(scene: SceneRecord, x: int) -> bool:
    """True iff the scene holds at least x distinct class labels."""
    return len({d.class_label for d in scene.detections}) >= x


def exists_nonoverlapping_cross_pair(scene: SceneRecord) -> bool:
    """True iff two detections of different classes have disjoint boxes."""
    for a, b in combinations(scene.detections, 2):
        if a.class_label != b.class_label and iou(a.bbox, b.bbox) == 0.0:
            return True
    return False


def single_instance_class_exists(scene: SceneRecord) -> bool:
    return any(n == 1 for n in class_counts(scene).values())


def min_detections(scene: SceneRecord, n: int) -> bool:
    if n < 1:
        raise ValueError(f"min_detections needs n >= 1, got {n}")
    return len(scene.detections) >= n


def max_class_count_at_least(scene: SceneRecord, n: int) -> bool:
    """True iff some class has at least n instances."""
    return any(count >= n for count in class_counts(scene).values())


def has_depth(scene: SceneRecord) -> bool:
    return scene.has_depth


# =============================================================================
# Predicate factories
# =============================================================================


def classes_at_least(x: int) -> Predicate:
    return Predicate(f"at_least_x_classes({x})", lambda s: at_least_x_classes(s, x))


def detections_at_least(n: int) -> Predicate:
    return Predicate(f"min_detections({n})", lambda s: min_detections(s, n))


def class_count_at_least(n: int) -> Predicate:
    return Predicate(f"max_class_count_at_least({n})", lambda s: max_class_count_at_least(s, n))


NONOVERLAPPING_CROSS_PAIR = Predicate(
    "exists_nonoverlapping_cross_pair", exists_nonoverlapping_cross_pair
)
SINGLE_INSTANCE_CLASS = Predicate(
    "single_instance_class_exists", single_instance_class_exists
)
ANY_DETECTION = detections_at_least(1)
