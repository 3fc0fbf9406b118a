"""
Depth questions: closer / farther between classes and ranking by closeness.

Depth values come from each detection's DepthSummary; a scene without a
summary on every detection cannot be asked (MissingDepthChannel).
"""

from __future__ import annotations

from itertools import permutations
from typing import Any, Dict, List

from vqasieve.data.descriptors import Category, QAPair, SceneRecord, class_groups
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.base import TemplateBase, label_list, ratio_at_least, require_depth
from vqasieve.templates.predicates import (
    NONOVERLAPPING_CROSS_PAIR,
    at_least_x_classes,
    classes_at_least,
    exists_nonoverlapping_cross_pair,
)
from vqasieve.utils.geometry import iou


def _depth(detection) -> float:
    return detection.depth_summary.representative_depth


class _DepthComparison(TemplateBase):
    """
    One question per ordered class pair (c1, c2), over non-overlapping pairs
    of their detections.

    Yes when some pair is decisive in the asked direction (depth ratio of at
    least depth_margin_ratio). Otherwise No when some pair is decisive the
    other way; when every pair falls inside the margin band the question is
    skipped.
    """

    category = Category.SPATIAL_RELATIONS
    requires_depth = True

    def predicates(self):
        return [classes_at_least(2), NONOVERLAPPING_CROSS_PAIR]

    def is_decisive(self, d1: float, d2: float) -> bool:
        """True when a c1 object at depth d1 is clearly in the asked relation to d2."""
        raise NotImplementedError

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        require_depth(scene)
        if not (at_least_x_classes(scene, 2) and exists_nonoverlapping_cross_pair(scene)):
            return []

        groups = class_groups(scene)
        pairs = []
        for c1, c2 in permutations(sorted(groups), 2):
            yes = no = False
            for a in groups[c1]:
                for b in groups[c2]:
                    if iou(a.bbox, b.bbox) != 0.0:
                        continue
                    if self.is_decisive(_depth(a), _depth(b)):
                        yes = True
                    elif self.is_decisive(_depth(b), _depth(a)):
                        no = True
            if not (yes or no):
                continue
            pairs.append(
                self.pair(
                    scene,
                    seed,
                    self.question_pattern.format(object_1=c1, object_2=c2),
                    "Yes" if yes else "No",
                    objects=(c1, c2),
                )
            )
        return pairs


class Closer(_DepthComparison):
    template_name = "Closer"
    question_pattern = (
        "Is there at least one {object_1} that appears closer to the camera than any {object_2}?"
    )

    def is_decisive(self, d1: float, d2: float) -> bool:
        return ratio_at_least(d2, d1, self.config.depth_margin_ratio)


class Farther(_DepthComparison):
    template_name = "Farther"
    question_pattern = (
        "Is there at least one {object_1} that appears farther from the camera than any {object_2}?"
    )

    def is_decisive(self, d1: float, d2: float) -> bool:
        return ratio_at_least(d1, d2, self.config.depth_margin_ratio)


class DepthRanking(TemplateBase):
    template_name = "DepthRanking"
    category = Category.RANKING_EXTREMES
    requires_depth = True
    question_pattern = (
        "Rank the {k} kinds of objects that appear the closest to the camera in the image "
        "from closest to farthest. Provide your answer as a comma-separated list of object "
        "names only."
    )

    @classmethod
    def get_parameters(cls) -> List[Dict[str, Any]]:
        return [{"name": "k", "type": "int", "min": 2, "max": 10, "default": 3}]

    @property
    def k(self) -> int:
        return self.params["k"]

    def predicates(self):
        return [classes_at_least(self.k)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        require_depth(scene)
        if not at_least_x_classes(scene, self.k):
            return []
        closest = {
            label: min(_depth(d) for d in dets) for label, dets in class_groups(scene).items()
        }
        by_depth = sorted(closest.items(), key=lambda item: (item[1], item[0]))
        checked = by_depth[: self.k + 1]
        for (_, nearer), (_, farther) in zip(checked, checked[1:]):
            if not ratio_at_least(farther, nearer, self.config.depth_margin_ratio):
                return []
        ranking = [label for label, _ in by_depth[: self.k]]
        return [
            self.pair(
                scene,
                seed,
                self.question_pattern.format(k=self.k),
                label_list(ranking),
                objects=tuple(ranking),
            )
        ]


def realize_depth(
    scene: SceneRecord, config: TemplateConfig | None = None, seed: int = 0, k: int = 3
) -> list[QAPair]:
    """
    Closer, Farther and DepthRanking(k) for one scene.

    Raises:
        MissingDepthChannel: The scene carries no depth for some detection
    """
    return (
        Closer(config).apply(scene, seed)
        + Farther(config).apply(scene, seed)
        + DepthRanking(config, k=k).apply(scene, seed)
    )
