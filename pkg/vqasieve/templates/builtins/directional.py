"""
LeftOf / RightOf - "Is there at least one X to the right of any Y?"
"""

from __future__ import annotations

from itertools import permutations

from vqasieve.data.descriptors import BBox, Category, QAPair, SceneRecord, class_groups
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.base import TemplateBase
from vqasieve.templates.predicates import (
    NONOVERLAPPING_CROSS_PAIR,
    at_least_x_classes,
    classes_at_least,
    exists_nonoverlapping_cross_pair,
)
from vqasieve.utils.geometry import (
    iou,
    strictly_left_of,
    strictly_right_of,
    vertical_overlap_ok,
)


class _DirectionalTemplate(TemplateBase):
    """
    One question per ordered pair of distinct classes (c1, c2).

    Yes when some c1 box is strictly beyond some c2 box with no overlap (and,
    with vertical_overlap_gate on, the two share enough vertical extent);
    No otherwise.
    """

    category = Category.SPATIAL_RELATIONS

    def predicates(self):
        return [classes_at_least(2), NONOVERLAPPING_CROSS_PAIR]

    def is_beyond(self, a: BBox, b: BBox) -> bool:
        raise NotImplementedError

    def witnesses(self, a: BBox, b: BBox) -> bool:
        if not self.is_beyond(a, b) or iou(a, b) != 0.0:
            return False
        if self.config.vertical_overlap_gate:
            return vertical_overlap_ok(a, b, self.config.vertical_overlap_fraction)
        return True

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not (at_least_x_classes(scene, 2) and exists_nonoverlapping_cross_pair(scene)):
            return []

        groups = class_groups(scene)
        pairs = []
        for c1, c2 in permutations(sorted(groups), 2):
            found = any(
                self.witnesses(d1.bbox, d2.bbox) for d1 in groups[c1] for d2 in groups[c2]
            )
            pairs.append(
                self.pair(
                    scene,
                    seed,
                    self.question_pattern.format(object_1=c1, object_2=c2),
                    "Yes" if found else "No",
                    objects=(c1, c2),
                )
            )
        return pairs


class RightOf(_DirectionalTemplate):
    template_name = "RightOf"
    question_pattern = "Is there at least one {object_1} to the right of any {object_2}?"

    def is_beyond(self, a: BBox, b: BBox) -> bool:
        return strictly_right_of(a, b)


class LeftOf(_DirectionalTemplate):
    template_name = "LeftOf"
    question_pattern = "Is there at least one {object_1} to the left of any {object_2}?"

    def is_beyond(self, a: BBox, b: BBox) -> bool:
        return strictly_left_of(a, b)


def realize_directional(
    scene: SceneRecord, config: TemplateConfig | None = None, seed: int = 0
) -> list[QAPair]:
    """LeftOf and RightOf questions of one scene."""
    return LeftOf(config).apply(scene, seed) + RightOf(config).apply(scene, seed)
