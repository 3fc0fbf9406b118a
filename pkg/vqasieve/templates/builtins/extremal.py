"""
Leftmost / rightmost object questions and their aspect variants.
"""

from __future__ import annotations

from vqasieve.data.descriptors import (
    Category,
    Detection,
    QAPair,
    SceneRecord,
    class_counts,
)
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.base import TemplateBase
from vqasieve.templates.predicates import SINGLE_INSTANCE_CLASS, single_instance_class_exists
from vqasieve.utils.geometry import Aspect, aspect_exceeds, iou


def extreme_detection(
    scene: SceneRecord, side: str, config: TemplateConfig
) -> tuple[Detection, Detection | None] | None:
    """
    The unambiguous leftmost (or rightmost) detection and its runner-up.

    Leftmost is ordered by x_min, rightmost by x_max. The winner must lie
    wholly in its half of the image when half_image_rule is on, and lead the
    runner-up by at least separation_margin_px (and by a positive gap).

    Returns:
        (winner, runner-up or None), or None when the extreme is ambiguous
    """
    if not scene.detections:
        return None
    half = scene.width / 2.0

    if side == "left":
        ordered = sorted(scene.detections, key=lambda d: d.bbox.x_min)
        first = ordered[0]
        if config.half_image_rule and not first.bbox.x_max < half:
            return None
        gap = ordered[1].bbox.x_min - first.bbox.x_min if len(ordered) > 1 else None
    else:
        ordered = sorted(scene.detections, key=lambda d: -d.bbox.x_max)
        first = ordered[0]
        if config.half_image_rule and not first.bbox.x_min > half:
            return None
        gap = first.bbox.x_max - ordered[1].bbox.x_max if len(ordered) > 1 else None

    if gap is not None and not (gap > 0 and gap >= config.separation_margin_px):
        return None
    return first, (ordered[1] if len(ordered) > 1 else None)


class _ExtremeTemplate(TemplateBase):
    category = Category.RANKING_EXTREMES
    side = "left"

    def predicates(self):
        return [SINGLE_INSTANCE_CLASS]


class LeftMost(_ExtremeTemplate):
    template_name = "LeftMost"
    question_pattern = "What is the leftmost object in the image?"
    side = "left"

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not single_instance_class_exists(scene):
            return []
        found = extreme_detection(scene, self.side, self.config)
        if found is None:
            return []
        label = found[0].class_label
        return [self.pair(scene, seed, self.question_pattern, label, objects=(label,))]


class RightMost(LeftMost):
    template_name = "RightMost"
    question_pattern = "What is the rightmost object in the image?"
    side = "right"


class LeftMostWidthVsHeight(_ExtremeTemplate):
    """
    Aspect question about the leftmost object.

    The leftmost detection must be the only instance of its class and must
    not overlap the runner-up; near-square boxes are skipped.
    """

    template_name = "LeftMostWidthVsHeight"
    category = Category.SIZE_ASPECT
    question_pattern = "Does the leftmost object in the image appear to be wider than it is tall?"
    reversed_pattern = "Does the leftmost object in the image appear to be taller than it is wide?"
    side = "left"

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not single_instance_class_exists(scene):
            return []
        found = extreme_detection(scene, self.side, self.config)
        if found is None:
            return []
        first, second = found
        if class_counts(scene)[first.class_label] != 1:
            return []
        if second is not None and iou(first.bbox, second.bbox) > 0.0:
            return []

        aspect = aspect_exceeds(first.bbox, self.config.aspect_ratio_threshold)
        if aspect == Aspect.NEAR_SQUARE:
            return []
        wider = aspect == Aspect.WIDER
        if self.config.reversed_aspect_phrasing:
            question, yes = self.reversed_pattern, not wider
        else:
            question, yes = self.question_pattern, wider
        return [
            self.pair(
                scene, seed, question, "Yes" if yes else "No", objects=(first.class_label,)
            )
        ]


class RightMostWidthVsHeight(LeftMostWidthVsHeight):
    template_name = "RightMostWidthVsHeight"
    question_pattern = "Does the rightmost object in the image appear to be wider than it is tall?"
    reversed_pattern = "Does the rightmost object in the image appear to be taller than it is wide?"
    side = "right"


def realize_extremal_position(
    scene: SceneRecord, config: TemplateConfig | None = None, seed: int = 0
) -> list[QAPair]:
    """LeftMost, RightMost and their width-vs-height variants for one scene."""
    pairs: list[QAPair] = []
    for cls in (LeftMost, RightMost, LeftMostWidthVsHeight, RightMostWidthVsHeight):
        pairs.extend(cls(config).apply(scene, seed))
    return pairs
