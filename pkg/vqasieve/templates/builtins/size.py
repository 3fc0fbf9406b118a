"""
Size questions: biggest box, ranking by area, and width versus height.
"""

from __future__ import annotations

from typing import Any, Dict, List

from vqasieve.data.descriptors import Category, QAPair, SceneRecord, class_groups
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.base import TemplateBase, label_list, ratio_at_least
from vqasieve.templates.predicates import (
    SINGLE_INSTANCE_CLASS,
    at_least_x_classes,
    classes_at_least,
)
from vqasieve.utils.geometry import Aspect, aspect_exceeds


def max_area_by_class(scene: SceneRecord) -> list[tuple[str, float]]:
    """(label, largest single-instance box area), largest first, ties by label."""
    areas = {
        label: max(d.bbox.area for d in dets) for label, dets in class_groups(scene).items()
    }
    return sorted(areas.items(), key=lambda item: (-item[1], item[0]))


def ranked_with_gaps(values: list[tuple[str, float]], k: int, ratio: float) -> list[str] | None:
    """
    Top-k labels of a descending (label, value) ranking, or None when any
    neighbouring pair among the top k (or the k-th against the (k+1)-th) is
    closer than ratio.
    """
    if len(values) < k:
        return None
    checked = values[: k + 1]
    for (_, higher), (_, lower) in zip(checked, checked[1:]):
        if not ratio_at_least(higher, lower, ratio):
            return None
    return [label for label, _ in values[:k]]


class LargestAppearance(TemplateBase):
    template_name = "LargestAppearance"
    category = Category.RANKING_EXTREMES
    question_pattern = (
        "If you were to draw a tight box around each object in the image, "
        "which type of object would have the biggest box?"
    )

    def predicates(self):
        return [classes_at_least(2)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not at_least_x_classes(scene, 2):
            return []
        top = ranked_with_gaps(max_area_by_class(scene), 1, self.config.area_margin_ratio)
        if top is None:
            return []
        return [self.pair(scene, seed, self.question_pattern, top[0], objects=tuple(top))]


class RankLargestK(TemplateBase):
    template_name = "RankLargestK"
    category = Category.RANKING_EXTREMES
    question_pattern = (
        "Rank the {k} kinds of objects that appear the largest (by pixel area) in the "
        "image from largest to smallest. Provide your answer as a comma-separated list "
        "of object names only."
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
        if not at_least_x_classes(scene, self.k):
            return []
        ranking = ranked_with_gaps(max_area_by_class(scene), self.k, self.config.rank_gap_ratio)
        if ranking is None:
            return []
        return [
            self.pair(
                scene,
                seed,
                self.question_pattern.format(k=self.k),
                label_list(ranking),
                objects=tuple(ranking),
            )
        ]


class WidthVsHeight(TemplateBase):
    template_name = "WidthVsHeight"
    category = Category.SIZE_ASPECT
    question_pattern = "Does the width of the {object_1} appear to be larger than the height?"
    reversed_pattern = "Does the height of the {object_1} appear to be larger than the width?"

    def predicates(self):
        return [SINGLE_INSTANCE_CLASS]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        pairs = []
        for label, dets in sorted(class_groups(scene).items()):
            if len(dets) != 1:
                continue
            aspect = aspect_exceeds(dets[0].bbox, self.config.aspect_ratio_threshold)
            if aspect == Aspect.NEAR_SQUARE:
                continue
            wider = aspect == Aspect.WIDER
            if self.config.reversed_aspect_phrasing:
                pattern, yes = self.reversed_pattern, not wider
            else:
                pattern, yes = self.question_pattern, wider
            pairs.append(
                self.pair(
                    scene,
                    seed,
                    pattern.format(object_1=label),
                    "Yes" if yes else "No",
                    objects=(label,),
                )
            )
        return pairs


def realize_size(
    scene: SceneRecord, config: TemplateConfig | None = None, seed: int = 0, k: int = 3
) -> list[QAPair]:
    """LargestAppearance, RankLargestK(k) and WidthVsHeight for one scene."""
    return (
        LargestAppearance(config).apply(scene, seed)
        + RankLargestK(config, k=k).apply(scene, seed)
        + WidthVsHeight(config).apply(scene, seed)
    )
