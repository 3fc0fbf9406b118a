"""
MostAppearance / LeastAppearance - which class is clearly the most (least) frequent.
"""

from __future__ import annotations

from vqasieve.data.descriptors import Category, QAPair, SceneRecord, class_counts
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.base import TemplateBase, ratio_at_least
from vqasieve.templates.predicates import at_least_x_classes, classes_at_least


class MostAppearance(TemplateBase):
    template_name = "MostAppearance"
    category = Category.RANKING_EXTREMES
    question_pattern = "What kind of object appears the most frequently in the image?"

    def predicates(self):
        return [classes_at_least(2)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not at_least_x_classes(scene, 2):
            return []
        ranked = sorted(class_counts(scene).items(), key=lambda item: (-item[1], item[0]))
        (top, n_top), (_, n_second) = ranked[0], ranked[1]
        if not ratio_at_least(n_top, n_second, self.config.count_margin_ratio):
            return []
        return [self.pair(scene, seed, self.question_pattern, top, objects=(top,))]


class LeastAppearance(TemplateBase):
    template_name = "LeastAppearance"
    category = Category.RANKING_EXTREMES
    question_pattern = "What kind of object appears the least frequently in the image?"

    def predicates(self):
        return [classes_at_least(2)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not at_least_x_classes(scene, 2):
            return []
        ranked = sorted(class_counts(scene).items(), key=lambda item: (item[1], item[0]))
        (least, n_least), (_, n_second) = ranked[0], ranked[1]
        if not ratio_at_least(n_second, n_least, self.config.count_margin_ratio):
            return []
        return [self.pair(scene, seed, self.question_pattern, least, objects=(least,))]


def realize_frequency(
    scene: SceneRecord, config: TemplateConfig | None = None, seed: int = 0
) -> list[QAPair]:
    return MostAppearance(config).apply(scene, seed) + LeastAppearance(config).apply(scene, seed)
