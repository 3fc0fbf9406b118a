"""
Counting questions: exact counts, pairwise and three-way comparisons,
threshold questions and multiple-choice count ranges.
"""

from __future__ import annotations

import math
from itertools import combinations, permutations

import numpy as np

from vqasieve.data.descriptors import Category, QAPair, SceneRecord, class_counts
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.base import TemplateBase, ratio_at_least
from vqasieve.templates.predicates import (
    ANY_DETECTION,
    at_least_x_classes,
    class_count_at_least,
    classes_at_least,
)
from vqasieve.utils.randomness import question_rng, shuffle_options

UNSURE_OPTION = "Unsure / Not Visible"


class _CountingTemplate(TemplateBase):
    category = Category.COUNTING

    def predicates(self):
        return [ANY_DETECTION]


class HowMany(_CountingTemplate):
    template_name = "HowMany"
    question_pattern = "How many {object_1}(s) are there in this image?"

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        return [
            self.pair(scene, seed, self.question_pattern.format(object_1=label), str(n), (label,))
            for label, n in sorted(class_counts(scene).items())
        ]


class AreMore(_CountingTemplate):
    template_name = "AreMore"
    question_pattern = "Are there more {object_1}(s) than {object_2}(s)?"

    def predicates(self):
        return [classes_at_least(2)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        counts = class_counts(scene)
        pairs = []
        for c1, c2 in permutations(sorted(counts), 2):
            n1, n2 = counts[c1], counts[c2]
            if not ratio_at_least(max(n1, n2), min(n1, n2), self.config.count_margin_ratio):
                continue
            pairs.append(
                self.pair(
                    scene,
                    seed,
                    self.question_pattern.format(object_1=c1, object_2=c2),
                    "Yes" if n1 > n2 else "No",
                    (c1, c2),
                )
            )
        return pairs


class WhichMore(_CountingTemplate):
    """
    Three-way comparison over every 3-class combination.

    Classes are listed alphabetically in the question so their order never
    hints at the answer.
    """

    template_name = "WhichMore"
    question_pattern = "What appears the most in this image: {object_1}s, {object_2}s, or {object_3}s?"

    def predicates(self):
        return [classes_at_least(2)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not at_least_x_classes(scene, 3):
            return []
        counts = class_counts(scene)
        pairs = []
        for trio in combinations(sorted(counts), 3):
            ranked = sorted(trio, key=lambda label: (-counts[label], label))
            if not ratio_at_least(
                counts[ranked[0]], counts[ranked[1]], self.config.count_margin_ratio
            ):
                continue
            question = self.question_pattern.format(
                object_1=trio[0], object_2=trio[1], object_3=trio[2]
            )
            pairs.append(self.pair(scene, seed, question, ranked[0], trio))
        return pairs


def threshold_targets(n: int, ratio: float) -> tuple[int, int]:
    """(target at or below n, target above n) for a count n >= 1."""
    return max(1, math.ceil(n / ratio)), math.ceil(n * ratio)


class MoreThanThresholdHowMany(_CountingTemplate):
    """Two questions per class: one target at or below the count (Yes), one above it (No)."""

    template_name = "MoreThanThresholdHowMany"
    question_pattern = "Are there {target} or more {object_1}(s) in this image? Respond Yes/No."

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        pairs = []
        for label, n in sorted(class_counts(scene).items()):
            low, high = threshold_targets(n, self.config.threshold_question_ratio)
            for target in (low, high):
                question = self.question_pattern.format(target=target, object_1=label)
                pairs.append(
                    self.pair(scene, seed, question, "Yes" if n >= target else "No", (label,))
                )
        return pairs


class LessThanThresholdHowMany(_CountingTemplate):
    """
    Mirror of MoreThanThresholdHowMany: "less than" the higher target is Yes.

    A lower target of 1 would ask "less than 1"; it is asked as a presence
    question instead.
    """

    template_name = "LessThanThresholdHowMany"
    question_pattern = "Are there less than {target} {object_1}(s) in this image? Respond Yes/No."
    presence_pattern = "Are there no {object_1}(s) in this image? Respond Yes/No."

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        pairs = []
        for label, n in sorted(class_counts(scene).items()):
            low, high = threshold_targets(n, self.config.threshold_question_ratio)
            for target in (high, low):
                if target == 1:
                    question = self.presence_pattern.format(object_1=label)
                else:
                    question = self.question_pattern.format(target=target, object_1=label)
                pairs.append(
                    self.pair(scene, seed, question, "Yes" if n < target else "No", (label,))
                )
        return pairs


def count_buckets(n: int, rng: np.random.Generator) -> tuple[list[tuple[int, int]], int]:
    """
    Three disjoint contiguous count ranges, exactly one holding n.

    Each range spans 2w + 1 integers with w = max(1, ceil(sqrt(n))). n lands
    at a seeded offset inside its range; the other two ranges sit below and
    above it when there is room for a whole range below (n's range is then
    the middle one), otherwise both sit above it.

    Returns:
        ([low, mid, high] as inclusive (lo, hi) tuples, index of n's range)
    """
    w = max(1, math.ceil(math.sqrt(n)))
    size = 2 * w + 1
    lo = n - int(rng.integers(0, size))
    if lo < 1:
        lo = 1
    hi = lo + size - 1

    if lo >= 1 + size:
        return [(lo - size, lo - 1), (lo, hi), (hi + 1, hi + size)], 1
    return [(lo, hi), (hi + 1, hi + size), (hi + size + 1, hi + 2 * size)], 0


def format_range(bucket: tuple[int, int]) -> str:
    return f"{bucket[0]}-{bucket[1]}"


class MultiChoiceHowMany(_CountingTemplate):
    template_name = "MultiChoiceHowMany"
    question_pattern = (
        "How many {object_1}(s) are in the image? Choose one: A) {range_a}, B) {range_b}, "
        "C) {range_c}, D) Unsure / Not Visible. Respond with the letter only."
    )

    def predicates(self):
        return [ANY_DETECTION, class_count_at_least(self.config.multichoice_min_count)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        pairs = []
        for label, n in sorted(class_counts(scene).items()):
            if n < self.config.multichoice_min_count:
                continue
            rng = question_rng(seed, self.template_id, label)
            buckets, true_index = count_buckets(n, rng)
            ranges = [format_range(b) for b in buckets]
            others = [r for i, r in enumerate(ranges) if i != true_index]
            choices, answer = shuffle_options(ranges[true_index], others, UNSURE_OPTION, rng)
            question = self.question_pattern.format(
                object_1=label, range_a=choices[0], range_b=choices[1], range_c=choices[2]
            )
            pairs.append(self.pair(scene, seed, question, answer, (label,), choices=choices))
        return pairs


def realize_counting(
    scene: SceneRecord, config: TemplateConfig | None = None, seed: int = 0
) -> list[QAPair]:
    """Every counting question of one scene."""
    pairs: list[QAPair] = []
    for cls in (
        HowMany,
        AreMore,
        WhichMore,
        MoreThanThresholdHowMany,
        LessThanThresholdHowMany,
        MultiChoiceHowMany,
    ):
        pairs.extend(cls(config).apply(scene, seed))
    return pairs
