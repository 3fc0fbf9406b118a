"""
Arrangement questions: objects in a row and tightly clustered groups.

Option text for a group of detections is their class labels, sorted and
comma-separated ("car, car, person").
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, islice
from typing import Iterable, Sequence

from vqasieve.data.descriptors import Category, QAPair, SceneRecord
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.base import TemplateBase, label_list
from vqasieve.templates.predicates import detections_at_least, min_detections
from vqasieve.utils.geometry import (
    DegenerateFit,
    compactness,
    density_clusters,
    fit_row,
    row_normalizer,
)
from vqasieve.utils.randomness import draw_distractors, question_rng, shuffle_options

NO_ROW_OPTION = "No clear row arrangement"
NO_CLUSTER_OPTION = "No clear clusters"


@dataclass(frozen=True)
class RowWindow:
    """A qualifying window of detections ordered by center x."""

    indices: tuple[int, ...]
    start: int
    variance: float


def group_labels(scene: SceneRecord, indices: Iterable[int]) -> tuple[str, ...]:
    return tuple(sorted(scene.detections[i].class_label for i in indices))


def group_text(scene: SceneRecord, indices: Iterable[int]) -> str:
    return label_list(group_labels(scene, indices))


def centers_of(scene: SceneRecord, indices: Iterable[int]) -> list[tuple[float, float]]:
    return [scene.detections[i].bbox.center for i in indices]


def row_variance(scene: SceneRecord, indices: Sequence[int], config: TemplateConfig) -> float | None:
    """Normalized residual variance of a line through the group's centers; None if degenerate."""
    normalizer = row_normalizer(scene.width, scene.height, config.row_normalization)
    try:
        return fit_row(centers_of(scene, indices), normalizer).normalized_residual_variance
    except DegenerateFit:
        return None


def qualifying_rows(scene: SceneRecord, config: TemplateConfig) -> list[RowWindow]:
    """
    Every contiguous window of at least row_min_detections detections, in
    center-x order (ties by center y, then index), whose fit variance is
    below row_variance_threshold.
    """
    order = sorted(
        range(len(scene.detections)),
        key=lambda i: (*scene.detections[i].bbox.center, i),
    )
    rows = []
    for start in range(len(order)):
        for stop in range(start + config.row_min_detections, len(order) + 1):
            window = tuple(order[start:stop])
            variance = row_variance(scene, window, config)
            if variance is not None and variance < config.row_variance_threshold:
                rows.append(RowWindow(indices=window, start=start, variance=variance))
    return rows


def best_row(rows: Sequence[RowWindow]) -> RowWindow:
    """Lowest variance; ties prefer the longer window, then the leftmost."""
    return min(rows, key=lambda r: (r.variance, -len(r.indices), r.start))


def collect_distractors(
    scene: SceneRecord,
    size: int,
    config: TemplateConfig,
    is_admissible,
) -> list[str]:
    """
    Distinct option texts of detection groups that are wrong answers.

    Scans groups of `size` detections in index-combination order, examining
    at most distractor_search_limit of them and keeping at most
    distractor_pool_size texts.
    """
    pool: list[str] = []
    groups = combinations(range(len(scene.detections)), size)
    for group in islice(groups, config.distractor_search_limit):
        text = group_text(scene, group)
        if text in pool or not is_admissible(group, text):
            continue
        pool.append(text)
        if len(pool) >= config.distractor_pool_size:
            break
    return pool


class ObjectsInRow(TemplateBase):
    template_name = "ObjectsInRow"
    category = Category.SPATIAL_RELATIONS
    question_pattern = "Are there any objects arranged in a row?"

    def predicates(self):
        return [detections_at_least(self.config.row_min_detections)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not min_detections(scene, self.config.row_min_detections):
            return []
        rows = qualifying_rows(scene, self.config)
        objects = group_labels(scene, best_row(rows).indices) if rows else ()
        return [
            self.pair(scene, seed, self.question_pattern, "Yes" if rows else "No", objects)
        ]


class ObjectsInLine(TemplateBase):
    template_name = "ObjectsInLine"
    category = Category.SPATIAL_RELATIONS
    question_pattern = (
        "Which objects appear to be arranged in a row? A) {option_a}, B) {option_b}, "
        "C) {option_c}, D) No clear row arrangement. Respond with the letter only."
    )

    def predicates(self):
        return [detections_at_least(self.config.row_min_detections)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not min_detections(scene, self.config.row_min_detections):
            return []
        rows = qualifying_rows(scene, self.config)
        row_texts = {group_text(scene, r.indices) for r in rows}

        if rows:
            best = best_row(rows)
            correct = group_text(scene, best.indices)
            objects = group_labels(scene, best.indices)
            size, needed = len(best.indices), 2
        else:
            correct, objects = None, ()
            size, needed = self.config.row_min_detections, 3

        def is_admissible(group, text):
            if text in row_texts:
                return False
            variance = row_variance(scene, group, self.config)
            return variance is None or variance >= self.config.row_variance_threshold

        pool = collect_distractors(scene, size, self.config, is_admissible)
        if len(pool) < needed:
            return []

        rng = question_rng(seed, self.template_id)
        distractors = draw_distractors(pool, needed, rng)
        choices, answer = shuffle_options(correct, distractors, NO_ROW_OPTION, rng)
        question = self.question_pattern.format(
            option_a=choices[0], option_b=choices[1], option_c=choices[2]
        )
        return [self.pair(scene, seed, question, answer, objects, choices=choices)]


class MostClusteredObjects(TemplateBase):
    """
    Density clustering of detection centers (eps = eps_frac x image
    diagonal). Clusters with fewer than min_pts members are ignored; the
    most compact one (lowest mean pairwise center distance) is the answer.
    """

    template_name = "MostClusteredObjects"
    category = Category.SPATIAL_RELATIONS
    question_pattern = (
        "Which group of objects appears most tightly clustered? A) {option_a}, "
        "B) {option_b}, C) {option_c}, D) No clear clusters. Respond with the letter only."
    )

    def predicates(self):
        return [detections_at_least(self.config.cluster_min_detections)]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        if not min_detections(scene, self.config.cluster_min_detections):
            return []

        centers = centers_of(scene, range(len(scene.detections)))
        eps = self.config.eps_frac * math.hypot(scene.width, scene.height)
        clusters = density_clusters(centers, eps, self.config.min_pts).clusters
        eligible = [c for c in clusters if len(c) >= self.config.min_pts]

        if eligible:
            best = min(
                eligible,
                key=lambda c: (compactness([centers[i] for i in c]), group_text(scene, c)),
            )
            correct = group_text(scene, best)
            objects = group_labels(scene, best)
            size, needed = len(best), 2
        else:
            correct, objects = None, ()
            size, needed = 3, 3

        members = [set(c) for c in clusters]

        def is_admissible(group, text):
            if text == correct:
                return False
            return not any(set(group) <= m for m in members)

        pool = collect_distractors(scene, size, self.config, is_admissible)
        if len(pool) < needed:
            return []

        rng = question_rng(seed, self.template_id)
        distractors = draw_distractors(pool, needed, rng)
        choices, answer = shuffle_options(correct, distractors, NO_CLUSTER_OPTION, rng)
        question = self.question_pattern.format(
            option_a=choices[0], option_b=choices[1], option_c=choices[2]
        )
        return [self.pair(scene, seed, question, answer, objects, choices=choices)]


def realize_arrangement(
    scene: SceneRecord, config: TemplateConfig | None = None, seed: int = 0
) -> list[QAPair]:
    """ObjectsInRow, ObjectsInLine and MostClusteredObjects for one scene."""
    pairs: list[QAPair] = []
    for cls in (ObjectsInRow, ObjectsInLine, MostClusteredObjects):
        pairs.extend(cls(config).apply(scene, seed))
    return pairs
