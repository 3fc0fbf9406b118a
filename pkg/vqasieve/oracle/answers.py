"""
Oracle Answers

Brute-force re-derivation of every template's questions and answers.

Nothing here calls the template library: each rule is written out again
from its definition, enumerating every pair, window and cluster with no
sieve and no early exits. Only the scene model, the geometry primitives
(iou, thirds, grid cells, aspect, line fit) and the seeded option
helpers are shared, so a wrong emission rule on either side shows up as a
disagreement.
"""

from __future__ import annotations

import math
import re
from collections import deque
from itertools import combinations, islice
from typing import Callable

from vqasieve.data.descriptors import Category, QAPair, SceneRecord
from vqasieve.project.config import TemplateConfig
from vqasieve.utils.geometry import (
    Aspect,
    DegenerateFit,
    GridSpec,
    Third,
    aspect_exceeds,
    fit_row,
    grid_cell,
    iou,
    row_normalizer,
    third_assignment,
)
from vqasieve.utils.randomness import draw_distractors, question_rng, shuffle_options

_ID = re.compile(r"^([A-Za-z_]\w*)(?:\(([\d,\s]*)\))?$")


def _split_id(template_id: str) -> tuple[str, list[int]]:
    match = _ID.match(template_id.replace(" ", ""))
    if not match:
        raise ValueError(f"Malformed template id: {template_id}")
    args = [int(a) for a in match.group(2).split(",")] if match.group(2) else []
    return match.group(1), args


def _counts(scene: SceneRecord) -> dict[str, int]:
    counts: dict[str, int] = {}
    for det in scene.detections:
        counts[det.class_label] = counts.get(det.class_label, 0) + 1
    return counts


def _of_class(scene: SceneRecord, label: str):
    return [d for d in scene.detections if d.class_label == label]


def _has_disjoint_cross_pair(scene: SceneRecord) -> bool:
    dets = scene.detections
    return any(
        dets[i].class_label != dets[j].class_label and iou(dets[i].bbox, dets[j].bbox) == 0.0
        for i in range(len(dets))
        for j in range(len(dets))
        if i != j
    )


def _yn(flag: bool) -> str:
    return "Yes" if flag else "No"


class _Emitter:
    """Collects QAPairs for one (scene, template id)."""

    def __init__(self, scene: SceneRecord, template_id: str, category: Category, seed: int):
        self.scene = scene
        self.template_id = template_id
        self.category = category
        self.seed = seed
        self.pairs: list[QAPair] = []

    def emit(self, question, answer, objects=(), choices=None):
        self.pairs.append(
            QAPair(
                image_id=self.scene.image_id,
                template_id=self.template_id,
                category=self.category,
                question=question,
                answer=answer,
                choices=tuple(choices) if choices is not None else None,
                objects_involved=tuple(objects),
                generation_seed=self.seed,
            )
        )


# =============================================================================
# Localization and aspect
# =============================================================================


def _is_object_centered(out: _Emitter, cfg: TemplateConfig):
    for label, n in sorted(_counts(out.scene).items()):
        if n != 1:
            continue
        third = third_assignment(_of_class(out.scene, label)[0].bbox, out.scene.width, cfg.buffer_frac)
        if third is Third.SPANNING:
            continue
        out.emit(
            f"Divide the image into thirds. In which third does the {label} primarily appear? "
            "Respond with the letter only: A) left third, B) middle third, C) right third.",
            third.value,
            (label,),
            ("left third", "middle third", "right third"),
        )


def _quadrants(out: _Emitter, cfg: TemplateConfig, rows: int = 2, cols: int = 2):
    grid = GridSpec(rows, cols)
    for label, n in sorted(_counts(out.scene).items()):
        if n != 1:
            continue
        box = _of_class(out.scene, label)[0].bbox
        cell = grid_cell(box, out.scene.width, out.scene.height, grid, cfg.grid_margin_frac)
        if cell is None:
            continue
        out.emit(
            f"Divide the image into a grid of {rows} rows x {cols} columns. Number the cells "
            "from left to right, then top to bottom, starting with 1. In what cell does the "
            f"{label} appear?",
            str(cell),
            (label,),
        )


def _aspect_answer(box, cfg: TemplateConfig) -> bool | None:
    """True for clearly wider, False for clearly taller, None for near-square."""
    aspect = aspect_exceeds(box, cfg.aspect_ratio_threshold)
    if aspect is Aspect.NEAR_SQUARE:
        return None
    return aspect is Aspect.WIDER


def _width_vs_height(out: _Emitter, cfg: TemplateConfig):
    for label, n in sorted(_counts(out.scene).items()):
        if n != 1:
            continue
        wider = _aspect_answer(_of_class(out.scene, label)[0].bbox, cfg)
        if wider is None:
            continue
        if cfg.reversed_aspect_phrasing:
            out.emit(
                f"Does the height of the {label} appear to be larger than the width?",
                _yn(not wider),
                (label,),
            )
        else:
            out.emit(
                f"Does the width of the {label} appear to be larger than the height?",
                _yn(wider),
                (label,),
            )


# =============================================================================
# Extremes
# =============================================================================


def _extreme(scene: SceneRecord, side: str, cfg: TemplateConfig):
    """(winner, runner-up) by brute force, or None when ambiguous."""
    dets = list(scene.detections)
    if not dets:
        return None
    if side == "left":
        edge = [d.bbox.x_min for d in dets]
        best = min(edge)
    else:
        edge = [-d.bbox.x_max for d in dets]
        best = min(edge)
    leaders = [i for i, e in enumerate(edge) if e == best]
    if len(leaders) > 1 and len(dets) > 1:
        return None
    winner = dets[leaders[0]]

    half = scene.width / 2.0
    if cfg.half_image_rule:
        inside = winner.bbox.x_max < half if side == "left" else winner.bbox.x_min > half
        if not inside:
            return None

    rest = [i for i in range(len(dets)) if i != leaders[0]]
    if not rest:
        return winner, None
    second = min(edge[i] for i in rest)
    if not (second - best > 0 and second - best >= cfg.separation_margin_px):
        return None
    runner_up = dets[next(i for i in rest if edge[i] == second)]
    return winner, runner_up


def _most(out: _Emitter, cfg: TemplateConfig, side: str):
    if not any(n == 1 for n in _counts(out.scene).values()):
        return
    found = _extreme(out.scene, side, cfg)
    if found is None:
        return
    label = found[0].class_label
    word = "leftmost" if side == "left" else "rightmost"
    out.emit(f"What is the {word} object in the image?", label, (label,))


def _most_aspect(out: _Emitter, cfg: TemplateConfig, side: str):
    counts = _counts(out.scene)
    if not any(n == 1 for n in counts.values()):
        return
    found = _extreme(out.scene, side, cfg)
    if found is None:
        return
    winner, runner_up = found
    if counts[winner.class_label] != 1:
        return
    if runner_up is not None and iou(winner.bbox, runner_up.bbox) > 0.0:
        return
    wider = _aspect_answer(winner.bbox, cfg)
    if wider is None:
        return
    word = "leftmost" if side == "left" else "rightmost"
    if cfg.reversed_aspect_phrasing:
        question = f"Does the {word} object in the image appear to be taller than it is wide?"
        answer = _yn(not wider)
    else:
        question = f"Does the {word} object in the image appear to be wider than it is tall?"
        answer = _yn(wider)
    out.emit(question, answer, (winner.class_label,))


# =============================================================================
# Size and frequency
# =============================================================================


def _clear_ranking(values: dict[str, float], k: int, ratio: float, descending: bool):
    """Top-k labels when every neighbour among the first k+1 is ratio apart."""
    if len(values) < k:
        return None
    sign = -1.0 if descending else 1.0
    order = sorted(values, key=lambda label: (sign * values[label], label))
    for i in range(min(k, len(order) - 1)):
        a, b = values[order[i]], values[order[i + 1]]
        big, small = (a, b) if descending else (b, a)
        if not big >= ratio * small:
            return None
    return order[:k]


def _largest_areas(scene: SceneRecord) -> dict[str, float]:
    areas: dict[str, float] = {}
    for det in scene.detections:
        areas[det.class_label] = max(areas.get(det.class_label, 0.0), det.bbox.area)
    return areas


def _largest_appearance(out: _Emitter, cfg: TemplateConfig):
    areas = _largest_areas(out.scene)
    if len(areas) < 2:
        return
    top = _clear_ranking(areas, 1, cfg.area_margin_ratio, descending=True)
    if top:
        out.emit(
            "If you were to draw a tight box around each object in the image, which type of "
            "object would have the biggest box?",
            top[0],
            top,
        )


def _rank_largest_k(out: _Emitter, cfg: TemplateConfig, k: int = 3):
    ranking = _clear_ranking(_largest_areas(out.scene), k, cfg.rank_gap_ratio, descending=True)
    if ranking:
        out.emit(
            f"Rank the {k} kinds of objects that appear the largest (by pixel area) in the image "
            "from largest to smallest. Provide your answer as a comma-separated list of object "
            "names only.",
            ", ".join(ranking),
            ranking,
        )


def _most_appearance(out: _Emitter, cfg: TemplateConfig):
    counts = _counts(out.scene)
    if len(counts) < 2:
        return
    top = max(counts.values())
    leaders = sorted(label for label, n in counts.items() if n == top)
    runner_up = max(n for label, n in counts.items() if label != leaders[0])
    if top >= cfg.count_margin_ratio * runner_up:
        out.emit(
            "What kind of object appears the most frequently in the image?",
            leaders[0],
            (leaders[0],),
        )


def _least_appearance(out: _Emitter, cfg: TemplateConfig):
    counts = _counts(out.scene)
    if len(counts) < 2:
        return
    bottom = min(counts.values())
    trailers = sorted(label for label, n in counts.items() if n == bottom)
    runner_up = min(n for label, n in counts.items() if label != trailers[0])
    if runner_up >= cfg.count_margin_ratio * bottom:
        out.emit(
            "What kind of object appears the least frequently in the image?",
            trailers[0],
            (trailers[0],),
        )


# =============================================================================
# Directional
# =============================================================================


def _directional(out: _Emitter, cfg: TemplateConfig, side: str):
    labels = sorted(_counts(out.scene))
    if len(labels) < 2 or not _has_disjoint_cross_pair(out.scene):
        return
    word = "right" if side == "right" else "left"
    for c1 in labels:
        for c2 in labels:
            if c1 == c2:
                continue
            found = False
            for a in _of_class(out.scene, c1):
                for b in _of_class(out.scene, c2):
                    if side == "right":
                        beyond = a.bbox.x_min > b.bbox.x_max
                    else:
                        beyond = a.bbox.x_max < b.bbox.x_min
                    if not beyond or iou(a.bbox, b.bbox) != 0.0:
                        continue
                    if cfg.vertical_overlap_gate:
                        shared = min(a.bbox.y_max, b.bbox.y_max) - max(a.bbox.y_min, b.bbox.y_min)
                        limit = cfg.vertical_overlap_fraction * min(a.bbox.height, b.bbox.height)
                        if shared < limit:
                            continue
                    found = True
            out.emit(
                f"Is there at least one {c1} to the {word} of any {c2}?",
                _yn(found),
                (c1, c2),
            )


# =============================================================================
# Counting
# =============================================================================


def _how_many(out: _Emitter, cfg: TemplateConfig):
    for label, n in sorted(_counts(out.scene).items()):
        out.emit(f"How many {label}(s) are there in this image?", str(n), (label,))


def _are_more(out: _Emitter, cfg: TemplateConfig):
    counts = _counts(out.scene)
    for c1 in sorted(counts):
        for c2 in sorted(counts):
            if c1 == c2:
                continue
            n1, n2 = counts[c1], counts[c2]
            big, small = max(n1, n2), min(n1, n2)
            if big >= cfg.count_margin_ratio * small:
                out.emit(f"Are there more {c1}(s) than {c2}(s)?", _yn(n1 > n2), (c1, c2))


def _which_more(out: _Emitter, cfg: TemplateConfig):
    counts = _counts(out.scene)
    for trio in combinations(sorted(counts), 3):
        best = max(counts[t] for t in trio)
        winners = sorted(t for t in trio if counts[t] == best)
        if len(winners) > 1:
            continue
        second = max(counts[t] for t in trio if t != winners[0])
        if best >= cfg.count_margin_ratio * second:
            out.emit(
                f"What appears the most in this image: {trio[0]}s, {trio[1]}s, or {trio[2]}s?",
                winners[0],
                trio,
            )


def _targets(n: int, r: float) -> tuple[int, int]:
    return max(1, math.ceil(n / r)), math.ceil(n * r)


def _more_than(out: _Emitter, cfg: TemplateConfig):
    for label, n in sorted(_counts(out.scene).items()):
        for target in _targets(n, cfg.threshold_question_ratio):
            out.emit(
                f"Are there {target} or more {label}(s) in this image? Respond Yes/No.",
                _yn(n >= target),
                (label,),
            )


def _less_than(out: _Emitter, cfg: TemplateConfig):
    for label, n in sorted(_counts(out.scene).items()):
        low, high = _targets(n, cfg.threshold_question_ratio)
        for target in (high, low):
            if target == 1:
                question = f"Are there no {label}(s) in this image? Respond Yes/No."
            else:
                question = f"Are there less than {target} {label}(s) in this image? Respond Yes/No."
            out.emit(question, _yn(n < target), (label,))


def _multi_choice_how_many(out: _Emitter, cfg: TemplateConfig):
    for label, n in sorted(_counts(out.scene).items()):
        if n < cfg.multichoice_min_count:
            continue
        rng = question_rng(out.seed, out.template_id, label)
        width = max(1, math.ceil(math.sqrt(n)))
        span = 2 * width + 1
        start = max(1, n - int(rng.integers(0, span)))
        own = (start, start + span - 1)
        if start - span >= 1:
            below = (start - span, start - 1)
            above = (own[1] + 1, own[1] + span)
            others = [below, above]
        else:
            others = [(own[1] + 1, own[1] + span), (own[1] + span + 1, own[1] + 2 * span)]
        text = [f"{lo}-{hi}" for lo, hi in [own] + others]
        choices, answer = shuffle_options(text[0], text[1:], "Unsure / Not Visible", rng)
        out.emit(
            f"How many {label}(s) are in the image? Choose one: A) {choices[0]}, "
            f"B) {choices[1]}, C) {choices[2]}, D) Unsure / Not Visible. "
            "Respond with the letter only.",
            answer,
            (label,),
            choices,
        )


# =============================================================================
# Arrangement
# =============================================================================


def _labels_of(scene: SceneRecord, group) -> tuple[str, ...]:
    return tuple(sorted(scene.detections[i].class_label for i in group))


def _variance(scene: SceneRecord, group, cfg: TemplateConfig) -> float | None:
    centers = [scene.detections[i].bbox.center for i in group]
    try:
        fit = fit_row(centers, row_normalizer(scene.width, scene.height, cfg.row_normalization))
    except DegenerateFit:
        return None
    return fit.normalized_residual_variance


def _all_rows(scene: SceneRecord, cfg: TemplateConfig):
    """Every qualifying contiguous window in center order as (variance, -size, start, group)."""
    order = sorted(
        range(len(scene.detections)),
        key=lambda i: (scene.detections[i].bbox.center[0], scene.detections[i].bbox.center[1], i),
    )
    rows = []
    for start in range(len(order)):
        for size in range(cfg.row_min_detections, len(order) - start + 1):
            group = order[start : start + size]
            v = _variance(scene, group, cfg)
            if v is not None and v < cfg.row_variance_threshold:
                rows.append((v, -size, start, tuple(group)))
    return rows


def _wrong_options(scene, size, cfg, admissible: Callable) -> list[str]:
    pool: list[str] = []
    for group in islice(combinations(range(len(scene.detections)), size), cfg.distractor_search_limit):
        text = ", ".join(_labels_of(scene, group))
        if text not in pool and admissible(group, text):
            pool.append(text)
            if len(pool) == cfg.distractor_pool_size:
                break
    return pool


def _multiple_choice(out: _Emitter, question, correct, objects, pool, needed, fallback):
    if len(pool) < needed:
        return
    rng = question_rng(out.seed, out.template_id)
    picked = draw_distractors(pool, needed, rng)
    choices, answer = shuffle_options(correct, picked, fallback, rng)
    out.emit(question.format(*choices[:3]), answer, objects, choices)


def _objects_in_row(out: _Emitter, cfg: TemplateConfig):
    if len(out.scene.detections) < cfg.row_min_detections:
        return
    rows = _all_rows(out.scene, cfg)
    objects = _labels_of(out.scene, min(rows)[3]) if rows else ()
    out.emit("Are there any objects arranged in a row?", _yn(bool(rows)), objects)


def _objects_in_line(out: _Emitter, cfg: TemplateConfig):
    scene = out.scene
    if len(scene.detections) < cfg.row_min_detections:
        return
    rows = _all_rows(scene, cfg)
    row_texts = {", ".join(_labels_of(scene, r[3])) for r in rows}
    if rows:
        best = min(rows)[3]
        correct, objects, size, needed = ", ".join(_labels_of(scene, best)), _labels_of(scene, best), len(best), 2
    else:
        correct, objects, size, needed = None, (), cfg.row_min_detections, 3

    def admissible(group, text):
        if text in row_texts:
            return False
        v = _variance(scene, group, cfg)
        return v is None or v >= cfg.row_variance_threshold

    _multiple_choice(
        out,
        "Which objects appear to be arranged in a row? A) {}, B) {}, C) {}, "
        "D) No clear row arrangement. Respond with the letter only.",
        correct,
        objects,
        _wrong_options(scene, size, cfg, admissible),
        needed,
        "No clear row arrangement",
    )


def _brute_clusters(points, eps: float, min_pts: int) -> list[tuple[int, ...]]:
    """Density clusters by exhaustive neighbourhood search and breadth-first expansion."""
    n = len(points)
    near = [
        [j for j in range(n) if math.dist(points[i], points[j]) <= eps] for i in range(n)
    ]
    core = [len(near[i]) >= min_pts for i in range(n)]

    component = [-1] * n
    count = 0
    for i in range(n):
        if not core[i] or component[i] >= 0:
            continue
        component[i] = count
        queue = deque([i])
        while queue:
            p = queue.popleft()
            for q in near[p]:
                if core[q] and component[q] < 0:
                    component[q] = count
                    queue.append(q)
        count += 1

    assigned = list(component)
    for i in range(n):
        if core[i]:
            continue
        cores = [j for j in near[i] if core[j]]
        if cores:
            nearest = min(
                cores, key=lambda j: (math.dist(points[i], points[j]), points[j][0], points[j][1])
            )
            assigned[i] = component[nearest]

    groups: dict[int, list[int]] = {}
    for i, c in enumerate(assigned):
        if c >= 0:
            groups.setdefault(c, []).append(i)
    return sorted(tuple(sorted(g)) for g in groups.values())


def _mean_pairwise(points) -> float:
    dists = [math.dist(a, b) for a, b in combinations(points, 2)]
    return sum(dists) / len(dists)


def _most_clustered(out: _Emitter, cfg: TemplateConfig):
    scene = out.scene
    if len(scene.detections) < cfg.cluster_min_detections:
        return
    points = [d.bbox.center for d in scene.detections]
    eps = cfg.eps_frac * math.hypot(scene.width, scene.height)
    clusters = _brute_clusters(points, eps, cfg.min_pts)
    eligible = [c for c in clusters if len(c) >= cfg.min_pts]

    if eligible:
        scored = [
            (_mean_pairwise([points[i] for i in c]), ", ".join(_labels_of(scene, c)), c)
            for c in eligible
        ]
        _, correct, best = min(scored, key=lambda s: (s[0], s[1]))
        objects, size, needed = _labels_of(scene, best), len(best), 2
    else:
        correct, objects, size, needed = None, (), 3, 3

    def admissible(group, text):
        return text != correct and not any(set(group) <= set(c) for c in clusters)

    _multiple_choice(
        out,
        "Which group of objects appears most tightly clustered? A) {}, B) {}, C) {}, "
        "D) No clear clusters. Respond with the letter only.",
        correct,
        objects,
        _wrong_options(scene, size, cfg, admissible),
        needed,
        "No clear clusters",
    )


# =============================================================================
# Depth
# =============================================================================


def _depth_of(det) -> float:
    return det.depth_summary.representative_depth


def _depth_pair(out: _Emitter, cfg: TemplateConfig, closer: bool):
    scene = out.scene
    labels = sorted(_counts(scene))
    if not scene.has_depth or len(labels) < 2 or not _has_disjoint_cross_pair(scene):
        return
    m = cfg.depth_margin_ratio
    for c1 in labels:
        for c2 in labels:
            if c1 == c2:
                continue
            yes = no = False
            for a in _of_class(scene, c1):
                for b in _of_class(scene, c2):
                    if iou(a.bbox, b.bbox) != 0.0:
                        continue
                    da, db = _depth_of(a), _depth_of(b)
                    near_far = db >= m * da
                    far_near = da >= m * db
                    asked, opposite = (near_far, far_near) if closer else (far_near, near_far)
                    if asked:
                        yes = True
                    elif opposite:
                        no = True
            if yes or no:
                if closer:
                    question = f"Is there at least one {c1} that appears closer to the camera than any {c2}?"
                else:
                    question = f"Is there at least one {c1} that appears farther from the camera than any {c2}?"
                out.emit(question, _yn(yes), (c1, c2))


def _depth_ranking(out: _Emitter, cfg: TemplateConfig, k: int = 3):
    scene = out.scene
    if not scene.has_depth:
        return
    nearest: dict[str, float] = {}
    for det in scene.detections:
        d = _depth_of(det)
        nearest[det.class_label] = min(nearest.get(det.class_label, d), d)
    ranking = _clear_ranking(nearest, k, cfg.depth_margin_ratio, descending=False)
    if ranking:
        out.emit(
            f"Rank the {k} kinds of objects that appear the closest to the camera in the image "
            "from closest to farthest. Provide your answer as a comma-separated list of object "
            "names only.",
            ", ".join(ranking),
            ranking,
        )


# =============================================================================
# Dispatch
# =============================================================================

_RULES: dict[str, tuple[Category, Callable]] = {
    "IsObjectCentered": (Category.LOCALIZATION, _is_object_centered),
    "Quadrants": (Category.LOCALIZATION, _quadrants),
    "WidthVsHeight": (Category.SIZE_ASPECT, _width_vs_height),
    "LeftMost": (Category.RANKING_EXTREMES, lambda o, c: _most(o, c, "left")),
    "RightMost": (Category.RANKING_EXTREMES, lambda o, c: _most(o, c, "right")),
    "LeftMostWidthVsHeight": (Category.SIZE_ASPECT, lambda o, c: _most_aspect(o, c, "left")),
    "RightMostWidthVsHeight": (Category.SIZE_ASPECT, lambda o, c: _most_aspect(o, c, "right")),
    "LargestAppearance": (Category.RANKING_EXTREMES, _largest_appearance),
    "RankLargestK": (Category.RANKING_EXTREMES, _rank_largest_k),
    "MostAppearance": (Category.RANKING_EXTREMES, _most_appearance),
    "LeastAppearance": (Category.RANKING_EXTREMES, _least_appearance),
    "LeftOf": (Category.SPATIAL_RELATIONS, lambda o, c: _directional(o, c, "left")),
    "RightOf": (Category.SPATIAL_RELATIONS, lambda o, c: _directional(o, c, "right")),
    "HowMany": (Category.COUNTING, _how_many),
    "AreMore": (Category.COUNTING, _are_more),
    "WhichMore": (Category.COUNTING, _which_more),
    "MoreThanThresholdHowMany": (Category.COUNTING, _more_than),
    "LessThanThresholdHowMany": (Category.COUNTING, _less_than),
    "MultiChoiceHowMany": (Category.COUNTING, _multi_choice_how_many),
    "ObjectsInRow": (Category.SPATIAL_RELATIONS, _objects_in_row),
    "ObjectsInLine": (Category.SPATIAL_RELATIONS, _objects_in_line),
    "MostClusteredObjects": (Category.SPATIAL_RELATIONS, _most_clustered),
    "Closer": (Category.SPATIAL_RELATIONS, lambda o, c: _depth_pair(o, c, closer=True)),
    "Farther": (Category.SPATIAL_RELATIONS, lambda o, c: _depth_pair(o, c, closer=False)),
    "DepthRanking": (Category.RANKING_EXTREMES, _depth_ranking),
}

ORACLE_TEMPLATES = tuple(_RULES)

_DEFAULT_ARGS = {"Quadrants": [2, 2], "RankLargestK": [3], "DepthRanking": [3]}


def oracle_answers(
    scene: SceneRecord,
    template_id: str,
    config: TemplateConfig | None = None,
    seed: int = 0,
) -> list[QAPair]:
    """
    Every QA pair the named template should emit for a scene.

    Args:
        scene: Scene to question
        template_id: Built-in template id, e.g. "Quadrants(3,3)"
        config: Thresholds
        seed: Seed of this (scene, template) realization

    Returns:
        QA pairs in emission order
    """
    name, args = _split_id(template_id)
    if name not in _RULES:
        raise KeyError(f"No oracle rule for template {name}")
    category, rule = _RULES[name]
    args = args or _DEFAULT_ARGS.get(name, [])
    canonical = f"{name}({','.join(str(a) for a in args)})" if args else name
    out = _Emitter(scene, canonical, category, seed)
    rule(out, config or TemplateConfig(), *args)
    return out.pairs
