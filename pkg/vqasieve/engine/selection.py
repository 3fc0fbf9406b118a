"""
Corpus Selection

Frame selection, train/val splitting and balanced sampling of QA pairs.
"""

from __future__ import annotations

import logging
from collections import defaultdict
from typing import Iterable, Sequence

import numpy as np

from vqasieve.data.descriptors import QAPair, SceneRecord, Split, VqaSieveError, derive_seed

logger = logging.getLogger(__name__)


class EmptyTemplate(VqaSieveError):
    """Some enabled templates emitted no QA pairs, so no balanced sample exists."""

    def __init__(self, template_ids: Sequence[str]):
        self.template_ids = list(template_ids)
        super().__init__(f"No QA pairs for template(s): {', '.join(self.template_ids)}")


# =============================================================================
# Frame selection
# =============================================================================


def frame_select_score(scene: SceneRecord) -> float:
    """
    n_detections x (1 - largest box area / image area), clamped to >= 0.

    Favors frames with many objects, none of which fills the view.
    """
    if not scene.detections:
        return 0.0
    largest = max(d.bbox.area for d in scene.detections)
    return max(0.0, len(scene.detections) * (1.0 - largest / scene.image_area))


def select_frames(
    scenes: Iterable[SceneRecord],
    group_key: str = "segment",
    camera: str | None = None,
) -> list[SceneRecord]:
    """
    Keep the best-scoring frame of each group.

    Frames are grouped by attributes[group_key]; frames without that
    attribute form their own single-frame group. When camera is given, only
    frames whose "camera" attribute equals it are candidates. Ties go to the
    lexicographically smallest image_id.

    Returns:
        Selected scenes ordered by image_id
    """
    best: dict[str, tuple[float, str, SceneRecord]] = {}
    for scene in scenes:
        if camera is not None and scene.attributes.get("camera") != camera:
            continue
        group = scene.attributes.get(group_key)
        key = f"group:{group}" if group is not None else f"image:{scene.image_id}"
        candidate = (frame_select_score(scene), scene.image_id, scene)
        current = best.get(key)
        if (
            current is None
            or candidate[0] > current[0]
            or (candidate[0] == current[0] and candidate[1] < current[1])
        ):
            best[key] = candidate
    selected = sorted((entry[2] for entry in best.values()), key=lambda s: s.image_id)
    logger.info(f"Frame selection kept {len(selected)} frames from {len(best)} groups")
    return selected


# =============================================================================
# Splitting
# =============================================================================


def split_dataset(
    scenes: Iterable[SceneRecord], train_fraction: float, seed: int = 0
) -> dict[str, Split]:
    """
    Assign each image to train or val.

    The draw for an image is a seeded hash of its image_id, so the split is
    stable across runs and independent of corpus order. Splits the source
    already gave pass through.

    Returns:
        image_id -> Split
    """
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction must be in (0, 1), got {train_fraction}")
    assignment = {}
    for scene in scenes:
        if scene.source_split != Split.UNASSIGNED:
            assignment[scene.image_id] = scene.source_split
            continue
        u = derive_seed(seed, "split", scene.image_id) / 2.0**64
        assignment[scene.image_id] = Split.TRAIN if u < train_fraction else Split.VAL
    return assignment


def partition_pairs(
    pairs: Iterable[QAPair], assignment: dict[str, Split]
) -> dict[str, list[QAPair]]:
    """Group pairs by the split of their image; order within a split is kept."""
    parts: dict[str, list[QAPair]] = {Split.TRAIN.value: [], Split.VAL.value: []}
    for pair in pairs:
        parts[assignment[pair.image_id].value].append(pair)
    return parts


# =============================================================================
# Balanced sampling
# =============================================================================


def balanced_sample(
    pairs: Iterable[QAPair],
    seed: int = 0,
    template_ids: Sequence[str] | None = None,
) -> list[QAPair]:
    """
    Equal-size seeded sample from every template.

    m is the pair count of the rarest template; exactly m pairs are drawn
    uniformly without replacement from each.

    Args:
        pairs: QA pairs to sample from
        seed: Sampling seed
        template_ids: Templates that must be represented (defaults to those
            present in pairs)

    Returns:
        m x template-count pairs in canonical order

    Raises:
        EmptyTemplate: Some listed template has no pairs
    """
    by_template: dict[str, list[QAPair]] = defaultdict(list)
    for pair in pairs:
        by_template[pair.template_id].append(pair)

    wanted = sorted(template_ids) if template_ids is not None else sorted(by_template)
    missing = [t for t in wanted if not by_template.get(t)]
    if missing:
        raise EmptyTemplate(missing)
    if not wanted:
        return []

    m = min(len(by_template[t]) for t in wanted)
    sample: list[QAPair] = []
    for template_id in wanted:
        group = sorted(by_template[template_id], key=QAPair.sort_key)
        rng = np.random.default_rng(derive_seed(seed, "sample", template_id))
        picks = rng.choice(len(group), size=m, replace=False)
        sample.extend(group[int(i)] for i in picks)
    sample.sort(key=QAPair.sort_key)
    return sample
