"""
Localization questions: which third of the image, which grid cell.
"""

from __future__ import annotations

from typing import Any, Dict, List

from vqasieve.data.descriptors import Category, QAPair, SceneRecord, class_groups
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.base import TemplateBase
from vqasieve.templates.predicates import SINGLE_INSTANCE_CLASS
from vqasieve.utils.geometry import MAX_GRID_CELLS, GridSpec, Third, grid_cell, third_assignment

THIRD_CHOICES = ("left third", "middle third", "right third")


def single_instances(scene: SceneRecord):
    """(label, detection) for every class that appears exactly once, by label."""
    return [
        (label, dets[0])
        for label, dets in sorted(class_groups(scene).items())
        if len(dets) == 1
    ]


class IsObjectCentered(TemplateBase):
    template_name = "IsObjectCentered"
    category = Category.LOCALIZATION
    question_pattern = (
        "Divide the image into thirds. In which third does the {object_1} primarily "
        "appear? Respond with the letter only: A) left third, B) middle third, C) right third."
    )

    def predicates(self):
        return [SINGLE_INSTANCE_CLASS]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        pairs = []
        for label, det in single_instances(scene):
            third = third_assignment(det.bbox, scene.width, self.config.buffer_frac)
            if third == Third.SPANNING:
                continue
            pairs.append(
                self.pair(
                    scene,
                    seed,
                    self.question_pattern.format(object_1=label),
                    third.value,
                    objects=(label,),
                    choices=THIRD_CHOICES,
                )
            )
        return pairs


class Quadrants(TemplateBase):
    template_name = "Quadrants"
    category = Category.LOCALIZATION
    question_pattern = (
        "Divide the image into a grid of {N} rows x {M} columns. Number the cells from "
        "left to right, then top to bottom, starting with 1. In what cell does the "
        "{object_1} appear?"
    )

    @classmethod
    def get_parameters(cls) -> List[Dict[str, Any]]:
        return [
            {"name": "rows", "type": "int", "min": 1, "max": MAX_GRID_CELLS, "default": 2},
            {"name": "cols", "type": "int", "min": 1, "max": MAX_GRID_CELLS, "default": 2},
        ]

    def __init__(self, config: TemplateConfig | None = None, **params):
        super().__init__(config, **params)
        self.grid = GridSpec(rows=self.params["rows"], cols=self.params["cols"])

    def predicates(self):
        return [SINGLE_INSTANCE_CLASS]

    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        pairs = []
        for label, det in single_instances(scene):
            cell = grid_cell(
                det.bbox, scene.width, scene.height, self.grid, self.config.grid_margin_frac
            )
            if cell is None:
                continue
            question = self.question_pattern.format(
                N=self.grid.rows, M=self.grid.cols, object_1=label
            )
            pairs.append(self.pair(scene, seed, question, str(cell), objects=(label,)))
        return pairs


def realize_localization(
    scene: SceneRecord,
    config: TemplateConfig | None = None,
    seed: int = 0,
    grids: tuple[tuple[int, int], ...] = ((2, 2), (3, 3)),
) -> list[QAPair]:
    """IsObjectCentered plus Quadrants for each requested grid."""
    pairs = IsObjectCentered(config).apply(scene, seed)
    for rows, cols in grids:
        pairs.extend(Quadrants(config, rows=rows, cols=cols).apply(scene, seed))
    return pairs
