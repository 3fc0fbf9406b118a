"""
Differential Checks

Run the template library and the brute-force oracle over the same
synthetic scenes and report every (scene, template) where their QA pair
multisets disagree.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

from vqasieve.data.descriptors import QAPair
from vqasieve.engine.runner import run_template
from vqasieve.oracle.answers import ORACLE_TEMPLATES, oracle_answers
from vqasieve.oracle.synth import PlacementInfeasible, SceneRecipe, synth_scene
from vqasieve.project.config import TemplateConfig
from vqasieve.templates import build_template
from vqasieve.utils.randomness import template_seed

logger = logging.getLogger(__name__)


def comparable(pair: QAPair) -> tuple:
    """Everything about a pair except the seed it was realized with."""
    return (
        pair.template_id,
        pair.category.value,
        pair.question,
        pair.answer,
        pair.choices,
        pair.objects_involved,
    )


@dataclass
class Mismatch:
    """One (scene, template) on which the engine and the oracle disagree."""

    recipe_seed: int
    image_id: str
    template_id: str
    engine_only: list[tuple] = field(default_factory=list)
    oracle_only: list[tuple] = field(default_factory=list)

    def to_dict(self) -> dict[str, Any]:
        return {
            "recipe_seed": self.recipe_seed,
            "image_id": self.image_id,
            "template_id": self.template_id,
            "engine_only": [list(map(_jsonable, t)) for t in self.engine_only],
            "oracle_only": [list(map(_jsonable, t)) for t in self.oracle_only],
        }


def _jsonable(value):
    return list(value) if isinstance(value, tuple) else value


@dataclass
class DifferentialReport:
    mismatches: list[Mismatch] = field(default_factory=list)
    scenes: int = 0
    comparisons: int = 0
    skipped: list[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.mismatches

    @property
    def mismatched_templates(self) -> set[str]:
        return {m.template_id for m in self.mismatches}

    def to_dict(self) -> dict[str, Any]:
        return {
            "scenes": self.scenes,
            "comparisons": self.comparisons,
            "skipped_recipes": list(self.skipped),
            "mismatches": [m.to_dict() for m in self.mismatches],
        }

    def summary_str(self) -> str:
        lines = [
            f"Differential check: {self.scenes} scenes, {self.comparisons} comparisons, "
            f"{len(self.mismatches)} mismatches"
        ]
        if self.skipped:
            lines.append(f"  Skipped {len(self.skipped)} infeasible recipes")
        for template_id in sorted(self.mismatched_templates):
            count = sum(1 for m in self.mismatches if m.template_id == template_id)
            lines.append(f"  {template_id}: {count} scene(s)")
        return "\n".join(lines)


def differential_run(
    recipes: Iterable[SceneRecipe],
    template_ids: Sequence[str] = ORACLE_TEMPLATES,
    config: TemplateConfig | None = None,
    run_seed: int = 0,
) -> DifferentialReport:
    """
    Compare engine output with oracle output scene by scene.

    Both sides realize each (scene, template) with the same derived seed, so
    multiple-choice layouts must agree exactly.

    Args:
        recipes: Synthetic scene recipes
        template_ids: Built-in templates to check
        config: Thresholds shared by both sides
        run_seed: Run seed from which per-scene seeds derive

    Returns:
        DifferentialReport
    """
    config = config or TemplateConfig()
    templates = [build_template(t, config) for t in template_ids]
    report = DifferentialReport()

    for recipe in recipes:
        try:
            scene = synth_scene(recipe)
        except PlacementInfeasible as e:
            logger.debug(f"Skipping recipe: {e}")
            report.skipped.append(recipe.seed)
            continue
        report.scenes += 1

        for template in templates:
            seed = template_seed(run_seed, scene.image_id, template.template_id)
            outcome = run_template(template, scene, seed)
            if outcome.fault is not None:
                raise RuntimeError(
                    f"{template.template_id} faulted on {scene.image_id}: {outcome.fault}"
                )
            engine = Counter(comparable(p) for p in outcome.pairs)
            oracle = Counter(
                comparable(p) for p in oracle_answers(scene, template.template_id, config, seed)
            )
            report.comparisons += 1
            if engine != oracle:
                report.mismatches.append(
                    Mismatch(
                        recipe_seed=recipe.seed,
                        image_id=scene.image_id,
                        template_id=template.template_id,
                        engine_only=sorted((engine - oracle).elements(), key=repr),
                        oracle_only=sorted((oracle - engine).elements(), key=repr),
                    )
                )
    return report
