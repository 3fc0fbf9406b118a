"""
Sieve Runner

Core execution engine: runs every enabled template on every scene through
the predicate sieve, in-process or across a pool of worker processes.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Mapping, Sequence

from vqasieve.data.depth import attach_depth, load_depth_grid
from vqasieve.data.descriptors import QAPair, SceneRecord, VqaSieveError
from vqasieve.engine.steps import (
    SieveOutcome,
    TemplateMetrics,
    merge_metric_maps,
    merge_metrics,
)
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.base import MissingDepthChannel, TemplateBase
from vqasieve.utils.randomness import template_seed

logger = logging.getLogger(__name__)


# =============================================================================
# Single (scene, template) step
# =============================================================================


def run_template(
    template: TemplateBase, scene: SceneRecord, seed: int = 0, use_sieve: bool = True
) -> SieveOutcome:
    """
    Run one template on one scene.

    Predicates are evaluated in declared order and the first failure stops
    the step before apply() runs. With use_sieve=False apply() runs
    unconditionally; templates are total, so the pairs are the same.

    Faults raised by apply() are captured on the outcome, never propagated.

    Args:
        template: Template instance
        scene: Scene to question
        seed: Seed of this (scene, template) realization
        use_sieve: Evaluate predicates before apply()

    Returns:
        SieveOutcome with pairs, timings and counters
    """
    outcome = SieveOutcome(template_id=template.template_id, image_id=scene.image_id)
    if template.requires_depth and not scene.has_depth:
        outcome.inapplicable = True
        return outcome

    if use_sieve:
        outcome.predicates_checked = True
        start = time.perf_counter()
        for predicate in template.predicate_list:
            if not predicate(scene):
                outcome.failed_predicate = predicate.name
                break
        outcome.predicate_time_ms = (time.perf_counter() - start) * 1000.0
        if outcome.failed_predicate is not None:
            return outcome

    outcome.applied = True
    start = time.perf_counter()
    try:
        outcome.pairs = list(template.apply(scene, seed))
    except MissingDepthChannel:
        outcome.applied = False
        outcome.inapplicable = True
    except Exception as e:
        outcome.fault = f"{type(e).__name__}: {e}"
        logger.error(f"Template {template.template_id} failed on {scene.image_id}: {e}")
    outcome.apply_time_ms = (time.perf_counter() - start) * 1000.0
    return outcome


# =============================================================================
# Results
# =============================================================================


@dataclass
class ChunkResult:
    """Pairs, metrics and faults from one slice of the corpus."""

    pairs: list[QAPair] = field(default_factory=list)
    metrics: dict[str, TemplateMetrics] = field(default_factory=dict)
    faults: list[dict[str, str]] = field(default_factory=list)
    scene_count: int = 0


@dataclass
class GenerationResult:
    """Aggregated result of a generation run."""

    pairs: list[QAPair] = field(default_factory=list)
    metrics: dict[str, TemplateMetrics] = field(default_factory=dict)
    faults: list[dict[str, str]] = field(default_factory=list)
    scene_count: int = 0
    partial: bool = False
    duration_seconds: float = 0.0

    @property
    def total_pairs(self) -> int:
        return len(self.pairs)

    @property
    def category_counts(self) -> dict[str, int]:
        counts = Counter(p.category.value for p in self.pairs)
        return dict(sorted(counts.items()))

    def summary_str(self) -> str:
        status = " (partial)" if self.partial else ""
        return (
            f"Generated {self.total_pairs} QA pairs from {self.scene_count} scenes "
            f"with {len(self.metrics)} templates in {self.duration_seconds:.1f}s"
            f"{status}; {len(self.faults)} faults"
        )


# =============================================================================
# Runner
# =============================================================================


class SieveRunner:
    """
    Runs a fixed template set over scenes.

    Example:
        runner = SieveRunner(build_templates(DEFAULT_TEMPLATES), seed=7)
        chunk = runner.run(scenes)
        print(len(chunk.pairs))
    """

    def __init__(
        self,
        templates: Sequence[TemplateBase],
        seed: int = 0,
        use_sieve: bool = True,
        depth_dir: Path | None = None,
        depth_percentile: float = 0.10,
    ):
        self.templates = list(templates)
        self.seed = seed
        self.use_sieve = use_sieve
        self.depth_dir = Path(depth_dir) if depth_dir is not None else None
        self.depth_percentile = depth_percentile
        self._needs_depth = any(t.requires_depth for t in self.templates)

    def run(self, scenes: Iterable[SceneRecord]) -> ChunkResult:
        result = ChunkResult(
            metrics={t.template_id: TemplateMetrics(t.template_id) for t in self.templates}
        )
        for scene in scenes:
            self.run_single(scene, result)
        return result

    def run_single(self, scene: SceneRecord, result: ChunkResult) -> None:
        """Run every template on one scene, accumulating into result."""
        result.scene_count += 1
        if self._needs_depth:
            scene, fault = self.resolve_depth(scene)
            if fault is not None:
                result.faults.append({"image_id": scene.image_id, "template_id": "", "error": fault})

        for template in self.templates:
            outcome = run_template(
                template,
                scene,
                template_seed(self.seed, scene.image_id, template.template_id),
                self.use_sieve,
            )
            result.pairs.extend(outcome.pairs)
            result.metrics[outcome.template_id] = merge_metrics(
                result.metrics[outcome.template_id], TemplateMetrics.from_outcome(outcome)
            )
            if outcome.fault is not None:
                result.faults.append(
                    {
                        "image_id": scene.image_id,
                        "template_id": outcome.template_id,
                        "error": outcome.fault,
                    }
                )

    def resolve_depth(self, scene: SceneRecord) -> tuple[SceneRecord, str | None]:
        """
        Attach depth summaries from the scene's grid or its depth file.

        Lookup order: in-memory grid, then depth_file (relative to
        depth_dir), then "<depth_dir>/<image_id>.depth". A missing file
        leaves the scene without depth; an unreadable one is a fault.
        """
        if scene.has_depth or not scene.detections:
            return scene, None

        try:
            if scene.depth_grid is not None:
                return attach_depth(scene, scene.depth_grid, self.depth_percentile), None

            path = self._depth_path(scene)
            if path is None or not path.is_file():
                logger.debug(f"No depth map for scene {scene.image_id}")
                return scene, None
            grid = load_depth_grid(path.read_bytes(), scene.width, scene.height)
            return attach_depth(scene, grid, self.depth_percentile), None
        except (OSError, VqaSieveError) as e:
            logger.warning(f"Depth for scene {scene.image_id} unusable: {e}")
            return scene, f"depth: {type(e).__name__}: {e}"

    def _depth_path(self, scene: SceneRecord) -> Path | None:
        if scene.depth_file:
            path = Path(scene.depth_file)
            if not path.is_absolute() and self.depth_dir is not None:
                path = self.depth_dir / path
            return path
        if self.depth_dir is not None:
            return self.depth_dir / f"{scene.image_id}.depth"
        return None


# =============================================================================
# Parallel generation
# =============================================================================


@dataclass
class _ChunkTask:
    scenes: list[SceneRecord]
    template_ids: list[str]
    template_config: TemplateConfig
    overrides: dict[str, dict[str, Any]]
    seed: int
    use_sieve: bool
    depth_dir: Path | None
    plugin_dir: Path | None


def _build_runner(task: _ChunkTask) -> SieveRunner:
    from vqasieve.registry.discovery import discover_templates
    from vqasieve.templates import build_templates

    if task.plugin_dir is not None:
        discover_templates(task.plugin_dir)
    templates = build_templates(task.template_ids, task.template_config, task.overrides)
    return SieveRunner(
        templates,
        seed=task.seed,
        use_sieve=task.use_sieve,
        depth_dir=task.depth_dir,
        depth_percentile=task.template_config.depth_percentile,
    )


def _run_chunk(task: _ChunkTask) -> ChunkResult:
    """Worker entry point; templates are rebuilt inside the worker process."""
    return _build_runner(task).run(task.scenes)


def _chunked(items: list, size: int) -> list[list]:
    return [items[i : i + size] for i in range(0, len(items), size)]


def generate_dataset(
    scenes: Iterable[SceneRecord],
    template_ids: Sequence[str],
    template_config: TemplateConfig | None = None,
    overrides: Mapping[str, Mapping[str, Any]] | None = None,
    seed: int = 0,
    workers: int = 1,
    use_sieve: bool = True,
    depth_dir: Path | None = None,
    plugin_dir: Path | None = None,
    progress_callback: Callable[[str, int, int], None] | None = None,
) -> GenerationResult:
    """
    Run every enabled template on every scene.

    Output is sorted canonically by (image_id, template_id, question,
    answer), so it depends only on scenes, templates, config and seed,
    never on the worker count.

    Args:
        scenes: Scenes to question
        template_ids: Enabled template ids
        template_config: Shared thresholds
        overrides: Per-template threshold overrides
        seed: Run seed
        workers: Worker processes (1 runs in-process)
        use_sieve: Evaluate predicates before apply()
        depth_dir: Directory of depth-grid files
        plugin_dir: Directory of template plugins
        progress_callback: Optional callback(message, current, total)

    Returns:
        GenerationResult; on KeyboardInterrupt the result holds what was
        finished and partial is True
    """
    if workers < 1:
        raise ValueError(f"workers must be >= 1, got {workers}")
    start_time = time.time()
    scenes = list(scenes)
    task = _ChunkTask(
        scenes=[],
        template_ids=list(template_ids),
        template_config=template_config or TemplateConfig(),
        overrides={k: dict(v) for k, v in (overrides or {}).items()},
        seed=seed,
        use_sieve=use_sieve,
        depth_dir=Path(depth_dir) if depth_dir is not None else None,
        plugin_dir=Path(plugin_dir) if plugin_dir is not None else None,
    )
    runner = _build_runner(task)

    result = GenerationResult(
        metrics={t.template_id: TemplateMetrics(t.template_id) for t in runner.templates}
    )

    def absorb(chunk: ChunkResult) -> None:
        result.pairs.extend(chunk.pairs)
        result.metrics = merge_metric_maps(result.metrics, chunk.metrics)
        result.faults.extend(chunk.faults)
        result.scene_count += chunk.scene_count
        if progress_callback:
            progress_callback("Generating", result.scene_count, len(scenes))

    try:
        if workers == 1:
            chunk_size = max(1, min(256, len(scenes)))
            for chunk in _chunked(scenes, chunk_size):
                absorb(runner.run(chunk))
        else:
            chunk_size = max(1, math.ceil(len(scenes) / (workers * 4)))
            tasks = [
                _ChunkTask(**{**task.__dict__, "scenes": chunk})
                for chunk in _chunked(scenes, chunk_size)
            ]
            with ProcessPoolExecutor(max_workers=workers) as executor:
                for chunk_result in executor.map(_run_chunk, tasks):
                    absorb(chunk_result)
    except KeyboardInterrupt:
        logger.warning(
            f"Interrupted after {result.scene_count}/{len(scenes)} scenes; result is partial"
        )
        result.partial = True

    result.pairs.sort(key=QAPair.sort_key)
    result.faults.sort(key=lambda f: (f["image_id"], f["template_id"], f["error"]))
    result.duration_seconds = time.time() - start_time
    logger.info(result.summary_str())
    return result
