"""
vqasieve Generation Engine

Sieve runner, metrics, corpus selection, manifests and export.
"""

from vqasieve.engine.export import read_qa, score_predictions, stats_report, write_qa
from vqasieve.engine.provenance import GenerationManifest, load_manifest, write_manifest
from vqasieve.engine.runner import GenerationResult, SieveRunner, generate_dataset, run_template
from vqasieve.engine.selection import (
    EmptyTemplate,
    balanced_sample,
    frame_select_score,
    select_frames,
    split_dataset,
)
from vqasieve.engine.steps import SieveOutcome, TemplateIdMismatch, TemplateMetrics, merge_metrics

__all__ = [
    "read_qa",
    "score_predictions",
    "stats_report",
    "write_qa",
    "GenerationManifest",
    "load_manifest",
    "write_manifest",
    "GenerationResult",
    "SieveRunner",
    "generate_dataset",
    "run_template",
    "EmptyTemplate",
    "balanced_sample",
    "frame_select_score",
    "select_frames",
    "split_dataset",
    "SieveOutcome",
    "TemplateIdMismatch",
    "TemplateMetrics",
    "merge_metrics",
]
