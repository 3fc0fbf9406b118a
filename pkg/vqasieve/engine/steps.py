"""
Sieve Step Records

Per-(scene, template) outcomes of the predicate sieve and the per-template
metrics aggregated from them.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

from vqasieve.data.descriptors import QAPair, VqaSieveError


class TemplateIdMismatch(VqaSieveError):
    """Two metric records for different templates were merged."""


@dataclass
class SieveOutcome:
    """
    Result of running one template on one scene.

    Attributes:
        template_id: Template that ran
        image_id: Scene it ran on
        pairs: QA pairs realized (empty when skipped, rejected or faulted)
        predicates_checked: Whether the predicate list was evaluated
        failed_predicate: Name of the first predicate that failed, if any
        predicate_time_ms: Wall time spent on predicates
        applied: Whether apply() was invoked
        apply_time_ms: Wall time spent in apply()
        inapplicable: Depth template on a scene without depth
        fault: Error message when apply() raised
    """

    template_id: str
    image_id: str
    pairs: list[QAPair] = field(default_factory=list)
    predicates_checked: bool = False
    failed_predicate: str | None = None
    predicate_time_ms: float = 0.0
    applied: bool = False
    apply_time_ms: float = 0.0
    inapplicable: bool = False
    fault: str | None = None

    @property
    def passed(self) -> bool:
        return not self.inapplicable and self.failed_predicate is None

    @property
    def empty(self) -> bool:
        return self.applied and not self.pairs


@dataclass
class TemplateMetrics:
    """
    Aggregated sieve metrics for one template.

    Invariants: apply_invocations = nonempty_apply_count + empty_case_count,
    and apply_invocations <= predicate_pass_count. A faulted apply counts as
    an empty case and also in fault_count.
    """

    template_id: str
    predicate_time_avg_ms: float = 0.0
    apply_time_avg_ms: float = 0.0
    predicate_invocations: int = 0
    predicate_pass_count: int = 0
    apply_invocations: int = 0
    nonempty_apply_count: int = 0
    empty_case_count: int = 0
    qa_pairs_emitted: int = 0
    inapplicable_count: int = 0
    fault_count: int = 0

    @property
    def hit_rate(self) -> float:
        return self.nonempty_apply_count / max(1, self.apply_invocations)

    @classmethod
    def from_outcome(cls, outcome: SieveOutcome) -> "TemplateMetrics":
        return cls(
            template_id=outcome.template_id,
            predicate_time_avg_ms=outcome.predicate_time_ms if outcome.predicates_checked else 0.0,
            apply_time_avg_ms=outcome.apply_time_ms if outcome.applied else 0.0,
            predicate_invocations=int(outcome.predicates_checked),
            predicate_pass_count=int(outcome.passed),
            apply_invocations=int(outcome.applied),
            nonempty_apply_count=int(outcome.applied and bool(outcome.pairs)),
            empty_case_count=int(outcome.empty),
            qa_pairs_emitted=len(outcome.pairs),
            inapplicable_count=int(outcome.inapplicable),
            fault_count=int(outcome.fault is not None),
        )

    def to_dict(self) -> dict:
        data = asdict(self)
        data["hit_rate"] = self.hit_rate
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "TemplateMetrics":
        known = {k: v for k, v in data.items() if k in cls.__dataclass_fields__}
        return cls(**known)


def _weighted_mean(avg_a: float, n_a: int, avg_b: float, n_b: int) -> float:
    total = n_a + n_b
    if total == 0:
        return 0.0
    return (avg_a * n_a + avg_b * n_b) / total


_COUNT_FIELDS = (
    "predicate_invocations",
    "predicate_pass_count",
    "apply_invocations",
    "nonempty_apply_count",
    "empty_case_count",
    "qa_pairs_emitted",
    "inapplicable_count",
    "fault_count",
)


def merge_metrics(a: TemplateMetrics, b: TemplateMetrics) -> TemplateMetrics:
    """
    Combine two metric records of the same template.

    Counts add; average timings recombine as means weighted by their
    invocation counts. TemplateMetrics(template_id) is the identity.

    Raises:
        TemplateIdMismatch: The records belong to different templates
    """
    if a.template_id != b.template_id:
        raise TemplateIdMismatch(f"Cannot merge {a.template_id} with {b.template_id}")
    merged = TemplateMetrics(
        template_id=a.template_id,
        predicate_time_avg_ms=_weighted_mean(
            a.predicate_time_avg_ms, a.predicate_invocations,
            b.predicate_time_avg_ms, b.predicate_invocations,
        ),
        apply_time_avg_ms=_weighted_mean(
            a.apply_time_avg_ms, a.apply_invocations,
            b.apply_time_avg_ms, b.apply_invocations,
        ),
    )
    for name in _COUNT_FIELDS:
        setattr(merged, name, getattr(a, name) + getattr(b, name))
    return merged


def merge_metric_maps(
    a: dict[str, TemplateMetrics], b: dict[str, TemplateMetrics]
) -> dict[str, TemplateMetrics]:
    """Merge two template_id -> metrics maps key by key."""
    merged = dict(a)
    for template_id, metrics in b.items():
        if template_id in merged:
            merged[template_id] = merge_metrics(merged[template_id], metrics)
        else:
            merged[template_id] = metrics
    return merged
