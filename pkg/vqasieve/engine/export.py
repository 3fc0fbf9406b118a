"""
Dataset Export Module

QA line files, the sieve statistics report, and scoring of model
predictions against generated answers.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import pandas as pd

from vqasieve.data.descriptors import Category, QAPair, VqaSieveError
from vqasieve.engine.provenance import GenerationManifest
from vqasieve.engine.steps import TemplateMetrics

logger = logging.getLogger(__name__)

STATS_COLUMNS = [
    "template",
    "is_applicable Avg (ms)",
    "apply Avg (ms)",
    "Predicate → QA Hit Rate",
    "Empty cases",
    "QA pairs",
]


class IoFailure(VqaSieveError):
    """A dataset file could not be written or read."""


class UnmatchedPrediction(VqaSieveError):
    """A prediction's digest matches no generated question."""


class DuplicatePrediction(VqaSieveError):
    """A question was answered more than once; the last answer wins."""


# =============================================================================
# QA lines
# =============================================================================


def qa_to_record(pair: QAPair) -> dict:
    """Line object in canonical field order."""
    record = {
        "image_id": pair.image_id,
        "template": pair.template_id,
        "category": pair.category.value,
        "question": pair.question,
        "answer": pair.answer,
    }
    if pair.choices is not None:
        record["choices"] = list(pair.choices)
    record["objects"] = list(pair.objects_involved)
    record["seed"] = pair.generation_seed
    return record


def record_to_qa(record: dict) -> QAPair:
    choices = record.get("choices")
    return QAPair(
        image_id=str(record["image_id"]),
        template_id=str(record["template"]),
        category=Category(record["category"]),
        question=record["question"],
        answer=record["answer"],
        choices=tuple(choices) if choices is not None else None,
        objects_involved=tuple(record.get("objects", ())),
        generation_seed=int(record.get("seed", 0)),
    )


def qa_line(pair: QAPair) -> str:
    """One QA line, without the newline."""
    return json.dumps(qa_to_record(pair), ensure_ascii=False)


def qa_digest(pairs: Iterable[QAPair]) -> str:
    """SHA-256 of the bytes write_qa would produce for these pairs."""
    hasher = hashlib.sha256()
    for pair in pairs:
        hasher.update(qa_line(pair).encode("utf-8"))
        hasher.update(b"\n")
    return hasher.hexdigest()


def write_qa(pairs: Iterable[QAPair], destination: Path) -> int:
    """
    Write QA pairs as UTF-8 JSON lines.

    Returns:
        Number of lines written

    Raises:
        IoFailure: Destination not writable
    """
    destination = Path(destination)
    count = 0
    try:
        destination.parent.mkdir(parents=True, exist_ok=True)
        with open(destination, "w", encoding="utf-8", newline="\n") as f:
            for pair in pairs:
                f.write(qa_line(pair))
                f.write("\n")
                count += 1
    except OSError as e:
        raise IoFailure(f"Cannot write {destination}: {e}") from e
    return count


def read_qa(source: Path) -> list[QAPair]:
    """Read a QA line file back into QAPairs."""
    pairs = []
    try:
        with open(source, "r", encoding="utf-8") as f:
            for line_number, line in enumerate(f, start=1):
                if not line.strip():
                    continue
                try:
                    pairs.append(record_to_qa(json.loads(line)))
                except (json.JSONDecodeError, KeyError, ValueError) as e:
                    raise IoFailure(f"{source}:{line_number}: bad QA line: {e}") from e
    except OSError as e:
        raise IoFailure(f"Cannot read {source}: {e}") from e
    return pairs


def question_digest(pair: QAPair) -> str:
    """64-bit hex join key of (image_id, template, question)."""
    text = json.dumps(
        [pair.image_id, pair.template_id, pair.question],
        ensure_ascii=False,
        separators=(",", ":"),
    )
    return hashlib.blake2b(text.encode("utf-8"), digest_size=8).hexdigest()


# =============================================================================
# Statistics report
# =============================================================================


def metrics_from_pairs(pairs: Iterable[QAPair]) -> dict[str, TemplateMetrics]:
    """Emitted-pair counts per template when only a QA file is at hand."""
    counts = Counter(p.template_id for p in pairs)
    return {
        template_id: TemplateMetrics(template_id=template_id, qa_pairs_emitted=n)
        for template_id, n in sorted(counts.items())
    }


def stats_table(metrics: dict[str, TemplateMetrics]) -> pd.DataFrame:
    """One row per template with the sieve metrics."""
    rows = [
        {
            "template": m.template_id,
            "is_applicable Avg (ms)": round(m.predicate_time_avg_ms, 4),
            "apply Avg (ms)": round(m.apply_time_avg_ms, 4),
            "Predicate → QA Hit Rate": f"{m.hit_rate * 100:.1f}%",
            "Empty cases": m.empty_case_count,
            "QA pairs": m.qa_pairs_emitted,
        }
        for m in metrics.values()
    ]
    return pd.DataFrame(rows, columns=STATS_COLUMNS)


def category_distribution(category_counts: dict[str, int]) -> pd.DataFrame:
    total = sum(category_counts.values())
    rows = [
        {
            "category": category,
            "QA pairs": n,
            "share": f"{100.0 * n / total:.1f}%" if total else "0.0%",
        }
        for category, n in sorted(category_counts.items())
    ]
    return pd.DataFrame(rows, columns=["category", "QA pairs", "share"])


def stats_report(manifest: GenerationManifest) -> tuple[str, pd.DataFrame]:
    """
    Render the per-template metrics table plus the category distribution.

    Returns:
        (text report, per-template DataFrame)
    """
    table = stats_table(manifest.template_metrics)
    lines = ["Template metrics", "----------------"]
    lines.append(table.to_string(index=False) if not table.empty else "no templates")
    lines += ["", "Category distribution", "---------------------"]
    if sum(manifest.category_counts.values()) == 0:
        lines.append("no pairs")
    else:
        lines.append(category_distribution(manifest.category_counts).to_string(index=False))
    if manifest.partial:
        lines += ["", "PARTIAL RUN: generation was interrupted"]
    return "\n".join(lines) + "\n", table


def write_stats(manifest: GenerationManifest, text_path: Path, csv_path: Path) -> None:
    text, table = stats_report(manifest)
    Path(text_path).write_text(text, encoding="utf-8")
    _save_dataframe(table, Path(csv_path))


BENCH_COLUMNS = [
    "template",
    "apply calls (sieve)",
    "apply calls (no sieve)",
    "total ms (sieve)",
    "total ms (no sieve)",
    "speedup",
]


def _total_ms(m: TemplateMetrics) -> float:
    return (
        m.predicate_time_avg_ms * m.predicate_invocations
        + m.apply_time_avg_ms * m.apply_invocations
    )


def sieve_benefit_table(
    sieved: dict[str, TemplateMetrics], unsieved: dict[str, TemplateMetrics]
) -> pd.DataFrame:
    """
    Per-template apply calls and wall time with and without the sieve.

    Speedup is unsieved time over sieved time (predicates included), 0.0
    when either side spent no measurable time.
    """
    rows = []
    for template_id in sieved:
        a = sieved[template_id]
        b = unsieved.get(template_id, TemplateMetrics(template_id))
        with_sieve, without = _total_ms(a), _total_ms(b)
        rows.append(
            {
                "template": template_id,
                "apply calls (sieve)": a.apply_invocations,
                "apply calls (no sieve)": b.apply_invocations,
                "total ms (sieve)": round(with_sieve, 3),
                "total ms (no sieve)": round(without, 3),
                "speedup": round(without / with_sieve, 2) if with_sieve > 0 and without > 0 else 0.0,
            }
        )
    return pd.DataFrame(rows, columns=BENCH_COLUMNS)


def _save_dataframe(df: pd.DataFrame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)


# =============================================================================
# Prediction scoring
# =============================================================================

_TRAILING_PUNCT = ".!?,;:"
_LETTER = re.compile(r"^\(?([a-d])(?:[).:]|$)")
_YES_NO = re.compile(r"^(yes|no)\b")


def normalize_answer(text: str) -> str:
    """Trim, casefold and strip trailing punctuation."""
    return text.strip().casefold().rstrip(_TRAILING_PUNCT).strip()


def answer_matches(pair: QAPair, prediction: str) -> bool:
    """
    Whether a raw model answer matches the pair's answer.

    Letter questions accept "B" alone or a "B)", "(B)", "B." or "B:" prefix; Yes/No questions
    compare the leading yes/no token; integer answers compare numerically;
    comma-separated answers compare item by item in order.
    """
    expected = normalize_answer(pair.answer)
    given = normalize_answer(prediction)

    if pair.choices is not None:
        match = _LETTER.match(given)
        return match is not None and match.group(1) == expected
    if expected in ("yes", "no"):
        match = _YES_NO.match(given)
        return match is not None and match.group(1) == expected
    try:
        return int(expected) == int(given)
    except ValueError:
        pass
    if "," in expected:
        want = [normalize_answer(item) for item in expected.split(",")]
        got = [normalize_answer(item) for item in given.split(",")]
        return want == got
    return expected == given


@dataclass
class ScoreReport:
    """
    Accuracy of a prediction file over a QA file.

    Accuracy counts answered questions only; questions with no prediction
    are reported in `unanswered`.
    """

    per_template: pd.DataFrame
    per_category: pd.DataFrame
    correct: int = 0
    answered: int = 0
    unanswered: int = 0
    unmatched: list[UnmatchedPrediction] = field(default_factory=list)
    duplicates: list[DuplicatePrediction] = field(default_factory=list)

    @property
    def accuracy(self) -> float:
        return self.correct / self.answered if self.answered else 0.0

    def summary_str(self) -> str:
        return (
            f"Accuracy {self.accuracy:.1%} ({self.correct}/{self.answered} answered); "
            f"{self.unanswered} unanswered, {len(self.unmatched)} unmatched, "
            f"{len(self.duplicates)} duplicate predictions"
        )


def read_predictions(source: Path) -> list[dict]:
    """Read prediction lines {image_id, question_digest, model_answer}."""
    predictions = []
    with open(source, "r", encoding="utf-8") as f:
        for line in f:
            if line.strip():
                predictions.append(json.loads(line))
    return predictions


def _accuracy_table(key: str, tallies: dict[str, list[int]]) -> pd.DataFrame:
    rows = [
        {key: name, "correct": c, "answered": n, "accuracy": c / n if n else 0.0}
        for name, (c, n) in sorted(tallies.items())
    ]
    return pd.DataFrame(rows, columns=[key, "correct", "answered", "accuracy"])


def score_predictions(pairs: Iterable[QAPair], predictions: Iterable[dict]) -> ScoreReport:
    """
    Score model answers against generated answers.

    Predictions join on question_digest (and must name the same image).
    Misses and duplicates are tallied on the report, never raised.
    """
    by_digest = {question_digest(p): p for p in pairs}
    answers: dict[str, str] = {}
    unmatched: list[UnmatchedPrediction] = []
    duplicates: list[DuplicatePrediction] = []

    for prediction in predictions:
        digest = str(prediction.get("question_digest", ""))
        pair = by_digest.get(digest)
        if pair is None or str(prediction.get("image_id")) != pair.image_id:
            unmatched.append(
                UnmatchedPrediction(f"{prediction.get('image_id')}/{digest}")
            )
            continue
        if digest in answers:
            duplicates.append(DuplicatePrediction(f"{pair.image_id}/{digest}"))
        answers[digest] = str(prediction.get("model_answer", ""))

    if unmatched:
        logger.warning(f"{len(unmatched)} predictions match no generated question")

    by_template: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    by_category: dict[str, list[int]] = defaultdict(lambda: [0, 0])
    correct = 0
    for digest, model_answer in answers.items():
        pair = by_digest[digest]
        hit = int(answer_matches(pair, model_answer))
        correct += hit
        for tally in (by_template[pair.template_id], by_category[pair.category.value]):
            tally[0] += hit
            tally[1] += 1

    return ScoreReport(
        per_template=_accuracy_table("template", by_template),
        per_category=_accuracy_table("category", by_category),
        correct=correct,
        answered=len(answers),
        unanswered=len(by_digest) - len(answers),
        unmatched=unmatched,
        duplicates=duplicates,
    )
