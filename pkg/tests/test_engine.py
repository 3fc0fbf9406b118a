"""Generation engine: determinism, metrics aggregation and manifests."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from vqasieve.data.depth import encode_depth_grid
from vqasieve.data.descriptors import Category
from vqasieve.engine.export import qa_digest
from vqasieve.engine.provenance import GenerationManifest, load_manifest, write_manifest
from vqasieve.engine.runner import generate_dataset
from vqasieve.engine.steps import TemplateIdMismatch, TemplateMetrics, merge_metrics
from vqasieve.oracle.synth import PlacementInfeasible, random_recipe, synth_scene
from vqasieve.project.config import DEFAULT_TEMPLATES, DEPTH_TEMPLATES

from conftest import det, scene


def corpus(count=30):
    scenes = []
    for seed in range(count):
        try:
            scenes.append(synth_scene(random_recipe(seed)))
        except PlacementInfeasible:
            continue
    return scenes


def counts_only(metrics):
    return {
        k: {f: v for f, v in m.to_dict().items() if not f.endswith("_avg_ms")}
        for k, m in metrics.items()
    }


class TestGenerate:
    def test_single_template(self):
        s = scene(det("car", 200, 100, 300, 180), det("person", 50, 110, 90, 180))
        result = generate_dataset([s], ["RightOf"])
        assert result.total_pairs == 2
        assert result.metrics["RightOf"].qa_pairs_emitted == 2
        assert result.category_counts == {Category.SPATIAL_RELATIONS.value: 2}

    def test_canonical_order(self, mixed_corpus):
        result = generate_dataset(reversed(mixed_corpus), DEFAULT_TEMPLATES, seed=3)
        keys = [p.sort_key() for p in result.pairs]
        assert keys == sorted(keys)

    def test_worker_count_does_not_change_output(self):
        scenes = corpus()
        single = generate_dataset(scenes, DEFAULT_TEMPLATES, seed=9, workers=1)
        pooled = generate_dataset(scenes, DEFAULT_TEMPLATES, seed=9, workers=2)
        assert qa_digest(single.pairs) == qa_digest(pooled.pairs)
        assert counts_only(single.metrics) == counts_only(pooled.metrics)
        assert single.scene_count == pooled.scene_count == len(scenes)

    def test_counting_answers_ignore_the_seed(self):
        scenes = corpus(10)
        a = generate_dataset(scenes, ["HowMany"], seed=1)
        b = generate_dataset(scenes, ["HowMany"], seed=2)
        assert [(p.question, p.answer) for p in a.pairs] == [(p.question, p.answer) for p in b.pairs]

    def test_bad_worker_count(self):
        with pytest.raises(ValueError):
            generate_dataset([], ["HowMany"], workers=0)

    def test_depth_from_directory(self, tmp_path):
        s = scene(det("car", 0, 0, 2, 2), det("person", 4, 0, 6, 2), width=6, height=2, image_id="d1")
        values = np.array([[3.0] * 2 + [1.0] * 2 + [9.0] * 2] * 2, dtype=np.float32)
        (tmp_path / "d1.depth").write_bytes(encode_depth_grid(values))
        result = generate_dataset([s], ["Closer"], depth_dir=tmp_path)
        answers = {p.objects_involved: p.answer for p in result.pairs}
        assert answers == {("car", "person"): "Yes", ("person", "car"): "No"}

    def test_unreadable_depth_is_a_fault(self, tmp_path):
        s = scene(det("car", 0, 0, 2, 2), det("person", 4, 0, 6, 2), width=6, height=2, image_id="d1")
        (tmp_path / "d1.depth").write_bytes(b"DEPTH v1 6 2\n\x00")
        result = generate_dataset([s], list(DEPTH_TEMPLATES), depth_dir=tmp_path)
        assert result.pairs == []
        assert [f["image_id"] for f in result.faults] == ["d1"]
        assert result.metrics["Closer"].inapplicable_count == 1


class TestMetrics:
    def test_weighted_mean(self):
        a = TemplateMetrics("T", apply_time_avg_ms=4.0, apply_invocations=2)
        b = TemplateMetrics("T", apply_time_avg_ms=8.0, apply_invocations=2)
        merged = merge_metrics(a, b)
        assert merged.apply_invocations == 4
        assert merged.apply_time_avg_ms == pytest.approx(6.0)

    def test_identity(self):
        a = TemplateMetrics(
            "T", predicate_time_avg_ms=1.5, predicate_invocations=3, predicate_pass_count=2
        )
        assert merge_metrics(a, TemplateMetrics("T")) == a
        assert merge_metrics(TemplateMetrics("T"), a) == a

    def test_mismatch(self):
        with pytest.raises(TemplateIdMismatch):
            merge_metrics(TemplateMetrics("A"), TemplateMetrics("B"))

    def test_hit_rate(self):
        m = TemplateMetrics("T", apply_invocations=4, nonempty_apply_count=3, empty_case_count=1)
        assert m.hit_rate == 0.75
        assert TemplateMetrics("T").hit_rate == 0.0

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(
            st.tuples(
                st.integers(0, 50), st.integers(0, 50),
                st.integers(0, 1000), st.integers(0, 1000),
            ),
            min_size=3,
            max_size=3,
        )
    )
    def test_associative(self, parts):
        records = [
            TemplateMetrics(
                "T",
                predicate_time_avg_ms=p_ms / 8.0,
                apply_time_avg_ms=a_ms / 8.0,
                predicate_invocations=n_pred,
                apply_invocations=n_apply,
                nonempty_apply_count=n_apply,
            )
            for n_pred, n_apply, p_ms, a_ms in parts
        ]
        left = merge_metrics(merge_metrics(records[0], records[1]), records[2])
        right = merge_metrics(records[0], merge_metrics(records[1], records[2]))
        assert left.apply_invocations == right.apply_invocations
        assert left.predicate_invocations == right.predicate_invocations
        assert left.apply_time_avg_ms == pytest.approx(right.apply_time_avg_ms)
        assert left.predicate_time_avg_ms == pytest.approx(right.predicate_time_avg_ms)


class TestManifest:
    def manifest(self, duration=1.0, apply_ms=2.0):
        return GenerationManifest(
            tool_version="0.1.0",
            config_digest="abc",
            seed=4,
            scene_counts={"loaded": 3},
            template_metrics={
                "HowMany": TemplateMetrics("HowMany", apply_time_avg_ms=apply_ms, apply_invocations=3)
            },
            category_counts={"Counting": 5},
            total_pairs=5,
            duration_seconds=duration,
        )

    def test_digest_ignores_timing(self):
        assert self.manifest(1.0, 2.0).digest() == self.manifest(9.0, 0.5).digest()

    def test_digest_sees_counts(self):
        other = self.manifest()
        other.total_pairs = 6
        assert other.digest() != self.manifest().digest()

    def test_round_trip(self, tmp_path):
        path = write_manifest(self.manifest(), tmp_path / "manifest.json")
        loaded = load_manifest(path)
        assert loaded.to_dict() == self.manifest().to_dict()
