"""Engine output against the brute-force oracle on synthetic scenes."""

import json

import pytest

from vqasieve.oracle import (
    ORACLE_TEMPLATES,
    DifferentialReport,
    SceneRecipe,
    differential_run,
    oracle_answers,
    recipe_suite,
    synth_scene,
)
from vqasieve.oracle.answers import _brute_clusters
from vqasieve.oracle.differential import comparable
from vqasieve.project.config import TemplateConfig
from vqasieve.templates import build_template
from vqasieve.templates.builtins import directional

from conftest import det, scene


def test_every_builtin_has_a_rule():
    from vqasieve.templates import BUILTIN_TEMPLATES

    assert set(ORACLE_TEMPLATES) == {cls.template_name for cls in BUILTIN_TEMPLATES}


def test_hand_built_scene(street_scene):
    for template_id in ("RightOf", "LeftMost", "HowMany", "Quadrants(3,3)", "WhichMore"):
        engine = build_template(template_id).apply(street_scene, 5)
        oracle = oracle_answers(street_scene, template_id, seed=5)
        assert sorted(map(comparable, engine), key=repr) == sorted(map(comparable, oracle), key=repr)


def test_default_arguments_are_canonical():
    pairs = oracle_answers(scene(det("cat", 210, 160, 390, 290), width=400, height=300), "Quadrants")
    assert pairs and {p.template_id for p in pairs} == {"Quadrants(2,2)"}


def test_unknown_template():
    with pytest.raises(KeyError):
        oracle_answers(synth_scene(SceneRecipe(seed=1)), "Nope")


@pytest.mark.parametrize(
    "points, expected",
    [
        ([(0, 0), (1, 0), (0, 1), (1, 1)], [(0, 1, 2, 3)]),
        ([(0, 0), (10, 0), (20, 0)], []),
        (
            [(0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (100, 0), (101, 0), (102, 0), (100, 1), (101, 1)],
            [(0, 1, 2, 3, 4), (5, 6, 7, 8, 9)],
        ),
    ],
)
def test_brute_clusters(points, expected):
    assert _brute_clusters(points, 1.5, 3) == expected


class TestDifferential:
    def test_default_config(self):
        report = differential_run(recipe_suite(80))
        assert report.scenes > 0
        assert report.ok, report.summary_str()

    def test_with_depth(self):
        report = differential_run(recipe_suite(60, start=5000, with_depth=True))
        assert report.ok, report.summary_str()

    @pytest.mark.parametrize(
        "overrides",
        [
            {"vertical_overlap_gate": True},
            {"half_image_rule": False, "separation_margin_px": 0.0},
            {"reversed_aspect_phrasing": True, "aspect_ratio_threshold": 1.05},
            {"count_margin_ratio": 1.1, "area_margin_ratio": 3.0, "row_normalization": "diagonal"},
        ],
    )
    def test_config_variants(self, overrides):
        config = TemplateConfig().with_overrides(overrides)
        report = differential_run(recipe_suite(40, start=300), config=config)
        assert report.ok, report.summary_str()

    def test_other_grid_and_ranking_sizes(self):
        report = differential_run(
            recipe_suite(40, start=900, with_depth=True),
            template_ids=["Quadrants(3,2)", "Quadrants(1,3)", "RankLargestK(2)", "DepthRanking(2)"],
        )
        assert report.ok, report.summary_str()

    @pytest.mark.slow
    def test_thousand_scenes(self):
        report = differential_run(recipe_suite(1000, start=10_000, with_depth=True))
        assert report.ok, report.summary_str()

    def test_broken_rule_is_caught(self, monkeypatch):
        monkeypatch.setattr(directional, "strictly_right_of", lambda a, b: False)
        report = differential_run(recipe_suite(80))
        assert not report.ok
        assert report.mismatched_templates == {"RightOf"}
        assert "RightOf" in report.summary_str()
        json.dumps(report.to_dict())


def test_empty_recipe_list():
    report = differential_run([])
    assert report.scenes == 0
    assert report.comparisons == 0
    assert report.ok


def test_report_summary():
    report = DifferentialReport(scenes=2, comparisons=50, skipped=[7])
    assert report.ok
    assert "2 scenes, 50 comparisons, 0 mismatches" in report.summary_str()
    assert "Skipped 1 infeasible recipes" in report.summary_str()
