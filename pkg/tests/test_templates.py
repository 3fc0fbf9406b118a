"""Question templates on hand-built scenes."""

import re

import pytest

from vqasieve.engine.runner import run_template
from vqasieve.oracle.synth import PlacementInfeasible, random_recipe, synth_scene
from vqasieve.project.config import TemplateConfig
from vqasieve.templates import (
    AreMore,
    Closer,
    DepthRanking,
    Farther,
    HowMany,
    IsObjectCentered,
    LargestAppearance,
    LeastAppearance,
    LeftMost,
    LeftMostWidthVsHeight,
    LeftOf,
    LessThanThresholdHowMany,
    MissingDepthChannel,
    MoreThanThresholdHowMany,
    MostAppearance,
    MostClusteredObjects,
    MultiChoiceHowMany,
    ObjectsInLine,
    ObjectsInRow,
    RightMost,
    RightOf,
    UnknownTemplate,
    WhichMore,
    WidthVsHeight,
    build_template,
    build_templates,
)
from vqasieve.templates.builtins.arrangement import NO_ROW_OPTION, realize_arrangement
from vqasieve.templates.builtins.counting import count_buckets, threshold_targets, realize_counting
from vqasieve.templates.builtins.depth import realize_depth
from vqasieve.templates.builtins.directional import realize_directional
from vqasieve.templates.builtins.extremal import realize_extremal_position
from vqasieve.templates.builtins.frequency import realize_frequency
from vqasieve.templates.builtins.localization import realize_localization
from vqasieve.templates.builtins.size import realize_size
from vqasieve.utils.randomness import question_rng

from conftest import det, row_of, scene


def answers_by_objects(pairs):
    return {p.objects_involved: p.answer for p in pairs}


class TestRegistry:
    def test_parameterized_ids(self):
        assert build_template("Quadrants(3, 2)").template_id == "Quadrants(3,2)"
        assert build_template("RankLargestK").template_id == "RankLargestK(3)"

    @pytest.mark.parametrize("bad", ["Nope", "Quadrants(0,2)", "Quadrants(2)", "HowMany(", "RankLargestK(x)"])
    def test_bad_ids(self, bad):
        with pytest.raises(UnknownTemplate):
            build_template(bad)

    def test_overrides_by_name_then_id(self):
        template = build_template(
            "Quadrants(3,3)",
            overrides={"Quadrants": {"grid_margin_frac": 0.1}, "Quadrants(3,3)": {"buffer_frac": 0.05}},
        )
        assert template.config.grid_margin_frac == 0.1
        assert template.config.buffer_frac == 0.05

    def test_duplicates_dropped(self):
        templates = build_templates(["HowMany", "HowMany", "Quadrants(2,2)", "Quadrants"])
        assert [t.template_id for t in templates] == ["HowMany", "Quadrants(2,2)"]

    def test_describe(self):
        info = RightOf().describe()
        assert info.predicates == ("at_least_x_classes(2)", "exists_nonoverlapping_cross_pair")
        assert not info.requires_depth
        assert Closer().describe().requires_depth


class TestDirectional:
    def test_car_right_of_person(self):
        s = scene(det("car", 200, 100, 300, 180), det("person", 50, 110, 90, 180))
        right = answers_by_objects(RightOf().apply(s, 0))
        assert right == {("car", "person"): "Yes", ("person", "car"): "No"}
        left = answers_by_objects(LeftOf().apply(s, 0))
        assert left == {("car", "person"): "No", ("person", "car"): "Yes"}

    def test_question_text(self):
        s = scene(det("car", 200, 100, 300, 180), det("person", 50, 110, 90, 180))
        questions = {p.question for p in RightOf().apply(s, 0)}
        assert "Is there at least one car to the right of any person?" in questions

    def test_three_classes_left_to_right(self):
        s = scene(
            det("a", 10, 10, 50, 50), det("b", 100, 10, 150, 50), det("c", 200, 10, 250, 50)
        )
        right = answers_by_objects(RightOf().apply(s, 0))
        assert right == {
            ("b", "a"): "Yes",
            ("c", "a"): "Yes",
            ("c", "b"): "Yes",
            ("a", "b"): "No",
            ("a", "c"): "No",
            ("b", "c"): "No",
        }

    def test_overlapping_pairs_only(self):
        s = scene(det("car", 0, 0, 10, 10), det("person", 5, 5, 15, 15))
        assert RightOf().apply(s, 0) == []

    def test_vertical_overlap_gate(self):
        s = scene(det("car", 200, 0, 300, 20), det("person", 50, 300, 90, 400))
        assert answers_by_objects(RightOf().apply(s, 0))[("car", "person")] == "Yes"
        gated = RightOf(TemplateConfig(vertical_overlap_gate=True))
        assert answers_by_objects(gated.apply(s, 0))[("car", "person")] == "No"


class TestExtremes:
    def test_leftmost(self):
        s = scene(det("person", 10, 50, 60, 150), det("car", 120, 50, 200, 150), width=400)
        [pair] = LeftMost().apply(s, 0)
        assert pair.answer == "person"

    def test_margin_too_small(self):
        s = scene(det("person", 10, 50, 60, 150), det("car", 15, 50, 80, 150), width=400)
        assert LeftMost().apply(s, 0) == []

    def test_crosses_half(self):
        s = scene(det("person", 10, 50, 250, 150), det("car", 300, 50, 350, 150), width=400)
        assert LeftMost().apply(s, 0) == []
        relaxed = LeftMost(TemplateConfig(half_image_rule=False))
        assert relaxed.apply(s, 0)[0].answer == "person"

    def test_rightmost(self):
        s = scene(det("person", 10, 50, 60, 150), det("car", 300, 50, 390, 150), width=400)
        [pair] = RightMost().apply(s, 0)
        assert pair.answer == "car"

    def test_ties_skip(self):
        s = scene(det("person", 10, 50, 60, 150), det("car", 10, 200, 60, 250), width=400)
        assert LeftMost().apply(s, 0) == []

    def test_leftmost_aspect(self):
        s = scene(det("person", 10, 50, 60, 150), det("car", 120, 50, 200, 150), width=400)
        [pair] = LeftMostWidthVsHeight().apply(s, 0)
        assert pair.answer == "No"
        assert "wider than it is tall" in pair.question

        reversed_ = LeftMostWidthVsHeight(TemplateConfig(reversed_aspect_phrasing=True))
        [pair] = reversed_.apply(s, 0)
        assert pair.answer == "Yes"
        assert "taller than it is wide" in pair.question

    def test_leftmost_aspect_needs_single_instance(self):
        s = scene(
            det("person", 10, 50, 60, 150),
            det("person", 300, 50, 350, 150),
            det("car", 120, 50, 200, 150),
            width=400,
        )
        assert LeftMost().apply(s, 0)[0].answer == "person"
        assert LeftMostWidthVsHeight().apply(s, 0) == []


class TestSize:
    def test_largest(self):
        s = scene(det("truck", 0, 0, 100, 100), det("car", 200, 0, 300, 40))
        [pair] = LargestAppearance().apply(s, 0)
        assert pair.answer == "truck"

    def test_largest_within_margin(self):
        s = scene(det("truck", 0, 0, 100, 100), det("car", 200, 0, 300, 80))
        assert LargestAppearance().apply(s, 0) == []

    def test_rank_three(self):
        s = scene(
            det("truck", 0, 0, 90, 100),
            det("car", 200, 0, 300, 30),
            det("person", 400, 0, 425, 40),
        )
        template = build_template("RankLargestK(3)")
        [pair] = template.apply(s, 0)
        assert pair.answer == "truck, car, person"
        assert pair.template_id == "RankLargestK(3)"
        assert pair.question.startswith("Rank the 3 kinds of objects")

    def test_rank_checks_boundary_after_k(self):
        s = scene(
            det("truck", 0, 0, 90, 100),
            det("car", 200, 0, 300, 30),
            det("person", 400, 0, 425, 40),
            det("bicycle", 500, 0, 525, 32),
        )
        assert build_template("RankLargestK(3)").apply(s, 0) == []

    @pytest.mark.parametrize("dog_side, expected", [(30, []), (20, ["truck, car, person"])])
    def test_rank_fourth_class_near_third(self, dog_side, expected):
        s = scene(
            det("truck", 0, 0, 90, 100),
            det("car", 200, 0, 260, 50),
            det("person", 300, 0, 320, 50),
            det("dog", 400, 0, 400 + dog_side, dog_side),
        )
        assert [p.answer for p in build_template("RankLargestK(3)").apply(s, 0)] == expected

    def test_width_vs_height(self):
        s = scene(det("car", 0, 0, 100, 40), det("box", 200, 0, 250, 50))
        [pair] = WidthVsHeight().apply(s, 0)
        assert pair.objects_involved == ("car",)
        assert pair.answer == "Yes"

        [pair] = WidthVsHeight(TemplateConfig(reversed_aspect_phrasing=True)).apply(s, 0)
        assert pair.question.startswith("Does the height of the car")
        assert pair.answer == "No"


class TestFrequency:
    @staticmethod
    def counts_scene(n_car, n_person):
        return scene(*row_of("car", n_car, y=100), *row_of("person", n_person, y=300))

    def test_clear_winner(self):
        s = self.counts_scene(7, 2)
        assert MostAppearance().apply(s, 0)[0].answer == "car"
        assert LeastAppearance().apply(s, 0)[0].answer == "person"

    def test_inclusive_boundary(self):
        s = self.counts_scene(3, 2)
        assert MostAppearance().apply(s, 0)[0].answer == "car"
        assert LeastAppearance().apply(s, 0)[0].answer == "person"

    def test_tie(self):
        s = self.counts_scene(2, 2)
        assert MostAppearance().apply(s, 0) == []
        assert LeastAppearance().apply(s, 0) == []


class TestCounting:
    def test_how_many(self):
        s = scene(*row_of("car", 3))
        [pair] = HowMany().apply(s, 0)
        assert pair.question == "How many car(s) are there in this image?"
        assert pair.answer == "3"

    def test_are_more(self):
        s = scene(*row_of("car", 5, y=100), *row_of("person", 2, y=300))
        answers = answers_by_objects(AreMore().apply(s, 0))
        assert answers == {("car", "person"): "Yes", ("person", "car"): "No"}

    def test_which_more(self):
        s = scene(
            *row_of("car", 6, y=100), *row_of("person", 2, y=250), *row_of("truck", 1, y=400)
        )
        [pair] = WhichMore().apply(s, 0)
        assert pair.question == "What appears the most in this image: cars, persons, or trucks?"
        assert pair.answer == "car"

    def test_which_more_two_classes_is_an_empty_case(self):
        s = scene(*row_of("car", 6, y=100), *row_of("person", 2, y=250))
        assert WhichMore().describe().predicates == ("at_least_x_classes(2)",)
        outcome = run_template(WhichMore(), s)
        assert outcome.passed
        assert outcome.empty

    def test_threshold_targets(self):
        assert threshold_targets(6, 2.0) == (3, 12)
        assert threshold_targets(1, 2.0) == (1, 2)

    def test_threshold_questions(self):
        s = scene(*row_of("car", 6))
        more = [(p.question, p.answer) for p in MoreThanThresholdHowMany().apply(s, 0)]
        assert more == [
            ("Are there 3 or more car(s) in this image? Respond Yes/No.", "Yes"),
            ("Are there 12 or more car(s) in this image? Respond Yes/No.", "No"),
        ]
        less = [(p.question, p.answer) for p in LessThanThresholdHowMany().apply(s, 0)]
        assert less == [
            ("Are there less than 12 car(s) in this image? Respond Yes/No.", "Yes"),
            ("Are there less than 3 car(s) in this image? Respond Yes/No.", "No"),
        ]

    def test_less_than_one_becomes_presence(self):
        s = scene(det("car", 0, 0, 10, 10))
        questions = [(p.question, p.answer) for p in LessThanThresholdHowMany().apply(s, 0)]
        assert questions[1] == ("Are there no car(s) in this image? Respond Yes/No.", "No")

    def test_buckets_hold_count(self):
        for n in range(1, 60):
            buckets, index = count_buckets(n, question_rng(n, "buckets"))
            assert buckets[index][0] <= n <= buckets[index][1]
            assert buckets[0][0] >= 1
            for (_, hi), (lo, _) in zip(buckets, buckets[1:]):
                assert lo == hi + 1

    def test_multi_choice(self):
        s = scene(*row_of("car", 9, y=100), *row_of("person", 2, y=300))
        [pair] = MultiChoiceHowMany().apply(s, 7)
        assert pair.objects_involved == ("car",)
        assert pair.choices[3] == "Unsure / Not Visible"
        holding = []
        for letter, option in zip("ABC", pair.choices[:3]):
            lo, hi = (int(v) for v in option.split("-"))
            if lo <= 9 <= hi:
                holding.append(letter)
        assert holding == [pair.answer]
        assert MultiChoiceHowMany().apply(s, 7) == [pair]


class TestLocalization:
    def test_thirds(self):
        s = scene(det("dog", 10, 10, 80, 50), width=300, height=200)
        [pair] = IsObjectCentered().apply(s, 0)
        assert pair.answer == "A"
        assert pair.choices == ("left third", "middle third", "right third")

    def test_straddling(self):
        s = scene(det("dog", 95, 10, 150, 50), width=300, height=200)
        assert IsObjectCentered().apply(s, 0) == []

    def test_grid_cell(self):
        s = scene(det("cat", 210, 160, 390, 290), width=400, height=300)
        [pair] = build_template("Quadrants(2,2)").apply(s, 0)
        assert pair.answer == "4"
        assert "grid of 2 rows x 2 columns" in pair.question

    def test_repeated_class_is_not_asked(self):
        s = scene(det("cat", 10, 10, 90, 90), det("cat", 210, 160, 390, 290), width=400, height=300)
        assert build_template("Quadrants(2,2)").apply(s, 0) == []


class TestArrangement:
    def test_row_of_three(self):
        [pair] = ObjectsInRow().apply(scene(*row_of("car", 3)), 0)
        assert pair.answer == "Yes"
        assert pair.objects_involved == ("car", "car", "car")

    def test_no_row(self):
        s = scene(
            det("car", 10, 10, 30, 30),
            det("car", 60, 270, 80, 290),
            det("car", 110, 10, 130, 30),
            width=300,
            height=300,
        )
        [pair] = ObjectsInRow().apply(s, 0)
        assert pair.answer == "No"

    def test_objects_in_line(self):
        s = scene(
            *row_of("car", 3),
            det("person", 400, 380, 420, 420),
            det("truck", 500, 240, 540, 260),
        )
        [pair] = ObjectsInLine().apply(s, 3)
        letter_index = "ABCD".index(pair.answer)
        assert pair.choices[letter_index] == "car, car, car"
        assert pair.choices[3] == NO_ROW_OPTION
        assert len(set(pair.choices)) == 4
        assert ObjectsInLine().apply(s, 3) == [pair]

    def test_clustering_needs_nine(self):
        s = scene(*row_of("car", 8))
        assert MostClusteredObjects().apply(s, 0) == []


class TestDepth:
    def test_closer(self):
        s = scene(det("car", 0, 0, 50, 50, depth=5.0), det("person", 100, 0, 150, 50, depth=12.0))
        closer = answers_by_objects(Closer().apply(s, 0))
        assert closer == {("car", "person"): "Yes", ("person", "car"): "No"}
        farther = answers_by_objects(Farther().apply(s, 0))
        assert farther == {("car", "person"): "No", ("person", "car"): "Yes"}

    def test_ambiguous_band(self):
        s = scene(det("car", 0, 0, 50, 50, depth=5.0), det("person", 100, 0, 150, 50, depth=6.0))
        assert Closer().apply(s, 0) == []
        assert Farther().apply(s, 0) == []

    def test_missing_depth(self):
        s = scene(det("car", 0, 0, 50, 50), det("person", 100, 0, 150, 50))
        with pytest.raises(MissingDepthChannel):
            Closer().apply(s, 0)

    def test_ranking(self):
        s = scene(
            det("truck", 0, 0, 50, 50, depth=20.0),
            det("car", 100, 0, 150, 50, depth=2.0),
            det("person", 200, 0, 250, 50, depth=5.0),
        )
        [pair] = DepthRanking(k=3).apply(s, 0)
        assert pair.answer == "car, person, truck"

    @pytest.mark.parametrize("dog_depth, expected", [(25.0, []), (40.0, ["car, person, truck"])])
    def test_ranking_fourth_class_near_third(self, dog_depth, expected):
        s = scene(
            det("truck", 0, 0, 50, 50, depth=20.0),
            det("car", 100, 0, 150, 50, depth=2.0),
            det("person", 200, 0, 250, 50, depth=5.0),
            det("dog", 300, 0, 350, 50, depth=dog_depth),
        )
        assert [p.answer for p in DepthRanking(k=3).apply(s, 0)] == expected


def test_pairs_are_deterministic(street_scene):
    for template in build_templates(["RightOf", "ObjectsInLine", "MultiChoiceHowMany", "HowMany"]):
        assert template.apply(street_scene, 11) == template.apply(street_scene, 11)


def test_answers_are_single_letters_for_choice_questions(mixed_corpus):
    for template in build_templates(["IsObjectCentered", "ObjectsInLine", "MultiChoiceHowMany"]):
        for s in mixed_corpus:
            for pair in template.apply(s, 0):
                assert re.fullmatch(r"[ABCD]", pair.answer)


FAMILIES = [
    (realize_directional, ["LeftOf", "RightOf"]),
    (realize_extremal_position, ["LeftMost", "RightMost", "LeftMostWidthVsHeight", "RightMostWidthVsHeight"]),
    (realize_size, ["LargestAppearance", "RankLargestK(3)", "WidthVsHeight"]),
    (realize_frequency, ["MostAppearance", "LeastAppearance"]),
    (
        realize_counting,
        ["HowMany", "AreMore", "WhichMore", "MoreThanThresholdHowMany",
         "LessThanThresholdHowMany", "MultiChoiceHowMany"],
    ),
    (realize_localization, ["IsObjectCentered", "Quadrants(2,2)", "Quadrants(3,3)"]),
    (realize_arrangement, ["ObjectsInRow", "ObjectsInLine", "MostClusteredObjects"]),
    (realize_depth, ["Closer", "Farther", "DepthRanking(3)"]),
]


@pytest.mark.parametrize("realize, template_ids", FAMILIES, ids=[f.__name__ for f, _ in FAMILIES])
def test_family_realizers_match_their_templates(realize, template_ids):
    for recipe_seed in range(20):
        try:
            s = synth_scene(random_recipe(recipe_seed, with_depth=True))
        except PlacementInfeasible:
            continue
        if not s.has_depth:
            continue
        expected = [p for t in build_templates(template_ids) for p in t.apply(s, 4)]
        assert realize(s, seed=4) == expected
