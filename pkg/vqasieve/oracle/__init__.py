"""
vqasieve Oracle

Synthetic scenes with known layouts and an independent brute-force
re-derivation of every template, used to check the template library.
"""

from vqasieve.oracle.answers import ORACLE_TEMPLATES, oracle_answers
from vqasieve.oracle.differential import DifferentialReport, Mismatch, differential_run
from vqasieve.oracle.synth import (
    PlacementInfeasible,
    SceneRecipe,
    random_recipe,
    recipe_suite,
    synth_scene,
)

__all__ = [
    "ORACLE_TEMPLATES",
    "oracle_answers",
    "DifferentialReport",
    "Mismatch",
    "differential_run",
    "PlacementInfeasible",
    "SceneRecipe",
    "random_recipe",
    "recipe_suite",
    "synth_scene",
]
