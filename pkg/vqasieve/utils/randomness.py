"""
Seeded randomness used when realizing questions.

Every random choice a template makes goes through these helpers so that a
(scene, template, seed) triple always yields the same options in the same
order, whichever process realizes it.
"""

from __future__ import annotations

from typing import Sequence, TypeVar

import numpy as np

from vqasieve.data.descriptors import CHOICE_LETTERS, derive_seed

T = TypeVar("T")


def template_seed(run_seed: int, image_id: str, template_id: str) -> int:
    """Seed of one (scene, template) realization."""
    return derive_seed(run_seed, image_id, template_id)


def question_rng(seed: int, *key: object) -> np.random.Generator:
    """Generator for one question, keyed by whatever identifies it (class labels, ...)."""
    return np.random.default_rng(derive_seed(seed, *key))


def draw_distractors(pool: Sequence[T], count: int, rng: np.random.Generator) -> list[T]:
    """Draw `count` distinct entries of pool, in draw order."""
    if count > len(pool):
        raise ValueError(f"Cannot draw {count} distractors from a pool of {len(pool)}")
    picks = rng.choice(len(pool), size=count, replace=False)
    return [pool[int(i)] for i in picks]


def shuffle_options(
    correct: str | None,
    distractors: Sequence[str],
    fallback: str,
    rng: np.random.Generator,
) -> tuple[tuple[str, ...], str]:
    """
    Lay out a four-way multiple choice question.

    Options A-C are `correct` plus two distractors (or three distractors when
    there is no correct option) in a seeded order; D is always `fallback`.

    Returns:
        (choices, answer letter); the answer is D when correct is None
    """
    if correct is None:
        options = list(distractors[:3])
    else:
        options = [correct] + list(distractors[:2])
    if len(options) != 3:
        raise ValueError(f"Need three options for A-C, got {len(options)}")

    order = rng.permutation(3)
    choices = tuple(options[int(i)] for i in order) + (fallback,)
    if correct is None:
        return choices, CHOICE_LETTERS[3]
    return choices, CHOICE_LETTERS[int(np.flatnonzero(order == 0)[0])]
