"""
vqasieve Template Base

Base class for all question templates. A template pairs an ordered list
of predicates (the sieve) with a realizer that turns a scene into QA pairs.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Sequence

from vqasieve.data.descriptors import Category, QAPair, SceneRecord, VqaSieveError
from vqasieve.project.config import TemplateConfig
from vqasieve.templates.predicates import Predicate


class MissingDepthChannel(VqaSieveError):
    """A depth template ran on a scene whose detections carry no depth."""


@dataclass(frozen=True)
class TemplateDescriptor:
    """Static description of an instantiated template."""

    template_id: str
    category: Category
    requires_depth: bool
    predicates: tuple[str, ...]
    question_pattern: str


class TemplateBase(ABC):
    """
    Base class for all question templates.

    Subclasses must define:
        - template_name: str (registry key, e.g. "Quadrants")
        - category: Category
        - question_pattern: str with {placeholders}

    Optionally override:
        - requires_depth (default False)
        - get_parameters() for parameterized templates like Quadrants(N,M)

    And implement:
        - predicates() -> ordered list of Predicate
        - apply(scene, seed) -> list[QAPair]

    apply() must be total: on a scene where its predicates fail it returns
    [] (it never relies on the runner having checked them).
    """

    template_name: str = "UnnamedTemplate"
    version: str = "1.0.0"
    category: Category = Category.SPATIAL_RELATIONS
    requires_depth: bool = False
    question_pattern: str = ""

    def __init__(self, config: TemplateConfig | None = None, **params: Any):
        self.config = config or TemplateConfig()
        self.params = params
        self._predicates = tuple(self.predicates())
        if not self._predicates:
            raise ValueError(f"{self.template_name} declares no predicates")

    @classmethod
    def get_parameters(cls) -> List[Dict[str, Any]]:
        """
        Positional parameters of a parameterized template id.

        Each parameter is a dict with:
        - name: keyword passed to __init__
        - type: 'int'
        - min/max: inclusive bounds
        - default: value used when the id has no argument list
        """
        return []

    @property
    def template_id(self) -> str:
        """Id as written in configs and output, e.g. "Quadrants(2,3)"."""
        parameters = self.get_parameters()
        if not parameters:
            return self.template_name
        args = ",".join(str(self.params[p["name"]]) for p in parameters)
        return f"{self.template_name}({args})"

    @property
    def predicate_list(self) -> tuple[Predicate, ...]:
        return self._predicates

    @abstractmethod
    def predicates(self) -> list[Predicate]:
        """Ordered preconditions; cheapest and most selective first."""
        ...

    @abstractmethod
    def apply(self, scene: SceneRecord, seed: int) -> list[QAPair]:
        """
        Realize QA pairs for one scene.

        Args:
            scene: Scene to question
            seed: Seed of this (scene, template) realization

        Returns:
            QA pairs, possibly empty
        """
        ...

    def describe(self) -> TemplateDescriptor:
        return TemplateDescriptor(
            template_id=self.template_id,
            category=self.category,
            requires_depth=self.requires_depth,
            predicates=tuple(p.name for p in self._predicates),
            question_pattern=self.question_pattern,
        )

    def pair(
        self,
        scene: SceneRecord,
        seed: int,
        question: str,
        answer: str,
        objects: Sequence[str] = (),
        choices: Sequence[str] | None = None,
    ) -> QAPair:
        """Build a QAPair stamped with this template's id and category."""
        return QAPair(
            image_id=scene.image_id,
            template_id=self.template_id,
            category=self.category,
            question=question,
            answer=answer,
            choices=tuple(choices) if choices is not None else None,
            objects_involved=tuple(objects),
            generation_seed=seed,
        )

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.template_id}>"


def require_depth(scene: SceneRecord) -> None:
    """Raise MissingDepthChannel unless every detection carries a depth summary."""
    if not scene.has_depth:
        raise MissingDepthChannel(f"Scene {scene.image_id} has no depth for every detection")


def ratio_at_least(larger: float, smaller: float, ratio: float) -> bool:
    """Inclusive multiplicative margin test: larger >= ratio * smaller."""
    return larger >= ratio * smaller


def label_list(labels: Sequence[str]) -> str:
    """Comma-separated rendering used for list answers and option text."""
    return ", ".join(labels)
