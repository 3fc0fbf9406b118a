"""
vqasieve Templates Module

The question-template library: predicates, template base class, registry
and the built-in templates.
"""

from vqasieve.templates.base import (
    MissingDepthChannel,
    TemplateBase,
    TemplateDescriptor,
)
from vqasieve.templates.registry import (
    UnknownTemplate,
    build_template,
    build_templates,
    get_template,
    list_templates,
    parse_template_id,
    register_template,
    template_registry,
)

# Built-in templates
from vqasieve.templates.builtins.arrangement import (
    MostClusteredObjects,
    ObjectsInLine,
    ObjectsInRow,
)
from vqasieve.templates.builtins.counting import (
    AreMore,
    HowMany,
    LessThanThresholdHowMany,
    MoreThanThresholdHowMany,
    MultiChoiceHowMany,
    WhichMore,
)
from vqasieve.templates.builtins.depth import Closer, DepthRanking, Farther
from vqasieve.templates.builtins.directional import LeftOf, RightOf
from vqasieve.templates.builtins.extremal import (
    LeftMost,
    LeftMostWidthVsHeight,
    RightMost,
    RightMostWidthVsHeight,
)
from vqasieve.templates.builtins.frequency import LeastAppearance, MostAppearance
from vqasieve.templates.builtins.localization import IsObjectCentered, Quadrants
from vqasieve.templates.builtins.size import LargestAppearance, RankLargestK, WidthVsHeight

BUILTIN_TEMPLATES = (
    IsObjectCentered,
    WidthVsHeight,
    LeftMost,
    RightMost,
    LargestAppearance,
    RankLargestK,
    MostAppearance,
    LeastAppearance,
    LeftOf,
    RightOf,
    HowMany,
    AreMore,
    WhichMore,
    Quadrants,
    LeftMostWidthVsHeight,
    RightMostWidthVsHeight,
    MoreThanThresholdHowMany,
    LessThanThresholdHowMany,
    MultiChoiceHowMany,
    ObjectsInRow,
    ObjectsInLine,
    MostClusteredObjects,
    Closer,
    Farther,
    DepthRanking,
)

# Auto-register built-in templates
for _cls in BUILTIN_TEMPLATES:
    register_template(_cls)

__all__ = [
    "BUILTIN_TEMPLATES",
    "MissingDepthChannel",
    "TemplateBase",
    "TemplateDescriptor",
    "UnknownTemplate",
    "build_template",
    "build_templates",
    "get_template",
    "list_templates",
    "parse_template_id",
    "register_template",
    "template_registry",
] + [cls.__name__ for cls in BUILTIN_TEMPLATES]
