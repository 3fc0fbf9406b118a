"""
vqasieve Template Registry

Registry of template classes and construction of template instances from
ids such as "HowMany" or "Quadrants(2,3)".
"""

from __future__ import annotations

import logging
import re
from typing import Any, Iterable, Mapping

from vqasieve.data.descriptors import VqaSieveError
from vqasieve.project.config import TemplateConfig
from vqasieve.registry.base import PluginRegistry
from vqasieve.templates.base import TemplateBase

logger = logging.getLogger(__name__)

_ID_PATTERN = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*$")


class UnknownTemplate(VqaSieveError):
    """Template id does not name a registered template or has bad arguments."""


# Global template registry instance
_template_registry = PluginRegistry(
    base_class=TemplateBase, key=lambda cls: cls.template_name
)


def register_template(cls):
    """
    Decorator to register a template class.

    Usage:
        @register_template
        class MyTemplate(TemplateBase):
            ...
    """
    return _template_registry.register(cls)


def get_template(name: str):
    """Get a template class by name."""
    return _template_registry.get(name)


def list_templates():
    """Return all registered template classes."""
    return _template_registry.list_all()


template_registry = _template_registry


def parse_template_id(template_id: str) -> tuple[str, tuple[str, ...]]:
    """
    Split a template id into name and raw arguments.

    "Quadrants(2,3)" -> ("Quadrants", ("2", "3")); "HowMany" -> ("HowMany", ()).

    Raises:
        UnknownTemplate: The id is syntactically invalid
    """
    match = _ID_PATTERN.match(template_id)
    if not match:
        raise UnknownTemplate(f"Malformed template id: {template_id!r}")
    name, raw_args = match.group(1), match.group(2)
    if raw_args is None:
        return name, ()
    args = tuple(a.strip() for a in raw_args.split(","))
    if any(not a for a in args):
        raise UnknownTemplate(f"Empty argument in template id: {template_id!r}")
    return name, args


def _bind_parameters(cls, template_id: str, args: tuple[str, ...]) -> dict[str, Any]:
    parameters = cls.get_parameters()
    if args and len(args) != len(parameters):
        raise UnknownTemplate(
            f"{template_id}: expected {len(parameters)} argument(s), got {len(args)}"
        )

    bound: dict[str, Any] = {}
    for i, spec in enumerate(parameters):
        if not args:
            bound[spec["name"]] = spec["default"]
            continue
        try:
            value = int(args[i])
        except ValueError:
            raise UnknownTemplate(f"{template_id}: '{args[i]}' is not an integer")
        if not spec.get("min", value) <= value <= spec.get("max", value):
            raise UnknownTemplate(
                f"{template_id}: {spec['name']} must be in "
                f"[{spec.get('min')}, {spec.get('max')}], got {value}"
            )
        bound[spec["name"]] = value
    return bound


def build_template(
    template_id: str,
    config: TemplateConfig | None = None,
    overrides: Mapping[str, Mapping[str, Any]] | None = None,
) -> TemplateBase:
    """
    Instantiate one template from its id.

    Per-template overrides keyed by name ("Quadrants") are applied first,
    then those keyed by full id ("Quadrants(2,3)"), so the full id wins.

    Raises:
        UnknownTemplate: Unregistered name or bad arguments
    """
    name, args = parse_template_id(template_id)
    cls = get_template(name)
    if cls is None:
        raise UnknownTemplate(f"Unknown template: {name}")

    params = _bind_parameters(cls, template_id, args)
    config = config or TemplateConfig()
    overrides = overrides or {}
    for key in (name, template_id.replace(" ", "")):
        if key in overrides:
            config = config.with_overrides(dict(overrides[key]))
    try:
        return cls(config, **params)
    except ValueError as e:
        raise UnknownTemplate(f"{template_id}: {e}") from e


def build_templates(
    template_ids: Iterable[str],
    config: TemplateConfig | None = None,
    overrides: Mapping[str, Mapping[str, Any]] | None = None,
) -> list[TemplateBase]:
    """Instantiate templates; duplicate ids are dropped with a warning."""
    templates = []
    seen = set()
    for template_id in template_ids:
        template = build_template(template_id, config, overrides)
        if template.template_id in seen:
            logger.warning(f"Template {template.template_id} enabled twice; ignoring repeat")
            continue
        seen.add(template.template_id)
        templates.append(template)
    return templates
