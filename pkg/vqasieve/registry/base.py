"""
vqasieve Plugin Registry Base

Keyed registry of plugin classes, shared by the template library and the
plugin loader.
"""

from __future__ import annotations

import logging
from typing import Callable, Generic, Type, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")


class PluginRegistry(Generic[T]):
    """
    Classes of one plugin family, keyed by a name derived from each class.

    Usage:
        registry = PluginRegistry(base_class=TemplateBase, key=lambda c: c.template_name)

        @registry.register
        class Crowded(TemplateBase):
            template_name = "Crowded"
            ...

        registry.get("Crowded")
    """

    def __init__(
        self,
        base_class: Type[T] | None = None,
        key: Callable[[Type[T]], str] | None = None,
    ):
        self._classes: dict[str, Type[T]] = {}
        self._base_class = base_class
        self._key = key or (lambda cls: cls.__name__)

    def register(self, cls: Type[T]) -> Type[T]:
        """
        Add a class; usable as a decorator. Registering the same class twice
        is a no-op.

        Raises:
            ValueError: cls is outside the family, or another class holds its key
        """
        if self._base_class is not None and not issubclass(cls, self._base_class):
            raise ValueError(f"{cls.__name__} is not a {self._base_class.__name__}")

        key = self._key(cls)
        holder = self._classes.setdefault(key, cls)
        if holder is not cls:
            raise ValueError(
                f"'{key}' is taken by {holder.__module__}.{holder.__name__}"
            )
        logger.debug(f"Registered {key}")
        return cls

    def get(self, key: str) -> Type[T] | None:
        return self._classes.get(key)

    def list_all(self) -> dict[str, Type[T]]:
        return dict(self._classes)
