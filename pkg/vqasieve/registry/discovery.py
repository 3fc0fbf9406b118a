"""
vqasieve Plugin Discovery

Loads extra question templates from a plugin directory.
"""

from __future__ import annotations

import importlib.util
import logging
from pathlib import Path
from types import ModuleType
from typing import Iterator, Type

from vqasieve.registry.base import PluginRegistry

logger = logging.getLogger(__name__)


def _plugin_files(directory: Path) -> Iterator[Path]:
    """Top-level modules first, then those of sub-packages; private names skipped."""
    candidates = sorted(directory.glob("*.py"))
    for child in sorted(directory.iterdir()):
        if child.is_dir() and not child.name.startswith("_"):
            candidates.extend(sorted(child.rglob("*.py")))
    return (p for p in candidates if not p.name.startswith("_"))


def _import_file(path: Path) -> ModuleType | None:
    spec = importlib.util.spec_from_file_location(f"vqasieve_plugin_{path.stem}", path)
    if spec is None or spec.loader is None:
        return None
    module = importlib.util.module_from_spec(spec)
    try:
        spec.loader.exec_module(module)
    except Exception as e:
        logger.error(f"Plugin file {path} failed to import: {e}")
        return None
    return module


def _concrete_subclasses(module: ModuleType, base_class: Type) -> dict[str, Type]:
    """Non-abstract base_class subclasses defined in module itself."""
    found = {}
    for name, obj in vars(module).items():
        if name.startswith("_") or not isinstance(obj, type):
            continue
        if obj is base_class or not issubclass(obj, base_class):
            continue
        if obj.__module__ != module.__name__ or getattr(obj, "__abstractmethods__", None):
            continue
        found[name] = obj
    return dict(sorted(found.items()))


def discover_plugins(
    directory: Path,
    base_class: Type,
    registry: PluginRegistry | None = None,
) -> dict[str, Type]:
    """
    Import the plugin modules of a directory and collect their classes.

    A file that fails to import is logged and skipped, as is a class whose
    registry key is already taken.

    Args:
        directory: Plugin directory
        base_class: Classes must derive from this
        registry: Registry the classes are added to, if any

    Returns:
        Dict of class name -> class
    """
    directory = Path(directory)
    if not directory.is_dir():
        logger.debug(f"No plugin directory at {directory}")
        return {}

    discovered: dict[str, Type] = {}
    for path in _plugin_files(directory):
        module = _import_file(path)
        if module is None:
            continue
        for name, cls in _concrete_subclasses(module, base_class).items():
            if registry is not None:
                try:
                    registry.register(cls)
                except ValueError as e:
                    logger.error(f"Skipping {name} from {path.name}: {e}")
                    continue
            discovered[name] = cls
            logger.info(f"Loaded template plugin {name} from {path.name}")
    return discovered


_loaded_template_dirs: dict[Path, dict[str, Type]] = {}


def discover_templates(directory: Path) -> dict[str, Type]:
    """
    Load question-template plugins into the template registry.

    Each directory is imported once per process; later calls return the
    classes found the first time.
    """
    from vqasieve.templates.base import TemplateBase
    from vqasieve.templates.registry import template_registry

    key = Path(directory).resolve()
    if key not in _loaded_template_dirs:
        _loaded_template_dirs[key] = discover_plugins(key, TemplateBase, template_registry)
    return dict(_loaded_template_dirs[key])
