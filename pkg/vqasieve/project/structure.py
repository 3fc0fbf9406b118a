"""
vqasieve Run Configuration Files

YAML loading, validation and scaffolding of generation run configs.
"""

from __future__ import annotations

from dataclasses import fields
from pathlib import Path
from typing import Any

import yaml

from vqasieve.data.descriptors import VqaSieveError
from vqasieve.project.config import DEFAULT_TEMPLATES, DEPTH_TEMPLATES, RunConfig, TemplateConfig

CONFIG_ENV_VAR = "VQASIEVE_CONFIG"

_TOP_LEVEL_KEYS = {
    "inputs",
    "format",
    "depth_dir",
    "inline_depth",
    "variant",
    "templates",
    "seed",
    "workers",
    "output_dir",
    "split_fraction",
    "frame_select",
    "plugin_dir",
}


class RunConfigError(VqaSieveError, ValueError):
    """Raised when a run configuration is unreadable or invalid."""

    def __init__(self, problems: list[str] | str):
        self.problems = [problems] if isinstance(problems, str) else list(problems)
        super().__init__(
            "Invalid run configuration:\n" + "\n".join(f"  - {p}" for p in self.problems)
        )


# =============================================================================
# Loading
# =============================================================================


def load_run_config(path: Path | None = None, overrides: dict[str, Any] | None = None) -> RunConfig:
    """
    Build a RunConfig from an optional YAML file plus overrides.

    Relative paths in the file resolve against the file's directory.
    Overrides use RunConfig field names and win over file values; None
    values are ignored.

    Args:
        path: YAML config file, or None for defaults
        overrides: Field values from the command line

    Returns:
        RunConfig (not yet validated; see validate_run_config)

    Raises:
        RunConfigError: Unreadable YAML or malformed sections
    """
    config = RunConfig()
    if path is not None:
        path = Path(path)
        try:
            with open(path, encoding="utf-8") as f:
                data = yaml.safe_load(f) or {}
        except OSError as e:
            raise RunConfigError(f"Cannot read config file {path}: {e}") from e
        except yaml.YAMLError as e:
            raise RunConfigError(f"Config file {path} is not valid YAML: {e}") from e
        if not isinstance(data, dict):
            raise RunConfigError(f"Config file {path} must hold a mapping")
        config = _parse_run_config(data, path.parent)

    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in {f.name for f in fields(RunConfig)}:
            raise RunConfigError(f"Unknown override: {key}")
        setattr(config, key, value)
    return config


def _parse_run_config(data: dict[str, Any], root: Path) -> RunConfig:
    unknown = set(data) - _TOP_LEVEL_KEYS
    if unknown:
        raise RunConfigError([f"Unknown config key: {k}" for k in sorted(unknown)])

    def resolve(raw) -> Path | None:
        if raw in (None, ""):
            return None
        p = Path(raw)
        return p if p.is_absolute() else root / p

    inputs = data.get("inputs", [])
    if isinstance(inputs, str):
        inputs = [inputs]

    templates_data = data.get("templates") or {}
    if not isinstance(templates_data, dict):
        raise RunConfigError("'templates' must be a mapping with enabled/settings/overrides")
    try:
        template_config = TemplateConfig().with_overrides(templates_data.get("settings") or {})
    except KeyError as e:
        raise RunConfigError(str(e.args[0])) from e

    frame = data.get("frame_select") or {}
    if isinstance(frame, bool):
        frame = {"enabled": frame}

    try:
        return RunConfig(
            inputs=[resolve(p) for p in inputs],
            format=data.get("format", "native"),
            depth_dir=resolve(data.get("depth_dir")),
            inline_depth=bool(data.get("inline_depth", False)),
            variant=data.get("variant", "without_depth"),
            templates=_parse_enabled(templates_data.get("enabled")),
            template_config=template_config,
            template_overrides=dict(templates_data.get("overrides") or {}),
            seed=int(data.get("seed", 0)),
            workers=int(data.get("workers", 1)),
            output_dir=resolve(data.get("output_dir")) or Path("out"),
            split_fraction=(
                float(data["split_fraction"]) if data.get("split_fraction") is not None else None
            ),
            frame_select=bool(frame.get("enabled", False)),
            frame_group_key=str(frame.get("group_key", "segment")),
            frame_camera=frame.get("camera"),
            plugin_dir=resolve(data.get("plugin_dir")),
        )
    except (TypeError, ValueError) as e:
        raise RunConfigError(f"Malformed config value: {e}") from e


def _parse_enabled(raw) -> list[str] | None:
    if raw is None:
        return None
    if isinstance(raw, str):
        return [t.strip() for t in split_template_list(raw)]
    if not isinstance(raw, list):
        raise RunConfigError("'templates.enabled' must be a list of template ids")
    return [str(t) for t in raw]


def split_template_list(text: str) -> list[str]:
    """
    Split a comma-separated template list, keeping commas inside parentheses.

    "HowMany,Quadrants(2,3)" -> ["HowMany", "Quadrants(2,3)"]
    """
    items, depth, current = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            items.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    items.append("".join(current).strip())
    return [i for i in items if i]


# =============================================================================
# Validation
# =============================================================================


def validate_run_config(config: RunConfig, check_inputs: bool = True) -> None:
    """
    Check a RunConfig, collecting every problem before raising.

    Loads plugins from config.plugin_dir so their template ids resolve.

    Raises:
        RunConfigError: One or more problems found
    """
    from vqasieve.registry.discovery import discover_templates
    from vqasieve.templates import build_template, UnknownTemplate

    problems: list[str] = []

    if config.format not in ("coco", "native"):
        problems.append(f"format must be 'coco' or 'native', got {config.format!r}")
    if config.variant not in ("without_depth", "with_depth"):
        problems.append(f"variant must be 'without_depth' or 'with_depth', got {config.variant!r}")
    if config.workers < 1:
        problems.append(f"workers must be >= 1, got {config.workers}")
    if config.split_fraction is not None and not 0.0 < config.split_fraction < 1.0:
        problems.append(f"split fraction must be in (0, 1), got {config.split_fraction}")

    if check_inputs:
        if not config.inputs:
            problems.append("no input files given")
        for p in config.inputs:
            if not Path(p).is_file():
                problems.append(f"input file not found: {p}")
    if config.depth_dir is not None and not Path(config.depth_dir).is_dir():
        problems.append(f"depth directory not found: {config.depth_dir}")

    if config.plugin_dir is not None:
        if Path(config.plugin_dir).is_dir():
            discover_templates(Path(config.plugin_dir))
        else:
            problems.append(f"plugin directory not found: {config.plugin_dir}")

    problems.extend(config.template_config.validate())

    depth_templates = []
    for template_id in config.enabled_templates:
        try:
            template = build_template(
                template_id, config.template_config, config.template_overrides
            )
        except UnknownTemplate as e:
            problems.append(str(e))
            continue
        except KeyError as e:
            problems.append(f"{template_id}: {e.args[0]}")
            continue
        problems.extend(f"{template_id}: {p}" for p in template.config.validate())
        if template.requires_depth:
            depth_templates.append(template.template_id)

    if depth_templates and config.depth_dir is None and not config.inline_depth:
        problems.append(
            "depth templates enabled without a depth source (set depth_dir or "
            f"inline_depth): {', '.join(depth_templates)}"
        )

    if problems:
        raise RunConfigError(problems)


# =============================================================================
# Scaffolding
# =============================================================================


def write_default_config(path: Path, variant: str = "without_depth") -> Path:
    """
    Write a complete default run config to path.

    Args:
        path: Destination YAML file (parent directories are created)
        variant: "without_depth" or "with_depth"

    Returns:
        The written path
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    enabled = list(DEFAULT_TEMPLATES)
    if variant == "with_depth":
        enabled += list(DEPTH_TEMPLATES)

    data = {
        "inputs": ["annotations.jsonl"],
        "format": "native",
        "depth_dir": "depth" if variant == "with_depth" else None,
        "inline_depth": False,
        "variant": variant,
        "seed": 0,
        "workers": 1,
        "output_dir": "out",
        "split_fraction": None,
        "frame_select": {"enabled": False, "group_key": "segment", "camera": None},
        "plugin_dir": None,
        "templates": {
            "enabled": enabled,
            "settings": TemplateConfig().to_dict(),
            "overrides": {},
        },
    }
    with open(path, "w", encoding="utf-8") as f:
        yaml.dump(data, f, default_flow_style=False, sort_keys=False)
    return path
