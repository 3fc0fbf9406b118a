"""
vqasieve Project Module

Run and template configuration, YAML loading and validation.
"""

from vqasieve.project.config import (
    DEFAULT_TEMPLATES,
    DEPTH_TEMPLATES,
    OutputPaths,
    RunConfig,
    TemplateConfig,
)
from vqasieve.project.structure import (
    CONFIG_ENV_VAR,
    RunConfigError,
    load_run_config,
    validate_run_config,
    write_default_config,
)

__all__ = [
    "DEFAULT_TEMPLATES",
    "DEPTH_TEMPLATES",
    "OutputPaths",
    "RunConfig",
    "TemplateConfig",
    "CONFIG_ENV_VAR",
    "RunConfigError",
    "load_run_config",
    "validate_run_config",
    "write_default_config",
]
