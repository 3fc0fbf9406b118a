"""
vqasieve Registry Module

Plugin registry and discovery.
"""

from vqasieve.registry.base import PluginRegistry
from vqasieve.registry.discovery import discover_plugins, discover_templates

__all__ = [
    "PluginRegistry",
    "discover_plugins",
    "discover_templates",
]
