"""
vqasieve Data Module

Scene model, annotation loaders and depth grids.
"""

from vqasieve.data.descriptors import (
    BBox,
    Category,
    DepthSummary,
    Detection,
    QAPair,
    SceneRecord,
    Split,
    VqaSieveError,
)
from vqasieve.data.loader import IngestTally, load_scenes, parse_coco, parse_native, write_native

__all__ = [
    "BBox",
    "Category",
    "DepthSummary",
    "Detection",
    "QAPair",
    "SceneRecord",
    "Split",
    "VqaSieveError",
    "IngestTally",
    "load_scenes",
    "parse_coco",
    "parse_native",
    "write_native",
]
