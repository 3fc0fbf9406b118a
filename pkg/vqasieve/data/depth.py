"""
vqasieve Depth Grids

Binary depth-map loading and per-detection depth summaries.

File layout: ASCII header ``DEPTH v1 <width> <height>\\n`` followed by
width*height little-endian float32 values in row-major order.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace

import numpy as np

from vqasieve.data.descriptors import (
    Detection,
    DepthSummary,
    SceneRecord,
    VqaSieveError,
)

logger = logging.getLogger(__name__)

DEPTH_MAGIC = b"DEPTH"
DEPTH_VERSION = b"v1"

# Sentinel for pixels without a usable depth value
MISSING_DEPTH = float("nan")


class HeaderMismatch(VqaSieveError):
    """Depth file header is not ``DEPTH v1 <w> <h>``."""


class DimensionMismatch(VqaSieveError):
    """Depth grid dimensions differ from the scene's."""


class TruncatedPayload(VqaSieveError):
    """Depth file holds fewer values than its header announces."""


class NoDepthSamples(VqaSieveError):
    """Every pixel under a detection is missing depth."""


@dataclass(frozen=True, eq=False)
class DepthGrid:
    """
    Dense depth map for one image.

    Attributes:
        width, height: Dimensions in pixels
        values: (height, width) float32 array; MISSING_DEPTH (NaN) marks gaps
        missing_count: Number of missing pixels
    """

    width: int
    height: int
    values: np.ndarray
    missing_count: int = 0

    def __post_init__(self):
        if self.values.shape != (self.height, self.width):
            raise DimensionMismatch(
                f"Depth values shaped {self.values.shape}, "
                f"expected {(self.height, self.width)}"
            )

    @classmethod
    def from_array(cls, values) -> "DepthGrid":
        """Build a grid from raw values, masking NaN and non-positive entries."""
        arr = np.array(values, dtype=np.float32)
        bad = ~np.isfinite(arr) | (arr <= 0)
        arr[bad] = MISSING_DEPTH
        return cls(
            width=arr.shape[1],
            height=arr.shape[0],
            values=arr,
            missing_count=int(bad.sum()),
        )


def load_depth_grid(data: bytes, expected_width: int, expected_height: int) -> DepthGrid:
    """
    Parse a depth-grid file.

    Args:
        data: Raw file bytes
        expected_width: Width of the owning scene
        expected_height: Height of the owning scene

    Returns:
        DepthGrid with NaN/non-positive values replaced by MISSING_DEPTH

    Raises:
        HeaderMismatch: Missing or malformed header line
        DimensionMismatch: Header dimensions differ from the expected ones,
            or the payload carries extra values
        TruncatedPayload: Fewer values than the header announces
    """
    newline = data.find(b"\n")
    if newline < 0:
        raise HeaderMismatch("Depth file has no header line")

    parts = data[:newline].split()
    if len(parts) != 4 or parts[0] != DEPTH_MAGIC or parts[1] != DEPTH_VERSION:
        raise HeaderMismatch(f"Unrecognized depth header: {data[:newline]!r}")
    try:
        width, height = int(parts[2]), int(parts[3])
    except ValueError:
        raise HeaderMismatch(f"Non-integer depth dimensions: {data[:newline]!r}")

    if (width, height) != (expected_width, expected_height):
        raise DimensionMismatch(
            f"Depth grid is {width}x{height}, scene is {expected_width}x{expected_height}"
        )

    payload = data[newline + 1 :]
    expected_bytes = width * height * 4
    if len(payload) < expected_bytes:
        raise TruncatedPayload(
            f"Depth payload has {len(payload)} bytes, expected {expected_bytes}"
        )
    if len(payload) > expected_bytes:
        raise DimensionMismatch(
            f"Depth payload has {len(payload) - expected_bytes} trailing bytes"
        )

    values = np.frombuffer(payload, dtype="<f4").reshape((height, width))
    grid = DepthGrid.from_array(values)
    if grid.missing_count:
        logger.debug(f"Depth grid has {grid.missing_count} missing values")
    return grid


def encode_depth_grid(values) -> bytes:
    """Serialize a (height, width) array into the depth-grid file format."""
    arr = np.asarray(values, dtype="<f4")
    height, width = arr.shape
    header = b"%s %s %d %d\n" % (DEPTH_MAGIC, DEPTH_VERSION, width, height)
    return header + arr.tobytes(order="C")


def nearest_rank(values: np.ndarray, percentile: float) -> float:
    """Nearest-rank percentile (no interpolation) of a non-empty sample."""
    ordered = np.sort(values)
    # round() keeps 0.3 * 10 from ranking as 4
    rank = max(1, math.ceil(round(percentile * len(ordered), 9)))
    return float(ordered[rank - 1])


def summarize_detection_depth(
    detection: Detection, grid: DepthGrid, percentile: float
) -> DepthSummary:
    """
    Representative depth of one detection.

    Samples the detection's mask when present, else the pixels its box covers,
    and returns the nearest-rank percentile of the non-missing values.

    Raises:
        NoDepthSamples: Every sampled pixel is missing
    """
    if not 0.0 <= percentile <= 1.0:
        raise ValueError(f"percentile must be in [0, 1], got {percentile}")

    if detection.mask is not None:
        region = grid.values[detection.mask.decode()]
    else:
        box = detection.bbox
        col0, col1 = int(math.floor(box.x_min)), int(math.ceil(box.x_max))
        row0, row1 = int(math.floor(box.y_min)), int(math.ceil(box.y_max))
        region = grid.values[row0:row1, col0:col1].ravel()

    samples = region[np.isfinite(region)]
    if samples.size == 0:
        raise NoDepthSamples(
            f"No depth samples under '{detection.class_label}' at {detection.bbox.as_list()}"
        )

    return DepthSummary(
        representative_depth=nearest_rank(samples, percentile),
        percentile_used=percentile,
        sample_count=int(samples.size),
    )


def attach_depth(scene: SceneRecord, grid: DepthGrid, percentile: float) -> SceneRecord:
    """
    Fill in missing depth summaries from a depth grid.

    Detections that already carry a summary keep it; detections without any
    depth samples stay without one (the scene then counts as depth-less).
    """
    if (grid.width, grid.height) != (scene.width, scene.height):
        raise DimensionMismatch(
            f"Depth grid is {grid.width}x{grid.height}, "
            f"scene {scene.image_id} is {scene.width}x{scene.height}"
        )

    detections = []
    for det in scene.detections:
        if det.depth_summary is None:
            try:
                det = replace(
                    det, depth_summary=summarize_detection_depth(det, grid, percentile)
                )
            except NoDepthSamples as e:
                logger.warning(f"Scene {scene.image_id}: {e}")
        detections.append(det)
    return scene.replace_detections(detections)
