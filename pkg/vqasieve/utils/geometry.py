"""
Geometric kernel shared by every template: overlap, ordering, image
partitions, aspect, collinearity and density clustering.

All functions are pure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import networkx as nx
import numpy as np
from scipy.spatial.distance import cdist, pdist

from vqasieve.data.descriptors import BBox, VqaSieveError

MAX_GRID_CELLS = 12
DEGENERATE_X_VARIANCE = 1e-12


class DegenerateFit(VqaSieveError):
    """Centers share (almost) one x value, so y = a*x + b is undefined."""


# =============================================================================
# Overlap and ordering
# =============================================================================


def intersection_area(a: BBox, b: BBox) -> float:
    dx = min(a.x_max, b.x_max) - max(a.x_min, b.x_min)
    dy = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    if dx <= 0 or dy <= 0:
        return 0.0
    return dx * dy


def iou(a: BBox, b: BBox) -> float:
    """Intersection over union of two boxes, 0.0 when they do not overlap."""
    inter = intersection_area(a, b)
    if inter == 0.0:
        return 0.0
    return inter / (a.area + b.area - inter)


def strictly_right_of(a: BBox, b: BBox) -> bool:
    """True iff a's left edge lies strictly right of b's right edge."""
    return a.x_min > b.x_max


def strictly_left_of(a: BBox, b: BBox) -> bool:
    """True iff a's right edge lies strictly left of b's left edge."""
    return a.x_max < b.x_min


def vertical_overlap_ok(a: BBox, b: BBox, min_fraction: float) -> bool:
    """True iff the boxes' y-intervals overlap by >= min_fraction of the smaller height."""
    overlap = min(a.y_max, b.y_max) - max(a.y_min, b.y_min)
    return overlap >= min_fraction * min(a.height, b.height)


# =============================================================================
# Partitions of the image
# =============================================================================


class Third(str, Enum):
    A = "A"
    B = "B"
    C = "C"
    SPANNING = "Spanning"


def third_assignment(box: BBox, image_width: float, buffer_frac: float) -> Third:
    """
    Which vertical third of the image holds the box.

    Each third boundary is widened by buffer_frac * width on both sides; a
    box touching a widened boundary is Spanning.
    """
    if not 0.0 <= buffer_frac < 1.0 / 6.0:
        raise ValueError(f"buffer_frac must be in [0, 1/6), got {buffer_frac}")
    w = float(image_width)
    buffer = buffer_frac * w
    first, second = w / 3.0, 2.0 * w / 3.0

    if box.x_min >= 0.0 and box.x_max < first - buffer:
        return Third.A
    if box.x_min >= first + buffer and box.x_max < second - buffer:
        return Third.B
    if box.x_min >= second + buffer and box.x_max <= w:
        return Third.C
    return Third.SPANNING


@dataclass(frozen=True)
class GridSpec:
    """Image grid of `rows` x `cols` cells."""

    rows: int
    cols: int

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"Grid needs positive rows/cols, got {self.rows}x{self.cols}")
        if self.rows * self.cols > MAX_GRID_CELLS:
            raise ValueError(
                f"Grid {self.rows}x{self.cols} exceeds {MAX_GRID_CELLS} cells"
            )


def grid_cell(
    box: BBox, width: float, height: float, grid: GridSpec, margin_frac: float
) -> int | None:
    """
    1-indexed grid cell (left to right, then top to bottom) wholly holding the box.

    The candidate cell is the one containing the box center; it is shrunk by
    margin_frac of the cell size on every side and must contain the box.
    """
    cell_w = width / grid.cols
    cell_h = height / grid.rows
    cx, cy = box.center
    col = min(int(cx // cell_w), grid.cols - 1)
    row = min(int(cy // cell_h), grid.rows - 1)

    inset_x = margin_frac * cell_w
    inset_y = margin_frac * cell_h
    left = col * cell_w + inset_x
    right = (col + 1) * cell_w - inset_x
    top = row * cell_h + inset_y
    bottom = (row + 1) * cell_h - inset_y

    if box.x_min >= left and box.x_max <= right and box.y_min >= top and box.y_max <= bottom:
        return row * grid.cols + col + 1
    return None


class Aspect(str, Enum):
    WIDER = "Wider"
    TALLER = "Taller"
    NEAR_SQUARE = "NearSquare"


def aspect_exceeds(box: BBox, ratio_threshold: float) -> Aspect:
    """Classify a box as clearly wider, clearly taller, or near-square."""
    if ratio_threshold <= 1.0:
        raise ValueError(f"ratio_threshold must be > 1, got {ratio_threshold}")
    if box.width / box.height >= ratio_threshold:
        return Aspect.WIDER
    if box.height / box.width >= ratio_threshold:
        return Aspect.TALLER
    return Aspect.NEAR_SQUARE


# =============================================================================
# Collinearity
# =============================================================================


@dataclass(frozen=True)
class LineFit:
    slope: float
    intercept: float
    normalized_residual_variance: float


def fit_row(centers: Sequence[tuple[float, float]], normalizer: float) -> LineFit:
    """
    Least-squares line y = slope * x + intercept through object centers.

    Args:
        centers: At least three (x, y) points
        normalizer: Length used to normalize residuals (image height by default)

    Returns:
        LineFit whose normalized_residual_variance is the mean squared
        vertical residual divided by normalizer**2

    Raises:
        DegenerateFit: All x values (nearly) equal
    """
    pts = np.asarray(centers, dtype=float)
    if len(pts) < 3:
        raise ValueError(f"fit_row needs at least 3 centers, got {len(pts)}")
    x, y = pts[:, 0], pts[:, 1]
    dx = x - x.mean()
    dy = y - y.mean()
    sxx = float(np.dot(dx, dx))
    if sxx / len(pts) < DEGENERATE_X_VARIANCE:
        raise DegenerateFit("Centers are vertically stacked")

    slope = float(np.dot(dx, dy)) / sxx
    intercept = float(y.mean() - slope * x.mean())
    residuals = dy - slope * dx
    variance = float(np.mean(residuals**2)) / (normalizer**2)
    return LineFit(slope=slope, intercept=intercept, normalized_residual_variance=variance)


def row_normalizer(width: float, height: float, base: str) -> float:
    """Length that normalizes row residuals: 'height', 'width' or 'diagonal'."""
    if base == "height":
        return float(height)
    if base == "width":
        return float(width)
    if base == "diagonal":
        return math.hypot(width, height)
    raise ValueError(f"Unknown row normalization base: {base}")


# =============================================================================
# Density clustering
# =============================================================================


@dataclass(frozen=True)
class ClusterResult:
    """Clusters as sorted index tuples (ordered by first member) plus noise."""

    clusters: tuple[tuple[int, ...], ...]
    noise: tuple[int, ...]


def density_clusters(
    centers: Sequence[tuple[float, float]],
    eps: float,
    min_pts: int,
) -> ClusterResult:
    """
    Density clustering of points (DBSCAN semantics).

    A point is core when at least min_pts points (itself included) lie within
    eps. Clusters are connected components of core points; each border point
    joins the cluster of its nearest core neighbor (ties go to the core point
    with the smallest (x, y)), which keeps the result independent of input
    order.

    Args:
        centers: Points in pixels
        eps: Neighborhood radius in pixels (callers pass eps_frac * diagonal)
        min_pts: Minimum neighborhood size for a core point

    Returns:
        ClusterResult
    """
    if eps <= 0:
        raise ValueError(f"eps must be > 0, got {eps}")
    if min_pts < 2:
        raise ValueError(f"min_pts must be >= 2, got {min_pts}")

    n = len(centers)
    if n == 0:
        return ClusterResult(clusters=(), noise=())

    pts = np.asarray(centers, dtype=float)
    dist = cdist(pts, pts)
    neighbors = dist <= eps
    core = np.flatnonzero(neighbors.sum(axis=1) >= min_pts)

    graph = nx.Graph()
    graph.add_nodes_from(core.tolist())
    for i in core:
        for j in core[core > i]:
            if neighbors[i, j]:
                graph.add_edge(int(i), int(j))

    label = {}
    for k, component in enumerate(nx.connected_components(graph)):
        for i in component:
            label[i] = k

    core_set = set(label)
    for i in range(n):
        if i in core_set:
            continue
        near = [j for j in core if neighbors[i, j]]
        if not near:
            continue
        best = min(near, key=lambda j: (dist[i, j], pts[j, 0], pts[j, 1]))
        label[i] = label[int(best)]

    members: dict[int, list[int]] = {}
    for i, k in label.items():
        members.setdefault(k, []).append(i)
    clusters = sorted(tuple(sorted(m)) for m in members.values())
    noise = tuple(i for i in range(n) if i not in label)
    return ClusterResult(clusters=tuple(clusters), noise=noise)


def compactness(points: Sequence[tuple[float, float]]) -> float:
    """Mean pairwise Euclidean distance of a cluster (lower is tighter)."""
    if len(points) < 2:
        raise ValueError("compactness needs at least 2 points")
    return float(np.mean(pdist(np.asarray(points, dtype=float))))
