"""Shared fixtures and scene builders for the vqasieve test-suite."""

import json

import pytest

from vqasieve.data.descriptors import BBox, DepthSummary, Detection, SceneRecord
from vqasieve.data.loader import write_native
from vqasieve.project.config import TemplateConfig


def det(label, x0, y0, x1, y1, depth=None):
    """Detection shorthand; depth gives an inline DepthSummary."""
    summary = None
    if depth is not None:
        summary = DepthSummary(representative_depth=depth, percentile_used=0.10, sample_count=1)
    return Detection(class_label=label, bbox=BBox(x0, y0, x1, y1), depth_summary=summary)


def scene(*detections, width=640, height=480, image_id="img-0", **kwargs):
    return SceneRecord(
        image_id=image_id, width=width, height=height, detections=tuple(detections), **kwargs
    )


def row_of(label, count, y=100.0, start=10.0, step=40.0, size=20.0):
    """`count` boxes of one class, evenly spaced along a horizontal line."""
    half = size / 2.0
    return [
        det(label, start + i * step, y - half, start + i * step + size, y + half)
        for i in range(count)
    ]


@pytest.fixture
def config():
    return TemplateConfig()


@pytest.fixture
def street_scene():
    """Two cars on the right, one person on the left, one truck in the middle."""
    return scene(
        det("person", 20, 200, 60, 320),
        det("truck", 250, 180, 390, 300),
        det("car", 450, 240, 530, 290),
        det("car", 560, 250, 630, 300),
        image_id="street",
    )


@pytest.fixture
def mixed_corpus():
    """A handful of varied scenes, including an empty one and a single-class one."""
    return [
        scene(
            det("person", 20, 200, 60, 320),
            det("truck", 250, 180, 390, 300),
            det("car", 450, 240, 530, 290),
            det("car", 560, 250, 630, 300),
            image_id="a-street",
        ),
        scene(*row_of("car", 5), image_id="b-row"),
        scene(image_id="c-empty"),
        scene(
            det("bus", 10, 10, 200, 150),
            det("person", 300, 300, 330, 380),
            det("person", 400, 300, 430, 380),
            det("bicycle", 500, 50, 560, 90),
            image_id="d-mixed",
        ),
    ]


@pytest.fixture
def native_file(tmp_path, mixed_corpus):
    path = tmp_path / "scenes.jsonl"
    write_native(mixed_corpus, path)
    return path


@pytest.fixture
def coco_document():
    """Minimal COCO document: one clamped box, one crowd annotation."""
    return {
        "images": [
            {"id": 1, "file_name": "a.jpg", "width": 100, "height": 80, "segment": "s1"},
            {"id": 2, "file_name": "b.jpg", "width": 50, "height": 50},
        ],
        "categories": [{"id": 1, "name": "car"}, {"id": 2, "name": "person"}],
        "annotations": [
            {"id": 10, "image_id": 1, "category_id": 1, "bbox": [10, 10, 20, 30]},
            {"id": 11, "image_id": 1, "category_id": 2, "bbox": [90, 70, 20, 20]},
            {"id": 12, "image_id": 1, "category_id": 2, "bbox": [0, 0, 5, 5], "iscrowd": 1},
        ],
    }


@pytest.fixture
def coco_file(tmp_path, coco_document):
    path = tmp_path / "annotations.json"
    path.write_text(json.dumps(coco_document), encoding="utf-8")
    return path
