"""
vqasieve Data Loader

Parses external annotation formats into SceneRecords: COCO detection
documents and the native one-scene-per-line format. This is the only data
entrance of the package; everything past it works on validated records.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

from vqasieve.data.descriptors import (
    BBox,
    Detection,
    DepthSummary,
    SceneRecord,
    Split,
    VqaSieveError,
)
from vqasieve.data.masks import RLEMask

logger = logging.getLogger(__name__)

DEFAULT_DEPTH_PERCENTILE = 0.10


class MalformedDocument(VqaSieveError):
    """Input is not a syntactically valid annotation document."""


class DanglingReference(VqaSieveError):
    """An annotation references an image or category that does not exist."""

    def __init__(self, kind: str, ref_id, annotation_id=None):
        self.kind = kind
        self.ref_id = ref_id
        self.annotation_id = annotation_id
        where = f" (annotation {annotation_id})" if annotation_id is not None else ""
        super().__init__(f"Unresolvable {kind} {ref_id!r}{where}")


class MalformedLine(VqaSieveError):
    """A native-format line could not be parsed."""

    def __init__(self, line_number: int, reason: str):
        self.line_number = line_number
        self.reason = reason
        super().__init__(f"line {line_number}: {reason}")


@dataclass
class IngestTally:
    """
    Counters for recoverable problems met while parsing.

    Parsers never raise for these; they record them here and carry on.
    """

    scenes: int = 0
    detections: int = 0
    clamped_boxes: int = 0
    dropped_degenerate: int = 0
    skipped_crowd: int = 0
    dropped_masks: int = 0
    errors: list[MalformedLine] = field(default_factory=list)

    @property
    def error_lines(self) -> list[int]:
        return [e.line_number for e in self.errors]

    def as_dict(self) -> dict:
        return {
            "scenes": self.scenes,
            "detections": self.detections,
            "clamped_boxes": self.clamped_boxes,
            "dropped_degenerate": self.dropped_degenerate,
            "skipped_crowd": self.skipped_crowd,
            "dropped_masks": self.dropped_masks,
            "malformed_lines": self.error_lines,
        }


# =============================================================================
# Box clamping
# =============================================================================


def clamp_box(
    corners: Iterable[float], width: int, height: int, tally: IngestTally
) -> BBox | None:
    """
    Clamp box corners to the image; None when nothing of the box remains.

    Clamps and drops are counted on the tally and logged.
    """
    x_min, y_min, x_max, y_max = (float(v) for v in corners)
    clamped = (
        min(max(x_min, 0.0), width),
        min(max(y_min, 0.0), height),
        min(max(x_max, 0.0), width),
        min(max(y_max, 0.0), height),
    )
    if clamped != (x_min, y_min, x_max, y_max):
        tally.clamped_boxes += 1
    if not (clamped[0] < clamped[2] and clamped[1] < clamped[3]):
        tally.dropped_degenerate += 1
        logger.warning(f"Dropping degenerate box {[x_min, y_min, x_max, y_max]}")
        return None
    return BBox(*clamped)


# =============================================================================
# COCO
# =============================================================================


def parse_coco(document: bytes | str, tally: IngestTally | None = None) -> list[SceneRecord]:
    """
    Parse a COCO detection document.

    One SceneRecord is produced per image entry, including images without
    annotations. Boxes are converted from [x, y, w, h] to corner form and
    clamped to the image; crowd annotations are skipped.

    Args:
        document: COCO JSON as bytes or text
        tally: Optional tally to collect clamp/drop counters

    Returns:
        SceneRecords in the order of the document's image entries

    Raises:
        MalformedDocument: Invalid JSON or missing required keys
        DanglingReference: Annotation with unknown image_id or category_id
    """
    tally = tally if tally is not None else IngestTally()
    try:
        data = json.loads(document)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise MalformedDocument(f"Invalid COCO JSON: {e}") from e

    if not isinstance(data, dict):
        raise MalformedDocument("COCO document must be a JSON object")
    for key in ("images", "annotations", "categories"):
        if not isinstance(data.get(key), list):
            raise MalformedDocument(f"COCO document lacks a '{key}' list")

    try:
        categories = {c["id"]: str(c["name"]) for c in data["categories"]}
        images = {
            img["id"]: (
                str(img.get("file_name", "")),
                int(img["width"]),
                int(img["height"]),
                _image_attributes(img),
            )
            for img in data["images"]
        }
    except (KeyError, TypeError, ValueError) as e:
        raise MalformedDocument(f"Malformed image or category entry: {e}") from e

    per_image: dict[object, list[Detection]] = {image_id: [] for image_id in images}
    for ann in data["annotations"]:
        try:
            image_id = ann["image_id"]
            category_id = ann["category_id"]
            x, y, w, h = (float(v) for v in ann["bbox"])
        except (KeyError, TypeError, ValueError) as e:
            raise MalformedDocument(f"Malformed annotation {ann.get('id')!r}: {e}") from e

        if image_id not in images:
            raise DanglingReference("image_id", image_id, ann.get("id"))
        if category_id not in categories:
            raise DanglingReference("category_id", category_id, ann.get("id"))

        if ann.get("iscrowd", 0) == 1:
            tally.skipped_crowd += 1
            continue

        _, width, height, _ = images[image_id]
        bbox = clamp_box((x, y, x + w, y + h), width, height, tally)
        if bbox is None:
            continue

        mask = None
        segmentation = ann.get("segmentation")
        if isinstance(segmentation, dict) and "counts" in segmentation:
            mask = _parse_mask(segmentation, width, height, tally)

        per_image[image_id].append(
            Detection(class_label=categories[category_id], bbox=bbox, mask=mask)
        )

    scenes = []
    for image_id, (file_name, width, height, attributes) in images.items():
        detections = per_image[image_id]
        tally.scenes += 1
        tally.detections += len(detections)
        scenes.append(
            SceneRecord(
                image_id=str(image_id),
                width=width,
                height=height,
                detections=tuple(detections),
                file_name=file_name or None,
                attributes=attributes,
            )
        )
    return scenes


def _image_attributes(img: dict) -> dict[str, str]:
    """Scalar extra fields of an image entry (video id, camera, ...)."""
    return {
        k: str(v)
        for k, v in img.items()
        if k not in ("id", "file_name", "width", "height")
        and isinstance(v, (str, int, float))
    }


def _parse_mask(segmentation: dict, width: int, height: int, tally: IngestTally):
    try:
        mask = RLEMask.from_coco(segmentation)
    except (KeyError, TypeError, ValueError) as e:
        logger.warning(f"Dropping unreadable RLE mask: {e}")
        tally.dropped_masks += 1
        return None
    if (mask.width, mask.height) != (width, height):
        logger.warning(
            f"Dropping mask sized {mask.width}x{mask.height} for image {width}x{height}"
        )
        tally.dropped_masks += 1
        return None
    return mask


# =============================================================================
# Native line format
# =============================================================================


def parse_native(
    lines: Iterable[str | bytes],
    tally: IngestTally | None = None,
    depth_percentile: float = DEFAULT_DEPTH_PERCENTILE,
) -> Iterator[SceneRecord]:
    """
    Lazily parse native scene lines, one JSON object per line.

    Malformed lines are recorded on the tally (with their 1-based line
    number) and skipped; parsing continues with the next line.

    Args:
        lines: Iterable of lines (text or UTF-8 bytes)
        tally: Optional tally receiving counters and MalformedLine errors
        depth_percentile: Recorded as percentile_used for inline depths

    Yields:
        SceneRecords in input order
    """
    tally = tally if tally is not None else IngestTally()
    for line_number, raw in enumerate(lines, start=1):
        if isinstance(raw, bytes):
            raw = raw.decode("utf-8")
        if not raw.strip():
            continue
        try:
            scene = _parse_native_object(json.loads(raw), tally, depth_percentile)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as e:
            error = MalformedLine(line_number, str(e))
            logger.warning(f"Skipping malformed scene {error}")
            tally.errors.append(error)
            continue
        tally.scenes += 1
        tally.detections += len(scene.detections)
        yield scene


def _parse_native_object(obj: dict, tally: IngestTally, depth_percentile: float) -> SceneRecord:
    if not isinstance(obj, dict):
        raise TypeError("scene line must be a JSON object")
    width, height = int(obj["width"]), int(obj["height"])

    detections = []
    for det in obj.get("detections", []):
        bbox = clamp_box(det["bbox"], width, height, tally)
        if bbox is None:
            continue
        depth = None
        if det.get("depth") is not None:
            depth = DepthSummary(
                representative_depth=float(det["depth"]),
                percentile_used=float(det.get("depth_percentile", depth_percentile)),
                sample_count=int(det.get("depth_samples", 1)),
            )
        mask = RLEMask.from_coco(det["mask"]) if det.get("mask") else None
        detections.append(
            Detection(
                class_label=str(det["label"]),
                bbox=bbox,
                mask=mask,
                depth_summary=depth,
            )
        )

    return SceneRecord(
        image_id=str(obj["image_id"]),
        width=width,
        height=height,
        detections=tuple(detections),
        depth_file=obj.get("depth_file"),
        source_split=Split(obj.get("split", Split.UNASSIGNED.value)),
        file_name=obj.get("file_name"),
        attributes={str(k): str(v) for k, v in (obj.get("attributes") or {}).items()},
    )


def format_native_line(scene: SceneRecord) -> str:
    """Serialize a scene as one native-format line (inverse of parse_native)."""
    detections = []
    for det in scene.detections:
        entry: dict = {"label": det.class_label, "bbox": det.bbox.as_list()}
        if det.depth_summary is not None:
            entry["depth"] = det.depth_summary.representative_depth
            entry["depth_percentile"] = det.depth_summary.percentile_used
            entry["depth_samples"] = det.depth_summary.sample_count
        if det.mask is not None:
            entry["mask"] = det.mask.to_coco()
        detections.append(entry)

    obj: dict = {
        "image_id": scene.image_id,
        "width": scene.width,
        "height": scene.height,
        "detections": detections,
    }
    if scene.depth_file is not None:
        obj["depth_file"] = scene.depth_file
    if scene.source_split != Split.UNASSIGNED:
        obj["split"] = scene.source_split.value
    if scene.file_name is not None:
        obj["file_name"] = scene.file_name
    if scene.attributes:
        obj["attributes"] = dict(scene.attributes)
    return json.dumps(obj, ensure_ascii=False)


def write_native(scenes: Iterable[SceneRecord], path: Path) -> int:
    """Write scenes to a native-format file; returns the number written."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as f:
        for scene in scenes:
            f.write(format_native_line(scene))
            f.write("\n")
            count += 1
    return count


# =============================================================================
# File entry points
# =============================================================================


def load_scenes(
    path: Path,
    format: str,
    tally: IngestTally | None = None,
    depth_percentile: float = DEFAULT_DEPTH_PERCENTILE,
) -> list[SceneRecord]:
    """
    Load every scene of an annotation file.

    Args:
        path: Annotation file
        format: "coco" or "native"
        tally: Optional tally for clamp/drop/error counters
        depth_percentile: Recorded on inline native depths

    Returns:
        List of SceneRecords
    """
    path = Path(path)
    if format == "coco":
        return parse_coco(path.read_bytes(), tally)
    elif format == "native":
        with open(path, "r", encoding="utf-8") as f:
            return list(parse_native(f, tally, depth_percentile))
    else:
        raise ValueError(f"Unknown annotation format: {format}")
