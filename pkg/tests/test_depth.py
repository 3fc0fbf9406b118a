"""Depth grids and per-detection depth summaries."""

import numpy as np
import pytest

from vqasieve.data.depth import (
    DepthGrid,
    DimensionMismatch,
    HeaderMismatch,
    NoDepthSamples,
    TruncatedPayload,
    attach_depth,
    encode_depth_grid,
    load_depth_grid,
    nearest_rank,
    summarize_detection_depth,
)
from vqasieve.data.descriptors import BBox, Detection
from vqasieve.data.masks import RLEMask
from vqasieve.project.config import TemplateConfig

from conftest import det, scene


class TestLoading:
    def test_round_trip(self):
        values = np.arange(1, 13, dtype=np.float32).reshape(3, 4)
        grid = load_depth_grid(encode_depth_grid(values), 4, 3)
        assert (grid.width, grid.height) == (4, 3)
        assert np.array_equal(grid.values, values)
        assert grid.missing_count == 0

    def test_nan_and_non_positive_are_missing(self):
        values = np.array([[1.0, np.nan], [0.0, 4.0]], dtype=np.float32)
        grid = load_depth_grid(encode_depth_grid(values), 2, 2)
        assert grid.missing_count == 2
        assert np.isnan(grid.values[0, 1]) and np.isnan(grid.values[1, 0])

    def test_truncated_payload(self):
        data = encode_depth_grid(np.ones((2, 2)))[:-3]
        with pytest.raises(TruncatedPayload):
            load_depth_grid(data, 2, 2)

    def test_trailing_bytes(self):
        data = encode_depth_grid(np.ones((2, 2))) + b"\x00\x00\x00\x00"
        with pytest.raises(DimensionMismatch):
            load_depth_grid(data, 2, 2)

    @pytest.mark.parametrize(
        "data",
        [b"no header at all", b"DEPTH v2 2 2\n", b"DEPTH v1 two 2\n", b"IMAGE v1 2 2\n"],
    )
    def test_bad_header(self, data):
        with pytest.raises(HeaderMismatch):
            load_depth_grid(data, 2, 2)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            load_depth_grid(encode_depth_grid(np.ones((2, 3))), 2, 2)


class TestSummaries:
    def test_box_percentile(self):
        grid = DepthGrid.from_array([[2.0, 4.0], [6.0, 8.0]])
        summary = summarize_detection_depth(
            Detection("car", BBox(0, 0, 2, 2)), grid, 0.1
        )
        assert summary.representative_depth == 2.0
        assert summary.sample_count == 4
        assert summary.percentile_used == 0.1

    def test_mask_restricts_samples(self):
        grid = DepthGrid.from_array([[1.0, 1.0], [1.0, 5.5]])
        mask = np.zeros((2, 2), dtype=bool)
        mask[1, 1] = True
        detection = Detection("car", BBox(0, 0, 2, 2), RLEMask.encode(mask))
        summary = summarize_detection_depth(detection, grid, 0.1)
        assert summary.representative_depth == 5.5
        assert summary.sample_count == 1

    def test_missing_pixels_are_skipped(self):
        grid = DepthGrid.from_array([[np.nan, 9.0], [np.nan, 3.0]])
        summary = summarize_detection_depth(Detection("car", BBox(0, 0, 2, 2)), grid, 0.5)
        assert summary.sample_count == 2
        assert summary.representative_depth == 3.0

    def test_all_missing(self):
        grid = DepthGrid.from_array([[np.nan, 0.0], [1.0, 1.0]])
        with pytest.raises(NoDepthSamples):
            summarize_detection_depth(Detection("car", BBox(0, 0, 2, 1)), grid, 0.1)

    @pytest.mark.parametrize(
        "percentile, expected", [(0.0, 1.0), (0.1, 1.0), (0.3, 3.0), (0.5, 5.0), (1.0, 10.0)]
    )
    def test_nearest_rank(self, percentile, expected):
        assert nearest_rank(np.arange(1.0, 11.0), percentile) == expected


@pytest.mark.parametrize("percentile, valid", [(0.0, True), (0.1, True), (1.0, True), (1.01, False), (-0.1, False)])
def test_depth_percentile_range(percentile, valid):
    problems = TemplateConfig(depth_percentile=percentile).validate()
    assert (not problems) is valid


def test_full_percentile_is_the_farthest_sample():
    grid = DepthGrid.from_array([[2.0, 4.0], [6.0, 8.0]])
    summary = summarize_detection_depth(Detection("car", BBox(0, 0, 2, 2)), grid, 1.0)
    assert summary.representative_depth == 8.0


class TestAttach:
    def test_fills_only_missing_summaries(self):
        grid = DepthGrid.from_array(np.full((10, 10), 7.0))
        original = scene(
            det("car", 0, 0, 4, 4),
            det("person", 5, 5, 9, 9, depth=2.0),
            width=10,
            height=10,
        )
        filled = attach_depth(original, grid, 0.1)
        assert filled.has_depth
        assert filled.detections[0].depth_summary.representative_depth == 7.0
        assert filled.detections[1].depth_summary.representative_depth == 2.0

    def test_detection_without_samples_stays_empty(self):
        values = np.full((10, 10), 7.0)
        values[0:4, 0:4] = np.nan
        filled = attach_depth(
            scene(det("car", 0, 0, 4, 4), det("bus", 5, 5, 9, 9), width=10, height=10),
            DepthGrid.from_array(values),
            0.1,
        )
        assert filled.detections[0].depth_summary is None
        assert not filled.has_depth

    def test_size_mismatch(self):
        with pytest.raises(DimensionMismatch):
            attach_depth(scene(width=10, height=10), DepthGrid.from_array(np.ones((5, 5))), 0.1)
