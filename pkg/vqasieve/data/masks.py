"""
Run-length encoded binary masks (COCO convention: column-major, runs start
with background).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class RLEMask:
    """Binary mask of an image stored as alternating background/foreground runs."""

    height: int
    width: int
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))
        if any(c < 0 for c in self.counts):
            raise ValueError("RLE counts must be non-negative")
        if sum(self.counts) != self.height * self.width:
            raise ValueError(
                f"RLE counts sum to {sum(self.counts)}, "
                f"expected {self.height * self.width}"
            )

    def decode(self) -> np.ndarray:
        """Return the mask as a (height, width) boolean array."""
        values = np.zeros(len(self.counts), dtype=bool)
        values[1::2] = True
        flat = np.repeat(values, self.counts)
        return flat.reshape((self.height, self.width), order="F")

    @classmethod
    def encode(cls, mask: np.ndarray) -> "RLEMask":
        """Build an RLE mask from a (height, width) boolean array."""
        mask = np.asarray(mask, dtype=bool)
        height, width = mask.shape
        flat = mask.flatten(order="F").astype(np.int8)
        # Run boundaries, with a leading background run (possibly empty)
        changes = np.flatnonzero(np.diff(flat)) + 1
        bounds = np.concatenate(([0], changes, [flat.size]))
        counts = np.diff(bounds).tolist()
        if flat.size and flat[0]:
            counts = [0] + counts
        return cls(height=height, width=width, counts=tuple(counts))

    @classmethod
    def from_coco(cls, segmentation: dict) -> "RLEMask":
        """
        Parse a COCO RLE dict ({"size": [h, w], "counts": ...}).

        Accepts both uncompressed (list) and compressed (string) counts.
        """
        height, width = (int(v) for v in segmentation["size"])
        counts = segmentation["counts"]
        if isinstance(counts, str):
            counts = _decode_compressed_counts(counts)
        return cls(height=height, width=width, counts=tuple(counts))

    def to_coco(self) -> dict:
        return {"size": [self.height, self.width], "counts": list(self.counts)}


def _decode_compressed_counts(text: str) -> list[int]:
    """Decode the COCO LEB128-like compressed counts string."""
    counts: list[int] = []
    pos = 0
    while pos < len(text):
        value = 0
        shift = 0
        more = True
        while more:
            if pos >= len(text):
                raise ValueError("Truncated compressed RLE counts")
            char = ord(text[pos]) - 48
            value |= (char & 0x1F) << (5 * shift)
            more = bool(char & 0x20)
            pos += 1
            shift += 1
            if not more and (char & 0x10):
                value |= -1 << (5 * shift)
        if len(counts) > 2:
            value += counts[-2]
        counts.append(value)
    return counts
