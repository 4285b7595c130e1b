"""Density-based segmentation of bitmap drawings into layout elements.

Technical drawings separate their main elements with white space, so DBSCAN
over foreground pixels recovers tables, CAD views and annotations as
clusters.  Neighbor queries run on an eps-sized grid index; a naive
quadratic reference lives in the test suite.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .drawing import BoundingBox

DEFAULT_EPS = 30.0
DEFAULT_THRESHOLD = 200
MIN_PTS_FRACTION = 1e-5  # 0.001% of total pixels

Point = tuple[int, int]

NOISE = -1


@dataclass(frozen=True, eq=False)
class Bitmap:
    """Grayscale image; intensities in [0, 255], row-major."""

    pixels: np.ndarray

    def __post_init__(self):
        if self.pixels.ndim != 2 or self.pixels.size == 0:
            raise ValueError("bitmap must be a non-empty 2d array")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


def load_bitmap(path: str | Path) -> Bitmap:
    """Read a PGM (P5) or PNG grayscale image."""
    from PIL import Image

    with Image.open(path) as img:
        return Bitmap(np.asarray(img.convert("L"), dtype=np.uint8))


def foreground_pixels(bmp: Bitmap, threshold: int = DEFAULT_THRESHOLD) -> list[Point]:
    """All (x, y) darker than the threshold, in row-major scan order."""
    ys, xs = np.nonzero(bmp.pixels < threshold)
    return [(int(x), int(y)) for y, x in zip(ys, xs)]


def min_pts_for(width: int, height: int) -> int:
    """DBSCAN core-point threshold: 0.001% of total pixels, at least 1."""
    return max(1, round(MIN_PTS_FRACTION * width * height))


def dbscan(points: Sequence[Point], eps: float = DEFAULT_EPS, min_pts: int = 1) -> list[int]:
    """Cluster labels aligned with `points`; noise is -1.

    Classic DBSCAN with Euclidean distance.  Clusters are numbered by the
    row-major scan order of their first core point; border points belong to
    the first cluster that claims them.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if min_pts < 1:
        raise ValueError("min_pts must be >= 1")
    n = len(points)
    labels = [NOISE] * n
    if n == 0:
        return labels

    order = sorted(range(n), key=lambda i: (points[i][1], points[i][0]))
    rank = [0] * n
    for r, i in enumerate(order):
        rank[i] = r

    cell = eps
    buckets: dict[tuple[int, int], list[int]] = {}
    for i, (x, y) in enumerate(points):
        buckets.setdefault((int(x // cell), int(y // cell)), []).append(i)

    eps2 = eps * eps

    def neighbors(i: int) -> list[int]:
        x, y = points[i]
        bx, by = int(x // cell), int(y // cell)
        found = []
        for gx in (bx - 1, bx, bx + 1):
            for gy in (by - 1, by, by + 1):
                for j in buckets.get((gx, gy), ()):
                    dx = points[j][0] - x
                    dy = points[j][1] - y
                    if dx * dx + dy * dy <= eps2:
                        found.append(j)
        found.sort(key=rank.__getitem__)
        return found

    visited = [False] * n
    cluster = 0
    for i in order:
        if visited[i]:
            continue
        visited[i] = True
        seed = neighbors(i)
        if len(seed) < min_pts:
            continue  # stays noise unless a later cluster claims it
        labels[i] = cluster
        queue = deque(seed)
        while queue:
            j = queue.popleft()
            if labels[j] == NOISE:
                labels[j] = cluster
            if visited[j]:
                continue
            visited[j] = True
            reach = neighbors(j)
            if len(reach) >= min_pts:
                queue.extend(reach)
        cluster += 1
    return labels


@dataclass(frozen=True)
class Segment:
    cluster_id: int
    pixel_count: int
    bbox: BoundingBox


def segment_bboxes(points: Sequence[Point], labels: Sequence[int]) -> list[Segment]:
    """Axis-aligned bounding box and size per cluster; noise excluded.

    Every cluster contains at least one core point and normally at least
    min_pts members; when two clusters share border points the later one
    keeps only what the earlier did not claim, so its count can fall short.
    """
    extents: dict[int, list[int]] = {}
    counts: dict[int, int] = {}
    for (x, y), label in zip(points, labels):
        if label == NOISE:
            continue
        if label not in extents:
            extents[label] = [x, y, x, y]
            counts[label] = 1
        else:
            e = extents[label]
            e[0] = min(e[0], x)
            e[1] = min(e[1], y)
            e[2] = max(e[2], x)
            e[3] = max(e[3], y)
            counts[label] += 1
    segments = []
    for label in sorted(extents):
        x0, y0, x1, y1 = extents[label]
        segments.append(
            Segment(label, counts[label], BoundingBox(x0, y0, x1 - x0 + 1, y1 - y0 + 1))
        )
    return segments


def segment_bitmap(
    bmp: Bitmap,
    eps: float = DEFAULT_EPS,
    threshold: int = DEFAULT_THRESHOLD,
    min_pts: int | None = None,
) -> tuple[list[Segment], list[Point], list[int]]:
    """Full pipeline: threshold, cluster, box.  min_pts defaults to the
    0.001%-of-pixels rule."""
    if min_pts is None:
        min_pts = min_pts_for(bmp.width, bmp.height)
    points = foreground_pixels(bmp, threshold)
    labels = dbscan(points, eps, min_pts)
    return segment_bboxes(points, labels), points, labels
