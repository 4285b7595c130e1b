"""DBSCAN segmentation against a naive quadratic reference."""

import random
from collections import deque

import numpy as np
import pytest

from tdassist.segmentation import (
    NOISE,
    Bitmap,
    dbscan,
    foreground_pixels,
    load_bitmap,
    min_pts_for,
    segment_bboxes,
    segment_bitmap,
)


def dbscan_reference(points, eps, min_pts):
    """Naive O(n^2) DBSCAN with all-pairs neighbor scans."""
    n = len(points)
    pts = np.asarray(points, dtype=float)
    labels = [NOISE] * n
    if n == 0:
        return labels
    order = sorted(range(n), key=lambda i: (points[i][1], points[i][0]))
    rank = [0] * n
    for r, i in enumerate(order):
        rank[i] = r
    eps2 = eps * eps

    def neighbors(i):
        d2 = ((pts - pts[i]) ** 2).sum(axis=1)
        found = [j for j in range(n) if d2[j] <= eps2]
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
            continue
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


def partition(points, labels):
    clusters = {}
    noise = set()
    for p, label in zip(points, labels):
        if label == NOISE:
            noise.add(p)
        else:
            clusters.setdefault(label, set()).add(p)
    return frozenset(frozenset(c) for c in clusters.values()), frozenset(noise)


def blob(cx, cy, count, rng, spread=10):
    pts = set()
    while len(pts) < count:
        pts.add((cx + rng.randint(-spread, spread), cy + rng.randint(-spread, spread)))
    return sorted(pts)


class TestForeground:
    def test_all_white(self):
        bmp = Bitmap(np.full((8, 8), 255, dtype=np.uint8))
        assert foreground_pixels(bmp) == []

    def test_single_black_pixel(self):
        arr = np.full((8, 8), 255, dtype=np.uint8)
        arr[3, 5] = 0
        assert foreground_pixels(Bitmap(arr)) == [(5, 3)]

    def test_checkerboard(self):
        arr = np.full((4, 4), 255, dtype=np.uint8)
        arr[::2, ::2] = 0
        arr[1::2, 1::2] = 0
        assert len(foreground_pixels(Bitmap(arr))) == 8


class TestMinPts:
    def test_paper_resolution(self):
        assert min_pts_for(2738, 2738) == 75

    def test_floor_of_one(self):
        assert min_pts_for(10, 10) == 1


class TestDbscan:
    def test_empty(self):
        assert dbscan([], eps=30, min_pts=2) == []

    def test_two_blobs_100px_apart(self):
        rng = random.Random(2)
        points = blob(50, 50, 100, rng) + blob(150, 50, 100, rng)
        labels = dbscan(points, eps=30.0, min_pts=5)
        clusters, noise = partition(points, labels)
        assert len(clusters) == 2
        assert not noise

    def test_isolated_pixel_is_noise(self):
        points = [(5, 5)]
        assert dbscan(points, eps=30.0, min_pts=75) == [NOISE]

    def test_matches_reference_on_randomized_fixtures(self):
        rng = random.Random(13)
        for trial in range(40):
            points = set()
            for _ in range(rng.randint(1, 4)):
                points.update(
                    blob(
                        rng.randint(0, 300),
                        rng.randint(0, 300),
                        rng.randint(5, 60),
                        rng,
                        spread=rng.randint(5, 25),
                    )
                )
            for _ in range(rng.randint(0, 10)):
                points.add((rng.randint(0, 400), rng.randint(0, 400)))
            points = sorted(points)
            eps = rng.choice([10.0, 20.0, 30.0])
            min_pts = rng.randint(1, 10)
            got = partition(points, dbscan(points, eps, min_pts))
            want = partition(points, dbscan_reference(points, eps, min_pts))
            assert got == want, f"trial {trial} diverged"

    def test_partition_independent_of_point_order(self):
        rng = random.Random(6)
        points = blob(40, 40, 50, rng) + blob(160, 40, 50, rng) + [(300, 300)]
        base = partition(points, dbscan(points, 25.0, 4))
        for _ in range(5):
            shuffled = points[:]
            rng.shuffle(shuffled)
            assert partition(shuffled, dbscan(shuffled, 25.0, 4)) == base

    def test_bad_params(self):
        with pytest.raises(ValueError):
            dbscan([(0, 0)], eps=0, min_pts=1)
        with pytest.raises(ValueError):
            dbscan([(0, 0)], eps=10, min_pts=0)


class TestSegments:
    def test_single_cluster_bbox(self):
        points = [(x, y) for x in range(10) for y in range(10)]
        labels = [0] * len(points)
        segments = segment_bboxes(points, labels)
        assert len(segments) == 1
        box = segments[0].bbox
        assert (box.x, box.y, box.width, box.height) == (0, 0, 10, 10)

    def test_noise_only(self):
        assert segment_bboxes([(1, 1), (2, 2)], [NOISE, NOISE]) == []

    def test_two_clusters(self):
        points = [(0, 0), (1, 0), (100, 100), (101, 100)]
        segments = segment_bboxes(points, [0, 0, 1, 1])
        assert len(segments) == 2

    def test_bitmap_pipeline(self, tmp_path):
        arr = np.full((200, 200), 255, dtype=np.uint8)
        arr[20:60, 20:60] = 0
        arr[120:160, 120:160] = 0
        segments, points, labels = segment_bitmap(Bitmap(arr), eps=10.0, min_pts=4)
        assert len(segments) == 2
        assert sum(s.pixel_count for s in segments) == len(points)

    def test_load_png_and_pgm(self, tmp_path):
        from PIL import Image

        arr = np.full((32, 32), 255, dtype=np.uint8)
        arr[4:10, 4:10] = 0
        for name in ("img.png", "img.pgm"):
            path = tmp_path / name
            Image.fromarray(arr, mode="L").save(path)
            bmp = load_bitmap(path)
            assert bmp.width == bmp.height == 32
            assert len(foreground_pixels(bmp)) == 36
