"""Pure NumPy fallback kernels. Same contracts as the Cython extension."""

from __future__ import annotations

import numpy as np


def _extremum_filter_axis(m: np.ndarray, radius: int, axis: int, op) -> np.ndarray:
    pad = [(0, 0), (0, 0)]
    pad[axis] = (radius, radius)
    padded = np.pad(m, pad, constant_values=0)
    n = m.shape[axis]
    views = [padded.take(range(i, i + n), axis=axis) for i in range(2 * radius + 1)]
    return op.reduce(views)


def erode(mask: np.ndarray, radius: int) -> np.ndarray:
    """Binary erosion with a (2r+1)-square element; outside counts as background."""
    if radius == 0:
        return mask.copy()
    out = _extremum_filter_axis(mask, radius, 0, np.minimum)
    return _extremum_filter_axis(out, radius, 1, np.minimum)


def dilate(mask: np.ndarray, radius: int) -> np.ndarray:
    if radius == 0:
        return mask.copy()
    out = _extremum_filter_axis(mask, radius, 0, np.maximum)
    return _extremum_filter_axis(out, radius, 1, np.maximum)


def label(mask: np.ndarray, connectivity: int) -> tuple[np.ndarray, int]:
    """Run-based two-pass connected-component labeling.

    Returns (labels int32, component_count); labels are assigned in
    raster-scan order of each component's first pixel.
    """
    h, w = mask.shape
    labels = np.zeros((h, w), dtype=np.int32)
    parent: list[int] = []

    def find(i: int) -> int:
        root = i
        while parent[root] != root:
            root = parent[root]
        while parent[i] != root:
            parent[i], i = root, parent[i]
        return root

    def union(a: int, b: int) -> None:
        ra, rb = find(a), find(b)
        if ra != rb:
            # keep the smaller id as root so first-pixel order survives
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb

    slack = 1 if connectivity == 8 else 0
    run_info: list[tuple[int, int, int]] = []  # (row, start, end) per run id
    prev_runs: list[tuple[int, int, int]] = []  # (start, end, id)
    bool_rows = mask != 0
    for r in range(h):
        row = bool_rows[r]
        if not row.any():
            prev_runs = []
            continue
        d = np.diff(row.astype(np.int8))
        starts = np.flatnonzero(d == 1) + 1
        ends = np.flatnonzero(d == -1) + 1
        starts = ([0] if row[0] else []) + starts.tolist()
        ends = ends.tolist() + ([w] if row[-1] else [])
        cur: list[tuple[int, int, int]] = []
        for s, e in zip(starts, ends):
            rid = len(parent)
            parent.append(rid)
            run_info.append((r, s, e))
            lo, hi = s - slack, e + slack
            for ps, pe, pid in prev_runs:
                if ps < hi and pe > lo:
                    union(rid, pid)
            cur.append((s, e, rid))
        prev_runs = cur

    label_of_root: dict[int, int] = {}
    for rid, (r, s, e) in enumerate(run_info):
        root = find(rid)
        lab = label_of_root.get(root)
        if lab is None:
            lab = len(label_of_root) + 1
            label_of_root[root] = lab
        labels[r, s:e] = lab
    return labels, len(label_of_root)
