# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled raster kernels: binary morphology and CC labeling."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def erode(mask, int radius):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(mask, dtype=np.uint8)
    if radius == 0:
        return m.copy()
    return _extremum(_extremum(m, radius, 0, 1), radius, 1, 1)


def dilate(mask, int radius):
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(mask, dtype=np.uint8)
    if radius == 0:
        return m.copy()
    return _extremum(_extremum(m, radius, 0, 0), radius, 1, 0)


cdef cnp.ndarray[cnp.uint8_t, ndim=2] _extremum(
    cnp.uint8_t[:, ::1] m, int radius, int axis, int take_min
):
    cdef Py_ssize_t h = m.shape[0]
    cdef Py_ssize_t w = m.shape[1]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] out_arr = np.empty((h, w), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef Py_ssize_t r, c, k, lo, hi
    cdef cnp.uint8_t acc, v
    if axis == 0:
        for r in range(h):
            lo = r - radius
            hi = r + radius
            for c in range(w):
                acc = 255 if take_min else 0
                for k in range(lo, hi + 1):
                    v = m[k, c] if 0 <= k < h else 0
                    if take_min:
                        if v < acc:
                            acc = v
                    else:
                        if v > acc:
                            acc = v
                out[r, c] = acc
    else:
        for r in range(h):
            for c in range(w):
                lo = c - radius
                hi = c + radius
                acc = 255 if take_min else 0
                for k in range(lo, hi + 1):
                    v = m[r, k] if 0 <= k < w else 0
                    if take_min:
                        if v < acc:
                            acc = v
                    else:
                        if v > acc:
                            acc = v
                out[r, c] = acc
    return out_arr


cdef inline cnp.int32_t _find(cnp.int32_t[::1] parent, cnp.int32_t i):
    cdef cnp.int32_t root = i
    cdef cnp.int32_t nxt
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


cdef inline void _union(cnp.int32_t[::1] parent, cnp.int32_t a, cnp.int32_t b):
    cdef cnp.int32_t ra = _find(parent, a)
    cdef cnp.int32_t rb = _find(parent, b)
    if ra == rb:
        return
    if ra < rb:
        parent[rb] = ra
    else:
        parent[ra] = rb


def label(mask, int connectivity):
    """Two-pass union-find labeling; labels in raster order of first pixel."""
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t h = m.shape[0]
    cdef Py_ssize_t w = m.shape[1]
    cdef cnp.ndarray[cnp.int32_t, ndim=2] lab_arr = np.zeros((h, w), dtype=np.int32)
    cdef cnp.int32_t[:, ::1] lab = lab_arr
    cdef cnp.uint8_t[:, ::1] mm = m
    cdef cnp.ndarray[cnp.int32_t, ndim=1] parent_arr = np.zeros(h * w // 2 + 2, dtype=np.int32)
    cdef cnp.int32_t[::1] parent = parent_arr
    cdef cnp.int32_t next_id = 0
    cdef Py_ssize_t r, c
    cdef cnp.int32_t best, n

    for r in range(h):
        for c in range(w):
            if mm[r, c] == 0:
                continue
            best = 0
            # west
            if c > 0 and lab[r, c - 1] != 0:
                best = lab[r, c - 1]
            if r > 0:
                # north
                n = lab[r - 1, c]
                if n != 0:
                    if best == 0:
                        best = n
                    elif n != best:
                        _union(parent, best, n)
                if connectivity == 8:
                    if c > 0:
                        n = lab[r - 1, c - 1]
                        if n != 0:
                            if best == 0:
                                best = n
                            elif n != best:
                                _union(parent, best, n)
                    if c + 1 < w:
                        n = lab[r - 1, c + 1]
                        if n != 0:
                            if best == 0:
                                best = n
                            elif n != best:
                                _union(parent, best, n)
            if best == 0:
                next_id += 1
                parent[next_id] = next_id
                best = next_id
            lab[r, c] = best

    cdef cnp.ndarray[cnp.int32_t, ndim=1] remap_arr = np.zeros(next_id + 1, dtype=np.int32)
    cdef cnp.int32_t[::1] remap = remap_arr
    cdef cnp.int32_t count = 0
    cdef cnp.int32_t root
    for r in range(h):
        for c in range(w):
            if lab[r, c] != 0:
                root = _find(parent, lab[r, c])
                if remap[root] == 0:
                    count += 1
                    remap[root] = count
                lab[r, c] = remap[root]
    return lab_arr, int(count)
