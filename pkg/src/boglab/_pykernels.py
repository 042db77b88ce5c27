"""NumPy implementation of the cell-list counting kernel."""

import numpy as np

_OFFSETS = np.array([(dx, dy, dz) for dx in (-1, 0, 1) for dy in (-1, 0, 1) for dz in (-1, 0, 1)])


def count_containing_sorted(points, centers, radii2, starts, origin, h, nx, ny, nz, chunk=16_384):
    dims = np.array([nx, ny, nz])
    out = np.zeros(len(points), dtype=np.int64)
    for s in range(0, len(points), chunk):
        block = points[s : s + chunk]
        cell = np.floor((block - origin) / h).astype(np.int64)
        for off in _OFFSETS:
            c = cell + off
            idx = np.nonzero(np.all((c >= 0) & (c < dims), axis=1))[0]
            key = (c[idx, 0] * ny + c[idx, 1]) * nz + c[idx, 2]
            lo = starts[key]
            length = starts[key + 1] - lo
            pid = np.repeat(idx, length)
            cid = np.repeat(lo - np.cumsum(length) + length, length) + np.arange(length.sum())
            d = block[pid] - centers[cid]
            inside = np.einsum("ij,ij->i", d, d) < radii2[cid]
            out[s : s + chunk] += np.bincount(pid[inside], minlength=len(block))
    return out
