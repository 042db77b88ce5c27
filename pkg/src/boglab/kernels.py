"""Hot-loop kernels with a compiled backend and a NumPy fallback.

The compiled extension is used when it imports; setting ``BOG_LAB_PURE=1``
forces the NumPy path.
"""

import os

import numpy as np

from . import _pykernels

if os.environ.get("BOG_LAB_PURE", "") not in ("", "0"):
    _compiled = None
else:
    try:
        from . import _ckernels as _compiled
    except ImportError:  # extension not built
        _compiled = None

BACKEND = "cython" if _compiled is not None else "numpy"


def _cell_list(centers, radii):
    h = float(np.max(radii))
    origin = centers.min(axis=0) - h
    cell = np.floor((centers - origin) / h).astype(np.int64)
    nx, ny, nz = (cell.max(axis=0) + 2).tolist()
    key = (cell[:, 0] * ny + cell[:, 1]) * nz + cell[:, 2]
    order = np.argsort(key, kind="stable")
    starts = np.zeros(nx * ny * nz + 1, dtype=np.int64)
    np.cumsum(np.bincount(key, minlength=nx * ny * nz), out=starts[1:])
    return order, starts, origin, h, (nx, ny, nz)


def count_containing(points, centers, radii, backend=None):
    """Number of open balls ``|x - c_j| < r_j`` containing each point."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    radii = np.broadcast_to(np.asarray(radii, dtype=np.float64), (len(centers),))
    if len(centers) == 0:
        return np.zeros(len(points), dtype=np.int64)
    order, starts, origin, h, (nx, ny, nz) = _cell_list(centers, radii)
    c = np.ascontiguousarray(centers[order])
    r2 = np.ascontiguousarray(radii[order] ** 2)
    impl = {"cython": _compiled, "numpy": _pykernels, None: _compiled or _pykernels}[backend]
    if impl is None:
        raise RuntimeError("compiled kernels are not available")
    return np.asarray(impl.count_containing_sorted(points, c, r2, starts, origin, h, nx, ny, nz))
