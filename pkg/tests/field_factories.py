"""Shared builders and independent reference implementations for tests.

The reference operators here are deliberately written as plain index
loops, straight from the stencil definitions, so they share no code with
the vectorized implementations they are used to check.
"""

import numpy as np

from chtx import Field, Grid


def smooth_field(grid: Grid, rng, modes: int = 5, offset=None) -> Field:
    """Low cosine modes per axis: smooth, zero-flux compatible, O(1)."""
    vals = np.zeros(grid.shape)
    for axis in range(grid.dim):
        x = grid.coordinates[axis] / grid.lengths[axis]
        coeffs = rng.uniform(-1.0, 1.0, size=modes)
        bump = sum(c * np.cos((m + 1) * np.pi * x)
                   for m, c in enumerate(coeffs))
        shape = [1] * grid.dim
        shape[axis] = -1
        vals = vals + bump.reshape(shape)
    if offset is None:
        offset = float(rng.uniform(0.5, 2.0))
    return Field(grid, vals + offset)


def positive_smooth_field(grid: Grid, rng, floor: float = 0.05) -> Field:
    f = smooth_field(grid, rng, offset=0.0)
    return Field(grid, np.maximum(f.values + 1.0, floor))


def rough_field(grid: Grid, rng, lo: float = -1.0, hi: float = 1.0) -> Field:
    return Field(grid, rng.uniform(lo, hi, grid.shape))


def reference_laplacian(field: Field) -> np.ndarray:
    """Mirror-ghost zero-flux Laplacian, written as index loops."""
    grid = field.grid
    a = field.values
    out = np.zeros_like(a)
    if grid.dim == 1:
        (h,) = grid.spacing
        n = grid.counts[0]
        for i in range(n):
            left = a[i - 1] if i > 0 else a[1]
            right = a[i + 1] if i < n - 1 else a[n - 2]
            out[i] = (left - 2.0 * a[i] + right) / h ** 2
        return out
    hx, hy = grid.spacing
    nx, ny = grid.counts
    for i in range(nx):
        for j in range(ny):
            left = a[i - 1, j] if i > 0 else a[1, j]
            right = a[i + 1, j] if i < nx - 1 else a[nx - 2, j]
            down = a[i, j - 1] if j > 0 else a[i, 1]
            up = a[i, j + 1] if j < ny - 1 else a[i, ny - 2]
            out[i, j] = ((left - 2.0 * a[i, j] + right) / hx ** 2
                         + (down - 2.0 * a[i, j] + up) / hy ** 2)
    return out


def _face_value(ul, ur, vel, upwind):
    if upwind:
        return ul if vel > 0.0 else ur
    return 0.5 * (ul + ur)


def reference_taxis(u: Field, s: Field, upwind: bool = False) -> np.ndarray:
    """Flux-form div(u grad s) with trapezoid control volumes, as loops."""
    grid = u.grid
    uv, sv = u.values, s.values
    out = np.zeros_like(uv)
    if grid.dim == 1:
        (h,) = grid.spacing
        n = grid.counts[0]
        flux = np.zeros(n + 1)  # wall faces at 0 and n stay zero
        for i in range(n - 1):
            vel = (sv[i + 1] - sv[i]) / h
            flux[i + 1] = _face_value(uv[i], uv[i + 1], vel, upwind) * vel
        for i in range(n):
            vol = h if 0 < i < n - 1 else h / 2.0
            out[i] = (flux[i + 1] - flux[i]) / vol
        return out
    hx, hy = grid.spacing
    nx, ny = grid.counts
    for j in range(ny):
        flux = np.zeros(nx + 1)
        for i in range(nx - 1):
            vel = (sv[i + 1, j] - sv[i, j]) / hx
            flux[i + 1] = _face_value(uv[i, j], uv[i + 1, j], vel, upwind) * vel
        for i in range(nx):
            vol = hx if 0 < i < nx - 1 else hx / 2.0
            out[i, j] += (flux[i + 1] - flux[i]) / vol
    for i in range(nx):
        flux = np.zeros(ny + 1)
        for j in range(ny - 1):
            vel = (sv[i, j + 1] - sv[i, j]) / hy
            flux[j + 1] = _face_value(uv[i, j], uv[i, j + 1], vel, upwind) * vel
        for j in range(ny):
            vol = hy if 0 < j < ny - 1 else hy / 2.0
            out[i, j] += (flux[j + 1] - flux[j]) / vol
    return out


def dense_shifted_operator(grid: Grid, c0: float, d: float) -> np.ndarray:
    """Dense matrix of (c0 I - d Lap) assembled from the loop stencil."""
    n = grid.node_count
    mat = np.zeros((n, n))
    for col in range(n):
        e = np.zeros(n)
        e[col] = 1.0
        lap = reference_laplacian(Field(grid, e.reshape(grid.shape)))
        mat[:, col] = c0 * e - d * lap.ravel()
    return mat
