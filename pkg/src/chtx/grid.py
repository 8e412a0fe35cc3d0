"""Vertex-centered finite-difference grids on rectangles with zero-flux walls.

Nodes sit at the box corners and edges, spacing h_i = L_i / (N_i - 1).
Quadrature is the trapezoid rule; its node weights double as the control
volumes of the flux-form operators below, which makes the discrete
divergence theorem hold to round-off: the weighted sum of a Laplacian or
taxis divergence telescopes to the (zero) wall fluxes.

The zero-flux Laplacian uses mirror ghosts, so boundary rows read
2*(phi[1] - phi[0]) / h**2.  That choice keeps the operator self-adjoint
in the trapezoid inner product, which the iterative solvers rely on.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

SNAPSHOT_MAGIC = b"CHTX1"


class GridError(ValueError):
    """Invalid grid geometry or mismatched fields."""


class SnapshotFormatError(ValueError):
    """Snapshot bytes do not follow the CHTX1 layout."""


@dataclass(frozen=True)
class Grid:
    """Uniform tensor grid over [0, L_1] x ... in 1 or 2 dimensions."""

    lengths: tuple[float, ...]
    counts: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(float(x) for x in self.lengths))
        object.__setattr__(self, "counts", tuple(int(x) for x in self.counts))
        if not 1 <= len(self.counts) <= 2:
            raise GridError("only 1- and 2-dimensional grids are supported")
        if len(self.lengths) != len(self.counts):
            raise GridError("lengths and counts must have one entry per axis")
        if any(L <= 0 for L in self.lengths):
            raise GridError("axis lengths must be positive")
        if any(N < 8 for N in self.counts):
            raise GridError("at least 8 nodes per axis are required")

    @property
    def dim(self) -> int:
        return len(self.counts)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.counts

    @cached_property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / (N - 1) for L, N in zip(self.lengths, self.counts))

    @cached_property
    def axis_weights(self) -> tuple[np.ndarray, ...]:
        """Per-axis trapezoid weights: h inside, h/2 at the two walls."""
        out = []
        for h, N in zip(self.spacing, self.counts):
            w = np.full(N, h)
            w[0] = w[-1] = 0.5 * h
            out.append(w)
        return tuple(out)

    @cached_property
    def weights(self) -> np.ndarray:
        """Tensor-product quadrature weights, one per node."""
        if self.dim == 1:
            return self.axis_weights[0].copy()
        return np.multiply.outer(self.axis_weights[0], self.axis_weights[1])

    @cached_property
    def coordinates(self) -> tuple[np.ndarray, ...]:
        return tuple(np.linspace(0.0, L, N)
                     for L, N in zip(self.lengths, self.counts))

    def meshes(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.coordinates, indexing="ij"))

    @property
    def node_count(self) -> int:
        n = 1
        for N in self.counts:
            n *= N
        return n

    @property
    def measure(self) -> float:
        m = 1.0
        for L in self.lengths:
            m *= L
        return m


@dataclass
class Field:
    """Nodal values bound to their grid."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        vals = np.ascontiguousarray(self.values, dtype=float)
        if vals.shape != self.grid.shape:
            raise GridError(
                f"field shape {vals.shape} does not match grid {self.grid.shape}")
        self.values = vals

    @classmethod
    def zeros(cls, grid: Grid) -> "Field":
        return cls(grid, np.zeros(grid.shape))

    @classmethod
    def full(cls, grid: Grid, value: float) -> "Field":
        return cls(grid, np.full(grid.shape, float(value)))

    @classmethod
    def from_function(cls, grid: Grid, fn) -> "Field":
        return cls(grid, np.asarray(fn(*grid.meshes()), dtype=float))

    def copy(self) -> "Field":
        return Field(self.grid, self.values.copy())


def _same_grid(*fields: Field) -> Grid:
    g = fields[0].grid
    for f in fields[1:]:
        if f.grid != g:
            raise GridError("fields live on different grids")
    return g


def _lap_array(a: np.ndarray, grid: Grid) -> np.ndarray:
    out = np.zeros_like(a)
    for axis in range(a.ndim):
        inv_h2 = 1.0 / grid.spacing[axis] ** 2
        aa = np.moveaxis(a, axis, 0)
        oo = np.moveaxis(out, axis, 0)
        oo[1:-1] += (aa[:-2] - 2.0 * aa[1:-1] + aa[2:]) * inv_h2
        oo[0] += 2.0 * (aa[1] - aa[0]) * inv_h2
        oo[-1] += 2.0 * (aa[-2] - aa[-1]) * inv_h2
    return out


def laplacian_neumann(phi: Field) -> Field:
    """Mirror-ghost zero-flux Laplacian."""
    return Field(phi.grid, _lap_array(phi.values, phi.grid))


def _taxis_array(u: np.ndarray, s: np.ndarray, grid: Grid,
                 upwind: bool) -> np.ndarray:
    out = np.zeros_like(u)
    for axis in range(u.ndim):
        inv_h = 1.0 / grid.spacing[axis]
        ua = np.moveaxis(u, axis, 0)
        sa = np.moveaxis(s, axis, 0)
        oo = np.moveaxis(out, axis, 0)
        vel = (sa[1:] - sa[:-1]) * inv_h
        if upwind:
            uf = np.where(vel > 0.0, ua[:-1], ua[1:])
        else:
            uf = 0.5 * (ua[:-1] + ua[1:])
        flux = uf * vel
        oo[1:-1] += (flux[1:] - flux[:-1]) * inv_h
        # wall faces carry no flux; the boundary control volume is h/2
        oo[0] += flux[0] * (2.0 * inv_h)
        oo[-1] -= flux[-1] * (2.0 * inv_h)
    return out


def taxis_divergence(u: Field, s: Field, upwind: bool = False) -> Field:
    """Discrete div(u * grad s) in flux form.

    Face fluxes use the arithmetic mean of u (or the donor value when
    upwind=True, picked by the sign of the face velocity grad s).  Wall
    faces carry zero flux, so the weighted sum of the output telescopes
    to zero and total mass is conserved up to round-off.  With s constant
    the output is identically zero; with u constant it reduces to
    u * laplacian_neumann(s) in centered mode.
    """
    g = _same_grid(u, s)
    return Field(g, _taxis_array(u.values, s.values, g, upwind))


def integrate(phi: Field) -> float:
    """Trapezoid integral over the box."""
    return float(np.sum(phi.values * phi.grid.weights))


def integrate_power(phi: Field, p: float) -> float:
    """Trapezoid integral of phi**p.

    Negative values are rejected unless p is a positive integer, where
    the power is well defined anyway.
    """
    vals = phi.values
    if not (p >= 1 and float(p).is_integer()):
        if vals.size and np.min(vals) < 0:
            raise GridError("integrate_power needs nonnegative values "
                            "for non-integer exponents")
    return float(np.sum(vals ** p * phi.grid.weights))


def grad_half_power_norm(u: Field, k: float) -> float:
    """Squared gradient norm of u**(k/2), integrated over the box.

    Evaluates sum over faces of (face weight) * ((w_right - w_left)/h)**2
    with w = u**(k/2), which equals the weighted inner product
    <-laplacian_neumann(w), w> exactly.  Requires u >= 0 and k > 0.
    """
    if k <= 0:
        raise GridError("k must be positive")
    vals = u.values
    if vals.size and np.min(vals) < 0:
        raise GridError("grad_half_power_norm needs nonnegative values")
    w = vals ** (0.5 * k)
    grid = u.grid
    total = 0.0
    for axis in range(vals.ndim):
        h = grid.spacing[axis]
        wa = np.moveaxis(w, axis, 0)
        d = (wa[1:] - wa[:-1]) / h
        if vals.ndim == 1:
            total += h * float(np.sum(d * d))
        else:
            cross = grid.axis_weights[1 - axis]
            # d has the face axis first; broadcast the cross-axis weights
            total += h * float(np.sum(d * d * cross[np.newaxis, :]))
    return total


def write_snapshot(path, field: Field) -> None:
    """Write a field in the CHTX1 binary layout.

    Layout, all little-endian: magic b"CHTX1", dim as one byte, node
    counts as uint32 per axis, axis lengths as float64 per axis, then the
    nodal values as row-major float64.
    """
    grid = field.grid
    header = (SNAPSHOT_MAGIC
              + struct.pack("<B", grid.dim)
              + struct.pack(f"<{grid.dim}I", *grid.counts)
              + struct.pack(f"<{grid.dim}d", *grid.lengths))
    payload = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    Path(path).write_bytes(header + payload)


def read_snapshot(path, grid: Grid | None = None) -> Field:
    """Read a CHTX1 snapshot; if a grid is given, require an exact match."""
    raw = Path(path).read_bytes()
    if len(raw) < 6 or raw[:5] != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(f"{path}: not a CHTX1 snapshot")
    dim = raw[5]
    if dim not in (1, 2):
        raise SnapshotFormatError(f"{path}: unsupported dimension {dim}")
    off = 6
    counts = struct.unpack_from(f"<{dim}I", raw, off)
    off += 4 * dim
    lengths = struct.unpack_from(f"<{dim}d", raw, off)
    off += 8 * dim
    try:
        file_grid = Grid(lengths=lengths, counts=counts)
    except GridError as exc:
        raise SnapshotFormatError(f"{path}: {exc}") from exc
    expected = 8 * file_grid.node_count
    if len(raw) - off != expected:
        raise SnapshotFormatError(
            f"{path}: payload holds {len(raw) - off} bytes, expected {expected}")
    if grid is not None and file_grid != grid:
        raise SnapshotFormatError(
            f"{path}: snapshot grid {file_grid.counts}/{file_grid.lengths} "
            f"does not match the configured grid {grid.counts}/{grid.lengths}")
    vals = np.frombuffer(raw, dtype="<f8", offset=off).reshape(file_grid.shape)
    return Field(file_grid, vals.astype(float))
