"""Level-set representation of bounded planar domains on a Cartesian grid."""

import io
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from . import kernels
from .errors import (DegenerateBoundary, EmptyDomain, GridMismatch, OutOfBox)
from .weight import sublevel_radius

MARGIN_CELLS = 4


@dataclass(frozen=True, eq=False)
class GridSpec:
    """Uniform node grid with nx x ny cells on an axis-aligned box."""

    nx: int
    ny: int
    box: tuple  # (x0, y0, x1, y1)

    def __post_init__(self):
        x0, y0, x1, y1 = self.box
        if self.nx < 16 or self.ny < 16:
            raise ValueError("need at least 16 cells per direction")
        if not (x0 < 0.0 < x1 and y0 < 0.0 < y1):
            raise ValueError("box must contain the origin strictly inside")
        hx = (x1 - x0) / self.nx
        hy = (y1 - y0) / self.ny
        if abs(hx - hy) > 1e-12 * max(hx, hy):
            raise ValueError("grid spacing must be uniform (hx == hy)")

    @property
    def h(self):
        x0, _, x1, _ = self.box
        return (x1 - x0) / self.nx

    @property
    def xs(self):
        x0, _, x1, _ = self.box
        return np.linspace(x0, x1, self.nx + 1)

    @property
    def ys(self):
        _, y0, _, y1 = self.box
        return np.linspace(y0, y1, self.ny + 1)

    @property
    def shape(self):
        return (self.nx + 1, self.ny + 1)

    def nodes(self):
        """Node coordinates, shape (nx+1, ny+1, 2)."""
        X, Y = np.meshgrid(self.xs, self.ys, indexing="ij")
        return np.stack([X, Y], axis=-1)


@dataclass(frozen=True, eq=False)
class Domain:
    """Bounded open set {ls < 0}; ls is nodal, negative inside."""

    grid: GridSpec
    ls: np.ndarray
    is_signed_distance: bool = False

    def __post_init__(self):
        self.ls.setflags(write=False)


@dataclass(frozen=True, eq=False)
class BoundarySamples:
    """Marching-squares interface samples: midpoints, outward normals, lengths."""

    points: np.ndarray   # (n, 2)
    normals: np.ndarray  # (n, 2) outward unit
    ds: np.ndarray       # (n,) segment lengths

    def __len__(self):
        return len(self.ds)

    @property
    def perimeter(self):
        return float(np.sum(self.ds))


# --- seeds -----------------------------------------------------------------

@dataclass(frozen=True)
class Ball:
    center: tuple = (0.0, 0.0)
    radius: float = 1.0


@dataclass(frozen=True)
class Ellipse:
    a: float
    b: float
    center: tuple = (0.0, 0.0)


@dataclass(frozen=True, eq=False)
class Sublevel:
    weight: object
    level: float = 1.0


@dataclass(frozen=True, eq=False)
class Field:
    values: np.ndarray


def _validate(grid, ls):
    if not np.any(ls < 0.0):
        raise EmptyDomain("level set has no interior nodes")
    m = MARGIN_CELLS
    frame = np.ones(grid.shape, dtype=bool)
    frame[m:-m, m:-m] = False
    if np.min(ls[frame]) <= 0.0:
        raise OutOfBox("zero level set violates the bounding-box margin")


def build_domain(grid, seed, reinit=True):
    """Create a Domain from an analytic seed or an explicit nodal field."""
    pts = grid.nodes()
    if isinstance(seed, Ball):
        c = np.asarray(seed.center)
        ls = np.hypot(pts[..., 0] - c[0], pts[..., 1] - c[1]) - seed.radius
        d = Domain(grid, ls, is_signed_distance=True)
        _validate(grid, ls)
        return d
    if isinstance(seed, Ellipse):
        c = np.asarray(seed.center)
        ls = np.hypot((pts[..., 0] - c[0]) / seed.a,
                      (pts[..., 1] - c[1]) / seed.b) - 1.0
    elif isinstance(seed, Sublevel):
        r = np.hypot(pts[..., 0], pts[..., 1])
        theta = np.arctan2(pts[..., 1], pts[..., 0])
        rb = sublevel_radius(seed.weight, seed.level, theta)
        ls = r - rb
    elif isinstance(seed, Field):
        ls = np.array(seed.values, dtype=float)
        if ls.shape != grid.shape:
            raise GridMismatch("explicit field shape does not match grid")
    else:
        raise TypeError(f"unknown seed {seed!r}")
    _validate(grid, ls)
    d = Domain(grid, ls)
    return reinitialize(d) if reinit else d


# --- geometric primitives ---------------------------------------------------

def cell_quadrature(d):
    """Per-cell inside areas and centroids (global coordinates)."""
    areas, cxs, cys = kernels.cell_geometry(np.ascontiguousarray(d.ls), d.grid.h)
    x0, y0, _, _ = d.grid.box
    return areas, cxs + x0, cys + y0


def volume(d):
    areas, _, _ = kernels.cell_geometry(np.ascontiguousarray(d.ls), d.grid.h)
    return float(np.sum(areas))


def interp_bilinear(field, grid, pts):
    """Bilinear interpolation of a nodal field at points (n, 2), edge-clamped."""
    pts = np.asarray(pts, dtype=float)
    x0, y0, _, _ = grid.box
    h = grid.h
    fx = np.clip((pts[..., 0] - x0) / h, 0.0, grid.nx - 1e-12)
    fy = np.clip((pts[..., 1] - y0) / h, 0.0, grid.ny - 1e-12)
    i = fx.astype(int)
    j = fy.astype(int)
    tx = fx - i
    ty = fy - j
    f = field
    return ((1 - tx) * (1 - ty) * f[i, j] + tx * (1 - ty) * f[i + 1, j]
            + (1 - tx) * ty * f[i, j + 1] + tx * ty * f[i + 1, j + 1])


def _node_gradient(ls, h):
    gx = np.gradient(ls, h, axis=0)
    gy = np.gradient(ls, h, axis=1)
    return gx, gy


def boundary_samples(d):
    """Marching-squares extraction of the zero level set.

    Segment midpoints with outward unit normals (from interpolated grad ls)
    and segment lengths; the chords are consistent with cell_quadrature.
    """
    ls = d.ls
    grid = d.grid
    h = grid.h
    inside = ls < 0.0
    mixed = np.zeros((grid.nx, grid.ny), dtype=bool)
    c = inside[:-1, :-1].astype(np.int8) + inside[1:, :-1] + inside[1:, 1:] + inside[:-1, 1:]
    mixed = (c > 0) & (c < 4)
    xs, ys = grid.xs, grid.ys
    p0 = []
    p1 = []
    corners = ((0, 0), (1, 0), (1, 1), (0, 1))
    for i, j in zip(*np.nonzero(mixed)):
        vals = (ls[i, j], ls[i + 1, j], ls[i + 1, j + 1], ls[i, j + 1])
        verts = []
        kinds = []  # "in" corner, "exit" crossing, "entry" crossing
        for k in range(4):
            k2 = (k + 1) % 4
            va, vb = vals[k], vals[k2]
            ca = corners[k]
            cb = corners[k2]
            if va < 0.0:
                verts.append((xs[i + ca[0]], ys[j + ca[1]]))
                kinds.append("in")
            if (va < 0.0) != (vb < 0.0):
                t = va / (va - vb)
                verts.append((xs[i + ca[0]] + t * (cb[0] - ca[0]) * h,
                              ys[j + ca[1]] + t * (cb[1] - ca[1]) * h))
                kinds.append("exit" if va < 0.0 else "entry")
        m = len(verts)
        for k in range(m):
            if kinds[k] == "exit":
                k2 = (k + 1) % m
                p0.append(verts[k])
                p1.append(verts[k2])
    if not p0:
        raise DegenerateBoundary("no zero crossing in level-set field")
    p0 = np.asarray(p0)
    p1 = np.asarray(p1)
    mid = 0.5 * (p0 + p1)
    seg = p1 - p0
    ds = np.hypot(seg[:, 0], seg[:, 1])
    keep = ds > 1e-12 * h
    p0, p1, mid, seg, ds = p0[keep], p1[keep], mid[keep], seg[keep], ds[keep]
    gx, gy = _node_gradient(ls, h)
    nx = interp_bilinear(gx, grid, mid)
    ny = interp_bilinear(gy, grid, mid)
    nrm = np.hypot(nx, ny)
    # fall back to the segment perpendicular where grad ls degenerates
    bad = nrm < 1e-10
    if np.any(bad):
        px, py = seg[bad, 1], -seg[bad, 0]
        nx[bad], ny[bad] = px, py
        nrm = np.hypot(nx, ny)
    normals = np.stack([nx / nrm, ny / nrm], axis=-1)
    # orient outward: walk order makes (p1-p0) rotated by -90deg point outward
    out_dir = np.stack([seg[:, 1], -seg[:, 0]], axis=-1)
    flip = np.sum(normals * out_dir, axis=1) < 0.0
    normals[flip] *= -1.0
    return BoundarySamples(points=mid, normals=normals, ds=ds)


def reinitialize(d):
    """Rebuild ls as a signed distance function (fast sweeping eikonal)."""
    grid = d.grid
    h = grid.h
    ls = d.ls
    inside = ls < 0.0
    flip = np.zeros_like(inside)
    flip[:-1, :] |= inside[:-1, :] != inside[1:, :]
    flip[1:, :] |= inside[:-1, :] != inside[1:, :]
    flip[:, :-1] |= inside[:, :-1] != inside[:, 1:]
    flip[:, 1:] |= inside[:, :-1] != inside[:, 1:]
    if not np.any(flip):
        raise DegenerateBoundary("no zero crossing in level-set field")
    gx, gy = _node_gradient(ls, h)
    gn = np.clip(np.hypot(gx, gy), 0.2, 5.0)
    dist = np.full(grid.shape, kernels._BIG)
    dist[flip] = np.abs(ls[flip]) / gn[flip]
    frozen = flip.copy()
    kernels.eikonal_solve(dist, frozen, h)
    out = np.where(inside, -dist, dist)
    return Domain(grid, out, is_signed_distance=True)


def scale_domain(d, t):
    """Homothety t*Omega, resampling the level set at x/t."""
    if t <= 0:
        raise ValueError("scale factor must be > 0")
    grid = d.grid
    pts = grid.nodes() / t
    ls = interp_bilinear(d.ls, grid, pts.reshape(-1, 2)).reshape(grid.shape)
    if d.is_signed_distance:
        ls = t * ls
    _validate(grid, ls)
    return Domain(grid, ls, is_signed_distance=d.is_signed_distance)


def steiner_symmetrize(d, axis):
    """Recenter, per grid column, the inside length about the hyperplane x_axis=0.

    Column lengths come from the same cut-cell areas as ``volume`` (cell-column
    area / h, averaged onto node lines), so the rearrangement preserves the
    measured volume up to round-off.
    """
    grid = d.grid
    h = grid.h
    areas, _, _ = kernels.cell_geometry(np.ascontiguousarray(d.ls), h)
    col = np.sum(areas, axis=1 if axis == 1 else 0) / h
    coords = grid.ys if axis == 1 else grid.xs
    lengths = np.zeros(len(col) + 1)
    lengths[1:-1] = 0.5 * (col[:-1] + col[1:])
    lengths[0] = 0.5 * col[0]
    lengths[-1] = 0.5 * col[-1]
    new = np.abs(coords)[None, :] - 0.5 * lengths[:, None]
    new = np.where(lengths[:, None] > 0.0, new, np.abs(coords)[None, :] + h)
    out = new if axis == 1 else new.T
    # the tent field |coord| - L/2 is itself a valid level set; skipping a
    # reinitialization keeps the per-column volume exact
    return Domain(grid, out)


def schwarz_symmetrize(d):
    """Origin-centered ball of the same volume, exact signed distance."""
    r = np.sqrt(volume(d) / np.pi)
    pts = d.grid.nodes()
    ls = np.hypot(pts[..., 0], pts[..., 1]) - r
    _validate(d.grid, ls)
    return Domain(d.grid, ls, is_signed_distance=True)


def reflect(d, axis):
    """Mirror image about the hyperplane x_axis = 0 (box must be symmetric)."""
    x0, y0, x1, y1 = d.grid.box
    lo, hi = (y0, y1) if axis == 1 else (x0, x1)
    if abs(lo + hi) > 1e-9 * (hi - lo):
        raise GridMismatch("reflection needs a box symmetric about the axis")
    ls = d.ls[:, ::-1] if axis == 1 else d.ls[::-1, :]
    return Domain(d.grid, np.ascontiguousarray(ls),
                  is_signed_distance=d.is_signed_distance)


def hausdorff_distance(d1, d2):
    """Symmetric Hausdorff distance between the two boundary sample sets."""
    if d1.grid.shape != d2.grid.shape or d1.grid.box != d2.grid.box:
        raise GridMismatch("domains must share a grid")
    b1 = boundary_samples(d1).points
    b2 = boundary_samples(d2).points
    t1 = cKDTree(b1)
    t2 = cKDTree(b2)
    d12 = np.max(t2.query(b1)[0])
    d21 = np.max(t1.query(b2)[0])
    return float(max(d12, d21))


def connected_components(d):
    """Number of 4-connected components of the inside node set."""
    labels, n = ndimage.label(d.ls < 0.0)
    return int(n)


def random_starshaped_blob(grid, rng, r0=1.0, amp=0.25, n_modes=4):
    """Random smooth starshaped domain r(theta) = r0 (1 + sum of Fourier bumps)."""
    coef = rng.uniform(-amp, amp, size=(2, n_modes)) / np.arange(1, n_modes + 1)
    pts = grid.nodes()
    r = np.hypot(pts[..., 0], pts[..., 1])
    theta = np.arctan2(pts[..., 1], pts[..., 0])
    rb = np.ones_like(theta)
    for m in range(1, n_modes + 1):
        rb += coef[0, m - 1] * np.cos(m * theta) + coef[1, m - 1] * np.sin(m * theta)
    ls = r - r0 * np.maximum(rb, 0.2)
    _validate(grid, ls)
    return reinitialize(Domain(grid, ls))


# --- serialization ----------------------------------------------------------

def save_domain(d, path):
    x0, y0, x1, y1 = d.grid.box
    header = f"{d.grid.nx},{d.grid.ny},{x0},{y0},{x1},{y1}"
    with open(path, "w") as fh:
        fh.write(header + "\n")
        np.savetxt(fh, d.ls, delimiter=",")


def load_domain(path):
    with open(path) as fh:
        head = fh.readline().strip().split(",")
        nx, ny = int(head[0]), int(head[1])
        box = tuple(float(v) for v in head[2:6])
        ls = np.loadtxt(fh, delimiter=",")
    grid = GridSpec(nx, ny, box)
    if ls.shape != grid.shape:
        raise GridMismatch(f"field shape {ls.shape} does not match header")
    return Domain(grid, ls)


def save_boundary(samples, path):
    rows = np.column_stack([samples.points, samples.normals, samples.ds])
    with open(path, "w") as fh:
        fh.write("x,y,nx,ny,ds\n")
        np.savetxt(fh, rows, delimiter=",")
