"""Torsion PDE solve on a level-set domain and the associated functionals."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .domain import boundary_samples, cell_quadrature, interp_bilinear
from .errors import EmptyDomain, SolverDiverged
from .weight import eval_weight

THETA_MIN = 1e-2     # cut-cell fraction clamp, keeps the system well conditioned
CG_RTOL = 1e-10


@dataclass(frozen=True, eq=False)
class StressField:
    """Solution of -lap u = 1, u = 0 on the boundary, on d = {ls < 0}."""

    domain: object
    values: np.ndarray   # nodal u, 0 outside
    iterations: int
    residual: float

    _cache: dict = None

    def __post_init__(self):
        object.__setattr__(self, "_cache", {})
        self.values.setflags(write=False)


def _build_system(d):
    ls = d.ls
    h = d.grid.h
    inside = ls < 0.0
    if not np.any(inside):
        raise EmptyDomain("no interior nodes")
    inv_h2 = 1.0 / (h * h)
    shape = ls.shape
    diag = np.zeros(shape)
    cw = np.zeros(shape)
    ce = np.zeros(shape)
    cs = np.zeros(shape)
    cn = np.zeros(shape)

    pad = np.pad(ls, 1, mode="constant", constant_values=np.inf)
    nb_w = pad[:-2, 1:-1]
    nb_e = pad[2:, 1:-1]
    nb_s = pad[1:-1, :-2]
    nb_n = pad[1:-1, 2:]
    for nb, coup in ((nb_w, cw), (nb_e, ce), (nb_s, cs), (nb_n, cn)):
        nb_in = inside & np.isfinite(nb) & (nb < 0.0)
        coup[inside & nb_in] = inv_h2
        diag[inside & nb_in] += inv_h2
        # ghost value by linear extrapolation through the zero crossing
        cut = inside & ~nb_in
        nbv = np.where(np.isfinite(nb), nb, 1.0)
        denom = ls - nbv
        tt = np.where(denom != 0.0, ls / np.where(denom != 0.0, denom, 1.0), 1.0)
        t = np.clip(tt, THETA_MIN, 1.0)
        diag[cut] += inv_h2 / t[cut]
    b = np.where(inside, 1.0, 0.0)
    return inside, diag, cw, ce, cs, cn, b


def _cg(diag, cw, ce, cs, cn, b, inside, rtol, maxiter, precond):
    x = np.zeros_like(b)
    r = b.copy()
    bnorm = np.sqrt(np.sum(b * b))
    if precond:
        inv_d = np.where(inside, 1.0 / np.where(diag > 0.0, diag, 1.0), 0.0)
        z = r * inv_d
    else:
        z = r.copy()
    p = z.copy()
    rz = np.sum(r * z)
    tmp = np.empty_like(b)
    it = 0
    res = np.sqrt(np.sum(r * r)) / bnorm
    while res > rtol and it < maxiter:
        kernels.poisson_matvec(diag, cw, ce, cs, cn, p, tmp)
        tmp[~inside] = 0.0
        denom = np.sum(p * tmp)
        if denom <= 0.0:
            break
        alpha = rz / denom
        x += alpha * p
        r -= alpha * tmp
        res = np.sqrt(np.sum(r * r)) / bnorm
        if precond:
            z = r * inv_d
        else:
            z = r
        rz_new = np.sum(r * z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    return x, it, res


def solve_torsion(d, rtol=CG_RTOL):
    """Finite-difference solve with symmetric cut-cell Dirichlet treatment.

    Conjugate gradients on the five-point stencil; outside neighbours are
    replaced by linear ghost extrapolation through the interface, which
    keeps the system symmetric positive definite.
    """
    inside, diag, cw, ce, cs, cn, b = _build_system(d)
    maxiter = 20 * max(d.grid.nx, d.grid.ny)
    x, it, res = _cg(diag, cw, ce, cs, cn, b, inside, rtol, maxiter, precond=False)
    if res > rtol:
        x, it2, res = _cg(diag, cw, ce, cs, cn, b, inside, rtol, maxiter, precond=True)
        it += it2
        if res > rtol:
            raise SolverDiverged(f"CG residual {res:g} after {it} iterations")
    u = np.where(inside, np.maximum(x, 0.0), 0.0)
    return StressField(domain=d, values=u, iterations=it, residual=float(res))


# --- functionals ------------------------------------------------------------

def energy_J(u):
    """J = -(1/2) * integral of u over the domain (cut-cell quadrature)."""
    d = u.domain
    areas, cxs, cys = cell_quadrature(d)
    mask = areas > 0.0
    pts = np.stack([cxs[mask], cys[mask]], axis=-1)
    uc = interp_bilinear(u.values, d.grid, pts)
    return float(-0.5 * np.sum(areas[mask] * uc))


def phi_constraint(w, d):
    """Weighted volume: integral of g^2 over the domain."""
    areas, cxs, cys = cell_quadrature(d)
    mask = areas > 0.0
    pts = np.stack([cxs[mask], cys[mask]], axis=-1)
    g2 = eval_weight(w, pts) ** 2
    return float(np.sum(areas[mask] * g2))


def weighted_perimeter(w, d, samples=None):
    """Integral of g over the boundary (marching-squares quadrature)."""
    s = boundary_samples(d) if samples is None else samples
    return float(np.sum(eval_weight(w, s.points) * s.ds))


def _samples(u):
    cache = u._cache
    if "samples" not in cache:
        cache["samples"] = boundary_samples(u.domain)
    return cache["samples"]


def boundary_gradient(u, samples=None):
    """|grad u| at boundary samples by one-sided differences along the normal.

    Uses two interior points at depths m*h and (m+1)*h (m minimal such that
    all bilinear stencil nodes are interior) together with u = 0 at the
    sample point.  Returns (values, valid mask); starved samples are flagged.
    """
    d = u.domain
    grid = d.grid
    h = grid.h
    s = _samples(u) if samples is None else samples
    n = len(s)
    vals = np.zeros(n)
    valid = np.zeros(n, dtype=bool)
    ls = d.ls
    x0, y0, _, _ = grid.box

    def corners_inside(q):
        fx = (q[:, 0] - x0) / h
        fy = (q[:, 1] - y0) / h
        i = np.clip(fx.astype(int), 0, grid.nx - 1)
        j = np.clip(fy.astype(int), 0, grid.ny - 1)
        return ((ls[i, j] < 0) & (ls[i + 1, j] < 0)
                & (ls[i, j + 1] < 0) & (ls[i + 1, j + 1] < 0))

    pending = np.arange(n)
    depth = np.ones(n)
    for m in range(1, 5):
        if len(pending) == 0:
            break
        q1 = s.points[pending] - m * h * s.normals[pending]
        q2 = s.points[pending] - (m + 1) * h * s.normals[pending]
        ok = corners_inside(q1) & corners_inside(q2)
        sel = pending[ok]
        if len(sel):
            s1 = m * h
            s2 = (m + 1) * h
            u1 = interp_bilinear(u.values, grid, s.points[sel] - s1 * s.normals[sel])
            u2 = interp_bilinear(u.values, grid, s.points[sel] - s2 * s.normals[sel])
            vals[sel] = (u1 * s2 ** 2 - u2 * s1 ** 2) / (s1 * s2 * (s2 - s1))
            valid[sel] = True
            depth[sel] = m
        pending = pending[~ok]
    vals = np.abs(vals)
    return vals, valid


def residual_fbp(u, w, c):
    """Sup and L2 residuals of |grad u| = c*g over valid boundary samples."""
    s = _samples(u)
    grad, valid = boundary_gradient(u, samples=s)
    g = eval_weight(w, s.points)
    target = c * g
    diff = grad[valid] - target[valid]
    ds = s.ds[valid]
    sup_ref = float(np.max(np.abs(target[valid]))) if np.any(valid) else 0.0
    if sup_ref <= 0.0:
        gn = np.sqrt(np.sum(grad[valid] ** 2 * ds))
        return float(np.max(np.abs(grad[valid]))), float(gn)
    res_sup = float(np.max(np.abs(diff)) / sup_ref)
    l2_ref = np.sqrt(np.sum(target[valid] ** 2 * ds))
    res_l2 = float(np.sqrt(np.sum(diff ** 2 * ds)) / l2_ref)
    return res_sup, res_l2


def objective_scale_invariant(w, d, u):
    """phi^(-(2+N)/(2 alpha + N)) * J with N = 2; invariant under homotheties."""
    J = energy_J(u)
    phi = phi_constraint(w, d)
    expo = 4.0 / (2.0 * w.alpha + 2.0)
    return float(phi ** (-expo) * J)
