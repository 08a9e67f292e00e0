"""Executable geometric checks applied to domains (typically optimizer output)."""

from dataclasses import dataclass, asdict

import numpy as np
from scipy.spatial import ConvexHull

from .domain import (Domain, boundary_samples, build_domain, Sublevel,
                     connected_components, hausdorff_distance, interp_bilinear,
                     reflect, scale_domain, volume)
from .errors import AlphaOne, GridMismatch, OutOfBox
from .torsion import boundary_gradient, energy_J, phi_constraint, solve_torsion
from .weight import sublevel_radius


@dataclass(frozen=True)
class CheckReport:
    name: str
    passed: bool
    measured: float
    tol: float
    witness: dict

    def to_json(self):
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d


def _sample_angles_radii(d):
    s = boundary_samples(d)
    r = np.hypot(s.points[:, 0], s.points[:, 1])
    theta = np.mod(np.arctan2(s.points[:, 1], s.points[:, 0]), 2 * np.pi)
    return theta, r, s


def check_basic(d):
    """Origin strictly inside and a single connected component."""
    h = d.grid.h
    ls0 = float(interp_bilinear(d.ls, d.grid, np.array([[0.0, 0.0]]))[0])
    ncomp = connected_components(d)
    ok = (ls0 < -h) and ncomp == 1
    return CheckReport("basic", ok, measured=float(max(ls0 + h, ncomp - 1)),
                       tol=0.0, witness={"ls_origin": ls0, "components": ncomp})


def check_starshaped(d, n_rays=360, tol=None):
    """Along rays from the origin, the set must be left of a single crossing."""
    h = d.grid.h
    tol = 2 * h if tol is None else tol
    ls0 = float(interp_bilinear(d.ls, d.grid, np.array([[0.0, 0.0]]))[0])
    if ls0 >= 0.0:
        return CheckReport("starshaped", False, measured=float(ls0), tol=tol,
                           witness={"reason": "origin not inside"})
    x0, y0, x1, y1 = d.grid.box
    rmax = min(x1, y1, -x0, -y0)
    nstep = int(2 * rmax / h) * 2
    rr = np.linspace(0.0, rmax, nstep)
    worst = -np.inf
    worst_theta = 0.0
    angles = np.linspace(0.0, 2 * np.pi, n_rays, endpoint=False)
    pts = np.empty((nstep, 2))
    for th in angles:
        pts[:, 0] = rr * np.cos(th)
        pts[:, 1] = rr * np.sin(th)
        vals = interp_bilinear(d.ls, d.grid, pts)
        outside = np.nonzero(vals > 0.0)[0]
        if len(outside) == 0:
            continue
        dip = -np.min(vals[outside[0]:])  # how far ls re-enters after exit
        if dip > worst:
            worst = dip
            worst_theta = th
    worst = max(worst, 0.0)
    return CheckReport("starshaped", bool(worst <= tol), measured=float(worst),
                       tol=tol, witness={"theta": float(worst_theta)})


def check_convex(d, tol=None):
    """Max distance from boundary samples to their convex hull."""
    tol = 2 * d.grid.h if tol is None else tol
    _, _, s = _sample_angles_radii(d)
    pts = s.points
    hull = ConvexHull(pts)
    # hull.equations: a.x + b <= 0 inside; distance to hull boundary from inside
    a = hull.equations[:, :2]
    b = hull.equations[:, 2]
    dists = -(pts @ a.T + b)           # (n_pts, n_facets), >= 0 inside
    depth = np.min(dists, axis=1)      # distance to the hull surface
    worst = int(np.argmax(depth))
    return CheckReport("convex", bool(depth[worst] <= tol),
                       measured=float(depth[worst]), tol=tol,
                       witness={"point": pts[worst].tolist()})


def check_sandwich(d, w, slack=None):
    """Inclusions scaled-G1 <= Omega <= scaled-G1 from the torsion solve on G1."""
    if w.alpha <= 1:
        raise AlphaOne("sandwich bounds need alpha > 1")
    h = d.grid.h
    slack = (2 * h + 2e-2) if slack is None else slack
    g1 = build_domain(d.grid, Sublevel(w, 1.0))
    u1 = solve_torsion(g1)
    grad, valid = boundary_gradient(u1)
    A = float(np.min(grad[valid]))
    B = float(np.max(grad[valid]))
    e = 1.0 / (w.alpha - 1.0)
    t_in = A ** e
    t_out = B ** e
    theta, r, _ = _sample_angles_radii(d)
    rho = sublevel_radius(w, 1.0, theta)
    inner_violation = float(np.max(t_in * rho - r))
    outer_violation = float(np.max(r - t_out * rho))
    measured = max(inner_violation, outer_violation)
    return CheckReport("sandwich", bool(measured <= slack), measured=measured,
                       tol=slack, witness={"A": A, "B": B,
                                           "inner_scale": t_in,
                                           "outer_scale": t_out})


def check_symmetry(d, axis, tol=None):
    tol = 2 * d.grid.h if tol is None else tol
    dist = hausdorff_distance(d, reflect(d, axis))
    return CheckReport("symmetry", bool(dist <= tol), measured=dist, tol=tol,
                       witness={"axis": axis})


def check_radial_ball(d, tol=None):
    """Spread of the per-sample boundary radius."""
    tol = 3 * d.grid.h if tol is None else tol
    theta, r, _ = _sample_angles_radii(d)
    spread = float(np.max(r) - np.min(r))
    return CheckReport("radial_ball", bool(spread <= tol), measured=spread,
                       tol=tol, witness={"r_min": float(np.min(r)),
                                         "r_max": float(np.max(r))})


def check_inclusion(inner, outer, slack=None):
    """Every inside node of `inner` must be inside `outer` up to a boundary band."""
    if inner.grid.shape != outer.grid.shape or inner.grid.box != outer.grid.box:
        raise GridMismatch("domains must share a grid")
    slack = 2 * inner.grid.h if slack is None else slack
    mask = inner.ls < 0.0
    measured = float(np.max(outer.ls[mask])) if np.any(mask) else 0.0
    measured = max(measured, 0.0)
    nodes = inner.grid.nodes()
    if np.any(mask):
        idx = np.unravel_index(np.argmax(np.where(mask, outer.ls, -np.inf)),
                               mask.shape)
        witness = {"point": nodes[idx].tolist()}
    else:
        witness = {}
    return CheckReport("inclusion", bool(measured <= slack), measured=measured,
                       tol=slack, witness=witness)


def check_scaling_laws(d, w, t, rtol=2e-2):
    """J(tO) = t^4 J(O) and phi(tO) = t^(2 alpha + 2) phi(O) within rtol."""
    u = solve_torsion(d)
    J = energy_J(u)
    phi = phi_constraint(w, d)
    d2 = scale_domain(d, t)
    u2 = solve_torsion(d2)
    J2 = energy_J(u2)
    phi2 = phi_constraint(w, d2)
    errJ = abs(J2 - t ** 4 * J) / abs(t ** 4 * J)
    errP = abs(phi2 - t ** (2 * w.alpha + 2) * phi) / (t ** (2 * w.alpha + 2) * phi)
    measured = float(max(errJ, errP))
    return CheckReport("scaling", bool(measured <= rtol), measured=measured,
                       tol=rtol, witness={"t": t, "errJ": float(errJ),
                                          "errPhi": float(errP)})
