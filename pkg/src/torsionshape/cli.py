"""Command-line entry point: run orchestration and artifact emission."""

import argparse
import datetime
import json
import os
import sys
import tempfile

import numpy as np

from . import oracle as oracle_mod
from .domain import (Ball, GridSpec, Sublevel, boundary_samples, build_domain,
                     load_domain, save_boundary, save_domain)
from .errors import ConfigParse, TorsionShapeError
from .optimizer import OptimizerParams, optimize, shape_derivative
from .torsion import (energy_J, objective_scale_invariant, phi_constraint,
                      residual_fbp, solve_torsion)
from .verify import (check_basic, check_convex, check_radial_ball,
                     check_sandwich, check_scaling_laws, check_starshaped,
                     check_symmetry)
from .weight import make_weight

EXIT_OK = 0
EXIT_CHECKS_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

DEFAULT_CONFIG = {
    "schema": 1,
    "weight": {"alpha": 2.0, "profile": {"type": "radial", "k": 0.5}},
    "grid": {"nx": 256, "ny": 256, "box": [-2.0, -2.0, 2.0, 2.0]},
    "optimizer": {},
    "init_scale": 1.0,
    "checks": ["basic"],
    "out": "out",
    "seed": "run",
}


def _atomic_write(path, text):
    dirname = os.path.dirname(os.path.abspath(path))
    os.makedirs(dirname, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=dirname, prefix=".tmp-")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _dump_json(obj):
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def _apply_override(cfg, key, value):
    try:
        value = json.loads(value)
    except json.JSONDecodeError:
        pass
    node = cfg
    parts = key.split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
    node[parts[-1]] = value


def load_config(path, overrides=()):
    cfg = json.loads(json.dumps(DEFAULT_CONFIG))  # deep copy
    if path is not None:
        try:
            with open(path) as fh:
                user = json.load(fh)
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigParse(f"cannot read config {path}: {e}") from e
        if not isinstance(user, dict):
            raise ConfigParse("config must be a JSON object")
        for k, v in user.items():
            if isinstance(v, dict) and isinstance(cfg.get(k), dict):
                cfg[k].update(v)
            else:
                cfg[k] = v
    for ov in overrides:
        if "=" not in ov:
            raise ConfigParse(f"override {ov!r} is not KEY=VALUE")
        key, value = ov.split("=", 1)
        _apply_override(cfg, key, value)
    return cfg


def _grid_from_cfg(cfg):
    g = cfg["grid"]
    try:
        return GridSpec(int(g["nx"]), int(g["ny"]), tuple(g["box"]))
    except (KeyError, ValueError, TypeError) as e:
        raise ConfigParse(f"bad grid spec: {e}") from e


def _weight_from_cfg(cfg):
    try:
        return make_weight(cfg["weight"])
    except (KeyError, TypeError) as e:
        raise ConfigParse(f"bad weight spec: {e}") from e


def _params_from_cfg(cfg):
    try:
        return OptimizerParams(**cfg.get("optimizer", {}))
    except TypeError as e:
        raise ConfigParse(f"bad optimizer params: {e}") from e


_CHECKS = {
    "basic": lambda d, w, h: check_basic(d),
    "starshaped": lambda d, w, h: check_starshaped(d, tol=2 * h),
    "convex": lambda d, w, h: check_convex(d, tol=2 * h),
    "radial_ball": lambda d, w, h: check_radial_ball(d, tol=3 * h),
    "symmetry_x": lambda d, w, h: check_symmetry(d, 0, tol=2 * h),
    "symmetry_y": lambda d, w, h: check_symmetry(d, 1, tol=2 * h),
    "sandwich": lambda d, w, h: check_sandwich(d, w),
    "scaling": lambda d, w, h: check_scaling_laws(d, w, 0.8),
}


def _run_checks(names, d, w):
    h = d.grid.h
    reports = []
    for name in names:
        if name not in _CHECKS:
            raise ConfigParse(f"unknown check {name!r}")
        reports.append(_CHECKS[name](d, w, h))
    return reports


def cmd_solve(cfg, quiet):
    w = _weight_from_cfg(cfg)
    grid = _grid_from_cfg(cfg)
    params = _params_from_cfg(cfg)
    init = build_domain(grid, Sublevel(w, 1.0))
    scale = float(cfg.get("init_scale", 1.0))
    if scale != 1.0:
        from .domain import scale_domain
        init = scale_domain(init, scale)
    trace = optimize(w, init, params)
    out = cfg["out"]
    os.makedirs(out, exist_ok=True)
    lines = "".join(json.dumps(rec, sort_keys=True) + "\n"
                    for rec in trace.records)
    _atomic_write(os.path.join(out, "trace.jsonl"), lines)
    d = trace.final_domain
    u = trace.final_field
    save_domain(d, os.path.join(out, "domain.csv"))
    np.savetxt(os.path.join(out, "field.csv"), u.values, delimiter=",")
    save_boundary(boundary_samples(d), os.path.join(out, "boundary.csv"))
    res_sup, res_l2 = residual_fbp(u, w, 1.0)
    reports = _run_checks(cfg.get("checks", []), d, w)
    report = {
        "schema": 1,
        "config": cfg,
        "J": energy_J(u),
        "phi": phi_constraint(w, d),
        "objective": objective_scale_invariant(w, d, u),
        "residual_sup": res_sup,
        "residual_l2": res_l2,
        "rescale_factor": trace.final_rescale,
        "iterations": len(trace.records),
        "termination": trace.reason,
        "checks": [r.to_json() for r in reports],
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    _atomic_write(os.path.join(out, "report.json"), _dump_json(report))
    ok = all(r.passed for r in reports) and res_sup <= params.tol_residual
    if not quiet:
        print(f"solve: residual_sup={res_sup:.3g} termination={trace.reason} "
              f"checks={'pass' if ok else 'FAIL'}")
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


def cmd_oracle(args):
    rep = oracle_mod.oracle_report(args.k, args.alpha, args.N, args.eps)
    print(_dump_json(rep), end="")
    return EXIT_OK


def cmd_verify(cfg, domain_path, quiet):
    w = _weight_from_cfg(cfg)
    d = load_domain(domain_path)
    reports = _run_checks(cfg.get("checks", ["basic"]), d, w)
    out = {"schema": 1, "checks": [r.to_json() for r in reports]}
    print(_dump_json(out), end="")
    ok = all(r.passed for r in reports)
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


def cmd_derivcheck(cfg, quiet, delta=1e-2, rtol=2e-2):
    w = _weight_from_cfg(cfg)
    grid = _grid_from_cfg(cfg)
    rows = []
    ok = True
    for R in cfg.get("radii", [0.8, 1.0, 1.2]):
        def J_phi(radius):
            d = build_domain(grid, Ball(radius=radius))
            u = solve_torsion(d)
            return energy_J(u), phi_constraint(w, d)

        d = build_domain(grid, Ball(radius=R))
        u = solve_torsion(d)
        dJ, dphi = shape_derivative(d, u, w, 1.0)
        Jp, pp = J_phi(R + delta)
        Jm, pm = J_phi(R - delta)
        fdJ = (Jp - Jm) / (2 * delta)
        fdP = (pp - pm) / (2 * delta)
        errJ = abs(dJ - fdJ) / abs(fdJ)
        errP = abs(dphi - fdP) / abs(fdP)
        ok = ok and errJ <= rtol and errP <= rtol
        rows.append({"R": R, "dJ": dJ, "dJ_fd": fdJ, "errJ": errJ,
                     "dphi": dphi, "dphi_fd": fdP, "errPhi": errP})
    print(_dump_json({"schema": 1, "delta": delta, "rtol": rtol, "rows": rows,
                      "pass": ok}), end="")
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


def cmd_sweep(cfg, quiet):
    sw = cfg.get("sweep", {})
    k = float(sw.get("k", 0.5))
    alpha = float(sw.get("alpha", 2.0))
    eps_list = sw.get("eps", [0.02, 0.05, 0.1])
    grid = _grid_from_cfg(cfg)
    params = _params_from_cfg(cfg)
    h = grid.h
    rows = []
    ok = True
    for eps in eps_list:
        spec = {"alpha": alpha,
                "profile": {"type": "fourier", "a": [k, 0.0, k * eps]}}
        w = make_weight(spec)
        init = build_domain(grid, Sublevel(w, 1.0))
        trace = optimize(w, init, params)
        s = boundary_samples(trace.final_domain)
        r = np.hypot(s.points[:, 0], s.points[:, 1])
        r_meas, R_meas = float(np.min(r)), float(np.max(r))
        if eps > 0:
            r_or, R_or = oracle_mod.stability_radii(k, alpha, 2, eps, "sup")
        else:
            r_or = R_or = oracle_mod.fbp_radius(k, alpha, 2)
        ok = ok and (r_meas >= r_or - 3 * h) and (R_meas <= R_or + 3 * h)
        rows.append((eps, r_or, R_or, r_meas, R_meas))
    out_lines = ["eps,r_oracle,R_oracle,r_measured,R_measured"]
    out_lines += [",".join(f"{v:.10g}" for v in row) for row in rows]
    arr = np.array(rows)
    if len(arr) >= 2:
        slope_meas = float(np.polyfit(arr[:, 0], arr[:, 4] - arr[:, 3], 1)[0])
        slope_orac = float(np.polyfit(arr[:, 0], arr[:, 2] - arr[:, 1], 1)[0])
        theory = oracle_mod.width_slope(k, alpha, 2)
        out_lines.append(f"# slope_measured={slope_meas:.6g} "
                         f"slope_oracle={slope_orac:.6g} "
                         f"slope_bracket_theory={theory:.6g}")
    text = "\n".join(out_lines) + "\n"
    out = cfg.get("out")
    if out:
        os.makedirs(out, exist_ok=True)
        _atomic_write(os.path.join(out, "sweep.csv"), text)
    if not quiet:
        print(text, end="")
    return EXIT_OK if ok else EXIT_CHECKS_FAILED


def build_parser():
    p = argparse.ArgumentParser(prog="torsionshape")
    p.add_argument("--quiet", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    for name in ("solve", "sweep", "derivcheck"):
        sp = sub.add_parser(name)
        sp.add_argument("--config", default=None)
        sp.add_argument("--out", default=None)
        sp.add_argument("--override", action="append", default=[],
                        metavar="KEY=VALUE")
    so = sub.add_parser("oracle")
    so.add_argument("--k", type=float, required=True)
    so.add_argument("--alpha", type=float, required=True)
    so.add_argument("--N", type=int, default=2)
    so.add_argument("--eps", type=float, default=None)
    sv = sub.add_parser("verify")
    sv.add_argument("--config", default=None)
    sv.add_argument("--domain", required=True)
    sv.add_argument("--override", action="append", default=[],
                    metavar="KEY=VALUE")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        if args.command == "oracle":
            return cmd_oracle(args)
        cfg = load_config(getattr(args, "config", None),
                          getattr(args, "override", []))
        if getattr(args, "out", None):
            cfg["out"] = args.out
        if args.command == "solve":
            return cmd_solve(cfg, args.quiet)
        if args.command == "verify":
            return cmd_verify(cfg, args.domain, args.quiet)
        if args.command == "derivcheck":
            return cmd_derivcheck(cfg, args.quiet)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.quiet)
        raise ConfigParse(f"unknown command {args.command}")
    except ConfigParse as e:
        print(_dump_json({"error": "config", "message": str(e)}),
              end="", file=sys.stderr)
        return EXIT_CONFIG
    except TorsionShapeError as e:
        print(_dump_json({"error": type(e).__name__, "message": str(e)}),
              end="", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
