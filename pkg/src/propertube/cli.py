"""Scenario runner: loads YAML configs, verifies action terms, writes CSVs.

Exit codes: 0 all checks pass, 1 tolerance failure (with --check), 2 bad
config.  Reruns with the same config are bit-identical: there is no
randomness anywhere in the production path and all reductions are
deterministic.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np
import yaml

from . import action as ac
from .hypersurface import (QuadratureSpec, TubePatch, boundary_patches,
                           gauss_check, surface_integral)
from .kinematics import Worldline
from .lwfield import (ConstantPotential, DistantCharge, PlaneWave,
                      PolynomialSlow, SingularityField)

__all__ = ["ConfigError", "load_config", "run_scenario", "run_suite", "main"]

SCENARIO_DIR = Path(__file__).parent / "scenarios"


class ConfigError(Exception):
    """Invalid scenario configuration; message lists precise field paths."""


def _fmt(x):
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return f"{x:.17g}"


# -- config loading / validation -------------------------------------------------

_WORLDLINE_FAMILIES = ("rest", "uniform", "hyperbolic", "circular")
_EXTERNAL_FAMILIES = ("constant-potential", "polynomial-slow", "plane-wave",
                      "distant-charge")


def validate_config(cfg: dict):
    """Return a list of 'field.path: problem' strings (empty when valid)."""
    errors = []
    if not isinstance(cfg, dict) or not cfg:
        return ["config: empty or not a mapping (need worldline, external, "
                "charge, xi1, xi2, tau1, tau2)"]

    wl = cfg.get("worldline")
    if not isinstance(wl, dict):
        errors.append("worldline: missing section")
    else:
        fam = wl.get("family")
        if fam not in _WORLDLINE_FAMILIES:
            errors.append(
                f"worldline.family: expected one of {_WORLDLINE_FAMILIES}, "
                f"got {fam!r}")
        elif fam == "uniform":
            beta = wl.get("beta")
            if not (isinstance(beta, (list, tuple)) and len(beta) == 3):
                errors.append("worldline.beta: need a 3-vector")
            elif sum(b * b for b in beta) >= 1.0:
                errors.append("worldline.beta: speed must be < 1")
        elif fam == "hyperbolic":
            if not isinstance(wl.get("a"), (int, float)) or wl.get("a") <= 0:
                errors.append("worldline.a: need a positive proper acceleration")
        elif fam == "circular":
            r, om = wl.get("radius"), wl.get("omega")
            if not isinstance(r, (int, float)) or not isinstance(om, (int, float)):
                errors.append("worldline.radius/omega: need numbers")
            elif abs(r * om) >= 1.0:
                errors.append("worldline.radius*omega: orbital speed must be < 1")

    ext = cfg.get("external")
    if not isinstance(ext, dict):
        errors.append("external: missing section")
    else:
        fam = ext.get("family")
        if fam not in _EXTERNAL_FAMILIES:
            errors.append(
                f"external.family: expected one of {_EXTERNAL_FAMILIES}, "
                f"got {fam!r}")

    for key in ("charge", "xi1", "xi2", "tau1", "tau2"):
        if not isinstance(cfg.get(key), (int, float)):
            errors.append(f"{key}: missing or not a number")
    if not errors:
        if not (0.0 < cfg["xi1"] < cfg["xi2"]):
            errors.append("xi1: need 0 < xi1 < xi2")
        if not (cfg["tau1"] < cfg["tau2"]):
            errors.append("tau1: need tau1 < tau2")
        dom = (cfg.get("worldline") or {}).get("domain")
        if dom is not None:
            if not (isinstance(dom, (list, tuple)) and len(dom) == 2):
                errors.append("worldline.domain: need [lo, hi]")
            elif dom[0] > cfg["tau1"] - cfg["xi2"] or dom[1] < cfg["tau2"]:
                errors.append(
                    "worldline.domain: must cover [tau1 - xi2, tau2] so that "
                    "retarded solves near the lower cone succeed")
    q = cfg.get("quadrature", {})
    if not isinstance(q, dict):
        errors.append("quadrature: must be a mapping")
    sweep = cfg.get("eps_sweep")
    if sweep is not None:
        vals = sweep.get("values") if isinstance(sweep, dict) else None
        if not (isinstance(vals, (list, tuple)) and len(vals) >= 3):
            errors.append("eps_sweep.values: need at least 3 epsilon values")
        elif (cfg.get("external", {}) or {}).get("family") != "polynomial-slow":
            errors.append("eps_sweep: requires external.family polynomial-slow")
    return errors


def load_config(path):
    with open(path) as fh:
        cfg = yaml.safe_load(fh)
    errors = validate_config(cfg)
    if errors:
        raise ConfigError(f"{path}: " + "; ".join(errors))
    return cfg


def build_worldline(cfg):
    wl = cfg["worldline"]
    fam = wl["family"]
    margin = cfg["xi2"] + abs(cfg["tau2"] - cfg["tau1"]) + 10.0
    domain = tuple(wl.get("domain", (cfg["tau1"] - margin, cfg["tau2"] + margin)))
    if fam == "rest":
        return Worldline.rest(origin=wl.get("origin", (0, 0, 0)), domain=domain)
    if fam == "uniform":
        return Worldline.uniform(wl["beta"], origin=wl.get("origin", (0, 0, 0)),
                                 domain=domain)
    if fam == "hyperbolic":
        return Worldline.hyperbolic(wl["a"], direction=wl.get("direction", (1, 0, 0)),
                                    domain=domain)
    return Worldline.circular(wl["radius"], wl["omega"], domain=domain)


def build_external(cfg, eps_override=None):
    ext = dict(cfg["external"])
    fam = ext.pop("family")
    if fam == "constant-potential":
        return ConstantPotential(phi=ext.get("phi", 1.0),
                                 avec=tuple(ext.get("avec", (0, 0, 0))))
    if fam == "polynomial-slow":
        return PolynomialSlow(eps=eps_override if eps_override is not None
                              else ext.get("eps", 1e-3),
                              phi=ext.get("phi", 1.0),
                              avec=tuple(ext.get("avec", (0, 0, 0))),
                              k0=ext.get("k0", 1.0),
                              kvec=tuple(ext.get("kvec", (1, 1, 1))))
    if fam == "plane-wave":
        return PlaneWave(amplitude=tuple(ext.get("amplitude", (0, 1, 0))),
                         kvec=tuple(ext.get("kvec", (0, 0, 0.00628))),
                         phase=ext.get("phase", 0.0))
    return DistantCharge(q=ext.get("q", 1.0),
                         center=tuple(ext.get("center", (0, 0, 100.0))))


def build_spec(cfg, mesh_scale=1.0):
    q = cfg.get("quadrature", {})
    spec = QuadratureSpec(n_theta=int(q.get("n_theta", 16)),
                          n_phi=int(q.get("n_phi", 24)),
                          tol=float(q.get("tol", 1e-10)),
                          max_panels=int(q.get("max_panels", 4000)))
    if mesh_scale != 1.0:
        spec = spec.scaled(mesh_scale)
    return spec


# -- checks -----------------------------------------------------------------------

DEFAULT_CHECKS = {
    "mass_tube": {"rel": 1e-6},
    "mass_total": {"rel": 1e-5},
    "cone_self_lower": {"rel": 1e-6},
    "cone_self_upper": {"rel": 1e-6},
    "cone_difference": {"abs": 1e-10},
    "hadamard_self_energy": {"rel": 1e-8},
    "xi2_over_re": {"abs": 0.0},
}


def _check_rows(rows, checks, failures):
    by_name = {r[0]: r for r in rows}
    for name, tol in checks.items():
        if name not in by_name:
            continue
        _, numeric, analytic, abs_err, _, tag = by_name[name]
        if isinstance(abs_err, float) and math.isnan(abs_err):
            continue
        limit = tol.get("abs", 0.0) + tol.get("rel", 0.0) * abs(analytic)
        if abs_err > limit:
            failures.append(
                f"{name} ({tag}): |numeric-analytic|={abs_err:.3e} > {limit:.3e}")


# -- scenario execution -------------------------------------------------------------

def _write_csv(path, header, rows):
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(c) if isinstance(c, float) else str(c)
                              for c in row) + "\n")


def _convergence_rows(worldline, e, external, xi2, tau1, tau2, spec, levels=4):
    """Interaction-tube integral at doubling fixed-rule meshes.

    The reference value is the adaptive result at tight tolerance; for a
    constant external potential the density is tau-independent and the
    error column sits at roundoff for every level.
    """
    sf = SingularityField(e, worldline)
    tube = TubePatch(worldline, xi2, tau1, tau2)
    a_fn = lambda nodes: external.potential(nodes.X)
    b_fn = lambda nodes: sf.field_from(nodes.tau_r, nodes.nhat, nodes.R)
    ref = surface_integral(tube, a_fn, b_fn, spec).value.real * ac.CROSS_PREFACTOR
    rows = []
    for level in range(levels):
        s = QuadratureSpec(n_theta=spec.n_theta, n_phi=spec.n_phi,
                           scheme="fixed-gl", gl_order=3,
                           gl_panels=2 ** (level + 1))
        val = surface_integral(tube, a_fn, b_fn, s).value.real * ac.CROSS_PREFACTOR
        rows.append((level, val, abs(val - ref)))
    return rows


def _eps_sweep(cfg, worldline, spec, out_rows, quiet):
    sweep = cfg["eps_sweep"]
    e = float(cfg["charge"])
    xi2 = float(cfg["xi2"])
    xi1 = float(sweep.get("xi1", 1e-8))
    thr = float(cfg.get("condition_threshold", 0.05))
    devs = []
    for eps in sweep["values"]:
        ext = build_external(cfg, eps_override=float(eps))
        tot = ac.interaction_total(worldline, e, ext, xi2, cfg["tau1"],
                                   cfg["tau2"], xi1=xi1, spec=spec,
                                   condition_threshold=thr)
        dev = abs(tot.numeric - tot.analytic_eq20)
        devs.append((float(eps), dev))
        out_rows.append((f"sweep_eps_{eps:g}", tot.numeric, tot.analytic_eq20,
                         dev, tot.error, "Eq.(20)"))
    lx = np.log10([d[0] for d in devs])
    ly = np.log10([max(d[1], 1e-300) for d in devs])
    slope = float(np.polyfit(lx, ly, 1)[0])
    out_rows.append(("sweep_slope", slope, 1.0, abs(slope - 1.0), 0.0,
                     "Eq.(15)-(16)"))
    if not quiet:
        print(f"  eps sweep slope: {slope:.4f}")
    return slope


def run_scenario(cfg, out_dir=None, check=False, mesh_scale=1.0, quiet=False):
    """Execute one scenario; returns (report, failures, rows)."""
    worldline = build_worldline(cfg)
    external = build_external(cfg)
    spec = build_spec(cfg, mesh_scale)
    e = float(cfg["charge"])
    xi1, xi2 = float(cfg["xi1"]), float(cfg["xi2"])
    tau1, tau2 = float(cfg["tau1"]), float(cfg["tau2"])
    thr = cfg.get("condition_threshold", 0.01)

    report = ac.assemble_report(worldline, e, external, xi1, xi2, tau1, tau2,
                                spec=spec, condition_threshold=thr,
                                external_region=cfg.get("external_region"),
                                with_diagnostics=cfg.get("diagnostics", False))
    rows = report.rows()

    gauss_cfg = cfg.get("gauss", {})
    if gauss_cfg.get("enabled", False):
        res = _run_gauss(cfg, worldline, spec, gauss_cfg)
        report.gauss_residual = res.rel_residual
        rows.append(("gauss_residual", res.rel_residual, 0.0,
                     res.rel_residual, 0.0, "Gauss"))

    slope = None
    if cfg.get("eps_sweep"):
        slope = _eps_sweep(cfg, worldline, spec, rows, quiet)

    failures = []
    if check:
        checks = {**DEFAULT_CHECKS, **{
            k: dict(v) for k, v in (cfg.get("checks") or {}).items()}}
        _check_rows(rows, checks, failures)
        if report.gauss_residual is not None and \
                report.gauss_residual > float(gauss_cfg.get("tol", 1e-6)):
            failures.append(
                f"gauss_residual: {report.gauss_residual:.3e} > "
                f"{gauss_cfg.get('tol', 1e-6):.3e}")
        if slope is not None:
            tol = float(cfg["eps_sweep"].get("slope_tol", 0.1))
            if abs(slope - 1.0) > tol:
                failures.append(f"eps_sweep slope {slope:.3f} not within "
                                f"{tol} of 1.0")

    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        name = cfg.get("name", "scenario")
        _write_csv(out_dir / f"{name}-terms.csv",
                   ["term", "numeric", "analytic", "abs_error",
                    "error_estimate", "eq_tag"], rows)
        _write_csv(out_dir / f"{name}-convergence.csv",
                   ["mesh_level", "value", "error"],
                   _convergence_rows(worldline, e, external, xi2, tau1, tau2,
                                     spec))
    if not quiet:
        for row in rows:
            print("  %-26s numeric=%-24s analytic=%-24s [%s]" % (
                row[0], _fmt(row[1]), _fmt(row[2]), row[5]))
        for f in failures:
            print("  FAIL", f)
    return report, failures, rows


def _run_gauss(cfg, worldline, spec, gauss_cfg):
    poly = PolynomialSlow(eps=0.4, phi=1.0, avec=(0.3, 0.0, 0.2),
                          k0=0.7, kvec=(0.3, 0.5, 0.2))
    from .biquat import six_vector, Biquaternion

    bvec = six_vector(np.array([0.5, 0.2, 0.1]), np.array([0.1, 0.4, 0.2]))

    def b_const(X):
        sh = X.batch_shape
        return Biquaternion(np.broadcast_to(bvec.w, sh),
                            np.broadcast_to(bvec.v, sh + (3,)))

    xi1 = max(float(cfg["xi1"]), 0.2 * float(cfg["xi2"]))
    xi2 = float(cfg["xi2"])
    tau1, tau2 = float(cfg["tau1"]), float(cfg["tau2"])
    patches = boundary_patches(worldline, xi1, xi2, tau1, tau2, inner_tube=True)
    flip = gauss_cfg.get("flip_patch")
    if flip:
        if flip not in patches:
            raise ConfigError(f"gauss.flip_patch: unknown patch {flip!r}")
        p = patches[flip]
        p.orientation = -p.orientation
    return gauss_check(poly.potential, b_const, worldline, xi1, xi2,
                       tau1, tau2, spec=spec, n_tau=8, n_xi=8,
                       patches=patches)


def run_suite(paths, out_dir=None, check=True, mesh_scale=1.0, quiet=False):
    """Run several scenario configs; returns (summary rows, exit code)."""
    summary = []
    worst = 0
    if not paths:
        print("warning: empty suite, nothing to run", file=sys.stderr)
        return summary, 0
    for p in paths:
        try:
            cfg = load_config(p)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            summary.append((str(p), "CONFIG-ERROR"))
            worst = max(worst, 2)
            continue
        if not quiet:
            print(f"scenario {cfg.get('name', p)}:")
        try:
            _, failures, _ = run_scenario(cfg, out_dir=out_dir, check=check,
                                          mesh_scale=mesh_scale, quiet=quiet)
        except Exception as exc:  # noqa: BLE001 - surfaced in the summary
            print(f"error running {p}: {exc}", file=sys.stderr)
            summary.append((str(p), "ERROR"))
            worst = max(worst, 1)
            continue
        status = "PASS" if not failures else "FAIL"
        summary.append((str(p), status))
        if failures:
            worst = max(worst, 1)
    for name, status in summary:
        print(f"{status:>6}  {name}")
    return summary, worst


def main(argv=None):
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory for CSVs")
    common.add_argument("--mesh-scale", type=float, default=1.0,
                        help="global refinement multiplier")
    common.add_argument("--check", action="store_true",
                        help="enforce tolerances; nonzero exit on failure")
    common.add_argument("--quiet", action="store_true")
    parser = argparse.ArgumentParser(
        prog="propertube",
        description="Verify mass/interaction action terms by hypersurface "
                    "quadrature around a moving singularity.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", parents=[common],
                           help="run one scenario config")
    p_run.add_argument("config")
    p_suite = sub.add_parser("suite", parents=[common],
                             help="run every scenario in a directory")
    p_suite.add_argument("directory")
    args = parser.parse_args(argv)

    if args.command == "run":
        try:
            cfg = load_config(args.config)
        except ConfigError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        except FileNotFoundError as exc:
            print(f"config error: {exc}", file=sys.stderr)
            return 2
        _, failures, _ = run_scenario(cfg, out_dir=args.out, check=args.check,
                                      mesh_scale=args.mesh_scale,
                                      quiet=args.quiet)
        return 1 if (args.check and failures) else 0

    directory = Path(args.directory)
    paths = sorted(directory.glob("*.yaml"))
    _, code = run_suite(paths, out_dir=args.out, check=True,
                        mesh_scale=args.mesh_scale, quiet=args.quiet)
    return code


if __name__ == "__main__":
    sys.exit(main())
