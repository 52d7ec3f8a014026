"""Command-line front end.

Usage::

    ergodic-pde COMMAND --config PATH [--out DIR] [--grid-n N]

with ``COMMAND`` one of ``exponents``, ``solve``, ``explosive``, ``ergodic``,
``rate`` and ``verify``. The configuration is an INI file; see
``demos/configs`` and the README for the keys. Every run that has an output
directory writes ``report.txt`` (indented key-value tree, first line
``schema=1``), ``resolved.ini`` (the fully resolved configuration, which
re-runs to the same result) and, where meaningful, ``profile.csv`` with the
columns ``x,d,u,grad_u,residual``.

Exit status: 0 when everything requested passed, 1 when a check failed, 2 on
a configuration error and 3 when a computation failed (the partial report is
still written).
"""

import argparse
import configparser
from dataclasses import dataclass, field
import io
import math
import os
import sys
import tempfile

import numpy as np

from .barriers import check_inequality, explosive_sub_spec, explosive_super_spec
from .errors import ConfigError, ErgodicPDEError, ParameterError, SolverError
from .ergodic import (LambdaSchedule, estimate_constant_dirichlet,
                      estimate_constant_explosive)
from .grid import Grid, discrete_G, refine
from .model import (Domain1D, EquationParams, Forcing, boundary_constant,
                    compute_exponents, uniqueness_status, validate_params)
from .solve import RSchedule, solve_dirichlet, solve_explosive
from .verify import (check_comparison, check_gradient_bound, fit_boundary_rate,
                     mu_star_upper_bound)

COMMANDS = ("exponents", "solve", "explosive", "ergodic", "rate", "verify")

# section -> key -> (type, default); None default means required
SCHEMA = {
    "equation": {"alpha": (float, None), "beta": (float, None), "a": (float, 1.0),
                 "A": (float, 1.0), "lam": (float, 1.0), "operator": (str, "trace")},
    "domain": {"kind": (str, "interval"), "lo": (float, 0.0), "hi": (float, 1.0),
               "radius": (float, 1.0), "dim": (int, 2)},
    "forcing": {"kind": (str, "constant"), "coeffs": (str, "0"), "kappa": (float, 0.0),
                "q": (float, 0.0), "gamma0": (float, 0.0)},
    "grid": {"n": (int, 401)},
    "solver": {"tol": (float, 1e-8), "max_sweeps": (int, 5000), "method": (str, "newton"),
               "g": (float, 0.0), "order": (int, 2)},
    "ladder": {"R0": (str, "auto"), "factor": (float, 2.0), "max_rungs": (int, 20),
               "closure": (str, "matched")},
    "lambda": {"lam0": (float, 1.0), "ratio": (float, 0.5), "k_max": (int, 12),
               "grid_extrapolation": (bool, True), "path": (str, "explosive")},
    "rate": {"window_lo_cells": (float, 5.0), "window_hi_fraction": (float, 0.05),
             "model": (str, "loglog")},
    "probe": {"fraction": (float, 0.25)},
    "verify": {"comparison_pairs": (int, 10), "seed_offset": (int, 0)},
}


@dataclass
class ExperimentConfig:
    """Resolved configuration: validated model objects plus raw sections."""

    params: EquationParams
    domain: Domain1D
    forcing: Forcing
    grid_n: int
    sections: dict = field(default_factory=dict)

    def get(self, section, key):
        return self.sections[section][key]

    def to_ini(self):
        out = io.StringIO()
        for sec, keys in self.sections.items():
            out.write(f"[{sec}]\n")
            for k, v in keys.items():
                out.write(f"{k} = {_fmt_value(v)}\n")
            out.write("\n")
        return out.getvalue()


def _fmt_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _convert(kind, raw, where):
    try:
        if kind is bool:
            low = raw.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return kind(raw.strip())
    except ValueError:
        raise ConfigError(f"cannot read {raw!r} as {kind.__name__}", where) from None


def load_config(path, grid_n=None):
    """Parse and validate an experiment configuration.

    Raises
    ------
    ConfigError
        With ``where`` set to ``section.key`` (or the file for syntax errors).
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        with open(path) as fh:
            text = fh.read()
    except FileNotFoundError:
        raise ConfigError("file not found", str(path)) from None
    if text.startswith("schema="):
        text = config_from_report(text, str(path))
    try:
        parser.read_string(text, source=str(path))
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], str(path)) from None
    return config_from_parser(parser, grid_n)


def config_from_report(text, where="report"):
    """Recover the INI text of the configuration echoed in a report."""
    lines = text.splitlines()
    if lines[0] != "schema=1":
        raise ConfigError(f"unsupported report {lines[0]!r}", where)
    try:
        start = lines.index("config:") + 1
    except ValueError:
        raise ConfigError("report has no config block", where) from None
    out = []
    for line in lines[start:]:
        if not line.startswith("  "):
            break
        body = line.strip()
        if line.startswith("    "):
            out.append(body)
        else:
            out.append(f"[{body.rstrip(':')}]")
    return "\n".join(out) + "\n"


def config_from_parser(parser, grid_n=None):
    for sec in parser.sections():
        if sec not in SCHEMA:
            raise ConfigError("unknown section", sec)
        for key in parser[sec]:
            if key not in SCHEMA[sec]:
                raise ConfigError("unknown key", f"{sec}.{key}")
    sections = {}
    for sec, keys in SCHEMA.items():
        sections[sec] = {}
        for key, (kind, default) in keys.items():
            where = f"{sec}.{key}"
            if parser.has_option(sec, key):
                sections[sec][key] = _convert(kind, parser.get(sec, key), where)
            elif default is None:
                raise ConfigError("required key missing", where)
            else:
                sections[sec][key] = default
    if grid_n is not None:
        sections["grid"]["n"] = int(grid_n)
    eq = sections["equation"]
    try:
        params = validate_params(EquationParams(eq["alpha"], eq["beta"], a=eq["a"], A=eq["A"],
                                                lam=eq["lam"], operator=eq["operator"]))
    except ParameterError as exc:
        raise ConfigError(str(exc), f"equation.{exc.field or 'alpha'}") from None
    dm = sections["domain"]
    try:
        if dm["kind"] == "interval":
            dom = Domain1D.interval(dm["lo"], dm["hi"])
        elif dm["kind"] == "ball":
            dom = Domain1D.ball(dm["radius"], dm["dim"])
        else:
            raise ConfigError(f"unknown domain kind {dm['kind']!r}", "domain.kind")
    except ErgodicPDEError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(str(exc), "domain") from None
    fc = sections["forcing"]
    try:
        coeffs = tuple(float(c) for c in str(fc["coeffs"]).split(",") if c.strip())
    except ValueError:
        raise ConfigError("coefficients must be numbers", "forcing.coeffs") from None
    try:
        forcing = Forcing(fc["kind"], coeffs, fc["kappa"], fc["q"], fc["gamma0"])
        forcing.check_growth(params)
    except ErgodicPDEError as exc:
        raise ConfigError(str(exc), "forcing") from None
    n = sections["grid"]["n"]
    if n < 16:
        raise ConfigError("need at least 16 nodes", "grid.n")
    r0 = sections["ladder"]["R0"]
    if r0 != "auto":
        try:
            float(r0)
        except ValueError:
            raise ConfigError("R0 must be a number or 'auto'", "ladder.R0") from None
    if sections["lambda"]["path"] not in ("explosive", "dirichlet", "both"):
        raise ConfigError("path must be explosive, dirichlet or both", "lambda.path")
    if sections["solver"]["order"] not in (1, 2):
        raise ConfigError("order must be 1 or 2", "solver.order")
    return ExperimentConfig(params, dom, forcing, n, sections)


# -- output ------------------------------------------------------------------

def atomic_write(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = os.fspath(path)
    folder = os.path.dirname(os.path.abspath(path))
    os.makedirs(folder, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=folder, prefix=".tmp-", suffix=os.path.basename(path))
    try:
        with os.fdopen(fd, "w", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _g17(x):
    return format(float(x), ".17g")


def profile_csv(fld, residual):
    """Profile table; ``residual`` is given at every node (zero on the boundary)."""
    g = fld.grid
    grad = fld.gradient()
    rows = ["x,d,u,grad_u,residual"]
    for i in range(g.n):
        rows.append(",".join(_g17(v) for v in (g.nodes[i], g.d_values[i], fld.values[i],
                                                 grad[i], residual[i])))
    return "\n".join(rows) + "\n"


def nodal_residual(p, fld, f, order=1):
    r = np.zeros(fld.grid.n)
    r[fld.grid.interior] = discrete_G(p, fld, f, order=order)
    return r


def _render(tree, indent=0):
    lines = []
    for key, val in tree.items():
        pad = "  " * indent
        if isinstance(val, dict):
            lines.append(f"{pad}{key}:")
            lines.extend(_render(val, indent + 1))
        else:
            lines.append(f"{pad}{key}={_report_value(val)}")
    return lines


def _report_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (float, np.floating)):
        # emitted files never carry nan or inf
        return _g17(v) if math.isfinite(v) else "unset"
    if isinstance(v, (list, tuple)):
        return " ".join(_report_value(x) for x in v)
    return str(v)


def render_report(command, cfg, result):
    tree = {"command": command, "config": cfg.sections, "result": result}
    return "schema=1\n" + "\n".join(_render(tree)) + "\n"


def _num(x):
    x = float(x)
    if math.isfinite(x) and x == round(x) and abs(x) < 1e15:
        return str(int(round(x)))
    return repr(x)


# -- commands ------------------------------------------------------------------

def _grid(cfg):
    return Grid(cfg.domain, cfg.grid_n)


def _ladder(cfg):
    ld = cfg.sections["ladder"]
    R0 = None if ld["R0"] == "auto" else float(ld["R0"])
    return RSchedule(R0=R0, factor=ld["factor"], max_rungs=ld["max_rungs"])


def _order(cfg):
    return cfg.get("solver", "order")


def _field_order(cfg):
    # the settle closure never applies the correction
    return 1 if cfg.get("ladder", "closure") == "settle" else _order(cfg)


def _schedule(cfg):
    lm = cfg.sections["lambda"]
    return LambdaSchedule(lm["lam0"], lm["ratio"], lm["k_max"])


def cmd_exponents(cfg, out):
    p = cfg.params
    e = compute_exponents(p.alpha, p.beta)
    C = boundary_constant(p, cfg.domain, e)
    status = uniqueness_status(p, cfg.forcing)
    line = (f"gamma={_num(e.gamma)} tau={_num(e.tau)} grad_rate={_num(e.grad_rate)} "
            f"C={_num(C)} uniqueness={status}")
    print(line)
    result = {"gamma": e.gamma, "tau": e.tau, "grad_rate": e.grad_rate, "C": C,
              "uniqueness": status}
    return 0, result, {}


def cmd_solve(cfg, out):
    sv = cfg.sections["solver"]
    g = _grid(cfg)
    fld, rep = solve_dirichlet(cfg.params, sv["g"], cfg.forcing, g, tol=sv["tol"],
                               method=sv["method"], max_sweeps=sv["max_sweeps"])
    res = nodal_residual(cfg.params, fld, cfg.forcing)
    result = {"solve": vars(rep), "min_u": float(np.min(fld.values)),
              "max_u": float(np.max(fld.values))}
    return 0, result, {"profile.csv": profile_csv(fld, res)}


def cmd_explosive(cfg, out):
    g = _grid(cfg)
    fld, lad, rep = solve_explosive(cfg.params, cfg.forcing, g, ladder=_ladder(cfg),
                                    tol=cfg.get("solver", "tol"),
                                    closure=cfg.get("ladder", "closure"),
                                    order=_order(cfg))
    res = nodal_residual(cfg.params, fld, cfg.forcing, _field_order(cfg))
    result = {"solve": vars(rep),
              "ladder": {"R_final": lad.R_final, "rungs": len(lad.R_values),
                         "monotone_ok": lad.monotone_ok, "min_increment": lad.min_increment,
                         "closure": lad.closure},
              "u_center": float(fld.values[g.n // 2] if not g.is_ball else fld.values[0])}
    status = 0 if lad.monotone_ok else 1
    return status, result, {"profile.csv": profile_csv(fld, res)}


def _estimate_tree(est):
    return {"path": est.path, "case_tag": est.case_tag, "c_extrapolated": est.c_extrapolated,
            "c_grid": est.c_grid, "c_companion": est.c_companion, "theta": est.theta,
            "n": est.n, "n_companion": est.n_companion,
            "probe_count": int(len(est.probe_points)),
            "notes": "; ".join(est.notes) or "none"}


def _ladder_csv(est):
    rows = ["lambda,c"]
    rows += [f"{_g17(l)},{_g17(c)}" for l, c in est.ladder]
    return "\n".join(rows) + "\n"


def cmd_ergodic(cfg, out):
    g = _grid(cfg)
    lm = cfg.sections["lambda"]
    files, result = {}, {}
    paths = ("explosive", "dirichlet") if lm["path"] == "both" else (lm["path"],)
    for path in paths:
        if path == "explosive":
            est = estimate_constant_explosive(cfg.params, cfg.forcing, g, _schedule(cfg),
                                              tol=cfg.get("solver", "tol"),
                                              grid_extrapolation=lm["grid_extrapolation"],
                                              probe_fraction=cfg.get("probe", "fraction"),
                                              order=_order(cfg))
        else:
            est = estimate_constant_dirichlet(cfg.params, cfg.forcing, g, _schedule(cfg),
                                              tol=cfg.get("solver", "tol"),
                                              grid_extrapolation=lm["grid_extrapolation"])
        result[path] = _estimate_tree(est)
        files[f"ladder_{path}.csv"] = _ladder_csv(est)
        print(f"{path}: c={_g17(est.c_extrapolated)} case={est.case_tag}")
        if est.profile is not None:
            order = _field_order(cfg) if path == "explosive" else 1
            res = nodal_residual(cfg.params.with_lambda(est.ladder[-1][0]), est.profile,
                                 cfg.forcing, order)
            files[f"profile_{path}.csv"] = profile_csv(est.profile, res)
    return 0, result, files


def cmd_rate(cfg, out):
    p = cfg.params
    g = _grid(cfg)
    fld, lad, rep = solve_explosive(p, cfg.forcing, g, ladder=_ladder(cfg),
                                    tol=cfg.get("solver", "tol"), order=_order(cfg))
    e = compute_exponents(p.alpha, p.beta)
    C = boundary_constant(p, cfg.domain, e)
    rt = cfg.sections["rate"]
    window = (rt["window_lo_cells"] * g.h, rt["window_hi_fraction"] * g.dom.extent)
    fit = fit_boundary_rate(fld, e, C, window=window, model=rt["model"])
    print(f"exponent={_g17(fit.fitted_exponent)} prefactor={_g17(fit.fitted_prefactor)} "
          f"target_exponent={_num(fit.target_exponent)} target_prefactor={_g17(C)}")
    res = nodal_residual(p, fld, cfg.forcing, _field_order(cfg))
    result = {"fit": vars(fit), "within_0.05_and_10pct": fit.within(0.05, 0.10),
              "solve": vars(rep)}
    return 0, result, {"profile.csv": profile_csv(fld, res)}


def cmd_verify(cfg, out):
    """Run the invariant suite that applies to the configured problem."""
    p, f, dom = cfg.params, cfg.forcing, cfg.domain
    e = compute_exponents(p.alpha, p.beta)
    checks = {}
    g = _grid(cfg)
    lam = p.lam if p.lam > 0 else 1.0
    q = p.with_lambda(lam)

    flds = []
    grid = g
    for _ in range(2):
        fld, lad, _ = solve_explosive(q, f, grid, ladder=_ladder(cfg))
        flds.append(fld)
        checks.setdefault("ladder_monotone", {"passed": True})
        checks["ladder_monotone"]["passed"] &= lad.monotone_ok
        grid = refine(grid)
    gb = check_gradient_bound(flds, e)
    checks["gradient_bound"] = {"passed": gb.passed, "Q": gb.Q_values, "ratios": gb.ratios}

    sup = explosive_super_spec(q, f, dom)
    rep = check_inequality(sup, q, dom, f, side="super")
    checks["explosive_super"] = {"passed": rep.passed, "worst_margin": rep.worst_margin,
                                 "delta": sup.delta, "D": sup.D}
    sub = explosive_sub_spec(q, f, dom, delta=sup.delta)
    rep = check_inequality(sub, q, dom, f, side="sub")
    checks["explosive_sub"] = {"passed": rep.passed, "worst_margin": rep.worst_margin}

    rng = np.random.default_rng(12345 + cfg.get("verify", "seed_offset"))
    worst, ok = math.inf, True
    for _ in range(cfg.get("verify", "comparison_pairs")):
        g1, dg = rng.uniform(-1, 1), rng.uniform(0, 1)
        c1, dc = rng.uniform(-2, 2), rng.uniform(0, 1)
        fa, fb = Forcing.constant(c1), Forcing.constant(c1 + dc)
        lo = solve_dirichlet(q, g1, fa, g)
        hi = solve_dirichlet(q, g1 + dg, fb, g)
        cr = check_comparison(q, lo, hi, fa, fb)
        ok &= cr.passed
        worst = min(worst, cr.min_gap)
    checks["comparison"] = {"passed": ok, "min_gap": worst}

    if dom.kind == "interval":
        bound = mu_star_upper_bound(p, dom, f)
        checks["mu_star_bound"] = {"passed": math.isfinite(bound), "bound": bound}
    status = 0 if all(c["passed"] for c in checks.values()) else 1
    for name, c in checks.items():
        print(f"{name}: {'pass' if c['passed'] else 'FAIL'}")
    return status, {"checks": checks, "all_passed": status == 0}, {}


HANDLERS = {"exponents": cmd_exponents, "solve": cmd_solve, "explosive": cmd_explosive,
            "ergodic": cmd_ergodic, "rate": cmd_rate, "verify": cmd_verify}


def _plain(obj):
    """Make report trees from dataclass dicts (drop non-scalar objects)."""
    if isinstance(obj, dict):
        return {k: _plain(v) for k, v in obj.items() if _plain(v) is not None}
    if isinstance(obj, (bool, int, float, str, np.floating, np.integer, np.bool_)):
        return obj.item() if isinstance(obj, np.generic) else obj
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if obj is None:
        return "none"
    return None


def run(command, config_path, out_dir=None, grid_n=None):
    """Run one command; returns the exit status."""
    if command not in HANDLERS:
        raise ConfigError(f"unknown command {command!r}", "command")
    cfg = load_config(config_path, grid_n)
    files = {}
    try:
        status, result, files = HANDLERS[command](cfg, out_dir)
    except ConfigError:
        raise
    except ErgodicPDEError as exc:
        partial = {"error": type(exc).__name__, "message": str(exc)}
        if isinstance(exc, SolverError) and exc.report is not None:
            partial["partial_report"] = _plain(vars(exc.report))
        result, status = partial, 3
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
    if out_dir is not None:
        atomic_write(os.path.join(out_dir, "report.txt"),
                     render_report(command, cfg, _plain(result)))
        atomic_write(os.path.join(out_dir, "resolved.ini"), cfg.to_ini())
        for name, text in files.items():
            atomic_write(os.path.join(out_dir, name), text)
    return status


def main(argv=None):
    ap = argparse.ArgumentParser(prog="ergodic-pde", description=__doc__.split("\n\n")[0])
    ap.add_argument("command", choices=COMMANDS)
    ap.add_argument("--config", required=True, metavar="PATH")
    ap.add_argument("--out", metavar="DIR")
    ap.add_argument("--grid-n", type=int, metavar="N")
    args = ap.parse_args(argv)
    try:
        return run(args.command, args.config, args.out, args.grid_n)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
