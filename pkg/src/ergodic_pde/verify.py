"""Drivers that turn qualitative statements about the equation into checks.

Each function returns a small report object with the numbers it used and a
``passed`` flag, so callers (tests, the command line) can print or persist
them without recomputing anything.
"""

from dataclasses import dataclass, field
import math

import numpy as np
from scipy.optimize import minimize_scalar

from .barriers import barrier_derivatives, mu_star_spec
from .errors import HypothesisUnmet, WindowTooNarrow
from .ergodic import estimate_constant_explosive
from .grid import Grid
from .model import Forcing, eval_F, validate_params

WINDOW = (5.0, 0.05)


@dataclass
class RateFit:
    """Least-squares fit of the boundary blow-up.

    For ``gamma > 0`` and ``model="loglog"`` the exponent is the slope of
    ``log u`` against ``log d`` and the prefactor ``exp(intercept)``. With
    ``model="offset"`` the fit is ``u = P d^-e + B`` and the exponent is
    reported as ``-e``. For ``gamma = 0`` both numbers are the slope of ``u``
    against ``|log d|``.
    """

    window: tuple
    fitted_exponent: float
    fitted_prefactor: float
    r_squared: float
    n_points: int
    model: str = "loglog"
    offset: float = float("nan")
    target_exponent: float = float("nan")
    target_prefactor: float = float("nan")

    def within(self, exp_tol, rel_pref_tol):
        """Both fitted numbers inside the given tolerances of their targets."""
        ok_e = abs(self.fitted_exponent - self.target_exponent) <= exp_tol
        ok_p = abs(self.fitted_prefactor / self.target_prefactor - 1.0) <= rel_pref_tol
        return ok_e and ok_p


def _r2(y, yhat):
    ss = float(np.sum((y - np.mean(y)) ** 2))
    if ss == 0:
        return 1.0
    return min(max(1.0 - float(np.sum((y - yhat) ** 2)) / ss, 0.0), 1.0)


def _offset_fit(d, u):
    """``u = P d^-e + B`` by a bounded search over ``e`` with linear ``(P, B)``."""

    def solve(e):
        B = np.column_stack([d ** -e, np.ones_like(d)])
        coef = np.linalg.lstsq(B / u[:, None], np.ones_like(u), rcond=None)[0]
        return coef, float(np.sum((B @ coef / u - 1.0) ** 2))

    res = minimize_scalar(lambda e: solve(e)[1], bounds=(0.05, 5.0), method="bounded",
                          options={"xatol": 1e-10})
    coef, _ = solve(res.x)
    return float(res.x), float(coef[0]), float(coef[1])


def fit_boundary_rate(fld, e, C, window=None, model="loglog"):
    """Fit the blow-up rate of a profile near the boundary.

    Parameters
    ----------
    fld : GridField
    e : Exponents
    C : float
        Expected prefactor (stored in the result for comparison).
    window : tuple, optional
        ``(lo, hi)`` in distance; default ``(5 h, 0.05 extent)``.
    model : {"loglog", "offset"}

    Returns
    -------
    RateFit
    """
    grid = fld.grid
    lo, hi = window or (WINDOW[0] * grid.h, WINDOW[1] * grid.dom.extent)
    d = grid.d_values
    u = np.asarray(fld.values)
    sel = (d >= lo - 1e-12 * grid.h) & (d <= hi + 1e-12 * grid.h) & (d > 0)
    need = 4 if model == "offset" else 3
    if np.count_nonzero(sel) < need:
        raise WindowTooNarrow(f"only {np.count_nonzero(sel)} nodes with d in [{lo}, {hi}]")
    d, u = d[sel], u[sel]
    if e.gamma == 0:
        L = -np.log(d)
        slope, icpt = np.polyfit(L, u, 1)
        return RateFit((lo, hi), float(slope), float(slope), _r2(u, slope * L + icpt),
                       int(d.size), model="logslope", offset=float(icpt),
                       target_exponent=float(C), target_prefactor=float(C))
    if model == "loglog":
        if np.any(u <= 0):
            raise WindowTooNarrow("log-log fit needs positive values in the window")
        slope, icpt = np.polyfit(np.log(d), np.log(u), 1)
        r2 = _r2(np.log(u), slope * np.log(d) + icpt)
        return RateFit((lo, hi), float(slope), float(math.exp(icpt)), r2, int(d.size),
                       target_exponent=-e.gamma, target_prefactor=float(C))
    if model == "offset":
        ex, P, B = _offset_fit(d, u)
        r2 = _r2(u, P * d ** -ex + B)
        return RateFit((lo, hi), -ex, P, r2, int(d.size), model="offset", offset=B,
                       target_exponent=-e.gamma, target_prefactor=float(C))
    raise ValueError(f"unknown model {model!r}")


@dataclass
class GradientBoundReport:
    """``Q(h) = max |Dc u| d^(1/(beta-alpha-1))`` per grid and successive ratios."""

    n_values: list
    Q_values: list
    ratios: list
    passed: bool
    limit: float = 1.2


def gradient_weighted_max(fld, e):
    grid = fld.grid
    u = np.asarray(fld.values)
    inner = grid.interior
    idx = np.arange(grid.n)[inner]
    if grid.is_ball:
        idx = idx[1:]
    g = np.abs(u[idx + 1] - u[idx - 1]) / (2 * grid.h)
    return float(np.max(g * grid.d_values[idx] ** e.grad_rate))


def check_gradient_bound(flds, e, limit=1.2):
    """Compare ``Q`` across refinements; passes iff every ratio is at most ``limit``."""
    Q = [gradient_weighted_max(f, e) for f in flds]
    ratios = []
    for a, b in zip(Q[:-1], Q[1:]):
        ratios.append(0.0 if a == 0 and b == 0 else (b / a if a > 0 else math.inf))
    ok = all(math.isfinite(q) for q in Q) and all(r <= limit for r in ratios)
    return GradientBoundReport([f.grid.n for f in flds], Q, ratios, ok, limit)


@dataclass
class ComparisonReport:
    passed: bool
    min_gap: float
    tolerance: float
    worst_node: int


def check_comparison(p, lower, upper, f_lower, f_upper):
    """Nodal ordering of two Dirichlet solves.

    Parameters
    ----------
    p : EquationParams
    lower, upper : tuple of (GridField, SolveReport)
        ``lower`` must have smaller-or-equal boundary data and smaller-or-equal
        forcing than ``upper`` (a larger forcing raises the solution).
    f_lower, f_upper : Forcing

    Raises
    ------
    HypothesisUnmet
        When the data are not ordered, or ``lam = 0`` without a strict forcing
        gap and ``alpha != 0`` without ``f <= -m < 0``.
    """
    p = validate_params(p)
    (u1, r1), (u2, r2) = lower, upper
    grid = u1.grid
    if u2.grid.n != grid.n or u2.grid.dom != grid.dom:
        raise HypothesisUnmet("fields live on different grids")
    if any(a > b for a, b in zip(u1.boundary.values, u2.boundary.values)):
        raise HypothesisUnmet("boundary data not ordered")
    x = grid.nodes[grid.interior]
    fa = np.asarray(f_lower(x, grid.dom)) * np.ones_like(x)
    fb = np.asarray(f_upper(x, grid.dom)) * np.ones_like(x)
    if np.any(fa > fb):
        raise HypothesisUnmet("the lower solve must carry the smaller forcing")
    if p.lam == 0:
        strict = bool(np.all(fa < fb))
        negative = max(np.max(fa), np.max(fb)) < 0
        if not strict and p.alpha != 0 and not negative:
            raise HypothesisUnmet("lam = 0 needs a strict forcing gap, or f <= -m < 0 "
                                  "when alpha != 0")
    tol = 1e-6 + r1.final_residual + r2.final_residual
    gap = np.asarray(u2.values) - np.asarray(u1.values)
    i = int(np.argmin(gap))
    return ComparisonReport(bool(gap[i] >= -tol), float(gap[i]), tol, i)


def mu_star_upper_bound(p, dom, f=None, n=4001):
    """Upper bound on the ergodic constant from the power test function.

    Returns ``max (G(phi) - f)`` over a fine grid of the interval, where ``G``
    has no discount term.
    """
    p = validate_params(p).with_lambda(0.0)
    f = f or Forcing.constant(0.0)
    # |phi'|^alpha phi'' is constant for x1 > 0, so the end x1 = 0 (where it
    # reads 0 * inf or inf * 0) is left out
    x = np.linspace(dom.lo, dom.hi, n)[1:]
    v, v1, v2 = barrier_derivatives(mu_star_spec(), p, dom, x)
    F = eval_F(p.operator, p.a, p.A, v2) * np.ones_like(v)
    g = np.abs(v1)
    G = -g ** p.alpha * F + g ** p.beta
    return float(np.max(G - np.asarray(f(x, dom)) * np.ones_like(x)))


@dataclass
class MonotonicityReport:
    domains: list
    constants: list
    uncertainties: list
    nondecreasing: bool
    strict: list = field(default_factory=list)
    strict_applicable: bool = False
    passed: bool = False


def domain_monotonicity(p, f, domains, n=401, schedule=None, tol=None, estimates=None):
    """Ergodic constants on nested intervals, innermost first.

    Parameters
    ----------
    domains : list of Domain1D
        Strictly nested, from the smallest to the largest.
    n : int
        Node count per domain.
    tol : float, optional
        Slack for the nondecreasing check; defaults to the summed uncertainties.

    Returns
    -------
    MonotonicityReport
        ``uncertainties`` are the changes made by grid extrapolation, used as
        error proxies; the strict check requires a gap above three times
        their sum.
    """
    p = validate_params(p.with_lambda(1.0))
    for a, b in zip(domains[:-1], domains[1:]):
        if not (b.lo <= a.lo and a.hi <= b.hi):
            raise HypothesisUnmet("domains must be nested, smallest first")
    if estimates is None:
        estimates = [estimate_constant_explosive(p, f, Grid(dom, n), schedule) for dom in domains]
    cs = [e.c_extrapolated for e in estimates]
    unc = [abs(e.c_extrapolated - e.c_grid) if math.isfinite(e.c_grid) else 0.0
           for e in estimates]
    nondec = True
    strict = []
    for i in range(len(cs) - 1):
        slack = (unc[i] + unc[i + 1]) if tol is None else tol
        nondec &= cs[i] <= cs[i + 1] + slack
        strict.append(cs[i + 1] - cs[i] > 3 * (unc[i] + unc[i + 1]))
    x = np.linspace(domains[-1].lo, domains[-1].hi, 2001)[1:-1]
    sup_f = float(np.max(np.asarray(f(x, domains[-1])) * np.ones_like(x)))
    applicable = p.alpha == 0 or sup_f + cs[-1] < 0
    return MonotonicityReport(list(domains), cs, unc, bool(nondec), strict, applicable,
                              passed=bool(nondec))
