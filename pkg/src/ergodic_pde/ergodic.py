"""Ergodic constant by the vanishing-discount limit, along two routes.

* Explosive route: solve the explosive problem for ``lam_k = 2^-k`` and read
  ``c_k = -lam_k odd_pow(U(x0))`` on interior probes. This route always
  applies.
* Dirichlet route: solve with zero boundary data and track
  ``s_k = lam_k max(-min u, 0)^(1+alpha)``. Either ``min u`` settles (the
  Dirichlet problem is solvable) or ``s_k`` tends to a positive constant.

Both ladders are extrapolated in ``lam`` (Richardson with a fitted rate). The
constants converge at first order in ``h`` (the explosive route uses the
second-order flux, but the boundary closure stays first order), so by
default each route is also run on a companion grid with twice the spacing,
and the two values are combined linearly in ``h``.
"""

from dataclasses import dataclass, field
import math

import numpy as np

from .errors import LadderUnstable
from .grid import GridField, coarsen, refine
from .model import odd_pow, validate_params
from .solve import DEFAULT_TOL, solve_dirichlet, solve_explosive

CASE_TAGS = ("ergodic_regime", "dirichlet_solvable", "undetermined")
STABLE_REL = 1e-4
THETA_RANGE = (0.2, 4.0)


@dataclass(frozen=True)
class LambdaSchedule:
    """``lam_k = lam0 ratio^k`` for ``k = 0..k_max``."""

    lam0: float = 1.0
    ratio: float = 0.5
    k_max: int = 12

    def values(self):
        return [self.lam0 * self.ratio ** k for k in range(self.k_max + 1)]


@dataclass
class ErgodicEstimate:
    """Result of a vanishing-discount ladder.

    ``c_extrapolated`` is the reported constant; ``c_grid`` is the value on the
    requested grid before extrapolation in ``h``; ``c_companion`` is the value
    on the companion grid (``nan`` when grid extrapolation is off).
    """

    ladder: list
    c_extrapolated: float
    case_tag: str
    probe_points: np.ndarray
    path: str = "explosive"
    theta: float = float("nan")
    c_grid: float = float("nan")
    c_companion: float = float("nan")
    n: int = 0
    n_companion: int = 0
    notes: list = field(default_factory=list)
    profile: object = None


def probe_mask(grid, fraction=0.25):
    """Nodes at distance at least ``fraction * extent`` from the boundary."""
    mask = grid.d_values >= fraction * grid.dom.extent - 1e-12
    if not np.any(mask):
        mask = grid.d_values >= 0.5 * grid.d_values.max()
    return mask


def richardson(lams, cs):
    """Extrapolate ``c_k = c + K lam_k^theta`` from the last three rungs.

    Returns ``(c, theta)``. Falls back to the last rung (``theta = nan``) when
    the last three values are not geometrically contracting or the fitted
    rate leaves ``THETA_RANGE``.
    """
    if len(cs) < 3:
        return float(cs[-1]), float("nan")
    l0, l1, l2 = lams[-3:]
    c0, c1, c2 = cs[-3:]
    d1, d2 = c1 - c0, c2 - c1
    if d2 == 0:
        return float(c2), float("nan")
    if d1 == 0 or d1 * d2 < 0:
        return float(c2), float("nan")
    q = l1 / l2
    if not math.isclose(l0 / l1, q, rel_tol=1e-9):
        return float(c2), float("nan")
    theta = math.log(d1 / d2) / math.log(q)
    if not THETA_RANGE[0] <= theta <= THETA_RANGE[1]:
        return float(c2), float("nan")
    return float(c2 + d2 / (q ** theta - 1.0)), float(theta)


def _companion(grid):
    """Twice the spacing when possible, else half."""
    if grid.n % 2 == 1 and (grid.n + 1) // 2 >= 33:
        return coarsen(grid)
    return refine(grid)


def _combine(c_a, h_a, c_b, h_b):
    """Linear extrapolation to ``h = 0`` from two grids."""
    return (c_a * h_b - c_b * h_a) / (h_b - h_a)


def _check_cauchy(cs, tol, path):
    if len(cs) < 3 or not np.all(np.isfinite(cs)):
        if not np.all(np.isfinite(cs)):
            raise LadderUnstable(f"{path} ladder produced non-finite values")
        return
    d = np.abs(np.diff(cs))
    if d[-1] > 10 * tol and d[-1] > 1.5 * d[-2]:
        raise LadderUnstable(f"{path} ladder differences grow: {d[-2]:.3e} -> {d[-1]:.3e}")


def _explosive_ladder(p, f, grid, schedule, tol, mask, order=2):
    ladder = []
    fld = None
    for lam in schedule.values():
        q = p.with_lambda(lam)
        fld, _, _ = solve_explosive(q, f, grid, tol=tol, init=fld, order=order)
        c = float(np.mean(-lam * np.asarray(odd_pow(fld.values[mask], p.alpha))))
        ladder.append((lam, c))
    return ladder, fld


def estimate_constant_explosive(p, f, grid, schedule=None, tol=DEFAULT_TOL,
                                grid_extrapolation=True, probe_fraction=0.25, order=2):
    """Ergodic constant from explosive solutions with vanishing discount.

    Parameters
    ----------
    p : EquationParams
        ``lam`` is ignored; the schedule supplies it.
    f : Forcing
    grid : Grid
    schedule : LambdaSchedule, optional
    grid_extrapolation : bool
        Also run on the companion grid and extrapolate linearly in ``h``.
    order : {2, 1}
        Flux order passed to :func:`solve_explosive`.

    Returns
    -------
    ErgodicEstimate
        ``case_tag`` is always ``"ergodic_regime"``.
    """
    p = validate_params(p.with_lambda(1.0))
    schedule = schedule or LambdaSchedule()
    mask = probe_mask(grid, probe_fraction)
    ladder, fld = _explosive_ladder(p, f, grid, schedule, tol, mask, order)
    lams, cs = zip(*ladder)
    _check_cauchy(cs, tol, "explosive")
    c_grid, theta = richardson(lams, cs)
    est = ErgodicEstimate(ladder=list(ladder), c_extrapolated=c_grid,
                          case_tag="ergodic_regime", probe_points=grid.nodes[mask],
                          path="explosive", theta=theta, c_grid=c_grid, n=grid.n,
                          profile=fld)
    if grid_extrapolation:
        g2 = _companion(grid)
        lad2, _ = _explosive_ladder(p, f, g2, schedule, tol, probe_mask(g2, probe_fraction),
                                    order)
        c2, _ = richardson(*zip(*lad2))
        est.c_companion = c2
        est.n_companion = g2.n
        est.c_extrapolated = _combine(c_grid, grid.h, c2, g2.h)
    return est


def _dirichlet_ladder(p, f, grid, schedule, tol):
    ladder, mins = [], []
    fld = None
    for lam in schedule.values():
        q = p.with_lambda(lam)
        fld, _ = solve_dirichlet(q, 0.0, f, grid, init=fld, tol=tol)
        umin = float(np.min(fld.values))
        mins.append(umin)
        s = lam * max(-umin, 0.0) ** (1.0 + p.alpha)
        ladder.append((lam, s))
    return ladder, mins, fld


def _classify(ladder, mins, tol):
    m0, m1, m2 = mins[-3:] if len(mins) >= 3 else (np.nan,) * 3
    if len(mins) >= 3 and all(abs(b - a) < STABLE_REL * (1 + abs(b))
                              for a, b in ((m0, m1), (m1, m2))):
        return "dirichlet_solvable"
    s = [c for _, c in ladder]
    if len(s) >= 2 and s[-1] > 10 * tol and abs(s[-1] - s[-2]) <= 0.05 * s[-1]:
        return "ergodic_regime"
    return "undetermined"


def estimate_constant_dirichlet(p, f, grid, schedule=None, tol=DEFAULT_TOL,
                                grid_extrapolation=True):
    """Ergodic constant from the zero-data Dirichlet problem with vanishing discount.

    Returns
    -------
    ErgodicEstimate
        ``dirichlet_solvable`` when ``min u`` stops moving (``c_extrapolated``
        is ``nan``; the constant is then at most zero), ``ergodic_regime`` when
        ``s_k`` tends to a positive value, ``undetermined`` otherwise.
    """
    p = validate_params(p.with_lambda(1.0))
    if not f.is_bounded:
        raise ValueError("the Dirichlet route needs a bounded forcing")
    schedule = schedule or LambdaSchedule()
    ladder, mins, fld = _dirichlet_ladder(p, f, grid, schedule, tol)
    tag = _classify(ladder, mins, tol)
    est = ErgodicEstimate(ladder=list(ladder), c_extrapolated=float("nan"), case_tag=tag,
                          probe_points=grid.nodes[[int(np.argmin(fld.values))]],
                          path="dirichlet", n=grid.n, profile=fld)
    if tag != "ergodic_regime":
        if tag == "dirichlet_solvable":
            est.notes.append("min u settled: Dirichlet problem solvable, constant <= 0")
        return est
    lams, ss = zip(*ladder)
    _check_cauchy(ss, tol, "dirichlet")
    c_grid, theta = richardson(lams, ss)
    est.c_grid = est.c_extrapolated = c_grid
    est.theta = theta
    if grid_extrapolation:
        g2 = _companion(grid)
        lad2, mins2, _ = _dirichlet_ladder(p, f, g2, schedule, tol)
        if _classify(lad2, mins2, tol) == "ergodic_regime":
            c2, _ = richardson(*zip(*lad2))
            est.c_companion = c2
            est.n_companion = g2.n
            est.c_extrapolated = _combine(c_grid, grid.h, c2, g2.h)
        else:
            est.notes.append("companion grid not in the ergodic regime; no h extrapolation")
    return est


def normalized_profile(fld):
    """Shift a field so that its minimum is zero."""
    return GridField.from_values(fld.grid, fld.values - np.min(fld.values))
