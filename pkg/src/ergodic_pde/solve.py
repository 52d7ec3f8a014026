"""Stationary solvers for the Dirichlet problem and the explosive problem.

:func:`solve_dirichlet` solves the discrete system with constant boundary
data. The default method is a damped Newton iteration on the tridiagonal
Jacobian from :func:`ergodic_pde.grid.assemble`; nonlinear Gauss-Seidel with
a safeguarded scalar solve per node is available and is used as a fallback
when Newton stalls, after a continuation in the forcing and implicit
pseudo-time stepping.

:func:`solve_explosive` approximates the minimal explosive solution by the
increasing ladder of boundary values ``R_k = R0 2^k``. On a fixed grid the
nodes next to the boundary keep tracking ``R`` and the ones behind them
follow slowly, so the ladder is closed by matching: the boundary value is
chosen so that the jump between the boundary and the node at ``d_cut``
equals the jump of the blow-up envelope ``C d^-gamma`` between ``h`` and
``d_cut`` (``-C log d`` when ``gamma = 0``). The literal settling test is
available with ``closure="settle"``.

Both solvers accept ``order=2``: the first-order solution is then refined
by defect correction on the Godunov flux, each correction step being again a
monotone first-order solve. For the explosive problem every step also redoes
the matching, which keeps the iteration stable for small ``lam``. The
first-order Hamiltonian dominates the error of the explosive profile, about
``1/k`` relative at ``k`` cells from the boundary.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.optimize import brentq

from .errors import LadderNotSettled, NaNDetected, NotConverged
from .grid import (Boundary, GridField, assemble, excess_residual, forcing_values,
                   hamiltonian_defect, rounding_floor, stencil)
from .model import boundary_constant, compute_exponents, validate_params

DEFAULT_TOL = 1e-8
DEFAULT_TOL_LADDER = 1e-6
DEFAULT_MONO_TOL = 1e-8
D_CUT_CELLS = 10
STEP_TOL = 1e-12
MAX_POLISH = 400
DEFECT_TOL = 1e-12
DEFECT_MAX = 200


@dataclass
class SolveReport:
    """Outcome of one stationary solve.

    ``final_residual`` is the max over nodes of ``(|r_i| - floor_i)^+ / scale_i``
    where the scale is one plus the magnitude of the individual terms at the
    node and ``floor_i`` the rounding bound of
    :func:`ergodic_pde.grid.rounding_floor`, so the tolerance stays meaningful
    when the field reaches ``1e6``.
    ``raw_residual`` is the unscaled max-norm.
    """

    converged: bool
    sweeps: int
    final_residual: float
    tolerance: float
    raw_residual: float = float("nan")
    method: str = "newton"
    wall_notes: str = ""


@dataclass
class RLadderReport:
    """Boundary values visited by the ladder (sorted) and the monotonicity check."""

    R_values: list = field(default_factory=list)
    interior_deltas: list = field(default_factory=list)
    monotone_ok: bool = True
    min_increment: float = float("inf")
    closure: str = "matched"
    R_final: float = float("nan")
    settled: bool = False


@dataclass(frozen=True)
class RSchedule:
    """Geometric ladder ``R_k = R0 factor^k``; ``R0=None`` picks ``max(1, |f|^(1/(1+alpha)))``."""

    R0: float = None
    factor: float = 2.0
    max_rungs: int = 20


def _as_boundary(grid, g):
    if isinstance(g, Boundary):
        return g
    if np.ndim(g) == 0:
        return Boundary.constant(grid, float(g))
    g = tuple(float(v) for v in g)
    return Boundary.radial(g[0]) if grid.is_ball else Boundary.dirichlet(*g)


def _initial(grid, boundary, init):
    if init is None:
        u = np.full(grid.n, float(np.mean(boundary.values)))
    else:
        u = np.array(init.values if isinstance(init, GridField) else init, dtype=float)
    if grid.is_ball:
        u[-1] = boundary.values[0]
    else:
        u[0], u[-1] = boundary.values
    return u


def _measure(p, grid, u, fvals):
    return excess_residual(p, grid, u, fvals)


def _newton(p, grid, u, fvals, tol, max_iter):
    inner = grid.interior
    n = inner.stop - inner.start
    stalls = polish = 0
    err = np.inf
    for it in range(max_iter + 1):
        r, sc, (lo, di, up) = assemble(p, grid, u, fvals)
        if not np.all(np.isfinite(r)):
            raise NaNDetected("non-finite residual during Newton iteration")
        floor = rounding_floor(p, grid, u)
        err = float(np.max(np.maximum(np.abs(r) - floor, 0.0) / sc))
        small = err <= tol
        if small and polish >= MAX_POLISH:
            return u, it, err, True
        ab = np.zeros((3, n))
        ab[0, 1:] = up[:-1]
        ab[1] = di
        ab[2, :-1] = lo[1:]
        du = solve_banded((1, 1), ab, -r, check_finite=False)
        if not np.all(np.isfinite(du)):
            return u, it, err, small
        # a small residual can hide a large nodal error where the equation is
        # nearly flat in u, so also wait for the Newton update to vanish
        if small and np.max(np.abs(du) / (1.0 + np.abs(u[inner]))) <= STEP_TOL:
            return u, it, err, True
        polish += small
        merit = np.sum((r / sc) ** 2)
        step = 1.0
        while True:
            v = u.copy()
            v[inner] += step * du
            r2 = assemble(p, grid, v, fvals, jacobian=False)[0]
            if np.all(np.isfinite(r2)) and np.sum((r2 / sc) ** 2) < (1 - 1e-4 * step) * merit:
                break
            step *= 0.5
            if step < 1e-10:
                break
        if step < 1e-10:
            if small:
                return u, it, err, True
            stalls += 1
            if stalls >= 3:
                return u, it, err, False
            continue
        u = v
    return u, max_iter, err, err <= tol


def _continuation(p, grid, u, fvals, tol, max_iter, min_step=1.0 / 256):
    """Newton along ``s fvals`` for ``s`` from 0 to 1, halving the step on failure.

    With ``alpha != 0`` the weighted diffusion is not monotone in the
    neighbours and a cold Newton start can stall near a sign change of
    ``u'``; small forcing steps keep each start close to the new solution.
    """
    s, ds, its = 0.0, 0.25, 0
    u, k, err, ok = _newton(p, grid, u, 0.0 * fvals, tol, max_iter)
    its += k
    if not ok:
        return u, its, err, False
    while s < 1.0:
        t = min(1.0, s + ds)
        v, k, err, ok = _newton(p, grid, u.copy(), t * fvals, tol, max_iter)
        its += k
        if ok:
            u, s, ds = v, t, 2.0 * ds
        else:
            ds *= 0.5
            if ds < min_step:
                return u, its, err, False
    return u, its, err, True


def _pseudo_time(p, grid, u, fvals, tol, max_iter=5000, dt=1e-2):
    """Implicit pseudo-time stepping ``(sc/dt + J) du = -r``.

    ``dt`` grows with the residual ratio and a step that raises the scaled
    residual norm by more than half is retried with ``dt/4``.
    """
    inner = grid.interior
    n = inner.stop - inner.start
    u = u.copy()
    r, sc, jac = assemble(p, grid, u, fvals)
    err = np.inf
    for it in range(max_iter):
        floor = rounding_floor(p, grid, u)
        err = float(np.max(np.maximum(np.abs(r) - floor, 0.0) / sc))
        if err <= tol:
            return u, it, err, True
        norm = np.linalg.norm(r / sc)
        lo, di, up = jac
        ab = np.zeros((3, n))
        ab[0, 1:] = up[:-1]
        ab[1] = di + sc / dt
        ab[2, :-1] = lo[1:]
        v = u.copy()
        v[inner] += solve_banded((1, 1), ab, -r, check_finite=False)
        r2, sc2, jac2 = assemble(p, grid, v, fvals)
        norm2 = np.linalg.norm(r2 / sc2) if np.all(np.isfinite(r2)) else np.inf
        if norm2 > 1.5 * norm:
            dt *= 0.25
            if dt < 1e-12:
                break
            continue
        dt = min(dt * min(4.0, norm / max(norm2, 1e-300)), 1e12)
        u, r, sc, jac = v, r2, sc2, jac2
    return u, max_iter, err, False


def _gauss_seidel(p, grid, u, fvals, tol, max_sweeps):
    """Alternating ascending/descending sweeps with a bracketed scalar solve per node."""
    u = u.copy()
    inner = np.arange(grid.n)[grid.interior]
    err = np.inf
    for sweep in range(max_sweeps + 1):
        err = _measure(p, grid, u, fvals)[0]
        if not np.isfinite(err):
            raise NaNDetected("non-finite residual during Gauss-Seidel sweep")
        if err <= tol:
            return u, sweep, err, True
        order = inner if sweep % 2 == 0 else inner[::-1]
        for i in order:
            _relax_node(p, grid, u, fvals, i)
    return u, max_sweeps, err, False


def _local_residual(p, grid, u, fvals, i):
    j = i - grid.interior.start
    left = u[1] if (grid.is_ball and i == 0) else u[i - 1]
    rn = grid.nodes[i:i + 1] if grid.dom.mult else None
    r, _, _ = stencil(p, grid.h, grid.dom.mult, np.array([left]), u[i:i + 1],
                      u[i + 1:i + 2], rn, fvals[j:j + 1], jacobian=False)
    return float(r[0])


def _relax_node(p, grid, u, fvals, i):
    def phi(val):
        u[i] = val
        return _local_residual(p, grid, u, fvals, i)

    u0 = u[i]
    r0 = phi(u0)
    if r0 == 0:
        return
    # residual is increasing in u_i; walk outwards until the sign flips
    step = max(1.0, abs(u0)) * 1e-3
    direction = -1.0 if r0 > 0 else 1.0
    other = u0
    for _ in range(200):
        other = u0 + direction * step
        if np.sign(phi(other)) != np.sign(r0):
            break
        step *= 2.0
    else:
        u[i] = u0
        return
    a, b = sorted((u0, other))
    u[i] = brentq(phi, a, b, xtol=1e-14, rtol=1e-15)


def solve_dirichlet(p, g, f, grid, init=None, tol=DEFAULT_TOL, method="newton",
                    max_iter=None, max_sweeps=5000, fvals=None, fallback=True, order=1):
    """Solve the discrete problem with constant boundary data.

    Parameters
    ----------
    p : EquationParams
        ``lam`` should be positive; with ``lam = 0`` the solve may diverge.
    g : float, tuple or Boundary
        Boundary data.
    f : Forcing
    grid : Grid
    init : GridField or ndarray, optional
        Starting guess; boundary entries are overwritten by ``g``.
    tol : float
        Bound on the scaled residual (see :class:`SolveReport`).
    method : {"newton", "gauss_seidel"}
    max_iter : int, optional
        Newton iteration cap; defaults to ``max(200, n)`` because flat
        regions with ``alpha > 0`` converge only linearly.
    fvals : ndarray, optional
        Precomputed forcing at the assembled nodes (used by the ladder for ``min(f, R)``).
    fallback : bool
        When Newton stalls, try forcing continuation, then pseudo-time, then
        Gauss-Seidel.
    order : {1, 2}
        ``2`` applies defect correction towards the second-order flux. With
        the data held fixed the correction can diverge when the boundary
        jump is steep and ``lam`` small; :func:`solve_explosive` avoids this
        by re-matching at each step.

    Returns
    -------
    GridField, SolveReport
    """
    p = validate_params(p)
    if max_iter is None:
        max_iter = max(200, grid.n)
    boundary = _as_boundary(grid, g)
    u = _initial(grid, boundary, init)
    if fvals is None:
        fvals = forcing_values(f, grid)
    notes = []
    if method == "newton":
        start = u.copy()
        u, its, err, ok = _newton(p, grid, u, fvals, tol, max_iter)
        if not ok and fallback:
            notes.append(f"newton stalled at {err:.3e}; forcing continuation")
            v, more, err_c, ok = _continuation(p, grid, start, fvals, tol, max_iter)
            its += more
            if ok:
                u, err = v, err_c
        if not ok and fallback:
            notes.append(f"continuation stalled at {err:.3e}; pseudo-time")
            v, more, err_t, ok = _pseudo_time(p, grid, start, fvals, tol)
            its += more
            if ok:
                u, err = v, err_t
        if not ok and fallback:
            notes.append(f"pseudo-time stalled at {err:.3e}; Gauss-Seidel fallback")
            u, sweeps, err, ok = _gauss_seidel(p, grid, u, fvals, tol, max_sweeps)
            its += sweeps
            if ok:
                # polish with Newton from the Gauss-Seidel iterate
                u, more, err, ok = _newton(p, grid, u, fvals, tol, max_iter)
                its += more
    elif method == "gauss_seidel":
        u, its, err, ok = _gauss_seidel(p, grid, u, fvals, tol, max_sweeps)
    else:
        raise ValueError(f"unknown method {method!r}")
    if not np.all(np.isfinite(u)):
        raise NaNDetected("non-finite solution values")
    scaled, raw = _measure(p, grid, u, fvals)
    report = SolveReport(converged=ok and scaled <= tol, sweeps=int(its),
                         final_residual=scaled, tolerance=tol, raw_residual=raw,
                         method=method, wall_notes="; ".join(notes))
    fld = GridField(grid, u, boundary)
    if not report.converged:
        err = NotConverged(f"residual {scaled:.3e} above tolerance {tol:.1e}", report)
        err.field = fld
        raise err
    if order == 2:
        return _defect_correct(p, grid, boundary, fvals, fld.values, tol, report.sweeps)
    if order != 1:
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    return fld, report


def _defect_correct(p, grid, boundary, fvals, init, tol, sweeps=0):
    """Iterate first-order Newton solves with the forcing shifted by the flux defect.

    A step whose Newton solve fails is retried with the change in the
    correction halved. Returns ``(GridField, SolveReport)``.
    """
    u = _initial(grid, boundary, init)
    applied = np.zeros(u[grid.interior].size)
    for it in range(DEFECT_MAX):
        target = hamiltonian_defect(p, grid, u)
        omega = 1.0
        while True:
            trial = applied + omega * (target - applied)
            try:
                v, rep = solve_dirichlet(p, boundary, None, grid, init=u, tol=tol,
                                         fvals=fvals + trial, fallback=False)
                break
            except NotConverged as exc:
                omega *= 0.5
                if omega < 1e-3:
                    raise NotConverged("defect correction step failed", exc.report) from None
        applied = trial
        sweeps += rep.sweeps
        change = float(np.max(np.abs(v.values - u) / (1.0 + np.abs(u))))
        u = np.array(v.values)
        if omega == 1.0 and change <= DEFECT_TOL:
            rep.sweeps = sweeps
            rep.method = f"{rep.method}+defect"
            rep.wall_notes = f"{it + 1} defect steps"
            return v, rep
    rep.converged = False
    err = NotConverged(f"defect correction still moving by {change:.2e}", rep)
    err.field = v
    raise err


def envelope(p, d):
    """Blow-up envelope ``C d^-gamma`` (``-C log d`` when ``gamma = 0``)."""
    e = compute_exponents(p.alpha, p.beta)
    C = boundary_constant(p, e=e)
    d = np.asarray(d, dtype=float)
    return C * d ** (-e.gamma) if e.gamma > 0 else -C * np.log(d)


def default_R0(p, f, grid):
    """``max(1, |f|_inf^(1/(1+alpha)))`` with the sup taken away from the boundary."""
    d_cut = D_CUT_CELLS * grid.h
    if f.is_bounded:
        fs = f.sup_norm(grid.dom)
    else:
        fs = f.sup_norm(grid.dom, delta=min(d_cut, 0.5 * grid.dom.max_distance))
    return max(1.0, fs ** (1.0 / (1.0 + p.alpha)))


class _Ladder:
    """Book-keeping for the rungs visited by :func:`solve_explosive`."""

    def __init__(self, p, f, grid, tol, R0):
        self.p, self.f, self.grid, self.tol, self.R0 = p, f, grid, tol, R0
        self.base = forcing_values(f, grid)
        self.rungs = {}
        self.reports = {}

    def solve(self, R, init, init_R=None, depth=0, shift=None, record=True):
        """Solve the rung ``R`` from ``init`` (the field at ``init_R``).

        If Newton fails, the rung is reached through the midpoint in ``R``.
        ``shift`` is added to the forcing; ``record=False`` keeps the solve
        out of the ladder report and raises instead of falling back to
        Gauss-Seidel.
        """
        # the cap only tames unbounded forcing; rungs below R0 use R0
        fvals = np.minimum(self.base, max(R, self.R0))
        if shift is not None:
            fvals = fvals + shift
        try:
            fld, rep = solve_dirichlet(self.p, R, self.f, self.grid, init=init,
                                       tol=self.tol, fvals=fvals, fallback=False)
        except NotConverged:
            if init_R is None or depth >= 12 or init_R == R:
                if not record:
                    raise
                fld, rep = solve_dirichlet(self.p, R, self.f, self.grid, init=init,
                                           tol=self.tol, fvals=fvals)
            else:
                mid = 0.5 * (R + init_R)
                v = self.solve(mid, init, init_R, depth + 1, shift, record)
                return self.solve(R, v, mid, depth + 1, shift, record)
        self.last_report = rep
        if record:
            self.rungs[float(R)] = fld.values
            self.reports[float(R)] = rep
        return fld.values

    def report(self, closure, R_final, settled, d_cut, mono_tol):
        Rs = sorted(self.rungs)
        rep = RLadderReport(R_values=Rs, closure=closure, R_final=R_final, settled=settled)
        far = self.grid.d_values >= d_cut
        incs = []
        for r0, r1 in zip(Rs[:-1], Rs[1:]):
            diff = self.rungs[r1] - self.rungs[r0]
            rep.interior_deltas.append(float(np.max(np.abs(diff[far]))))
            incs.append(float(np.min(diff)))
        if incs:
            rep.min_increment = min(incs)
            rep.monotone_ok = rep.min_increment >= -mono_tol
        return rep


def solve_explosive(p, f, grid, ladder=None, tol=DEFAULT_TOL, closure="matched",
                    tol_ladder=DEFAULT_TOL_LADDER, d_cut=None, match_tol=1e-7,
                    mono_tol=DEFAULT_MONO_TOL, init=None, order=2):
    """Approximate the minimal explosive solution by an increasing ladder of boundary values.

    Parameters
    ----------
    p : EquationParams
        Needs ``lam > 0``.
    f : Forcing
        Rung ``k`` uses ``min(f, R_k)``.
    grid : Grid
    ladder : RSchedule, optional
    closure : {"matched", "settle"}
        ``"matched"`` stops at the boundary value whose jump to the node at
        ``d_cut`` equals the envelope jump between ``h`` and ``d_cut``.
        ``"settle"`` stops when nodes with ``d >= d_cut`` move by at most
        ``tol_ladder`` between rungs and raises :class:`LadderNotSettled` otherwise.
    d_cut : float, optional
        Defaults to ``10 h``.
    match_tol : float
        Relative tolerance on the matching condition.
    order : {2, 1}
        ``2`` (default) refines the matched field by defect correction and
        re-matches; the ladder report still describes the first-order rungs.
        Ignored by ``closure="settle"``.

    Returns
    -------
    GridField, RLadderReport, SolveReport
    """
    p = validate_params(p)
    if p.lam <= 0:
        raise ValueError("the explosive ladder needs lam > 0")
    f.check_growth(p)
    ladder = ladder or RSchedule()
    h = grid.h
    d_cut = D_CUT_CELLS * h if d_cut is None else float(d_cut)
    R0 = default_R0(p, f, grid) if ladder.R0 is None else float(ladder.R0)
    lad = _Ladder(p, f, grid, tol, R0)
    u = None if init is None else np.asarray(getattr(init, "values", init), dtype=float)

    if closure == "settle":
        R = R0
        prev = lad.solve(R, u)
        far = grid.d_values >= d_cut
        for _ in range(ladder.max_rungs - 1):
            R *= ladder.factor
            cur = lad.solve(R, prev, R / ladder.factor)
            if np.max(np.abs(cur - prev)[far]) <= tol_ladder:
                rep = lad.report(closure, R, True, d_cut, mono_tol)
                return GridField.from_values(grid, cur), rep, lad.reports[float(R)]
            prev = cur
        rep = lad.report(closure, R, False, d_cut, mono_tol)
        raise LadderNotSettled(f"interior still moving at R={R:g}", rep)
    if closure != "matched":
        raise ValueError(f"unknown closure {closure!r}")

    ref = np.abs(grid.d_values - d_cut) < 0.5 * h
    ref &= grid.d_values > 0
    if not np.any(ref):
        raise ValueError("d_cut does not fall on the grid")
    target = float(envelope(p, h) - envelope(p, grid.d_values[ref][0]))

    def gap(R, vals):
        return R - float(np.mean(vals[ref])) - target

    R = R0
    vals = lad.solve(R, u)
    g0 = gap(R, vals)
    step = R0 * (ladder.factor - 1.0)
    if g0 < 0:
        a, va, ga = R, vals, g0
        for _ in range(ladder.max_rungs - 1):
            R = R0 * ladder.factor ** (len(lad.rungs))
            vals = lad.solve(R, va, a)
            gR = gap(R, vals)
            if gR >= 0:
                b, vb, gb = R, vals, gR
                break
            a, va, ga = R, vals, gR
        else:
            rep = lad.report(closure, R, False, d_cut, mono_tol)
            raise LadderNotSettled(f"matching not reached by R={R:g}", rep)
    else:
        b, vb, gb = R, vals, g0
        while True:
            R = b - step
            step *= ladder.factor
            # the far field moves with R here, so shift the warm start along
            vals = lad.solve(R, vb, b)
            gR = gap(R, vals)
            if gR < 0:
                a, va, ga = R, vals, gR
                break
            b, vb, gb = R, vals, gR
            if len(lad.rungs) > 4 * ladder.max_rungs:
                rep = lad.report(closure, R, False, d_cut, mono_tol)
                raise LadderNotSettled("matching not bracketed from above", rep)

    thresh = match_tol * (1.0 + abs(target))
    Rm, vm = _illinois(lambda R, init, init_R: _evaluate(lad.solve, gap, R, init, init_R),
                       (a, va, ga), (b, vb, gb), thresh)
    rep = lad.report(closure, Rm, True, d_cut, mono_tol)
    srep = lad.reports[float(Rm)]
    if order == 1:
        return GridField.from_values(grid, vm), rep, srep
    if order != 2:
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    return _explosive_order2(p, grid, lad, gap, Rm, vm, thresh, rep, tol)


def _evaluate(solver, gap, R, init, init_R):
    vals = solver(R, init, init_R)
    return gap(R, vals), vals


def _illinois(fun, lo, hi, thresh, max_iter=100):
    """Illinois regula falsi on a sign-changing bracket.

    ``lo`` and ``hi`` are ``(R, values, gap)`` with ``gap(lo) < 0 <= gap(hi)``;
    ``fun(R, init, init_R)`` returns ``(gap, values)``. Returns the best
    ``(R, values)``.
    """
    a, va, ga = lo
    b, vb, gb = hi
    side = 0
    for _ in range(max_iter):
        if min(abs(ga), abs(gb)) <= thresh:
            break
        Rm = (a * gb - b * ga) / (gb - ga)
        gm, vm = fun(Rm, va, a)
        if abs(gm) <= thresh:
            return Rm, vm
        if gm < 0:
            a, va, ga = Rm, vm, gm
            if side == -1:
                gb *= 0.5
            side = -1
        else:
            b, vb, gb = Rm, vm, gm
            if side == 1:
                ga *= 0.5
            side = 1
    return (b, vb) if abs(gb) <= abs(ga) else (a, va)


def _explosive_order2(p, grid, lad, gap, R1, v1, thresh, rep, tol):
    """Defect correction wrapped around the matched closure.

    Each step adds the current flux defect to the rung forcing and redoes
    the matching in ``R``. Holding ``R`` fixed instead lets the far field
    drift by ``defect / lam``, which feeds back into the boundary layer and
    diverges for small ``lam``. A step whose solves fail is retried with
    the change in the correction halved.
    """
    R, u = R1, v1
    applied = np.zeros(u[grid.interior].size)
    sweeps = 0
    for it in range(DEFECT_MAX):
        target = hamiltonian_defect(p, grid, u)
        omega = 1.0
        while True:
            shift = applied + omega * (target - applied)
            # the tight threshold keeps the matching error below the residual tolerance
            fine = min(thresh, DEFECT_TOL * (1.0 + abs(R)))
            try:
                Rn, vn = _match_shifted(lad, gap, shift, R, u, fine)
                break
            except NotConverged as exc:
                omega *= 0.5
                if omega < 1e-3:
                    raise NotConverged("defect correction step failed", exc.report) from None
        applied = shift
        sweeps += lad.last_report.sweeps
        change = float(np.max(np.abs(vn - u) / (1.0 + np.abs(u))))
        R, u = Rn, vn
        if omega == 1.0 and change <= DEFECT_TOL:
            srep = lad.last_report
            srep.sweeps = sweeps
            srep.method = f"{srep.method}+defect"
            srep.wall_notes = f"{it + 1} defect steps"
            rep.R_final = R
            return GridField.from_values(grid, u), rep, srep
    srep = lad.last_report
    srep.converged = False
    raise NotConverged(f"defect correction still moving by {change:.2e}", srep)


def _match_shifted(lad, gap, shift, R, u, thresh):
    """Matched boundary value for the rung forcing plus ``shift``, bracketed from ``R``."""

    def fun(Rt, init, init_R):
        vals = lad.solve(Rt, init, init_R, shift=shift, record=False)
        return gap(Rt, vals), vals

    g0, w0 = fun(R, u, None)
    if abs(g0) <= thresh:
        return R, w0
    direction = -1.0 if g0 > 0 else 1.0
    step = 1e-4
    prev = (R, w0, g0)
    for _ in range(60):
        Rt = prev[0] + direction * step * (1.0 + abs(R))
        gt, wt = fun(Rt, prev[1], prev[0])
        if (gt < 0) != (prev[2] < 0):
            break
        prev = (Rt, wt, gt)
        step *= 2.0
    else:
        raise LadderNotSettled("corrected matching not bracketed")
    lo, hi = sorted([prev, (Rt, wt, gt)], key=lambda t: t[2])
    return _illinois(fun, lo, hi, thresh)
