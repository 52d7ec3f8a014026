"""Uniform 1-D and radial grids and the monotone discrete operator.

The discrete operator at an interior node ``i`` is

    -|pbar_i|^alpha F(m_i, t_i) + H_i + lam odd_pow(u_i) - f_i

with ``m_i`` the centred second difference, ``t_i = Dc u_i / r_i`` on balls
(``t = m`` at the centre), ``pbar_i = max(|Dc u_i|, eps)`` with ``eps = h`` for
``alpha != 0`` (the weight is 1 when ``alpha = 0``) and the Godunov
flux ``H_i = max(max(Db u_i, 0), max(-Df u_i, 0))^beta``.

:func:`assemble` also returns the tridiagonal Jacobian used by the Newton
solver in :mod:`ergodic_pde.solve`.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import GridTooCoarse, SingularForcingAtNode
from .model import Domain1D, F_slopes, eval_F, odd_pow

MIN_NODES = 16


@dataclass(frozen=True)
class Grid:
    """Uniform grid on an interval or on the radial segment ``[0, radius]`` of a ball."""

    dom: Domain1D
    n: int
    h: float = field(init=False)
    nodes: np.ndarray = field(init=False, repr=False, compare=False)
    d_values: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.n) < MIN_NODES:
            raise GridTooCoarse(f"need n >= {MIN_NODES}, got {self.n}")
        n = int(self.n)
        object.__setattr__(self, "n", n)
        x = np.linspace(self.dom.start, self.dom.stop, n)
        d = np.asarray(self.dom.distance(x), dtype=float)
        d[-1] = 0.0
        if self.dom.kind == "interval":
            d[0] = 0.0
        x.flags.writeable = False
        d.flags.writeable = False
        object.__setattr__(self, "h", self.dom.extent / (n - 1))
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "d_values", d)

    @property
    def is_ball(self):
        return self.dom.kind == "ball"

    @property
    def interior(self):
        """Slice of the unknown (assembled) nodes."""
        return slice(0, self.n - 1) if self.is_ball else slice(1, self.n - 1)

    @property
    def boundary_index(self):
        return (self.n - 1,) if self.is_ball else (0, self.n - 1)


def refine(grid):
    """Halve the spacing: ``2n - 1`` nodes, every old node kept."""
    return Grid(grid.dom, 2 * grid.n - 1)


def coarsen(grid):
    """Inverse of :func:`refine`; needs an odd node count."""
    if grid.n % 2 == 0:
        raise GridTooCoarse(f"cannot coarsen an even node count {grid.n}")
    return Grid(grid.dom, (grid.n + 1) // 2)


@dataclass(frozen=True)
class Boundary:
    """Constant Dirichlet data: ``dirichlet(g_lo, g_hi)`` or ``dirichlet_radial(g_outer)``."""

    kind: str
    values: tuple

    @classmethod
    def dirichlet(cls, g_lo, g_hi=None):
        return cls("dirichlet", (float(g_lo), float(g_lo if g_hi is None else g_hi)))

    @classmethod
    def radial(cls, g_outer):
        return cls("dirichlet_radial", (float(g_outer),))

    @classmethod
    def constant(cls, grid, g):
        return cls.radial(g) if grid.is_ball else cls.dirichlet(g, g)


@dataclass(frozen=True)
class GridField:
    """Nodal values on a grid together with the boundary record they honour."""

    grid: Grid
    values: np.ndarray
    boundary: Boundary

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n,):
            raise ValueError(f"expected {self.grid.n} values, got shape {v.shape}")
        expected = ("dirichlet_radial" if self.grid.is_ball else "dirichlet")
        if self.boundary.kind != expected:
            raise ValueError(f"{self.boundary.kind} data on a {self.grid.dom.kind} grid")
        idx = self.grid.boundary_index
        if not np.array_equal(v[list(idx)], np.array(self.boundary.values)):
            raise ValueError("boundary nodes disagree with the boundary record")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    @classmethod
    def from_values(cls, grid, values):
        """Wrap ``values``, reading the boundary record off the boundary nodes."""
        v = np.asarray(values, dtype=float)
        if grid.is_ball:
            b = Boundary.radial(v[-1])
        else:
            b = Boundary.dirichlet(v[0], v[-1])
        return cls(grid, v, b)

    @classmethod
    def constant(cls, grid, g, boundary=None):
        v = np.full(grid.n, float(g))
        boundary = boundary or Boundary.constant(grid, g)
        if grid.is_ball:
            v[-1] = boundary.values[0]
        else:
            v[0], v[-1] = boundary.values
        return cls(grid, v, boundary)

    def gradient(self):
        """Centred first differences (one-sided at the ends)."""
        return np.gradient(self.values, self.grid.h)


def forcing_values(f, grid):
    """``f`` at the assembled nodes (boundary nodes are never evaluated)."""
    x = grid.nodes[grid.interior]
    d = grid.d_values[grid.interior]
    if f.kappa > 0 and f.q > 0 and np.any(d <= 0):
        raise SingularForcingAtNode("singular forcing evaluated at d = 0")
    return np.asarray(f(x, grid.dom), dtype=float) * np.ones_like(x)


def _regularization(alpha, h):
    """Floor ``eps`` in the gradient weight ``max(|Dc|, eps)^alpha``.

    For ``alpha < 0`` it keeps the weight finite. For ``alpha > 0`` it keeps
    a node at a symmetric kink (``Dc = 0`` between steep one-sided slopes)
    from reducing to ``lam u|u| = 0``, whose double root leaves the nodal
    value undetermined at the rounding level.
    """
    return h if alpha != 0 else 0.0


def godunov(ul, uc, ur, h, beta):
    """Upwind value of ``|u'|^beta``: ``max(Db^+, (-Df)^+)^beta``.

    Returns ``(H, q, qb, qf)`` with ``q = max(qb, qf)`` the upwind slope.
    """
    qb = np.maximum((uc - ul) / h, 0.0)
    qf = np.maximum(-(ur - uc) / h, 0.0)
    q = np.maximum(qb, qf)
    return q ** beta, q, qb, qf


def stencil(p, h, mult, ul, uc, ur, rn, fvals, jacobian=True):
    """Node-wise residual from left/centre/right values (see :func:`assemble`).

    ``rn`` holds radial coordinates when ``mult > 0``; a zero entry marks the
    centre, where ``t = m``.
    """
    alpha, beta, lam = p.alpha, p.beta, p.lam
    m = (ur - 2.0 * uc + ul) / h ** 2
    Dc = (ur - ul) / (2.0 * h)
    if mult:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(rn > 0, Dc / rn, m)
    else:
        t = np.zeros_like(m)
    F = eval_F(p.operator, p.a, p.A, m, t, mult) * np.ones_like(m)

    eps = _regularization(alpha, h)
    pbar = np.maximum(np.abs(Dc), eps)
    if alpha == 0:
        w = np.ones_like(pbar)
    else:
        with np.errstate(divide="ignore"):
            w = np.where(pbar > 0, pbar ** alpha, 0.0)

    H, q, qb, qf = godunov(ul, uc, ur, h, beta)
    zero = lam * odd_pow(uc, alpha)
    r = -w * F + H + zero - fvals
    scale = np.abs(w * F) + H + np.abs(zero) + np.abs(fvals) + 1.0
    if not jacobian:
        return r, scale, None

    sm, st = F_slopes(p.operator, p.a, p.A, m, t)
    sm = sm * np.ones_like(m)
    st = st * np.ones_like(m)
    # dF/du_{i-1}, dF/du_i, dF/du_{i+1}
    dFl = sm / h ** 2
    dFc = -2.0 * sm / h ** 2
    dFr = sm / h ** 2
    if mult:
        with np.errstate(divide="ignore", invalid="ignore"):
            ct = np.where(rn > 0, mult * st / (2.0 * h * rn), 0.0)
        dFl = dFl - ct
        dFr = dFr + ct
        centre = rn == 0
        dFl = np.where(centre, dFl + mult * st / h ** 2, dFl)
        dFc = np.where(centre, dFc - 2.0 * mult * st / h ** 2, dFc)
        dFr = np.where(centre, dFr + mult * st / h ** 2, dFr)

    dH = np.where(q > 0, beta * q ** (beta - 1.0), 0.0) / h
    back = qb >= qf
    dHl = np.where(back, -dH, 0.0)
    dHr = np.where(back, 0.0, -dH)

    lower = -w * dFl + dHl
    # |u|^alpha blows up at u = 0 when alpha < 0; a floor keeps Newton finite
    au = np.maximum(np.abs(uc), 1e-12) if alpha < 0 else np.abs(uc)
    diag = -w * dFc + dH + lam * (alpha + 1.0) * au ** alpha
    upper = -w * dFr + dHr
    if alpha != 0:
        active = np.abs(Dc) > eps
        with np.errstate(divide="ignore", invalid="ignore"):
            dw = np.where(active, alpha * pbar ** (alpha - 1.0) * np.sign(Dc), 0.0)
        lower = lower + F * dw / (2.0 * h)
        upper = upper - F * dw / (2.0 * h)
    return r, scale, (lower, diag, upper)


def assemble(p, grid, u, fvals, jacobian=True):
    """Residual on the assembled nodes and, optionally, its tridiagonal Jacobian.

    Parameters
    ----------
    p : EquationParams
    grid : Grid
    u : ndarray
        Full nodal vector including boundary values.
    fvals : ndarray
        Forcing at the assembled nodes.
    jacobian : bool

    Returns
    -------
    r : ndarray
        Residual.
    scale : ndarray
        Magnitude of the individual terms plus one, used for relative tolerances.
    jac : tuple of ndarray or None
        ``(lower, diag, upper)`` where ``lower[i]`` is d r_i / d u_{i-1}.
    """
    u = np.asarray(u, dtype=float)
    if grid.is_ball:
        ul = np.concatenate(([u[1]], u[:-2]))
        uc, ur = u[:-1], u[1:]
        rn = grid.nodes[:-1]
    else:
        ul, uc, ur = u[:-2], u[1:-1], u[2:]
        rn = None
    r, scale, jac = stencil(p, grid.h, grid.dom.mult, ul, uc, ur, rn, fvals, jacobian)
    if jac is None:
        return r, scale, None
    lower, diag, upper = jac
    if grid.is_ball:
        # ghost u_{-1} = u_1 folds the lower coupling of the centre into the upper one
        upper = upper.copy()
        upper[0] += lower[0]
        lower = lower.copy()
        lower[0] = 0.0
    return r, scale, (lower, diag, upper)


def rounding_floor(p, grid, u):
    """Per-node bound on the floating-point error of the assembled residual.

    The differences cancel terms of size ``|u| / h`` and ``|u| / h^2``, so
    once ``u`` is large no double-precision field can push the residual
    below this. Each term contributes its sensitivity times the rounding
    error of its difference quotient.
    """
    u = np.asarray(u, dtype=float)
    h = grid.h
    if grid.is_ball:
        ul = np.concatenate(([u[1]], u[:-2]))
        uc, ur = u[:-1], u[1:]
    else:
        ul, uc, ur = u[:-2], u[1:-1], u[2:]
    mag = np.abs(ul) + np.abs(uc) + np.abs(ur)
    big = max(p.a, p.A)
    size = 2.0 * big * mag / h ** 2
    if grid.dom.mult:
        rn = np.maximum(grid.nodes[grid.interior], h)
        size = size + grid.dom.mult * big * mag / (2.0 * h * rn)
    Dc = np.abs(ur - ul) / (2.0 * h)
    pbar = np.maximum(Dc, _regularization(p.alpha, h))
    with np.errstate(divide="ignore"):
        w = np.where(pbar > 0, pbar ** p.alpha, 0.0) if p.alpha else 1.0
    q = np.maximum(np.maximum(uc - ul, 0.0), np.maximum(uc - ur, 0.0)) / h
    H = p.beta * np.maximum(q, 1.0) ** (p.beta - 1.0) * mag / h
    zero = p.lam * np.abs(uc) ** (p.alpha + 1.0)
    return 16.0 * np.finfo(float).eps * (w * size + H + zero)


def excess_residual(p, grid, u, fvals):
    """``max_i max(|r_i| - floor_i, 0) / scale_i`` together with the raw max-norm."""
    r, sc, _ = assemble(p, grid, u, fvals, jacobian=False)
    ex = np.maximum(np.abs(r) - rounding_floor(p, grid, u), 0.0) / sc
    return float(np.max(ex)), float(np.max(np.abs(r)))


def hamiltonian_defect(p, grid, u):
    """``H1 - H2`` at the assembled nodes.

    ``H1`` is the Godunov flux of :func:`stencil`; ``H2`` uses the same upwind
    selection on second-order one-sided differences
    ``(3 u_i - 4 u_{i-1} + u_{i-2}) / 2h`` and its mirror. The defect is zero
    at nodes next to the boundary: there the one-sided stencil ignores the
    boundary value, and the correction iteration diverges once the boundary
    jump is large. Adding the defect to the forcing of a first-order solve and
    iterating converges to the second-order scheme.
    """
    u = np.asarray(u, dtype=float)
    h = grid.h
    if grid.is_ball:
        # mirror ghosts u_{-1} = u_1, u_{-2} = u_2
        ue = np.concatenate(([u[2], u[1]], u))
        idx = np.arange(grid.n - 1) + 2
        has_left2 = np.ones(idx.size, dtype=bool)
    else:
        ue = u
        idx = np.arange(1, grid.n - 1)
        has_left2 = idx >= 2
    has_right2 = idx + 2 <= ue.size - 1
    ul, uc, ur = ue[idx - 1], ue[idx], ue[idx + 1]
    H1 = godunov(ul, uc, ur, h, p.beta)[0]
    Db = (uc - ul) / h
    Df = (ur - uc) / h
    l2 = ue[np.maximum(idx - 2, 0)]
    r2 = ue[np.minimum(idx + 2, ue.size - 1)]
    Db = np.where(has_left2, (3.0 * uc - 4.0 * ul + l2) / (2.0 * h), Db)
    Df = np.where(has_right2, (-3.0 * uc + 4.0 * ur - r2) / (2.0 * h), Df)
    q = np.maximum(np.maximum(Db, 0.0), np.maximum(-Df, 0.0))
    return np.where(has_left2 & has_right2, H1 - q ** p.beta, 0.0)


def discrete_G(p, fld, f, order=1):
    """Residual of the discrete operator at the assembled nodes of ``fld``.

    Parameters
    ----------
    p : EquationParams
    fld : GridField
    f : Forcing
    order : {1, 2}
        ``2`` swaps the Godunov flux for its second-order one-sided version
        (see :func:`hamiltonian_defect`).

    Returns
    -------
    ndarray
        One entry per assembled node (interior nodes, plus the centre on balls).
    """
    fvals = forcing_values(f, fld.grid)
    r = assemble(p, fld.grid, fld.values, fvals, jacobian=False)[0]
    if order == 2:
        r = r - hamiltonian_defect(p, fld.grid, fld.values)
    elif order != 1:
        raise ValueError(f"order must be 1 or 2, got {order!r}")
    return r
