"""Closed-form sub- and super-solutions and a checker for their inequalities.

Four barrier families are provided, all functions of the distance ``d`` to
the boundary (the last one of the first coordinate):

``interior_lower``
    ``sigma (d+s)^-gamma - sigma (delta0+s)^-gamma`` (log form when gamma=0),
    a sub-solution near the boundary that pins the minimum of the
    normalized discounted solution away from it.
``explosive_super``
    blow-up envelope plus correction on ``{d < delta}``, an exponential
    bridge on ``{delta <= d <= 2 delta}`` and the constant ``E`` beyond.
``explosive_sub``
    shifted envelope minus correction, floored by a constant.
``mu_star_test``
    ``C_test x1^((alpha+2)/(alpha+1))`` on an interval of width ``R``, whose
    residual bounds the ergodic constant from above.

With ``gamma = 0`` the envelope ``C d^-gamma`` becomes ``C |log d|`` and the
correction ``nu d^(gamma1-gamma)`` becomes ``nu d^gamma1 |log d|``.

:func:`check_inequality` evaluates the operator on analytic derivatives and
reports the worst margin against ``f + mu``.
"""

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DomainError, OutsideDomain, RegionEmpty, UnsetPrefactor
from .model import (boundary_constant, compute_exponents, eval_F, odd_pow,
                    validate_params)

KINDS = ("interior_lower", "explosive_super", "explosive_sub", "mu_star_test")
TOL_CHECK = 1e-8


@dataclass(frozen=True)
class BarrierSpec:
    """Parameters of one barrier.

    Attributes
    ----------
    kind : str
        One of :data:`KINDS`.
    s : float
        Shift of the distance (``interior_lower``, ``explosive_sub``).
    delta : float
        Collar width of the explosive barriers.
    delta0 : float
        Support width of ``interior_lower``.
    nu, gamma1 : float
        Amplitude and exponent of the correction term.
    D : float
        Additive constant of the explosive barriers.
    prefactor : float, optional
        ``sigma`` or ``C``; computed from the equation when omitted.
    C_delta : float, optional
        Prefactor of the constant floor of ``explosive_sub`` (defaults to ``C``).
    """

    kind: str
    s: float = 0.0
    delta: float = None
    delta0: float = None
    nu: float = 0.0
    gamma1: float = 0.0
    D: float = None
    prefactor: float = None
    C_delta: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown barrier kind {self.kind!r}")
        if self.s < 0 or self.nu < 0:
            raise ValueError("s and nu must be >= 0")
        if self.gamma1 < 0 or self.gamma1 >= 1:
            raise ValueError("gamma1 must lie in [0, 1)")
        for name in ("delta", "delta0"):
            v = getattr(self, name)
            if v is not None and v <= 0:
                raise ValueError(f"{name} must be > 0")


@dataclass
class InequalityReport:
    """Worst margin of ``G(phi) - (f + mu)`` over the checked points."""

    kind: str
    side: str
    passed: bool
    worst_margin: float
    worst_x: float
    tolerance: float
    n_points: int
    region: tuple
    nonsmooth_points: list = field(default_factory=list)


# -- scalar building blocks in d -------------------------------------------

def _sigma(p, e):
    if e.gamma > 0:
        return ((e.gamma + 1.0) * p.a / 2.0) ** e.grad_rate / e.gamma
    return p.a / 2.0


def _env(d, C, g):
    """``C d^-g`` (``-C log d`` when ``g = 0``) and its first two d-derivatives."""
    d = np.asarray(d, dtype=float)
    if g > 0:
        return C * d ** -g, -g * C * d ** (-g - 1), g * (g + 1) * C * d ** (-g - 2)
    return -C * np.log(d), -C / d, C / d ** 2


def _corr(d, nu, g, g1):
    """``nu d^(g1-g)`` (``nu d^g1 |log d|`` when ``g = 0``) and its d-derivatives."""
    d = np.asarray(d, dtype=float)
    if g > 0:
        k = g1 - g
        return nu * d ** k, nu * k * d ** (k - 1), nu * k * (k - 1) * d ** (k - 2)
    L = -np.log(d)
    if g1 == 0:
        return nu * L, -nu / d, nu / d ** 2
    v = nu * d ** g1 * L
    v1 = nu * (g1 * d ** (g1 - 1) * L - d ** (g1 - 1))
    v2 = nu * (g1 * (g1 - 1) * d ** (g1 - 2) * L - (2 * g1 - 1) * d ** (g1 - 2))
    return v, v1, v2


def _bump(d, delta):
    """``exp(1/(d - 2 delta) + 1/delta)`` and its d-derivatives, zero at ``2 delta``."""
    d = np.asarray(d, dtype=float)
    out = np.zeros((3,) + d.shape)
    inside = d < 2 * delta
    z = d[inside] - 2 * delta
    b = np.exp(1.0 / z + 1.0 / delta)
    out[0][inside] = b
    out[1][inside] = -b / z ** 2
    out[2][inside] = b * (1.0 / z ** 4 + 2.0 / z ** 3)
    return out[0], out[1], out[2]


def _prefactor(spec, p, e):
    if spec.prefactor is not None:
        return float(spec.prefactor)
    if spec.kind == "interior_lower":
        return _sigma(p, e)
    return boundary_constant(p, e=e)


def zone_values(spec, p, d):
    """Branch values of ``explosive_super`` at distances ``d``: (zone1, zone2, zone3)."""
    p = validate_params(p)
    e = compute_exponents(p.alpha, p.beta)
    C = _prefactor(spec, p, e)
    _require(spec, "delta", "D")
    delta, D = spec.delta, spec.D
    E = super_E(spec, p)
    z1 = _env(d, C, e.gamma)[0] + _corr(d, spec.nu, e.gamma, spec.gamma1)[0] + D
    z2 = float(_env(delta, C, e.gamma)[0]) * _bump(d, delta)[0] + E
    return z1, z2, np.full(np.shape(d), E)


def super_E(spec, p):
    """``E = nu delta^(gamma1-gamma) + D`` (log-corrected when gamma = 0)."""
    e = compute_exponents(p.alpha, p.beta)
    _require(spec, "delta", "D")
    return float(_corr(spec.delta, spec.nu, e.gamma, spec.gamma1)[0]) + spec.D


def _require(spec, *names):
    for name in names:
        if getattr(spec, name) is None:
            raise UnsetPrefactor(f"{spec.kind} barrier needs {name}")


def _profile(spec, p, e, d, branch=None):
    """Barrier value and d-derivatives at distances ``d`` (arrays)."""
    d = np.asarray(d, dtype=float)
    C = _prefactor(spec, p, e)
    g = e.gamma
    if spec.kind == "interior_lower":
        _require(spec, "delta0")
        v, v1, v2 = _env(d + spec.s, C, g)
        return v - _env(spec.delta0 + spec.s, C, g)[0], v1, v2
    if spec.kind == "explosive_super":
        _require(spec, "delta", "D")
        delta = spec.delta
        E = super_E(spec, p)
        a0, a1, a2 = _env(np.minimum(d, delta), C, g)
        c0, c1, c2 = _corr(np.minimum(d, delta), spec.nu, g, spec.gamma1)
        b0, b1, b2 = _bump(d, delta)
        top = float(_env(delta, C, g)[0])
        z1 = d < delta
        z3 = d > 2 * delta
        v = np.where(z1, a0 + c0 + spec.D, np.where(z3, E, top * b0 + E))
        v1 = np.where(z1, a1 + c1, np.where(z3, 0.0, top * b1))
        v2 = np.where(z1, a2 + c2, np.where(z3, 0.0, top * b2))
        return v, v1, v2
    if spec.kind == "explosive_sub":
        _require(spec, "delta", "D")
        Cd = C if spec.C_delta is None else float(spec.C_delta)
        a0, a1, a2 = _env(d + spec.s, C, g)
        c0, c1, c2 = _corr(d + spec.s, spec.nu, g, spec.gamma1)
        floor = (float(_env(spec.delta + spec.s, Cd, g)[0])
                 - float(_corr(spec.delta + spec.s, spec.nu, g, spec.gamma1)[0]) - spec.D)
        curve = a0 - c0 - spec.D
        if branch == "curve":
            use = np.ones(d.shape, bool)
        elif branch == "floor":
            use = np.zeros(d.shape, bool)
        else:
            use = (d <= spec.delta) & (curve > floor)
        v = np.where(use, curve, floor)
        return v, np.where(use, a1 - c1, 0.0), np.where(use, a2 - c2, 0.0)
    raise ValueError(spec.kind)


def _test_constant(p, R):
    k = p.beta - p.alpha - 1.0
    return ((p.a / (2.0 * (p.alpha + 1.0))) ** (1.0 / k)
            * (p.alpha + 1.0) / (p.alpha + 2.0)
            * R ** (-p.beta / ((p.alpha + 1.0) * k)))


def _mu_test(spec, p, dom, x):
    if dom.kind != "interval":
        raise DomainError("mu_star_test lives on an interval")
    R = dom.hi - dom.lo
    C = _test_constant(p, R) if spec.prefactor is None else float(spec.prefactor)
    y = np.asarray(x, dtype=float) - dom.lo
    q = (p.alpha + 2.0) / (p.alpha + 1.0)
    return C * y ** q, C * q * y ** (q - 1), C * q * (q - 1) * y ** (q - 2)


def barrier_derivatives(spec, p, dom, x, branch=None):
    """Barrier value and first two derivatives along the coordinate at ``x``.

    Returns ``(phi, phi_x, phi_xx)``.
    """
    p = validate_params(p)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if not np.all(dom.contains(x)):
        raise OutsideDomain("point outside the closed domain")
    if spec.kind == "mu_star_test":
        return _mu_test(spec, p, dom, x)
    e = compute_exponents(p.alpha, p.beta)
    d = np.asarray(dom.distance(x), dtype=float)
    slope = np.asarray(dom.distance_slope(x), dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        v, v1, v2 = _profile(spec, p, e, d, branch)
    return v, v1 * slope, v2


def eval_barrier(spec, p, dom, x):
    """Value of the barrier at ``x`` (scalar or array)."""
    v = barrier_derivatives(spec, p, dom, x)[0]
    return float(v[0]) if np.ndim(x) == 0 else v


def _operator(p, dom, x, v, v1, v2):
    """``G(phi)`` pieces: returns (G without forcing, magnitude for rounding)."""
    mult = dom.mult
    if mult:
        r = np.abs(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(r > 0, v1 / r, v2)
    else:
        t = 0.0
    F = eval_F(p.operator, p.a, p.A, v2, t, mult) * np.ones_like(v)
    g = np.abs(v1)
    with np.errstate(divide="ignore"):
        w = np.where(g > 0, g ** p.alpha, 0.0 if p.alpha < 0 else float(p.alpha == 0))
    H = g ** p.beta
    z = p.lam * np.asarray(odd_pow(v, p.alpha))
    return -w * F + H + z, np.abs(w * F) + H + np.abs(z)


def default_region(spec, p, dom):
    if spec.kind == "interior_lower":
        return (0.0, spec.delta0)
    if spec.kind == "mu_star_test":
        return (0.0, dom.max_distance)
    return (0.0, dom.max_distance)


def check_inequality(spec, p, dom, f, mu=0.0, side="sub", region=None, n=2001):
    """Check ``G(phi) <= f + mu`` (``side="sub"``) or ``>=`` (``side="super"``).

    Parameters
    ----------
    region : tuple, optional
        ``(d_min, d_max)`` band of distances to check; points with ``d = 0``
        are skipped when the barrier blows up there.
    n : int
        Number of sample points over the whole domain.

    Returns
    -------
    InequalityReport
    """
    p = validate_params(p)
    if side not in ("sub", "super"):
        raise ValueError("side must be 'sub' or 'super'")
    region = default_region(spec, p, dom) if region is None else tuple(region)
    x = np.linspace(dom.start, dom.stop, n)
    d = np.asarray(dom.distance(x))
    keep = (d >= region[0]) & (d <= region[1])
    singular = spec.kind != "mu_star_test" and not (
        spec.kind in ("interior_lower", "explosive_sub") and spec.s > 0)
    if singular:
        keep &= d > 0
    nonsmooth = []
    extra_x, extra_branch = [], []
    if spec.kind == "explosive_super" and spec.delta is not None:
        nonsmooth = [spec.delta]
    if spec.kind == "explosive_sub" and spec.delta is not None:
        sw = _sub_switch(spec, p)
        if sw is not None:
            nonsmooth = [sw]
            for br in ("curve", "floor"):
                extra_x.append(sw)
                extra_branch.append(br)
    x = x[keep]
    if x.size == 0:
        raise RegionEmpty(f"no sample point with d in {region}")

    v, v1, v2 = barrier_derivatives(spec, p, dom, x)
    G, mag = _operator(p, dom, x, v, v1, v2)
    rhs = np.asarray(f(x, dom), dtype=float) * np.ones_like(x) + mu
    for dd, br in zip(extra_x, extra_branch):
        if not region[0] <= dd <= region[1]:
            continue
        xs = np.array([_point_at_distance(dom, dd)])
        vs = barrier_derivatives(spec, p, dom, xs, branch=br)
        Gs, ms = _operator(p, dom, xs, *vs)
        x = np.append(x, xs)
        G = np.append(G, Gs)
        mag = np.append(mag, ms)
        rhs = np.append(rhs, np.asarray(f(xs, dom), dtype=float) + mu)
    margin = G - rhs
    slack = 64 * np.finfo(float).eps * (mag + np.abs(rhs))
    if side == "sub":
        excess = margin - slack
        i = int(np.argmax(excess))
        passed = bool(excess[i] <= TOL_CHECK)
        worst = float(np.max(margin))
    else:
        excess = margin + slack
        i = int(np.argmin(excess))
        passed = bool(excess[i] >= -TOL_CHECK)
        worst = float(np.min(margin))
    return InequalityReport(kind=spec.kind, side=side, passed=passed, worst_margin=worst,
                            worst_x=float(x[i]), tolerance=TOL_CHECK, n_points=int(x.size),
                            region=region, nonsmooth_points=nonsmooth)


def _point_at_distance(dom, dd):
    return dom.lo + dd if dom.kind == "interval" else dom.radius - dd


def _sub_switch(spec, p):
    """Distance where the curve of ``explosive_sub`` meets its floor, if inside ``(0, delta)``."""
    e = compute_exponents(p.alpha, p.beta)
    C = _prefactor(spec, p, e)
    Cd = C if spec.C_delta is None else float(spec.C_delta)
    g = e.gamma

    def gap(dd):
        curve = _env(dd + spec.s, C, g)[0] - _corr(dd + spec.s, spec.nu, g, spec.gamma1)[0]
        floor = _env(spec.delta + spec.s, Cd, g)[0] - _corr(spec.delta + spec.s, spec.nu, g,
                                                            spec.gamma1)[0]
        return float(curve - floor)

    lo, hi = 1e-12, spec.delta
    if gap(lo) <= 0 or gap(hi) >= 0:
        return None
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


# -- defaults for the explosive pair ----------------------------------------

def collar_condition(p, delta, gamma1):
    """Slope ordering at ``d = delta``: ``A gamma delta + (gamma-gamma1) delta^(gamma1+1) < a``."""
    e = compute_exponents(p.alpha, p.beta)
    return p.A * e.gamma * delta + (e.gamma - gamma1) * delta ** (gamma1 + 1) < p.a


def _bridge_dominated(p, delta, nu, gamma1):
    """The bridge falls faster than the envelope at ``d = delta`` (bridge stays below)."""
    e = compute_exponents(p.alpha, p.beta)
    C = boundary_constant(p, e=e)
    top = float(_env(delta, C, e.gamma)[0])
    slope_bridge = -top / delta ** 2
    slope_env = float(_env(delta, C, e.gamma)[1] + _corr(delta, nu, e.gamma, gamma1)[1])
    return slope_bridge < slope_env


def measure_K4(p, dom, delta, n=4001):
    """``max |phi2'|^alpha |F(phi2'')| + |phi2'|^beta`` over ``delta <= d <= 2 delta``."""
    p = validate_params(p)
    e = compute_exponents(p.alpha, p.beta)
    C = boundary_constant(p, e=e)
    dd = np.linspace(delta, 2 * delta, n)
    top = float(_env(delta, C, e.gamma)[0])
    _, b1, b2 = _bump(dd, delta)
    v1, v2 = top * b1, top * b2
    x = np.array([_point_at_distance(dom, t) for t in dd])
    slope = np.asarray(dom.distance_slope(x), dtype=float)
    v1 = v1 * slope
    if dom.mult:
        with np.errstate(divide="ignore", invalid="ignore"):
            t = np.where(np.abs(x) > 0, v1 / np.abs(x), v2)
    else:
        t = 0.0
    F = eval_F(p.operator, p.a, p.A, v2, t, dom.mult) * np.ones_like(v2)
    g = np.abs(v1)
    with np.errstate(divide="ignore"):
        w = np.where(g > 0, g ** p.alpha, 0.0 if p.alpha < 0 else float(p.alpha == 0))
    return float(np.max(w * np.abs(F) + g ** p.beta))


def default_delta(p, f, dom, nu=0.5, gamma1=0.0, n=2001):
    """Largest collar width satisfying the collar conditions, by bisection.

    The conditions are :func:`collar_condition`, the bridge lying below the
    envelope past ``delta``, and the envelope with its correction being a
    super-solution (without the discount term) on ``{d < 2 delta}``.
    """
    p = validate_params(p)
    cap = 0.5 * dom.max_distance
    if compute_exponents(p.alpha, p.beta).gamma == 0:
        cap = min(cap, 0.5)

    def ok(delta):
        if not collar_condition(p, delta, gamma1):
            return False
        if not _bridge_dominated(p, delta, nu, gamma1):
            return False
        spec = BarrierSpec("explosive_super", delta=delta, nu=nu, gamma1=gamma1, D=0.0)
        q = p.with_lambda(0.0)
        rep = check_inequality(replace(spec, delta=4 * cap), q, dom, f, side="super",
                               region=(0.0, min(2 * delta, dom.max_distance)), n=n)
        return rep.passed

    lo, hi = 0.0, cap
    if ok(hi):
        return hi
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if ok(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-6 * cap:
            break
    if lo == 0.0:
        raise RegionEmpty("no admissible collar width found")
    return lo


def explosive_super_spec(p, f, dom, nu=0.5, gamma1=0.0, delta=None):
    """``explosive_super`` with default ``delta``, measured ``K4`` and ``D``."""
    p = validate_params(p)
    if p.lam <= 0:
        raise ValueError("the constant D needs lam > 0")
    delta = default_delta(p, f, dom, nu, gamma1) if delta is None else delta
    K4 = measure_K4(p, dom, delta)
    fs = f.sup_norm(dom.sub_domain(delta)) if delta < dom.max_distance else 0.0
    D = ((fs + K4) / p.lam) ** (1.0 / (p.alpha + 1.0))
    return BarrierSpec("explosive_super", delta=delta, nu=nu, gamma1=gamma1, D=D)


def explosive_sub_spec(p, f, dom, nu=0.5, gamma1=0.0, delta=None, s=0.0, D=None):
    """``explosive_sub`` with ``D >= C delta^-gamma + (|f^-|/lam)^(1/(alpha+1))``."""
    p = validate_params(p)
    if p.lam <= 0:
        raise ValueError("the constant D needs lam > 0")
    e = compute_exponents(p.alpha, p.beta)
    C = boundary_constant(p, e=e)
    delta = default_delta(p, f, dom, nu, gamma1) if delta is None else delta
    fneg = max(-f.infimum(dom), 0.0)
    floor_D = float(_env(delta, C, e.gamma)[0]) + (fneg / p.lam) ** (1.0 / (p.alpha + 1.0))
    D = floor_D if D is None else max(D, floor_D)
    return BarrierSpec("explosive_sub", s=s, delta=delta, nu=nu, gamma1=gamma1, D=D)


def interior_lower_spec(delta0, s):
    return BarrierSpec("interior_lower", s=s, delta0=delta0)


def mu_star_spec():
    return BarrierSpec("mu_star_test")
