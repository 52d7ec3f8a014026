"""Problem definition for the operator family

    -|u'|^alpha F(D^2 u) + |u'|^beta + lam |u|^alpha u = f

on intervals and radial balls: parameters, derived exponents, the
homogeneous operators F (trace and Pucci), forcing terms and the
explosive-solution uniqueness regimes.
"""

from dataclasses import dataclass, fields, replace
import math

import numpy as np

from .errors import (
    AlphaOutOfRange,
    BadEllipticity,
    BetaOutOfRange,
    DomainError,
    ForcingError,
    NegativeLambda,
    ParameterError,
    SingularGradient,
    TraceNeedsEqualConstants,
)

OPERATORS = ("trace", "pucci_plus", "pucci_minus")


@dataclass(frozen=True)
class EquationParams:
    """Full identity of an equation instance.

    ``lam`` is the discount coefficient in front of ``|u|^alpha u``.
    """

    alpha: float
    beta: float
    a: float = 1.0
    A: float = 1.0
    lam: float = 0.0
    operator: str = "trace"

    def with_lambda(self, lam):
        return replace(self, lam=float(lam))


@dataclass(frozen=True)
class ValidatedParams(EquationParams):
    """An :class:`EquationParams` that passed :func:`validate_params`."""

    def with_lambda(self, lam):
        return validate_params(EquationParams.with_lambda(self, lam))


def validate_params(p):
    """Check admissibility and return the parameters tagged as valid.

    Raises
    ------
    AlphaOutOfRange, BetaOutOfRange, BadEllipticity, NegativeLambda,
    TraceNeedsEqualConstants, ParameterError
    """
    if isinstance(p, ValidatedParams):
        return p
    if p.operator not in OPERATORS:
        raise ParameterError(f"unknown operator {p.operator!r}", field="operator")
    values = {f.name: getattr(p, f.name) for f in fields(p)}
    for name in ("alpha", "beta", "a", "A", "lam"):
        if not math.isfinite(values[name]):
            raise ParameterError(f"{name} must be finite", field=name)
    if p.alpha <= -1:
        raise AlphaOutOfRange(f"alpha={p.alpha} must exceed -1", field="alpha")
    if not (p.alpha + 1 < p.beta <= p.alpha + 2):
        raise BetaOutOfRange(
            f"beta={p.beta} must lie in (alpha+1, alpha+2] = "
            f"({p.alpha + 1}, {p.alpha + 2}]",
            field="beta",
        )
    if p.a <= 0 or p.A < p.a:
        raise BadEllipticity(f"need 0 < a <= A, got a={p.a}, A={p.A}", field="a")
    if p.operator == "trace" and p.a != p.A:
        raise TraceNeedsEqualConstants(
            f"trace operator needs a == A, got a={p.a}, A={p.A}", field="A"
        )
    if p.lam < 0:
        raise NegativeLambda(f"lam={p.lam} must be >= 0", field="lam")
    return ValidatedParams(**{k: (float(v) if k != "operator" else v)
                              for k, v in values.items()})


@dataclass(frozen=True)
class Exponents:
    gamma: float
    tau: float
    grad_rate: float


def compute_exponents(alpha, beta):
    """Blow-up rate gamma, Lipschitz rate tau and interior gradient rate.

    >>> compute_exponents(0.0, 1.5)
    Exponents(gamma=1.0, tau=3.0, grad_rate=2.0)
    """
    validate_params(EquationParams(alpha, beta))
    gap = beta - alpha - 1.0
    gamma = (2.0 + alpha - beta) / gap
    alpha_minus = max(-alpha, 0.0)
    return Exponents(gamma=max(gamma, 0.0), tau=(beta + alpha_minus) / gap,
                     grad_rate=1.0 / gap)


def odd_pow(u, alpha):
    """``|u|^alpha u`` written as ``sign(u) |u|^(alpha+1)`` (zero at zero)."""
    u = np.asarray(u, dtype=float)
    out = np.sign(u) * np.abs(u) ** (alpha + 1.0)
    return out if out.ndim else float(out)


def eval_F(op, a, A, m, t=0.0, mult=0):
    """Evaluate F on a matrix with eigenvalue ``m`` (once) and ``t`` (``mult`` times).

    For radial fields ``m`` is the second radial derivative and ``t`` the
    tangential curvature ``u'/r`` of multiplicity ``N-1``; on intervals
    ``mult`` is zero.
    """
    if mult < 0:
        raise ValueError("mult must be >= 0")
    m = np.asarray(m, dtype=float)
    t = np.asarray(t, dtype=float)
    if op == "trace":
        if a != A:
            raise TraceNeedsEqualConstants(f"trace operator needs a == A, got {a}, {A}")
        out = a * (m + mult * t)
    elif op == "pucci_plus":
        out = (A * np.maximum(m, 0) + a * np.minimum(m, 0)
               + mult * (A * np.maximum(t, 0) + a * np.minimum(t, 0)))
    elif op == "pucci_minus":
        out = (a * np.maximum(m, 0) + A * np.minimum(m, 0)
               + mult * (a * np.maximum(t, 0) + A * np.minimum(t, 0)))
    else:
        raise ParameterError(f"unknown operator {op!r}", field="operator")
    return out if out.ndim else float(out)


def F_slopes(op, a, A, m, t):
    """Partial derivatives of :func:`eval_F` in ``m`` and ``t`` (per eigenvalue).

    At a kink the slope of the positive side is returned.
    """
    m = np.asarray(m, dtype=float)
    t = np.asarray(t, dtype=float)
    if op == "trace":
        return np.full(m.shape, a), np.full(t.shape, a)
    hi, lo = (A, a) if op == "pucci_plus" else (a, A)
    return np.where(m >= 0, hi, lo), np.where(t >= 0, hi, lo)


def rank_one_value(p):
    """F(e (x) e) for a unit vector e: the only operator data the blow-up rate sees."""
    return p.A if p.operator == "pucci_plus" else p.a


def boundary_constant(p, dom=None, e=None):
    """Prefactor C of the boundary blow-up ``u ~ C d^-gamma`` (``C |log d|`` if gamma=0).

    On intervals and balls ``|grad d| = 1`` near the boundary, so ``C`` is a
    constant. ``dom`` is accepted for interface symmetry; only its kind is checked.
    """
    p = validate_params(p)
    if dom is not None and dom.kind not in ("interval", "ball"):
        raise DomainError(f"unsupported domain kind {dom.kind!r}")
    e = e or compute_exponents(p.alpha, p.beta)
    fee = rank_one_value(p)
    if e.gamma > 0:
        try:
            return ((e.gamma + 1.0) * fee) ** e.grad_rate / e.gamma
        except OverflowError:
            return math.inf
    return float(fee)


def eval_G(p, u, grad, F_val, f_val):
    """Pointwise residual ``-|grad|^a F + |grad|^b + lam odd_pow(u) - f``.

    Works on scalars and arrays. With ``alpha < 0`` a vanishing gradient is
    only allowed where ``F_val`` is zero as well.
    """
    u, grad, F_val, f_val = np.broadcast_arrays(*(np.asarray(v, dtype=float)
                                                  for v in (u, grad, F_val, f_val)))
    g = np.abs(grad)
    if p.alpha < 0:
        bad = (g == 0) & (F_val != 0)
        if np.any(bad):
            raise SingularGradient("vanishing gradient with alpha < 0; "
                                   "use the regularized grid pathway")
        with np.errstate(divide="ignore"):
            weight = np.where(g > 0, g ** p.alpha, 0.0)
    else:
        weight = g ** p.alpha
    out = -weight * F_val + g ** p.beta + p.lam * odd_pow(u, p.alpha) - f_val
    return out if out.ndim else float(out)


def uniqueness_status(p, f=None):
    """Uniqueness regime of the explosive solution.

    Returns ``"unique"`` for ``alpha >= 0``. For ``alpha < 0`` the answer is
    ``"unique"`` when ``beta > (1-alpha-alpha^2)/(1-alpha)`` and the forcing
    margin ``gamma0 > -alpha*gamma``, ``"unique_if_singular_regime"`` when the
    beta condition holds but no forcing was supplied, ``"unknown"`` otherwise.
    """
    p = validate_params(p)
    if p.alpha >= 0:
        return "unique"
    threshold = (1.0 - p.alpha - p.alpha ** 2) / (1.0 - p.alpha)
    if p.beta <= threshold:
        return "unknown"
    if f is None:
        return "unique_if_singular_regime"
    gamma = compute_exponents(p.alpha, p.beta).gamma
    return "unique" if f.gamma0 > -p.alpha * gamma else "unknown"


@dataclass(frozen=True)
class Domain1D:
    """An interval ``(lo, hi)`` or a ball of ``radius`` in dimension ``dim``.

    Ball points are described by their radial coordinate ``r``.
    """

    kind: str = "interval"
    lo: float = 0.0
    hi: float = 1.0
    radius: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if self.kind == "interval":
            if not self.lo < self.hi:
                raise DomainError(f"interval needs lo < hi, got ({self.lo}, {self.hi})")
        elif self.kind == "ball":
            if self.radius <= 0 or self.dim < 1:
                raise DomainError("ball needs radius > 0 and dim >= 1")
        else:
            raise DomainError(f"unknown domain kind {self.kind!r}")

    @classmethod
    def interval(cls, lo=0.0, hi=1.0):
        return cls("interval", lo=float(lo), hi=float(hi))

    @classmethod
    def ball(cls, radius=1.0, dim=2):
        return cls("ball", radius=float(radius), dim=int(dim))

    @property
    def start(self):
        return self.lo if self.kind == "interval" else 0.0

    @property
    def stop(self):
        return self.hi if self.kind == "interval" else self.radius

    @property
    def extent(self):
        """Length of the coordinate range (interval width or ball radius)."""
        return self.stop - self.start

    @property
    def max_distance(self):
        return self.extent / 2 if self.kind == "interval" else self.radius

    @property
    def mult(self):
        """Multiplicity of the tangential eigenvalue ``u'/r``."""
        return self.dim - 1 if self.kind == "ball" else 0

    def distance(self, x):
        x = np.asarray(x, dtype=float)
        if self.kind == "interval":
            out = np.minimum(x - self.lo, self.hi - x)
        else:
            out = self.radius - np.abs(x)
        return out if out.ndim else float(out)

    def distance_slope(self, x):
        """d'(x) along the coordinate: +1 / -1 on the two interval halves, -1 on balls."""
        x = np.asarray(x, dtype=float)
        if self.kind == "interval":
            out = np.where(x - self.lo <= self.hi - x, 1.0, -1.0)
        else:
            out = -np.ones_like(x)
        return out if out.ndim else float(out)

    def contains(self, x, closed=True):
        d = np.asarray(self.distance(x))
        return d >= 0 if closed else d > 0

    def sub_domain(self, delta):
        """The inner approximation ``{d > delta}``."""
        if not 0 <= delta < self.max_distance:
            raise DomainError(f"delta={delta} leaves an empty sub-domain")
        if self.kind == "interval":
            return Domain1D.interval(self.lo + delta, self.hi - delta)
        return Domain1D.ball(self.radius - delta, self.dim)


FORCING_KINDS = ("constant", "polynomial", "cosine")


@dataclass(frozen=True)
class Forcing:
    """Right-hand side ``f = regular(x) + kappa d(x)^-q``.

    The regular part is given by ``kind`` and ``coeffs``:

    * ``constant``: ``(c0,)``
    * ``polynomial``: ``(c0, c1, ...)`` meaning ``sum c_k x^k``
    * ``cosine``: ``(offset, amplitude, frequency)`` meaning
      ``offset + amplitude cos(frequency x)``

    ``gamma0`` is the declared growth margin of the singular part.
    """

    kind: str = "constant"
    coeffs: tuple = (0.0,)
    kappa: float = 0.0
    q: float = 0.0
    gamma0: float = 0.0

    def __post_init__(self):
        if self.kind not in FORCING_KINDS:
            raise ForcingError(f"unknown forcing kind {self.kind!r}")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        need = {"constant": 1, "cosine": 3}.get(self.kind)
        if need is not None and len(self.coeffs) != need:
            raise ForcingError(f"{self.kind} forcing takes {need} coefficients")
        if not self.coeffs:
            raise ForcingError("polynomial forcing needs at least one coefficient")
        if self.kappa < 0:
            raise ForcingError("kappa must be >= 0 so f stays bounded below")
        if self.q < 0 or self.gamma0 < 0:
            raise ForcingError("q and gamma0 must be >= 0")

    @classmethod
    def constant(cls, c0):
        return cls("constant", (c0,))

    @property
    def is_bounded(self):
        return self.kappa == 0 or self.q == 0

    def check_growth(self, p):
        """Raise unless ``f d^(beta/(beta-alpha-1) - gamma0) -> 0`` at the boundary."""
        if self.kappa > 0:
            limit = p.beta / (p.beta - p.alpha - 1.0)
            if not self.q + self.gamma0 < limit:
                raise ForcingError(
                    f"q + gamma0 = {self.q + self.gamma0} must be < {limit} "
                    "for the boundary growth condition")
        return self

    def regular(self, x):
        x = np.asarray(x, dtype=float)
        c = self.coeffs
        if self.kind == "constant":
            out = np.full(x.shape, c[0])
        elif self.kind == "polynomial":
            out = np.polynomial.polynomial.polyval(x, c)
        else:
            out = c[0] + c[1] * np.cos(c[2] * x)
        return out

    def __call__(self, x, dom):
        """Evaluate at coordinates ``x`` of domain ``dom``."""
        out = self.regular(x)
        if self.kappa > 0:
            d = np.asarray(dom.distance(x), dtype=float)
            with np.errstate(divide="ignore"):
                out = out + self.kappa * d ** (-self.q)
        return out if out.ndim else float(out)

    def shifted(self, mu):
        """``f + mu`` as a new forcing."""
        c = list(self.coeffs)
        c[0] += mu
        return replace(self, coeffs=tuple(c))

    def sup_norm(self, dom, delta=0.0, n=2001):
        """Sampled ``|f|_inf`` on ``{d >= delta}`` (``delta > 0`` needed if singular)."""
        x = np.linspace(dom.start, dom.stop, n)
        x = x[np.asarray(dom.distance(x)) >= max(delta, 0.0)]
        if self.kappa > 0 and self.q > 0:
            x = x[np.asarray(dom.distance(x)) > 0]
        return float(np.max(np.abs(self(x, dom)))) if x.size else 0.0

    def infimum(self, dom, n=2001):
        x = np.linspace(dom.start, dom.stop, n)
        d = np.asarray(dom.distance(x))
        vals = self.regular(x)
        if self.kappa > 0:
            inner = d > 0
            vals = vals.copy()
            vals[inner] += self.kappa * d[inner] ** (-self.q)
        return float(np.min(vals))
