import math

import pytest
from hypothesis import given, strategies as st

from ergodic_pde.errors import (AlphaOutOfRange, BadEllipticity, BetaOutOfRange,
                                ForcingError, NegativeLambda, SingularGradient,
                                TraceNeedsEqualConstants)
from ergodic_pde.model import (Domain1D, EquationParams, Forcing, boundary_constant,
                               compute_exponents, eval_F, eval_G, odd_pow,
                               uniqueness_status, validate_params)

alphas = st.floats(-0.95, 3.0)
fracs = st.floats(1e-3, 1.0)
finite = st.floats(-50, 50)


def test_lasry_lions_case_is_valid():
    p = validate_params(EquationParams(0.0, 2.0, 1.0, 1.0, 0.0, "trace"))
    assert p.beta == 2.0


@pytest.mark.parametrize("alpha, beta", [(0.0, 1.0), (-0.5, 1.75), (1.0, 3.5)])
def test_beta_out_of_range(alpha, beta):
    with pytest.raises(BetaOutOfRange) as info:
        validate_params(EquationParams(alpha, beta))
    assert info.value.field == "beta"


def test_other_rejections():
    with pytest.raises(AlphaOutOfRange):
        validate_params(EquationParams(-1.0, 0.5))
    with pytest.raises(BadEllipticity):
        validate_params(EquationParams(0.0, 2.0, a=2.0, A=1.0, operator="pucci_plus"))
    with pytest.raises(TraceNeedsEqualConstants):
        validate_params(EquationParams(0.0, 2.0, a=1.0, A=2.0))
    with pytest.raises(NegativeLambda):
        validate_params(EquationParams(0.0, 2.0, lam=-1.0))


@pytest.mark.parametrize("alpha, beta, gamma, tau, rate", [
    (0.0, 2.0, 0.0, 2.0, 1.0),
    (0.0, 1.5, 1.0, 3.0, 2.0),
    (-0.5, 1.25, 1 / 3, 7 / 3, 4 / 3),
])
def test_exponent_table(alpha, beta, gamma, tau, rate):
    e = compute_exponents(alpha, beta)
    assert e.gamma == pytest.approx(gamma, abs=1e-14)
    assert e.tau == pytest.approx(tau, rel=1e-14)
    assert e.grad_rate == pytest.approx(rate, rel=1e-14)


@given(alphas, fracs)
def test_exponent_identities(alpha, frac):
    beta = alpha + 1.0 + frac
    e = compute_exponents(alpha, beta)
    assert e.gamma >= 0
    assert e.gamma == pytest.approx(e.grad_rate * (2 + alpha - beta), rel=1e-9, abs=1e-12)
    assert e.tau * (beta - alpha - 1) == pytest.approx(beta + max(-alpha, 0.0), rel=1e-9)
    assert e.grad_rate > 0


@pytest.mark.parametrize("op, a, A, m, t, mult, expected", [
    ("pucci_plus", 1, 2, 1, 0, 0, 2),
    ("pucci_plus", 1, 2, -1, 0.5, 2, 1),
    ("trace", 1, 1, 3, -1, 2, 1),
    ("pucci_minus", 1, 2, 1, -1, 1, 1 - 2),
])
def test_eval_F_examples(op, a, A, m, t, mult, expected):
    assert eval_F(op, a, A, m, t, mult) == pytest.approx(expected)


ops = st.sampled_from(["trace", "pucci_plus", "pucci_minus"])


@given(ops, st.floats(0.1, 3), st.floats(1, 3), finite, finite, st.integers(0, 4),
       st.floats(0.01, 100))
def test_F_homogeneity(op, a, ratio, m, t, mult, s):
    A = a if op == "trace" else a * ratio
    lhs = eval_F(op, a, A, s * m, s * t, mult)
    assert lhs == pytest.approx(s * eval_F(op, a, A, m, t, mult), rel=1e-9, abs=1e-9)


@given(ops, st.floats(0.1, 3), st.floats(1, 3), finite, finite, st.floats(0, 10),
       st.floats(0, 10), st.integers(0, 4))
def test_ellipticity_sandwich(op, a, ratio, m2, t2, dm, dt, mult):
    A = a if op == "trace" else a * ratio
    diff = eval_F(op, a, A, m2 + dm, t2 + dt, mult) - eval_F(op, a, A, m2, t2, mult)
    lo = eval_F("pucci_minus", a, A, dm, dt, mult)
    hi = eval_F("pucci_plus", a, A, dm, dt, mult)
    slack = 1e-9 * (1 + abs(m2) + abs(t2) + dm + dt) * A * (1 + mult)
    assert lo - slack <= diff <= hi + slack


@given(st.floats(-0.95, 3), st.floats(-1e3, 1e3), st.floats(-1e3, 1e3))
def test_odd_pow_properties(alpha, u, v):
    assert odd_pow(-u, alpha) == -odd_pow(u, alpha)
    assert odd_pow(u, alpha) * u >= 0
    if u < v:
        assert odd_pow(u, alpha) <= odd_pow(v, alpha)
    assert odd_pow(0.0, alpha) == 0


@pytest.mark.parametrize("p, dom, C", [
    (EquationParams(0.0, 1.5), Domain1D.interval(), 4.0),
    (EquationParams(0.0, 2.0), Domain1D.interval(), 1.0),
    (EquationParams(0.0, 2.0, a=1, A=3, operator="pucci_plus"), Domain1D.ball(1.0, 3), 3.0),
])
def test_boundary_constant_examples(p, dom, C):
    assert boundary_constant(p, dom) == pytest.approx(C)


@given(alphas, fracs, st.floats(0.1, 2), st.floats(1, 3), st.floats(1, 2))
def test_boundary_constant_monotone(alpha, frac, a, A, bump):
    beta = alpha + 1 + frac
    plus = [boundary_constant(EquationParams(alpha, beta, a=a, A=x, operator="pucci_plus"))
            for x in (a * A, a * A * bump)]
    assert plus[0] <= plus[1] * (1 + 1e-12)
    minus = [boundary_constant(EquationParams(alpha, beta, a=x, A=4 * a * A,
                                              operator="pucci_minus"))
             for x in (a, a * bump)]
    assert minus[0] <= minus[1] * (1 + 1e-12)


def test_eval_G_examples():
    p = EquationParams(0.0, 2.0, lam=1.0)
    assert eval_G(p, 0, 0, 0, 0) == 0
    assert eval_G(p, 2, 1, 3, 0) == pytest.approx(0)
    q = EquationParams(1.0, 2.5, lam=0.0)
    assert eval_G(q, 5, 2, 1, -1) == pytest.approx(-2 + 2 ** 2.5 + 1)
    with pytest.raises(SingularGradient):
        eval_G(EquationParams(-0.5, 1.25, lam=1.0), 0, 0, 1.0, 0)


def test_uniqueness_examples():
    assert uniqueness_status(EquationParams(0.0, 2.0)) == "unique"
    p = EquationParams(-0.5, 1.25)
    assert uniqueness_status(p, Forcing("constant", (0,), gamma0=0.2)) == "unique"
    assert uniqueness_status(p, Forcing("constant", (0,), gamma0=0.0)) == "unknown"


def test_domain_distance():
    iv = Domain1D.interval(0.0, 2.0)
    assert iv.distance(0.5) == pytest.approx(0.5)
    assert iv.distance(1.5) == pytest.approx(0.5)
    ball = Domain1D.ball(2.0, 3)
    assert ball.distance(0.5) == pytest.approx(1.5)
    assert ball.mult == 2


def test_forcing_catalog():
    dom = Domain1D.interval()
    assert Forcing("polynomial", (1, 2))(0.5, dom) == pytest.approx(2.0)
    assert Forcing("cosine", (1, 2, math.pi))(0.0, dom) == pytest.approx(3.0)
    sing = Forcing("constant", (0,), kappa=1.0, q=0.5, gamma0=0.1)
    assert sing(0.25, dom) == pytest.approx(2.0)
    assert not sing.is_bounded
    sing.check_growth(EquationParams(0.0, 1.5))
    with pytest.raises(ForcingError):
        Forcing("constant", (0,), kappa=1.0, q=3.0).check_growth(EquationParams(0.0, 1.5))
    with pytest.raises(ForcingError):
        Forcing("constant", (0,), kappa=-1.0)
    assert Forcing.constant(1.0).shifted(2.0)(0.3, dom) == pytest.approx(3.0)
