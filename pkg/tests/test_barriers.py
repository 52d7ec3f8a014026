import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from ergodic_pde import BarrierSpec, Domain1D, EquationParams, Forcing, check_inequality
from ergodic_pde.barriers import (eval_barrier, explosive_sub_spec, explosive_super_spec,
                                  interior_lower_spec, measure_K4, mu_star_spec, super_E,
                                  zone_values)
from ergodic_pde.errors import OutsideDomain, UnsetPrefactor
from ergodic_pde.model import compute_exponents

from conftest import SAMPLE

UNIT = Domain1D.interval()


def test_interior_lower_example():
    p = EquationParams(0.0, 1.5, a=1.0, lam=1.0)
    spec = interior_lower_spec(0.1, 0.01)
    assert eval_barrier(spec, p, UNIT, 0.02) == pytest.approx(1 / 0.03 - 1 / 0.11, rel=1e-14)
    assert eval_barrier(spec, p, UNIT, 0.02) == pytest.approx(24.2424, abs=5e-5)


@pytest.mark.parametrize("alpha,beta", SAMPLE)
def test_interior_lower_sigma(alpha, beta):
    p = EquationParams(alpha, beta, a=0.7, A=1.3, lam=1.0, operator="pucci_plus")
    e = compute_exponents(alpha, beta)
    spec = BarrierSpec("interior_lower", s=0.0, delta0=0.2)
    d = 0.05
    got = eval_barrier(spec, p, UNIT, d)
    if e.gamma > 0:
        sigma = ((e.gamma + 1) * 0.7 / 2) ** (1 / (beta - alpha - 1)) / e.gamma
        want = sigma * (d ** -e.gamma - 0.2 ** -e.gamma)
    else:
        want = 0.35 * (math.log(0.2) - math.log(d))
    assert got == pytest.approx(want, rel=1e-12)


def test_super_equals_E_at_twice_delta():
    p = EquationParams(0.0, 1.5, lam=1.0)
    spec = BarrierSpec("explosive_super", delta=0.1, nu=0.5, D=3.0)
    E = 0.5 * 0.1 ** -1 + 3.0
    assert super_E(spec, p) == pytest.approx(E, rel=1e-15)
    assert eval_barrier(spec, p, UNIT, 0.2) == E
    assert eval_barrier(spec, p, UNIT, 0.4) == E


def test_mu_star_test_function():
    p = EquationParams(0.0, 2.0, a=1.0, lam=0.0)
    x = np.linspace(0, 1, 11)
    assert np.allclose(eval_barrier(mu_star_spec(), p, UNIT, x), x ** 2 / 4, rtol=1e-14,
                       atol=0)
    assert eval_barrier(mu_star_spec(), p, UNIT, 1.0) == pytest.approx(0.25, rel=1e-14)


def test_mu_star_sub_solution_with_zero_margin():
    p = EquationParams(0.0, 2.0, lam=0.0)
    rep = check_inequality(mu_star_spec(), p, UNIT, Forcing.constant(0.0), mu=-0.25,
                           side="sub", region=(0.0, 1.0), n=1001)
    assert rep.passed
    assert rep.worst_margin == pytest.approx(0.0, abs=1e-14)
    assert rep.worst_x == pytest.approx(1.0)


@pytest.mark.parametrize("alpha,beta", SAMPLE)
def test_interior_lower_is_sub_solution(alpha, beta):
    p = EquationParams(alpha, beta, lam=1.0)
    rep = check_inequality(interior_lower_spec(0.05, 0.01), p, UNIT, Forcing.constant(-1.0),
                           side="sub")
    assert rep.passed, rep


@pytest.mark.parametrize("alpha,beta", SAMPLE)
def test_explosive_pair(alpha, beta):
    p = EquationParams(alpha, beta, lam=1.0)
    f = Forcing.constant(0.0)
    sup = explosive_super_spec(p, f, UNIT)
    assert check_inequality(sup, p, UNIT, f, side="super").passed
    sub = explosive_sub_spec(p, f, UNIT, delta=sup.delta)
    assert check_inequality(sub, p, UNIT, f, side="sub").passed


def test_super_checked_on_finer_sampling():
    p = EquationParams(0.0, 1.5, lam=1.0)
    f = Forcing.constant(0.0)
    sup = explosive_super_spec(p, f, UNIT)
    coarse = check_inequality(sup, p, UNIT, f, side="super", region=(0, sup.delta))
    fine = check_inequality(sup, p, UNIT, f, side="super", region=(0, sup.delta), n=20001)
    assert coarse.passed and fine.passed
    assert fine.worst_margin <= coarse.worst_margin + 1e-9


def test_measured_K4_is_positive_and_finite():
    p = EquationParams(0.0, 1.5, lam=1.0)
    K4 = measure_K4(p, UNIT, 0.1)
    assert 0 < K4 < math.inf


@given(alpha=st.floats(-0.9, 2.0), frac=st.floats(0.05, 1.0),
       delta=st.floats(0.01, 0.2), nu=st.floats(0.0, 2.0),
       g1=st.floats(0.0, 0.99), D=st.floats(0.0, 100.0))
def test_zone_continuity(alpha, frac, delta, nu, g1, D):
    beta = alpha + 1.0 + frac
    e = compute_exponents(alpha, beta)
    g1 = min(g1, 0.99 * e.gamma) if e.gamma > 0 else g1
    p = EquationParams(alpha, beta, lam=1.0)
    spec = BarrierSpec("explosive_super", delta=delta, nu=nu, gamma1=g1, D=D)
    z1, z2, _ = zone_values(spec, p, np.array([delta]))
    assert abs(z1[0] - z2[0]) <= 1e-12 * max(1.0, abs(z1[0]))
    _, z2, z3 = zone_values(spec, p, np.array([2 * delta]))
    assert abs(z2[0] - z3[0]) <= 1e-12 * max(1.0, abs(z3[0]))


def test_errors():
    p = EquationParams(0.0, 1.5, lam=1.0)
    with pytest.raises(UnsetPrefactor):
        eval_barrier(BarrierSpec("explosive_super", delta=0.1), p, UNIT, 0.05)
    with pytest.raises(OutsideDomain):
        eval_barrier(interior_lower_spec(0.1, 0.0), p, UNIT, 1.5)
    with pytest.raises(ValueError):
        BarrierSpec("nope")
    with pytest.raises(ValueError):
        BarrierSpec("explosive_sub", gamma1=1.0)
