import math

import numpy as np
import pytest

from ergodic_pde import (Domain1D, EquationParams, Forcing, Grid, LambdaSchedule,
                         estimate_constant_dirichlet, estimate_constant_explosive)
from ergodic_pde.barriers import eval_barrier, interior_lower_spec
from ergodic_pde.ergodic import normalized_profile, probe_mask, richardson
from ergodic_pde.grid import GridField

PI2 = math.pi ** 2
LL = EquationParams(0.0, 2.0)


def unit(n):
    return Grid(Domain1D.interval(), n)


@pytest.fixture(scope="module")
def zero_forcing_estimate():
    return estimate_constant_explosive(LL, Forcing.constant(0.0), unit(201))


@pytest.fixture(scope="module")
def dirichlet_minus20():
    return estimate_constant_dirichlet(LL, Forcing.constant(-20.0), unit(201))


def test_schedule_strictly_decreasing():
    lams = LambdaSchedule().values()
    assert len(lams) == 13 and lams[0] == 1.0 and lams[-1] == 2.0 ** -12
    assert all(a > b for a, b in zip(lams, lams[1:]))


def test_richardson_recovers_power_law():
    lams = [2.0 ** -k for k in range(8)]
    cs = [-3.0 + 0.7 * l ** 1.3 for l in lams]
    c, theta = richardson(lams, cs)
    assert c == pytest.approx(-3.0, abs=1e-12)
    assert theta == pytest.approx(1.3, rel=1e-9)


def test_richardson_falls_back_on_oscillation():
    c, theta = richardson([1.0, 0.5, 0.25], [1.0, 2.0, 1.5])
    assert c == 1.5 and math.isnan(theta)


def test_eigenvalue_oracle(zero_forcing_estimate):
    est = zero_forcing_estimate
    assert est.case_tag == "ergodic_regime"
    assert abs(est.c_extrapolated / -PI2 - 1.0) <= 0.02
    lams = [l for l, _ in est.ladder]
    assert all(a > b for a, b in zip(lams, lams[1:]))


def test_shifted_forcing():
    est = estimate_constant_explosive(LL, Forcing.constant(-20.0), unit(201))
    assert abs(est.c_extrapolated / (20.0 - PI2) - 1.0) <= 0.02


def test_probe_independence(zero_forcing_estimate):
    est = zero_forcing_estimate
    g = est.profile.grid
    u = np.asarray(est.profile.values)
    lam = est.ladder[-1][0]
    d = g.d_values
    near, far = (d >= 0.25) & (d < 0.35), d >= 0.4
    c1, c2 = -lam * u[near].mean(), -lam * u[far].mean()
    assert abs(c1 - c2) < 1e-2 * (1 + abs(c1))


def test_probe_mask_is_interior():
    g = unit(101)
    m = probe_mask(g)
    assert np.all(g.d_values[m] >= 0.25 - 1e-12)
    assert m.sum() == 51


def test_dirichlet_solvable_without_forcing():
    est = estimate_constant_dirichlet(LL, Forcing.constant(0.0), unit(201))
    assert est.case_tag == "dirichlet_solvable"
    assert math.isnan(est.c_extrapolated)


def test_two_paths_agree(dirichlet_minus20):
    est = dirichlet_minus20
    assert est.case_tag == "ergodic_regime"
    assert est.c_extrapolated >= -1e-8
    other = estimate_constant_explosive(LL, Forcing.constant(-20.0), unit(201))
    assert abs(est.c_extrapolated / other.c_extrapolated - 1.0) <= 0.02 + 1e-7


def test_profile_minimum_is_interior(dirichlet_minus20):
    v = normalized_profile(dirichlet_minus20.profile)
    i = int(np.argmin(v.values))
    assert v.values[i] == 0.0
    assert 0 < i < v.grid.n - 1


def test_profile_above_interior_barrier(dirichlet_minus20):
    est = dirichlet_minus20
    v = normalized_profile(est.profile)
    g = v.grid
    near = g.d_values <= 0.1
    phi = eval_barrier(interior_lower_spec(0.1, 0.01), LL.with_lambda(est.ladder[-1][0]),
                       g.dom, g.nodes[near])
    assert np.all(np.asarray(v.values)[near] >= phi)


def test_normalized_profile_examples():
    g = unit(33)
    assert np.all(normalized_profile(GridField.constant(g, 2.5)).values == 0.0)
    vals = np.cos(np.linspace(0, 2 * np.pi, 33))
    out = normalized_profile(GridField.from_values(g, vals))
    assert out.values[16] == 0.0 and np.argmin(out.values) == np.argmin(vals)


@pytest.mark.parametrize("mu", [-1.0, 2.0])
def test_shift_identity(zero_forcing_estimate, mu):
    shifted = estimate_constant_explosive(LL, Forcing.constant(mu), unit(201))
    assert abs(shifted.c_extrapolated - (zero_forcing_estimate.c_extrapolated - mu)) <= \
        0.05 * (1 + abs(mu))


def test_grid_stability(zero_forcing_estimate):
    fine = estimate_constant_explosive(LL, Forcing.constant(0.0), unit(401))
    c1, c2 = zero_forcing_estimate.c_extrapolated, fine.c_extrapolated
    assert abs(c1 - c2) < 0.01 * abs(c2)


def test_dirichlet_route_needs_bounded_forcing():
    f = Forcing("polynomial", (1.0,), kappa=0.5, q=0.5)
    with pytest.raises(ValueError):
        estimate_constant_dirichlet(LL, f, unit(65))
