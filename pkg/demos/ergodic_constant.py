"""Ergodic constant of -u'' + |u'|^2 + c = f on (0, 1) by vanishing discount.

With f = 0 the Hopf-Cole substitution turns the problem into the Dirichlet
eigenvalue problem of the Laplacian, so c = -pi^2. Shifting f by a constant
shifts c by the opposite amount.

    python demos/ergodic_constant.py
"""

import math

from ergodic_pde import Domain1D, EquationParams, Forcing, Grid, estimate_constant_explosive

p = EquationParams(0.0, 2.0)
grid = Grid(Domain1D.interval(), 401)

for mu in (0.0, -1.0, 2.0):
    est = estimate_constant_explosive(p, Forcing.constant(mu), grid)
    print(f"f = {mu:+.0f}: c = {est.c_extrapolated:.5f} "
          f"(expected {-math.pi ** 2 - mu:.5f}); n = {est.n}: {est.c_grid:.5f}, "
          f"n = {est.n_companion}: {est.c_companion:.5f}")
    for lam, c in est.ladder[::4]:
        print(f"    lambda = {lam:.2e}  -lambda u = {c:.5f}")
