"""Ordered data give ordered discrete solutions.

Raising the boundary value or the forcing raises the solution of the
Dirichlet problem with lambda > 0.

    python demos/comparison.py
"""

from ergodic_pde import (Domain1D, EquationParams, Forcing, Grid, check_comparison,
                         solve_dirichlet)

grid = Grid(Domain1D.interval(), 101)
for op in ("trace", "pucci_plus"):
    A = 2.0 if op == "pucci_plus" else 1.0
    p = EquationParams(1.0, 2.5, a=1.0, A=A, lam=2.0, operator=op)
    low, high = Forcing("polynomial", (-1.0, 0.5, -2.0)), Forcing("polynomial", (-0.5, 0.5, -2.0))
    lower = solve_dirichlet(p, 0.0, low, grid)
    upper = solve_dirichlet(p, 0.3, high, grid)
    rep = check_comparison(p, lower, upper, low, high)
    print(f"{op}: ordered = {rep.passed}, smallest gap = {rep.min_gap:.4f}, "
          f"solver notes: {upper[1].wall_notes or 'newton'}")
