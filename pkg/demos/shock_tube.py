"""Sod's shock tube on an adaptive grid, checked against the exact solution.

The density profile has a rarefaction, a contact and a shock.  The script
reports where the computed contact and shock sit compared with the exact
Riemann solution, and prints a coarse text plot of the density.

    python demos/shock_tube.py [Jmax]
"""
import sys

import numpy as np

from wavelet_upwind import (AdaptConfig, LimiterConfig, SchemeConfig, TimeControl, make_problem,
                            solve)
from wavelet_upwind.problems import front_positions

Jmax = int(sys.argv[1]) if len(sys.argv) > 1 else 10
problem = make_problem("sod")
sol = solve(problem, SchemeConfig(N=5, J0=6, Jmax=Jmax, adaptive=True), AdaptConfig(eps=1e-3),
            LimiterConfig("TVBR", 40.0), TimeControl(problem.t_end))

rho = sol.state[:, 0]
print(f"t = {sol.t}, {sol.steps} steps, {sol.grid.size} active nodes "
      f"(uniform grid at level {Jmax} would have {2 ** Jmax + 1})")
for name, (numeric, exact) in front_positions(problem, sol.x, rho).items():
    print(f"{name:8s} computed {numeric:.5f}  exact {exact:.5f}  offset {numeric - exact:+.5f}")

exact = np.asarray(problem.exact(sol.x, sol.t))[:, 0]
print("\n x      rho     exact")
for xi in np.linspace(0.0, 1.0, 21):
    k = int(np.argmin(np.abs(sol.x - xi)))
    bar = "#" * int(round(30 * rho[k]))
    print(f"{sol.x[k]:.3f}  {rho[k]:.4f}  {exact[k]:.4f}  {bar}")
