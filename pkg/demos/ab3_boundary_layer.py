"""
The AB3 boundary layer at T = 0.5
==================================

A Gaussian bump leaves the domain through x = 0.  At T = 0.5 its peak sits
exactly on the wall, the interior solution has trace 1 there, and the
Dirichlet rows pull the numerical solution to 0.  The result is an
oscillating layer a few cells thick, which the approximate solution captures.
"""

import numpy as np

from numbl import Grid, build_corrector, build_profile, builtin_scheme, run
from numbl.initial import gaussian_bump
from numbl.simulator import approximate_solution

spec = builtin_scheme("ab3_five_point", a=-1.0, lam=0.4)
grid = Grid(216, spec.cfl_lambda)
sol = run(spec, grid, gaussian_bump, 0.5)
profile = build_corrector(spec, build_profile(spec))

u_int, bl0, bl1 = approximate_solution(spec, profile, gaussian_bump, grid, sol.time_index, parts=True)
u_app = u_int + bl0 + grid.dx * bl1

print(f"n = {sol.time_index}, t = {sol.time:.6f}")
print(" j        u_j        u - u_int     u - u_app")
for j in range(20):
    print(f"{j:2d}  {sol.u[j]:+.6f}   {sol.u[j] - u_int[j]:+.6f}    {sol.u[j] - u_app[j]:+.2e}")

near = slice(0, 20)
print("max |u - u_int| near the wall:", np.abs(sol.u - u_int)[near].max())
print("max |u - u_app| near the wall:", np.abs(sol.u - u_app)[near].max())
