"""
Leap-frog: a wave packet bounces off the outflow wall
======================================================

The leap-frog symbol vanishes at z = -1 as well as at z = 1, so no decaying
boundary layer exists.  Instead the mismatch at x = 0 is radiated back into
the domain as a sawtooth packet moving right at speed +1.
"""

import numpy as np

from numbl import Grid, builtin_scheme, check_assumptions, run
from numbl.initial import gaussian_bump

spec = builtin_scheme("leap_frog", a=-1.0, lam=0.4)
for line in check_assumptions(spec).lines():
    print(line)

grid = Grid(400, spec.cfl_lambda)
for t in (0.25, 0.5, 0.75, 1.0):
    sol = run(spec, grid, gaussian_bump, t, force=True)
    peak = int(np.argmax(np.abs(sol.u)))
    print(f"t={t:.2f}  packet centre x={grid.x[peak]:.3f}  amplitude={abs(sol.u[peak]):.3f}  "
          f"cells {peak}..{peak + 5}: {np.round(sol.u[peak:peak + 6], 3)}")
