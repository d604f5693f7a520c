"""
Convergence with and without the boundary layer
================================================

Early on (T = 0.125) the bump has not reached the wall and the scheme shows
its full third order.  Once the peak sits on the wall (T = 0.4 is close),
the plain error is dominated by the layer and the order collapses, while the
layer-corrected error keeps order 1.5.
"""

from numbl import builtin_scheme, convergence_study
from numbl.initial import gaussian_bump

spec = builtin_scheme("ab3_five_point", a=-1.0, lam=0.4)
levels = [2**m for m in range(5, 11)]

for t_final in (0.125, 0.4):
    res = convergence_study(spec, gaussian_bump, t_final, levels)
    print(f"T = {t_final}")
    for n, raw, cor in zip(res.n_cells, res.raw, res.corrected):
        print(f"  N={n:5d}  raw={raw:.3e}  corrected={cor:.3e}")
    print(f"  slopes: raw {res.slope_raw:.3f}, corrected {res.slope_corrected:.3f}\n")
