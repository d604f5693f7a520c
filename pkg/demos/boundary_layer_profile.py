"""
Boundary-layer profiles and their first corrector
==================================================

For an outgoing velocity the Dirichlet rows force a mismatch at the wall.
It is absorbed by a fast sequence w_j built from the zeros of A inside the
unit disk, and a corrector w~_j that carries the next order.
"""

import numpy as np

from numbl import build_corrector, build_profile, builtin_scheme, evaluate

# Lax-Friedrichs has a single root, so the profile is a plain geometric sequence.
lf = builtin_scheme("lax_friedrichs", a=-1.0, lam=0.5)
prof = build_corrector(lf, build_profile(lf))
j = np.arange(8)
print("Lax-Friedrichs root:", prof.roots[0].z.real)
print("w_j      :", np.round(evaluate(prof, "w", j), 6))
print("-(1/3)^j :", np.round(-(1 / 3) ** j, 6))
print("w~_j     :", np.round(evaluate(prof, "w_tilde", j), 6))

# The AB3 profile mixes two real roots; the negative one makes it alternate.
ab3 = builtin_scheme("ab3_five_point", a=-1.0, lam=0.4)
prof = build_corrector(ab3, build_profile(ab3))
print("\nAB3 roots:", [round(d.z.real, 6) for d in prof.roots], "omega:", np.round(prof.omega.real, 6))
j = np.arange(12)
w = evaluate(prof, "w", j)
wt = evaluate(prof, "w_tilde", j)
for jj, a, b in zip(j, w, wt):
    print(f"j={jj:2d}  w={a:+.8f}  w~={b:+.8f}")

# Both sequences satisfy their recurrences in the interior.
res = [sum(c * w[i + l] for l, c in ab3.space_coeffs.items()) for i in range(2, 10)]
print("max recurrence residual:", max(abs(v) for v in res))
print("numerically zero beyond j =", prof.horizon())

# An incoming velocity needs no profile at all.
inc = build_profile(builtin_scheme("ab3_five_point", a=1.0, lam=0.4))
print("\na > 0:", inc.c_num_kind, evaluate(inc, "w", np.arange(4)))
