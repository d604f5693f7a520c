"""
Symbol diagnostics of the five-point Adams-Bashforth scheme
============================================================

Everything the theory asks of a scheme can be read off its amplification
function A(z) = sum a_l z^l and the multistep polynomials.
"""

import numpy as np

from numbl import analyze, builtin_scheme, check_assumptions
from numbl.symbol import MultistepPolynomials, amplification, stability_region_probe

spec = builtin_scheme("ab3_five_point", a=-1.0, lam=0.4)

# The real part of A on the unit circle is a pure dissipation term.
theta = np.linspace(-np.pi, np.pi, 9)
print("theta      Re A(e^it)   (2/3) sin^4(t/2)")
for t, val in zip(theta, amplification(spec, np.exp(1j * theta))):
    print(f"{t:+.4f}   {val.real:.10f}   {2 / 3 * np.sin(t / 2) ** 4:.10f}")

# The four structural assumptions, one line each.
for line in check_assumptions(spec).lines():
    print(line)

# Zeros inside the disk: counted by root finding and, independently,
# by the argument principle around a contour that dodges z = 1.
an = analyze(spec)
print("disk roots:", [f"{d.z.real:+.6f} (x{d.multiplicity})" for d in an.disk_roots])
print("count poly / contour / predicted:", an.disk_count_poly, an.disk_count_contour, an.lemma1_prediction)

# Larger time steps push -lambda A(e^{i eta}) out of the integrator's stability region.
for lam in (0.4, 1.0, 4.0):
    res = analyze(spec.with_lambda(lam)).cauchy
    print(f"lambda={lam:<4} verdict={res.verdict:9s} max|X|={res.max_modulus:.6f}")

# No positive real mu lies in the stability region of a stable multistep method.
mp = MultistepPolynomials.from_spec(spec)
mus = [1e-3, 0.1, 0.5, 2.0]
print("rho - mu sigma has a root > 1:", dict(zip(mus, stability_region_probe(mp, mus))))
