import numpy as np
import pytest

from numbl import builtin_scheme
from numbl.scheme import SchemeSpec

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def bump(x):
    return np.exp(-100.0 * (np.asarray(x, dtype=float) - 0.5) ** 2)


@pytest.fixture
def ab3():
    return builtin_scheme("ab3_five_point", -1.0, 0.4)


@pytest.fixture
def lax_friedrichs():
    return builtin_scheme("lax_friedrichs", -1.0, 0.5)


BUILTIN_CASES = [
    ("upwind", 1.0, 0.5),
    ("upwind", -1.0, 0.5),
    ("lax_friedrichs", -1.0, 0.5),
    ("lax_friedrichs", 1.0, 0.8),
    ("lax_wendroff", -1.0, 0.5),
    ("lax_wendroff", 1.0, 0.5),
    ("leap_frog", -1.0, 0.4),
    ("ab3_five_point", -1.0, 0.4),
    ("ab3_five_point", 1.0, 0.4),
]


def random_consistent_scheme(rng, a=None, r=None, p=None, lam=0.3):
    """Random space stencil satisfying both space consistency sums, forward Euler in time."""
    r = int(rng.integers(1, 4)) if r is None else r
    p = int(rng.integers(1, 4)) if p is None else p
    a = float(rng.choice([-1, 1]) * rng.uniform(0.2, 2.0)) if a is None else a
    coeffs = {l: float(rng.normal()) for l in range(-r + 1, p)}
    s0 = sum(coeffs.values())
    s1 = sum(l * c for l, c in coeffs.items())
    # a_{-r} + a_p = -s0 ;  -r a_{-r} + p a_p = a - s1
    mat = np.array([[1.0, 1.0], [-r, p]])
    am, ap = np.linalg.solve(mat, [-s0, a - s1])
    coeffs[-r] = am
    coeffs[p] = ap
    return SchemeSpec(a, lam, coeffs, (-1.0, 1.0), (1.0,))


def synthetic_scheme(roots, a=-1.0, extra_p=1):
    """Scheme whose symbol is ``c (z - 1) prod (z - z_i) / z^r`` with ``A'(1) = a``.

    ``r = len(roots)`` and ``p = 1``; the normalising constant enforces
    space consistency exactly.
    """
    poly = np.poly([1.0, *roots])
    poly = poly * a / np.polyval(np.polyder(poly), 1.0)
    poly = np.real_if_close(poly, tol=1e6).real
    r = len(roots)
    # poly is highest-first: z^{r+1} ... z^0  ->  a_1 ... a_{-r}
    coeffs = {l: float(c) for l, c in zip(range(1, -r - 1, -1), poly)}
    return SchemeSpec(a, 0.2, coeffs, (-1.0, 1.0), (1.0,), name="synthetic")
