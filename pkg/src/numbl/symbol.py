"""Diagnostics of the amplification function ``A(z) = sum_l a_l z^l``.

Covers Cauchy (whole-line) stability of the multistep scheme, the location
of the zeros of ``A`` on the unit circle, their count inside the unit disk
(by polynomial root finding and, independently, by the argument principle),
and the positive-real-axis test for the integrator's stability region.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from .scheme import SchemeSpec, check_consistency, ConsistencyReport

__all__ = [
    "SymbolError",
    "BorderlineRootError",
    "MultistepHypothesisError",
    "amplification",
    "amplification_derivative",
    "symbol_polynomial",
    "CircleRoot",
    "CircleScan",
    "circle_roots",
    "CauchyStability",
    "cauchy_stability",
    "characteristic_roots",
    "DiskRoot",
    "disk_roots",
    "contour_integral",
    "contour_root_count",
    "MultistepPolynomials",
    "stability_region_probe",
    "lemma1_prediction",
    "SymbolAnalysis",
    "analyze",
    "AssumptionReport",
    "check_assumptions",
]

TOL_DISK = 1e-9
CLUSTER_TOL = 1e-6
TOL_UNIT = 1e-8
SIMPLE_SEP = 1e-6


class SymbolError(ArithmeticError):
    """Numerical failure while analysing the symbol."""


class BorderlineRootError(SymbolError):
    """A zero of ``A`` other than ``z = 1`` sits on (or too near) the unit circle."""


class MultistepHypothesisError(ValueError):
    """The time integrator is not a stable method of order >= 1."""


def symbol_polynomial(spec: SchemeSpec) -> np.ndarray:
    """Coefficients of ``z^r A(z)``, highest degree first (``numpy.polyval`` order)."""
    return spec.coeffs[::-1].copy()


def amplification(spec: SchemeSpec, z):
    """``A(z)``, evaluated by Horner on ``z^r A(z)`` and divided by ``z^r``."""
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SymbolError(f"A has a pole of order {spec.r_left} at z = 0")
    val = np.polyval(symbol_polynomial(spec), z) / z**spec.r_left
    return val[()] if val.ndim == 0 else val


def amplification_derivative(spec: SchemeSpec, z):
    z = np.asarray(z, dtype=complex)
    if np.any(z == 0):
        raise SymbolError(f"A has a pole of order {spec.r_left} at z = 0")
    val = sum(l * c * z ** (l - 1) for l, c in zip(spec.offsets, spec.coeffs) if l != 0)
    val = np.asarray(val, dtype=complex) + 0 * z
    return val[()] if val.ndim == 0 else val


# -- unit circle ---------------------------------------------------------------


@dataclass(frozen=True)
class CircleRoot:
    theta: float
    simple: bool


@dataclass(frozen=True)
class CircleScan:
    roots: tuple[CircleRoot, ...]
    unresolved: bool
    theta: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def passes(self) -> bool:
        """True iff ``theta = 0`` is the only zero on the circle and it is simple."""
        return (
            not self.unresolved
            and len(self.roots) == 1
            and self.roots[0].theta == 0.0
            and self.roots[0].simple
        )


def _wrap(theta: float) -> float:
    """Map an angle to ``(-pi, pi]``."""
    t = float(np.angle(np.exp(1j * theta)))
    return np.pi if t <= -np.pi + 1e-15 else t


def _newton_polish(poly: np.ndarray, z0: complex, maxiter: int = 60) -> complex | None:
    dpoly = np.polyder(poly)
    z = complex(z0)
    for _ in range(maxiter):
        d = np.polyval(dpoly, z)
        if d == 0:
            return None
        dz = np.polyval(poly, z) / d
        z -= dz
        if abs(dz) < 1e-15:
            break
    return z


def circle_roots(spec: SchemeSpec, n_samples: int = 1024, tol: float = 1e-8) -> CircleScan:
    """Locate the zeros of ``theta -> A(e^{i theta})`` on ``(-pi, pi]``.

    Local minima of ``|A|^2`` on a uniform grid are refined by a bounded
    scalar minimisation and then polished by Newton's method on the
    polynomial ``z^r A(z)``.  A minimum counts as a root when ``|A|`` falls
    below ``tol`` times the largest coefficient.  ``theta = 0`` is always
    reported.  When the polynomial has more near-circle roots than the scan
    can separate, the result is flagged ``unresolved``.
    """
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    scale = float(np.max(np.abs(spec.coeffs)))
    poly = symbol_polynomial(spec)
    h = 2 * np.pi / n_samples
    theta = -np.pi + h * np.arange(n_samples)
    values = amplification(spec, np.exp(1j * theta))
    g = np.abs(values) ** 2

    def objective(t: float) -> float:
        return float(abs(amplification(spec, np.exp(1j * t))) ** 2)

    found: list[float] = []
    is_min = (g <= np.roll(g, 1)) & (g <= np.roll(g, -1))
    for i in np.flatnonzero(is_min):
        res = minimize_scalar(
            objective, bounds=(theta[i] - h, theta[i] + h), method="bounded",
            options={"xatol": 1e-13},
        )
        t = float(res.x)
        z = _newton_polish(poly, np.exp(1j * t))
        if z is not None and abs(abs(z) - 1) < 1e-6 and abs(np.angle(z * np.exp(-1j * t))) < 2 * h:
            t = float(np.angle(z))
        if abs(amplification(spec, np.exp(1j * t))) < tol * scale:
            found.append(_wrap(t))

    found.append(0.0)
    found.sort()
    merged: list[float] = []
    for t in found:
        if merged and abs(np.angle(np.exp(1j * (t - merged[-1])))) < 1e-7:
            if t == 0.0:
                merged[-1] = 0.0
            continue
        merged.append(t)
    if len(merged) > 1 and abs(np.angle(np.exp(1j * (merged[0] - merged[-1])))) < 1e-7:
        merged.pop(0)

    roots = []
    for t in merged:
        z = np.exp(1j * t)
        simple = abs(amplification_derivative(spec, z)) > 1e-6 * scale
        roots.append(CircleRoot(theta=t, simple=bool(simple)))

    # cross-check: every near-circle polynomial root must be matched by a scan root
    near = [z for z in np.roots(poly) if abs(abs(z) - 1) < 1e-6]
    unresolved = False
    for i, z in enumerate(near):
        for w in near[i + 1:]:
            if 0 < abs(z - w) < h and abs(z - w) > CLUSTER_TOL:
                unresolved = True
        if not any(abs(np.angle(z * np.exp(-1j * r.theta))) < h for r in roots):
            unresolved = True
    return CircleScan(tuple(roots), unresolved, theta, values)


# -- Cauchy stability ------------------------------------------------------------


def characteristic_roots(spec: SchemeSpec, eta) -> np.ndarray:
    """Roots of ``rho(X) + lambda A(e^{i eta}) sigma(X)`` for each ``eta``.

    Returns an array of shape ``(len(eta), k)``.
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    k = spec.k_levels
    alpha = np.asarray(spec.alpha)
    beta = np.append(np.asarray(spec.beta), 0.0)
    mu = spec.cfl_lambda * amplification(spec, np.exp(1j * eta))
    c = alpha[None, :] + np.atleast_1d(mu)[:, None] * beta[None, :]
    comp = np.zeros((eta.size, k, k), dtype=complex)
    comp[:, :-1, 1:] = np.eye(k - 1)
    comp[:, -1, :] = -c[:, :k]
    return np.linalg.eigvals(comp)


@dataclass(frozen=True)
class CauchyStability:
    verdict: str
    worst_eta: float
    max_modulus: float
    in_stability_region: bool
    eta: np.ndarray = field(repr=False)
    curve: np.ndarray = field(repr=False)

    @property
    def stable(self) -> bool:
        return self.verdict == "stable"


def cauchy_stability(
    spec: SchemeSpec,
    n_samples: int = 1024,
    tol_unit: float = TOL_UNIT,
    simple_sep: float = SIMPLE_SEP,
) -> CauchyStability:
    """Root-condition test of the whole-line scheme at sampled frequencies.

    ``curve`` holds ``-lambda A(e^{i eta})``, the closed curve that must lie in
    the integrator's stability region.
    """
    if n_samples < 64:
        raise ValueError("n_samples must be at least 64")
    eta = -np.pi + 2 * np.pi * np.arange(n_samples) / n_samples
    roots = characteristic_roots(spec, eta)
    if not np.all(np.isfinite(roots)):
        bad = eta[~np.all(np.isfinite(roots), axis=1)][0]
        raise SymbolError(f"characteristic root finder failed at eta={bad}")
    mod = np.abs(roots)
    max_mod = mod.max(axis=1)
    worst = int(np.argmax(max_mod))

    marginal = False
    k = spec.k_levels
    if k > 1:
        dist = np.abs(roots[:, :, None] - roots[:, None, :])
        dist[:, np.arange(k), np.arange(k)] = np.inf
        near_unit = mod >= 1 - tol_unit
        marginal = bool(np.any(near_unit & (dist.min(axis=2) <= simple_sep)))
    if max_mod[worst] > 1 + tol_unit:
        verdict = "unstable"
    elif marginal:
        verdict = "marginal"
    else:
        verdict = "stable"
    curve = -spec.cfl_lambda * amplification(spec, np.exp(1j * eta))
    return CauchyStability(
        verdict=verdict,
        worst_eta=float(eta[worst]),
        max_modulus=float(max_mod[worst]),
        in_stability_region=verdict != "unstable",
        eta=eta,
        curve=curve,
    )


# -- zeros inside the disk ---------------------------------------------------------


@dataclass(frozen=True)
class DiskRoot:
    z: complex
    multiplicity: int


def disk_roots(
    spec: SchemeSpec, tol_disk: float = TOL_DISK, cluster_tol: float = CLUSTER_TOL
) -> list[DiskRoot]:
    """Zeros of ``A`` in ``0 < |z| < 1``, clustered into multiplicity groups.

    Roots are sorted by modulus, then argument.
    """
    poly = symbol_polynomial(spec)
    if poly.size == 1:
        return []
    roots = np.roots(poly)
    for z in roots:
        if abs(abs(z) - 1) <= tol_disk and abs(z - 1) > 1e-6:
            raise BorderlineRootError(
                f"zero of A at z={z:.12g} (|z|={abs(z):.15f}) lies on the unit circle; "
                "the boundary-layer profile would not decay"
            )
    inside = [z for z in roots if 0 < abs(z) < 1 - tol_disk]
    inside.sort(key=lambda z: (abs(z), np.angle(z)))
    out = []
    for grp in _cluster(inside, cluster_tol):
        z = complex(np.mean(grp))
        if abs(z.imag) < 1e-14 * max(1.0, abs(z)):
            z = complex(z.real, 0.0)
        out.append(DiskRoot(z, len(grp)))
    out.sort(key=lambda d: (abs(d.z), np.angle(d.z)))
    return out


def _greedy_groups(roots: list[complex], tol: float) -> list[list[complex]]:
    groups: list[list[complex]] = []
    for z in roots:
        for grp in groups:
            if abs(z - np.mean(grp)) < tol:
                grp.append(z)
                break
        else:
            groups.append([z])
    return groups


def _cluster(roots: list[complex], cluster_tol: float) -> list[list[complex]]:
    """Group numerically split multiple roots.

    Rounding splits an ``m``-fold root by roughly ``eps^(1/m)``, so a
    candidate group of size ``m`` (single linkage at ``sqrt(cluster_tol)``)
    is accepted when every member lies within ``cluster_tol^(2/m)`` of its
    centroid.  For pairs this is the plain ``cluster_tol`` rule.
    """
    loose = np.sqrt(cluster_tol)
    parent = list(range(len(roots)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(roots)):
        for j in range(i + 1, len(roots)):
            if abs(roots[i] - roots[j]) < loose:
                parent[find(i)] = find(j)
    comps: dict[int, list[complex]] = {}
    for i, z in enumerate(roots):
        comps.setdefault(find(i), []).append(z)
    out = []
    for comp in comps.values():
        m = len(comp)
        centre = np.mean(comp)
        if m > 1 and max(abs(z - centre) for z in comp) <= cluster_tol ** (2 / m):
            out.append(comp)
        else:
            out.extend(_greedy_groups(comp, cluster_tol))
    return out


def _log_derivative(spec: SchemeSpec, z: np.ndarray) -> np.ndarray:
    num = np.zeros_like(z)
    den = np.zeros_like(z)
    for l, c in zip(spec.offsets, spec.coeffs):
        den += c * z**l
        if l:
            num += l * c * z ** (l - 1)
    return num / den


def contour_integral(spec: SchemeSpec, epsilon: float = 0.1, n_quad: int = 2048) -> complex:
    """``(1 / 2 i pi)`` times the integral of ``A'/A`` over the arc-plus-chord contour.

    The contour is the unit circle from ``e^{i eps}`` to ``e^{-i eps}`` through
    ``-1``, closed by the vertical chord ``Re z = cos(eps)``, which keeps it
    away from the zero at ``z = 1``.
    """
    if not 0 < epsilon <= np.pi / 4:
        raise ValueError("epsilon must lie in (0, pi/4]")
    theta = np.linspace(epsilon, 2 * np.pi - epsilon, n_quad)
    z_arc = np.exp(1j * theta)
    arc = np.trapezoid(_log_derivative(spec, z_arc) * 1j * z_arc, theta)
    omega = np.linspace(-np.sin(epsilon), np.sin(epsilon), n_quad)
    z_chord = np.cos(epsilon) + 1j * omega
    chord = np.trapezoid(_log_derivative(spec, z_chord) * 1j, omega)
    return (arc + chord) / (2j * np.pi)


def contour_root_count(spec: SchemeSpec, epsilon: float = 0.1, n_quad: int = 2048) -> int:
    """Number of zeros of ``A`` in the punctured disk, by the argument principle.

    The contour integral counts zeros minus poles; the pole at the origin has
    order ``r`` and is added back.
    """
    val = contour_integral(spec, epsilon, n_quad) + spec.r_left
    count = round(val.real)
    if abs(val - count) > 0.25:
        raise SymbolError(
            f"contour integral {val:.6g} is not near an integer; "
            "contour too coarse or a root lies near the contour"
        )
    return int(count)


def lemma1_prediction(spec: SchemeSpec) -> int:
    """Expected number of zeros of ``A`` in the punctured disk."""
    r = spec.r_left
    return r if spec.a_velocity < 0 else r - 1


# -- integrator stability region --------------------------------------------------


@dataclass(frozen=True)
class MultistepPolynomials:
    rho: np.polynomial.Polynomial
    sigma: np.polynomial.Polynomial

    @classmethod
    def from_coefficients(cls, alpha, beta) -> "MultistepPolynomials":
        rho = np.polynomial.Polynomial(np.asarray(alpha, dtype=float))
        sigma = np.polynomial.Polynomial(np.asarray(beta, dtype=float))
        if rho.degree() != len(alpha) - 1 or rho.coef[-1] != 1.0:
            raise MultistepHypothesisError("rho must be monic of degree k")
        if len(beta) > len(alpha) - 1:
            raise MultistepHypothesisError("sigma must have degree at most k - 1")
        return cls(rho, sigma)

    @classmethod
    def from_spec(cls, spec: SchemeSpec) -> "MultistepPolynomials":
        return cls.from_coefficients(spec.alpha, spec.beta)


def _check_probe_hypotheses(mp: MultistepPolynomials, tol: float = 1e-10) -> None:
    rho1 = mp.rho(1.0)
    drho1 = mp.rho.deriv()(1.0)
    sig1 = mp.sigma(1.0)
    if abs(rho1) > tol:
        raise MultistepHypothesisError(f"rho(1) = {rho1:.3e} != 0 (method not consistent)")
    if abs(drho1 - sig1) > tol:
        raise MultistepHypothesisError(f"rho'(1) = {drho1:.6g} != sigma(1) = {sig1:.6g} (order < 1)")
    if abs(sig1) <= tol:
        raise MultistepHypothesisError("sigma(1) = 0")
    roots = mp.rho.roots()
    if np.any(np.abs(roots) > 1 + TOL_UNIT):
        raise MultistepHypothesisError("root condition on rho fails: root outside the unit disk")
    for i, x in enumerate(roots):
        if abs(x) >= 1 - TOL_UNIT:
            others = np.delete(roots, i)
            if others.size and np.min(np.abs(others - x)) <= SIMPLE_SEP:
                raise MultistepHypothesisError(
                    "root condition on rho fails: multiple root on the unit circle"
                )


def stability_region_probe(mp: MultistepPolynomials, mu_samples) -> list[bool]:
    """For each ``mu > 0``, whether ``rho - mu sigma`` has a real root in ``(1, inf)``.

    A ``True`` entry certifies that ``mu`` lies outside the integrator's
    stability region.
    """
    _check_probe_hypotheses(mp)
    out = []
    for mu in mu_samples:
        if mu <= 0:
            raise ValueError(f"mu samples must be positive, got {mu}")
        roots = (mp.rho - mu * mp.sigma).roots()
        real = roots[np.abs(roots.imag) <= 1e-9 * np.maximum(1.0, np.abs(roots))].real
        out.append(bool(np.any(real > 1.0)))
    return out


# -- aggregate ------------------------------------------------------------------------


@dataclass(frozen=True)
class SymbolAnalysis:
    circle: CircleScan
    disk_roots: tuple[DiskRoot, ...] | None
    disk_count_poly: int | None
    disk_count_contour: int | None
    cauchy: CauchyStability
    lemma1_prediction: int
    notes: tuple[str, ...] = ()

    @property
    def circle_roots(self) -> tuple[CircleRoot, ...]:
        return self.circle.roots

    @property
    def cauchy_stable(self) -> str:
        return self.cauchy.verdict


def analyze(spec: SchemeSpec, n_samples: int = 1024, epsilon: float = 0.1,
            n_quad: int = 2048) -> SymbolAnalysis:
    notes = []
    circle = circle_roots(spec, n_samples)
    cauchy = cauchy_stability(spec, n_samples)
    try:
        roots = tuple(disk_roots(spec))
        count_poly = sum(d.multiplicity for d in roots)
    except BorderlineRootError as exc:
        roots, count_poly = None, None
        notes.append(str(exc))
    count_contour = None
    if circle.passes:
        try:
            count_contour = contour_root_count(spec, epsilon, n_quad)
        except SymbolError as exc:
            notes.append(str(exc))
    else:
        notes.append("contour count skipped: A has zeros on the unit circle other than z = 1")
    return SymbolAnalysis(circle, roots, count_poly, count_contour, cauchy,
                          lemma1_prediction(spec), tuple(notes))


@dataclass(frozen=True)
class AssumptionReport:
    consistency: ConsistencyReport
    space_consistency: bool
    time_consistency: bool
    cauchy_stability: bool
    circle_root: bool
    analysis: SymbolAnalysis

    @property
    def all_pass(self) -> bool:
        return (self.space_consistency and self.time_consistency
                and self.cauchy_stability and self.circle_root)

    def lines(self) -> list[str]:
        def mark(ok):
            return "PASS" if ok else "FAIL"

        res = self.consistency.residuals
        circle = ", ".join(f"{r.theta:.9g}" for r in self.analysis.circle.roots)
        return [
            f"assumption 1 (space consistency): {mark(self.space_consistency)}"
            f"  |sum a_l|={res['sum_a']:.3e} |sum l a_l - a|={res['sum_l_a_minus_a']:.3e}",
            f"assumption 2 (multistep consistency): {mark(self.time_consistency)}"
            f"  |sum alpha|={res['sum_alpha']:.3e}"
            f" |sum s alpha - sum beta|={res['sum_sigma_alpha_minus_sum_beta']:.3e}"
            f" |sum s alpha|={res['sum_sigma_alpha']:.6g}",
            f"assumption 3 (Cauchy stability): {mark(self.cauchy_stability)}"
            f"  verdict={self.analysis.cauchy.verdict}"
            f" max|X|={self.analysis.cauchy.max_modulus:.12g}"
            f" at eta={self.analysis.cauchy.worst_eta:.6g}",
            f"assumption 4 (z=1 only zero on circle): {mark(self.circle_root)}"
            f"  circle roots theta=[{circle}]",
        ]


def check_assumptions(spec: SchemeSpec, tol: float = 1e-10, n_samples: int = 1024) -> AssumptionReport:
    cons = check_consistency(spec, tol)
    analysis = analyze(spec, n_samples)
    return AssumptionReport(
        consistency=cons,
        space_consistency=cons.space_ok,
        time_consistency=cons.time_ok and cons.sigma_alpha_nonzero,
        cauchy_stability=analysis.cauchy.stable,
        circle_root=analysis.circle.passes,
        analysis=analysis,
    )
