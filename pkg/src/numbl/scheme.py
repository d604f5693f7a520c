"""Linear multistep finite-difference schemes for the transport equation.

A scheme advances ``u_t + a u_x = 0`` on a uniform grid by

.. math::

    \\sum_{\\sigma=0}^{k} \\alpha_\\sigma u_j^{n+\\sigma}
    + \\lambda \\sum_{\\sigma=0}^{k-1} \\beta_\\sigma
      \\sum_{\\ell=-r}^{p} a_\\ell u_{j+\\ell}^{n+\\sigma} = 0,

with ``lambda = dt / dx`` held fixed.  The space coefficients ``a_l`` are
stored dimensionless, exactly as they multiply ``lambda`` above.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from math import isfinite
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

__all__ = [
    "SchemeError",
    "SchemeSpec",
    "ConsistencyReport",
    "check_consistency",
    "flux_coefficients",
    "apply_flux_difference",
    "builtin_scheme",
    "scheme_names",
    "load_scheme",
    "DEFAULT_CONSISTENCY_TOL",
]

DEFAULT_CONSISTENCY_TOL = 1e-10


class SchemeError(ValueError):
    """Raised when a scheme violates a structural or consistency requirement."""


@dataclass(frozen=True)
class SchemeSpec:
    """Immutable description of one discretization.

    ``space_coeffs`` maps the stencil offset ``l`` to ``a_l``.  Offsets that
    are absent are zero; the stencil widths ``r_left`` and ``p_right`` are
    read off the extreme offsets, which must carry nonzero coefficients.
    """

    a_velocity: float
    cfl_lambda: float
    space_coeffs: Mapping[int, float]
    alpha: tuple[float, ...]
    beta: tuple[float, ...]
    name: str = "custom"
    coeffs: np.ndarray = field(init=False, repr=False, compare=False)
    r_left: int = field(init=False)
    p_right: int = field(init=False)

    def __post_init__(self) -> None:
        a = float(self.a_velocity)
        lam = float(self.cfl_lambda)
        if not isfinite(a) or a == 0.0:
            raise SchemeError(f"velocity a must be finite and nonzero, got {a}")
        if not isfinite(lam) or lam <= 0.0:
            raise SchemeError(f"CFL parameter lambda must be positive, got {lam}")

        raw = {int(l): float(v) for l, v in dict(self.space_coeffs).items()}
        nonzero = [l for l, v in raw.items() if v != 0.0]
        if not nonzero:
            raise SchemeError("space stencil has no nonzero coefficient")
        r = max(0, -min(nonzero))
        p = max(0, max(nonzero))
        coeffs = np.array([raw.get(l, 0.0) for l in range(-r, p + 1)])
        if coeffs[0] == 0.0:
            raise SchemeError(f"invariant a_{{-r}} != 0 violated (r={r})")
        if coeffs[-1] == 0.0:
            raise SchemeError(f"invariant a_p != 0 violated (p={p})")
        if not np.all(np.isfinite(coeffs)):
            raise SchemeError("space coefficients must be finite")

        alpha = tuple(float(x) for x in self.alpha)
        beta = tuple(float(x) for x in self.beta)
        if len(alpha) < 2:
            raise SchemeError("alpha needs at least two entries (k >= 1)")
        if len(beta) != len(alpha) - 1:
            raise SchemeError(
                f"invariant k = len(alpha) - 1 = len(beta) violated: "
                f"len(alpha)={len(alpha)}, len(beta)={len(beta)}"
            )
        if alpha[-1] != 1.0:
            raise SchemeError(f"invariant alpha_k = 1 violated (alpha_k={alpha[-1]})")
        if abs(alpha[0]) + abs(beta[0]) == 0.0:
            raise SchemeError("invariant |alpha_0| + |beta_0| > 0 violated")

        object.__setattr__(self, "a_velocity", a)
        object.__setattr__(self, "cfl_lambda", lam)
        object.__setattr__(self, "space_coeffs", {l: raw.get(l, 0.0) for l in range(-r, p + 1)})
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "beta", beta)
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "r_left", r)
        object.__setattr__(self, "p_right", p)

    @property
    def k_levels(self) -> int:
        return len(self.beta)

    @property
    def tau(self) -> float:
        """Ratio ``dx / (|a| dt)``."""
        return 1.0 / (self.cfl_lambda * abs(self.a_velocity))

    @property
    def offsets(self) -> range:
        return range(-self.r_left, self.p_right + 1)

    def with_lambda(self, lam: float) -> "SchemeSpec":
        """Same scheme at a different CFL number (builtins are re-derived)."""
        if self.name in _BUILTINS:
            return builtin_scheme(self.name, self.a_velocity, lam)
        return SchemeSpec(self.a_velocity, lam, self.space_coeffs, self.alpha, self.beta, self.name)


@dataclass(frozen=True)
class ConsistencyReport:
    space_ok: bool
    time_ok: bool
    sigma_alpha_nonzero: bool
    residuals: dict[str, float]
    tol: float

    @property
    def ok(self) -> bool:
        return self.space_ok and self.time_ok and self.sigma_alpha_nonzero


def check_consistency(spec: SchemeSpec, tol: float = DEFAULT_CONSISTENCY_TOL) -> ConsistencyReport:
    """Evaluate the space and time consistency sums of ``spec``.

    The residual ``sum_sigma_alpha`` is the only one that must stay *away*
    from zero; all others must vanish to within ``tol``.
    """
    ell = np.arange(-spec.r_left, spec.p_right + 1)
    a_l = spec.coeffs
    alpha = np.asarray(spec.alpha)
    beta = np.asarray(spec.beta)
    sig = np.arange(alpha.size)
    s_alpha = float(sig @ alpha)
    residuals = {
        "sum_a": abs(float(a_l.sum())),
        "sum_l_a_minus_a": abs(float(ell @ a_l) - spec.a_velocity),
        "sum_alpha": abs(float(alpha.sum())),
        "sum_sigma_alpha_minus_sum_beta": abs(s_alpha - float(beta.sum())),
        "sum_sigma_alpha": abs(s_alpha),
    }
    return ConsistencyReport(
        space_ok=residuals["sum_a"] < tol and residuals["sum_l_a_minus_a"] < tol,
        time_ok=residuals["sum_alpha"] < tol and residuals["sum_sigma_alpha_minus_sum_beta"] < tol,
        sigma_alpha_nonzero=residuals["sum_sigma_alpha"] > tol,
        residuals=residuals,
        tol=tol,
    )


def flux_coefficients(spec: SchemeSpec, tol: float = DEFAULT_CONSISTENCY_TOL) -> np.ndarray:
    """Coefficients ``f_{-r}, ..., f_{p-1}`` of the linear numerical flux.

    ``F(v_0, ..., v_{r+p-1}) = sum_l f_l v_{l+r}`` and the space operator
    telescopes as ``F(u_{j-r+1..j+p}) - F(u_{j-r..j+p-1})``.
    """
    report = check_consistency(spec, tol)
    if report.residuals["sum_a"] >= tol:
        raise SchemeError(
            "flux form requires sum(a_l) = 0; residual "
            f"{report.residuals['sum_a']:.3e}"
        )
    # f_l = sum_{m > l} a_m = -sum_{m <= l} a_m, so that F(u, ..., u) = a u
    return -np.cumsum(spec.coeffs)[:-1]


def apply_flux_difference(f: np.ndarray, r: int, u: np.ndarray) -> np.ndarray:
    """Flux difference ``F(j+1) - F(j)`` for every ``j`` with a full stencil.

    Returns values for ``j = r, ..., len(u) - p - 1`` where ``p = len(f) - r``.
    """
    u = np.asarray(u, dtype=float)
    m = len(f)
    # F_j := F(u_{j-r}, ..., u_{j-r+m-1}), defined for j = r .. len(u)-m+r
    n_flux = u.size - m + 1
    flux = np.zeros(n_flux)
    for i, fi in enumerate(f):
        flux += fi * u[i : i + n_flux]
    return flux[1:] - flux[:-1]


def _lax_friedrichs(a: float, lam: float) -> dict[int, float]:
    return {-1: -1.0 / (2 * lam) - a / 2, 0: 1.0 / lam, 1: -1.0 / (2 * lam) + a / 2}


def _lax_wendroff(a: float, lam: float) -> dict[int, float]:
    return {-1: -a / 2 - lam * a * a / 2, 0: lam * a * a, 1: a / 2 - lam * a * a / 2}


def _upwind(a: float, lam: float) -> dict[int, float]:
    if a > 0:
        return {-1: -a, 0: a}
    return {0: -a, 1: a}


def _ab3_five_point(a: float, lam: float) -> dict[int, float]:
    # centered fourth-order difference plus a fourth-difference dissipation
    return {
        -2: a / 12 + 1 / 24,
        -1: -2 * a / 3 - 1 / 6,
        0: 1 / 4,
        1: 2 * a / 3 - 1 / 6,
        2: -a / 12 + 1 / 24,
    }


def _leap_frog(a: float, lam: float) -> dict[int, float]:
    return {-1: -a / 2, 1: a / 2}


_EULER = ((-1.0, 1.0), (1.0,))
_AB3 = ((0.0, 0.0, -1.0, 1.0), (5 / 12, -16 / 12, 23 / 12))
_MIDPOINT = ((-1.0, 0.0, 1.0), (0.0, 2.0))

_BUILTINS = {
    "upwind": (_upwind, _EULER),
    "lax_friedrichs": (_lax_friedrichs, _EULER),
    "lax_wendroff": (_lax_wendroff, _EULER),
    "leap_frog": (_leap_frog, _MIDPOINT),
    "ab3_five_point": (_ab3_five_point, _AB3),
}


def scheme_names() -> tuple[str, ...]:
    return tuple(_BUILTINS)


def builtin_scheme(name: str, a: float, lam: float) -> SchemeSpec:
    """Return one of the built-in schemes at velocity ``a`` and CFL ``lam``.

    ``upwind`` picks the upwind side from the sign of ``a`` (``r=1, p=0`` for
    ``a > 0``, ``r=0, p=1`` for ``a < 0``).
    """
    try:
        coeffs, (alpha, beta) = _BUILTINS[name]
    except KeyError:
        raise SchemeError(
            f"unknown scheme {name!r}; available: {', '.join(_BUILTINS)}"
        ) from None
    if a == 0 or lam <= 0:
        raise SchemeError(f"need a != 0 and lambda > 0, got a={a}, lambda={lam}")
    return SchemeSpec(a, lam, coeffs(a, lam), alpha, beta, name=name)


def scheme_from_mapping(cfg: Mapping, a: float | None = None, lam: float | None = None) -> SchemeSpec:
    """Build a scheme from parsed configuration keys.

    Recognised keys: ``scheme`` (builtin name), ``a``, ``lambda``,
    ``space_coeffs`` (list of ``[l, a_l]`` pairs), ``alpha``, ``beta``.
    Explicit ``a``/``lam`` arguments override the mapping.
    """
    a = cfg.get("a") if a is None else a
    lam = cfg.get("lambda") if lam is None else lam
    if a is None or lam is None:
        raise SchemeError("scheme definition needs both 'a' and 'lambda'")
    if "scheme" in cfg:
        return builtin_scheme(str(cfg["scheme"]), float(a), float(lam))
    missing = [key for key in ("space_coeffs", "alpha", "beta") if key not in cfg]
    if missing:
        raise SchemeError(f"scheme definition is missing keys: {', '.join(missing)}")
    pairs: Iterable = cfg["space_coeffs"]
    try:
        space = {int(l): float(v) for l, v in pairs}
    except (TypeError, ValueError) as exc:
        raise SchemeError(f"space_coeffs must be a list of [l, a_l] pairs: {exc}") from None
    return SchemeSpec(float(a), float(lam), space, tuple(cfg["alpha"]), tuple(cfg["beta"]),
                      name=str(cfg.get("name", "custom")))


def load_scheme(path: str | Path, a: float | None = None, lam: float | None = None) -> SchemeSpec:
    """Read a TOML scheme definition file."""
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise SchemeError(f"cannot parse scheme file {path}: {exc}") from None
    return scheme_from_mapping(cfg, a, lam)
