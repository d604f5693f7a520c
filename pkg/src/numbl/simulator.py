"""Discrete initial boundary value problem on ``[0, x_max]``.

Cells ``[x_j, x_{j+1})`` with ``x_j = j dx`` carry cell averages.  The rows
``0 <= j < r`` are held at zero for every computed level (numerical Dirichlet
condition); on the right, the ``p`` ghost cells beyond the last cell are zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .boundary_layer import BoundaryLayerProfile, build_corrector, build_profile
from .scheme import SchemeSpec
from .symbol import check_assumptions

__all__ = [
    "BlowUpError",
    "AssumptionError",
    "Grid",
    "GridSolution",
    "cell_averages",
    "initial_levels",
    "step",
    "run",
    "n_steps",
    "exact_interior",
    "trace_average",
    "approximate_solution",
    "error_norms",
    "weighted_norms",
    "scheme_residuals",
    "ConvergenceResult",
    "convergence_study",
    "fit_slope",
]

log = logging.getLogger(__name__)

QUAD_ORDER = 6


class BlowUpError(ArithmeticError):
    def __init__(self, n: int, j: int):
        super().__init__(f"non-finite value produced at time level n={n}, cell j={j}")
        self.n = n
        self.j = j


class AssumptionError(RuntimeError):
    pass


@dataclass(frozen=True)
class Grid:
    n_cells: int
    cfl_lambda: float
    x_max: float = 1.0

    def __post_init__(self):
        if self.n_cells < 1:
            raise ValueError("need at least one cell")
        if self.cfl_lambda <= 0 or self.x_max <= 0:
            raise ValueError("cfl_lambda and x_max must be positive")

    @property
    def dx(self) -> float:
        return self.x_max / self.n_cells

    @property
    def dt(self) -> float:
        return self.cfl_lambda * self.dx

    @property
    def x(self) -> np.ndarray:
        """Left cell edges ``x_j``."""
        return self.dx * np.arange(self.n_cells)

    @classmethod
    def for_scheme(cls, spec: SchemeSpec, n_cells: int, x_max: float = 1.0) -> "Grid":
        return cls(n_cells, spec.cfl_lambda, x_max)


@dataclass
class GridSolution:
    """Rolling ``k``-level state of a run plus whatever was recorded along the way."""

    grid: Grid
    window: np.ndarray
    time_index: int
    snapshots: dict[int, np.ndarray] = field(default_factory=dict)
    history: list[np.ndarray] | None = None
    norms: list[float] = field(default_factory=list)

    @property
    def u(self) -> np.ndarray:
        # before the first step the window still holds levels 0..k-1
        k = self.window.shape[0]
        return self.window[self.time_index] if self.time_index < k - 1 else self.window[-1]

    @property
    def time(self) -> float:
        return self.time_index * self.grid.dt

    @property
    def semigroup_sup(self) -> float:
        return max(self.norms)


# -- data ------------------------------------------------------------------------


def _u0_shifted(u0: Callable, a: float, t: float):
    if a > 0:
        def f(x):
            y = x - a * t
            return np.where(y >= 0, u0(np.maximum(y, 0.0)), 0.0)
        return f
    return lambda x: u0(x - a * t)


def cell_averages(u0: Callable, a: float, t: float, grid: Grid, quad_order: int = QUAD_ORDER) -> np.ndarray:
    """Cell averages of ``x -> u0(x - a t)``, ``u0`` extended by zero when ``a > 0``.

    For ``a > 0`` the cell holding the kink ``x = a t`` is integrated only over
    its right part, the left part contributing zero.
    """
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    left = grid.x
    hi = left + grid.dx
    lo = np.clip(left, a * t, hi) if a > 0 else left
    # fraction of each cell that is integrated, exactly 1 for unclipped cells
    frac = 1.0 - (lo - left) / grid.dx
    mid = 0.5 * (hi + lo)
    pts = mid[:, None] + 0.5 * frac[:, None] * grid.dx * nodes[None, :]
    vals = np.asarray(_u0_shifted(u0, a, t)(pts), dtype=float)
    if not np.all(np.isfinite(vals)):
        raise ValueError("initial condition produced non-finite values")
    return (vals @ (weights / weights.sum())) * frac


def initial_levels(spec: SchemeSpec, grid: Grid, u0: Callable, quad_order: int = QUAD_ORDER) -> np.ndarray:
    """The ``k`` starting levels ``n = 0..k-1`` as exact cell averages, shape ``(k, N)``."""
    a = spec.a_velocity
    return np.array([cell_averages(u0, a, n * grid.dt, grid, quad_order) for n in range(spec.k_levels)])


def exact_interior(u0: Callable, a: float, x, t: float):
    """``u0(x - a t)`` with ``u0`` extended by zero to negative arguments when ``a > 0``."""
    x = np.asarray(x, dtype=float)
    return _u0_shifted(u0, a, t)(x)


def trace_average(u0: Callable, a: float, n, dt: float, quad_order: int = QUAD_ORDER):
    """Time average of the exact boundary trace ``u0(|a| t)`` over ``[t^n, t^{n+1}]``."""
    if a > 0:
        raise ValueError("trace discretization is only defined for outgoing velocity a < 0")
    nodes, weights = np.polynomial.legendre.leggauss(quad_order)
    n_arr = np.atleast_1d(np.asarray(n, dtype=float))
    mid = (n_arr + 0.5) * dt
    pts = mid[:, None] + 0.5 * dt * nodes[None, :]
    vals = np.asarray(u0(-a * pts), dtype=float)
    out = 0.5 * (vals @ weights)
    return float(out[0]) if np.ndim(n) == 0 else out


# -- time stepping -----------------------------------------------------------------


def _space_operator(spec: SchemeSpec, u: np.ndarray) -> np.ndarray:
    """``sum_l a_l u_{j+l}`` for ``j = r..N-1`` with zero right ghosts."""
    r, p = spec.r_left, spec.p_right
    n = u.shape[-1]
    padded = np.concatenate([u, np.zeros(u.shape[:-1] + (p,))], axis=-1)
    out = np.zeros(u.shape[:-1] + (n - r,))
    for i, c in enumerate(spec.coeffs):
        out += c * padded[..., i : i + n - r]
    return out


def step(spec: SchemeSpec, window: np.ndarray, n: int | None = None) -> np.ndarray:
    """Advance a ``(k, N)`` window of levels ``n..n+k-1`` by one level.

    Returns the new window (levels ``n+1..n+k``).  ``n`` only labels errors.
    """
    k, r = spec.k_levels, spec.r_left
    lam = spec.cfl_lambda
    new = np.zeros(window.shape[1])
    acc = np.zeros(window.shape[1] - r)
    # overflow is reported below as a blow-up, not as a numpy warning
    with np.errstate(over="ignore", invalid="ignore"):
        for s in range(k):
            if spec.alpha[s]:
                acc -= spec.alpha[s] * window[s, r:]
            if spec.beta[s]:
                acc -= lam * spec.beta[s] * _space_operator(spec, window[s])
    new[r:] = acc
    if not np.all(np.isfinite(new)):
        j = int(np.flatnonzero(~np.isfinite(new))[0])
        raise BlowUpError(-1 if n is None else n + k, j)
    return np.vstack([window[1:], new[None, :]])


def n_steps(t_final: float, dt: float, stopping: str = "floor") -> int:
    """Final time index: ``floor`` = largest n with n dt <= T, ``ceil`` = first n with n dt >= T."""
    ratio = t_final / dt
    if stopping == "floor":
        return int(np.floor(ratio + 1e-9))
    if stopping == "ceil":
        return int(np.ceil(ratio - 1e-9))
    raise ValueError(f"unknown stopping rule {stopping!r}")


def _l2(u: np.ndarray, dx: float) -> float:
    # scaled so that large finite states do not overflow
    scale = float(np.max(np.abs(u), initial=0.0))
    if scale == 0.0 or not np.isfinite(scale):
        return scale
    v = u / scale
    return scale * float(np.sqrt(dx * np.dot(v, v)))


def run(
    spec: SchemeSpec,
    grid: Grid,
    u0: Callable,
    t_final: float,
    snapshot_times: Sequence[float] = (),
    *,
    stopping: str = "floor",
    keep_history: bool = False,
    force: bool = False,
    quad_order: int = QUAD_ORDER,
) -> GridSolution:
    """Run the scheme from exact initial levels up to ``t_final``.

    Unless ``force`` is set, the four structural assumptions are checked
    first and a failure raises :class:`AssumptionError`.  Snapshot times are
    mapped to time indices with the same stopping rule as ``t_final``.
    """
    if grid.cfl_lambda != spec.cfl_lambda:
        raise ValueError("grid and scheme use different CFL numbers")
    if not force:
        report = check_assumptions(spec)
        if not report.all_pass:
            raise AssumptionError(
                "scheme fails the assumptions (use force=True to run anyway):\n  "
                + "\n  ".join(report.lines())
            )
    k = spec.k_levels
    n_final = n_steps(t_final, grid.dt, stopping)
    wanted = {n_steps(t, grid.dt, stopping) for t in snapshot_times}
    window = initial_levels(spec, grid, u0, quad_order)
    sol = GridSolution(grid, window, k - 1, history=[] if keep_history else None)
    for n in range(k):
        sol.norms.append(_l2(window[n], grid.dx))
        if keep_history:
            sol.history.append(window[n].copy())
        if n in wanted:
            sol.snapshots[n] = window[n].copy()
    if n_final < k - 1:
        # the requested time lies inside the initial levels
        sol.window = window
        sol.time_index = n_final
        sol.norms = sol.norms[: n_final + 1]
        if keep_history:
            sol.history = sol.history[: n_final + 1]
        return sol
    for n in range(k - 1, n_final):
        sol.window = step(spec, sol.window, n - k + 1)
        sol.time_index = n + 1
        u = sol.window[-1]
        sol.norms.append(_l2(u, grid.dx))
        if keep_history:
            sol.history.append(u.copy())
        if n + 1 in wanted:
            sol.snapshots[n + 1] = u.copy()
    return sol


# -- approximate solution -------------------------------------------------------------


def _profile_vectors(profile: BoundaryLayerProfile, n_cells: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(n_cells)
    w = profile.w(j)
    wt = profile.corrector(j) if profile.corrector is not None else np.zeros(n_cells)
    return w, wt


def approximate_solution(
    spec: SchemeSpec,
    profile: BoundaryLayerProfile,
    u0: Callable,
    grid: Grid,
    n: int,
    quad_order: int = QUAD_ORDER,
    parts: bool = False,
):
    """Interior average plus boundary layer plus ``dx`` times the corrector at level ``n``.

    With ``parts=True`` returns ``(u_int, u_bl0, u_bl1)`` separately; the
    assembled vector is ``u_int + u_bl0 + dx * u_bl1``.
    """
    a = spec.a_velocity
    u_int = cell_averages(u0, a, n * grid.dt, grid, quad_order)
    bl0 = np.zeros_like(u_int)
    bl1 = np.zeros_like(u_int)
    if a < 0 and n >= spec.k_levels:
        if profile.corrector is None:
            profile = build_corrector(spec, profile)
        w, wt = _profile_vectors(profile, grid.n_cells)
        k = spec.k_levels
        tr = trace_average(u0, a, np.arange(n, n + k + 1), grid.dt, quad_order)
        bl0 = tr[0] * w
        dtr = float(np.dot(spec.alpha, tr)) / (grid.dt * sum(spec.beta))
        bl1 = dtr * wt
    if parts:
        return u_int, bl0, bl1
    return u_int + bl0 + grid.dx * bl1


def scheme_residuals(spec: SchemeSpec, grid: Grid, levels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Plug a trajectory (shape ``(n_levels, N)``) into the scheme.

    Returns ``(eps, eta)``: ``eps[m]`` is the interior consistency error at
    level ``m + k`` for cells ``j >= r`` (divided by ``dt``), ``eta[m]`` the
    values in the Dirichlet rows at level ``m + k``.
    """
    k, r = spec.k_levels, spec.r_left
    levels = np.asarray(levels, dtype=float)
    n_lev = levels.shape[0] - k
    if n_lev <= 0:
        return np.zeros((0, grid.n_cells - r)), np.zeros((0, r))
    eps = np.zeros((n_lev, grid.n_cells - r))
    for s in range(k + 1):
        eps += spec.alpha[s] * levels[s : s + n_lev, r:]
    for s in range(k):
        if spec.beta[s]:
            eps += spec.cfl_lambda * spec.beta[s] * _space_operator(spec, levels[s : s + n_lev])
    return eps / grid.dt, levels[k:, :r].copy()


# -- error measures ---------------------------------------------------------------------


def error_norms(u, ref, dx: float) -> float:
    """Discrete ``L^2`` distance ``sqrt(dx * sum (u_j - ref_j)^2)``."""
    u = np.asarray(u, dtype=float)
    ref = np.asarray(ref, dtype=float)
    if u.shape != ref.shape:
        raise ValueError(f"length mismatch: {u.shape} vs {ref.shape}")
    d = u - ref
    return float(np.sqrt(dx * np.dot(d, d)))


def weighted_norms(trajectory, gamma: float, dx: float, dt: float, n_boundary: int) -> tuple[float, float]:
    """Exponentially weighted space-time sums of an error trajectory.

    ``interior = sum_n sum_j dt dx exp(-2 n gamma dt) |e_j^n|^2`` and
    ``boundary`` is the same sum restricted to ``j < n_boundary`` (``r + p``)
    without the ``dx`` factor.
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    e = np.asarray(trajectory, dtype=float)
    weights = np.exp(-2.0 * gamma * dt * np.arange(e.shape[0]))
    sq = e * e
    interior = float(dt * dx * weights @ sq.sum(axis=1))
    boundary = float(dt * weights @ sq[:, :n_boundary].sum(axis=1))
    return interior, boundary


def fit_slope(dx, err) -> float:
    """Least-squares slope of ``log err`` against ``log dx``."""
    dx = np.asarray(dx, dtype=float)
    err = np.asarray(err, dtype=float)
    if dx.size < 2:
        return float("nan")
    return float(np.polyfit(np.log(dx), np.log(err), 1)[0])


@dataclass
class ConvergenceResult:
    n_cells: list[int]
    dx: list[float]
    raw: list[float]
    corrected: list[float]
    t_final: float
    failed_at: int | None = None
    message: str = ""

    @property
    def slope_raw(self) -> float:
        return fit_slope(self.dx, self.raw)

    @property
    def slope_corrected(self) -> float:
        return fit_slope(self.dx, self.corrected)

    def _trimmed(self, errs) -> float:
        keep = [(h, e) for h, e in zip(self.dx, errs) if e >= 1e-12]
        return fit_slope(*zip(*keep)) if len(keep) >= 2 else float("nan")

    @property
    def slope_raw_trimmed(self) -> float:
        return self._trimmed(self.raw)

    @property
    def slope_corrected_trimmed(self) -> float:
        return self._trimmed(self.corrected)


def convergence_study(
    spec: SchemeSpec,
    u0: Callable,
    t_final: float,
    levels: Sequence[int],
    *,
    stopping: str = "ceil",
    x_max: float = 1.0,
    force: bool = False,
) -> ConvergenceResult:
    """Raw and layer-corrected ``L^2`` errors at ``t_final`` over a grid ladder.

    ``stopping="ceil"`` stops at the first level with ``n dt >= T``; errors
    are measured against the reference solutions at that level's time.
    """
    if len(levels) < 3:
        raise ValueError("a convergence study needs at least three levels")
    if not force:
        report = check_assumptions(spec)
        if not report.all_pass:
            raise AssumptionError("scheme fails the assumptions:\n  " + "\n  ".join(report.lines()))
    profile = build_corrector(spec, build_profile(spec))
    result = ConvergenceResult([], [], [], [], t_final)
    for n_cells in levels:
        grid = Grid(int(n_cells), spec.cfl_lambda, x_max)
        try:
            sol = run(spec, grid, u0, t_final, stopping=stopping, force=True)
        except BlowUpError as exc:
            result.failed_at = int(n_cells)
            result.message = str(exc)
            log.warning("convergence study aborted at N=%d: %s", n_cells, exc)
            break
        n = sol.time_index
        u_int, bl0, bl1 = approximate_solution(spec, profile, u0, grid, n, parts=True)
        result.n_cells.append(int(n_cells))
        result.dx.append(grid.dx)
        result.raw.append(error_norms(sol.u, u_int, grid.dx))
        result.corrected.append(error_norms(sol.u, u_int + bl0 + grid.dx * bl1, grid.dx))
    return result
