"""Boundary-layer profile and first corrector for homogeneous Dirichlet rows.

For an outgoing velocity (``a < 0``) the profile ``w`` is the unique decaying
solution of ``sum_l a_l w_{j+l} = 0`` (``j >= r``) with ``w_0 = ... =
w_{r-1} = -1``; the corrector ``w~`` solves ``sum_l a_l w~_{j+l} + w_j = 0``
with ``w~_0 = ... = w~_{r-1} = 0``.  Both are finite sums of terms
``c j^s z^j`` over the zeros ``z`` of ``A`` inside the unit disk.  For
``a > 0`` both sequences vanish identically.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import comb

import numpy as np

from .scheme import SchemeSpec
from .symbol import DiskRoot, SymbolAnalysis, disk_roots, lemma1_prediction

__all__ = [
    "ProfileError",
    "ExpPolySequence",
    "BoundaryLayerProfile",
    "build_profile",
    "build_corrector",
    "evaluate",
]

COND_LIMIT = 1e12
_TINY = 1e-300


class ProfileError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ExpPolySequence:
    """The sequence ``j -> sum_m coef[m] * j**power[m] * root[m]**j``."""

    coef: np.ndarray
    power: np.ndarray
    root: np.ndarray

    @classmethod
    def zero(cls) -> "ExpPolySequence":
        return cls(np.zeros(0, complex), np.zeros(0, int), np.zeros(0, complex))

    @property
    def decay_rate(self) -> float:
        return float(np.max(np.abs(self.root))) if self.root.size else 0.0

    def cutoff(self) -> int | None:
        """First ``j`` beyond which every term is below ``1e-300`` (geometric part)."""
        rho = self.decay_rate
        if rho == 0.0:
            return 0
        return int(np.ceil(np.log(_TINY) / np.log(rho)))

    def complex_values(self, j) -> np.ndarray:
        j = np.atleast_1d(np.asarray(j))
        if np.any(j < 0):
            raise ValueError("sequence index must be nonnegative")
        out = np.zeros(j.shape, dtype=complex)
        if not self.coef.size:
            return out
        jf = j.astype(float)
        with np.errstate(under="ignore"):
            for c, s, z in zip(self.coef, self.power, self.root):
                out += c * jf ** int(s) * np.power(complex(z), j)
        cut = self.cutoff()
        if cut is not None:
            out[j > cut] = 0.0
        return out

    def __call__(self, j) -> np.ndarray:
        vals = self.complex_values(j)
        return vals.real


@dataclass(frozen=True)
class BoundaryLayerProfile:
    roots: tuple[DiskRoot, ...]
    basis: tuple[tuple[complex, int], ...]
    omega: np.ndarray
    w: ExpPolySequence
    r_left: int
    c_num_kind: str
    corrector: "ExpPolySequence | None" = None
    corrector_coeffs: dict | None = None

    @property
    def decay_rate(self) -> float:
        return max((abs(d.z) for d in self.roots), default=0.0)

    def horizon(self) -> int:
        """Smallest ``J`` with ``rho^J < 1e-16``, capped at ``10**4``."""
        rho = self.decay_rate
        if rho == 0.0:
            return self.r_left
        return int(min(10_000, max(self.r_left, np.ceil(np.log(1e-16) / np.log(rho)))))

    def with_corrector(self, seq: ExpPolySequence, coeffs: dict) -> "BoundaryLayerProfile":
        return BoundaryLayerProfile(self.roots, self.basis, self.omega, self.w, self.r_left,
                                    self.c_num_kind, seq, coeffs)


def _basis(roots) -> list[tuple[complex, int]]:
    ordered = sorted(roots, key=lambda d: (abs(d.z), np.angle(d.z)))
    return [(d.z, nu) for d in ordered for nu in range(d.multiplicity)]


def _basis_matrix(basis, r: int) -> np.ndarray:
    j = np.arange(r, dtype=float)
    cols = [j**nu * np.power(complex(z), np.arange(r)) for z, nu in basis]
    return np.array(cols, dtype=complex).T.reshape(r, len(basis))


def _solve_guarded(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    cond = np.linalg.cond(mat)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise ProfileError(
            f"boundary basis matrix is singular (condition number {cond:.3e}); "
            "disk roots are probably mis-clustered"
        )
    return np.linalg.solve(mat, rhs)


def _check_real(seq: ExpPolySequence, n: int = 200) -> None:
    vals = seq.complex_values(np.arange(n))
    if np.max(np.abs(vals.imag), initial=0.0) > 1e-10:
        raise ProfileError("profile is not real: conjugate roots were not paired")


def build_profile(spec: SchemeSpec, analysis: SymbolAnalysis | None = None) -> BoundaryLayerProfile:
    """Leading boundary-layer profile associated with the trace value 1."""
    if spec.a_velocity > 0:
        return BoundaryLayerProfile((), (), np.zeros(0, complex), ExpPolySequence.zero(),
                                    spec.r_left, "trivial")
    roots = tuple(analysis.disk_roots) if analysis is not None and analysis.disk_roots is not None \
        else tuple(disk_roots(spec))
    r = spec.r_left
    count = sum(d.multiplicity for d in roots)
    if count != lemma1_prediction(spec):
        raise ProfileError(
            f"expected {lemma1_prediction(spec)} zeros of A in the disk, found {count}"
        )
    basis = _basis(roots)
    if r == 0:
        omega = np.zeros(0, complex)
    else:
        omega = _solve_guarded(_basis_matrix(basis, r), -np.ones(r, dtype=complex))
    w = ExpPolySequence(
        omega, np.array([nu for _, nu in basis], dtype=int), np.array([z for z, _ in basis], complex)
    )
    _check_real(w)
    return BoundaryLayerProfile(roots, tuple(basis), omega, w, r, "full_line")


def _shifted_moments(spec: SchemeSpec, z: complex, qmax: int) -> np.ndarray:
    """``D_q = sum_l a_l l^q z^l`` for ``q = 0..qmax``."""
    ell = np.arange(-spec.r_left, spec.p_right + 1)
    zl = np.power(complex(z), ell)
    return np.array([np.sum(spec.coeffs * ell.astype(float) ** q * zl) for q in range(qmax + 1)])


def _particular(spec: SchemeSpec, z: complex, mult: int, nu: int):
    """Coefficients ``s_0..s_{mult-1}`` with ``W_j = sum_m s_m j^{mult+m} z^j``.

    ``W`` solves ``sum_l a_l W_{j+l} + j^nu z^j = 0``.  Expanding
    ``(j+l)^s`` binomially and using ``D_q(z) = 0`` for ``q < mult`` gives an
    upper-triangular system in the ``s_m``.
    """
    d = _shifted_moments(spec, z, 2 * mult)
    tri = np.zeros((mult, mult), dtype=complex)
    for t in range(mult):
        for m in range(t, mult):
            s = mult + m
            tri[t, m] = comb(s, t) * d[s - t]
    rhs = np.zeros(mult, dtype=complex)
    rhs[nu] = -1.0
    if np.any(np.abs(np.diag(tri)) == 0):
        raise ProfileError("corrector triangular system is singular")
    sol = np.zeros(mult, dtype=complex)
    for t in range(mult - 1, -1, -1):
        sol[t] = (rhs[t] - tri[t, t + 1:] @ sol[t + 1:]) / tri[t, t]
    return sol


def build_corrector(spec: SchemeSpec, profile: BoundaryLayerProfile) -> BoundaryLayerProfile:
    """Attach the first corrector ``w~`` to ``profile``."""
    if spec.a_velocity > 0:
        return profile.with_corrector(ExpPolySequence.zero(), {})
    mult = {d.z: d.multiplicity for d in profile.roots}
    coefs, powers, roots = [], [], []
    varsigma = []
    for om, (z, nu) in zip(profile.omega, profile.basis):
        mu_i = mult[z]
        sol = _particular(spec, z, mu_i, nu)
        varsigma.append(sol)
        for m, c in enumerate(sol):
            coefs.append(om * c)
            powers.append(mu_i + m)
            roots.append(z)
    particular = ExpPolySequence(np.array(coefs, complex), np.array(powers, int),
                                 np.array(roots, complex))
    r = spec.r_left
    if r:
        boundary = particular.complex_values(np.arange(r))
        varpi = _solve_guarded(_basis_matrix(profile.basis, r), -boundary)
    else:
        varpi = np.zeros(0, complex)
    seq = ExpPolySequence(
        np.concatenate([particular.coef, varpi]),
        np.concatenate([particular.power, [nu for _, nu in profile.basis]]).astype(int),
        np.concatenate([particular.root, [z for z, _ in profile.basis]]).astype(complex),
    )
    _check_real(seq)
    return profile.with_corrector(seq, {"varsigma": varsigma, "varpi": varpi})


def evaluate(profile: BoundaryLayerProfile, which: str, j):
    """Value(s) of ``w`` (``which="w"``) or ``w~`` (``which="w_tilde"``) at ``j``."""
    if which == "w":
        seq = profile.w
    elif which in ("w_tilde", "wt", "corrector"):
        if profile.corrector is None:
            raise ValueError("profile has no corrector; call build_corrector first")
        seq = profile.corrector
    else:
        raise ValueError(f"unknown sequence {which!r}; use 'w' or 'w_tilde'")
    vals = seq(j)
    return float(vals[0]) if np.ndim(j) == 0 else vals
