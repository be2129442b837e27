"""Canonical symplectic structure of T*Q in coordinates.

Phase space is R^n x R^n with coordinates (q, p).  The sign convention is
fixed once for the whole package:

    theta = p dq,        omega = -d theta = dq ^ dp,

so that on tangent vectors stacked as (dq, dp) the symplectic form is the
block matrix

    Omega = [[ 0,  I],
             [-I,  0]],

i.e. omega(u, v) = u.dq . v.dp - u.dp . v.dq.  A conformal Hamiltonian
vector field with parameter c is the unique X satisfying

    i_X omega + c theta = dF,

which in these coordinates reads X = (dF/dp, -dF/dq + c p).  With c = 0
this is the ordinary Hamiltonian vector field.

The module also provides the central-difference gradient used as the
oracle for every analytic gradient in the package.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue

# Per-coordinate step for central differences: cbrt(machine eps) * max(1, |x_i|).
FD_STEP = float(np.cbrt(np.finfo(float).eps))


def _as_finite_vector(x, name: str) -> np.ndarray:
    v = np.atleast_1d(np.asarray(x, dtype=float))
    if v.ndim != 1:
        raise DimensionMismatch(f"{name} must be a 1-d vector, got shape {v.shape}")
    if not np.isfinite(v).all():
        raise NonFiniteValue(f"{name} contains non-finite entries")
    return v


@dataclass(frozen=True)
class PhasePoint:
    """A point (q, p) of T*Q in canonical coordinates."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = _as_finite_vector(self.q, "q")
        p = _as_finite_vector(self.p, "p")
        if len(q) != len(p):
            raise DimensionMismatch(f"len(q)={len(q)} != len(p)={len(p)}")
        if len(q) < 1:
            raise DimensionMismatch("phase point needs n >= 1")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @property
    def n(self) -> int:
        return len(self.q)

    def flat(self) -> np.ndarray:
        """Stacked coordinates (q_1..q_n, p_1..p_n)."""
        return np.concatenate((self.q, self.p))

    @staticmethod
    def from_flat(z) -> "PhasePoint":
        z = np.asarray(z, dtype=float)
        n = len(z) // 2
        return PhasePoint(z[:n], z[n:])


@dataclass(frozen=True)
class TangentVector:
    """A tangent vector (dq, dp) at some phase point."""

    dq: np.ndarray
    dp: np.ndarray

    def __post_init__(self):
        dq = _as_finite_vector(self.dq, "dq")
        dp = _as_finite_vector(self.dp, "dp")
        if len(dq) != len(dp):
            raise DimensionMismatch(f"len(dq)={len(dq)} != len(dp)={len(dp)}")
        object.__setattr__(self, "dq", dq)
        object.__setattr__(self, "dp", dp)

    @property
    def n(self) -> int:
        return len(self.dq)

    def flat(self) -> np.ndarray:
        return np.concatenate((self.dq, self.dp))

    @staticmethod
    def from_flat(v) -> "TangentVector":
        v = np.asarray(v, dtype=float)
        n = len(v) // 2
        return TangentVector(v[:n], v[n:])


@dataclass(frozen=True)
class ScalarField:
    """A smooth function on phase space together with its gradient.

    ``value`` maps a PhasePoint to a float; ``grad`` maps a PhasePoint to
    the pair (dF/dq, dF/dp).  Use :meth:`from_value` when no analytic
    gradient is available; the finite-difference fallback satisfies the
    same contract at reduced accuracy.
    """

    value: Callable[[PhasePoint], float]
    grad: Callable[[PhasePoint], tuple[np.ndarray, np.ndarray]]

    @classmethod
    def from_value(cls, value: Callable[[PhasePoint], float]) -> "ScalarField":
        def fd_grad(z: PhasePoint):
            g = fd_gradient(lambda w: value(PhasePoint.from_flat(w)), z.flat())
            return g[: z.n], g[z.n :]

        return cls(value=value, grad=fd_grad)


def omega_matrix(n: int) -> np.ndarray:
    """The 2n x 2n matrix of omega on (dq, dp) stacks: [[0, I], [-I, 0]]."""
    eye = np.eye(n)
    zero = np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


def canonical_theta(z: PhasePoint, v: TangentVector) -> float:
    """Liouville one-form theta = p dq evaluated at z on v."""
    if z.n != v.n:
        raise DimensionMismatch(f"phase point n={z.n} vs tangent vector n={v.n}")
    return float(z.p @ v.dq)


def canonical_omega(u: TangentVector, v: TangentVector) -> float:
    """Canonical two-form omega = dq ^ dp on a pair of tangent vectors."""
    if u.n != v.n:
        raise DimensionMismatch(f"tangent vector dims {u.n} vs {v.n}")
    return float(u.dq @ v.dp - u.dp @ v.dq)


def conformal_vector_field(F: ScalarField, c: float, z: PhasePoint) -> TangentVector:
    """The conformal Hamiltonian vector field (dF/dp, -dF/dq + c p) at z."""
    gq, gp = F.grad(z)
    gq = np.asarray(gq, dtype=float)
    gp = np.asarray(gp, dtype=float)
    if not (np.isfinite(gq).all() and np.isfinite(gp).all()):
        raise NonFiniteValue("gradient of F is not finite at z")
    return TangentVector(gp, -gq + c * z.p)


def _representable_step(x_i: float) -> float:
    """cbrt(eps) * max(1, |x_i|), snapped so that x_i + h - x_i is exact."""
    h = FD_STEP * max(1.0, abs(x_i))
    return (x_i + h) - x_i


def fd_gradient(f: Callable[[np.ndarray], float], x) -> np.ndarray:
    """Central-difference gradient of a scalar function of a vector.

    Deterministic step per coordinate: h_i = cbrt(eps) * max(1, |x_i|),
    rounded to a step exactly representable around x_i.  Raises
    NonFiniteValue if f is not finite at any probe.
    """
    x = np.asarray(x, dtype=float)
    grad = np.empty_like(x)
    work = x.copy()
    for i in range(len(x)):
        h = _representable_step(x[i])
        work[i] = x[i] + h
        f_plus = f(work)
        work[i] = x[i] - h
        f_minus = f(work)
        work[i] = x[i]
        if not (np.isfinite(f_plus) and np.isfinite(f_minus)):
            raise NonFiniteValue(f"f non-finite near coordinate {i}")
        grad[i] = (f_plus - f_minus) / (2.0 * h)
    return grad


def check_gradient(F: ScalarField, points) -> float:
    """Max relative error of F.grad against fd_gradient over the given points.

    Returns the worst relative error; raises nothing, so callers decide
    whether to treat a miss as fatal.
    """
    worst = 0.0
    for z in points:
        gq, gp = F.grad(z)
        analytic = np.concatenate((np.asarray(gq, float), np.asarray(gp, float)))
        numeric = fd_gradient(lambda w: F.value(PhasePoint.from_flat(w)), z.flat())
        scale = max(1.0, float(np.max(np.abs(numeric))))
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
    return worst
