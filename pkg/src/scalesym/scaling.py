"""R+ actions on configuration space and their scaled cotangent lifts.

An action Psi of the multiplicative group R+ on Q = R^n lifts to phase
space as

    Phi_g(q, p) = (Psi_g(q), g^c (D Psi_g(q))^{-T} p),

which rescales the canonical forms by g^c.  The built-in family is the
weighted dilation Psi_g(q)_i = g^{w_i} q_i (uniform dilation when all
weights are 1); arbitrary actions can be supplied with analytic Jacobians.

For the Lie algebra element xi (a plain real), the lifted generator is

    (xi_Q(q), (c xi Id - (D xi_Q(q))^T) p),

and the momentum map J(q, p) = p . xi_Q(q)|_{xi=1} generates it as a
conformal Hamiltonian with parameter c xi.  ``verify_scaling_symmetry``
certifies numerically that a given (action, Hamiltonian) pair is a
scaling symmetry: conformality of the lift, conformal invariance of H,
the momentum-map identity, the scaling-function property of J, and
conformal invariance of J.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionMismatch, NonFiniteValue
from .phase import (
    _representable_step,
    PhasePoint,
    ScalarField,
    TangentVector,
    conformal_vector_field,
    omega_matrix,
)


@dataclass(frozen=True)
class ScalingAction:
    """An R+ action on Q plus its lift exponent c and Hamiltonian weight b.

    Exactly one of two shapes: a weighted dilation (``weights`` set) or a
    custom action (``psi``/``dpsi``/``xi_q``/``dxi_q`` set, all analytic;
    finite differences are only used to cross-check them).
    """

    n: int
    c: float
    b: float
    weights: np.ndarray | None = None
    psi: Callable[[float, np.ndarray], np.ndarray] | None = None
    dpsi: Callable[[float, np.ndarray], np.ndarray] | None = None
    xi_q: Callable[[np.ndarray], np.ndarray] | None = None
    dxi_q: Callable[[np.ndarray], np.ndarray] | None = None

    def __post_init__(self):
        if self.weights is not None:
            w = np.asarray(self.weights, dtype=float)
            if w.shape != (self.n,):
                raise DimensionMismatch(f"weights shape {w.shape} != ({self.n},)")
            object.__setattr__(self, "weights", w)
        elif None in (self.psi, self.dpsi, self.xi_q, self.dxi_q):
            raise ValueError("custom action needs psi, dpsi, xi_q and dxi_q")

    @property
    def is_dilation(self) -> bool:
        return self.weights is not None

    @classmethod
    def dilation(cls, weights, c: float, b: float) -> "ScalingAction":
        w = np.asarray(weights, dtype=float)
        return cls(n=len(w), c=float(c), b=float(b), weights=w)

    @classmethod
    def uniform_dilation(cls, n: int, c: float, b: float) -> "ScalingAction":
        return cls.dilation(np.ones(n), c, b)

    @classmethod
    def custom(cls, n, c, b, psi, dpsi, xi_q, dxi_q, *, check=True,
               seed=0, samples=8, rtol=1e-6) -> "ScalingAction":
        """Build a custom action, cross-checking the supplied Jacobians.

        ``dpsi`` is compared against finite differences of ``psi``, ``xi_q``
        against d/dt|_0 psi(e^t, q), and the group law psi(gh, q) =
        psi(g, psi(h, q)) is probed; any miss beyond the tolerances raises.
        """
        action = cls(n=n, c=float(c), b=float(b), psi=psi, dpsi=dpsi,
                     xi_q=xi_q, dxi_q=dxi_q)
        if check:
            rng = np.random.default_rng(seed)
            for _ in range(samples):
                q = rng.uniform(-1.0, 1.0, size=n)
                g = float(np.exp(rng.uniform(-0.7, 0.7)))
                h = float(np.exp(rng.uniform(-0.7, 0.7)))
                jac = np.column_stack([
                    _fd_column(lambda w: psi(g, w), q, i) for i in range(n)
                ])
                if np.max(np.abs(jac - dpsi(g, q))) > rtol * max(1.0, np.max(np.abs(jac))):
                    raise ValueError("dpsi disagrees with finite differences of psi")
                t = 1e-6
                gen_fd = (psi(np.exp(t), q) - psi(np.exp(-t), q)) / (2 * t)
                if np.max(np.abs(gen_fd - xi_q(q))) > rtol * max(1.0, np.max(np.abs(gen_fd))):
                    raise ValueError("xi_q disagrees with d/dt|0 psi(e^t, q)")
                law = psi(g * h, q) - psi(g, psi(h, q))
                if np.max(np.abs(law)) > 1e-10 * max(1.0, np.max(np.abs(psi(g * h, q)))):
                    raise ValueError("psi violates the group law psi(gh) = psi(g) o psi(h)")
        return action


def _fd_column(f, x, i):
    h = _representable_step(x[i])
    xp = x.copy()
    xm = x.copy()
    xp[i] += h
    xm[i] -= h
    return (np.asarray(f(xp), float) - np.asarray(f(xm), float)) / (2 * h)


def act_config(action: ScalingAction, g: float, q) -> np.ndarray:
    """Apply Psi_g to a configuration."""
    if g <= 0:
        raise ValueError(f"group element must be positive, got g={g}")
    q = np.asarray(q, dtype=float)
    if action.is_dilation:
        return g ** action.weights * q
    return np.asarray(action.psi(g, q), dtype=float)


def config_jacobian(action: ScalingAction, g: float, q) -> np.ndarray:
    """D Psi_g(q), the n x n Jacobian of the configuration action."""
    q = np.asarray(q, dtype=float)
    if action.is_dilation:
        return np.diag(g ** action.weights)
    return np.asarray(action.dpsi(g, q), dtype=float)


def act_phase(action: ScalingAction, g: float, z: PhasePoint) -> PhasePoint:
    """Scaled cotangent lift: (Psi_g(q), g^c (D Psi_g(q))^{-T} p)."""
    if g <= 0:
        raise ValueError(f"group element must be positive, got g={g}")
    if action.is_dilation:
        # (D Psi_g)^{-T} is diagonal: momenta pick up g^{c - w_i}.
        return PhasePoint(g ** action.weights * z.q,
                          g ** (action.c - action.weights) * z.p)
    jac = config_jacobian(action, g, z.q)
    p_new = g ** action.c * np.linalg.solve(jac.T, z.p)
    return PhasePoint(act_config(action, g, z.q), p_new)


def generator_config(action: ScalingAction, xi: float, q) -> np.ndarray:
    """Infinitesimal generator xi_Q(q) = d/dt|_0 Psi_{exp(t xi)}(q)."""
    q = np.asarray(q, dtype=float)
    if action.is_dilation:
        return xi * action.weights * q
    return xi * np.asarray(action.xi_q(q), dtype=float)


def generator_config_jacobian(action: ScalingAction, xi: float, q) -> np.ndarray:
    """D xi_Q(q) for the given xi."""
    q = np.asarray(q, dtype=float)
    if action.is_dilation:
        return xi * np.diag(action.weights)
    return xi * np.asarray(action.dxi_q(q), dtype=float)


def generator_phase(action: ScalingAction, xi: float, z: PhasePoint) -> TangentVector:
    """Lifted generator (xi_Q(q), (c xi Id - (D xi_Q(q))^T) p)."""
    dq = generator_config(action, xi, z.q)
    djac = generator_config_jacobian(action, xi, z.q)
    dp = action.c * xi * z.p - djac.T @ z.p
    return TangentVector(dq, dp)


def momentum_map(action: ScalingAction, z: PhasePoint) -> float:
    """Conformal momentum map J(q, p) = p . xi_Q(q) at xi = 1.

    The conformal momentum function for general xi is J_xi = xi * J.
    """
    return float(z.p @ generator_config(action, 1.0, z.q))


def momentum_field(action: ScalingAction, xi: float = 1.0) -> ScalarField:
    """J_xi as a ScalarField with analytic gradient."""

    def value(z: PhasePoint) -> float:
        return xi * momentum_map(action, z)

    def grad(z: PhasePoint):
        djac = generator_config_jacobian(action, xi, z.q)
        return djac.T @ z.p, generator_config(action, xi, z.q)

    return ScalarField(value=value, grad=grad)


def lift_exponent(a: float, b: float) -> float:
    """Lift exponent (a + b) / 2 for kinetic weight a and potential weight b."""
    return (a + b) / 2.0


@dataclass(frozen=True)
class CheckResult:
    name: str
    max_residual: float
    passed: bool

    def to_dict(self) -> dict:
        return {"name": self.name, "max_residual": self.max_residual,
                "passed": self.passed}


@dataclass(frozen=True)
class SymmetryReport:
    """Outcome of verify_scaling_symmetry; deterministic for a given seed."""

    checks: tuple[CheckResult, ...]
    samples: int
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max(c.max_residual for c in self.checks)

    def check(self, name: str) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "samples": self.samples,
                "seed": self.seed, "tol": self.tol,
                "checks": [c.to_dict() for c in self.checks]}


def _default_probe(action: ScalingAction, H: ScalarField, rng) -> PhasePoint:
    # Redraw while H is singular or huge (e.g. near-collision n-body states).
    for _ in range(100):
        z = PhasePoint(rng.uniform(-1.25, 1.25, size=action.n),
                       rng.uniform(-1.25, 1.25, size=action.n))
        try:
            value = H.value(z)
        except Exception:
            continue
        if np.isfinite(value) and abs(value) < 1e3:
            return z
    raise NonFiniteValue("could not draw a probe with finite, moderate H")


def _rel(err: float, *scales: float) -> float:
    return err / max(1.0, *(abs(s) for s in scales))


def phase_jacobian_fd(action: ScalingAction, g: float, z: PhasePoint) -> np.ndarray:
    """Finite-difference Jacobian of act_phase(g, .) at z (2n x 2n)."""
    flat = z.flat()

    def mapped(w):
        return act_phase(action, g, PhasePoint.from_flat(w)).flat()

    return np.column_stack([_fd_column(mapped, flat, i) for i in range(2 * z.n)])


def verify_scaling_symmetry(action: ScalingAction, H: ScalarField,
                            samples: int = 32, seed: int = 0, *,
                            tol: float = 1e-6,
                            probe=None) -> SymmetryReport:
    """Certify that (action, H) is a scaling symmetry at seeded random probes.

    Five checks, each reporting its max relative residual over the probes:

    1. conformality:        A^T Omega A = g^c Omega for A the lift Jacobian
    2. invariance:          H(Phi_g z) = g^b H(z)
    3. momentum-map:        X_{J_xi}^{xi c} equals the lifted generator
    4. scaling-function:    dJ . X_J^c = c J
    5. momentum-invariance: J(Phi_g z) = g^c J(z)

    Failures are reported, not raised.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = np.random.default_rng(seed)
    omega = omega_matrix(action.n)
    J_field = momentum_field(action, 1.0)
    residuals = dict.fromkeys(
        ["conformality", "invariance", "momentum-map",
         "scaling-function", "momentum-invariance"], 0.0)

    for _ in range(samples):
        z = probe(rng) if probe is not None else _default_probe(action, H, rng)
        g = float(np.exp(rng.uniform(-np.log(2.0), np.log(2.0))))
        xi = float(rng.uniform(0.25, 2.0))

        jac = phase_jacobian_fd(action, g, z)
        lhs = jac.T @ omega @ jac
        scale = g ** action.c
        residuals["conformality"] = max(
            residuals["conformality"],
            _rel(float(np.max(np.abs(lhs - scale * omega))), scale))

        h0 = H.value(z)
        h1 = H.value(act_phase(action, g, z))
        residuals["invariance"] = max(
            residuals["invariance"],
            _rel(abs(h1 - g ** action.b * h0), h1, g ** action.b * h0))

        field = momentum_field(action, xi)
        xv = conformal_vector_field(field, xi * action.c, z).flat()
        gen = generator_phase(action, xi, z).flat()
        residuals["momentum-map"] = max(
            residuals["momentum-map"],
            _rel(float(np.max(np.abs(xv - gen))), float(np.max(np.abs(gen)))))

        j0 = momentum_map(action, z)
        xj = conformal_vector_field(J_field, action.c, z)
        gq, gp = J_field.grad(z)
        directional = float(gq @ xj.dq + gp @ xj.dp)
        residuals["scaling-function"] = max(
            residuals["scaling-function"],
            _rel(abs(directional - action.c * j0), j0))

        j1 = momentum_map(action, act_phase(action, g, z))
        residuals["momentum-invariance"] = max(
            residuals["momentum-invariance"],
            _rel(abs(j1 - g ** action.c * j0), j1, j0))

    checks = tuple(CheckResult(name, res, res <= tol)
                   for name, res in residuals.items())
    return SymmetryReport(checks=checks, samples=samples, seed=seed, tol=tol)
