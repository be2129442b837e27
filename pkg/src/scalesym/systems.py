"""Concrete model library and brute-force oracles.

Ships the Newtonian n-body problem (G = 1, masses carry all coupling),
the anisotropic Kepler problem, generic homogeneous potentials, and the
damped-oscillator benchmark.  ``make_system`` builds a system plus its
scaling action from a JSON-style dict: for homogeneous potentials the
Hamiltonian weight is b = alpha, the kinetic weight a is measured
numerically, and the lift exponent follows as c = (a + b) / 2; the pair
is then run through the scaling-symmetry verifier, whose report travels
with the result instead of raising.
"""

import math
from dataclasses import dataclass

import numpy as np

from .equilibria import SimpleMechanicalSystem, central_config_residual, \
    xi_squared_from_config
from .errors import CollisionDetected, SchemaError
from .phase import PhasePoint, ScalarField
from .scaling import ScalingAction, config_jacobian, lift_exponent, \
    verify_scaling_symmetry


@dataclass(frozen=True)
class NBodySpec:
    """Masses and spatial dimension of a point-mass gravitational system."""

    masses: tuple
    dim: int = 3

    def __post_init__(self):
        if any(m <= 0 for m in self.masses):
            raise SchemaError("all masses must be positive")
        if self.dim < 1:
            raise SchemaError("dim must be at least 1")
        object.__setattr__(self, "masses", tuple(float(m) for m in self.masses))

    @property
    def bodies(self) -> int:
        return len(self.masses)

    @property
    def n(self) -> int:
        return self.bodies * self.dim


@dataclass(frozen=True)
class ConformalSystem:
    """A conformal Hamiltonian F with fixed parameter c (no scaling action)."""

    field: ScalarField
    c: float
    z0: np.ndarray | None = None
    name: str = "conformal"


@dataclass(frozen=True)
class BuiltSystem:
    """make_system output: the system, its action, and the verifier's report."""

    system: object
    action: ScalingAction | None
    symmetry_report: object | None


def min_pairwise_distance(spec: NBodySpec, q) -> float:
    pos = np.asarray(q, dtype=float).reshape(spec.bodies, spec.dim)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    iu = np.triu_indices(spec.bodies, k=1)
    return float(dist[iu].min())


def nbody_potential_and_gradient(spec: NBodySpec, q, *,
                                 collision_threshold: float = 1e-6):
    """U(q) = -sum_{i<j} m_i m_j / |q_i - q_j| and its analytic gradient."""
    pos = np.asarray(q, dtype=float).reshape(spec.bodies, spec.dim)
    masses = np.asarray(spec.masses)
    diff = pos[:, None, :] - pos[None, :, :]
    dist = np.sqrt((diff ** 2).sum(axis=2))
    iu = np.triu_indices(spec.bodies, k=1)
    if dist[iu].min() <= collision_threshold:
        raise CollisionDetected(
            f"pairwise separation {dist[iu].min():.3e} under threshold "
            f"{collision_threshold:.3e}")
    mm = masses[:, None] * masses[None, :]
    value = -float((mm[iu] / dist[iu]).sum())
    np.fill_diagonal(dist, 1.0)  # diagonal of diff is zero, so grad[i, i] = 0
    grad = (mm / dist ** 3)[:, :, None] * diff
    return value, grad.sum(axis=1).ravel()


def nbody_mass_matrix(spec: NBodySpec) -> np.ndarray:
    return np.diag(np.repeat(spec.masses, spec.dim))


def nbody_system(spec: NBodySpec, *,
                 collision_threshold: float = 1e-6) -> SimpleMechanicalSystem:
    def potential(q):
        return nbody_potential_and_gradient(
            spec, q, collision_threshold=collision_threshold)[0]

    def gradient(q):
        return nbody_potential_and_gradient(
            spec, q, collision_threshold=collision_threshold)[1]

    return SimpleMechanicalSystem(
        mass_matrix=nbody_mass_matrix(spec), potential=potential,
        potential_gradient=gradient, alpha=-1.0,
        masses=np.asarray(spec.masses), dim=spec.dim,
        collision_threshold=collision_threshold, name="nbody")


def collision_guard(spec: NBodySpec, threshold: float = 1e-6):
    """A per-state guard for the integrator: raises inside the threshold."""

    def guard(z: PhasePoint):
        if min_pairwise_distance(spec, z.q) <= threshold:
            raise CollisionDetected("trajectory crossed the collision threshold")

    return guard


def anisotropic_kepler_system(mu: float) -> SimpleMechanicalSystem:
    """U(q) = -(mu q_1^2 + q_2^2)^{-1/2}, one unit-mass body in the plane."""
    weights = np.array([mu, 1.0])

    def potential(q):
        return -1.0 / math.sqrt(float(weights @ (np.asarray(q) ** 2)))

    def gradient(q):
        q = np.asarray(q, dtype=float)
        return weights * q * float(weights @ q ** 2) ** -1.5

    return SimpleMechanicalSystem(
        mass_matrix=np.eye(2), potential=potential,
        potential_gradient=gradient, alpha=-1.0, name="anisotropic-kepler")


def homogeneous_system(potential, gradient, n: int, alpha: float, *,
                       mass_matrix=None, seed: int = 0,
                       name: str = "homogeneous") -> SimpleMechanicalSystem:
    """Wrap a homogeneous potential, checking U(g q) = g^alpha U(q) at probes."""
    rng = np.random.default_rng(seed)
    for _ in range(8):
        q = rng.uniform(0.3, 1.2, size=n) * rng.choice([-1.0, 1.0], size=n)
        g = float(np.exp(rng.uniform(-0.5, 0.5)))
        u0, u1 = float(potential(q)), float(potential(g * q))
        if abs(u1 - g ** alpha * u0) > 1e-8 * max(1.0, abs(u1)):
            raise SchemaError(
                f"potential is not homogeneous of degree {alpha}: "
                f"U(gq)={u1:.6e} vs g^a U={g ** alpha * u0:.6e}")
    M = np.eye(n) if mass_matrix is None else np.asarray(mass_matrix, float)
    return SimpleMechanicalSystem(mass_matrix=M, potential=potential,
                                  potential_gradient=gradient, alpha=alpha,
                                  name=name)


def power_law_system(n: int, alpha: float, k: float = -1.0,
                     **kwargs) -> SimpleMechanicalSystem:
    """Radial power law U(q) = k |q|^alpha, the JSON-schema homogeneous family."""
    if alpha == 0:
        raise SchemaError("degree 0 gives a constant potential; nothing to solve")

    def potential(q):
        q = np.asarray(q, dtype=float)
        return k * float(q @ q) ** (alpha / 2.0)

    def gradient(q):
        q = np.asarray(q, dtype=float)
        return k * alpha * float(q @ q) ** (alpha / 2.0 - 1.0) * q

    kwargs.setdefault("name", f"power-law({alpha})")
    return homogeneous_system(potential, gradient, n, alpha, **kwargs)


def damped_oscillator(friction: float) -> ConformalSystem:
    """F = p^2/2 + q^2/2 as a conformal Hamiltonian with c = -friction.

    Its integral curves obey Newton's equation with linear drag,
    q'' = -friction q' - q.
    """

    def value(z: PhasePoint) -> float:
        return 0.5 * float(z.p @ z.p) + 0.5 * float(z.q @ z.q)

    def grad(z: PhasePoint):
        return z.q.copy(), z.p.copy()

    return ConformalSystem(field=ScalarField(value=value, grad=grad),
                           c=-friction, z0=np.array([1.0, 0.0]),
                           name="damped-oscillator")


def measure_kinetic_weight(action: ScalingAction, mass_matrix, *,
                           seed: int = 0) -> float:
    """Kinetic weight a with K(T Psi_g v) = g^a K(v), measured at probes.

    Fits a from the first probe and checks consistency across further
    probes and group elements; raises SchemaError when no single weight fits.
    """
    M = np.asarray(mass_matrix, dtype=float)
    rng = np.random.default_rng(seed)
    a_ref = None
    for _ in range(8):
        q = rng.uniform(-1.0, 1.0, size=action.n)
        v = rng.uniform(-1.0, 1.0, size=action.n)
        g = float(np.exp(rng.uniform(0.3, 1.0)))
        jac = config_jacobian(action, g, q)
        ratio = float((jac @ v) @ M @ (jac @ v)) / float(v @ M @ v)
        a = math.log(ratio) / math.log(g)
        if a_ref is None:
            a_ref = a
        elif abs(a - a_ref) > 1e-8 * max(1.0, abs(a_ref)):
            raise SchemaError(
                "kinetic energy has no single conformal weight under this action")
    # Strip measurement rounding when the weight is a half-integer.
    snapped = round(2.0 * a_ref) / 2.0
    return snapped if abs(snapped - a_ref) < 1e-9 else a_ref


def _nbody_probe(spec: NBodySpec, min_sep: float = 0.35):
    def probe(rng) -> PhasePoint:
        for _ in range(200):
            q = rng.uniform(-1.25, 1.25, size=spec.n)
            if min_pairwise_distance(spec, q) >= min_sep:
                return PhasePoint(q, rng.uniform(-1.25, 1.25, size=spec.n))
        raise RuntimeError("failed to draw a separated configuration")

    return probe


def _action_from_json(fragment: dict, n: int, *, default_b: float) -> ScalingAction:
    if fragment.get("kind", "dilation") != "dilation":
        raise SchemaError(f"unknown action kind {fragment.get('kind')!r}")
    weights = fragment.get("weights")
    if weights is None:
        weights = np.ones(n)
    else:
        weights = np.atleast_1d(np.asarray(weights, dtype=float))
        if weights.size == 1:
            weights = np.full(n, float(weights[0]))
        elif len(weights) != n:
            raise SchemaError(f"action weights length {len(weights)} != n={n}")
    if "c" not in fragment:
        raise SchemaError("explicit action fragment needs the exponent c")
    return ScalingAction.dilation(weights, float(fragment["c"]),
                                  float(fragment.get("b", default_b)))


def make_system(spec_json: dict, *, samples: int = 32, seed: int = 0,
                tol: float = 1e-6) -> BuiltSystem:
    """Construct (system, action) from a JSON-style dict and verify the pair.

    Schema: {"type": "nbody" | "homogeneous" | "anisotropic-kepler" |
    "damped-oscillator", "masses": [...], "dim": int, "alpha": real?,
    "mu": real?, "b": real?, "action": {...}?, "z0": [...]?}.  A failed
    symmetry verification is returned in the report, not raised.
    """
    if not isinstance(spec_json, dict) or "type" not in spec_json:
        raise SchemaError("system spec must be a dict with a 'type' key")
    kind = spec_json["type"]

    if kind == "damped-oscillator":
        if "b" not in spec_json:
            raise SchemaError("damped-oscillator spec needs the friction 'b'")
        system = damped_oscillator(float(spec_json["b"]))
        if spec_json.get("z0") is not None:
            system = ConformalSystem(field=system.field, c=system.c,
                                     z0=np.asarray(spec_json["z0"], float),
                                     name=system.name)
        return BuiltSystem(system=system, action=None, symmetry_report=None)

    if kind == "nbody":
        if "masses" not in spec_json:
            raise SchemaError("nbody spec needs 'masses'")
        spec = NBodySpec(masses=tuple(spec_json["masses"]),
                         dim=int(spec_json.get("dim", 3)))
        system = nbody_system(
            spec, collision_threshold=float(spec_json.get(
                "collision_threshold", 1e-6)))
        probe = _nbody_probe(spec)
        alpha = -1.0
    elif kind == "anisotropic-kepler":
        system = anisotropic_kepler_system(float(spec_json.get("mu", 2.0)))
        probe = None
        alpha = -1.0
    elif kind == "homogeneous":
        for key in ("alpha", "n"):
            if key not in spec_json:
                raise SchemaError(f"homogeneous spec needs '{key}'")
        alpha = float(spec_json["alpha"])
        if "potential" in spec_json:  # Python API path: callables supplied directly
            system = homogeneous_system(
                spec_json["potential"], spec_json["gradient"],
                int(spec_json["n"]), alpha,
                mass_matrix=spec_json.get("mass_matrix"))
        else:
            system = power_law_system(int(spec_json["n"]), alpha,
                                      k=float(spec_json.get("k", -1.0)),
                                      mass_matrix=spec_json.get("mass_matrix"))
        probe = None
    else:
        raise SchemaError(f"unknown system type {kind!r}")

    if spec_json.get("action") is not None:
        action = _action_from_json(spec_json["action"], system.n, default_b=alpha)
    else:
        trial = ScalingAction.uniform_dilation(system.n, 0.0, alpha)
        a = measure_kinetic_weight(trial, system.mass_matrix, seed=seed)
        action = ScalingAction.uniform_dilation(
            system.n, lift_exponent(a, alpha), alpha)

    report = verify_scaling_symmetry(action, system.hamiltonian_field(),
                                     samples=samples, seed=seed, tol=tol,
                                     probe=probe)
    return BuiltSystem(system=system, action=action, symmetry_report=report)


def lagrange_triangle(masses, side: float = 1.0) -> np.ndarray:
    """Equilateral triangle of the given side with weighted centroid at 0.

    A central configuration for any positive masses; returned flat in the
    plane (length 6).
    """
    if side <= 0:
        raise ValueError("side must be positive")
    m = np.asarray(masses, dtype=float)
    if m.shape != (3,) or np.any(m <= 0):
        raise ValueError("need three positive masses")
    verts = side * np.array([[0.0, 0.0],
                             [1.0, 0.0],
                             [0.5, math.sqrt(3.0) / 2.0]])
    verts -= (m @ verts) / m.sum()
    return verts.ravel()


def euler_collinear_oracle(masses, *, tol: float = 1e-12) -> float:
    """Interior position ratio of the collinear central configuration.

    Bodies sit on a line at 0, x, 1 in the order given; the balance
    residual is the first component of the central-configuration equation
    (Kepler exponents, xi^2 eliminated through the homogeneity identity),
    which changes sign exactly once on (0, 1).  Bisection, not the
    shape-space solver, so the two can cross-validate each other.
    """
    m = np.asarray(masses, dtype=float)
    if m.shape != (3,) or np.any(m <= 0):
        raise ValueError("need three positive masses")
    spec = NBodySpec(masses=tuple(m), dim=1)
    system = nbody_system(spec, collision_threshold=1e-9)
    action = ScalingAction.uniform_dilation(3, 0.5, -1.0)

    def balance(x: float) -> float:
        y = np.array([0.0, x, 1.0])
        q = y - (m @ y) / m.sum()
        xi = math.sqrt(xi_squared_from_config(system, q))
        return float(central_config_residual(system, action, xi, q)[0])

    lo, hi = 1e-6, 1.0 - 1e-6
    f_lo, f_hi = balance(lo), balance(hi)
    if f_lo * f_hi > 0:
        raise RuntimeError("no sign change on (0, 1); cannot bracket the root")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = balance(mid)
        if f_mid == 0.0:
            return mid
        if f_lo * f_mid < 0:
            hi, f_hi = mid, f_mid
        else:
            lo, f_lo = mid, f_mid
    return 0.5 * (lo + hi)
