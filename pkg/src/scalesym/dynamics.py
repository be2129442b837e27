"""Time integration of conformal Hamiltonian systems and flow certification.

The integrator is classical fixed-step RK4 on the conformal vector field

    q' = dF/dp,    p' = -dF/dq + c p.

Fixed stepping keeps the time-t flow map a smooth function of the initial
state, so its Jacobian can be taken by central differences and tested
against the structural identities

    A^T Omega A = e^{ct} Omega,      det A = e^{nct},

and the energy-rate law dF/dt = c * theta(X_F^c) = c * p . dF/dp.

Each trajectory carries per-step diagnostics: the conformal Hamiltonian H,
the dilation momentum J, K = theta(X)/2 (the kinetic energy for simple
mechanical systems), and the running trapezoid quadrature of theta(X),
which feeds the generalized Noether constant

    F = J + b H t - c * int_0^t theta(X_H) dt.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .errors import BlowupWindow, DimensionMismatch, NonFiniteValue, UncertifiedInput
from .phase import PhasePoint, ScalarField, _representable_step, omega_matrix
from .scaling import ScalingAction, act_phase, momentum_map


@dataclass(frozen=True)
class Trajectory:
    """Time-stamped phase points with per-step diagnostics.

    All rows share one uniform step.  ``momentum`` is the action's J when
    one was supplied to ``integrate``, else the uniform-dilation momentum
    p . q (so the column is always total).
    """

    times: np.ndarray          # (m+1,)
    qs: np.ndarray             # (m+1, n)
    ps: np.ndarray             # (m+1, n)
    energy: np.ndarray         # H(z_k)
    momentum: np.ndarray       # J(z_k)
    kinetic: np.ndarray        # theta(X)/2 at z_k
    int_theta: np.ndarray      # trapezoid of theta(X) on [0, t_k]

    def __post_init__(self):
        if not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        for name in ("times", "qs", "ps", "energy", "momentum", "kinetic",
                     "int_theta"):
            arr = getattr(self, name)
            if not np.isfinite(arr).all():
                raise NonFiniteValue(f"trajectory field {name} has non-finite entries")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n(self) -> int:
        return self.qs.shape[1]

    def state(self, k: int) -> PhasePoint:
        return PhasePoint(self.qs[k], self.ps[k])

    @property
    def final_state(self) -> PhasePoint:
        return self.state(len(self) - 1)


@dataclass(frozen=True)
class FlowReport:
    """Defects of the flow-level identities, with the settings that produced them."""

    t: float
    dt: float
    conformal_defect: float | None = None   # max |A^T Omega A - e^{ct} Omega|
    volume_defect: float | None = None      # |det A - e^{nct}|
    energy_rate_defect: float | None = None # max |dF/dt - c theta(X)|
    noether_drift: float | None = None      # max |F(t_k) - F(0)|
    homothetic_deviation: float | None = None
    tolerance: float | None = None          # the bound the caller judged against

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value is not None and not np.isfinite(value):
                raise NonFiniteValue(f"flow report field {name} is not finite")

    def to_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def _vector_field(F: ScalarField, c: float) -> Callable[[np.ndarray], np.ndarray]:
    def X(flat: np.ndarray) -> np.ndarray:
        z = PhasePoint.from_flat(flat)
        gq, gp = F.grad(z)
        return np.concatenate((gp, -np.asarray(gq, float) + c * z.p))

    return X


def _step_count(t_final: float, dt: float) -> int:
    if dt <= 0 or t_final < 0:
        raise ValueError("need dt > 0 and t_final >= 0")
    m = round(t_final / dt)
    if abs(m * dt - t_final) > 1e-9 * max(dt, t_final):
        raise ValueError(f"t_final={t_final} is not a multiple of dt={dt}")
    return m


def integrate(F: ScalarField, c: float, z0: PhasePoint, t_final: float,
              dt: float, *, action: ScalingAction | None = None,
              guard: Callable[[PhasePoint], None] | None = None) -> Trajectory:
    """Integrate the conformal vector field of F with classical RK4.

    ``guard`` (e.g. a collision check for n-body potentials) is invoked on
    every stored state and may raise to abort the run.
    """
    m = _step_count(t_final, dt)
    X = _vector_field(F, c)
    n = z0.n

    times = np.empty(m + 1)
    qs = np.empty((m + 1, n))
    ps = np.empty((m + 1, n))
    energy = np.empty(m + 1)
    momentum = np.empty(m + 1)
    theta_rate = np.empty(m + 1)
    int_theta = np.empty(m + 1)

    def record(k: int, t: float, flat: np.ndarray, xdot: np.ndarray):
        # theta(X) = p . dF/dp and dq/dt = dF/dp, so reuse the node's X eval.
        if not np.isfinite(flat).all():
            raise NonFiniteValue(f"state became non-finite at t={t}")
        z = PhasePoint.from_flat(flat)
        if guard is not None:
            guard(z)
        times[k] = t
        qs[k] = z.q
        ps[k] = z.p
        energy[k] = F.value(z)
        momentum[k] = momentum_map(action, z) if action is not None else float(z.p @ z.q)
        theta_rate[k] = float(z.p @ xdot[:n])

    flat = z0.flat()
    xdot = X(flat)
    record(0, 0.0, flat, xdot)
    int_theta[0] = 0.0
    for k in range(1, m + 1):
        k1 = xdot
        k2 = X(flat + 0.5 * dt * k1)
        k3 = X(flat + 0.5 * dt * k2)
        k4 = X(flat + dt * k3)
        flat = flat + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        xdot = X(flat)
        record(k, k * dt, flat, xdot)
        int_theta[k] = int_theta[k - 1] + 0.5 * dt * (theta_rate[k - 1] + theta_rate[k])

    return Trajectory(times=times, qs=qs, ps=ps, energy=energy,
                      momentum=momentum, kinetic=theta_rate / 2.0,
                      int_theta=int_theta)


def flow_jacobian(F: ScalarField, c: float, z0: PhasePoint, t: float,
                  dt: float, *, guard=None) -> np.ndarray:
    """Central-difference Jacobian of the time-t flow map at z0 (2n x 2n)."""
    flat0 = z0.flat()
    dim = 2 * z0.n
    cols = np.empty((dim, dim))

    def flow_from(start: np.ndarray) -> np.ndarray:
        traj = integrate(F, c, PhasePoint.from_flat(start), t, dt, guard=guard)
        return traj.final_state.flat()

    for i in range(dim):
        h = _representable_step(flat0[i])
        plus = flat0.copy()
        minus = flat0.copy()
        plus[i] += h
        minus[i] -= h
        cols[:, i] = (flow_from(plus) - flow_from(minus)) / (2.0 * h)
    return cols


def verify_conformal_flow(F: ScalarField, c: float, z0: PhasePoint, t: float,
                          dt: float, *, guard=None) -> FlowReport:
    """Certify conformality, volume scaling, and the energy-rate law at time t.

    The flow Jacobian A is taken by finite differences; the report carries

        max |A^T Omega A - e^{ct} Omega|,   |det A - e^{nct}|,

    (n the configuration dimension) and the max pointwise defect of
    dF/dt - c theta(X) along the trajectory from z0.
    """
    n = z0.n
    A = flow_jacobian(F, c, z0, t, dt, guard=guard)
    omega = omega_matrix(n)
    factor = float(np.exp(c * t))
    conformal = float(np.max(np.abs(A.T @ omega @ A - factor * omega)))
    volume = float(abs(np.linalg.det(A) - np.exp(n * c * t)))

    traj = integrate(F, c, z0, t, dt, guard=guard)
    dF_dt = np.gradient(traj.energy, traj.times)
    rate = c * 2.0 * traj.kinetic
    # np.gradient is first-order at the ends; compare interior nodes only.
    energy_rate = float(np.max(np.abs(dF_dt[1:-1] - rate[1:-1]))) if len(traj) > 2 \
        else float(np.max(np.abs(dF_dt - rate)))

    return FlowReport(t=t, dt=dt, conformal_defect=conformal,
                      volume_defect=volume, energy_rate_defect=energy_rate)


class NoetherSeries(NamedTuple):
    values: np.ndarray
    drift: float


def noether_series(H: ScalarField, action: ScalingAction,
                   traj: Trajectory) -> NoetherSeries:
    """The conserved combination F = J + b H t - c int theta(X_H) dt along a
    Hamiltonian (c = 0) trajectory, and its max drift from F(0).
    """
    J = np.array([momentum_map(action, traj.state(k)) for k in range(len(traj))])
    F = J + action.b * traj.energy * traj.times - action.c * traj.int_theta
    return NoetherSeries(values=F, drift=float(np.max(np.abs(F - F[0]))))


def homothetic_factor(action: ScalingAction, xi: float, t) -> np.ndarray:
    """Group trajectory eta(t) of a relative equilibrium.

    eta(t) = [(c - b) xi t + 1]^{1/(c-b)} for b != c, e^{xi t} for b = c.
    Raises BlowupWindow when the window reaches the root of the bracket.
    """
    t = np.asarray(t, dtype=float)
    c, b = action.c, action.b
    if np.isclose(b, c):
        return np.exp(xi * t)
    base = (c - b) * xi * t + 1.0
    if np.any(base <= 0.0):
        t_star = 1.0 / ((b - c) * xi)
        raise BlowupWindow(
            f"window reaches the homothetic blow-up time t* = {t_star:.6g}")
    return base ** (1.0 / (c - b))


def verify_homothetic_orbit(H: ScalarField, action: ScalingAction, re,
                            t_final: float, dt: float, *,
                            guard=None) -> FlowReport:
    """Compare the Hamiltonian trajectory from a certified relative
    equilibrium with its group orbit Phi_{eta(t)}(z_e).

    Reports the max over stored times of the relative deviation
    ||z_num(t) - Phi_{eta(t)} z_e|| / max(1, ||Phi_{eta(t)} z_e||).
    """
    if not re.certified:
        raise UncertifiedInput("relative equilibrium is not certified")
    z_e = PhasePoint(re.q, re.p)
    if z_e.n != action.n:
        raise DimensionMismatch("equilibrium dimension does not match action")
    # Guard the whole window before integrating.
    homothetic_factor(action, re.xi, np.array([0.0, t_final]))

    traj = integrate(H, 0.0, z_e, t_final, dt, action=action, guard=guard)
    eta = homothetic_factor(action, re.xi, traj.times)
    worst = 0.0
    for k in range(len(traj)):
        ref = act_phase(action, float(eta[k]), z_e).flat()
        num = traj.state(k).flat()
        dev = float(np.linalg.norm(num - ref)) / max(1.0, float(np.linalg.norm(ref)))
        worst = max(worst, dev)
    return FlowReport(t=t_final, dt=dt, homothetic_deviation=worst)
