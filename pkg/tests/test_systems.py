import math

import numpy as np
import pytest

from scalesym import (
    CollisionDetected,
    ConformalSystem,
    NBodySpec,
    PhasePoint,
    SchemaError,
    ScalingAction,
    central_config_residual,
    collision_guard,
    damped_oscillator,
    euler_collinear_oracle,
    fd_gradient,
    integrate,
    lagrange_triangle,
    make_system,
    measure_kinetic_weight,
    min_pairwise_distance,
    nbody_potential_and_gradient,
    nbody_system,
    solve_central_configuration,
    verify_scaling_symmetry,
    xi_squared_from_config,
)

from conftest import kepler_action


# --- n-body potential -------------------------------------------------------

def test_two_body_potential_hand_values():
    spec = NBodySpec((1.0, 1.0), dim=3)
    q = np.array([0.5, 0.0, 0.0, -0.5, 0.0, 0.0])
    value, grad = nbody_potential_and_gradient(spec, q)
    assert value == pytest.approx(-1.0)
    assert grad[:3] == pytest.approx([1.0, 0.0, 0.0])


def test_triangle_potential_hand_values():
    spec = NBodySpec((1.0, 1.0, 1.0), dim=2)
    q = lagrange_triangle([1.0, 1.0, 1.0], 1.0)
    value, grad = nbody_potential_and_gradient(spec, q)
    assert value == pytest.approx(-3.0)
    assert grad == pytest.approx(3.0 * q, abs=1e-12)


def test_nbody_gradient_matches_fd():
    spec = NBodySpec((1.0, 2.0, 0.7), dim=3)
    rng = np.random.default_rng(14)
    checked = 0
    while checked < 20:
        q = rng.uniform(-1.0, 1.0, size=spec.n)
        if min_pairwise_distance(spec, q) < 0.4:
            continue
        _, grad = nbody_potential_and_gradient(spec, q)
        fd = fd_gradient(lambda x: nbody_potential_and_gradient(spec, x)[0], q)
        scale = max(1.0, np.max(np.abs(fd)))
        assert np.max(np.abs(grad - fd)) / scale < 1e-6
        checked += 1


def test_nbody_gradient_translation_invariant():
    spec = NBodySpec((1.0, 2.0, 3.0), dim=2)
    rng = np.random.default_rng(15)
    for _ in range(5):
        q = rng.uniform(-1.0, 1.0, size=spec.n)
        if min_pairwise_distance(spec, q) < 0.3:
            continue
        _, grad = nbody_potential_and_gradient(spec, q)
        sums = grad.reshape(spec.bodies, spec.dim).sum(axis=0)
        assert np.max(np.abs(sums)) < 1e-12


def test_nbody_homogeneity_euler_identity():
    # q . grad U = alpha U with alpha = -1
    spec = NBodySpec((1.0, 1.0, 2.0), dim=3)
    rng = np.random.default_rng(16)
    for _ in range(5):
        q = rng.uniform(-1.0, 1.0, size=spec.n)
        if min_pairwise_distance(spec, q) < 0.3:
            continue
        value, grad = nbody_potential_and_gradient(spec, q)
        assert q @ grad == pytest.approx(-value, abs=1e-10)


def test_nbody_collision_threshold():
    spec = NBodySpec((1.0, 1.0), dim=2)
    with pytest.raises(CollisionDetected):
        nbody_potential_and_gradient(spec, np.array([0.0, 0.0, 1e-8, 0.0]))


def test_collision_guard_stops_freefall():
    # two bodies released at rest collapse within t < 1
    spec = NBodySpec((1.0, 1.0), dim=3)
    system = nbody_system(spec)
    z0 = PhasePoint([0.5, 0, 0, -0.5, 0, 0], np.zeros(6))
    with pytest.raises(CollisionDetected):
        integrate(system.hamiltonian_field(), 0.0, z0, 1.0, 1e-4,
                  guard=collision_guard(spec, 1e-2))


# --- make_system --------------------------------------------------------------

def test_make_system_nbody_gets_kepler_exponents():
    built = make_system({"type": "nbody", "masses": [1, 1, 1], "dim": 3})
    assert built.action.c == pytest.approx(0.5)
    assert built.action.b == pytest.approx(-1.0)
    assert built.symmetry_report.passed


def test_make_system_degree_minus_two_is_symplectic():
    built = make_system({"type": "homogeneous", "alpha": -2, "n": 2})
    assert built.action.c == pytest.approx(0.0)
    assert built.action.b == pytest.approx(-2.0)
    assert built.symmetry_report.passed


def test_make_system_damped_oscillator():
    built = make_system({"type": "damped-oscillator", "b": 0.1})
    assert isinstance(built.system, ConformalSystem)
    assert built.system.c == pytest.approx(-0.1)
    assert built.action is None and built.symmetry_report is None


def test_make_system_reports_wrong_exponent_without_raising():
    built = make_system({"type": "nbody", "masses": [1, 1], "dim": 2,
                         "action": {"kind": "dilation", "c": 1.0, "b": -1.0}})
    assert not built.symmetry_report.passed
    assert built.symmetry_report.check("invariance").max_residual > 0.1


@pytest.mark.parametrize("bad", [
    {},                                              # no type
    {"type": "unknown"},
    {"type": "nbody"},                               # no masses
    {"type": "nbody", "masses": [1, -1]},
    {"type": "damped-oscillator"},                   # no friction
    {"type": "homogeneous", "alpha": -1},            # no n
    {"type": "nbody", "masses": [1, 1], "dim": 2,
     "action": {"kind": "dilation", "weights": [1, 2, 3], "c": 0.5}},
])
def test_make_system_schema_errors(bad):
    with pytest.raises(SchemaError):
        make_system(bad)


def test_measure_kinetic_weight_uniform_dilation():
    action = ScalingAction.uniform_dilation(4, 0.0, -1.0)
    assert measure_kinetic_weight(action, np.diag([1.0, 1.0, 2.0, 2.0])) == 2.0


def test_measure_kinetic_weight_rejects_mixed_weights():
    action = ScalingAction.dilation([1.0, 2.0], c=0.0, b=0.0)
    with pytest.raises(SchemaError):
        measure_kinetic_weight(action, np.eye(2))


# --- anisotropic Kepler ---------------------------------------------------------

def test_anisotropic_kepler_is_a_scaling_symmetry():
    built = make_system({"type": "anisotropic-kepler", "mu": 2.0})
    assert built.action.c == pytest.approx(0.5)
    assert built.symmetry_report.passed


def test_anisotropic_kepler_axis_central_configuration():
    built = make_system({"type": "anisotropic-kepler", "mu": 2.0})
    system, action = built.system, built.action
    result = solve_central_configuration(system, action, np.array([1.0, 0.05]),
                                         verify_symmetry=False)
    assert result.certified
    # converges onto the strong axis; same residual equation as n-body
    assert abs(result.q[1]) < 1e-9
    res = central_config_residual(system, action, result.xi, result.q)
    assert np.max(np.abs(res)) < 1e-10


# --- oracles -----------------------------------------------------------------

def test_euler_oracle_symmetric_masses():
    assert euler_collinear_oracle((1.0, 1.0, 1.0)) == pytest.approx(0.5, abs=1e-9)
    assert euler_collinear_oracle((1.0, 2.0, 1.0)) == pytest.approx(0.5, abs=1e-9)


def test_lagrange_triangle_unit_masses(triangle):
    _, system, action, q = triangle
    assert xi_squared_from_config(system, q) == pytest.approx(6.0)
    res = central_config_residual(system, action, math.sqrt(6.0), q)
    assert np.max(np.abs(res)) < 1e-12


def test_lagrange_triangle_any_masses():
    # the equilateral triangle is a central configuration for every mass triple
    masses = (1.0, 2.0, 3.0)
    system = nbody_system(NBodySpec(masses, dim=2))
    q = lagrange_triangle(masses, 1.0)
    assert np.abs(q.reshape(3, 2).T @ np.array(masses)).max() < 1e-14
    xi2 = xi_squared_from_config(system, q)
    res = central_config_residual(system, kepler_action(6), math.sqrt(xi2), q)
    assert np.max(np.abs(res)) < 1e-12


def test_lagrange_triangle_scaled_side():
    system = nbody_system(NBodySpec((1.0, 1.0, 1.0), dim=2))
    q = lagrange_triangle([1.0, 1.0, 1.0], 2.0)
    assert xi_squared_from_config(system, q) == pytest.approx(0.75)


# --- damped oscillator benchmark ----------------------------------------------

def test_damped_oscillator_definition():
    system = damped_oscillator(0.25)
    assert system.c == -0.25
    z = PhasePoint([1.0], [2.0])
    assert system.field.value(z) == pytest.approx(2.5)
    gq, gp = system.field.grad(z)
    assert gq == pytest.approx([1.0]) and gp == pytest.approx([2.0])


def test_shipped_systems_pass_verification():
    # every shipped mechanical system verifies at construction
    for spec in ({"type": "nbody", "masses": [1, 1], "dim": 2},
                 {"type": "nbody", "masses": [1.0, 2.0, 3.0], "dim": 3},
                 {"type": "homogeneous", "alpha": -1, "n": 3},
                 {"type": "anisotropic-kepler", "mu": 3.0}):
        built = make_system(spec)
        assert built.symmetry_report.passed, spec
