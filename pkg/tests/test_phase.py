import numpy as np
import pytest

from scalesym import (
    DimensionMismatch,
    NonFiniteValue,
    PhasePoint,
    ScalarField,
    TangentVector,
    canonical_omega,
    canonical_theta,
    check_gradient,
    conformal_vector_field,
    fd_gradient,
    momentum_field,
    omega_matrix,
)
from scalesym.scaling import ScalingAction

from conftest import random_phase_point


def test_theta_hand_value():
    z = PhasePoint([1.0, 2.0], [3.0, 4.0])
    v = TangentVector([1.0, 0.0], [7.0, 7.0])
    assert canonical_theta(z, v) == 3.0


def test_theta_zero_momentum():
    z = PhasePoint([2.0, -1.0, 5.0], [0.0, 0.0, 0.0])
    v = TangentVector([1.0, 2.0, 3.0], [4.0, 5.0, 6.0])
    assert canonical_theta(z, v) == 0.0


def test_theta_ignores_dp():
    z = PhasePoint([1.0, 1.0], [9.0, -3.0])
    v = TangentVector([0.0, 0.0], [100.0, 100.0])
    assert canonical_theta(z, v) == 0.0


def test_omega_basis_pair():
    u = TangentVector([1.0, 0.0], [0.0, 0.0])
    v = TangentVector([0.0, 0.0], [1.0, 0.0])
    assert canonical_omega(u, v) == 1.0
    assert canonical_omega(v, u) == -1.0


def test_omega_vanishes_on_diagonal():
    rng = np.random.default_rng(0)
    for _ in range(10):
        u = TangentVector(rng.normal(size=4), rng.normal(size=4))
        assert canonical_omega(u, u) == 0.0


def test_omega_antisymmetric_bilinear():
    rng = np.random.default_rng(1)
    for _ in range(25):
        u = TangentVector(rng.normal(size=3), rng.normal(size=3))
        v = TangentVector(rng.normal(size=3), rng.normal(size=3))
        w = TangentVector(rng.normal(size=3), rng.normal(size=3))
        a, b = rng.normal(size=2)
        assert canonical_omega(u, v) == pytest.approx(-canonical_omega(v, u), abs=1e-14)
        combo = TangentVector(a * v.dq + b * w.dq, a * v.dp + b * w.dp)
        assert canonical_omega(u, combo) == pytest.approx(
            a * canonical_omega(u, v) + b * canonical_omega(u, w), abs=1e-12)


def test_omega_nondegenerate_on_coordinate_basis():
    # every nonzero u pairs nontrivially with some basis vector
    rng = np.random.default_rng(2)
    n = 4
    basis = [TangentVector.from_flat(e) for e in np.eye(2 * n)]
    for _ in range(20):
        u = TangentVector.from_flat(rng.normal(size=2 * n))
        assert max(abs(canonical_omega(u, e)) for e in basis) > 0.0


def test_omega_matches_matrix():
    rng = np.random.default_rng(3)
    n = 3
    omega = omega_matrix(n)
    for _ in range(10):
        u = rng.normal(size=2 * n)
        v = rng.normal(size=2 * n)
        assert canonical_omega(TangentVector.from_flat(u), TangentVector.from_flat(v)) \
            == pytest.approx(u @ omega @ v, rel=1e-13)


def test_conformal_field_kepler_momentum():
    # J_xi = xi p.q with parameter xi c = xi/2 gives (xi q, -xi p / 2)
    action = ScalingAction.uniform_dilation(1, 0.5, -1.0)
    field = momentum_field(action, 1.0)
    v = conformal_vector_field(field, 0.5, PhasePoint([2.0], [4.0]))
    assert v.dq == pytest.approx([2.0])
    assert v.dp == pytest.approx([-2.0])


def test_conformal_field_free_particle():
    free = ScalarField(value=lambda z: 0.5 * float(z.p @ z.p),
                       grad=lambda z: (np.zeros(z.n), z.p.copy()))
    v = conformal_vector_field(free, 0.0, PhasePoint([3.0, 1.0], [2.0, -1.0]))
    assert v.dq == pytest.approx([2.0, -1.0])
    assert v.dp == pytest.approx([0.0, 0.0])


def test_conformal_field_damped_oscillator_point():
    osc = ScalarField(value=lambda z: 0.5 * float(z.p @ z.p) + 0.5 * float(z.q @ z.q),
                      grad=lambda z: (z.q.copy(), z.p.copy()))
    v = conformal_vector_field(osc, -0.1, PhasePoint([1.0], [2.0]))
    assert v.dq == pytest.approx([2.0])
    assert v.dp == pytest.approx([-1.2])


def test_defining_identity_hamiltonian_case():
    # omega(X_F^0, v) = dF(v) for the analytic oscillator field
    osc = ScalarField(value=lambda z: 0.5 * float(z.p @ z.p) + 0.5 * float(z.q @ z.q),
                      grad=lambda z: (z.q.copy(), z.p.copy()))
    rng = np.random.default_rng(4)
    for _ in range(50):
        z = random_phase_point(rng, 2)
        v = TangentVector(rng.normal(size=2), rng.normal(size=2))
        x = conformal_vector_field(osc, 0.0, z)
        gq, gp = osc.grad(z)
        dF_v = gq @ v.dq + gp @ v.dp
        assert canonical_omega(x, v) == pytest.approx(dF_v, abs=1e-10)


def test_defining_identity_conformal_case():
    # omega(X_F^c, v) + c theta(v) = dF(v), the defining identity
    osc = ScalarField(value=lambda z: 0.5 * float(z.p @ z.p) + 0.5 * float(z.q @ z.q),
                      grad=lambda z: (z.q.copy(), z.p.copy()))
    rng = np.random.default_rng(5)
    for c in (-0.3, 0.5, 2.0):
        for _ in range(25):
            z = random_phase_point(rng, 3)
            v = TangentVector(rng.normal(size=3), rng.normal(size=3))
            x = conformal_vector_field(osc, c, z)
            gq, gp = osc.grad(z)
            dF_v = gq @ v.dq + gp @ v.dp
            assert canonical_omega(x, v) + c * canonical_theta(z, v) \
                == pytest.approx(dF_v, abs=1e-10)


def test_fd_gradient_exact_on_quadratic():
    assert fd_gradient(lambda x: x[0] ** 2, np.array([3.0])) == pytest.approx([6.0])


def test_fd_gradient_constant():
    g = fd_gradient(lambda x: 7.5, np.array([1.0, -2.0, 0.0]))
    assert g == pytest.approx([0.0, 0.0, 0.0])


def test_fd_gradient_two_body_potential():
    from scalesym import NBodySpec, nbody_potential_and_gradient

    spec = NBodySpec((1.0, 1.0), dim=3)
    q = np.array([0.5, 0.0, 0.0, -0.5, 0.0, 0.0])
    g = fd_gradient(lambda x: nbody_potential_and_gradient(spec, x)[0], q)
    assert g[:3] == pytest.approx([1.0, 0.0, 0.0], abs=1e-6)


def test_fd_gradient_rejects_nonfinite():
    with pytest.raises(NonFiniteValue):
        fd_gradient(lambda x: 1.0 / (x[0] - 1.0) if x[0] <= 1.0 else np.inf,
                    np.array([1.0]))


def test_analytic_gradients_match_fd():
    # the package-wide gradient contract: 1e-6 relative at 100 probes
    from scalesym import NBodySpec, nbody_system

    system = nbody_system(NBodySpec((1.0, 2.0), dim=2))
    rng = np.random.default_rng(6)
    points = []
    while len(points) < 100:
        z = random_phase_point(rng, 4)
        if np.linalg.norm(z.q[:2] - z.q[2:]) > 0.4:
            points.append(z)
    assert check_gradient(system.hamiltonian_field(), points) < 1e-6


def test_scalar_field_from_value():
    field = ScalarField.from_value(lambda z: float(z.q @ z.p))
    gq, gp = field.grad(PhasePoint([1.0, 2.0], [3.0, 4.0]))
    assert gq == pytest.approx([3.0, 4.0], abs=1e-8)
    assert gp == pytest.approx([1.0, 2.0], abs=1e-8)


def test_dimension_mismatch_raises():
    z = PhasePoint([1.0], [2.0])
    v = TangentVector([1.0, 0.0], [0.0, 0.0])
    with pytest.raises(DimensionMismatch):
        canonical_theta(z, v)
    with pytest.raises(DimensionMismatch):
        canonical_omega(v, TangentVector([1.0], [0.0]))
    with pytest.raises(DimensionMismatch):
        PhasePoint([1.0, 2.0], [3.0])


def test_nonfinite_phase_point_rejected():
    with pytest.raises(NonFiniteValue):
        PhasePoint([np.nan], [1.0])
    with pytest.raises(NonFiniteValue):
        TangentVector([1.0], [np.inf])


def test_conformal_field_rejects_nonfinite_gradient():
    bad = ScalarField(value=lambda z: 0.0,
                      grad=lambda z: (np.full(z.n, np.nan), z.p.copy()))
    with pytest.raises(NonFiniteValue):
        conformal_vector_field(bad, 0.0, PhasePoint([1.0], [1.0]))
