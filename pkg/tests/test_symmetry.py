import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sympulse.cotangent_lift import HamiltonianSystem
from sympulse.discretization import check_symmetry_preservation, matrix_exp, midpoint_map
from sympulse.geometry_core import PhasePoint
from sympulse.integrator import integrate
from sympulse.problems import kepler2d
from sympulse.symmetry import (
    AlgebraElement,
    cotangent_lift_action,
    general_linear_action,
    hamiltonian_invariance_check,
    infinitesimal_generator,
    momentum,
    momentum_drift,
    random_rotation,
    rotation_action,
    so2_generator,
)


def test_lift_identity():
    z = PhasePoint([1.0, 2.0], [3.0, 4.0])
    assert cotangent_lift_action(np.eye(2), z) == z


def test_lift_rotation_preserves_pairing():
    rng = np.random.default_rng(0)
    for _ in range(20):
        M = random_rotation(3, rng)
        z = PhasePoint(rng.standard_normal(3), rng.standard_normal(3))
        w = cotangent_lift_action(M, z)
        assert w.p @ w.q == pytest.approx(z.p @ z.q, abs=1e-12)


def test_lift_diagonal():
    w = cotangent_lift_action(np.diag([2.0, 1.0]), PhasePoint([1.0, 1.0], [1.0, 1.0]))
    assert np.allclose(w.q, [2.0, 1.0]) and np.allclose(w.p, [0.5, 1.0])


def test_lift_singular():
    with pytest.raises(ValueError):
        cotangent_lift_action(np.zeros((2, 2)), PhasePoint([1.0, 1.0], [1.0, 1.0]))


def test_generator_values():
    assert np.all(infinitesimal_generator(AlgebraElement(np.zeros((2, 2))), [1.0, 2.0]) == 0)
    assert np.allclose(infinitesimal_generator(so2_generator(), [1.0, 0.0]), [0.0, 1.0])
    with pytest.raises(ValueError):
        infinitesimal_generator(so2_generator(), [1.0, 0.0, 0.0])


def test_generator_is_flow_derivative():
    rng = np.random.default_rng(1)
    for _ in range(20):
        m = AlgebraElement(rng.standard_normal((3, 3)))
        q = rng.standard_normal(3)
        t = 1e-4
        fd = (matrix_exp(t * m.m) @ q - matrix_exp(-t * m.m) @ q) / (2 * t)
        assert np.allclose(infinitesimal_generator(m, q), fd, atol=1e-8)


def test_planar_angular_momentum():
    assert momentum(so2_generator(), PhasePoint([1.0, 0.0], [0.0, 3.0])) == 3.0
    rng = np.random.default_rng(2)
    for _ in range(10):
        q, p = rng.standard_normal(2), rng.standard_normal(2)
        assert momentum(so2_generator(), PhasePoint(q, p)) == pytest.approx(q[0] * p[1] - q[1] * p[0])


def test_momentum_zero_p():
    assert momentum(so2_generator(), PhasePoint([1.0, 2.0], [0.0, 0.0])) == 0.0


def test_momentum_equivariance_rotations():
    rng = np.random.default_rng(3)
    m = so2_generator()
    for _ in range(50):
        M = matrix_exp(rng.uniform(-3, 3) * m.m)
        z = PhasePoint(rng.standard_normal(2), rng.standard_normal(2))
        assert momentum(m, cotangent_lift_action(M, z)) == pytest.approx(momentum(m, z), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_momentum_bilinear(seed, a, b):
    rng = np.random.default_rng(seed)
    m1, m2 = AlgebraElement(rng.standard_normal((2, 2))), AlgebraElement(rng.standard_normal((2, 2)))
    q, p1, p2 = (rng.standard_normal(2) for _ in range(3))
    mix = AlgebraElement(a * m1.m + b * m2.m)
    lhs = momentum(mix, PhasePoint(q, p1))
    rhs = a * momentum(m1, PhasePoint(q, p1)) + b * momentum(m2, PhasePoint(q, p1))
    assert lhs == pytest.approx(rhs, abs=1e-9)
    lhs = momentum(m1, PhasePoint(q, a * p1 + b * p2))
    rhs = a * momentum(m1, PhasePoint(q, p1)) + b * momentum(m1, PhasePoint(q, p2))
    assert lhs == pytest.approx(rhs, abs=1e-9)


def test_drift_single_state():
    drift, series = momentum_drift([PhasePoint([1.0, 0.0], [0.0, 1.0])], so2_generator())
    assert drift == 0.0 and series.tolist() == [0.0]


def test_drift_square_map_contrast():
    from sympulse.discretization import square_perturbed_map
    prob = kepler2d()
    traj = integrate(square_perturbed_map(2), prob.hamiltonian, 0.01, 1000, prob.initial)
    assert traj.completed
    assert momentum_drift(traj, so2_generator())[0] > 1e-5


def test_invariance_kepler():
    prob = kepler2d()
    report = hamiltonian_invariance_check(prob.hamiltonian, so2_generator(), samples=200,
                                          tol=1e-10, rng=0, sampler=prob.sample_state)
    assert report.max_defect < 1e-10 and report.passed


def test_invariance_kepler_fd_gradient():
    H = HamiltonianSystem(2, lambda q, p: 0.5 * float(p @ p) - 1 / np.linalg.norm(q))
    report = hamiltonian_invariance_check(H, so2_generator(), samples=50, tol=1e-7,
                                          rng=0, sampler=kepler2d().sample_state)
    assert report.passed


def test_invariance_zero_algebra():
    H = HamiltonianSystem(2, lambda q, p: float(q[0] * p[1] + np.sin(q[1])))
    report = hamiltonian_invariance_check(H, AlgebraElement(np.zeros((2, 2))), samples=10, rng=0)
    assert report.max_defect == 0.0


def test_invariance_fails_for_non_invariant():
    H = HamiltonianSystem(2, lambda q, p: float(q[0]), lambda q, p: (np.array([1.0, 0.0]), np.zeros(2)))
    report = hamiltonian_invariance_check(H, so2_generator(), samples=10, rng=0)
    assert report.max_defect > 0.1 and not report.passed


def test_conservation_chain():
    """Invariant H plus symmetry-preserving map gives drift at solver tolerance."""
    prob = kepler2d()
    action, m = prob.symmetry
    R = midpoint_map(2)
    assert hamiltonian_invariance_check(prob.hamiltonian, m, rng=0, sampler=prob.sample_state).passed
    assert check_symmetry_preservation(R, action, rng=0).passed
    steps = 300
    traj = integrate(R, prob.hamiltonian, 0.02, steps, prob.initial)
    drift, _ = momentum_drift(traj, m)
    assert drift < 10 * 1e-12 * steps


def test_action_samplers():
    rng = np.random.default_rng(4)
    for action in (rotation_action(3), general_linear_action(3)):
        for _ in range(20):
            M = action.sample_group_element(rng)
            assert np.linalg.cond(M) < 1e8
    R = random_rotation(3, rng)
    assert np.allclose(R.T @ R, np.eye(3)) and np.linalg.det(R) == pytest.approx(1.0)
