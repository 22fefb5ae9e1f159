import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from releq.errors import FdStepDegenerate, IntegrationBlowup, SymmetryViolation
from releq.models import complex_coords, default_wave_params, real_coords, wave_base_point, wave_system
from releq.system_model import (HamiltonianModel, PhaseSpace, SymmetrySpec, quadratic_system,
                                rotation_generator, standard_omega)


def rotation_system():
    """R^2 with the standard form and h = |z|^2/2, one S^1 rotating z."""
    space = PhaseSpace.standard(1)
    sym = SymmetrySpec(np.array([rotation_generator([1])]))
    return quadratic_system(np.eye(2), space, sym)


def test_momentum_of_rotation():
    s = rotation_system()
    z = np.array([0.6, -0.8])
    assert np.isclose(s.momentum(z)[0], 0.5)
    # X_J = A z
    np.testing.assert_allclose(s.space.omega_inv @ s.momentum_jacobian(z)[0],
                               s.generators[0] @ z)


def test_momentum_vector_field_is_generator(rng):
    s = wave_system()
    for _ in range(5):
        z = rng.normal(size=8)
        for i in range(2):
            np.testing.assert_allclose(s.space.omega_inv @ s.momentum_jacobian(z)[i],
                                       s.generators[i] @ z, atol=1e-12)


def test_wave_momentum_values():
    s = wave_system()
    z = real_coords(np.array([1 + 1j, 0.5, 2.0, -1j]))
    # J1 = |z1|^2 + 2|z3|^2, J2 = |z2|^2 + 2|z4|^2
    np.testing.assert_allclose(s.momentum(z), [2 + 8, 0.25 + 2])
    np.testing.assert_allclose(s.momentum(wave_base_point(1.0)), [2.0, 0.0])


def test_wave_gradient_matches_complex_equations(rng):
    """Euclidean gradient equals 2 (Re E_j, Im E_j) with E_j = dh/d conj(z_j) * 2."""
    p = default_wave_params()
    s = wave_system(p)
    for _ in range(10):
        w = rng.normal(size=4) + 1j * rng.normal(size=4)
        z = real_coords(w)
        X = np.abs(w) ** 2
        U1 = (w[0] ** 2 * np.conj(w[2])).real
        U2 = (w[1] ** 2 * np.conj(w[3])).real
        a = p.polynomial().gradient(np.array([*X, U1, U2]))
        E = np.array([
            a[0] * w[0] + a[4] * np.conj(w[0]) * w[2],
            a[1] * w[1] + a[5] * np.conj(w[1]) * w[3],
            a[2] * w[2] + 0.5 * a[4] * w[0] ** 2,
            a[3] * w[3] + 0.5 * a[5] * w[1] ** 2,
        ])
        np.testing.assert_allclose(s.hamiltonian.grad(z), 2 * real_coords(E), atol=1e-10)


def test_augmented_hessian_is_symmetric_and_matches_gradient(rng):
    s = wave_system()
    z = rng.normal(size=8) * 0.5
    xi = np.array([0.3, -0.2])
    H = s.augmented_hessian(z, xi)
    np.testing.assert_allclose(H, H.T)
    h = 1e-6
    fd = np.column_stack([(s.augmented_gradient(z + h * e, xi) - s.augmented_gradient(z - h * e, xi))
                          / (2 * h) for e in np.eye(8)])
    np.testing.assert_allclose(H, fd, atol=1e-6)


def test_orbit_tangent_columns():
    s = wave_system()
    z = wave_base_point(1.0)
    T = s.group_orbit_tangent(z)
    assert T.shape == (8, 2)
    # A1 rotates z3 at speed 2, A2 does not see it
    np.testing.assert_allclose(T[:, 0], [0, 0, 0, 0, 0, 2, 0, 0])
    np.testing.assert_allclose(T[:, 1], 0)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=8, max_size=8),
       st.lists(st.floats(-np.pi, np.pi, allow_nan=False), min_size=2, max_size=2))
def test_invariance_under_torus(zs, theta):
    s = wave_system()
    z = np.array(zs)
    g = s.group_element(np.array(theta))
    assert abs(s.hamiltonian.value(g @ z) - s.hamiltonian.value(z)) <= 1e-9 * (1 + abs(s.hamiltonian.value(z)))
    np.testing.assert_allclose(s.momentum(g @ z), s.momentum(z), atol=1e-10)


def test_drift_small_for_relative_equilibrium():
    s = wave_system()
    z = wave_base_point(1.0)
    rep = s.check_relative_equilibrium(z, np.array([1.0, 0.0]), t_max=1.0, steps=1000)
    assert rep.orbit_drift < 1e-11
    assert rep.momentum_drift < 1e-10


def test_drift_large_for_wrong_generator():
    s = wave_system()
    rep = s.check_relative_equilibrium(wave_base_point(1.0), np.array([0.7, 0.0]), 1.0, 200)
    assert rep.orbit_drift > 0.1


def test_drift_fourth_order_on_non_equilibrium():
    """Away from an equilibrium the RK4 error shrinks like dt^4."""
    s = rotation_system()
    z = np.array([1.0, 0.0])
    e1 = s.check_relative_equilibrium(z, np.array([1.0]), 1.0, 10).orbit_drift
    e2 = s.check_relative_equilibrium(z, np.array([1.0]), 1.0, 20).orbit_drift
    assert 12 < e1 / e2 < 20


def test_integration_blowup():
    s = quadratic_system(np.diag([-50.0, 50.0]))  # hyperbolic saddle
    with pytest.raises(IntegrationBlowup):
        s.check_relative_equilibrium(np.array([1.0, 0.0]), np.zeros(0), t_max=2.0, steps=200)


def test_fd_step_degenerate():
    m = HamiltonianModel(lambda z: z @ z, fd_step=1e-300)
    with pytest.raises(FdStepDegenerate):
        m.fd_gradient(np.ones(2))


def test_fd_fallback_when_no_analytic_derivatives():
    m = HamiltonianModel(lambda z: z[0] ** 3 + z[0] * z[1])
    z = np.array([0.7, -0.3])
    np.testing.assert_allclose(m.grad(z), [3 * 0.49 - 0.3, 0.7], rtol=1e-7)
    np.testing.assert_allclose(m.hess(z), [[6 * 0.7, 1], [1, 0]], atol=1e-4)


def test_phase_space_validation():
    with pytest.raises(ValueError):
        PhaseSpace(np.eye(2), np.eye(2))
    with pytest.raises(ValueError):
        PhaseSpace(standard_omega(1), -np.eye(2))


def test_symmetry_validation_rejects_non_symplectic_generator():
    space = PhaseSpace.standard(1)
    sym = SymmetrySpec(np.array([np.diag([1.0, 2.0])]))
    with pytest.raises(SymmetryViolation):
        sym.validate(space)


def test_system_validate_detects_broken_invariance():
    space = PhaseSpace.standard(1)
    sym = SymmetrySpec(np.array([rotation_generator([1])]))
    s = quadratic_system(np.diag([1.0, 2.0]), space, sym)
    with pytest.raises(SymmetryViolation):
        s.validate()
    wave_system().validate()


def test_complex_real_roundtrip(rng):
    w = rng.normal(size=4) + 1j * rng.normal(size=4)
    np.testing.assert_allclose(complex_coords(real_coords(w)), w)
