import numpy as np

from releq.isotropy import (integer_kernel, invariant_factors, point_isotropy, restricted_weight,
                            smith, torus_elements_acting_as, torus_weights)
from releq.models import real_coords, wave_base_point, wave_system


def test_smith_decomposition_identity():
    M = np.array([[2, 4], [6, 8]])
    S, U, V = smith(M)
    np.testing.assert_array_equal(U @ M @ V, S)
    assert invariant_factors(M) == [2, 4]


def test_integer_kernel():
    K = integer_kernel(np.array([[1, 2]]), 2)
    assert K.shape == (2, 1)
    assert (np.array([1, 2]) @ K).item() == 0
    assert np.gcd.reduce(np.abs(K[:, 0])) == 1


def test_wave_weights():
    ws = {w.weight for w in torus_weights(wave_system())}
    assert ws == {(1, 0), (0, 1), (2, 0), (0, 2)}


def test_wave_isotropy_labels():
    s = wave_system()
    assert str(point_isotropy(s, wave_base_point(1.0))) == "T1xZ2"
    assert str(point_isotropy(s, np.zeros(8))) == "T2+F{1}"
    z = real_coords(np.array([0.3, 0.0, 1.0, 0.0]))
    assert str(point_isotropy(s, z)) == "T1"
    z = real_coords(np.array([0.0, 0.0, 1.0, 1.0]))
    assert str(point_isotropy(s, z)) == "Z2xZ2+F{1}"


def test_isotropy_relative_to_lattice():
    s = wave_system()
    K0 = integer_kernel(np.array([[2, 0]]), 2)  # identity component at the base point
    z2 = real_coords(np.array([0.0, 0.1, 1.0, 0.0]))
    z4 = real_coords(np.array([0.0, 0.0, 1.0, 0.1]))
    assert str(point_isotropy(s, z2, K0)) == "1"
    assert str(point_isotropy(s, z4, K0)) == "Z2"
    assert restricted_weight((0, 2), K0) == 2
    assert restricted_weight((0, 1), K0) == 1


def test_torus_element_reversing_z1():
    s = wave_system()
    z = wave_base_point(1.0)
    theta = torus_elements_acting_as(s, z, (1, 0), 0.5)
    g = s.group_element(theta)
    np.testing.assert_allclose(g @ z, z, atol=1e-12)
    u = np.zeros(8)
    u[0] = 1.0
    np.testing.assert_allclose(g @ u, -u, atol=1e-12)
