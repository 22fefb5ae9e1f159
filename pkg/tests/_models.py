"""Small hand-built systems shared by several test modules."""
import numpy as np

from releq.polynomial import Polynomial
from releq.system_model import (HamiltonianModel, HamiltonianSystem, PhaseSpace, SymmetrySpec,
                                rotation_generator, standard_omega)


def poly_system(poly, omega, inner, gens, finite=(), name="poly"):
    space = PhaseSpace(omega, inner)
    sym = SymmetrySpec(np.array(gens).reshape(len(gens), *omega.shape), tuple(finite))
    return HamiltonianSystem(space, sym, HamiltonianModel(poly, poly.gradient, poly.hessian),
                             name=name)


def saddle_system(C0=1.0):
    """C x R^2, coordinates (x1, y1, q, p), S^1 rotating z1 only.

    h = X1 + p^2/2 + q^3/3 + q (X1 - C0^2). At X1 = C0^2 the q-direction is a
    kernel with no symmetry acting on it.
    """
    x1, y1, q, p = (Polynomial.variable(4, j) for j in range(4))
    X1 = x1 * x1 + y1 * y1
    h = X1 + 0.5 * p * p + (1.0 / 3.0) * q * q * q + q * (X1 - C0 * C0)
    omega = np.zeros((4, 4))
    omega[:2, :2] = standard_omega(1, 2.0)
    omega[2:, 2:] = standard_omega(1, 1.0)
    inner = np.diag([2.0, 2.0, 1.0, 1.0])
    A = np.zeros((4, 4))
    A[:2, :2] = rotation_generator([1])
    return poly_system(h, omega, inner, [A], (np.eye(4),), name="saddle")


def full_isotropy_system(omega0=1.0, c=0.3):
    """C^2 with the diagonal S^1 action and standard (unscaled) conventions.

    h = omega0/2 (X1 + X2) + c P + quartic invariants, P = Re(z1 conj z2),
    Q = Im(z1 conj z2). At z = 0 with xi = omega0 + c the kernel is the
    two-dimensional plane z1 = z2.
    """
    x1, y1, x2, y2 = (Polynomial.variable(4, j) for j in range(4))
    X1 = x1 * x1 + y1 * y1
    X2 = x2 * x2 + y2 * y2
    P = x1 * x2 + y1 * y2
    Q = x2 * y1 - x1 * y2
    h = (0.5 * omega0 * (X1 + X2) + c * P + 0.25 * (X1 + X2) * (X1 + X2) - 0.3 * P * P
         + 0.7 * X1 * P + 0.2 * Q * Q + 0.4 * X2 * Q + 0.1 * X1 * X1)
    gens = [rotation_generator([1, 1])]
    return poly_system(h, standard_omega(2), np.eye(4), gens, (np.eye(4),), name="full_iso"), \
        omega0 + c


def definite_quadratic_system():
    """Two decoupled oscillators with positive frequencies and no symmetry."""
    Q = np.diag([1.0, 2.0, 3.0, 4.0])
    from releq.system_model import quadratic_system
    return quadratic_system(Q)


def symmetric_wave_point(params):
    """(0, 0, C, C) with xi = (a3/2, a4/2): fixed by the swap and by theta=(pi, pi)."""
    C = params.C
    z = np.zeros(8)
    z[4] = z[6] = C
    c = params.coefficients([0.0, 0.0, C * C, C * C, 0.0, 0.0])
    return z, np.array([c["a3"] / 2, c["a4"] / 2])
