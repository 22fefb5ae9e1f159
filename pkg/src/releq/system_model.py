"""Linear symplectic phase spaces, torus actions and momentum maps.

Conventions used throughout the package:

* Hamiltonian vector fields are ``X_f = Omega^{-1} grad f``.
* Each generator ``A_i`` is infinitesimally symplectic, so ``Omega A_i`` is
  symmetric and ``J_i(z) = 1/2 z^T Omega A_i z`` has ``X_{J_i}(z) = A_i z``.
* Complex coordinates are stored as interleaved ``(x_j, y_j)`` pairs.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import expm

from .errors import FdStepDegenerate, IntegrationBlowup, SymmetryViolation

ROT = np.array([[0.0, -1.0], [1.0, 0.0]])


def standard_omega(n, scale=1.0):
    """Block diagonal symplectic form with blocks scale*[[0, 1], [-1, 0]]."""
    return scale * np.kron(np.eye(n), np.array([[0.0, 1.0], [-1.0, 0.0]]))


def rotation_generator(weights):
    """Generator rotating complex coordinate j at integer speed weights[j]."""
    return np.kron(np.diag(np.asarray(weights, dtype=float)), ROT)


@dataclass(frozen=True)
class PhaseSpace:
    omega: np.ndarray
    inner: np.ndarray

    def __post_init__(self):
        om = np.asarray(self.omega, dtype=float)
        g = np.asarray(self.inner, dtype=float)
        if om.ndim != 2 or om.shape[0] != om.shape[1] or om.shape[0] % 2:
            raise ValueError("omega must be a square matrix of even size")
        if g.shape != om.shape:
            raise ValueError("inner product shape does not match omega")
        if not np.array_equal(om, -om.T):
            raise ValueError("omega must be exactly antisymmetric")
        if abs(np.linalg.det(om)) == 0.0:
            raise ValueError("omega is singular")
        if not np.allclose(g, g.T, rtol=0, atol=1e-14 * np.abs(g).max()):
            raise ValueError("inner product must be symmetric")
        if np.linalg.eigvalsh(0.5 * (g + g.T)).min() <= 0:
            raise ValueError("inner product must be positive definite")
        object.__setattr__(self, "omega", om)
        object.__setattr__(self, "inner", 0.5 * (g + g.T))
        object.__setattr__(self, "_omega_inv", np.linalg.inv(om))

    @classmethod
    def standard(cls, n, scale=1.0):
        return cls(standard_omega(n, scale), scale * np.eye(2 * n))

    @property
    def dim(self):
        return self.omega.shape[0]

    @property
    def omega_inv(self):
        return self._omega_inv


@dataclass(frozen=True)
class SymmetrySpec:
    generators: np.ndarray
    finite_elements: tuple = ()
    structure_constants: Optional[np.ndarray] = None

    def __post_init__(self):
        gens = np.asarray(self.generators, dtype=float)
        if gens.ndim == 2 and gens.size == 0:
            gens = gens.reshape(0, 0, 0)
        object.__setattr__(self, "generators", gens)
        object.__setattr__(self, "finite_elements",
                           tuple(np.asarray(g, dtype=float) for g in self.finite_elements))
        k = gens.shape[0]
        sc = self.structure_constants
        sc = np.zeros((k, k, k)) if sc is None else np.asarray(sc, dtype=float)
        object.__setattr__(self, "structure_constants", sc)

    @property
    def rank(self):
        return self.generators.shape[0]

    def algebra_element(self, xi):
        """A_xi = sum_i xi_i A_i."""
        xi = np.asarray(xi, dtype=float)
        return np.tensordot(xi, self.generators, axes=1)

    def validate(self, space: PhaseSpace, rng=None, n_samples=4):
        om, G = space.omega, space.inner
        dim = space.dim
        gens = self.generators
        if gens.shape[0] and gens.shape[1:] != (dim, dim):
            raise SymmetryViolation("generator shape does not match phase space")
        for i, A in enumerate(gens):
            OA = om @ A
            if np.abs(OA + A.T @ om).max() > 1e-12 * max(np.abs(OA).max(), 1e-300):
                raise SymmetryViolation(f"generator {i} is not infinitesimally symplectic")
            for j in range(i):
                if np.abs(A @ gens[j] - gens[j] @ A).max() > 1e-12:
                    raise SymmetryViolation(f"generators {j} and {i} do not commute")
        for i, g in enumerate(self.finite_elements):
            if g.shape != (dim, dim):
                raise SymmetryViolation(f"finite element {i} has wrong shape")
            if np.abs(g.T @ om @ g - om).max() > 1e-12 * np.abs(om).max():
                raise SymmetryViolation(f"finite element {i} is not symplectic")
            if np.abs(g.T @ G @ g - G).max() > 1e-10 * np.abs(G).max():
                raise SymmetryViolation(f"inner product not invariant under finite element {i}")
        for a in self.finite_elements:
            for b in self.finite_elements:
                ab = a @ b
                if not any(np.abs(ab - c).max() <= 1e-10 for c in self.finite_elements):
                    raise SymmetryViolation("finite elements are not closed under product")
        rng = np.random.default_rng(0) if rng is None else rng
        for A in gens:
            for t in rng.uniform(-np.pi, np.pi, n_samples):
                E = expm(t * A)
                if np.abs(E.T @ G @ E - G).max() > 1e-10 * np.abs(G).max():
                    raise SymmetryViolation("inner product not invariant under the torus")


@dataclass(frozen=True)
class HamiltonianModel:
    evaluate: Callable
    gradient: Optional[Callable] = None
    hessian: Optional[Callable] = None
    fd_step: float = 1e-6

    def _step(self, z):
        h = self.fd_step * (1.0 + np.linalg.norm(z))
        if not h > 64 * np.finfo(float).eps * max(1.0, np.abs(z).max(initial=0.0)):
            raise FdStepDegenerate(f"finite difference step {h:g} is below resolution")
        return h

    def value(self, z):
        return float(self.evaluate(np.asarray(z, dtype=float)))

    def fd_gradient(self, z):
        z = np.asarray(z, dtype=float)
        h = self._step(z)
        g = np.empty(z.size)
        for i in range(z.size):
            e = np.zeros(z.size)
            e[i] = h
            g[i] = (self.evaluate(z + e) - self.evaluate(z - e)) / (2 * h)
        return g

    def fd_hessian(self, z):
        z = np.asarray(z, dtype=float)
        h = self._step(z)
        n = z.size
        H = np.empty((n, n))
        if self.gradient is not None:
            for i in range(n):
                e = np.zeros(n)
                e[i] = h
                H[:, i] = (self.gradient(z + e) - self.gradient(z - e)) / (2 * h)
        else:
            f0 = self.evaluate(z)
            for i in range(n):
                ei = np.zeros(n)
                ei[i] = h
                H[i, i] = (self.evaluate(z + ei) - 2 * f0 + self.evaluate(z - ei)) / h**2
                for j in range(i):
                    ej = np.zeros(n)
                    ej[j] = h
                    H[i, j] = H[j, i] = (self.evaluate(z + ei + ej) - self.evaluate(z + ei - ej)
                                         - self.evaluate(z - ei + ej)
                                         + self.evaluate(z - ei - ej)) / (4 * h**2)
        return 0.5 * (H + H.T)

    def grad(self, z):
        z = np.asarray(z, dtype=float)
        if self.gradient is not None:
            return np.asarray(self.gradient(z), dtype=float)
        return self.fd_gradient(z)

    def hess(self, z):
        z = np.asarray(z, dtype=float)
        if self.hessian is not None:
            H = np.asarray(self.hessian(z), dtype=float)
            return 0.5 * (H + H.T)
        return self.fd_hessian(z)


@dataclass(frozen=True)
class DriftReport:
    orbit_drift: float
    momentum_drift: float
    t_max: float
    steps: int


@dataclass(frozen=True)
class HamiltonianSystem:
    """A G-invariant Hamiltonian on a linear symplectic space."""

    space: PhaseSpace
    symmetry: SymmetrySpec
    hamiltonian: HamiltonianModel
    name: str = "system"
    meta: dict = field(default_factory=dict)

    @property
    def dim(self):
        return self.space.dim

    @property
    def k(self):
        return self.symmetry.rank

    @property
    def generators(self):
        return self.symmetry.generators

    def momentum_matrices(self):
        """Symmetric matrices Omega A_i, so that J_i(z) = 1/2 z^T (Omega A_i) z."""
        M = np.einsum("ab,ibc->iac", self.space.omega, self.generators)
        return 0.5 * (M + M.transpose(0, 2, 1))

    def momentum(self, z):
        z = np.asarray(z, dtype=float)
        return 0.5 * np.einsum("a,iab,b->i", z, self.momentum_matrices(), z)

    def momentum_jacobian(self, z):
        """k x 2n matrix with rows grad J_i(z)."""
        return self.momentum_matrices() @ np.asarray(z, dtype=float)

    def augmented_value(self, z, xi):
        return self.hamiltonian.value(z) - float(np.dot(self.momentum(z), xi))

    def augmented_gradient(self, z, xi):
        z = np.asarray(z, dtype=float)
        return self.hamiltonian.grad(z) - np.asarray(xi, dtype=float) @ self.momentum_jacobian(z)

    def augmented_hessian(self, z, xi):
        H = self.hamiltonian.hess(z) - np.tensordot(np.asarray(xi, dtype=float),
                                                    self.momentum_matrices(), axes=1)
        return 0.5 * (H + H.T)

    def group_orbit_tangent(self, z):
        """2n x k matrix with columns A_i z."""
        z = np.asarray(z, dtype=float)
        if self.k == 0:
            return np.zeros((z.size, 0))
        return np.einsum("iab,b->ai", self.generators, z)

    def vector_field(self, z):
        return self.space.omega_inv @ self.hamiltonian.grad(z)

    def group_element(self, theta):
        """exp(sum_i theta_i A_i)."""
        if self.k == 0:
            return np.eye(self.dim)
        return expm(self.symmetry.algebra_element(theta))

    def check_relative_equilibrium(self, z, xi, t_max=1.0, steps=1000):
        """Integrate with classical RK4 and compare against exp(t A_xi) z."""
        if not t_max > 0:
            raise ValueError("t_max must be positive")
        z0 = np.asarray(z, dtype=float)
        dt = t_max / steps
        step = self.group_element(dt * np.asarray(xi, dtype=float))
        limit = 1e6 * (1.0 + np.linalg.norm(z0))
        mu0 = self.momentum(z0)
        x, ref = z0.copy(), z0.copy()
        orbit = mom = 0.0
        f = self.vector_field
        for _ in range(steps):
            k1 = f(x)
            k2 = f(x + 0.5 * dt * k1)
            k3 = f(x + 0.5 * dt * k2)
            k4 = f(x + dt * k3)
            x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            ref = step @ ref
            nx = np.linalg.norm(x)
            if not np.isfinite(nx) or nx > limit:
                raise IntegrationBlowup(f"state norm {nx:g} exceeded {limit:g}")
            orbit = max(orbit, float(np.linalg.norm(x - ref)))
            mom = max(mom, float(np.linalg.norm(self.momentum(x) - mu0)))
        return DriftReport(orbit, mom, float(t_max), int(steps))

    def validate(self, rng=None, n_samples=5):
        """Check the symmetry and invariance contracts at sampled points."""
        rng = np.random.default_rng(0) if rng is None else rng
        self.symmetry.validate(self.space, rng)
        h = self.hamiltonian
        for _ in range(n_samples):
            z = rng.normal(size=self.dim)
            hz = h.value(z)
            tol = 1e-10 * (1 + abs(hz))
            for g in self.symmetry.finite_elements:
                if abs(h.value(g @ z) - hz) > tol:
                    raise SymmetryViolation("Hamiltonian not invariant under a finite element")
            if self.k:
                theta = rng.uniform(-np.pi, np.pi, self.k)
                if abs(h.value(self.group_element(theta) @ z) - hz) > tol:
                    raise SymmetryViolation("Hamiltonian not invariant under the torus")
            if h.gradient is not None:
                ga, gf = h.grad(z), h.fd_gradient(z)
                if np.linalg.norm(ga - gf) > 1e-6 * max(1.0, np.linalg.norm(gf)):
                    raise SymmetryViolation("analytic gradient disagrees with finite differences")
        return True


def quadratic_system(Q, space=None, symmetry=None, name="quadratic"):
    """h(z) = 1/2 z^T Q z with exact derivatives."""
    Q = 0.5 * (np.asarray(Q, dtype=float) + np.asarray(Q, dtype=float).T)
    n2 = Q.shape[0]
    space = PhaseSpace.standard(n2 // 2) if space is None else space
    symmetry = SymmetrySpec(np.zeros((0, n2, n2))) if symmetry is None else symmetry
    ham = HamiltonianModel(lambda z: 0.5 * z @ Q @ z, lambda z: Q @ z, lambda z: Q)
    return HamiltonianSystem(space, symmetry, ham, name=name)
