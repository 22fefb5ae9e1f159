"""Lyapunov-Schmidt reduction of the split critical point equations.

Unknowns live in slice coordinates: eta (along m*), v = V0 v0 + V1 v1
(V coordinates) and alpha (along the isotropy algebra g_me). The torus
case has q = 0, so the Step-1 correction gamma vanishes identically.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ChartExceeded, InvalidStructureConstants, NewtonDiverged, SpectralGapViolated
from .slice_builder import slice_map


@dataclass(frozen=True)
class NewtonOptions:
    max_iter: int = 40
    tol: float = 1e-12
    fd_step: float = 1e-7


@dataclass(frozen=True)
class ReducedProblem:
    dec: object
    L: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    V0_basis: np.ndarray
    V1_basis: np.ndarray
    kernel_tol: float
    newton: NewtonOptions = field(default_factory=NewtonOptions)

    @property
    def system(self):
        return self.dec.system

    @property
    def d(self):
        return self.V0_basis.shape[1]

    def spectrum_dict(self):
        return {"eigenvalues": self.eigenvalues.tolist(), "kernel_tol": self.kernel_tol,
                "kernel_dim": self.d, "ell": int(self.L.shape[0])}


@dataclass(frozen=True)
class ReducedPoint:
    """Everything produced by one pass of the nested solves."""

    z: np.ndarray
    xi: np.ndarray
    eta: np.ndarray
    v: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    v1: np.ndarray
    b: np.ndarray
    rho: np.ndarray


def build_reduced(dec, kernel_tol=None, newton=None):
    system = dec.system
    z_e, xi = dec.base_point, dec.generator
    H = system.augmented_hessian(z_e, xi)
    Hn = max(np.linalg.norm(H, 2), 1e-300)
    T = system.group_orbit_tangent(z_e)
    if T.shape[1]:
        leak = np.linalg.norm(H @ T, axis=0).max()
        if leak > 1e-7 * max(Hn, 1.0):
            raise SpectralGapViolated(f"Hessian does not annihilate the orbit: {leak:.3e}")
    V = dec.V_basis
    L = V.T @ H @ V
    L = 0.5 * (L + L.T)
    lam, vecs = np.linalg.eigh(L)
    if kernel_tol is None:
        Ln = np.linalg.norm(L, 2) if L.size else 0.0
        kernel_tol = 1e-7 * (Ln if Ln > 0 else Hn)
    bad = (np.abs(lam) > kernel_tol) & (np.abs(lam) < 10 * kernel_tol)
    if np.any(bad):
        raise SpectralGapViolated(f"eigenvalue {lam[bad][0]:.3e} inside the gap "
                                  f"({kernel_tol:.3e}, {10 * kernel_tol:.3e})")
    ker = np.abs(lam) <= kernel_tol
    return ReducedProblem(dec, L, lam, vecs, vecs[:, ker], vecs[:, ~ker], float(kernel_tol),
                          newton or NewtonOptions())


def _omega(rp, alpha, beta):
    dec = rp.dec
    return dec.generator + dec.g_me_basis @ alpha + dec.m_basis @ beta


def _vec(x, n):
    if n == 0:
        return np.zeros(0)
    return np.atleast_1d(np.asarray(x, dtype=float)).reshape(n)


def _fd_jacobian(F, x, h):
    f0 = F(x)
    J = np.empty((f0.size, x.size))
    for j in range(x.size):
        e = np.zeros(x.size)
        e[j] = h * (1.0 + abs(x[j]))
        J[:, j] = (F(x + e) - F(x - e)) / (2 * e[j])
    return J


def _newton(F, x0, opts, what):
    x = np.array(x0, dtype=float)
    f = F(x)
    if x.size == 0:
        return x, f
    for it in range(opts.max_iter):
        if np.linalg.norm(f) <= opts.tol:
            # one polishing step keeps the recombined residual well inside tolerance
            J = _fd_jacobian(F, x, opts.fd_step)
            x_new = x - np.linalg.lstsq(J, f, rcond=None)[0]
            f_new = F(x_new)
            if np.linalg.norm(f_new) <= np.linalg.norm(f):
                x, f = x_new, f_new
            return x, f
        J = _fd_jacobian(F, x, opts.fd_step)
        dx = np.linalg.lstsq(J, f, rcond=None)[0]
        x = x - dx
        f = F(x)
        if not np.all(np.isfinite(f)):
            break
    if np.linalg.norm(f) <= opts.tol:
        return x, f
    raise NewtonDiverged(f"{what}: residual {np.linalg.norm(f):.3e} after {opts.max_iter} iterations")


def _beta_residual(rp, z, alpha, beta):
    system = rp.system
    g = system.augmented_gradient(z, _omega(rp, alpha, beta))
    return rp.dec.W_basis.T @ g


def solve_beta(rp, eta, v, alpha, check=True):
    """Solve the m* component of the critical point equation for beta."""
    dec = rp.dec
    eta = _vec(eta, dec.dim_m)
    v = _vec(v, dec.ell)
    alpha = _vec(alpha, dec.g_me_basis.shape[1])
    z = slice_map(dec, eta, v, check=check)
    beta, _ = _newton(lambda b: _beta_residual(rp, z, alpha, b), np.zeros(dec.dim_m),
                      rp.newton, "solve_beta")
    return beta


def beta_jacobian(rp, eta, v, alpha):
    """Finite-difference Jacobian of the beta equation (diagnostic)."""
    dec = rp.dec
    z = slice_map(dec, _vec(eta, dec.dim_m), _vec(v, dec.ell))
    alpha = _vec(alpha, dec.g_me_basis.shape[1])
    return _fd_jacobian(lambda b: _beta_residual(rp, z, alpha, b), np.zeros(dec.dim_m),
                        rp.newton.fd_step)


def _v_gradient(rp, eta, v, alpha, check=True):
    dec = rp.dec
    z = slice_map(dec, eta, v, check=check)
    beta = solve_beta(rp, eta, v, alpha, check=False)
    om = _omega(rp, alpha, beta)
    g = rp.system.augmented_gradient(z, om)
    return dec.V_basis.T @ g, z, beta, om


def solve_v1(rp, eta, v0, alpha, v1_guess=None):
    """Solve the range part of the V equation with beta re-solved inside."""
    dec = rp.dec
    eta = _vec(eta, dec.dim_m)
    v0 = _vec(v0, rp.d)
    alpha = _vec(alpha, dec.g_me_basis.shape[1])
    n1 = rp.V1_basis.shape[1]
    if n1 == 0:
        return np.zeros(0)
    radius = dec.validity_radius

    def F(v1):
        v = rp.V0_basis @ v0 + rp.V1_basis @ v1
        if np.sqrt(eta @ eta + v @ v) > radius:
            raise ChartExceeded("v1 iterate left the slice chart")
        return rp.V1_basis.T @ _v_gradient(rp, eta, v, alpha, check=False)[0]

    x0 = np.zeros(n1) if v1_guess is None else np.asarray(v1_guess, dtype=float)
    v1, _ = _newton(F, x0, rp.newton, "solve_v1")
    return v1


def reduced_point(rp, eta, v0, alpha, v1_guess=None):
    dec = rp.dec
    eta = _vec(eta, dec.dim_m)
    v0 = _vec(v0, rp.d)
    alpha = _vec(alpha, dec.g_me_basis.shape[1])
    slice_map(dec, eta, rp.V0_basis @ v0)  # chart check on the input
    v1 = solve_v1(rp, eta, v0, alpha, v1_guess)
    v = rp.V0_basis @ v0 + rp.V1_basis @ v1
    gv, z, beta, om = _v_gradient(rp, eta, v, alpha, check=False)
    b = rp.V0_basis.T @ gv
    system = rp.system
    rho = rigid_residual(system.symmetry.structure_constants, system.momentum(z), om, dec.m_basis)
    return ReducedPoint(z, om, eta, v, alpha, beta, v1, b, rho)


def generator_map(rp, eta, v0, alpha):
    return reduced_point(rp, eta, v0, alpha).xi


def bifurcation_function(rp, eta, v0, alpha):
    return reduced_point(rp, eta, v0, alpha).b


def validate_structure_constants(c, tol=1e-10):
    c = np.asarray(c, dtype=float)
    k = c.shape[0]
    if c.shape != (k, k, k):
        raise InvalidStructureConstants("structure constants must be k x k x k")
    if np.abs(c + c.transpose(1, 0, 2)).max(initial=0.0) > tol:
        raise InvalidStructureConstants("structure constants are not antisymmetric")
    # Jacobi: [[a,b],c] + cyclic = 0
    jac = (np.einsum("abm,mcn->abcn", c, c) + np.einsum("bcm,man->abcn", c, c)
           + np.einsum("cam,mbn->abcn", c, c))
    if np.abs(jac).max(initial=0.0) > tol:
        raise InvalidStructureConstants("structure constants violate the Jacobi identity")
    return c


def rigid_residual(structure_constants, J_value, xi_full, m_basis):
    """rho_j = <J, [xi, m_j]> with [e_a, e_b] = sum_c c[a, b, c] e_c."""
    c = validate_structure_constants(structure_constants)
    m_basis = np.asarray(m_basis, dtype=float)
    if m_basis.size == 0:
        return np.zeros(m_basis.shape[1] if m_basis.ndim == 2 else 0)
    if not np.any(c):
        return np.zeros(m_basis.shape[1])
    br = np.einsum("a,abc,bj->cj", np.asarray(xi_full, dtype=float), c, m_basis)
    return np.asarray(J_value, dtype=float) @ br
