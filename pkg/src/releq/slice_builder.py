"""Orbit/momentum decompositions at a relative equilibrium and the slice map."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotARelativeEquilibrium, OutOfChart, RankAmbiguous
from .isotropy import fix_signs, inner_orthonormalize


@dataclass(frozen=True)
class SliceDecomposition:
    """Bases for g_me, m, V, W at (z_e, xi) together with chart data.

    Columns of g_me_basis and m_basis are Euclidean-orthonormal in R^k;
    V_basis is orthonormal in the reference inner product. W_basis maps
    eta (coordinates along m_basis) to phase space with DJ(z_e) W = m_basis.
    """

    system: object
    base_point: np.ndarray
    generator: np.ndarray
    g_me_basis: np.ndarray
    m_basis: np.ndarray
    q_basis: np.ndarray
    V_basis: np.ndarray
    W_basis: np.ndarray
    orbit_singular_values: np.ndarray
    tol_rank: float
    condition: float
    sm2_sigma0: float
    validity_radius: float

    @property
    def ell(self):
        return self.V_basis.shape[1]

    @property
    def dim_m(self):
        return self.m_basis.shape[1]

    @property
    def A_inverse_action(self):
        return self.W_basis

    def to_dict(self):
        rad = self.validity_radius
        return {
            "base_point": self.base_point.tolist(),
            "generator": self.generator.tolist(),
            "g_me_basis": self.g_me_basis.T.tolist(),
            "m_basis": self.m_basis.T.tolist(),
            "q_basis": [],
            "V_basis": self.V_basis.tolist(),
            "W_basis": self.W_basis.tolist(),
            "dims": {"g_me": self.g_me_basis.shape[1], "m": self.dim_m, "V": self.ell},
            "orbit_singular_values": self.orbit_singular_values.tolist(),
            "tol_rank": self.tol_rank,
            "condition": self.condition,
            "sm2_sigma0": self.sm2_sigma0,
            "validity_radius": None if not np.isfinite(rad) else rad,
        }


def is_relative_equilibrium(system, z, xi, tol=1e-8):
    g = system.augmented_gradient(z, xi)
    return np.linalg.norm(g) <= tol * (1.0 + np.linalg.norm(system.hamiltonian.grad(z)))


def orbit_split(system, z, tol_rank=1e-8):
    """Split R^k into the isotropy algebra of z and its complement.

    Returns (g_me_basis, m_basis, singular values).
    """
    k = system.k
    if k == 0:
        return np.zeros((0, 0)), np.zeros((0, 0)), np.zeros(0)
    T = system.group_orbit_tangent(z)
    _, s, vt = np.linalg.svd(T, full_matrices=True)
    s_full = np.zeros(k)
    s_full[:s.size] = s
    amb = (s_full > tol_rank / 10) & (s_full < 10 * tol_rank)
    if np.any(amb):
        raise RankAmbiguous(f"orbit singular value {s_full[amb][0]:.3e} is within a decade of "
                            f"tol_rank={tol_rank:g}")
    r = int(np.sum(s_full > tol_rank))
    m = fix_signs(vt[:r].T) if r else np.zeros((k, 0))
    g = fix_signs(vt[r:].T) if r < k else np.zeros((k, 0))
    return g, m, s_full


def normal_space(system, z, r):
    """G-orthonormal basis of ker DJ(z) intersected with the orbit complement.

    r is the orbit dimension at z; the result has 2n - 2r columns.
    """
    G = system.space.inner
    n2, k = system.dim, system.k
    if k == 0:
        return fix_signs(inner_orthonormalize(np.eye(n2), G))
    C = np.vstack([system.momentum_jacobian(z), system.group_orbit_tangent(z).T @ G])
    _, _, vt = np.linalg.svd(C, full_matrices=True)
    V = vt[2 * r:].T
    V = fix_signs(inner_orthonormalize(V, G)) if V.shape[1] else np.zeros((n2, 0))
    if V.shape[1] != n2 - 2 * r:
        raise RankAmbiguous("slice dimension count failed")
    return V


def _sm2_matrix(system, z, m_basis, V, W):
    T = system.group_orbit_tangent(z) @ m_basis
    return np.hstack([T, W, V])


def build_slice(system, z_e, xi, tol_rank=1e-8, re_tol=1e-8):
    z_e = np.asarray(z_e, dtype=float)
    xi = np.asarray(xi, dtype=float)
    if not is_relative_equilibrium(system, z_e, xi, re_tol):
        res = np.linalg.norm(system.augmented_gradient(z_e, xi))
        raise NotARelativeEquilibrium(f"augmented gradient norm {res:.3e}")
    G = system.space.inner
    n2, k = system.dim, system.k
    g_me, m, s = orbit_split(system, z_e, tol_rank)
    r = m.shape[1]
    DJ = system.momentum_jacobian(z_e) if k else np.zeros((0, n2))

    V = normal_space(system, z_e, r)
    # W: minimum G-norm preimage of m under DJ
    if r:
        Ginv = np.linalg.inv(G)
        K = DJ @ Ginv @ DJ.T
        W = Ginv @ DJ.T @ np.linalg.lstsq(K, m, rcond=None)[0]
        cond = float(np.linalg.cond(m.T @ DJ @ W))
    else:
        W = np.zeros((n2, 0))
        cond = 1.0

    M0 = _sm2_matrix(system, z_e, m, V, W)
    sigma0 = float(np.linalg.svd(M0, compute_uv=False).min()) if M0.shape[1] else 1.0
    lip = 0.0
    WV = np.hstack([W, V])
    for j in range(r):
        Am = system.symmetry.algebra_element(m[:, j])
        lip += np.linalg.norm(Am @ WV, 2) ** 2
    lip = np.sqrt(lip)
    radius = 0.5 * sigma0 / lip if lip > 0 else np.inf
    return SliceDecomposition(system, z_e, xi, g_me, m, np.zeros((k, 0)), V, W, s,
                              float(tol_rank), cond, sigma0, float(radius))


def slice_map(dec, eta, v, check=True):
    eta = np.atleast_1d(np.asarray(eta, dtype=float)) if dec.dim_m else np.zeros(0)
    v = np.atleast_1d(np.asarray(v, dtype=float)) if dec.ell else np.zeros(0)
    if check:
        nrm = np.sqrt(np.sum(eta**2) + np.sum(v**2))
        if nrm > dec.validity_radius:
            raise OutOfChart(f"|(eta, v)| = {nrm:.3e} exceeds validity radius "
                             f"{dec.validity_radius:.3e}")
    return dec.base_point + dec.V_basis @ v + dec.W_basis @ eta


def verify_sm2(dec, eta, v):
    """Smallest singular value of [m . Psi | dPsi/d(eta, v)] and the verdict."""
    z = slice_map(dec, eta, v, check=False)
    M = _sm2_matrix(dec.system, z, dec.m_basis, dec.V_basis, dec.W_basis)
    smin = float(np.linalg.svd(M, compute_uv=False).min()) if M.shape[1] else 1.0
    return {"sigma_min": smin, "holds": smin > dec.tol_rank}


def act_on_coordinates(dec, g):
    """Matrices (on m* and on V coordinates) through which g acts.

    g must fix z_e. The m* action comes from g A_i g^{-1} = sum_j P_ji A_j.
    """
    system = dec.system
    G = system.space.inner
    k = system.k
    if k:
        gens = system.generators
        flat = gens.reshape(k, -1).T
        ginv = np.linalg.inv(g)
        P = np.column_stack([np.linalg.lstsq(flat, (g @ A @ ginv).ravel(), rcond=None)[0]
                             for A in gens])
        # J(g z) = P^{-T} J(z) for the induced dual action
        Pd = np.linalg.inv(P).T
        m_act = dec.m_basis.T @ Pd @ dec.m_basis
    else:
        m_act = np.zeros((0, 0))
    v_act = dec.V_basis.T @ G @ g @ dec.V_basis
    return m_act, v_act
