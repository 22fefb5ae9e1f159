"""Torus weight decomposition and isotropy subgroups via Smith normal form."""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import gcd

import numpy as np
import sympy
from scipy.linalg import cholesky, solve_triangular
from sympy.matrices.normalforms import smith_normal_decomp


def inner_orthonormalize(B, G, tol=1e-10):
    """Orthonormal basis (w.r.t. G) of the column span of B."""
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if B.shape[1] == 0:
        return np.zeros((G.shape[0], 0))
    R = cholesky(G)  # G = R^T R
    U, s, _ = np.linalg.svd(R @ B, full_matrices=False)
    r = int(np.sum(s > tol * max(s.max(initial=0.0), 1e-300)))
    return solve_triangular(R, U[:, :r])


def fix_signs(B):
    """Make the largest-magnitude entry of each column positive."""
    B = np.array(B, dtype=float)
    for j in range(B.shape[1]):
        i = np.argmax(np.abs(B[:, j]))
        if B[i, j] < 0:
            B[:, j] = -B[:, j]
    return B


@dataclass(frozen=True)
class WeightSpace:
    weight: tuple
    basis: np.ndarray  # 2n x m, orthonormal in the reference inner product
    integral: bool = True


def torus_weights(system, tol=1e-8):
    """Split phase space into torus weight spaces.

    Returns a list of WeightSpace; the weight-zero space (if any) comes first.
    Non-zero weights are reported once per +-pair, with the sign fixed by a
    generic direction in the Lie algebra.
    """
    cached = system.meta.get("_weights")
    if cached is not None:
        return cached
    dim, k, G = system.dim, system.k, system.space.inner
    if k == 0:
        out = [WeightSpace((), np.linalg.inv(np.linalg.cholesky(G)).T)]
        system.meta["_weights"] = out
        return out
    gens = system.generators
    r = np.sqrt(np.array([2, 3, 5, 7, 11, 13, 17, 19, 23, 29][:k] + [31] * max(0, k - 10),
                         dtype=float))
    r = r + np.arange(k) * 0.1234567
    Ar = np.tensordot(r, gens, axes=1)
    out = []
    zero = np.vstack(list(gens))
    _, s, vt = np.linalg.svd(zero)
    scale = max(np.abs(gens).max(), 1.0)
    null = vt[np.sum(s > tol * scale):].T
    if null.shape[1]:
        out.append(WeightSpace((0,) * k, fix_signs(inner_orthonormalize(null, G))))
    evals, evecs = np.linalg.eig(Ar)
    used = np.zeros(dim, dtype=bool)
    for idx in np.argsort(-evals.imag):
        if used[idx] or evals[idx].imag <= tol * scale:
            continue
        group = np.where((np.abs(evals - evals[idx]) <= 1e-6 * scale) & ~used)[0]
        used[group] = True
        conj = np.where(np.abs(evals - np.conj(evals[idx])) <= 1e-6 * scale)[0]
        used[conj] = True
        e = evecs[:, group[0]]
        w = np.array([np.vdot(e, A @ e).imag / np.vdot(e, e).real for A in gens])
        wr = np.round(w)
        integral = bool(np.all(np.abs(w - wr) <= 1e-6 * max(1.0, np.abs(w).max())))
        weight = tuple(int(x) for x in wr) if integral else tuple(float(x) for x in w)
        E = evecs[:, group]
        B = inner_orthonormalize(np.hstack([E.real, E.imag]), G)
        out.append(WeightSpace(weight, B, integral))
    system.meta["_weights"] = out
    return out


def weight_components(system, z):
    """Norms (inner product) of the projections of z onto each weight space."""
    G = system.space.inner
    return [float(np.linalg.norm(ws.basis.T @ G @ z)) for ws in torus_weights(system)]


def smith(M):
    """Smith normal form U M V = S of an integer matrix (numpy int arrays)."""
    M = np.asarray(M, dtype=int)
    S, U, V = smith_normal_decomp(sympy.Matrix(M.tolist()), domain=sympy.ZZ)
    to = lambda X: np.array(X.tolist(), dtype=np.int64).reshape(X.shape)
    return to(S), to(U), to(V)


def invariant_factors(M):
    """Nonzero diagonal entries of the Smith form (absolute values)."""
    M = np.asarray(M, dtype=int)
    if M.size == 0:
        return []
    S, _, _ = smith(M)
    d = [abs(int(S[i, i])) for i in range(min(S.shape))]
    return [x for x in d if x != 0]


def integer_kernel(M, k=None):
    """Integer basis (columns) of {theta in Z^k : M theta = 0}."""
    M = np.asarray(M, dtype=int)
    if M.size == 0:
        k = M.shape[1] if M.ndim == 2 and k is None else k
        return np.eye(k, dtype=int)
    S, _, V = smith(M)
    r = len([i for i in range(min(S.shape)) if S[i, i] != 0])
    return V[:, r:]


@dataclass(frozen=True)
class IsotropyLabel:
    torus_rank: int
    factors: tuple = ()
    finite: tuple = ()
    integral: bool = True

    def __str__(self):
        parts = []
        if self.torus_rank:
            parts.append(f"T{self.torus_rank}")
        parts += [f"Z{d}" for d in self.factors]
        base = "x".join(parts) if parts else "1"
        if self.finite:
            base += "+F{" + ",".join(str(i) for i in self.finite) + "}"
        return base

    @property
    def is_trivial(self):
        return self.torus_rank == 0 and not self.factors and not self.finite


def active_weights(system, z, tol=1e-9):
    """Rows: weights of the weight spaces on which z has a nonzero component."""
    z = np.asarray(z, dtype=float)
    scale = max(np.linalg.norm(z), 1e-300)
    rows, integral = [], True
    for ws, c in zip(torus_weights(system), weight_components(system, z)):
        if c > tol * scale and any(w != 0 for w in ws.weight):
            rows.append(ws.weight)
            integral = integral and ws.integral
    return rows, integral


def point_isotropy(system, z, lattice=None, tol=1e-9):
    """Isotropy label of z inside the subtorus generated by the columns of lattice.

    lattice is an integer k x p matrix (default: identity, the full torus).
    Finite elements fixing z are listed by index.
    """
    z = np.asarray(z, dtype=float)
    k = system.k
    lattice = np.eye(k, dtype=int) if lattice is None else np.asarray(lattice, dtype=int)
    rows, integral = active_weights(system, z, tol)
    p = lattice.shape[1]
    scale = max(np.linalg.norm(z), 1.0)
    finite = tuple(i for i, g in enumerate(system.symmetry.finite_elements)
                   if not np.allclose(g, np.eye(system.dim))
                   and np.linalg.norm(g @ z - z) <= tol * scale)
    if not rows or p == 0:
        return IsotropyLabel(p, (), finite, integral)
    if not integral:
        W = np.array(rows, dtype=float) @ lattice
        return IsotropyLabel(p - np.linalg.matrix_rank(W, tol=1e-8), (), finite, False)
    W = np.array(rows, dtype=int) @ lattice
    d = invariant_factors(W)
    return IsotropyLabel(p - len(d), tuple(x for x in d if x > 1), finite, True)


def torus_elements_acting_as(system, z, w, target=0.5, max_enum=4096):
    """Find theta in the torus isotropy of z with <w, theta> = 2 pi target mod 2 pi.

    Returns theta (length k) or None. The isotropy subgroup of z is
    {theta : W theta in 2 pi Z^m}, parameterized through the Smith form of W.
    """
    k = system.k
    w = np.asarray(w, dtype=int)
    rows, integral = active_weights(system, z)
    if not integral:
        return None
    if not rows:
        return None  # full torus fixes z; any theta with <w,theta> = 2 pi target works
    W = np.array(rows, dtype=int)
    S, _, V = smith(W)
    diag = [int(S[i, i]) for i in range(min(S.shape)) if S[i, i] != 0]
    r = len(diag)
    c = V.T @ w
    if np.any(c[r:] != 0):
        # a continuous direction moves w: reach any target
        j = r + int(np.flatnonzero(c[r:])[0])
        phi = np.zeros(k)
        phi[j] = 2 * np.pi * target / c[j]
        return V @ phi
    ranges = [range(abs(d)) for d in diag]
    count = 0
    for js in itertools.product(*ranges):
        count += 1
        if count > max_enum:
            break
        val = sum(c[i] * js[i] / diag[i] for i in range(r))
        if abs((val - target) - round(val - target)) < 1e-12:
            phi = np.zeros(k)
            phi[:r] = [2 * np.pi * js[i] / diag[i] for i in range(r)]
            return V @ phi
    return None


def restricted_weight(w, lattice):
    """gcd of the pairings of an integer weight with an integer lattice basis."""
    vals = [abs(int(x)) for x in np.asarray(w, dtype=int) @ np.asarray(lattice, dtype=int)]
    g = 0
    for v in vals:
        g = gcd(g, v)
    return g
