"""Continuation, persistence surfaces, crossings, branch switching and stability."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (DegenerateKernel, NewtonDiverged, NoBranchFound, OutOfChart, ReleqError,
                     StepFailed)
from .isotropy import (IsotropyLabel, active_weights, integer_kernel, point_isotropy,
                       restricted_weight, torus_elements_acting_as, torus_weights)
from .reduction_pipeline import NewtonOptions, build_reduced, reduced_point
from .slice_builder import build_slice, normal_space, orbit_split


# ---------------------------------------------------------------- data types

@dataclass(frozen=True)
class StabilityVerdict:
    verdict: str
    eigenvalues: np.ndarray
    min_abs: float
    dim: int


@dataclass(frozen=True)
class BranchPoint:
    z: np.ndarray
    xi: np.ndarray
    mu: np.ndarray
    arclength: float
    eigs: np.ndarray
    isotropy: str
    stability: str
    residual: float
    tangent: Optional[np.ndarray] = None


@dataclass
class Branch:
    points: list
    kind: str
    parent: Optional[tuple] = None
    folds: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)
    branch_id: str = "b0"


@dataclass(frozen=True)
class Constraint:
    """Either xi[index] = value or mu[index] = value."""

    kind: str
    index: int
    value: Optional[float] = None


@dataclass(frozen=True)
class CrossingEvent:
    index: int
    tau: float
    arclength: float
    z: np.ndarray
    xi: np.ndarray
    eigenvalues: np.ndarray
    crossing_values: np.ndarray
    multiplicity: int
    kernel: np.ndarray
    kernel_isotropy: IsotropyLabel
    lattice: np.ndarray
    branch_id: str = "b0"


@dataclass
class Classification:
    kind: str
    weight: Optional[int] = None
    symmetry: Optional[dict] = None
    unfolding: Optional[str] = None
    details: dict = field(default_factory=dict)
    reduced: object = None


# ---------------------------------------------------------------- stability

def formal_stability(system, z, xi, tol_rank=1e-8, rel_tol=1e-8):
    """Second variation of h - J^xi on ker DJ(z) minus the orbit directions."""
    z = np.asarray(z, dtype=float)
    _, m, _ = orbit_split(system, z, tol_rank)
    Wst = normal_space(system, z, m.shape[1])
    if Wst.shape[1] == 0:
        return StabilityVerdict("definite+", np.zeros(0), np.inf, 0)
    S = Wst.T @ system.augmented_hessian(z, xi) @ Wst
    lam = np.linalg.eigvalsh(0.5 * (S + S.T))
    amin = float(np.abs(lam).min())
    if amin <= rel_tol * max(1.0, np.abs(lam).max()):
        verdict = "degenerate"
    elif lam.min() > 0:
        verdict = "definite+"
    elif lam.max() < 0:
        verdict = "definite-"
    else:
        verdict = "indefinite"
    return StabilityVerdict(verdict, lam, amin, Wst.shape[1])


def stability_kernel(system, z, xi, count, tol_rank=1e-8):
    """Eigenvalues of the stability form and the `count` smallest-|lambda| eigenvectors."""
    _, m, _ = orbit_split(system, z, tol_rank)
    Wst = normal_space(system, z, m.shape[1])
    S = Wst.T @ system.augmented_hessian(z, xi) @ Wst
    lam, vec = np.linalg.eigh(0.5 * (S + S.T))
    idx = np.argsort(np.abs(lam))[:count]
    return lam, lam[idx], Wst @ vec[:, idx]


def make_point(system, z, xi, arclength=0.0, lattice=None, tangent=None):
    z = np.asarray(z, dtype=float)
    xi = np.asarray(xi, dtype=float)
    st = formal_stability(system, z, xi)
    iso = point_isotropy(system, z, lattice)
    res = float(np.linalg.norm(system.augmented_gradient(z, xi)))
    return BranchPoint(z, xi, system.momentum(z), float(arclength), np.sort(st.eigenvalues),
                       str(iso), st.verdict, res, tangent)


def base_lattice(system, z):
    """Integer generators of the identity component of the torus isotropy of z."""
    if system.k == 0:
        return np.zeros((0, 0), dtype=int)
    rows, integral = active_weights(system, z)
    if not integral:
        raise ReleqError("non-integral torus weights")
    if not rows:
        return np.eye(system.k, dtype=int)
    return integer_kernel(np.array(rows, dtype=int), system.k)


# ---------------------------------------------------------------- continuation

class _Equations:
    """RE equations in u = (z, xi) with phase pins and user constraints."""

    def __init__(self, system, z_ref, constraints, tol_rank=1e-8):
        self.system = system
        self.n2, self.k = system.dim, system.k
        _, m, _ = orbit_split(system, z_ref, tol_rank)
        self.pins = system.group_orbit_tangent(z_ref) @ m if m.shape[1] else np.zeros((self.n2, 0))
        self.z_ref = np.array(z_ref, dtype=float)
        self.constraints = list(constraints)

    def split(self, u):
        return u[:self.n2], u[self.n2:]

    def residual(self, u):
        s = self.system
        z, xi = self.split(u)
        out = [s.augmented_gradient(z, xi), self.pins.T @ (z - self.z_ref)]
        for c in self.constraints:
            val = xi[c.index] if c.kind == "xi" else s.momentum(z)[c.index]
            out.append(np.array([val - c.value]))
        return np.concatenate(out)

    def jacobian(self, u):
        s = self.system
        z, xi = self.split(u)
        top = np.hstack([s.augmented_hessian(z, xi), -s.momentum_jacobian(z).T])
        rows = [top, np.hstack([self.pins.T, np.zeros((self.pins.shape[1], self.k))])]
        for c in self.constraints:
            r = np.zeros((1, self.n2 + self.k))
            if c.kind == "xi":
                r[0, self.n2 + c.index] = 1.0
            else:
                r[0, :self.n2] = s.momentum_jacobian(z)[c.index]
            rows.append(r)
        return np.vstack(rows)

    def tangent(self, u, prev=None, null_rel=1e-6):
        J = self.jacobian(u)
        _, sv, vt = np.linalg.svd(J, full_matrices=True)
        sfull = np.zeros(vt.shape[0])
        sfull[:sv.size] = sv
        near = vt[sfull <= null_rel * max(sfull.max(), 1e-300)]
        if prev is not None and near.shape[0] > 1:
            t = near.T @ (near @ prev)
        else:
            t = vt[-1]
        t = t / np.linalg.norm(t)
        if prev is not None and t @ prev < 0:
            t = -t
        return t


def _resolve_constraints(system, z, xi, fixed):
    out = []
    for c in fixed or ():
        if not isinstance(c, Constraint):
            c = Constraint(*c)
        if c.kind not in ("xi", "mu"):
            raise ValueError(f"unknown constraint kind {c.kind!r}")
        if c.value is None:
            val = xi[c.index] if c.kind == "xi" else system.momentum(z)[c.index]
            c = Constraint(c.kind, c.index, float(val))
        out.append(c)
    return out


def _newton_u(eq, u0, extra=None, tol=1e-10, max_iter=15):
    """Gauss-Newton on the (overdetermined, consistent) RE system."""
    u = u0.copy()
    for _ in range(max_iter):
        F = eq.residual(u)
        J = eq.jacobian(u)
        if extra is not None:
            fe, je = extra(u)
            F = np.concatenate([F, fe])
            J = np.vstack([J, je])
        nf = np.linalg.norm(F)
        if not np.isfinite(nf):
            break
        if nf <= tol:
            return u, nf
        u = u - np.linalg.lstsq(J, F, rcond=None)[0]
    F = eq.residual(u)
    if extra is not None:
        F = np.concatenate([F, extra(u)[0]])
    nf = np.linalg.norm(F)
    if nf <= tol:
        return u, nf
    raise NewtonDiverged(f"continuation corrector residual {nf:.3e}")


def find_relative_equilibrium(system, z0, xi0, fixed=(), tol=1e-11, max_iter=30):
    """Gauss-Newton from a seed (z0, xi0); pins remove the group orbit freedom."""
    z0 = np.asarray(z0, dtype=float)
    xi0 = np.asarray(xi0, dtype=float)
    cons = _resolve_constraints(system, z0, xi0, fixed)
    try:
        eq = _Equations(system, z0, cons)
    except ReleqError:
        eq = _Equations(system, z0, cons, tol_rank=1e-6)
    u, _ = _newton_u(eq, np.concatenate([z0, xi0]), tol=tol, max_iter=max_iter)
    return eq.split(u)


def continue_branch(system, start, direction, step_size, n_steps, fixed=(), bounds=None,
                    tol=1e-10, max_newton=12, lattice=None, kind="persistence_sigma",
                    branch_id="b0"):
    """Pseudo-arclength continuation of relative equilibria in u = (z, xi).

    start: BranchPoint or (z, xi). direction: vector in R^{2n+k} orienting the
    initial tangent. bounds: (monitor, lo, hi); continuation stops before the
    first point whose monitor value leaves [lo, hi].
    """
    if isinstance(start, BranchPoint):
        z0, xi0 = start.z, start.xi
    else:
        z0, xi0 = (np.asarray(a, dtype=float) for a in start)
    n2 = system.dim
    cons = _resolve_constraints(system, z0, xi0, fixed)
    lattice = base_lattice(system, z0) if lattice is None else lattice
    u = np.concatenate([z0, xi0])
    eq = _Equations(system, z0, cons)
    u, _ = _newton_u(eq, u, tol=tol)
    t = eq.tangent(u, np.asarray(direction, dtype=float))
    s_len = 0.0
    points = [make_point(system, u[:n2], u[n2:], 0.0, lattice, t)]
    folds = []
    for _ in range(n_steps):
        ds = step_size
        for _attempt in range(5):
            eq_step = _Equations(system, u[:n2], cons)
            u_prev, t_prev = u, t

            def arc(v, u_prev=u_prev, t_prev=t_prev, ds=ds):
                return np.array([(v - u_prev) @ t_prev - ds]), t_prev[None, :]

            try:
                u_new, _ = _newton_u(eq_step, u_prev + ds * t_prev, arc, tol, max_newton)
                if np.linalg.norm(u_new - u_prev) <= 2 * ds:
                    break
            except NewtonDiverged:
                pass
            ds *= 0.5
        else:
            raise StepFailed(f"continuation step failed after 4 halvings at s={s_len:.4g}")
        t_new = eq_step.tangent(u_new, t)
        pt = make_point(system, u_new[:n2], u_new[n2:], s_len + ds, lattice, t_new)
        if bounds is not None:
            mon, lo, hi = bounds
            val = mon(pt)
            if not lo <= val <= hi:
                break
        folds += _fold_checks(system, n2, cons, points[-1], pt, t, t_new)
        s_len += ds
        u, t = u_new, t_new
        points.append(pt)
    br = Branch(points, kind, None, folds, {"fixed": cons, "step_size": step_size, "tol": tol,
                                            "lattice": np.asarray(lattice).tolist()}, branch_id)
    return br


def _fold_checks(system, n2, cons, p_old, p_new, t_old, t_new, floor=1e-8):
    fixed_xi = {c.index for c in cons if c.kind == "xi"}
    out = []
    for i in range(system.k):
        if i in fixed_xi:
            continue
        a, b = t_old[n2 + i], t_new[n2 + i]
        if abs(a) > floor and abs(b) > floor and a * b < 0:
            out.append({"component": f"xi[{i}]", "arclength": p_new.arclength})
    for i in range(system.k):
        a = system.momentum_jacobian(p_old.z)[i] @ t_old[:n2]
        b = system.momentum_jacobian(p_new.z)[i] @ t_new[:n2]
        if abs(a) > floor and abs(b) > floor and a * b < 0:
            out.append({"component": f"mu[{i}]", "arclength": p_new.arclength})
    return out


# ---------------------------------------------------------------- crossings

def _neg_count(eigs):
    return int(np.sum(np.asarray(eigs) < 0))


def detect_crossings(system, branch, tol=1e-9, max_bisect=80):
    """Locate changes in the inertia of the stability form along a branch."""
    pts = branch.points
    cons = branch.meta.get("fixed", [])
    n2 = system.dim
    events = []
    for i in range(len(pts) - 1):
        a, b = pts[i], pts[i + 1]
        if len(a.eigs) != len(b.eigs):
            continue
        na, nb = _neg_count(a.eigs), _neg_count(b.eigs)
        if na == nb:
            continue
        mult = abs(na - nb)
        ua = np.concatenate([a.z, a.xi])
        ub = np.concatenate([b.z, b.xi])
        d = ub - ua
        lo, hi, u = 0.0, 1.0, ua
        crossing = None
        for _ in range(max_bisect):
            tau = 0.5 * (lo + hi)
            eq = _Equations(system, u[:n2], cons)

            def sec(v, tau=tau):
                return np.array([(v - ua) @ d - tau * (d @ d)]), d[None, :]

            try:
                u, _ = _newton_u(eq, ua + tau * d, sec, tol=1e-12, max_iter=20)
            except NewtonDiverged:
                u, _ = _newton_u(eq, ua + tau * d, sec, tol=1e-10, max_iter=30)
            lam, cross, _ = stability_kernel(system, u[:n2], u[n2:], mult)
            crossing = (tau, u, lam, cross)
            if np.abs(cross).max() <= tol:
                break
            if _neg_count(lam) == na:
                lo = tau
            else:
                hi = tau
        tau, u, lam, cross = crossing
        z, xi = u[:n2], u[n2:]
        ktol = 1e-7 * max(np.abs(lam).max(), 1.0)
        m = int(np.sum(np.abs(lam) <= max(ktol, np.abs(cross).max())))
        lam, cross, kern = stability_kernel(system, z, xi, m)
        lattice = base_lattice(system, z)
        coeffs = 1.0 / np.sqrt(np.arange(1, m + 1))
        iso = point_isotropy(system, kern @ coeffs, lattice)
        arcl = a.arclength + tau * (b.arclength - a.arclength)
        events.append(CrossingEvent(i, tau, arcl, z, xi, np.sort(lam), cross, m, kern, iso,
                                    lattice, branch.branch_id))
    return events


# ---------------------------------------------------------------- classification

def _h_finite(system, z, xi, tol=1e-9):
    Axi = system.symmetry.algebra_element(xi) if system.k else np.zeros((system.dim,) * 2)
    scale = max(np.linalg.norm(z), 1.0)
    out = []
    for i, g in enumerate(system.symmetry.finite_elements):
        if np.allclose(g, np.eye(system.dim)):
            continue
        if np.linalg.norm(g @ z - z) <= tol * scale and \
                np.abs(g @ Axi - Axi @ g).max() <= 1e-10 * max(1.0, np.abs(Axi).max()):
            out.append(i)
    return out


def _weights_of(system, u, tol=1e-6):
    G = system.space.inner
    nu = np.linalg.norm(u)
    out = []
    for ws in torus_weights(system):
        c = ws.basis @ (ws.basis.T @ G @ u)
        if np.linalg.norm(c) > tol * nu:
            out.append((ws, c))
    return out


def classify_crossing(system, event, tol_rank=1e-8):
    dec = build_slice(system, event.z, event.xi, tol_rank, re_tol=1e-7)
    rp = build_reduced(dec)
    d = rp.d
    unfolding = "eta" if dec.dim_m else ("alpha" if dec.g_me_basis.shape[1] else None)
    if d == 0:
        return Classification("unclassified", details={"reason": "no kernel at refined point"},
                              reduced=rp)
    V0 = dec.V_basis @ rp.V0_basis
    finite = _h_finite(system, event.z, event.xi)
    if d == 1:
        u = V0[:, 0]
        sym = None
        comps = _weights_of(system, u)
        if len(comps) == 1 and any(comps[0][0].weight) and comps[0][0].integral:
            theta = torus_elements_acting_as(system, event.z, comps[0][0].weight, 0.5)
            if theta is not None:
                g = system.group_element(theta)
                if np.linalg.norm(g @ u + u) <= 1e-8 and \
                        np.linalg.norm(g @ event.z - event.z) <= 1e-8 * max(1, np.linalg.norm(event.z)):
                    sym = {"type": "torus", "theta": theta.tolist(), "matrix": g}
        if sym is None:
            for i in finite:
                g = system.symmetry.finite_elements[i]
                if np.linalg.norm(g @ u + u) <= 1e-8:
                    sym = {"type": "finite", "index": i, "matrix": g}
                    break
        kind = "pitchfork" if sym is not None else "saddle_node"
        cl = Classification(kind, None, sym, unfolding, {}, rp)
        cl.details.update(_genericity(rp, kind, unfolding))
        return cl
    if d == 2:
        comps = _weights_of(system, V0[:, 0]) + _weights_of(system, V0[:, 1])
        ws_set = {c[0].weight for c in comps}
        if len(ws_set) == 1:
            w = next(iter(ws_set))
            if any(w) and comps[0][0].integral and event.lattice.size:
                kw = restricted_weight(w, event.lattice)
                if kw > 0:
                    return Classification("complex_circle", kw, None,
                                          "alpha" if dec.g_me_basis.shape[1] else unfolding,
                                          {"weight_vector": list(w), "H_fixed_trivial": True,
                                           "finite_H": finite}, rp)
        return Classification("unclassified", None, None, unfolding,
                              {"reason": "two-dimensional kernel without a free circle action"},
                              rp)
    return Classification("unclassified", None, None, unfolding,
                          {"reason": f"kernel dimension {d}"}, rp)


def _unfold_args(rp, which, p):
    dec = rp.dec
    eta = np.zeros(dec.dim_m)
    alpha = np.zeros(dec.g_me_basis.shape[1])
    if which == "eta":
        eta[0] = p
    elif which == "alpha":
        alpha[0] = p
    return eta, alpha


def _genericity(rp, kind, unfolding, a=1e-3, h=1e-4):
    """Measured kappa (unfolding derivative) and cubic/quadratic coefficient."""
    if unfolding is None:
        return {"kappa": None, "c": None}
    u = rp.dec.V_basis @ rp.V0_basis[:, 0]
    scale = 1.0 / np.linalg.norm(u)
    try:
        def b(p, amp):
            eta, alpha = _unfold_args(rp, unfolding, p)
            return reduced_point(rp, eta, [amp * scale], alpha).b[0]
        if kind == "pitchfork":
            kappa = (b(h, a) - b(-h, a)) / (2 * h * a)
            c = (b(0, 2 * a) / (2 * a) - b(0, a) / a) / (3 * a * a)
        else:
            kappa = (b(h, 0.0) - b(-h, 0.0)) / (2 * h)
            c = (b(0, a) + b(0, -a)) / (2 * a * a)
        return {"kappa": float(kappa), "c": float(c)}
    except ReleqError:
        return {"kappa": None, "c": None}


# ---------------------------------------------------------------- branch switching

def _scalar_newton(F, p0, tol=1e-12, h=1e-7, max_iter=30):
    p = float(p0)
    f = F(p)
    for _ in range(max_iter):
        if abs(f) <= tol:
            break
        df = (F(p + h) - F(p - h)) / (2 * h)
        if df == 0 or not np.isfinite(df):
            raise NewtonDiverged("zero derivative in scalar Newton")
        p -= f / df
        f = F(p)
    if not abs(f) <= tol:
        raise NewtonDiverged(f"scalar Newton residual {f:.3e}")
    # polish: one more step if it helps
    df = (F(p + h) - F(p - h)) / (2 * h)
    if df != 0 and np.isfinite(df):
        p2 = p - f / df
        f2 = F(p2)
        if abs(f2) < abs(f):
            p, f = p2, f2
    return p, f


def switch_branch(system, event, classification, amplitudes, branch_id="b1", tol=1e-12):
    """Solve the reduced equation on the kernel ray v0 = a u for a list of amplitudes.

    Amplitudes are Euclidean lengths of the kernel displacement. The returned
    branch meta holds the unfolding values and the fitted leading coefficient
    of the phase-space displacement against s = a^2.
    """
    rp = classification.reduced
    dec = rp.dec
    kind = classification.kind
    which = classification.unfolding
    if kind not in ("pitchfork", "saddle_node", "complex_circle") or which is None:
        raise NoBranchFound(f"cannot switch at a crossing of kind {kind!r}")
    u = dec.V_basis @ rp.V0_basis[:, 0]
    scale = 1.0 / np.linalg.norm(u)
    e0 = np.zeros(rp.d)
    e0[0] = 1.0
    col = dec.W_basis[:, 0] if which == "eta" else None
    lattice = event.lattice

    def solve_at(a, v0, p0, v1g):
        def F(p):
            eta, alpha = _unfold_args(rp, which, p)
            pt = reduced_point(rp, eta, v0, alpha, v1g)
            if kind == "pitchfork":
                return pt.b[0] / a
            if kind == "saddle_node":
                return pt.b[0]
            return (pt.b @ v0) / (v0 @ v0)
        p, _ = _scalar_newton(F, p0, tol=tol)
        eta, alpha = _unfold_args(rp, which, p)
        return p, reduced_point(rp, eta, v0, alpha, v1g)

    points, pvals, amps, failures, rpts = [], [], [], [], []
    warm = {}
    order = sorted(range(len(amplitudes)), key=lambda i: abs(amplitudes[i]))
    for i in order:
        a = float(amplitudes[i])
        if a == 0.0:
            points.append((i, make_point(system, dec.base_point, dec.generator, 0.0, lattice)))
            pvals.append((i, 0.0))
            amps.append((i, 0.0))
            continue
        v0 = a * scale * e0
        p0, v1g = warm.get(np.sign(a), (0.0, None))
        try:
            p, rpt = solve_at(a, v0, p0, v1g)
        except (NewtonDiverged, OutOfChart) as exc:
            failures.append({"amplitude": a, "error": type(exc).__name__, "message": str(exc)})
            continue
        warm[np.sign(a)] = (p, rpt.v1)
        points.append((i, make_point(system, rpt.z, rpt.xi, a, lattice)))
        pvals.append((i, p))
        amps.append((i, a))
        rpts.append((i, rpt))
    if not any(a != 0 for _, a in amps):
        raise NoBranchFound("Newton failed for every amplitude")
    key = lambda t: amplitudes[t[0]]
    points = [p for _, p in sorted(points, key=key)]
    pvals = np.array([p for _, p in sorted(pvals, key=key)])
    amps = np.array([a for _, a in sorted(amps, key=key)])
    rpts = [r for _, r in sorted(rpts, key=key)]
    disp = pvals * (np.linalg.norm(col) if col is not None else 1.0)
    s = amps ** 2
    mask = amps != 0
    fit = None
    if mask.sum() >= 2:
        A = np.column_stack([s[mask], s[mask] ** 2])
        fit = np.linalg.lstsq(A, disp[mask], rcond=None)[0]
        fit_p = np.linalg.lstsq(A, pvals[mask], rcond=None)[0]
    meta = {"amplitudes": amps.tolist(), "unfolding": which, "unfolding_values": pvals.tolist(),
            "displacements": disp.tolist(), "failures": failures,
            "slope": None if fit is None else float(fit[0]),
            "slope_unfolding": None if fit is None else float(fit_p[0]),
            "reduced_points": rpts, "crossing_kind": kind}
    if kind == "complex_circle":
        meta.update(_circle_checks(system, rp, which, rpts, lattice, scale))
    parent = (event.branch_id, event.arclength)
    return Branch(points, kind, parent, [], meta, branch_id)


def _circle_checks(system, rp, which, rpts, lattice, scale, n_angles=5):
    """Orbit closure of complex-circle zeros and orthogonality of b to the orbit."""
    dec = rp.dec
    G = system.space.inner
    gen = np.asarray(lattice[:, 0], dtype=float)
    A = system.symmetry.algebra_element(gen)
    Vp = dec.V_basis @ rp.V0_basis
    R_gen = rp.V0_basis.T @ dec.V_basis.T @ G @ A @ Vp
    closure, ortho = 0.0, 0.0
    for rpt in rpts:
        v0 = rp.V0_basis.T @ rpt.v
        alpha0 = rpt.alpha
        for t in np.linspace(0.0, 2 * np.pi, n_angles, endpoint=False)[1:]:
            g = system.group_element(t * gen)
            R = rp.V0_basis.T @ dec.V_basis.T @ G @ g @ Vp
            v0r = R @ v0

            def F(p, v0r=v0r):
                eta, alpha = _unfold_args(rp, which, p)
                b = reduced_point(rp, eta, v0r, alpha).b
                return (b @ v0r) / (v0r @ v0r)
            p0 = alpha0[0] if which == "alpha" else rpt.eta[0]
            p, _ = _scalar_newton(F, p0)
            eta, alpha = _unfold_args(rp, which, p)
            zr = reduced_point(rp, eta, v0r, alpha).z
            closure = max(closure, float(np.linalg.norm(zr - g @ rpt.z)))
        for da in (0.0, 1e-3, -1e-3):
            eta, alpha = rpt.eta, rpt.alpha.copy()
            if which == "alpha":
                alpha = alpha + da
            else:
                eta = eta + da
            b = reduced_point(rp, eta, v0, alpha).b
            jv = R_gen @ v0
            ortho = max(ortho, abs(b @ jv) / np.linalg.norm(jv))
    return {"closure_error": closure, "orthogonality_error": ortho}


# ---------------------------------------------------------------- persistence

def pfaffian(A):
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    if n == 0:
        return 1.0
    if n % 2:
        return 0.0
    total = 0.0
    for j in range(1, n):
        if A[0, j] == 0:
            continue
        keep = [i for i in range(n) if i not in (0, j)]
        total += (-1) ** (j + 1) * A[0, j] * pfaffian(A[np.ix_(keep, keep)])
    return total


@dataclass
class PersistenceReport:
    points: list
    expected_rank: int
    fraction_ok: float
    sigma: list
    dec: object = None

    def to_dict(self):
        return {"expected_rank": self.expected_rank, "fraction_ok": self.fraction_ok,
                "points": self.points, "sigma": self.sigma}


def persistence_surface(system, z_e, xi, etas, alphas, tol_rank=1e-8, fd_h=1e-6,
                        rank_rel=1e-6):
    """Sample the surface of relative equilibria through a nondegenerate z_e."""
    dec = build_slice(system, z_e, xi, tol_rank)
    rp = build_reduced(dec)
    if rp.d > 0:
        raise DegenerateKernel(f"kernel dimension {rp.d} at the base point")
    r, a_dim = dec.dim_m, dec.g_me_basis.shape[1]
    expected = 2 * r
    mu0 = system.momentum(dec.base_point)

    def solve(eta, alpha):
        return reduced_point(rp, eta, np.zeros(0), alpha)

    def as_vec(x, n):
        return np.zeros(n) + np.asarray(x, dtype=float) if n else np.zeros(0)

    points, sigma = [], []
    ok = 0
    for eta in etas:
        for alpha in alphas:
            e = as_vec(eta, r)
            al = as_vec(alpha, a_dim)
            pt = solve(e, al)
            cols = []
            for j in range(r):
                dv = np.zeros(r)
                dv[j] = fd_h
                cols.append((solve(e + dv, al).z - solve(e - dv, al).z) / (2 * fd_h))
            dz_eta = cols[:]
            for j in range(a_dim):
                dv = np.zeros(a_dim)
                dv[j] = fd_h
                cols.append((solve(e, al + dv).z - solve(e, al - dv).z) / (2 * fd_h))
            orbit = system.group_orbit_tangent(pt.z) @ dec.m_basis if r else np.zeros((system.dim, 0))
            M = np.column_stack(cols + [orbit]) if cols or r else np.zeros((system.dim, 0))
            sv = np.linalg.svd(M, compute_uv=False) if M.size else np.zeros(0)
            rank = int(np.sum(sv > rank_rel * max(sv.max(initial=0.0), 1e-300))) if sv.size else 0
            _, _, s_orb = orbit_split(system, pt.z, tol_rank)
            orbit_rank = int(np.sum(s_orb > tol_rank))
            exp_here = 2 * r + (a_dim - (system.k - orbit_rank))
            ok += rank == exp_here
            rec = {"eta": e.tolist(), "alpha": al.tolist(), "z": pt.z.tolist(),
                   "xi": pt.xi.tolist(), "rank": rank, "expected_rank": exp_here,
                   "residual": float(np.linalg.norm(system.augmented_gradient(pt.z, pt.xi)))}
            points.append(rec)
            if not np.any(al):
                T = np.column_stack(dz_eta + [orbit]) if r else np.zeros((system.dim, 0))
                Om = T.T @ system.space.omega @ T
                pf = pfaffian(Om)
                norms = np.prod(np.linalg.norm(T, axis=0)) if T.size else 1.0
                dmu = system.momentum(pt.z) - mu0
                sigma.append({"eta": e.tolist(), "z": pt.z.tolist(), "pfaffian": float(pf),
                              "pfaffian_normalized": float(pf / norms),
                              "momentum_gme_drift": float(np.linalg.norm(dec.g_me_basis.T @ dmu))
                              if a_dim else 0.0})
    frac = ok / max(len(points), 1)
    return PersistenceReport(points, expected, frac, sigma, dec)
