"""Built-in systems: the 1:2 resonant wave family and harmonic oscillators."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigInvalid, DegenerateKernel, SymmetryViolation
from .polynomial import Polynomial
from .system_model import (HamiltonianModel, HamiltonianSystem, PhaseSpace, SymmetrySpec,
                           rotation_generator, standard_omega)

# invariant order: X1, X2, X3, X4, U1, U2
INVARIANTS = ("X1", "X2", "X3", "X4", "U1", "U2")
SWAP = (1, 0, 3, 2, 5, 4)


def _swap_exps(e):
    return tuple(e[i] for i in SWAP)


@dataclass(frozen=True)
class WaveResonanceParams:
    """Coefficients of h(X1..X4, U1, U2) and the base amplitude C.

    terms maps exponent 6-tuples to coefficients. The polynomial must be
    invariant under X1<->X2, X3<->X4, U1<->U2.
    """

    terms: dict = field(default_factory=dict)
    C: float = 1.0

    def polynomial(self):
        return Polynomial(6, self.terms)

    def validate(self):
        for e, c in self.terms.items():
            if len(e) != 6:
                raise SymmetryViolation(f"term {e} does not have 6 exponents")
            if abs(self.terms.get(_swap_exps(e), 0.0) - c) > 1e-14 * max(1.0, abs(c)):
                raise SymmetryViolation(f"term {e} breaks the swap symmetry")
        if not self.C > 0:
            raise SymmetryViolation("C must be positive")
        b1 = self.coefficients()["b1"]
        if b1 == 0:
            raise SymmetryViolation("b1 vanishes at the base point")
        return self

    def base_invariants(self, C=None):
        C = self.C if C is None else C
        return np.array([0.0, 0.0, C * C, 0.0, 0.0, 0.0])

    def coefficients(self, I=None):
        """a1..a4, b1, b2 (partial derivatives) at invariant values I (default: base)."""
        I = self.base_invariants() if I is None else np.asarray(I, dtype=float)
        g = self.polynomial().gradient(I)
        return dict(zip(("a1", "a2", "a3", "a4", "b1", "b2"), g))


def _sym_terms(raw):
    out = {}
    for e, c in raw.items():
        for key in {tuple(e), _swap_exps(tuple(e))}:
            out[key] = out.get(key, 0.0) + c
    return out


def default_wave_params(C=1.0):
    """h = X1+X2 + 2(X3+X4) + (U1+U2) - (X1X3+X2X4) + 1/2 (X1X4+X2X3)."""
    raw = {
        (1, 0, 0, 0, 0, 0): 1.0,
        (0, 0, 1, 0, 0, 0): 2.0,
        (0, 0, 0, 0, 1, 0): 1.0,
        (1, 0, 1, 0, 0, 0): -1.0,
        (1, 0, 0, 1, 0, 0): 0.5,
    }
    return WaveResonanceParams(_sym_terms(raw), float(C))


def linear_wave_params(a1, a3, b1, C=1.0):
    """Constant-coefficient family h = a1(X1+X2) + a3(X3+X4) + b1(U1+U2)."""
    raw = {(1, 0, 0, 0, 0, 0): a1, (0, 0, 1, 0, 0, 0): a3, (0, 0, 0, 0, 1, 0): b1}
    return WaveResonanceParams(_sym_terms(raw), float(C))


def random_wave_params(rng, C=1.0, quad_prob=0.5):
    """Random symmetric polynomial of degree <= 2 in the six invariants."""
    while True:
        raw = {}
        for i in range(6):
            e = [0] * 6
            e[i] = 1
            raw[tuple(e)] = rng.uniform(0.5, 2.0) * rng.choice([-1, 1])
        for i in range(6):
            for j in range(i, 6):
                if rng.random() < quad_prob:
                    e = [0] * 6
                    e[i] += 1
                    e[j] += 1
                    raw[tuple(e)] = rng.uniform(-1.0, 1.0)
        p = WaveResonanceParams(_sym_terms(raw), float(C))
        if abs(p.coefficients()["b1"]) > 0.1:
            return p


def params_from_dict(d):
    d = dict(d or {})
    C = float(d.get("C", 1.0))
    if "terms" in d:
        terms = {}
        for t in d["terms"]:
            e = tuple(int(x) for x in t["monomial"])
            terms[e] = terms.get(e, 0.0) + float(t["coeff"])
        return WaveResonanceParams(terms, C)
    return default_wave_params(C)


def wave_invariants(z):
    """Values, gradients (6 x 8) and Hessians (6 x 8 x 8) of X1..X4, U1, U2."""
    x = z[0::2]
    y = z[1::2]
    vals = np.empty(6)
    grads = np.zeros((6, 8))
    hess = np.zeros((6, 8, 8))
    for j in range(4):
        vals[j] = x[j] ** 2 + y[j] ** 2
        grads[j, 2 * j] = 2 * x[j]
        grads[j, 2 * j + 1] = 2 * y[j]
        hess[j, 2 * j, 2 * j] = hess[j, 2 * j + 1, 2 * j + 1] = 2.0
    for u, (p, q) in enumerate(((0, 2), (1, 3))):
        # U = Re(z_p^2 conj(z_q)) = (x_p^2 - y_p^2) x_q + 2 x_p y_p y_q
        xp, yp, xq, yq = x[p], y[p], x[q], y[q]
        ip, jp, iq, jq = 2 * p, 2 * p + 1, 2 * q, 2 * q + 1
        vals[4 + u] = (xp * xp - yp * yp) * xq + 2 * xp * yp * yq
        g = grads[4 + u]
        g[ip] = 2 * xp * xq + 2 * yp * yq
        g[jp] = -2 * yp * xq + 2 * xp * yq
        g[iq] = xp * xp - yp * yp
        g[jq] = 2 * xp * yp
        H = hess[4 + u]
        H[ip, ip], H[jp, jp] = 2 * xq, -2 * xq
        H[ip, jp] = H[jp, ip] = 2 * yq
        H[ip, iq] = H[iq, ip] = 2 * xp
        H[ip, jq] = H[jq, ip] = 2 * yp
        H[jp, iq] = H[iq, jp] = -2 * yp
        H[jp, jq] = H[jq, jp] = 2 * xp
    return vals, grads, hess


def wave_system(params=None):
    """Wave-resonance system on C^4 = R^8 with the T^2 x Z2 action.

    Omega and the inner product are twice the standard ones, so that
    J = (|z1|^2 + 2|z3|^2, |z2|^2 + 2|z4|^2).
    """
    params = default_wave_params() if params is None else params
    params.validate()
    poly = params.polynomial()

    def h(z):
        return poly(wave_invariants(z)[0])

    def grad(z):
        I, dI, _ = wave_invariants(z)
        return poly.gradient(I) @ dI

    def hess(z):
        I, dI, d2I = wave_invariants(z)
        return dI.T @ poly.hessian(I) @ dI + np.tensordot(poly.gradient(I), d2I, axes=1)

    space = PhaseSpace(standard_omega(4, 2.0), 2.0 * np.eye(8))
    A1 = rotation_generator([1, 0, 2, 0])
    A2 = rotation_generator([0, 1, 0, 2])
    swap = np.zeros((8, 8))
    for a, b in ((0, 1), (1, 0), (2, 3), (3, 2)):
        swap[2 * a:2 * a + 2, 2 * b:2 * b + 2] = np.eye(2)
    sym = SymmetrySpec(np.array([A1, A2]), (np.eye(8), swap))
    return HamiltonianSystem(space, sym, HamiltonianModel(h, grad, hess), name="wave_resonance",
                             meta={"params": params})


def wave_base_point(C):
    z = np.zeros(8)
    z[4] = C
    return z


def complex_coords(z):
    z = np.asarray(z, dtype=float)
    return z[0::2] + 1j * z[1::2]


def real_coords(w):
    w = np.asarray(w, dtype=complex)
    out = np.empty(2 * w.size)
    out[0::2] = w.real
    out[1::2] = w.imag
    return out


@dataclass(frozen=True)
class WaveReference:
    C: float
    xi_hat1: float
    xi2: float
    a1: float
    a2: float
    a3: float
    a4: float
    b1: float
    b2: float
    lam1_plus: float
    lam1_minus: float
    lam2: float
    lam4: float
    slope: float
    params: WaveResonanceParams = None

    @property
    def eigenvalues(self):
        return np.sort([self.lam1_plus, self.lam1_minus, self.lam2, self.lam2,
                        self.lam4, self.lam4])

    @property
    def base_point(self):
        return wave_base_point(self.C)

    @property
    def generator(self):
        return np.array([self.xi_hat1, self.xi2])

    def n(self, eta):
        return self.C + eta / (4 * self.C)

    def beta(self, eta, Y1):
        return self.b1 * Y1 / (4 * self.n(eta))

    def nondegeneracy(self):
        """Both forms of the lambda_2 nondegeneracy condition at the base point.

        a2 != a4 separates the lambda_2 and lambda_4 crossings; the v1 and f2
        formulas need a4 - 2 a2 != 0 (checked at the evaluation point).
        """
        return {"a2_minus_a4": self.a2 - self.a4, "f2_denominator": self.a4 - 2 * self.a2}

    def _kernel2_coeffs(self, eta, X2, alpha=0.0):
        n = self.n(eta)
        c = self.params.coefficients([0.0, X2, n * n, 0.0, 0.0, 0.0])
        # the generator is pinned at xi2 = a2(base) + alpha, so a2 is not re-evaluated
        c["den"] = c["a4"] - 2 * (self.a2 + alpha)
        if abs(c["den"]) <= 1e-12 * max(1.0, abs(c["a4"]), abs(self.a2)):
            raise DegenerateKernel("a4 - 2(a2 + alpha) vanishes: lambda_2 reduction is singular")
        return c

    def v1_z4(self, z2, alpha, eta=0.0):
        """z4 on the lambda_2 kernel (complex z2).

        a4 and b2 at (X1, X2, X3, X4, U1, U2) = (0, |z2|^2, n^2, 0, 0, 0); a2 at the base.
        """
        c = self._kernel2_coeffs(eta, abs(z2) ** 2, alpha)
        return -c["b2"] * z2 ** 2 / (2 * c["den"])

    def f2(self, X2, alpha, eta=0.0):
        """Reduced lambda_2 coefficient, same evaluation point as v1_z4."""
        c = self._kernel2_coeffs(eta, X2, alpha)
        return c["b2"] ** 2 * X2 / (2 * c["den"]) + alpha


def wave_reference(params=None, xi2=0.0):
    params = default_wave_params() if params is None else params
    c = params.coefficients()
    C = params.C
    return WaveReference(
        C=C, xi_hat1=c["a3"] / 2, xi2=float(xi2),
        a1=c["a1"], a2=c["a2"], a3=c["a3"], a4=c["a4"], b1=c["b1"], b2=c["b2"],
        lam1_plus=c["a1"] - c["a3"] / 2 + C * c["b1"],
        lam1_minus=c["a1"] - c["a3"] / 2 - C * c["b1"],
        lam2=c["a2"] - xi2, lam4=c["a4"] - 2 * xi2, slope=1.0 / (4 * C),
        params=params)


def oscillator_system(frequencies, quartic=None):
    """h = sum_j w_j |z_j|^2 (+ optional polynomial in real coordinates).

    One S^1 per complex coordinate, with the same doubled conventions as the
    wave model so that J_j = |z_j|^2 and h = J^w.
    """
    w = np.asarray(frequencies, dtype=float)
    n = w.size
    if n < 1:
        raise ConfigInvalid("oscillator needs at least one frequency")
    D = np.kron(np.diag(w), np.eye(2)) * 2.0
    extra = quartic

    def h(z):
        val = 0.5 * z @ D @ z
        return val + (extra(z) if extra is not None else 0.0)

    def grad(z):
        g = D @ z
        return g + (extra.gradient(z) if extra is not None else 0.0)

    def hess(z):
        return D + (extra.hessian(z) if extra is not None else 0.0)

    space = PhaseSpace(standard_omega(n, 2.0), 2.0 * np.eye(2 * n))
    gens = np.array([rotation_generator(np.eye(n)[j]) for j in range(n)])
    return HamiltonianSystem(space, SymmetrySpec(gens, (np.eye(2 * n),)),
                             HamiltonianModel(h, grad, hess), name="oscillator",
                             meta={"frequencies": w.tolist()})


def _matrix(x, dim, what):
    try:
        M = np.asarray(x, dtype=float)
    except (TypeError, ValueError) as exc:
        raise ConfigInvalid(f"{what} is not a numeric matrix") from exc
    if M.shape != (dim, dim):
        raise ConfigInvalid(f"{what} must be {dim}x{dim}, got {M.shape}")
    return M


def system_from_config(doc, rng=None):
    """Build a HamiltonianSystem from the JSON model document."""
    if not isinstance(doc, dict):
        raise ConfigInvalid("model document must be an object")
    ham = doc.get("hamiltonian")
    if not isinstance(ham, dict) or "kind" not in ham:
        raise ConfigInvalid("missing hamiltonian.kind")
    if ham["kind"] == "builtin":
        name = ham.get("name")
        params = ham.get("params", {}) or {}
        if name == "wave_resonance":
            try:
                return wave_system(params_from_dict(params))
            except SymmetryViolation as exc:
                raise ConfigInvalid(str(exc)) from exc
        if name == "oscillator":
            return oscillator_system(params.get("frequencies", [1.0]))
        raise ConfigInvalid(f"unknown builtin model {name!r}")
    if ham["kind"] != "polynomial":
        raise ConfigInvalid(f"unknown hamiltonian kind {ham['kind']!r}")
    try:
        dim = int(doc["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigInvalid("polynomial models need an integer dim") from exc
    if dim <= 0 or dim % 2:
        raise ConfigInvalid("dim must be a positive even integer")
    om = doc.get("omega", "standard")
    omega = standard_omega(dim // 2) if om == "standard" else _matrix(om, dim, "omega")
    inner = _matrix(doc["inner"], dim, "inner") if "inner" in doc else np.eye(dim)
    gens = [_matrix(A, dim, "torus generator") for A in doc.get("torus_generators", [])]
    fin = [_matrix(g, dim, "finite element") for g in doc.get("finite_elements", [])]
    try:
        poly = Polynomial.from_term_list(dim, ham.get("terms", []))
        space = PhaseSpace(omega, inner)
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigInvalid(str(exc)) from exc
    sym = SymmetrySpec(np.array(gens).reshape(len(gens), dim, dim), tuple(fin),
                       doc.get("structure_constants"))
    system = HamiltonianSystem(space, sym, HamiltonianModel(poly, poly.gradient, poly.hessian),
                               name="polynomial")
    try:
        system.validate(rng)
    except SymmetryViolation as exc:
        raise ConfigInvalid(str(exc)) from exc
    return system
