"""Sparse multivariate polynomials with exact derivatives."""
from __future__ import annotations

import numpy as np


class Polynomial:
    """Polynomial stored as a mapping from exponent tuples to coefficients.

    Used both for user-supplied Hamiltonians on R^d and for functions of
    a handful of invariants in the built-in models.
    """

    def __init__(self, nvars, terms=None):
        self.nvars = int(nvars)
        self.terms = {}
        for exps, coeff in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != self.nvars:
                raise ValueError(f"monomial {exps} has wrong length, expected {self.nvars}")
            if min(exps, default=0) < 0:
                raise ValueError(f"negative exponent in {exps}")
            if coeff != 0:
                self.terms[exps] = self.terms.get(exps, 0.0) + float(coeff)
        self._pack()
        self._grad = None
        self._hess = None

    @classmethod
    def from_term_list(cls, nvars, term_list):
        """Build from [{"coeff": c, "monomial": [e1, ..., ed]}, ...]."""
        poly = cls(nvars)
        for term in term_list:
            poly = poly + cls(nvars, {tuple(term["monomial"]): float(term["coeff"])})
        return poly

    @classmethod
    def variable(cls, nvars, j):
        e = [0] * nvars
        e[j] = 1
        return cls(nvars, {tuple(e): 1.0})

    @classmethod
    def constant(cls, nvars, c):
        return cls(nvars, {(0,) * nvars: c})

    def _pack(self):
        if self.terms:
            self._exps = np.array(list(self.terms.keys()), dtype=int)
            self._coef = np.array(list(self.terms.values()), dtype=float)
        else:
            self._exps = np.zeros((0, self.nvars), dtype=int)
            self._coef = np.zeros(0)

    @property
    def degree(self):
        return int(self._exps.sum(axis=1).max()) if self.terms else 0

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if not self.terms:
            return 0.0
        mon = np.prod(x[None, :] ** self._exps, axis=1)
        return float(mon @ self._coef)

    def derivative(self, j):
        out = {}
        for exps, c in self.terms.items():
            if exps[j] > 0:
                e = list(exps)
                e[j] -= 1
                out[tuple(e)] = out.get(tuple(e), 0.0) + c * exps[j]
        return Polynomial(self.nvars, out)

    def gradient(self, x):
        if self._grad is None:
            self._grad = [self.derivative(j) for j in range(self.nvars)]
        return np.array([p(x) for p in self._grad])

    def hessian(self, x):
        if self._hess is None:
            if self._grad is None:
                self._grad = [self.derivative(j) for j in range(self.nvars)]
            self._hess = [[g.derivative(k) for k in range(self.nvars)] for g in self._grad]
        H = np.array([[p(x) for p in row] for row in self._hess])
        return 0.5 * (H + H.T)

    def __add__(self, other):
        if not isinstance(other, Polynomial):
            other = Polynomial.constant(self.nvars, other)
        out = dict(self.terms)
        for e, c in other.terms.items():
            out[e] = out.get(e, 0.0) + c
        return Polynomial(self.nvars, out)

    __radd__ = __add__

    def __neg__(self):
        return self * -1.0

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, Polynomial):
            return Polynomial(self.nvars, {e: c * float(other) for e, c in self.terms.items()})
        out = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return Polynomial(self.nvars, out)

    __rmul__ = __mul__

    def __pow__(self, k):
        out = Polynomial.constant(self.nvars, 1.0)
        for _ in range(int(k)):
            out = out * self
        return out

    def __repr__(self):
        return f"Polynomial(nvars={self.nvars}, terms={len(self.terms)})"
