"""Manufactured-solution oracle: trig-in-x times polynomial-in-y fields.

Everything here is exact coefficient arithmetic on numpy Polynomials
(convolution in the Fourier index, polynomial calculus in y).  It shares
no differentiation matrices or solver state with the package, so solver
output can be checked against it as an independent reference.
"""

import numpy as np
from numpy.polynomial import Polynomial


class ModePoly:
    """Finite Fourier sum sum_k poly_k(y) exp(i k xi0 x) with exact calculus."""

    def __init__(self, xi0, modes=None):
        self.xi0 = xi0
        self.modes = {} if modes is None else dict(modes)

    @classmethod
    def cosx(cls, xi0, k, poly):
        p = Polynomial(np.asarray(poly.coef, dtype=complex))
        return cls(xi0, {k: 0.5 * p, -k: 0.5 * p})

    @classmethod
    def sinx(cls, xi0, k, poly):
        p = Polynomial(np.asarray(poly.coef, dtype=complex))
        return cls(xi0, {k: p / 2j, -k: -p / 2j})

    @classmethod
    def xmean(cls, xi0, poly):
        return cls(xi0, {0: Polynomial(np.asarray(poly.coef, dtype=complex))})

    def dx(self):
        return ModePoly(self.xi0, {k: (1j * k * self.xi0) * p for k, p in self.modes.items()})

    def dy(self):
        return ModePoly(self.xi0, {k: p.deriv() for k, p in self.modes.items()})

    def lap(self):
        out = {}
        for k, p in self.modes.items():
            out[k] = p.deriv(2) - (k * self.xi0) ** 2 * p
        return ModePoly(self.xi0, out)

    def __add__(self, other):
        out = dict(self.modes)
        for k, p in other.modes.items():
            out[k] = out[k] + p if k in out else p
        return ModePoly(self.xi0, out)

    def __sub__(self, other):
        return self + other.scaled(-1.0)

    def scaled(self, a):
        return ModePoly(self.xi0, {k: a * p for k, p in self.modes.items()})

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            return ModePoly(self.xi0, {k: p * other for k, p in self.modes.items()})
        out = {}
        for k1, p1 in self.modes.items():
            for k2, p2 in other.modes.items():
                k = k1 + k2
                prod = p1 * p2
                out[k] = out[k] + prod if k in out else prod
        return ModePoly(self.xi0, out)

    def max_mode(self):
        return max(abs(k) for k in self.modes)

    def callable(self):
        modes = dict(self.modes)

        def fn(X, Y):
            out = np.zeros(np.broadcast_shapes(np.shape(X), np.shape(Y)), dtype=complex)
            for k, p in modes.items():
                out += p(np.asarray(Y, dtype=complex)) * np.exp(1j * k * self.xi0 * np.asarray(X))
            return out.real

        return fn


def linearized_force(profile, psi, q=None):
    """Force (f, g) making ``psi`` the exact linearized solution.

        f = -Lap v + F v_x + F' w + q_x,   g = -Lap w + F w_x + q_y,

    with v = psi_y, w = -psi_x and an optional manufactured pressure q.
    """
    F = Polynomial([profile.C, profile.B, 3.0 * profile.A])
    Fp = F.deriv()
    v = psi.dy()
    w = psi.dx().scaled(-1.0)
    f = v.lap().scaled(-1.0) + v.dx() * F + w * Fp
    g = w.lap().scaled(-1.0) + w.dx() * F
    if q is not None:
        f = f + q.dx()
        g = g + q.dy()
    return f, g, v, w


def nonlinear_force(profile, psi, q=None):
    """Force making ``psi`` the exact solution of the nonlinear problem."""
    f, g, v, w = linearized_force(profile, psi, q=q)
    f = f + v * v.dx() + w * v.dy()
    g = g + v * w.dx() + w * w.dy()
    return f, g, v, w
