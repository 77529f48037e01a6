"""Eigenfunctions of the auxiliary linear system on a constant background.

The linear system is

    L Phi = 0,   L = d_y - J d_x - P,
    M Phi = 0,   M = d_t - i a^{-1} J d_x^2 - i a^{-1} P d_x - a^{-1} V,

with J = a^{-1} diag(1, -1), P = [[0, u], [-v, 0]], and a^2 = +1 or -1
selecting the equation type (a = 1 or a = i).  On the constant background
u = rho, v = epsilon * rho the matrix V vanishes and the mean field is
w = epsilon * rho^2.

This module builds exponential eigenfunctions, their superposed
(rational-generating) variants, adjoint partners for the integral-form
transformation, and parameter jets for the high-order constructions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .exppoly import ExpPoly, Jet, lift, scalar_series

_X = ExpPoly.variable("x")
_Y = ExpPoly.variable("y")
_T = ExpPoly.variable("t")


@dataclass(frozen=True)
class GlobalParams:
    """Equation-level parameters: nonlinearity sign, equation type, background."""

    epsilon: int = 1
    alpha_sq: int = 1
    rho: float = 1.0

    def __post_init__(self):
        if self.epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        if self.alpha_sq not in (1, -1):
            raise ValueError("alpha_sq must be +1 or -1")
        if self.rho == 0:
            raise ValueError("rho must be nonzero")

    @property
    def alpha(self):
        """The fixed square root of alpha_sq: 1 for +1, i for -1."""
        return 1.0 + 0.0j if self.alpha_sq == 1 else 1.0j

    def background_w(self):
        return self.epsilon * self.rho ** 2


@dataclass(frozen=True)
class SpectralParams:
    """Per-eigenfunction parameters.

    The spectral value is lam = r * exp(iphi) with real r != 0 and real phi.
    e + i f is the superposition constant.  norm is the complex normalization;
    None selects the phi-dependent convention exp(-i phi / 2), whose own
    phi-derivative contributes -i/2.  A user-supplied norm is treated as a
    phi-independent constant.
    """

    r: float
    phi: float
    e: float = 0.0
    f: float = 0.0
    norm: complex | None = None

    def __post_init__(self):
        if self.r == 0:
            raise ValueError("r must be nonzero")

    @property
    def lam(self):
        return self.r * np.exp(1j * self.phi)

    @property
    def sup_const(self):
        return self.e + 1j * self.f

    def norm_value(self):
        if self.norm is None:
            return np.exp(-0.5j * self.phi)
        return complex(self.norm)

    def norm_log_dphi(self):
        """d/dphi of log(norm): -i/2 for the default convention, 0 for constants."""
        return -0.5j if self.norm is None else 0.0


def exponent_coeffs(sp, gp):
    """Coefficients (ax, ay, at) of the exponent ax*x + ay*y + at*t."""
    lam = sp.lam
    alpha = gp.alpha
    eps = gp.epsilon
    rho2 = gp.rho ** 2
    ax = -(alpha / 2) * (lam + eps * rho2 / lam)
    ay = 0.5 * (lam - eps * rho2 / lam)
    at = 1j * ax * ay / alpha
    return ax, ay, at


def make_eigenfunction(sp, gp):
    """Exponential solution pair (xi, eta) of the linear system."""
    ax, ay, at = exponent_coeffs(sp, gp)
    carrier = ExpPoly.exponential((ax, ay, at))
    rho1 = sp.norm_value()
    xi = carrier * rho1
    eta = carrier * (sp.lam * rho1 / gp.rho)
    return xi, eta


def superposition_linear_coeffs(sp, gp):
    """Coefficients of x, y, t in the phi-derivative of the exponent."""
    ax, ay, _ = exponent_coeffs(sp, gp)
    alpha = gp.alpha
    lam = sp.lam
    cx = -1j * alpha * ay
    cy = -1j * ax / alpha
    ct = 0.5 * (lam ** 2 + gp.rho ** 4 / lam ** 2)
    return cx, cy, ct


def make_superposed(sp, gp):
    """Rational-generating eigenfunction pair: apply (F + d/dphi) to (xi, eta).

    Returns (Pfac * xi, Qfac * eta) where both prefactors share the linear part
    cx*x + cy*y + ct*t from superposition_linear_coeffs and differ in their
    constants: Pfac carries F + dlog(norm), Qfac carries F + i + dlog(norm),
    the exact phi-derivative of log(lam * norm).
    """
    xi, eta = make_eigenfunction(sp, gp)
    cx, cy, ct = superposition_linear_coeffs(sp, gp)
    linear = _X * cx + _Y * cy + _T * ct
    dlog = sp.norm_log_dphi()
    pfac = linear + (sp.sup_const + dlog)
    qfac = linear + (sp.sup_const + 1j + dlog)
    return pfac * xi, qfac * eta


class EigenMatrix:
    """2x2 solution matrix pairing (xi, eta) with its reflection partner.

    The second column (-eps * R(eta), R(xi)), with R the reflect-conjugation,
    is again a solution of the linear system, and the assembled matrix
    satisfies conj(theta)(x, y, t) = sigma theta(-x, y, t) sigma^{-1} with
    sigma = [[0, -eps], [1, 0]].
    """

    __slots__ = ("entries", "epsilon", "sp")

    def __init__(self, xi, eta, epsilon, sp=None):
        if epsilon not in (1, -1):
            raise ValueError("epsilon must be +1 or -1")
        self.epsilon = epsilon
        self.sp = sp
        self.entries = (
            (xi, eta.reflect_conj() * (-epsilon)),
            (eta, xi.reflect_conj()),
        )

    def entry(self, i, j):
        return self.entries[i][j]

    def det(self):
        e = self.entries
        return e[0][0] * e[1][1] - e[0][1] * e[1][0]

    def eval(self, x, y, t):
        """Evaluate to an array of shape broadcast(x,y,t).shape + (2, 2)."""
        rows = [[self.entries[i][j].eval(x, y, t) for j in range(2)]
                for i in range(2)]
        return np.stack([np.stack(r, axis=-1) for r in rows], axis=-2)

    def symmetry_residual(self, points):
        """Max deviation of conj(theta)(x) from sigma theta(-x) sigma^{-1}."""
        eps = self.epsilon
        worst = 0.0
        for (x, y, t) in points:
            th = np.array([[self.entries[i][j].eval(x, y, t)
                            for j in range(2)] for i in range(2)])
            rf = np.array([[self.entries[i][j].eval(-x, y, t)
                            for j in range(2)] for i in range(2)])
            # sigma A sigma^{-1} = [[d, -eps*c], [-eps*b, a]]
            conjugated = np.array([
                [rf[1][1], -eps * rf[1][0]],
                [-eps * rf[0][1], rf[0][0]],
            ])
            worst = max(worst, np.max(np.abs(np.conj(th) - conjugated)))
        return worst


def make_eigen_matrix(sp, gp, superposed=True):
    pair = make_superposed(sp, gp) if superposed else make_eigenfunction(sp, gp)
    return EigenMatrix(pair[0], pair[1], gp.epsilon, sp=sp)


def make_adjoint(theta, gp):
    """Adjoint-system partner of a solution column for the alpha^2 = -1 branch.

    Applies reflect-conjugation componentwise, then the constant matrix
    i * kappa with kappa = diag(1, eps).
    """
    if gp.alpha_sq != -1:
        raise ValueError("the adjoint construction applies to alpha_sq = -1")
    xi, eta = theta
    return (xi.reflect_conj() * 1j, eta.reflect_conj() * (1j * gp.epsilon))


def lax_apply(pair, gp):
    """Symbolic action of (L, M) on a column; returns four ExpPoly residuals."""
    xi, eta = pair
    rho = gp.rho
    eps = gp.epsilon
    ainv = 1.0 / gp.alpha
    l1 = xi.derivative("y") - xi.derivative("x") * ainv - eta * rho
    l2 = eta.derivative("y") + eta.derivative("x") * ainv + xi * (eps * rho)
    m1 = (xi.derivative("t") - xi.derivative("x", 2) * (1j * ainv ** 2)
          - eta.derivative("x") * (1j * ainv * rho))
    m2 = (eta.derivative("t") + eta.derivative("x", 2) * (1j * ainv ** 2)
          + xi.derivative("x") * (1j * ainv * eps * rho))
    return l1, l2, m1, m2


def lax_residual(pair, gp, points):
    """Max modulus of L Phi and M Phi over the points (exact derivatives)."""
    residuals = lax_apply(pair, gp)
    worst = 0.0
    for (x, y, t) in points:
        for res in residuals:
            worst = max(worst, abs(res.eval(x, y, t)))
    return worst


def adjoint_residual(phi, gp, points):
    """Max modulus of the adjoint-system action on a make_adjoint output.

    On the constant background with alpha = i the adjoint partners satisfy

        p1_y + i p1_x - eps rho p2 = 0,    p1_t - i p1_xx + eps rho p2_x = 0,
        p2_y - i p2_x + rho p1     = 0,    p2_t + i p2_xx - rho p1_x     = 0,

    obtained by reflect-conjugating the linear system and absorbing the
    constant matrix i * diag(1, eps).
    """
    if gp.alpha_sq != -1:
        raise ValueError("the adjoint system applies to alpha_sq = -1")
    p1, p2 = phi
    rho = gp.rho
    eps = gp.epsilon
    rows = (
        p1.derivative("y") + p1.derivative("x") * 1j - p2 * (eps * rho),
        p2.derivative("y") - p2.derivative("x") * 1j + p1 * rho,
        p1.derivative("t") - p1.derivative("x", 2) * 1j
        + p2.derivative("x") * (eps * rho),
        p2.derivative("t") + p2.derivative("x", 2) * 1j
        - p1.derivative("x") * rho,
    )
    worst = 0.0
    for (x, y, t) in points:
        for res in rows:
            worst = max(worst, abs(res.eval(x, y, t)))
    return worst


def random_points(n, box=1.5, seed=0):
    rng = np.random.default_rng(seed)
    return rng.uniform(-box, box, size=(n, 3))


# ---- parameter jets for the high-order constructions ----

def eigenfunction_jet(sp, gp, order):
    """Jet in delta of (xi, eta) at spectral angle phi + delta."""
    lam = sp.lam
    eps = gp.epsilon
    alpha = gp.alpha
    rho2 = gp.rho ** 2
    fact = [math.factorial(k) for k in range(order + 1)]
    lam_jet = scalar_series([lam * 1j ** k / fact[k] for k in range(order + 1)])
    inv_jet = scalar_series([(-1j) ** k / (lam * fact[k]) for k in range(order + 1)])
    if sp.norm is None:
        rho1 = sp.norm_value()
        norm_jet = scalar_series([rho1 * (-0.5j) ** k / fact[k]
                                  for k in range(order + 1)])
    else:
        norm_jet = lift(complex(sp.norm), order)
    ax_jet = (lam_jet + inv_jet * (eps * rho2)) * (-alpha / 2)
    ay_jet = (lam_jet - inv_jet * (eps * rho2)) * 0.5
    at_jet = ax_jet * ay_jet * (1j / alpha)
    omega_jet = ax_jet * _X + ay_jet * _Y + at_jet * _T
    growth = (omega_jet - omega_jet.coefficient(0)).exp()
    ax0, ay0, at0 = exponent_coeffs(sp, gp)
    carrier = ExpPoly.exponential((ax0, ay0, at0))
    xi_jet = norm_jet * carrier * growth
    eta_jet = lam_jet * norm_jet * (1.0 / gp.rho) * carrier * growth
    return xi_jet, eta_jet


def superposed_jet(sp, gp, order):
    """Jet in delta of the superposed family (F + d/dphi)(xi, eta) at phi + delta."""
    xi_jet, eta_jet = eigenfunction_jet(sp, gp, order + 1)
    fconst = sp.sup_const
    xi_s = xi_jet * fconst + xi_jet.dparam()
    eta_s = eta_jet * fconst + eta_jet.dparam()
    return xi_s, eta_s
