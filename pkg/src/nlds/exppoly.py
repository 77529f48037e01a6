"""Exponential-polynomial algebra.

Implements the function class

    f(x, y, t) = sum_j  c_j * x^a_j y^b_j t^c_j * exp(p_j x + q_j y + s_j t)

with complex coefficients c_j and complex linear phases (p_j, q_j, s_j).
The class is closed under the operations the solution constructors need:
products, derivatives in x/y/t, x-antiderivatives, and the reflect-conjugation
g(x, y, t) = conj(f)(-x, y, t).

Also provides Jet, a truncated power series in one perturbation parameter
with ExpPoly coefficients, used to realize the parameter limits defining
high-order transformations.
"""

from __future__ import annotations

import math

import numpy as np

# Absolute threshold below which a term coefficient is considered zero.
COEFF_TOL = 1e-14
# Phases are identified after rounding to this many decimals.
PHASE_DECIMALS = 12
# An x-phase smaller than this integrates polynomially (it would round to 0).
_PHASE_ZERO = 5e-13
# Below this modulus the by-parts antiderivative (powers of 1/p) loses
# precision; such phases integrate via a truncated power series instead.
_PHASE_SERIES_MAX = 1e-3
# The series is truncated once terms are below this bound on |x| <= 40.
_SERIES_RANGE = 40.0
_SERIES_TAIL_TOL = 1e-20


def _phase_key(phase):
    p, q, s = phase
    return (
        round(p.real, PHASE_DECIMALS), round(p.imag, PHASE_DECIMALS),
        round(q.real, PHASE_DECIMALS), round(q.imag, PHASE_DECIMALS),
        round(s.real, PHASE_DECIMALS), round(s.imag, PHASE_DECIMALS),
    )


class ExpPoly:
    """A canonicalized sum of monomial-times-exponential terms.

    Terms are stored as tuples (coeff, (a, b, c), (p, q, s)) with non-negative
    integer powers and complex phases.  Two terms merge when their powers match
    and their phases agree after rounding to ``PHASE_DECIMALS`` decimals; merged
    coefficients with modulus below ``COEFF_TOL`` are dropped.  Instances are
    immutable and safe to share.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms=()):
        merged = {}
        for coeff, powers, phase in terms:
            coeff = complex(coeff)
            a, b, c = powers
            if a < 0 or b < 0 or c < 0:
                raise ValueError(f"negative powers not allowed: {powers}")
            powers = (int(a), int(b), int(c))
            phase = (complex(phase[0]), complex(phase[1]), complex(phase[2]))
            key = (powers, _phase_key(phase))
            if key in merged:
                old_coeff, _, old_phase = merged[key]
                merged[key] = (old_coeff + coeff, powers, old_phase)
            else:
                merged[key] = (coeff, powers, phase)
        object.__setattr__(self, "_terms", tuple(
            merged[key] for key in sorted(merged)
            if abs(merged[key][0]) > COEFF_TOL
        ))

    def __setattr__(self, name, value):
        raise AttributeError("ExpPoly is immutable")

    # ---- constructors ----

    @staticmethod
    def zero():
        return ExpPoly()

    @staticmethod
    def constant(c):
        return ExpPoly([(c, (0, 0, 0), (0, 0, 0))])

    @staticmethod
    def monomial(coeff, powers=(0, 0, 0), phase=(0, 0, 0)):
        return ExpPoly([(coeff, powers, phase)])

    @staticmethod
    def variable(name):
        idx = "xyt".index(name)
        powers = [0, 0, 0]
        powers[idx] = 1
        return ExpPoly([(1.0, tuple(powers), (0, 0, 0))])

    @staticmethod
    def exponential(phase, coeff=1.0):
        return ExpPoly([(coeff, (0, 0, 0), phase)])

    # ---- inspection ----

    @property
    def terms(self):
        return self._terms

    def is_zero(self, tol=COEFF_TOL):
        return all(abs(c) <= tol for c, _, _ in self._terms)

    def max_abs_coeff(self):
        return max((abs(c) for c, _, _ in self._terms), default=0.0)

    def __repr__(self):
        if not self._terms:
            return "ExpPoly(0)"
        parts = []
        for coeff, (a, b, c), (p, q, s) in self._terms[:6]:
            mono = "".join(v * n for v, n in (("x", a), ("y", b), ("t", c)))
            ph = ""
            if p or q or s:
                ph = f"*exp({p:.3g}x+{q:.3g}y+{s:.3g}t)"
            parts.append(f"({coeff:.6g}){mono}{ph}")
        more = f" +{len(self._terms) - 6} terms" if len(self._terms) > 6 else ""
        return "ExpPoly[" + " + ".join(parts) + more + "]"

    # ---- arithmetic ----

    def __add__(self, other):
        if np.isscalar(other):
            other = ExpPoly.constant(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return ExpPoly(self._terms + other._terms)

    __radd__ = __add__

    def __neg__(self):
        return ExpPoly([(-c, pw, ph) for c, pw, ph in self._terms])

    def __sub__(self, other):
        if np.isscalar(other):
            other = ExpPoly.constant(other)
        if not isinstance(other, ExpPoly):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if np.isscalar(other):
            return ExpPoly([(c * other, pw, ph) for c, pw, ph in self._terms])
        if not isinstance(other, ExpPoly):
            return NotImplemented
        out = []
        for c1, (a1, b1, d1), (p1, q1, s1) in self._terms:
            for c2, (a2, b2, d2), (p2, q2, s2) in other._terms:
                out.append((c1 * c2, (a1 + a2, b1 + b2, d1 + d2),
                            (p1 + p2, q1 + q2, s1 + s2)))
        return ExpPoly(out)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if np.isscalar(other):
            return self * (1.0 / other)
        return NotImplemented

    def __pow__(self, n):
        if not isinstance(n, int) or n < 0:
            raise ValueError("only non-negative integer powers")
        result = ExpPoly.constant(1.0)
        base = self
        while n:
            if n & 1:
                result = result * base
            base = base * base if n > 1 else base
            n >>= 1
        return result

    # ---- evaluation ----

    def eval(self, x, y, t):
        """Evaluate at real (x, y, t); accepts scalars or broadcastable arrays."""
        scalar = np.isscalar(x) and np.isscalar(y) and np.isscalar(t)
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        t = np.asarray(t, dtype=float)
        shape = np.broadcast_shapes(x.shape, y.shape, t.shape)
        out = np.zeros(shape, dtype=complex)
        for coeff, (a, b, c), (p, q, s) in self._terms:
            term = np.full(shape, coeff, dtype=complex)
            if p or q or s:
                term = term * np.exp(p * x + q * y + s * t)
            if a:
                term = term * x ** a
            if b:
                term = term * y ** b
            if c:
                term = term * t ** c
            out += term
        if scalar:
            return complex(out[()])
        return out

    def __call__(self, x, y, t):
        return self.eval(x, y, t)

    # ---- calculus ----

    def derivative(self, var="x", order=1):
        """Exact symbolic derivative; the class is closed under it."""
        idx = "xyt".index(var)
        f = self
        for _ in range(order):
            out = []
            for coeff, powers, phase in f._terms:
                a = powers[idx]
                p = phase[idx]
                if a:
                    lowered = list(powers)
                    lowered[idx] = a - 1
                    out.append((coeff * a, tuple(lowered), phase))
                if p:
                    out.append((coeff * p, powers, phase))
            f = ExpPoly(out)
        return f

    def antideriv_x(self, constant=0.0):
        """Return F with dF/dx = self, plus the given constant term.

        Terms with nonzero x-phase integrate by the standard by-parts
        recurrence; zero-x-phase terms integrate polynomially.  Small but
        nonzero phases would put large powers of 1/p into the by-parts
        coefficients and destroy precision, so they are integrated as
        int_0^x s^a e^{ps} ds expanded in powers of p, truncated once the
        dropped terms are below _SERIES_TAIL_TOL on |x| <= _SERIES_RANGE.
        The truncation error is far below the coefficient-merging tolerance.
        """
        out = []
        for coeff, (a, b, c), (p, q, s) in self._terms:
            if abs(p) < _PHASE_ZERO:
                out.append((coeff / (a + 1), (a + 1, b, c), (p, q, s)))
            elif abs(p) < _PHASE_SERIES_MAX:
                # x^a e^{px} = sum_m p^m x^{a+m} / m!; integrate termwise.
                # The result carries no e^{px} factor, so p is zeroed.
                m = 0
                pm = 1.0 + 0.0j
                while True:
                    term = coeff * pm / (math.factorial(m) * (a + m + 1))
                    out.append((term, (a + m + 1, b, c), (0.0, q, s)))
                    m += 1
                    pm *= p
                    bound = (abs(coeff) * abs(pm) * _SERIES_RANGE ** (a + m + 1)
                             / math.factorial(m))
                    if bound < _SERIES_TAIL_TOL:
                        break
            else:
                # int x^a e^{px} dx = e^{px} sum_k (-1)^k a!/(a-k)! x^(a-k)/p^(k+1)
                for k in range(a + 1):
                    fall = math.factorial(a) // math.factorial(a - k)
                    out.append((coeff * (-1) ** k * fall / p ** (k + 1),
                                (a - k, b, c), (p, q, s)))
        if constant:
            out.append((constant, (0, 0, 0), (0, 0, 0)))
        return ExpPoly(out)

    def conj(self):
        """Complex conjugate as a function of real (x, y, t)."""
        return ExpPoly([
            (c.conjugate(), pw, (p.conjugate(), q.conjugate(), s.conjugate()))
            for c, pw, (p, q, s) in self._terms
        ])

    def reflect_conj(self):
        """Return g(x, y, t) = conj(self)(-x, y, t)."""
        return ExpPoly([
            (c.conjugate() * (-1) ** a, (a, b, d),
             (-p.conjugate(), q.conjugate(), s.conjugate()))
            for c, (a, b, d), (p, q, s) in self._terms
        ])

    # ---- structure helpers ----

    def common_phase(self):
        """If every term shares one phase, return it; otherwise None."""
        keys = {_phase_key(ph) for _, _, ph in self._terms}
        if len(keys) != 1:
            return None
        return self._terms[0][2]

    def strip_phase(self, phase):
        """Multiply by exp(-(p x + q y + s t)) symbolically."""
        p, q, s = phase
        neg = (-complex(p), -complex(q), -complex(s))
        return self * ExpPoly.exponential(neg)


def lift(value, order):
    """Embed a scalar or ExpPoly as a constant Jet of the given order."""
    if np.isscalar(value):
        value = ExpPoly.constant(value)
    coeffs = [value] + [ExpPoly.zero()] * order
    return Jet(coeffs)


class Jet:
    """Truncated power series in one perturbation parameter.

    ``coeffs[k]`` is the coefficient of delta^k, each an ExpPoly.  Arithmetic
    truncates to the smaller order of the operands.
    """

    __slots__ = ("_coeffs",)

    def __init__(self, coeffs):
        if len(coeffs) == 0:
            raise ValueError("a Jet needs at least the order-0 coefficient")
        clean = []
        for c in coeffs:
            if np.isscalar(c):
                c = ExpPoly.constant(c)
            if not isinstance(c, ExpPoly):
                raise TypeError(f"Jet coefficients must be ExpPoly, got {type(c)}")
            clean.append(c)
        object.__setattr__(self, "_coeffs", tuple(clean))

    def __setattr__(self, name, value):
        raise AttributeError("Jet is immutable")

    @property
    def order(self):
        return len(self._coeffs) - 1

    @property
    def coeffs(self):
        return self._coeffs

    def coefficient(self, k):
        return self._coeffs[k]

    def truncate(self, order):
        if order >= self.order:
            return self
        return Jet(self._coeffs[:order + 1])

    def __add__(self, other):
        if np.isscalar(other) or isinstance(other, ExpPoly):
            other = lift(other, self.order)
        n = min(self.order, other.order)
        return Jet([self._coeffs[k] + other._coeffs[k] for k in range(n + 1)])

    __radd__ = __add__

    def __neg__(self):
        return Jet([-c for c in self._coeffs])

    def __sub__(self, other):
        if np.isscalar(other) or isinstance(other, ExpPoly):
            other = lift(other, self.order)
        return self + (-other)

    def __mul__(self, other):
        if np.isscalar(other) or isinstance(other, ExpPoly):
            return Jet([c * other for c in self._coeffs])
        n = min(self.order, other.order)
        out = []
        for k in range(n + 1):
            acc = ExpPoly.zero()
            for i in range(k + 1):
                acc = acc + self._coeffs[i] * other._coeffs[k - i]
            out.append(acc)
        return Jet(out)

    __rmul__ = __mul__

    def dparam(self):
        """Derivative in the perturbation parameter; order drops by one."""
        if self.order == 0:
            raise ValueError("cannot differentiate an order-0 Jet in its parameter")
        return Jet([(k + 1) * self._coeffs[k + 1] for k in range(self.order)])

    def derivative(self, var="x", order=1):
        return Jet([c.derivative(var, order) for c in self._coeffs])

    def antideriv_x(self, constants=0.0):
        """Coefficient-wise x-antiderivative; constants may be one per coefficient."""
        if np.isscalar(constants):
            constants = [constants] * (self.order + 1)
        if len(constants) != self.order + 1:
            raise ValueError("need one integration constant per coefficient")
        return Jet([c.antideriv_x(k) for c, k in zip(self._coeffs, constants)])

    def reflect_conj(self):
        """Coefficient-wise reflect-conjugation (real perturbation parameter)."""
        return Jet([c.reflect_conj() for c in self._coeffs])

    def exp(self):
        """exp(self) for jets with vanishing order-0 coefficient."""
        if not self._coeffs[0].is_zero():
            raise ValueError("Jet.exp requires a vanishing constant coefficient")
        result = lift(1.0, self.order)
        power = lift(1.0, self.order)
        for k in range(1, self.order + 1):
            power = power * self
            result = result + power * (1.0 / math.factorial(k))
        return result

    def eval(self, x, y, t, delta):
        acc = 0.0
        for k, c in enumerate(self._coeffs):
            acc = acc + c.eval(x, y, t) * delta ** k
        return acc


def scalar_series(values):
    """Jet with constant coefficients given by a scalar sequence."""
    return Jet([ExpPoly.constant(v) for v in values])
