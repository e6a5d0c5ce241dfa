"""Quasi-polynomials and delay transfer functions.

A quasi-polynomial is a finite sum ``sum_k p_k(s) exp(-h_k s)`` with real
polynomial coefficients ``p_k`` and delays ``h_k >= 0``.  Ratios of two
quasi-polynomials (:class:`DelayTransferFunction`) cover every transfer
function used by the synthesis pipeline: rational weights, pure delays and
the infinite-dimensional controller pieces built from them.

Coefficients are stored in ascending order of degree, ``(c0, c1, c2, ...)``
meaning ``c0 + c1 s + c2 s**2 + ...``.  All objects are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ReflectOnDelayed

__all__ = [
    "Polynomial",
    "DelayTerm",
    "QuasiPolynomial",
    "DelayTransferFunction",
    "qp_eval",
    "qp_arith",
    "tf_algebra",
    "delays_equal",
]

# trailing coefficients below this fraction of the largest one are round-off
_TRIM_RTOL = 1e-14


def delays_equal(ha, hb):
    return abs(ha - hb) < 1e-12 * max(1.0, ha)


def _trim(coeffs):
    c = [float(x) for x in coeffs]
    if not c:
        return ()
    scale = max(abs(x) for x in c)
    if scale == 0.0:
        return ()
    while c and abs(c[-1]) <= _TRIM_RTOL * scale:
        c.pop()
    return tuple(c)


@dataclass(frozen=True)
class Polynomial:
    coeffs: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _trim(self.coeffs))

    @property
    def degree(self):
        # the zero polynomial gets degree -1
        return len(self.coeffs) - 1

    @property
    def is_zero(self):
        return not self.coeffs

    @property
    def leading(self):
        return self.coeffs[-1] if self.coeffs else 0.0

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        acc = np.zeros_like(s)
        for c in reversed(self.coeffs):
            acc = acc * s + c
        return acc

    def __add__(self, other):
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        a = a + (0.0,) * (n - len(a))
        b = b + (0.0,) * (n - len(b))
        return Polynomial(tuple(x + y for x, y in zip(a, b)))

    def __neg__(self):
        return Polynomial(tuple(-x for x in self.coeffs))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if self.is_zero or other.is_zero:
                return Polynomial()
            return Polynomial(tuple(np.convolve(self.coeffs, other.coeffs)))
        return Polynomial(tuple(float(other) * x for x in self.coeffs))

    __rmul__ = __mul__

    def reflect(self):
        """Coefficients of p(-s)."""
        return Polynomial(tuple(c if k % 2 == 0 else -c for k, c in enumerate(self.coeffs)))

    def roots(self):
        if self.degree < 1:
            return np.array([], dtype=complex)
        return np.roots(self.coeffs[::-1])

    @classmethod
    def from_roots(cls, roots, gain=1.0):
        c = np.real_if_close(np.poly(roots)[::-1] * gain, tol=1e6)
        return cls(tuple(np.real(c)))


@dataclass(frozen=True)
class DelayTerm:
    poly: Polynomial
    delay: float = 0.0

    def __post_init__(self):
        if not self.delay >= 0.0:
            raise ValueError(f"delay must be >= 0, got {self.delay}")


def _normalize(terms):
    merged = []
    for t in sorted(terms, key=lambda t: t.delay):
        if merged and delays_equal(merged[-1].delay, t.delay):
            merged[-1] = DelayTerm(merged[-1].poly + t.poly, merged[-1].delay)
        else:
            merged.append(t)
    return tuple(t for t in merged if not t.poly.is_zero)


@dataclass(frozen=True)
class QuasiPolynomial:
    """Normalized sum of delayed polynomials (delays strictly increasing)."""

    terms: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "terms", _normalize(tuple(self.terms)))

    @classmethod
    def from_terms(cls, pairs: Iterable[tuple[Sequence[float], float]]):
        return cls(tuple(DelayTerm(Polynomial(tuple(c)), float(h)) for c, h in pairs))

    @classmethod
    def poly(cls, coeffs):
        return cls((DelayTerm(Polynomial(tuple(coeffs)), 0.0),))

    @classmethod
    def constant(cls, value):
        return cls.poly((float(value),))

    @property
    def is_zero(self):
        return not self.terms

    @property
    def is_rational(self):
        return all(t.delay == 0.0 for t in self.terms)

    @property
    def delays(self):
        return tuple(t.delay for t in self.terms)

    @property
    def degree(self):
        return max((t.poly.degree for t in self.terms), default=-1)

    def term_at(self, delay):
        for t in self.terms:
            if delays_equal(t.delay, delay):
                return t.poly
        return Polynomial()

    def __call__(self, s):
        s = np.asarray(s, dtype=complex)
        out = np.zeros_like(s)
        for t in self.terms:
            v = t.poly(s)
            out = out + (v if t.delay == 0.0 else v * np.exp(-t.delay * s))
        return out

    def term_magnitudes(self, s):
        """sum |c_ki| |s|^i |exp(-h_k s)|; the natural scale for "is this zero"."""
        s = np.asarray(s, dtype=complex)
        out = np.zeros(s.shape)
        for t in self.terms:
            absp = Polynomial(tuple(abs(c) for c in t.poly.coeffs))
            out = out + np.abs(absp(np.abs(s))) * np.abs(np.exp(-t.delay * s))
        return out

    def __add__(self, other):
        other = _as_qp(other)
        return QuasiPolynomial(self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return QuasiPolynomial(tuple(DelayTerm(-t.poly, t.delay) for t in self.terms))

    def __sub__(self, other):
        return self + (-_as_qp(other))

    def __rsub__(self, other):
        return _as_qp(other) - self

    def __mul__(self, other):
        if not isinstance(other, QuasiPolynomial):
            if isinstance(other, Polynomial):
                other = QuasiPolynomial((DelayTerm(other, 0.0),))
            else:
                return self.scale(other)
        out = [DelayTerm(a.poly * b.poly, a.delay + b.delay)
               for a in self.terms for b in other.terms]
        return QuasiPolynomial(tuple(out))

    __rmul__ = __mul__

    def scale(self, k):
        return QuasiPolynomial(tuple(DelayTerm(t.poly * float(k), t.delay) for t in self.terms))

    def delayed(self, h):
        """Multiply by exp(-h s)."""
        return QuasiPolynomial(tuple(DelayTerm(t.poly, t.delay + h) for t in self.terms))

    def reflect(self):
        if not self.is_rational:
            raise ReflectOnDelayed("s -> -s turns exp(-hs) into an advance")
        return QuasiPolynomial(tuple(DelayTerm(t.poly.reflect(), 0.0) for t in self.terms))

    def __repr__(self):
        parts = [f"{list(t.poly.coeffs)}*e^(-{t.delay:g}s)" if t.delay else f"{list(t.poly.coeffs)}"
                 for t in self.terms]
        return "QP(" + " + ".join(parts or ["0"]) + ")"


def _as_qp(x):
    if isinstance(x, QuasiPolynomial):
        return x
    if isinstance(x, Polynomial):
        return QuasiPolynomial((DelayTerm(x, 0.0),))
    return QuasiPolynomial.constant(x)


@dataclass(frozen=True)
class DelayTransferFunction:
    """Ratio ``num(s) / den(s)`` of two quasi-polynomials.

    No common factors are cancelled; arithmetic works by clearing
    denominators, so the representation of a composite function keeps every
    factor it was built from.
    """

    num: QuasiPolynomial
    den: QuasiPolynomial = QuasiPolynomial.constant(1.0)

    def __post_init__(self):
        if self.den.is_zero:
            raise ZeroDivisionError("denominator is the zero quasi-polynomial")

    # constructors -------------------------------------------------------
    @classmethod
    def rational(cls, num, den=(1.0,)):
        """Rational function from ascending coefficient sequences."""
        return cls(QuasiPolynomial.poly(num), QuasiPolynomial.poly(den))

    @classmethod
    def constant(cls, value):
        return cls(QuasiPolynomial.constant(value))

    @classmethod
    def delay(cls, h):
        """Pure delay exp(-h s)."""
        return cls(QuasiPolynomial.from_terms([((1.0,), h)]))

    # properties ---------------------------------------------------------
    @property
    def is_rational(self):
        return self.num.is_rational and self.den.is_rational

    @property
    def is_zero(self):
        return self.num.is_zero

    def __call__(self, s):
        return self.num(s) / self.den(s)

    # algebra ------------------------------------------------------------
    def __add__(self, other):
        other = _as_tf(other)
        if self.den == other.den:
            return DelayTransferFunction(self.num + other.num, self.den)
        return DelayTransferFunction(self.num * other.den + other.num * self.den,
                                     self.den * other.den)

    __radd__ = __add__

    def __neg__(self):
        return DelayTransferFunction(-self.num, self.den)

    def __sub__(self, other):
        return self + (-_as_tf(other))

    def __rsub__(self, other):
        return _as_tf(other) - self

    def __mul__(self, other):
        if isinstance(other, (int, float)):
            return DelayTransferFunction(self.num.scale(other), self.den)
        other = _as_tf(other)
        return DelayTransferFunction(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def invert(self):
        if self.num.is_zero:
            raise ZeroDivisionError("cannot invert the zero function")
        return DelayTransferFunction(self.den, self.num)

    def __truediv__(self, other):
        return self * _as_tf(other).invert()

    def __rtruediv__(self, other):
        return _as_tf(other) * self.invert()

    def reflect(self):
        """The function s -> f(-s); only defined for rational functions."""
        if not self.is_rational:
            raise ReflectOnDelayed("reflect requires delay-free numerator and denominator")
        return DelayTransferFunction(self.num.reflect(), self.den.reflect())


def _as_tf(x):
    if isinstance(x, DelayTransferFunction):
        return x
    return DelayTransferFunction(_as_qp(x))


# functional interface -------------------------------------------------------

def qp_eval(qp, s):
    """Evaluate a quasi-polynomial at scalar or array ``s``."""
    out = qp(s)
    return complex(out) if np.ndim(out) == 0 else out


def qp_arith(a, b=None, op="add", k=1.0):
    """Quasi-polynomial arithmetic: add, sub, mul, negate or scale (by ``k``)."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "negate":
        return -a
    if op == "scale":
        return a.scale(k)
    raise ValueError(f"unknown op {op!r}")


def tf_algebra(a, b=None, op="add"):
    """Transfer-function algebra: add, mul, invert or reflect."""
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "invert":
        return a.invert()
    if op == "reflect":
        return a.reflect()
    raise ValueError(f"unknown op {op!r}")
