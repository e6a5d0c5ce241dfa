"""Coprime factorization, Bezout solution and the Youla parameterization for
plants ``P_C = N / M`` with an inner, infinite-dimensional ``M`` (infinitely
many unstable poles) and ``N = N_i N_o`` with finitely many unstable zeros.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDenominator, InterpolationIllConditioned, NotConjugateSymmetric
from .quasipoly import DelayTransferFunction as TF
from .quasipoly import Polynomial
from .quasipoly import QuasiPolynomial as QP
from .winding import FrequencyGrid, as_omegas, winding_number

__all__ = [
    "CoprimeFactorization",
    "BezoutSolution",
    "FotProblemData",
    "coprime_factorization",
    "solve_bezout",
    "trivial_bezout",
    "parameterize_controller",
    "closed_loop_maps",
    "two_block_objective",
    "two_block_objective_q",
    "map_to_fot",
]

_DEFAULT_GRID = FrequencyGrid(omega_min=1e-3, omega_max=1e3, points_per_decade=32)


@dataclass(frozen=True)
class CoprimeFactorization:
    m_inner: TF
    n_inner: TF
    n_outer: TF
    rhp_zeros: tuple = ()

    @property
    def n_tf(self):
        return self.n_inner * self.n_outer

    @property
    def plant(self):
        return self.n_tf / self.m_inner


def _check_conjugate_closed(z, tol=1e-9):
    z = np.asarray(z, dtype=complex)
    for zi in z:
        if abs(zi.imag) > tol * max(1.0, abs(zi)):
            if np.min(np.abs(z - np.conj(zi))) > tol * max(1.0, abs(zi)):
                raise NotConjugateSymmetric(f"{zi} has no conjugate partner")


def coprime_factorization(m_inner, n_inner, n_outer=None, rhp_zeros=None, grid=None):
    """Validated factorization.  ``rhp_zeros`` defaults to the RHP roots of
    the numerator of ``n_inner``."""
    n_outer = TF.constant(1.0) if n_outer is None else n_outer
    if not (n_inner.is_rational and n_outer.is_rational):
        raise ValueError("N_i and N_o must be rational")
    if rhp_zeros is None:
        r = n_inner.num.term_at(0.0).roots()
        rhp_zeros = tuple(complex(x) for x in r if x.real > 0)
    z = tuple(complex(x) for x in rhp_zeros)
    _check_conjugate_closed(z)
    for i, zi in enumerate(z):
        if not zi.real > 0:
            raise ValueError(f"zero {zi} is not in the open right half plane")
        if any(abs(zi - zj) < 1e-9 * max(1.0, abs(zi)) for zj in z[:i]):
            raise ValueError("RHP zeros must be distinct")
        if abs(complex(n_inner.num(zi))) > 1e-10 * max(1.0, float(n_inner.num.term_magnitudes(zi))):
            raise ValueError(f"N_i does not vanish at {zi}")
    w = as_omegas(grid if grid is not None else _DEFAULT_GRID)
    s = 1j * w
    for f, name in ((m_inner, "M"), (n_inner, "N_i")):
        dev = float(np.max(np.abs(np.abs(f(s)) - 1.0)))
        if dev > 1e-9:
            raise ValueError(f"{name} is not inner: max ||{name}(jw)| - 1| = {dev:.2e}")
    for part in (n_outer.num, n_outer.den):
        if part.degree > 0 and winding_number(part) != 0:
            raise ValueError("N_o is not bistable")
    return CoprimeFactorization(m_inner, n_inner, n_outer, z)


@dataclass(frozen=True)
class BezoutSolution:
    x_tf: TF
    y_tf: TF
    residual_sup: float
    node_residual: float = 0.0


def _residual_sup(n_tf, m_tf, x_tf, y_tf, grid):
    s = 1j * as_omegas(grid if grid is not None else _DEFAULT_GRID)
    return float(np.max(np.abs(n_tf(s) * x_tf(s) + m_tf(s) * y_tf(s) - 1.0)))


def _rhp_mesh(avoid, radius=1e-2):
    re = np.geomspace(1e-3, 1e2, 30)
    im = np.concatenate([-np.geomspace(1e-3, 1e2, 30)[::-1], [0.0], np.geomspace(1e-3, 1e2, 30)])
    pts = (re[:, None] + 1j * im[None, :]).ravel()
    for z in avoid:
        pts = pts[np.abs(pts - z) > radius * max(1.0, abs(z))]
    return pts


def solve_bezout(fact, tau=None, grid=None, x_bound=1e8):
    """Solve N X + M Y = 1 with a proper rational Y interpolating 1/M at the z_i.

    ``Y = p(s) / (1 + tau s)^(n-1)`` with deg p = n - 1; X = (1 - M Y)/N.
    """
    z = np.asarray(fact.rhp_zeros, dtype=complex)
    n = len(z)
    m, n_tf = fact.m_inner, fact.n_tf
    if n == 0:
        y_tf = TF.constant(1.0)
    else:
        _check_conjugate_closed(z)
        tau = 1.0 / float(np.max(np.abs(z))) if tau is None else float(tau)
        if not tau > 0:
            raise ValueError("tau must be positive")
        V = np.vander(z, n, increasing=True)
        cond = np.linalg.cond(V)
        if not cond <= 1e12:
            raise InterpolationIllConditioned(f"Vandermonde condition number {cond:.2e} > 1e12")
        rhs = (1 + tau * z) ** (n - 1) / m(z)
        coef = np.linalg.solve(V, rhs)
        scale = max(1.0, float(np.max(np.abs(coef))))
        if np.max(np.abs(coef.imag)) > 1e-8 * scale:
            raise NotConjugateSymmetric("interpolating polynomial has complex coefficients")
        den = Polynomial((1.0,))
        for _ in range(n - 1):
            den = den * Polynomial((1.0, tau))
        y_tf = TF(QP.poly(coef.real), QP.poly(den.coeffs))
    x_tf = (1 - m * y_tf) / n_tf

    node_res = max((abs(1 - complex(m(zi)) * complex(y_tf(zi))) for zi in z), default=0.0)
    if node_res >= 1e-9:
        raise InterpolationIllConditioned(f"|1 - M(z_i) Y(z_i)| = {node_res:.2e}")
    xm = np.abs(x_tf(_rhp_mesh(z)))
    if not np.all(np.isfinite(xm)) or xm.max() > x_bound:
        raise InterpolationIllConditioned("X is not bounded on the right half plane mesh")
    return BezoutSolution(x_tf, y_tf, _residual_sup(n_tf, m, x_tf, y_tf, grid), float(node_res))


def trivial_bezout(n_tf, m_tf, grid=None):
    """Y = 0, X = N^-1; valid when N is itself a unit (no RHP zeros)."""
    x_tf = n_tf.invert()
    y_tf = TF.constant(0.0)
    return BezoutSolution(x_tf, y_tf, _residual_sup(n_tf, m_tf, x_tf, y_tf, grid))


def _parts(fact):
    if isinstance(fact, CoprimeFactorization):
        return fact.m_inner, fact.n_tf
    m, n = fact
    return m, n


def parameterize_controller(fact, bezout, q, grid=None):
    """C_F = (X + M Q) / (Y - N Q).

    ``fact`` is a :class:`CoprimeFactorization` or an ``(M, N)`` pair.
    """
    m, n = _parts(fact)
    den = bezout.y_tf - n * q
    s = 1j * as_omegas(grid if grid is not None else _DEFAULT_GRID)
    if den.is_zero or float(np.max(np.abs(den(s)))) < 1e-12:
        raise DegenerateDenominator("Y - N Q vanishes on the grid")
    return (bezout.x_tf + m * q) / den


def closed_loop_maps(fact, bezout, q, s):
    """(sensitivity, complementary sensitivity) from the Youla parameter at points s."""
    m, n = _parts(fact)
    yq = bezout.y_tf(s) - n(s) * q(s)
    return m(s) * yq, n(s) * (bezout.x_tf(s) + m(s) * q(s))


def _zero(s):
    return np.zeros_like(s)


def _eval(w, s):
    return _zero(s) if w is None else w(s)


def two_block_objective(fact, bezout, w1, w2, q1, grid=None):
    """sup over the grid of |[W1 (Y - N_i Q1); W2 (1 - M (Y - N_i Q1))]|.

    A weight of ``None`` stands for zero.
    """
    s = 1j * as_omegas(grid if grid is not None else _DEFAULT_GRID)
    r = bezout.y_tf(s) - fact.n_inner(s) * q1(s)
    top = _eval(w1, s) * r
    bot = _eval(w2, s) * (1 - fact.m_inner(s) * r)
    return float(np.max(np.hypot(np.abs(top), np.abs(bot))))


def two_block_objective_q(fact, bezout, w1, w2, q, grid=None):
    """Same norm written in the original parameter Q:
    sup |[W1 (Y - N Q); W2 N (X + M Q)]|."""
    s = 1j * as_omegas(grid if grid is not None else _DEFAULT_GRID)
    n = fact.n_tf(s)
    top = _eval(w1, s) * (bezout.y_tf(s) - n * q(s))
    bot = _eval(w2, s) * n * (bezout.x_tf(s) + fact.m_inner(s) * q(s))
    return float(np.max(np.hypot(np.abs(top), np.abs(bot))))


@dataclass(frozen=True)
class FotProblemData:
    w1_fot: TF
    w2_fot: TF
    x_fot: TF
    md_fot: TF
    mn_fot: TF
    no_fot: TF


def map_to_fot(w1, w2, bezout, fact):
    """Problem data in the dual (finitely many unstable poles) convention."""
    return FotProblemData(w1_fot=w2, w2_fot=w1, x_fot=bezout.y_tf,
                          md_fot=fact.n_inner, mn_fot=fact.m_inner, no_fot=fact.n_outer)
