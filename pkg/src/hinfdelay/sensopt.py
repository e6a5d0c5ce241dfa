"""Stage 1: optimal weighted-sensitivity controller for a dead-time plant.

Plant ``P(s) = exp(-h s) N_p(s)`` with ``N_p`` biproper and bistable, weight
``W(s) = (1 + alpha s)/(s + beta)``.  The optimal level gamma_opt is the root
of a scalar phase equation; the optimal controller, sensitivity and the
inner/outer factorization ``C_opt = N_p^-1 N_c / D_c`` then follow in closed
form.  ``N_c`` and ``D_c`` carry a cancelling pole/zero pair at
``s = +-j omega_gamma``; the pair is kept and handled by excluding
omega_gamma from frequency grids and by indenting winding contours there.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (BistableCheckFailed, EncirclementPatternAbsent,
                     GammaOutOfRange, InnerCheckFailed, InvalidPlant,
                     InvalidWeight, NoBracket)
from .quasipoly import DelayTransferFunction as TF
from .quasipoly import QuasiPolynomial as QP
from .winding import as_omegas, crossing_profile, winding_number

__all__ = [
    "WeightSpec",
    "PlantSpec",
    "OptimalSensitivityResult",
    "omega_gamma",
    "phase_lhs",
    "solve_gamma_opt",
    "build_c_opt",
    "eval_s_opt",
    "remark_functions",
    "factor_controller",
    "verify_infinite_rhp_poles",
    "solve_optimal_sensitivity",
]


@dataclass(frozen=True)
class WeightSpec:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0 and self.beta > 0):
            raise InvalidWeight("alpha and beta must be positive")
        if not self.alpha * self.beta < 1:
            raise InvalidWeight(f"alpha*beta = {self.alpha * self.beta:g} must be < 1")

    def tf(self):
        return TF.rational((1.0, self.alpha), (self.beta, 1.0))


@dataclass(frozen=True)
class PlantSpec:
    delay_h: float
    np_tf: TF = TF.constant(1.0)

    def __post_init__(self):
        if not self.delay_h > 0:
            raise InvalidPlant("delay_h must be positive")
        n = self.np_tf
        if not n.is_rational:
            raise InvalidPlant("N_p must be rational")
        if n.num.degree != n.den.degree:
            raise InvalidPlant("N_p must be biproper (equal numerator/denominator degree)")
        for part, name in ((n.num, "numerator"), (n.den, "denominator")):
            if part.degree > 0 and winding_number(part) != 0:
                raise InvalidPlant(f"N_p {name} is not Hurwitz")

    @property
    def delay_tf(self):
        return TF.delay(self.delay_h)

    @property
    def plant_tf(self):
        return self.delay_tf * self.np_tf


def omega_gamma(gamma, alpha, beta):
    return math.sqrt((1 - gamma**2 * beta**2) / (gamma**2 - alpha**2))


def phase_lhs(gamma, h, alpha, beta):
    """h w + atan(alpha w) + atan(w / beta) at w = omega_gamma(gamma)."""
    if not alpha < gamma < 1 / beta:
        raise GammaOutOfRange(f"gamma={gamma!r} outside ({alpha!r}, {1 / beta!r})")
    w = omega_gamma(gamma, alpha, beta)
    return h * w + math.atan(alpha * w) + math.atan(w / beta)


def solve_gamma_opt(h, alpha, beta, tol=1e-12, max_iter=200):
    """Bisection for the (unique) root of phase_lhs(gamma) = pi.

    phase_lhs is strictly decreasing in gamma, so the first root is the only
    one.  Returns ``(gamma_opt, omega_gamma)``.
    """
    WeightSpec(alpha, beta)
    inset = 1e-12 * (1 / beta - alpha)
    lo, hi = alpha + inset, 1 / beta - inset
    f_lo = phase_lhs(lo, h, alpha, beta) - math.pi
    f_hi = phase_lhs(hi, h, alpha, beta) - math.pi
    if not (f_lo > 0 > f_hi):
        raise NoBracket(f"phase equation not bracketed on ({lo}, {hi})")
    g = 0.5 * (lo + hi)
    for _ in range(max_iter):
        g = 0.5 * (lo + hi)
        r = phase_lhs(g, h, alpha, beta) - math.pi
        if abs(r) < tol or g in (lo, hi):
            break
        if r > 0:
            lo = g
        else:
            hi = g
    return g, omega_gamma(g, alpha, beta)


def _pnum(gamma, alpha, beta):
    # (1 - g^2 b^2) + (g^2 - a^2) s^2, zeros at +-j omega_gamma
    return QP.poly((1 - gamma**2 * beta**2, 0.0, gamma**2 - alpha**2))


def _dc_parts(h, alpha, beta, gamma):
    """Numerator and denominator quasi-polynomials of D_c."""
    ig = 1.0 / gamma
    num = QP.from_terms([((ig, ig * alpha), 0.0), ((beta, -1.0), h)])
    den = QP.from_terms([((beta, 1.0), 0.0), ((ig, -ig * alpha), h)])
    return num, den


def build_c_opt(plant, weight, gamma_opt):
    """Optimal controller with all denominators cleared."""
    a, b, g, h = weight.alpha, weight.beta, gamma_opt, plant.delay_h
    # g (b + s) [(1 + a s) + g (b - s) e^{-hs}]
    den = QP.poly((g * b, g)) * QP.from_terms([((1.0, a), 0.0), ((g * b, -g), h)])
    return TF(_pnum(g, a, b), den) * plant.np_tf.invert()


def eval_s_opt(weight, h, gamma_opt):
    """Optimal sensitivity; N_p cancels and does not appear."""
    a, b, g = weight.alpha, weight.beta, gamma_opt
    num = QP.poly((g * b, g)) * QP.from_terms([((1.0, a), 0.0), ((g * b, -g), h)])
    den = QP.poly((1.0, a)) * QP.from_terms([((g * b, g), 0.0), ((1.0, -a), h)])
    return TF(num, den)


def remark_functions(weight, h, gamma_opt):
    """(m1, m2, g): the two inner factors and the gain function of the
    all-pass representation W S_opt = gamma (1 + g m1) / (g + m2)."""
    a, b = weight.alpha, weight.beta
    e = TF.delay(h)
    m1 = TF.rational((b, -1.0), (b, 1.0)) * e
    m2 = TF.rational((1.0, -a), (1.0, a)) * e
    g = TF.rational((gamma_opt * b, gamma_opt), (1.0, a))
    return m1, m2, g


def _nc_tf(h, alpha, beta, gamma):
    _, dd = _dc_parts(h, alpha, beta, gamma)
    den = QP.poly((gamma**2 * beta, gamma**2)) * dd
    return TF(_pnum(gamma, alpha, beta), den)


@dataclass(frozen=True)
class FactorCertificate:
    factor_residual: float
    inner_deviation: float
    dc_rhp_poles: int
    nc_num_at_wg: float
    nc_den_at_wg: float
    nc_rhp_zeros: int
    nc_rhp_poles: int


def factor_controller(plant, weight, gamma_opt, w_gamma=None, grid=None,
                      inner_tol=1e-9, factor_tol=1e-8, cancel_tol=1e-8):
    """Split C_opt = N_p^-1 N_c / D_c and certify the split.

    Returns ``(n_c, d_c, certificate)``.  Raises InnerCheckFailed when D_c is
    not inner and BistableCheckFailed when N_c or its inverse has right half
    plane singularities beyond the cancelling pair at +-j omega_gamma.
    """
    a, b, g, h = weight.alpha, weight.beta, gamma_opt, plant.delay_h
    wg = w_gamma if w_gamma is not None else omega_gamma(g, a, b)
    dn, dd = _dc_parts(h, a, b, g)
    d_c = TF(dn, dd)
    n_c = _nc_tf(h, a, b, g)

    w = as_omegas(grid, h, exclude=(wg,))
    s = 1j * w
    c = build_c_opt(plant, weight, g)(s)
    c_fact = (plant.np_tf.invert() * n_c / d_c)(s)
    mask = np.abs(c) > 1e-6
    factor_res = float(np.max(np.abs(c_fact[mask] - c[mask]) / np.abs(c[mask])))
    if factor_res >= factor_tol:
        raise InnerCheckFailed(f"C_opt != N_p^-1 N_c / D_c (relative residual {factor_res:.2e})")

    inner_dev = float(np.max(np.abs(np.abs(d_c(s)) - 1.0)))
    dc_poles = winding_number(dd, indent=(wg,))
    if inner_dev >= inner_tol or dc_poles != 0:
        raise InnerCheckFailed(f"D_c not inner: ||D_c|-1| = {inner_dev:.2e}, RHP poles = {dc_poles}")

    sg = 1j * wg
    num_at = float(abs(n_c.num(sg)) / n_c.num.term_magnitudes(sg))
    den_at = float(abs(n_c.den(sg)) / n_c.den.term_magnitudes(sg))
    nz = winding_number(n_c.num, indent=(wg,))
    npl = winding_number(n_c.den, indent=(wg,))
    if num_at >= cancel_tol or den_at >= cancel_tol or nz != 0 or npl != 0:
        raise BistableCheckFailed(
            f"N_c not bistable: |num(jwg)|={num_at:.2e}, |den(jwg)|={den_at:.2e}, "
            f"RHP zeros={nz}, RHP poles={npl}")
    cert = FactorCertificate(factor_res, inner_dev, dc_poles, num_at, den_at, nz, npl)
    return n_c, d_c, cert


def verify_infinite_rhp_poles(s_opt, h, k_max, alpha, gamma_opt, k_min=5, grid=None):
    """Crossing pattern of S_opt^-1 that forces infinitely many unstable
    controller poles: repeated crossings of the negative real axis near
    2 pi k / h with magnitude tending to alpha / gamma_opt."""
    inv = s_opt.invert()
    rep = crossing_profile(inv, h, k_max, grid=grid, k_min=k_min)
    target = alpha / gamma_opt
    crossings = sorted(rep.negative_axis_crossings + rep.positive_axis_crossings)
    if rep.matched_fraction < 0.9 or not crossings:
        raise EncirclementPatternAbsent(f"matched fraction {rep.matched_fraction:.2f}")
    last = abs(complex(inv(1j * crossings[-1])))
    if abs(last - target) > 0.1 * target:
        raise EncirclementPatternAbsent(
            f"|S_opt^-1| = {last:.4g} at the last crossing, expected about {target:.4g}")
    return rep


@dataclass(frozen=True)
class OptimalSensitivityResult:
    gamma_opt: float
    omega_gamma: float
    c_opt: TF
    s_opt: TF
    n_c: TF
    d_c: TF
    m1: TF
    m2: TF
    g: TF
    certificate: FactorCertificate = field(compare=False, default=None)


def solve_optimal_sensitivity(plant, weight, grid=None, tol=1e-12):
    """Run stage 1 end to end: phase equation, C_opt, S_opt and factorization."""
    g, wg = solve_gamma_opt(plant.delay_h, weight.alpha, weight.beta, tol=tol)
    c_opt = build_c_opt(plant, weight, g)
    s_opt = eval_s_opt(weight, plant.delay_h, g)
    n_c, d_c, cert = factor_controller(plant, weight, g, wg, grid=grid)
    m1, m2, gf = remark_functions(weight, plant.delay_h, g)
    return OptimalSensitivityResult(g, wg, c_opt, s_opt, n_c, d_c, m1, m2, gf, cert)
