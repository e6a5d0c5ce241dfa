"""Stage 2: a stable controller with a certified sensitivity-deviation bound.

The weighted deviation of the sensitivity from its optimum is bounded by the
one-block problem

    gamma2_opt = inf over stable Qh of || W1 (1 + D_c Qh) ||_inf

with the rational envelope W1 = c (s + alpha1)/(s + beta1), c = gamma0*kappa,
and the inner "plant" D_c.  With

    A(s) = [(c^2 alpha1^2 - g2^2 beta1^2) + (g2^2 - c^2) s^2] / [c g2 (beta1 + s)(alpha1 + s)]
    B(s) = (g2 / c) (beta1 - s) / (alpha1 + s)

the flat solution is Qh = -A / (1 + D_c B^-1(-s)), for which
|W1 (1 + D_c Qh)| = g2 on the whole imaginary axis.  It is stable exactly
when g2 is at least the largest level g2 at which D_c(jw) B^-1(-jw) = -1
with w = omega_star(g2); that level is gamma2_opt.  The associated
controller for the plant D_c is C2 = A / (1 + D_c B), and Qh = -C2/(1 + D_c C2).

The final controller is K = -Q with Q = N_p^-1 N_c Qh, obtained from C_opt
through F = -(Q^-1 + C_opt^-1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (DegreeNotRetarded, Gamma2OutOfRange, IdentityMismatch,
                     NoRootInInterval, QhatIdenticallyZero)
from .quasipoly import DelayTransferFunction as TF
from .winding import as_omegas, winding_number

__all__ = [
    "DeviationParams",
    "DeviationSolveResult",
    "StabilityReport",
    "omega_star",
    "phase_lhs2",
    "solve_gamma2",
    "build_c2_and_qhat",
    "build_f_and_k",
    "certify",
    "solve_deviation",
]


@dataclass(frozen=True)
class DeviationParams:
    gamma0: float
    kappa: float
    alpha1: float
    beta1: float
    h: float
    alpha: float
    beta: float

    @classmethod
    def from_envelope(cls, env, h, alpha, beta):
        return cls(env.gamma0, env.kappa, env.alpha1, env.beta1, h, alpha, beta)

    @property
    def c(self):
        return self.gamma0 * self.kappa

    @property
    def interval(self):
        return self.c, self.c * self.alpha1 / self.beta1


def omega_star(gamma2, p):
    c = p.c
    return math.sqrt((c**2 * p.alpha1**2 - gamma2**2 * p.beta1**2) / (gamma2**2 - c**2))


def _phase_terms(w, p):
    """Summands of the phase function at frequency w (scalar or array)."""
    gi = 1.0 / p.gamma0
    co, si = np.cos(p.h * w), np.sin(p.h * w)
    re = (p.beta + gi * co) - p.alpha * gi * w * si
    im = (w - gi * si) - gi * p.alpha * w * co
    return (np.arctan(w / p.alpha1), np.arctan(w / p.beta1), p.h * w,
            2 * np.arctan2(im, re))


def phase_lhs2(gamma2, p):
    """Phase lag of D_c(jw) B^-1(-jw) at w = omega_star(gamma2), reduced to [0, 2 pi).

    The value is pi exactly where D_c(jw) B^-1(-jw) = -1.  It tends to 0 as
    gamma2 approaches the top of the admissible interval (w -> 0).
    """
    lo, hi = p.interval
    if not lo < gamma2 < hi:
        raise Gamma2OutOfRange(f"gamma2={gamma2!r} outside ({lo!r}, {hi!r})")
    total = sum(_phase_terms(omega_star(gamma2, p), p))
    return float(total % (2 * math.pi))


def _residual(g2, p):
    return phase_lhs2(g2, p) - math.pi


def solve_gamma2(p, n_scan=1024, tol=1e-10, max_iter=200):
    """Optimal deviation level: the first root of phase_lhs2 = pi met when
    scanning down from the top of (c, c alpha1/beta1).

    Returns ``(gamma2_opt, omega_star)``.  Sign changes caused by the
    reduction modulo 2 pi (jumps of about 2 pi) are skipped.
    """
    lo, hi = p.interval
    if not hi > lo:
        raise NoRootInInterval(f"empty interval ({lo}, {hi})")
    cand = np.geomspace(hi, lo, n_scan + 2)[1:-1]
    r = np.array([_residual(g, p) for g in cand])
    bracket = None
    for i in range(len(cand) - 1):
        if r[i] == 0.0:
            return float(cand[i]), omega_star(cand[i], p)
        if r[i] * r[i + 1] < 0 and abs(r[i] - r[i + 1]) < math.pi:
            bracket = (cand[i + 1], cand[i])
            break
    if bracket is None:
        raise NoRootInInterval(
            f"no root of the phase equation in ({lo:.6g}, {hi:.6g}); "
            f"residual range [{r.min():.3g}, {r.max():.3g}]")
    a, b = bracket
    fa = _residual(a, p)
    g = 0.5 * (a + b)
    for _ in range(max_iter):
        g = 0.5 * (a + b)
        fg = _residual(g, p)
        if abs(fg) < tol or g in (a, b):
            break
        if (fg < 0) == (fa < 0):
            a, fa = g, fg
        else:
            b = g
    return g, omega_star(g, p)


def _a_tf(p, g2):
    c, a1, b1 = p.c, p.alpha1, p.beta1
    num = (c**2 * a1**2 - g2**2 * b1**2, 0.0, g2**2 - c**2)
    den = np.convolve((b1, 1.0), (a1, 1.0)) * (c * g2)
    return TF.rational(num, tuple(den))


def _b_tf(p, g2):
    return TF.rational((g2 / p.c * p.beta1, -g2 / p.c), (p.alpha1, 1.0))


def build_c2_and_qhat(p, gamma2, d_c):
    """Returns ``(a_tf, b_tf, c2_opt, q_hat)``."""
    a_tf = _a_tf(p, gamma2)
    b_tf = _b_tf(p, gamma2)
    b_mirror_inv = b_tf.reflect().invert()     # (c/g2)(alpha1 - s)/(beta1 + s)
    c2 = a_tf / (1 + d_c * b_tf)
    q_hat = -a_tf / (1 + d_c * b_mirror_inv)
    return a_tf, b_tf, c2, q_hat


def build_f_and_k(q_hat, n_c, n_p, c_opt):
    """Returns ``(q_param, f_tf, k_tf, k_literal)``."""
    if q_hat.is_zero:
        raise QhatIdenticallyZero("Qh is identically zero")
    q_param = n_p.invert() * n_c * q_hat
    f_tf = -(q_param.invert() + c_opt.invert())
    return q_param, f_tf, -q_param, -q_hat


@dataclass(frozen=True)
class DeviationSolveResult:
    gamma2_opt: float
    omega_star: float
    params: DeviationParams
    a_tf: TF
    b_tf: TF
    c2_opt: TF
    q_hat: TF
    q_param: TF
    f_tf: TF
    k_tf: TF
    k_literal: TF


@dataclass(frozen=True)
class StabilityReport:
    k_rhp_poles: int
    closed_loop_rhp_zeros: int
    closed_loop_neutral_chain: bool
    suff_cond_margin: float
    achieved_deviation: float
    deviation_bound: float
    deviation_identity_error: float
    detail: dict = field(default_factory=dict, compare=False)

    @property
    def strongly_stabilizing(self):
        return (self.k_rhp_poles == 0 and self.closed_loop_rhp_zeros == 0
                and not self.closed_loop_neutral_chain)

    @property
    def deviation_within_bound(self):
        return self.achieved_deviation <= self.deviation_bound * (1 + 1e-6)


def _count(qp, indent):
    """RHP zero count; a neutral chain in the RHP is flagged, not raised."""
    try:
        return winding_number(qp, indent=indent), False
    except DegreeNotRetarded:
        return winding_number(qp, indent=indent, check_asymptotics=False), True


def certify(result, plant, weight, gamma0, s_opt, n_c, d_c, omega_gamma, grid=None,
            k_tf=None, identity_tol=1e-8):
    """Stability and deviation certificates for the stage-2 controller.

    ``k_tf`` defaults to ``result.k_tf``; pass ``result.k_literal`` to
    certify the alternative controller -Qh instead.
    """
    h = plant.delay_h
    k = result.k_tf if k_tf is None else k_tf
    indent = (omega_gamma, result.omega_star)

    k_poles, k_chain = _count(k.den, indent)
    return_diff = 1 + plant.plant_tf * k
    # zeros of the return difference are the closed-loop poles
    cl_zeros, cl_chain = _count(return_diff.num, indent)
    s_tf = return_diff.invert()
    w = as_omegas(grid, h, exclude=indent)
    s = 1j * w

    np_mag = np.abs(plant.np_tf(s))
    # Youla parameter of this controller (K = -Q)
    q_eff = -k(s)
    suff = float(np.min(1.0 / np.abs(q_eff) - np_mag))

    W = weight.tf()(s)
    s0 = s_opt(s)
    sk = s_tf(s)
    dev15 = np.abs(W * (s0 - sk) / sk)
    q_hat_eff = plant.np_tf(s) / n_c(s) * q_eff
    dev16 = np.abs(gamma0 * n_c(s) * (1 + d_c(s) * q_hat_eff))
    ident = float(np.max(np.abs(dev15 - dev16) / np.maximum(dev16, 1e-300)))
    if ident > identity_tol:
        raise IdentityMismatch(f"deviation forms disagree by {ident:.2e} (relative)")

    axis = float(np.max(np.abs(np.abs(d_c(s) + plant.delay_tf(s) * n_c(s))
                               - np.abs(W) / gamma0) / (np.abs(W) / gamma0)))
    detail = {"k_neutral_chain": k_chain, "axis_identity_error": axis,
              "omega": w, "deviation": dev15}
    return StabilityReport(k_poles + (1 if k_chain else 0), cl_zeros, cl_chain, suff,
                           float(np.max(dev15)), result.gamma2_opt, ident, detail)


def solve_deviation(params, stage1, plant):
    """Stage 2 synthesis given stage-1 results and an envelope."""
    g2, ws = solve_gamma2(params)
    a_tf, b_tf, c2, q_hat = build_c2_and_qhat(params, g2, stage1.d_c)
    q_param, f_tf, k_tf, k_lit = build_f_and_k(q_hat, stage1.n_c, plant.np_tf, stage1.c_opt)
    return DeviationSolveResult(g2, ws, params, a_tf, b_tf, c2, q_hat, q_param, f_tf, k_tf, k_lit)
