"""First-order rational upper bound W1 for the irrational magnitude |gamma0 N_c|.

    W1(s) = gamma0 * kappa * (s + alpha1) / (s + beta1)
    kappa = 1 + alpha / gamma0
    beta1 = beta (gamma0 + alpha) / (1 - gamma0 beta) * alpha1

The two constraints pin W1 to |gamma0 N_c| at w = 0 (value 1/beta - gamma0)
and to the upper limit gamma0 + alpha of its high-frequency oscillation.
alpha1 is the only free parameter.  |W1(jw)| grows with alpha1 at every w,
so dominance holds on a half line [alpha1*, inf) and the tightest envelope
sits at its left end; :func:`select_alpha1` finds it by golden-section
search on a penalized peak ratio.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import EnvelopeIntervalEmpty, NoFeasibleAlpha1
from .quasipoly import DelayTransferFunction as TF
from .winding import as_omegas

__all__ = ["EnvelopeWeight", "build_envelope", "check_dominance", "envelope_objective",
           "select_alpha1"]

_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class EnvelopeWeight:
    gamma0: float
    kappa: float
    alpha1: float
    beta1: float
    w1: TF

    @property
    def high_frequency_gain(self):
        return self.gamma0 * self.kappa

    def magnitude(self, omega):
        w2 = np.asarray(omega, dtype=float) ** 2
        return self.gamma0 * self.kappa * np.sqrt((w2 + self.alpha1**2) / (w2 + self.beta1**2))


def _beta1_ratio(gamma0, alpha, beta):
    return beta * (gamma0 + alpha) / (1 - gamma0 * beta)


def build_envelope(gamma0, alpha, beta, alpha1):
    if not alpha1 > 0:
        raise ValueError("alpha1 must be positive")
    limit = (1 - alpha * beta) / (2 * beta)
    if not gamma0 < limit:
        raise EnvelopeIntervalEmpty(
            f"gamma0 = {gamma0:.6g} >= (1 - alpha*beta)/(2*beta) = {limit:.6g}, so beta1 >= alpha1 "
            f"(alpha={alpha:g}, beta={beta:g})")
    kappa = 1 + alpha / gamma0
    beta1 = _beta1_ratio(gamma0, alpha, beta) * alpha1
    c = gamma0 * kappa
    w1 = TF.rational((c * alpha1, c), (beta1, 1.0))
    return EnvelopeWeight(gamma0, kappa, alpha1, beta1, w1)


def _target_magnitude(gamma0_nc, omega):
    if callable(gamma0_nc):
        return np.abs(gamma0_nc(1j * omega))
    return np.asarray(gamma0_nc, dtype=float)


def check_dominance(env, gamma0_nc, grid, h=None, exclude=()):
    """Smallest margin |W1(jw)| - |gamma0 N_c(jw)| on the grid and where it occurs.

    ``gamma0_nc`` is the transfer function or its precomputed magnitude on
    the grid.  A negative margin is returned, not raised.
    """
    w = as_omegas(grid, h, exclude)
    margin = env.magnitude(w) - _target_magnitude(gamma0_nc, w)
    i = int(np.argmin(margin))
    return float(margin[i]), float(w[i])


def envelope_objective(alpha1, target, omega, gamma0, alpha, beta):
    """(peak over-bound ratio, dominance margin) for a candidate alpha1."""
    r = _beta1_ratio(gamma0, alpha, beta)
    c = gamma0 + alpha
    w2 = omega**2
    mag = c * np.sqrt((w2 + alpha1**2) / (w2 + (r * alpha1) ** 2))
    return float(np.max(mag / target)), float(np.min(mag - target))


def select_alpha1(gamma0_nc, gamma0, alpha, beta, grid, h=None, exclude=(), rtol=1e-4):
    """alpha1 minimizing max |W1| / |gamma0 N_c| subject to dominance on the grid."""
    build_envelope(gamma0, alpha, beta, 1.0)  # precondition check
    w = as_omegas(grid, h, exclude)
    target = _target_magnitude(gamma0_nc, w)
    slack = -1e-9 * gamma0
    best = [None, math.inf]

    def cost(x):
        a1 = math.exp(x)
        ratio, margin = envelope_objective(a1, target, w, gamma0, alpha, beta)
        if margin >= slack:
            if ratio < best[1]:
                best[:] = [a1, ratio]
            return ratio
        # infeasible side: large and decreasing toward the feasible boundary
        return 1e6 * (1.0 + (slack - margin) / gamma0)

    lo, hi = math.log(1e-3 * beta), math.log(1e3 * beta)
    cost(hi)
    if best[0] is None:
        raise NoFeasibleAlpha1(f"no dominating envelope for alpha1 up to {1e3 * beta:g}")
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1, f2 = cost(x1), cost(x2)
    while hi - lo > rtol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - _GOLDEN * (hi - lo)
            f1 = cost(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + _GOLDEN * (hi - lo)
            f2 = cost(x2)
    return best[0]
