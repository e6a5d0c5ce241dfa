"""Phase unwrapping, argument-principle zero counting and real-axis crossings.

The winding number of a quasi-polynomial is computed along the boundary of
the half disc ``{Re s >= 0, |s| <= R}``, traversed counter-clockwise, so for
a function analytic inside the contour it equals the number of enclosed
zeros.  For a :class:`DelayTransferFunction` it is (#zeros - #poles).

Known imaginary-axis zeros (e.g. the cancelling pole/zero pairs of the
optimal controller pieces) can be skipped with small semicircular
indentations that bulge into the right half plane, which leaves those points
outside the counted region.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (DegreeNotRetarded, NonIntegerWinding, PhaseStepTooLarge,
                     ZeroSample)
from .quasipoly import DelayTransferFunction, QuasiPolynomial

__all__ = [
    "FrequencyGrid",
    "CrossingReport",
    "unwrap_phase",
    "winding_number",
    "zero_count",
    "principal_roots",
    "check_retarded",
    "default_radius",
    "crossing_profile",
    "as_omegas",
]

_REFINE_STEP = math.pi / 4   # refine when a phase step reaches this
_MAX_STEP = math.pi / 2      # ... and give up if one this large survives
_MAX_REFINE = 40
_MAX_POINTS = 4_000_000
_ZERO_MAG = 1e-300


@dataclass(frozen=True)
class FrequencyGrid:
    """Log grid plus, for delay systems, a linear grid resolving exp(-jhw)."""

    omega_min: float = 1e-3
    omega_max: float = 1e4
    points_per_decade: int = 64
    extra_linear_points_per_delay_period: int = 16

    def __post_init__(self):
        if not 0 < self.omega_min < self.omega_max:
            raise ValueError("need 0 < omega_min < omega_max")
        if self.points_per_decade < 16:
            raise ValueError("points_per_decade must be >= 16")
        if self.extra_linear_points_per_delay_period < 8:
            raise ValueError("extra_linear_points_per_delay_period must be >= 8")

    @classmethod
    def for_delay(cls, h, points_per_decade=64, linear_points=16):
        return cls(1e-3 / h, 1e4 / h, points_per_decade, linear_points)

    def omegas(self, h=None, exclude=(), exclude_rtol=1e-6):
        lo, hi = math.log10(self.omega_min), math.log10(self.omega_max)
        n = max(2, int(math.ceil((hi - lo) * self.points_per_decade)) + 1)
        w = np.logspace(lo, hi, n)
        if h is not None and h > 0:
            step = 2 * math.pi / h / self.extra_linear_points_per_delay_period
            lin = np.arange(self.omega_min, self.omega_max, step)
            w = np.union1d(w, lin)
        for wx in exclude:
            if wx > 0:
                w = w[np.abs(w - wx) > exclude_rtol * wx]
        return w


def as_omegas(grid, h=None, exclude=()):
    """Accept a FrequencyGrid or an explicit array of frequencies."""
    if grid is None:
        grid = FrequencyGrid.for_delay(h) if h else FrequencyGrid()
    if isinstance(grid, FrequencyGrid):
        return grid.omegas(h, exclude)
    w = np.asarray(grid, dtype=float)
    for wx in exclude:
        if wx > 0:
            w = w[np.abs(w - wx) > 1e-6 * wx]
    return w


# ---------------------------------------------------------------------------
# phase unwrapping

def _wrapped_steps(values):
    a = np.angle(values)
    return (np.diff(a) + math.pi) % (2 * math.pi) - math.pi


def unwrap_phase(samples):
    """Continuous phase of a sampled complex path.

    Unlike :func:`numpy.unwrap` this refuses to guess: any adjacent step of
    pi/2 or more raises :class:`PhaseStepTooLarge`, since the sampling is then
    too coarse to tell which way the path went around the origin.
    """
    v = np.asarray(samples, dtype=complex)
    if v.size == 0:
        return np.array([])
    if np.any(np.abs(v) < _ZERO_MAG):
        raise ZeroSample("sample magnitude below 1e-300")
    d = _wrapped_steps(v)
    if np.any(np.abs(d) >= _MAX_STEP):
        i = int(np.argmax(np.abs(d)))
        raise PhaseStepTooLarge(f"phase step {d[i]:.3f} rad between samples {i} and {i + 1}")
    return np.angle(v[0]) + np.concatenate(([0.0], np.cumsum(d)))


def _path_phase_change(fn, path, t):
    """Total phase change of fn(path(t)) with adaptive bisection of t."""
    t = np.asarray(t, dtype=float)
    v = fn(path(t))
    for rnd in range(_MAX_REFINE + 1):
        if np.any(np.abs(v) < _ZERO_MAG) or not np.all(np.isfinite(v)):
            raise ZeroSample("function vanishes (or overflows) on the contour")
        d = _wrapped_steps(v)
        bad = np.abs(d) >= _REFINE_STEP
        if not bad.any():
            return float(d.sum())
        if rnd == _MAX_REFINE or t.size + bad.sum() > _MAX_POINTS:
            break
        idx = np.nonzero(bad)[0]
        tm = 0.5 * (t[idx] + t[idx + 1])
        vm = fn(path(tm))
        t = np.insert(t, idx + 1, tm)
        v = np.insert(v, idx + 1, vm)
    if np.any(np.abs(d) >= _MAX_STEP):
        raise PhaseStepTooLarge("refinement exhausted; a zero lies too close to the contour")
    return float(d.sum())


# ---------------------------------------------------------------------------
# asymptotic (large |s|) structure of quasi-polynomials

def _commensurate_orders(delays):
    pos = [d for d in delays if d > 0]
    if not pos:
        return [0] * len(delays)
    base = min(pos)
    orders = []
    for d in delays:
        k = round(d / base)
        if abs(d - k * base) > 1e-9 * max(1.0, d):
            return None
        orders.append(k)
    return orders


def principal_roots(qp):
    """Roots z of the principal exponential polynomial of ``qp``.

    For large |s| the zeros of a quasi-polynomial approach those of
    ``sum_k a_k z^(h_k / h_base)`` with ``z = exp(-h_base s)``, where the
    ``a_k`` are the top-degree coefficients.  ``|z| < 1`` means zeros with
    Re s > 0 (infinitely many of them).  Returns None when the delays are
    not commensurate.
    """
    d = qp.degree
    top = [(t.delay, t.poly.coeffs[d]) for t in qp.terms if t.poly.degree == d]
    orders = _commensurate_orders([h for h, _ in top])
    if orders is None:
        return None
    coeffs = np.zeros(max(orders) + 1)
    for k, (_, a) in zip(orders, top):
        coeffs[k] += a
    if coeffs[0] == 0.0:
        return np.array([0.0])
    if coeffs.size == 1:
        return np.array([])
    return np.roots(coeffs[::-1])


def check_retarded(qp):
    """Raise DegreeNotRetarded unless the delay-free term dominates at large |s|.

    Retarded quasi-polynomials (delay-free term of strictly highest degree)
    always pass.  Neutral ones pass when the principal exponential polynomial
    has all roots strictly outside the unit disc, which places every large
    zero in the open left half plane.
    """
    if qp.is_zero:
        raise DegreeNotRetarded("zero quasi-polynomial")
    d = qp.degree
    p0 = qp.term_at(0.0)
    if p0.degree < d:
        raise DegreeNotRetarded(
            f"delay-free degree {p0.degree} below overall degree {d} (advanced type)")
    others = [t for t in qp.terms if t.delay > 0 and t.poly.degree == d]
    if not others:
        return
    z = principal_roots(qp)
    if z is None:
        if sum(abs(t.poly.leading) for t in others) < abs(p0.leading):
            return
        raise DegreeNotRetarded("neutral quasi-polynomial without leading-term dominance")
    if z.size and np.min(np.abs(z)) <= 1.0 + 1e-12:
        raise DegreeNotRetarded(
            f"neutral chain of zeros in the closed right half plane (|z|min = {np.min(np.abs(z)):.6g})")


def default_radius(*qps):
    r = 0.0
    for qp in qps:
        roots = qp.term_at(0.0).roots()
        if roots.size:
            r = max(r, float(np.max(np.abs(roots))))
    return max(100.0, 50.0 * r)


# ---------------------------------------------------------------------------
# winding numbers

def _contour_pieces(radius, grid, h, indent, indent_radius):
    """Yield (path, t) pieces of the counter-clockwise contour."""
    R = float(radius)
    n_arc = int(512 + 8 * (h or 0.0) * R)
    yield (lambda t: R * np.exp(1j * (-0.5 * math.pi + math.pi * t)),
           np.linspace(0.0, 1.0, n_arc))

    # imaginary axis, top to bottom, with indentations at +-w_i
    pts = sorted({w for wi in indent for w in (abs(wi), -abs(wi)) if abs(wi) < R}, reverse=True)
    if grid is None:
        grid = FrequencyGrid(min(1e-3, 1e-3 / h) if h else 1e-3, R, 64, 16)
    wpos = as_omegas(FrequencyGrid(grid.omega_min, R, grid.points_per_decade,
                                   grid.extra_linear_points_per_delay_period)
                     if isinstance(grid, FrequencyGrid) else grid, h)
    wpos = wpos[(wpos > 0) & (wpos < R)]
    base = np.concatenate((-wpos[::-1], [0.0], wpos))

    rho = []
    for w in pts:
        r = indent_radius if indent_radius else 1e-3 * max(1.0, abs(w))
        near = [abs(w - o) for o in pts if o != w]
        if near:
            r = min(r, 0.25 * min(near))
        rho.append(r)

    top = R
    for w, r in zip(pts, rho):
        yield _axis_piece(top, w + r, base)
        yield (lambda t, w=w, r=r: 1j * w + r * np.exp(1j * (0.5 * math.pi - math.pi * t)),
               np.linspace(0.0, 1.0, 33))
        top = w - r
    yield _axis_piece(top, -R, base)


def _axis_piece(w_hi, w_lo, base):
    inner = base[(base < w_hi) & (base > w_lo)][::-1]
    w = np.concatenate(([w_hi], inner, [w_lo]))
    t = (w_hi - w) / (w_hi - w_lo)
    t[-1] = 1.0
    return (lambda t: 1j * (w_hi + t * (w_lo - w_hi))), t


def _qp_winding(qp, radius, grid, h, indent, indent_radius):
    total = 0.0
    for path, t in _contour_pieces(radius, grid, h, indent, indent_radius):
        total += _path_phase_change(qp, path, t)
    wn = total / (2 * math.pi)
    n = round(wn)
    if abs(wn - n) >= 0.05:
        raise NonIntegerWinding(f"winding {wn:.4f} is not close to an integer")
    return int(n)


def zero_count(qp, contour_radius=None, grid=None, indent=(), indent_radius=None,
               check_asymptotics=True):
    """Number of zeros of a quasi-polynomial inside the right half-disc."""
    if check_asymptotics:
        check_retarded(qp)
    if qp.degree <= 0 and qp.is_rational:
        return 0
    R = contour_radius or default_radius(qp)
    h = max(qp.delays, default=0.0)
    return _qp_winding(qp, R, grid, h, indent, indent_radius)


def winding_number(f, contour_radius=None, grid=None, indent=(), indent_radius=None,
                   check_asymptotics=True):
    """Argument-principle count (#zeros - #poles) of ``f`` in the right half plane.

    ``f`` may be a QuasiPolynomial or a DelayTransferFunction.  The contour
    radius defaults to max(100, 50 * largest root of the delay-free parts).
    ``indent`` lists imaginary-axis frequencies (both signs are used) that the
    contour steps around.
    """
    if isinstance(f, QuasiPolynomial):
        return zero_count(f, contour_radius, grid, indent, indent_radius, check_asymptotics)
    R = contour_radius or default_radius(f.num, f.den)
    return (zero_count(f.num, R, grid, indent, indent_radius, check_asymptotics)
            - zero_count(f.den, R, grid, indent, indent_radius, check_asymptotics))


# ---------------------------------------------------------------------------
# real-axis crossings along the imaginary axis

@dataclass(frozen=True)
class CrossingReport:
    negative_axis_crossings: tuple = ()
    positive_axis_crossings: tuple = ()
    predicted_negative: tuple = ()
    predicted_positive: tuple = ()
    matched_fraction: float = 1.0
    ambiguous_crossings: tuple = ()
    magnitudes: dict = field(default_factory=dict, compare=False)


def _matched(w, predicted):
    if not predicted:
        return False
    p = np.asarray(predicted)
    k = int(np.argmin(np.abs(p - w)))
    return abs(w - p[k]) <= 0.1 * p[k]


def crossing_profile(f, h, k_max, grid=None, k_min=5):
    """Locate the crossings of f(jw) with the real axis for 0 < w < 2pi(k_max+1/2)/h.

    Sign changes of Im f between adjacent grid points are refined with
    Brent's method to a relative accuracy of 1e-10 and classified by the
    sign of Re f.  Crossings with |Re f| < 1e-9 are ambiguous and count as
    unmatched.  ``matched_fraction`` is measured over crossings at or above
    90% of the k_min-th predicted frequency.
    """
    w_end = 2 * math.pi * (k_max + 0.5) / h
    if grid is None:
        grid = FrequencyGrid(1e-3 / h, w_end, 64, 16)
    w = as_omegas(grid, h)
    w = np.append(w[(w > 0) & (w < w_end)], w_end)

    def im_f(x):
        return float(np.imag(f(1j * x)))

    vals = f(1j * w)
    im = np.imag(vals)
    neg, pos, amb, mags = [], [], [], {}
    for i in np.nonzero(im[:-1] * im[1:] < 0)[0]:
        wc = brentq(im_f, w[i], w[i + 1], xtol=1e-14, rtol=1e-10)
        if wc >= w_end * (1 - 1e-9):
            continue
        fc = complex(f(1j * wc))
        mags[wc] = abs(fc)
        if abs(fc.real) < 1e-9:
            amb.append(wc)
        elif fc.real < 0:
            neg.append(wc)
        else:
            pos.append(wc)

    ks = range(1, k_max + 1)
    pred_neg = tuple(2 * math.pi * k / h for k in ks)
    pred_pos = tuple((2 * k + 1) * math.pi / h for k in ks)
    lo = 0.9 * 2 * math.pi * k_min / h
    win_neg = [p for p in pred_neg if p >= 2 * math.pi * k_min / h]
    win_pos = [p for p in pred_pos if p >= (2 * k_min + 1) * math.pi / h]
    considered = [(x, win_neg) for x in neg if x >= lo] + [(x, win_pos) for x in pos if x >= lo]
    n_amb = sum(1 for x in amb if x >= lo)
    total = len(considered) + n_amb
    if total == 0:
        frac = 1.0
    else:
        frac = sum(_matched(x, p) for x, p in considered) / total
    return CrossingReport(tuple(neg), tuple(pos), pred_neg, pred_pos, frac, tuple(amb), mags)
