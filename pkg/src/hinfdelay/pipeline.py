"""End-to-end synthesis: optimal sensitivity, factorization, envelope,
stable controller and the certificates for each step."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .envelope import build_envelope, check_dominance, select_alpha1
from .errors import HinfDelayError
from .quasipoly import DelayTransferFunction as TF
from .sensopt import (PlantSpec, WeightSpec, phase_lhs, solve_optimal_sensitivity,
                      verify_infinite_rhp_poles)
from .strongstab import DeviationParams, certify, phase_lhs2, solve_deviation
from .winding import FrequencyGrid, as_omegas, crossing_profile

__all__ = ["SynthesisConfig", "Certificate", "SynthesisResult", "synthesize"]

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"

STAGE1_CHECKS = ("phase_equation", "flat_sensitivity", "inner", "factorization", "encirclement")
ENVELOPE_CHECKS = ("envelope_dominance",)
STAGE2_CHECKS = ("phase_equation_2", "deviation_identity", "deviation_bound",
                 "k_stable", "closed_loop_stable")


@dataclass(frozen=True)
class SynthesisConfig:
    delay_h: float
    alpha: float
    beta: float
    np_num: tuple = (1.0,)
    np_den: tuple = (1.0,)
    alpha1: float | None = None
    grid: FrequencyGrid | None = None
    phase_residual: float = 1e-10
    grid_identity: float = 1e-8
    inner_check: float = 1e-9
    flatness: float = 1e-6
    k_max_encirclements: int = 20
    skip_stage2: bool = False
    k_variant: str = "consistent"

    def __post_init__(self):
        if self.k_variant not in ("consistent", "literal"):
            raise ValueError("k_variant must be 'consistent' or 'literal'")

    @property
    def plant(self):
        return PlantSpec(self.delay_h, TF.rational(self.np_num, self.np_den))

    @property
    def weight(self):
        return WeightSpec(self.alpha, self.beta)

    @property
    def frequency_grid(self):
        return self.grid if self.grid is not None else FrequencyGrid.for_delay(self.delay_h)


@dataclass
class Certificate:
    status: str
    margin: float | None
    detail: str = ""


@dataclass
class SynthesisResult:
    config: SynthesisConfig
    certificates: dict
    errors: list = field(default_factory=list)
    stage1: object = None
    envelope: object = None
    stage2: object = None
    stability: object = None
    encirclement: object = None
    encirclement_summary: dict = None
    wall_time_seconds: float = 0.0

    @property
    def passed(self):
        return not self.errors and all(c.status != FAIL for c in self.certificates.values())


def _cert(ok, margin, detail=""):
    return Certificate(PASS if ok else FAIL, float(margin), detail)


def _stage1_certs(cfg, plant, weight, r, omegas):
    h = plant.delay_h
    certs = {}
    res = abs(phase_lhs(r.gamma_opt, h, weight.alpha, weight.beta) - math.pi)
    certs["phase_equation"] = _cert(res < cfg.phase_residual, cfg.phase_residual - res,
                                    f"residual {res:.3e}")
    s = 1j * omegas
    flat = float(np.max(np.abs(np.abs(weight.tf()(s) * r.s_opt(s)) - r.gamma_opt)))
    certs["flat_sensitivity"] = _cert(flat < cfg.flatness, cfg.flatness - flat,
                                      f"max ||W S_opt| - gamma_opt| = {flat:.3e}")
    c = r.certificate
    certs["inner"] = _cert(c.inner_deviation < cfg.inner_check and c.dc_rhp_poles == 0,
                           cfg.inner_check - c.inner_deviation,
                           f"D_c RHP poles {c.dc_rhp_poles}")
    fmax = max(c.factor_residual, c.nc_num_at_wg, c.nc_den_at_wg)
    certs["factorization"] = _cert(fmax < cfg.grid_identity, cfg.grid_identity - fmax,
                                   f"residual {c.factor_residual:.3e}")
    return certs


def _encirclement(cfg, plant, weight, r):
    h = plant.delay_h
    target = weight.alpha / r.gamma_opt
    hf = abs(complex(r.s_opt.invert()(1j * 1e4)))
    hf_err = abs(hf - target) / target
    try:
        rep = verify_infinite_rhp_poles(r.s_opt, h, cfg.k_max_encirclements, weight.alpha,
                                        r.gamma_opt)
        ok = hf_err < 0.01
    except HinfDelayError:
        rep = crossing_profile(r.s_opt.invert(), h, cfg.k_max_encirclements)
        ok = False
    margin = min(rep.matched_fraction - 0.9, 0.01 - hf_err)
    cert = _cert(ok, margin, f"matched {rep.matched_fraction:.3f}, |S_opt^-1(1e4 j)| = {hf:.6g}")
    summary = {
        "negative_axis_crossings": len(rep.negative_axis_crossings),
        "positive_axis_crossings": len(rep.positive_axis_crossings),
        "matched_fraction": rep.matched_fraction,
        "high_frequency_magnitude": hf,
        "high_frequency_target": target,
    }
    return cert, rep, summary


def synthesize(cfg):
    """Run the whole pipeline; errors from a stage are recorded, not raised."""
    t0 = time.perf_counter()
    certs = {name: Certificate(SKIPPED, None) for name in
             STAGE1_CHECKS + ENVELOPE_CHECKS + STAGE2_CHECKS}
    out = SynthesisResult(cfg, certs)
    plant, weight, grid = cfg.plant, cfg.weight, cfg.frequency_grid
    h = plant.delay_h

    def fail(stage, exc, check):
        out.errors.append({"module": stage, "type": type(exc).__name__, "message": str(exc)})
        certs[check] = Certificate(FAIL, None, f"{type(exc).__name__}: {exc}")

    try:
        r = solve_optimal_sensitivity(plant, weight, grid=grid)
    except HinfDelayError as exc:
        fail("sensopt", exc, "factorization")
        return _finish(out, t0)
    out.stage1 = r
    w1 = as_omegas(grid, h, exclude=(r.omega_gamma,))
    certs.update(_stage1_certs(cfg, plant, weight, r, w1))
    certs["encirclement"], out.encirclement, out.encirclement_summary = \
        _encirclement(cfg, plant, weight, r)

    g0, a, b = r.gamma_opt, weight.alpha, weight.beta
    g0nc = r.n_c * g0
    try:
        a1 = cfg.alpha1
        if a1 is None:
            a1 = select_alpha1(g0nc, g0, a, b, grid, h=h, exclude=(r.omega_gamma,))
        env = build_envelope(g0, a, b, a1)
    except HinfDelayError as exc:
        fail("envelope", exc, "envelope_dominance")
        return _finish(out, t0)
    out.envelope = env
    margin, wmin = check_dominance(env, g0nc, grid, h=h, exclude=(r.omega_gamma,))
    certs["envelope_dominance"] = _cert(margin >= -1e-9 * g0, margin + 1e-9 * g0,
                                        f"min margin {margin:.3e} at w = {wmin:.6g}")
    if cfg.skip_stage2 or margin < -1e-9 * g0:
        return _finish(out, t0)

    params = DeviationParams.from_envelope(env, h, a, b)
    try:
        res = solve_deviation(params, r, plant)
    except HinfDelayError as exc:
        fail("strongstab", exc, "phase_equation_2")
        return _finish(out, t0)
    out.stage2 = res
    res2 = abs(phase_lhs2(res.gamma2_opt, params) - math.pi)
    certs["phase_equation_2"] = _cert(res2 < cfg.phase_residual, cfg.phase_residual - res2,
                                      f"residual {res2:.3e}")
    k = res.k_tf if cfg.k_variant == "consistent" else res.k_literal
    try:
        rep = certify(res, plant, weight, g0, r.s_opt, r.n_c, r.d_c, r.omega_gamma,
                      grid=grid, k_tf=k, identity_tol=cfg.grid_identity)
    except HinfDelayError as exc:
        fail("strongstab", exc, "deviation_identity")
        return _finish(out, t0)
    out.stability = rep
    certs["deviation_identity"] = _cert(rep.deviation_identity_error < cfg.grid_identity,
                                        cfg.grid_identity - rep.deviation_identity_error,
                                        f"relative gap {rep.deviation_identity_error:.3e}")
    bound = rep.deviation_bound * (1 + 1e-6)
    certs["deviation_bound"] = _cert(rep.achieved_deviation <= bound,
                                     bound - rep.achieved_deviation,
                                     f"achieved {rep.achieved_deviation:.9g}")
    certs["k_stable"] = _cert(rep.k_rhp_poles == 0, -rep.k_rhp_poles,
                              f"{rep.k_rhp_poles} RHP poles")
    chain = " plus an unbounded neutral chain" if rep.closed_loop_neutral_chain else ""
    cl_ok = rep.closed_loop_rhp_zeros == 0 and not rep.closed_loop_neutral_chain
    certs["closed_loop_stable"] = _cert(cl_ok, -rep.closed_loop_rhp_zeros,
                                        f"{rep.closed_loop_rhp_zeros} RHP poles inside the contour{chain}")
    return _finish(out, t0)


def _finish(out, t0):
    out.wall_time_seconds = time.perf_counter() - t0
    return out
