"""Command line driver: ``synth <spec.json> --out <dir>``.

Exit codes: 0 when every certificate passes, 1 on an input error, 2 when a
certificate fails or a pipeline stage raises.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .errors import OutputUnwritable, SpecParseError, SpecValidationError
from .pipeline import SynthesisConfig, synthesize
from .quasipoly import DelayTransferFunction as TF
from .sensopt import PlantSpec, WeightSpec
from .winding import FrequencyGrid, as_omegas

__all__ = ["TRACE_NAMES", "load_spec", "build_report", "dumps_report", "emit_traces",
           "run_pipeline", "main"]

CSV_HEADER = ("omega", "re", "im", "mag", "phase_unwrapped")
TRACE_NAMES = ("S_opt", "S_opt_inverse", "W_S_opt", "gamma0_Nc", "W1", "K", "F",
               "S_achieved", "weighted_deviation")


# ---------------------------------------------------------------------------
# input

def _number(obj, key, path, default=None):
    if key not in obj:
        if default is None:
            raise SpecValidationError(f"{path}.{key}", "missing")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise SpecValidationError(f"{path}.{key}", f"must be a finite number, got {v!r}")
    return float(v)


def _coeffs(obj, key, path):
    v = obj.get(key, [1.0])
    if not isinstance(v, list) or not v or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x) for x in v):
        raise SpecValidationError(f"{path}.{key}", "must be a nonempty list of finite numbers")
    return tuple(float(x) for x in v)


def _section(doc, key):
    v = doc.get(key, {})
    if not isinstance(v, dict):
        raise SpecValidationError(key, "must be an object")
    return v


def load_spec(path, skip_stage2=False, k_variant="consistent"):
    """Parse and validate a problem spec file into a :class:`SynthesisConfig`.

    Coefficient lists are in ascending powers of s.
    """
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise SpecParseError(f"{path}: {exc}") from exc
    if not isinstance(doc, dict):
        raise SpecParseError(f"{path}: top level must be a JSON object")

    plant, weight = _section(doc, "plant"), _section(doc, "weight")
    env, grid = _section(doc, "envelope"), _section(doc, "grid")
    tol, checks = _section(doc, "tolerances"), _section(doc, "checks")

    h = _number(plant, "delay_h", "plant")
    if not h > 0:
        raise SpecValidationError("plant.delay_h", "must be positive")
    np_num, np_den = _coeffs(plant, "np_num", "plant"), _coeffs(plant, "np_den", "plant")
    a, b = _number(weight, "alpha", "weight"), _number(weight, "beta", "weight")
    if not (a > 0 and b > 0):
        raise SpecValidationError("weight", "alpha and beta must be positive")
    if not a * b < 1:
        raise SpecValidationError("alpha*beta", f"alpha*beta = {a * b:g} must be < 1")
    try:
        WeightSpec(a, b)
        PlantSpec(h, TF.rational(np_num, np_den))
    except ValueError as exc:
        raise SpecValidationError("plant.np_num/np_den", str(exc)) from exc

    a1 = env.get("alpha1", "auto")
    if a1 == "auto":
        a1 = None
    else:
        a1 = _number(env, "alpha1", "envelope")
        if not a1 > 0:
            raise SpecValidationError("envelope.alpha1", "must be positive or \"auto\"")

    default = FrequencyGrid.for_delay(h)
    try:
        fgrid = FrequencyGrid(
            _number(grid, "omega_min", "grid", default.omega_min),
            _number(grid, "omega_max", "grid", default.omega_max),
            int(_number(grid, "points_per_decade", "grid", default.points_per_decade)),
            int(_number(grid, "linear_points_per_period", "grid",
                        default.extra_linear_points_per_delay_period)))
    except ValueError as exc:
        raise SpecValidationError("grid", str(exc)) from exc

    kmax = int(_number(checks, "k_max_encirclements", "checks", 20))
    if kmax < 5:
        raise SpecValidationError("checks.k_max_encirclements", "must be >= 5")
    tols = {}
    for key, dflt in (("phase_residual", 1e-10), ("grid_identity", 1e-8), ("inner_check", 1e-9)):
        tols[key] = _number(tol, key, "tolerances", dflt)
        if not tols[key] > 0:
            raise SpecValidationError(f"tolerances.{key}", "must be positive")
    return SynthesisConfig(h, a, b, np_num, np_den, a1, fgrid, k_max_encirclements=kmax,
                           skip_stage2=skip_stage2, k_variant=k_variant, **tols)


# ---------------------------------------------------------------------------
# output

def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (float, np.floating)):
        return float(x)
    return x


def _encode(x, indent, level):
    pad, inner = " " * (indent * level), " " * (indent * (level + 1))
    if isinstance(x, dict):
        if not x:
            return "{}"
        items = [f"{inner}{json.dumps(k)}: {_encode(v, indent, level + 1)}" for k, v in x.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(x, list):
        if not x:
            return "[]"
        return "[" + ", ".join(_encode(v, indent, level + 1) for v in x) + "]"
    if isinstance(x, float):
        return format(x, ".17g") if math.isfinite(x) else "null"
    return json.dumps(x)


def dumps_report(report):
    """JSON text with every float written to 17 significant digits."""
    return _encode(_jsonable(report), 2, 0) + "\n"


def build_report(result):
    r1, env, r2, st = result.stage1, result.envelope, result.stage2, result.stability
    rep = {
        "status": "pass" if result.passed else "fail",
        "k_variant": result.config.k_variant,
        "gamma_opt": r1.gamma_opt if r1 else None,
        "omega_gamma": r1.omega_gamma if r1 else None,
        "kappa": env.kappa if env else None,
        "alpha1": env.alpha1 if env else None,
        "beta1": env.beta1 if env else None,
        "gamma2_opt": r2.gamma2_opt if r2 else None,
        "omega_star": r2.omega_star if r2 else None,
        "achieved_deviation": st.achieved_deviation if st else None,
        "suff_cond_margin": st.suff_cond_margin if st else None,
        "k_rhp_poles": st.k_rhp_poles if st else None,
        "closed_loop_rhp_zeros": st.closed_loop_rhp_zeros if st else None,
        "closed_loop_neutral_chain": st.closed_loop_neutral_chain if st else None,
        "encirclement_summary": result.encirclement_summary or {},
        "certificates": {k: {"status": c.status, "margin": c.margin, "detail": c.detail}
                         for k, c in result.certificates.items()},
        "errors": result.errors,
        "wall_time_seconds": result.wall_time_seconds,
    }
    return rep


def _trace_functions(result):
    r1, env, r2 = result.stage1, result.envelope, result.stage2
    cfg = result.config
    fns = {}
    if r1 is not None:
        w = cfg.weight.tf()
        fns["S_opt"] = r1.s_opt
        fns["S_opt_inverse"] = r1.s_opt.invert()
        fns["W_S_opt"] = w * r1.s_opt
        fns["gamma0_Nc"] = r1.n_c * r1.gamma_opt
    if env is not None:
        fns["W1"] = env.w1
    if r2 is not None:
        k = r2.k_tf if cfg.k_variant == "consistent" else r2.k_literal
        s_ach = (1 + cfg.plant.plant_tf * k).invert()
        fns["K"] = k
        fns["F"] = r2.f_tf
        fns["S_achieved"] = s_ach
        fns["weighted_deviation"] = cfg.weight.tf() * (r1.s_opt - s_ach) / s_ach
    return fns


def emit_traces(result, names, output_dir):
    """Write one CSV per requested trace; returns the written paths."""
    out = Path(output_dir)
    fns = _trace_functions(result)
    exclude = []
    if result.stage1 is not None:
        exclude.append(result.stage1.omega_gamma)
    if result.stage2 is not None:
        exclude.append(result.stage2.omega_star)
    w = as_omegas(result.config.frequency_grid, result.config.delay_h, exclude=tuple(exclude))
    paths = []
    for name in names:
        if name not in fns:
            continue
        v = fns[name](1j * w)
        phase = np.unwrap(np.angle(v))
        path = out / f"{name}.csv"
        table = np.column_stack([w, v.real, v.imag, np.abs(v), phase])
        try:
            # numeric fields never need RFC-4180 quoting
            np.savetxt(path, table, fmt="%.17g", delimiter=",", header=",".join(CSV_HEADER),
                       comments="", newline="\r\n")
        except OSError as exc:
            raise OutputUnwritable(f"{path}: {exc}") from exc
        paths.append(path)
    return paths


# ---------------------------------------------------------------------------
# driver

def _parse_traces(text):
    if text is None:
        return list(TRACE_NAMES)
    names = [t.strip() for t in text.split(",") if t.strip()]
    bad = [t for t in names if t not in TRACE_NAMES]
    if bad:
        raise SpecValidationError("--traces", f"unknown trace(s) {bad}; choose from {list(TRACE_NAMES)}")
    return names


def run_pipeline(spec_path, output_dir, traces=None, skip_stage2=False, k_variant="consistent"):
    """Run the pipeline and write its outputs; returns the exit code."""
    try:
        names = _parse_traces(traces)
        cfg = load_spec(spec_path, skip_stage2=skip_stage2, k_variant=k_variant)
    except (SpecParseError, SpecValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    result = synthesize(cfg)
    out = Path(output_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(dumps_report(build_report(result)))
    except OSError as exc:
        print(f"error: {OutputUnwritable(str(exc))}", file=sys.stderr)
        return 1
    try:
        emit_traces(result, names, out)
    except OutputUnwritable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for err in result.errors:
        print(f"{err['module']}: {err['type']}: {err['message']}", file=sys.stderr)
    for name, c in result.certificates.items():
        if c.status == "fail":
            print(f"certificate {name} failed: {c.detail}", file=sys.stderr)
    return 0 if result.passed else 2


def build_parser():
    p = argparse.ArgumentParser(prog="hinfdelay", description="Stable H-infinity controllers for dead-time plants.")
    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("synth", help="run the synthesis pipeline on a JSON problem file")
    s.add_argument("spec", help="problem specification (JSON)")
    s.add_argument("--out", required=True, help="output directory")
    s.add_argument("--traces", default=None,
                   help="comma-separated trace names (default: all; empty string: none)")
    s.add_argument("--skip-stage2", action="store_true", help="stop after the envelope")
    s.add_argument("--k-variant", choices=("consistent", "literal"), default="consistent",
                   help="controller used for certification: -N_p^-1 N_c Qh (consistent) or -Qh")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    return run_pipeline(args.spec, args.out, args.traces, args.skip_stage2, args.k_variant)


if __name__ == "__main__":
    sys.exit(main())
