"""Command-line front end.

Commands: spectrum, window, vg, validate, evolve, params.
Exit statuses: 0 success, 2 configuration error, 3 solver error,
4 validation failure.  Output files are written atomically (temp + rename)
into --out; every command also writes a `<command>_summary.json` that echoes
the fully resolved configuration, so any run can be reproduced from its
summary alone.
"""

import argparse
import copy
import json
import math
import os
import sys
import time

import numpy as np

from . import bloch, optics, validation
from .config import ResolvedRun, apply_overrides, load_document, resolve
from .errors import (ConfigError, ConventionError, DivergentVelocityError,
                     IntegrationError, InvalidArgumentError,
                     SingularParametersError, StateCorruptionError,
                     SteadyStateError)
from .lambda_system import (LambdaParams, chi_analytic, dchi_prime_ddelta,
                            lambda_from_material)
from .materials import N_LEVELS
from .optics import GridSpec
from .states import coherence

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_VALIDATION = 4

_CONFIG_ERRORS = (ConfigError, InvalidArgumentError)
_SOLVER_ERRORS = (SteadyStateError, IntegrationError, SingularParametersError,
                  DivergentVelocityError, ConventionError, ZeroDivisionError)
_VALIDATION_ERRORS = (StateCorruptionError,)

# cmd_window refines the grid automatically (the default spectrum grid is far
# too coarse to interpolate a ~1e6 rad/s window); the span covers twice the
# expected width on each side so the half-absorption crossings are interior.
WINDOW_GRID_POINTS = 4001
WINDOW_GRID_SPAN_WIDTHS = 2.0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH",
                        help="JSON configuration file")
    common.add_argument("--set", dest="sets", action="append", default=[],
                        metavar="PATH=VALUE",
                        help="override one config key (repeatable, "
                             "last writer wins)")
    common.add_argument("--out", default=".", metavar="DIR",
                        help="output directory (default: current)")
    common.add_argument("--backend", choices=("analytic", "full"),
                        help="shortcut for --set backend=...")
    common.add_argument("--jobs", type=int, metavar="N",
                        help="shortcut for --set jobs_count=N")

    parser = argparse.ArgumentParser(
        prog="eitsim",
        description="Probe-susceptibility simulator for a six-level "
                    "rare-earth-doped crystal with probe, coupling and "
                    "auxiliary drives.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common],
                   help="sweep probe detuning, write chi/n/alpha CSV")
    sub.add_parser("window", parents=[common],
                   help="measure the half-absorption transparency window")
    sub.add_parser("vg", parents=[common],
                   help="group velocity at the configured probe detuning")
    sub.add_parser("validate", parents=[common],
                   help="compare the full model against the three-level "
                        "closed form")
    sub.add_parser("evolve", parents=[common],
                   help="integrate the master equation in time, write "
                        "population CSV")
    sub.add_parser("params", parents=[common],
                   help="print the resolved material and decay rates")
    return parser


def _resolved_run(args) -> ResolvedRun:
    doc = load_document(args.config) if args.config else {}
    sets = list(args.sets)
    if args.backend is not None:
        sets.append(f"backend={args.backend}")
    if args.jobs is not None:
        sets.append(f"jobs_count={args.jobs}")
    return resolve(apply_overrides(doc, sets))


def _jsonable(value):
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (bool, str)) or value is None:
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        v = float(value)
        return v if math.isfinite(v) else None
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    return value


def _write_atomic(path: str, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_summary(out_dir: str, command: str, canonical: dict,
                   headline: dict, files, started: float) -> str:
    summary = {
        "command": command,
        "resolved_config": _jsonable(canonical),
        "headline": _jsonable(headline),
        "output_files": list(files),
        "duration_s": time.perf_counter() - started,
    }
    path = os.path.join(out_dir, f"{command}_summary.json")
    _write_atomic(path, json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return path


def cmd_spectrum(args, run: ResolvedRun) -> int:
    started = time.perf_counter()
    spec = optics.sweep(run.backend, run.material, run.drives, run.grid,
                        jobs=run.jobs)
    csv_path = os.path.join(args.out, "spectrum.csv")
    _write_atomic(csv_path, optics.spectrum_to_csv(spec))

    peak = int(np.argmax(spec.alpha))
    covers_zero = spec.deltas[0] <= 0.0 <= spec.deltas[-1]
    alpha_zero = (float(np.interp(0.0, spec.deltas, spec.alpha))
                  if covers_zero else None)
    headline = {
        "points": int(spec.deltas.size),
        "peak_alpha_per_m": float(spec.alpha[peak]),
        "peak_delta_rad_s": float(spec.deltas[peak]),
        "alpha_at_zero_per_m": alpha_zero,
        "backend": spec.backend,
    }
    summary_path = _write_summary(args.out, "spectrum", run.canonical,
                                  headline, ["spectrum.csv"], started)
    print(f"spectrum: {spec.backend} backend, {spec.deltas.size} points in "
          f"[{spec.deltas[0]:g}, {spec.deltas[-1]:g}] rad/s")
    print(f"  peak alpha = {spec.alpha[peak]:.6g} 1/m at "
          f"delta = {spec.deltas[peak]:.6g} rad/s")
    if alpha_zero is not None:
        print(f"  alpha(0) = {alpha_zero:.6g} 1/m")
    print(f"  wrote {csv_path} and {summary_path}")
    return EXIT_OK


def cmd_window(args, run: ResolvedRun) -> int:
    started = time.perf_counter()
    mat = run.material
    lam = lambda_from_material(mat, run.drives.coupling_rabi)
    # Reference: resonant absorption with the coupling switched off.
    reference = optics.absorption(
        chi_analytic(LambdaParams(lam.gamma52, lam.gamma32, 0.0,
                                  lam.coupling_a), 0.0),
        mat.probe_wavelength,
    )

    width_estimate = optics.window_width_closed_form(
        lam.gamma52, run.drives.coupling_rabi)
    grid = run.grid
    if not any(p.startswith("grid.") for p in run.user_set) \
            and width_estimate > 0.0:
        span = WINDOW_GRID_SPAN_WIDTHS * width_estimate
        grid = GridSpec(-span, span, WINDOW_GRID_POINTS)

    spec = optics.sweep(run.backend, mat, run.drives, grid, jobs=run.jobs)
    report = optics.transparency_window(spec, reference)

    canonical = copy.deepcopy(run.canonical)
    canonical["grid"] = {
        "delta_min_rad_s": float(grid.delta_min),
        "delta_max_rad_s": float(grid.delta_max),
        "points_count": int(grid.points),
    }
    headline = {
        "has_window": report.has_window,
        "truncated": report.truncated,
        "width_rad_s": report.width,
        "width_hz": report.width_hz,
        "edges_rad_s": list(report.edges),
        "reference_alpha_per_m": report.reference_alpha,
        "threshold_alpha_per_m": report.threshold_alpha,
        "closed_form_width_rad_s": width_estimate,
        "backend": spec.backend,
    }
    summary_path = _write_summary(args.out, "window", canonical, headline,
                                  [], started)
    if report.has_window:
        print(f"window: width = {report.width:.6g} rad/s "
              f"({report.width_hz:.6g} Hz)")
        print(f"  edges = [{report.edges[0]:.6g}, {report.edges[1]:.6g}] "
              f"rad/s, threshold alpha = {report.threshold_alpha:.6g} 1/m")
        if report.truncated:
            print("  warning: window truncated by the grid; widen the grid "
                  "for a converged width")
    else:
        print("window: no transparency window (resonant absorption is above "
              "half the reference)")
    print(f"  wrote {summary_path}")
    return EXIT_OK


def cmd_vg(args, run: ResolvedRun) -> int:
    started = time.perf_counter()
    mat = run.material
    delta0 = run.drives.probe_detuning
    omega0 = optics.probe_angular_frequency(mat)
    lam = lambda_from_material(mat, run.drives.coupling_rabi)
    if run.backend == optics.BACKEND_ANALYTIC:
        chi_of_delta = lambda d: chi_analytic(lam, d)
    else:
        chi_of_delta = lambda d: optics.full_model_chi(mat, run.drives, d)
    sampler = optics.make_index_sampler(chi_of_delta, omega0, delta0)

    vg = optics.group_velocity(sampler, omega0, run.vg_fd_step)
    group_index = optics.C_LIGHT / vg
    anomalous = group_index < 1.0

    headline = {
        "vg_m_s": vg,
        "group_index": group_index,
        "omega_rad_s": omega0,
        "delta_rad_s": delta0,
        "fd_step_rad_s": run.vg_fd_step,
        "anomalous_dispersion": anomalous,
        "backend": run.backend,
    }
    if run.backend == optics.BACKEND_ANALYTIC:
        # Exact slope: dn/domega = -0.5 * dchi'/ddelta under the delta(omega)
        # sign map.
        ng_exact = (optics.refractive_index(chi_analytic(lam, delta0))
                    - omega0 * 0.5 * dchi_prime_ddelta(lam, delta0))
        headline["group_index_closed_form"] = ng_exact
        if abs(ng_exact) >= optics.GROUP_INDEX_MIN:
            vg_exact = optics.C_LIGHT / ng_exact
            headline["vg_closed_form_m_s"] = vg_exact
            headline["fd_vs_closed_form_rel"] = abs(vg - vg_exact) / abs(vg_exact)

    summary_path = _write_summary(args.out, "vg", run.canonical, headline,
                                  [], started)
    print(f"vg: {vg:.6g} m/s (group index {group_index:.6g}) at "
          f"delta = {delta0:g} rad/s [{run.backend} backend]")
    if anomalous:
        print("  warning: anomalous dispersion (group index < 1); the "
              "envelope velocity is not a propagation speed here")
    print(f"  wrote {summary_path}")
    return EXIT_OK


def cmd_validate(args, run: ResolvedRun) -> int:
    started = time.perf_counter()
    report = validation.validate_reduction(
        run.material,
        run.drives.coupling_rabi,
        run.drives.probe_rabi,
        run.grid.values(),
        omega_a=run.drives.aux_rabi,
        analytic_gamma52_factor=run.validate_fault_factor,
    )
    passed = report.max_rel_dev_chi_im < run.validate_max_dev
    headline = dict(report.as_dict())
    headline["threshold_rel"] = run.validate_max_dev
    headline["passed"] = passed
    summary_path = _write_summary(args.out, "validate", run.canonical,
                                  headline, [], started)
    print(f"validate: max chi_im deviation = {report.max_rel_dev_chi_im:.4%} "
          f"over {report.n_compared}/{report.n_grid} points "
          f"(threshold {run.validate_max_dev:.4%})")
    print(f"  worst at delta = {report.worst_delta_rad_s:.6g} rad/s; "
          f"chi_re deviation = {report.max_rel_dev_chi_re:.4%}")
    print(f"  wrote {summary_path}")
    if not passed:
        print("validation failure: full model deviates from the three-level "
              "closed form beyond the threshold", file=sys.stderr)
        return EXIT_VALIDATION
    return EXIT_OK


def cmd_evolve(args, run: ResolvedRun) -> int:
    started = time.perf_counter()
    drives = run.drives.field_drives(run.drives.probe_detuning)
    ham = bloch.build_hamiltonian(N_LEVELS, drives)
    lv = bloch.build_liouvillian(ham, run.material.levels, run.material.gamma)
    traj = bloch.evolve(run.initial_state(), lv, run.evolve_t_end,
                        run.solver_tol, n_samples=run.evolve_samples,
                        max_steps=run.solver_max_steps)

    header = "t_s," + ",".join(f"rho{i}{i}" for i in range(1, N_LEVELS + 1)) \
        + ",abs_rho52"
    lines = [header]
    for t, state in zip(traj.times, traj.states):
        cells = [repr(float(t))]
        cells += [repr(float(p)) for p in state.populations()]
        cells.append(repr(abs(coherence(state, 5, 2))))
        lines.append(",".join(cells))
    csv_path = os.path.join(args.out, "evolve.csv")
    _write_atomic(csv_path, "\n".join(lines) + "\n")

    final = traj.final
    headline = {
        "t_end_s": run.evolve_t_end,
        "samples": len(traj.states),
        "populations_final": final.populations(),
        "rho22_final": final.population(2),
        "max_trace_dev": traj.max_trace_dev,
        "max_herm_dev": traj.max_herm_dev,
        "n_steps": traj.n_steps,
        "kernels": traj.kernels_used,
    }
    summary_path = _write_summary(args.out, "evolve", run.canonical, headline,
                                  ["evolve.csv"], started)
    pops = ", ".join(f"{p:.6g}" for p in final.populations())
    print(f"evolve: {traj.n_steps} steps to t = {run.evolve_t_end:g} s "
          f"[{traj.kernels_used} kernels]")
    print(f"  final populations = [{pops}]")
    print(f"  max trace drift = {traj.max_trace_dev:.3e}, "
          f"max hermiticity drift = {traj.max_herm_dev:.3e}")
    print(f"  wrote {csv_path} and {summary_path}")
    return EXIT_OK


def _gamma_note(mat, upper: int, lower: int) -> str:
    inv_u = 1.0 / mat.levels.lifetimes[upper - 1]
    inv_l = 1.0 / mat.levels.lifetimes[lower - 1]
    deph = mat.levels.dephasing[upper - 1, lower - 1]
    if mat.rate_convention == "cyclic":
        return (f"pi * (1/T1({upper}) + 1/T1({lower}) + dephasing) "
                f"= pi * ({inv_u:g} + {inv_l:g} + {deph:g} Hz), "
                "lifetime inverses read as cyclic rates")
    return (f"0.5 * (1/T1({upper}) + 1/T1({lower}) + 2*pi*dephasing) "
            f"= 0.5 * ({inv_u:g} + {inv_l:g} + 2*pi*{deph:g} Hz), "
            "lifetime inverses read as angular rates")


def cmd_params(args, run: ResolvedRun) -> int:
    started = time.perf_counter()
    mat = run.material
    dump = {
        "rate_convention": mat.rate_convention,
        "n_levels": N_LEVELS,
        "lifetimes_s": mat.levels.lifetimes,
        "branching_per_s": mat.levels.branching,
        "dephasing_hz": mat.levels.dephasing,
        "gamma_rad_s": mat.gamma,
        "number_density_per_m3": mat.number_density,
        "probe_dipole_c_m": mat.probe_dipole,
        "probe_wavelength_m": mat.probe_wavelength,
        "coupling_strength_rad_s": mat.coupling_strength,
        "notes": {
            "gamma_32": _gamma_note(mat, 3, 2),
            "gamma_52": _gamma_note(mat, 5, 2),
            "gamma_53": _gamma_note(mat, 5, 3),
            "branching": "each level's total decay 1/T1 splits equally over "
                         "all lower levels unless overridden per pair",
            "coupling_strength": "number_density * probe_dipole^2 / "
                                 "(epsilon_0 * hbar)",
        },
    }
    params_path = os.path.join(args.out, "params.json")
    _write_atomic(params_path,
                  json.dumps(_jsonable(dump), indent=2, sort_keys=True) + "\n")
    headline = {
        "gamma_32_rad_s": float(mat.gamma[2, 1]),
        "gamma_52_rad_s": float(mat.gamma[4, 1]),
        "gamma_53_rad_s": float(mat.gamma[4, 2]),
        "coupling_strength_rad_s": float(mat.coupling_strength),
        "rate_convention": mat.rate_convention,
    }
    summary_path = _write_summary(args.out, "params", run.canonical, headline,
                                  ["params.json"], started)
    print(f"params: rate_convention = {mat.rate_convention}")
    print(f"  gamma_32 = {mat.gamma[2, 1]:.6g} rad/s   "
          f"[{dump['notes']['gamma_32']}]")
    print(f"  gamma_52 = {mat.gamma[4, 1]:.6g} rad/s   "
          f"[{dump['notes']['gamma_52']}]")
    print(f"  gamma_53 = {mat.gamma[4, 2]:.6g} rad/s")
    print(f"  coupling strength = {mat.coupling_strength:.6g} rad/s, "
          f"wavelength = {mat.probe_wavelength:g} m")
    print(f"  wrote {params_path} and {summary_path}")
    return EXIT_OK


_HANDLERS = {
    "spectrum": cmd_spectrum,
    "window": cmd_window,
    "vg": cmd_vg,
    "validate": cmd_validate,
    "evolve": cmd_evolve,
    "params": cmd_params,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        os.makedirs(args.out, exist_ok=True)
        run = _resolved_run(args)
        return _HANDLERS[args.command](args, run)
    except _CONFIG_ERRORS as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except _SOLVER_ERRORS as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except _VALIDATION_ERRORS as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    raise SystemExit(main())
