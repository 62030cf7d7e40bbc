"""Command-line front end.

Subcommands: fidelity-curve, transport, feasibility, inject-nv, inject-pair,
detect, entangle.  Configuration is the sectioned key = value format
([parameters], [scenario], [output]); command-line flags mirror config keys
and win over them.  Every run that writes an output directory echoes its
fully resolved config there, and identical configs produce byte-identical
outputs.

Exit codes: 0 success / all budgets pass, 1 physics-constraint failure
(budget overrun, CFL violation, gate too slow), 2 malformed input.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import config as _config
from .errors import ConstraintError, InputError, SpinBusError
from .params import PARAMETER_UNITS, PhysicalParameters, load_parameters
from .photophysics import CrossSectionTable, injection_fidelity, load_bundled_table
from .protocol import (
    FidelityInputs,
    build_detection_pair,
    build_entanglement,
    build_injection_nv,
    build_injection_pair,
    validate,
)
from .transport import (
    SolverOptions,
    TransportDomain,
    drive_field,
    feasibility_region,
    format_density_snapshot,
    format_trajectory_csv,
    gaussian_state,
    injector_loaded_state,
    rectangular_pulse,
    solve_drift_diffusion,
)

OUTDIR_ENV = "SPINBUS_OUTDIR"

_SCENARIO_KEYS = {
    "geometry": str, "nx": int, "ny": int, "nz": int,
    "dx": float, "dy": float, "dz": float,
    "e_drive": float, "ex": float, "ey": float, "ez": float,
    "injector_x": float, "injector_y": float, "injector_z": float,
    "capturer_x": float, "capturer_y": float, "capturer_z": float,
    "initial": str, "gaussian_center_x": float, "gaussian_center_y": float,
    "gaussian_center_z": float, "gaussian_width": float,
    "k_injection_rate": float, "k_injection_duration": float,
    "k_capture": float, "t_end": float, "dt": float,
    "snapshot_times": str, "coulomb": bool, "capture": bool,
    "record_stride": int,
}
_OUTPUT_KEYS = {"directory": str}


def _parse_section(sections, name, schema) -> dict:
    raw = sections.get(name, {})
    unknown = set(raw) - set(schema)
    if unknown:
        raise InputError(f"unknown keys in [{name}]: {sorted(unknown)}")
    out = {}
    for key, value in raw.items():
        kind = schema[key]
        if kind is float:
            out[key] = _config.parse_float(name, key, value)
        elif kind is int:
            out[key] = _config.parse_int(name, key, value)
        elif kind is bool:
            out[key] = _config.parse_bool(name, key, value)
        else:
            out[key] = value
    return out


def load_run_config(path: str) -> dict:
    """Read a run config file into {'parameters': ..., 'scenario': ..., 'output': ...}."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read config {path}: {exc}") from None
    sections = _config.parse_config_text(text)
    extra = set(sections) - {"parameters", "scenario", "output", ""}
    if extra:
        raise InputError(f"unknown config sections: {sorted(extra)}")
    if sections.get(""):
        raise InputError("top-level keys must live in a [section]")
    return {
        "parameters": {k: _config.parse_float("parameters", k, v)
                       for k, v in sections.get("parameters", {}).items()},
        "scenario": _parse_section(sections, "scenario", _SCENARIO_KEYS),
        "output": _parse_section(sections, "output", _OUTPUT_KEYS),
    }


def resolve_out_dir(flag_value, cfg_output: dict) -> str:
    """Flag wins, then the environment override, then the config, then cwd."""
    if flag_value:
        return flag_value
    env = os.environ.get(OUTDIR_ENV)
    if env:
        return env
    return cfg_output.get("directory", ".")


def _write(path: str, text: str) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _echo_config(out_dir: str, parameters: PhysicalParameters, scenario: dict,
                 output: dict) -> None:
    sections = {
        "parameters": {k: getattr(parameters, k) for k in PARAMETER_UNITS},
        "scenario": scenario,
        "output": output,
    }
    _write(os.path.join(out_dir, "resolved.cfg"), _config.format_config(sections))


# ---------------------------------------------------------------------------
# fidelity-curve

def _load_table(path_or_none, bundled_name) -> CrossSectionTable:
    if path_or_none is None:
        return load_bundled_table(bundled_name)
    return CrossSectionTable.from_file(path_or_none)


def cmd_fidelity_curve(args) -> int:
    table_ion = _load_table(args.ion_table, "nv_ionization")
    table_opt = _load_table(args.opt_table, "nv_absorption")
    lo = max(table_ion.wavelength_range[0], table_opt.wavelength_range[0])
    hi = min(table_ion.wavelength_range[1], table_opt.wavelength_range[1])
    if args.lambda_min is not None or args.lambda_max is not None or args.step is not None:
        lam_lo = args.lambda_min if args.lambda_min is not None else lo
        lam_hi = args.lambda_max if args.lambda_max is not None else hi
        step = args.step if args.step is not None else 5.0
        if step <= 0 or lam_hi < lam_lo:
            raise InputError("wavelength range must be increasing with step > 0")
        n = int(round((lam_hi - lam_lo) / step))
        wavelengths = [lam_lo + k * step for k in range(n + 1)]
    else:
        wavelengths = [w for w in table_ion.wavelengths_nm if lo <= w <= hi]
    lines = ["lambda_nm,sigma_ion,sigma_opt,fidelity"]
    for lam in wavelengths:
        f = injection_fidelity(table_ion, table_opt, lam)
        lines.append(f"{float(lam)!r},{table_ion.interpolate(lam)!r},"
                     f"{table_opt.interpolate(lam)!r},{f!r}")
    csv_text = "\n".join(lines) + "\n"
    if args.out and args.out != "-":
        _write(args.out, csv_text)
    else:
        sys.stdout.write(csv_text)
    return 0


# ---------------------------------------------------------------------------
# transport

def _build_domain(scn: dict) -> TransportDomain:
    for key in ("geometry", "nx", "ny", "nz", "dx", "dy", "dz", "t_end"):
        if key not in scn:
            raise InputError(f"[scenario] missing required key {key!r}")
    if "e_drive" in scn and any(k in scn for k in ("ex", "ey", "ez")):
        raise InputError("[scenario] give e_drive or an explicit ex/ey/ez vector, not both")
    if "e_drive" in scn:
        e_applied = drive_field(scn["e_drive"])
    else:
        e_applied = (scn.get("ex", 0.0), scn.get("ey", 0.0), scn.get("ez", 0.0))
    injector = capturer = None
    if any(k in scn for k in ("injector_x", "injector_y", "injector_z")):
        injector = (scn["injector_x"], scn["injector_y"], scn["injector_z"])
    if any(k in scn for k in ("capturer_x", "capturer_y", "capturer_z")):
        capturer = (scn["capturer_x"], scn["capturer_y"], scn["capturer_z"])
    return TransportDomain(
        geometry=scn["geometry"],
        shape=(scn["nx"], scn["ny"], scn["nz"]),
        spacing=(scn["dx"], scn["dy"], scn["dz"]),
        e_applied=e_applied,
        r_injector=injector,
        r_capturer=capturer,
    )


def cmd_transport(args) -> int:
    if not args.config:
        raise InputError("transport requires --config")
    cfg = load_run_config(args.config)
    parameters = load_parameters(cfg["parameters"])
    scn = dict(cfg["scenario"])
    domain = _build_domain(scn)

    initial_kind = scn.get("initial", "injector" if domain.r_injector else "gaussian")
    if initial_kind == "injector":
        state0 = injector_loaded_state(domain)
    elif initial_kind == "gaussian":
        center = (scn.get("gaussian_center_x", domain.extents[0] / 2),
                  scn.get("gaussian_center_y", domain.extents[1] / 2),
                  scn.get("gaussian_center_z", domain.extents[2] / 2))
        width = scn.get("gaussian_width", min(domain.extents) / 10)
        state0 = gaussian_state(domain, center, width)
    else:
        raise InputError(f"[scenario] initial must be 'injector' or 'gaussian', got {initial_kind!r}")

    k_injection = None
    if "k_injection_rate" in scn:
        rate = scn["k_injection_rate"]
        k_injection = (rectangular_pulse(rate, scn["k_injection_duration"])
                       if "k_injection_duration" in scn else rate)
    snapshot_times = []
    if scn.get("snapshot_times"):
        try:
            snapshot_times = [float(tok) for tok in scn["snapshot_times"].split(",") if tok.strip()]
        except ValueError:
            raise InputError("[scenario] snapshot_times must be comma-separated numbers") from None

    options = SolverOptions(
        include_coulomb=scn.get("coulomb", True),
        include_capture=scn.get("capture", True),
        dt=scn.get("dt"),
    )
    result = solve_drift_diffusion(
        domain, parameters, k_injection, scn.get("k_capture"), scn["t_end"],
        state0=state0, options=options, snapshot_times=snapshot_times,
        record_stride=scn.get("record_stride"),
    )

    out_dir = resolve_out_dir(args.out_dir, cfg["output"])
    _echo_config(out_dir, parameters, scn, {"directory": out_dir})
    _write(os.path.join(out_dir, "trajectory.csv"), format_trajectory_csv(result.trajectory))
    for idx, state in enumerate(result.states):
        _write(os.path.join(out_dir, f"snapshot_{idx:03d}.txt"),
               format_density_snapshot(state, domain))
    sys.stdout.write(
        f"steps {result.n_steps} dt {float(result.dt)!r} ns "
        f"conservation_drift {float(result.conservation_max_drift)!r}\n")
    return 0


# ---------------------------------------------------------------------------
# feasibility

def cmd_feasibility(args) -> int:
    if args.l_min <= 0 or args.e_min <= 0 or args.l_max <= args.l_min or args.e_max <= args.e_min:
        raise InputError("feasibility ranges must be positive and increasing")
    if args.rho_min < 0:
        raise InputError("rho-min must be >= 0")
    parameters = load_parameters(load_run_config(args.config)["parameters"]) if args.config \
        else PhysicalParameters()
    fmap = feasibility_region((args.l_min, args.l_max), (args.e_min, args.e_max),
                              rho_min=args.rho_min, n_side=args.n_side, n_e=args.n_e,
                              params=parameters)
    map_lines = ["side_um,e_field_v_per_um,density_um3"]
    for i, side in enumerate(fmap.sides):
        for j, e in enumerate(fmap.e_fields):
            map_lines.append(f"{float(side)!r},{float(e)!r},{float(fmap.density[i, j])!r}")
    boundary_lines = ["side_um,e_lower_v_per_um,e_upper_v_per_um"]
    for side, e_lo, e_hi in fmap.boundary:
        boundary_lines.append(f"{side!r},{e_lo!r},{e_hi!r}")
    out_dir = resolve_out_dir(args.out_dir, {})
    _write(os.path.join(out_dir, "feasibility_map.csv"), "\n".join(map_lines) + "\n")
    _write(os.path.join(out_dir, "boundary.csv"), "\n".join(boundary_lines) + "\n")
    _echo_args(out_dir, "feasibility", {
        "l_min": args.l_min, "l_max": args.l_max, "e_min": args.e_min,
        "e_max": args.e_max, "rho_min": args.rho_min,
        "n_side": args.n_side, "n_e": args.n_e})
    sys.stdout.write("\n".join(boundary_lines) + "\n")
    return 0


# ---------------------------------------------------------------------------
# protocol commands

def _echo_args(out_dir: str, section: str, values: dict) -> None:
    _write(os.path.join(out_dir, "resolved.cfg"),
           _config.format_config({section: values}))


def _fidelity_inputs(args) -> FidelityInputs:
    kwargs = {}
    if args.injection_fidelity is not None:
        kwargs["injection_fidelity"] = args.injection_fidelity
    if args.t2_ns is not None:
        kwargs["t2_transport_ns"] = args.t2_ns
    if args.flip_rate_mhz is not None:
        kwargs["nuclear_flip_rate_mhz"] = args.flip_rate_mhz
    if args.capture_gamma is not None:
        kwargs["capture_gamma_per_ns"] = args.capture_gamma
    return FidelityInputs(**kwargs)


def _emit_protocol(timeline, report, args, extra: str = "") -> int:
    text = extra + report.to_text()
    sys.stdout.write(text)
    if args.out_dir:
        _write(os.path.join(args.out_dir, f"{timeline.name}_timeline.csv"), timeline.to_csv())
        _write(os.path.join(args.out_dir, f"{timeline.name}_timeline.txt"), timeline.to_text())
        _write(os.path.join(args.out_dir, f"{timeline.name}_report.txt"), text)
        flags = {k: v for k, v in vars(args).items()
                 if k not in ("func", "command", "out_dir") and v is not None}
        _echo_args(args.out_dir, timeline.name, flags)
    return 0 if report.passed else 1


def cmd_inject_nv(args) -> int:
    norm = (args.alpha**2 + args.beta**2) ** 0.5
    if norm == 0:
        raise InputError("alpha and beta cannot both be zero")
    timeline = build_injection_nv(args.alpha / norm, args.beta / norm,
                                  blue_ns=args.blue_ns, green_ns=args.green_ns,
                                  microwave_ns=args.mw_ns, n_microwave=args.n_mw)
    report = validate(timeline, _fidelity_inputs(args))
    verdict = "coherent" if timeline.meta["coherent_injection"] else "incoherent"
    return _emit_protocol(timeline, report, args,
                          extra=f"injection coherence verdict: {verdict}\n")


def cmd_inject_pair(args) -> int:
    timeline = build_injection_pair(coupling_mhz=args.coupling_mhz,
                                    min_coupling_mhz=args.min_coupling_mhz,
                                    projective_reinit=args.projective,
                                    red_recharge_ns=args.red_ns,
                                    ionize_ns=args.ionize_ns)
    report = validate(timeline, _fidelity_inputs(args))
    return _emit_protocol(timeline, report, args)


def cmd_detect(args) -> int:
    timeline = build_detection_pair(args.transport_ns, args.capture_ns,
                                    coupling_mhz=args.coupling_mhz)
    report = validate(timeline, _fidelity_inputs(args))
    return _emit_protocol(timeline, report, args)


def cmd_entangle(args) -> int:
    timeline = build_entanglement(args.coupling_nv_ns, args.coupling_nv_logic,
                                  args.transport_ns, args.capture_ns,
                                  gate_ns=args.gate_ns)
    report = validate(timeline, _fidelity_inputs(args))
    return _emit_protocol(timeline, report, args)


# ---------------------------------------------------------------------------

def _add_fidelity_flags(sub):
    sub.add_argument("--injection-fidelity", type=float, default=None)
    sub.add_argument("--t2-ns", type=float, default=None)
    sub.add_argument("--flip-rate-mhz", type=float, default=None)
    sub.add_argument("--capture-gamma", type=float, default=None,
                     help="capture rate during the capture window, 1/ns")
    sub.add_argument("--out-dir", default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spinbus",
        description="Defect spin bus simulation toolkit: injection fidelity, "
                    "drift-diffusion transport, capture feasibility, protocol budgets.")
    from . import __version__
    parser.add_argument("--version", action="version", version=f"spinbus {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    p = subs.add_parser("fidelity-curve", help="injection fidelity vs wavelength CSV")
    p.add_argument("--ion-table", default=None, help="ionization cross-section table file")
    p.add_argument("--opt-table", default=None, help="optical-absorption cross-section table file")
    p.add_argument("--lambda-min", type=float, default=None)
    p.add_argument("--lambda-max", type=float, default=None)
    p.add_argument("--step", type=float, default=None)
    p.add_argument("--out", default="-", help="output CSV path, '-' for stdout")
    p.set_defaults(func=cmd_fidelity_curve)

    p = subs.add_parser("transport", help="run the drift-diffusion solver from a config")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_transport)

    p = subs.add_parser("feasibility", help="capture feasibility map over (wire size, field)")
    p.add_argument("--l-min", type=float, default=0.05)
    p.add_argument("--l-max", type=float, default=0.5)
    p.add_argument("--e-min", type=float, default=0.005)
    p.add_argument("--e-max", type=float, default=1.0)
    p.add_argument("--rho-min", type=float, default=50.0)
    p.add_argument("--n-side", type=int, default=46)
    p.add_argument("--n-e", type=int, default=64)
    p.add_argument("--config", default=None)
    p.add_argument("--out-dir", default=None)
    p.set_defaults(func=cmd_feasibility)

    p = subs.add_parser("inject-nv", help="NV-center injection timeline and budget report")
    p.add_argument("--alpha", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--blue-ns", type=float, default=1.0)
    p.add_argument("--green-ns", type=float, default=500.0)
    p.add_argument("--mw-ns", type=float, default=10.0)
    p.add_argument("--n-mw", type=int, default=2)
    _add_fidelity_flags(p)
    p.set_defaults(func=cmd_inject_nv)

    p = subs.add_parser("inject-pair", help="NV/donor-pair injection timeline and budget report")
    p.add_argument("--coupling-mhz", type=float, default=10.0)
    p.add_argument("--min-coupling-mhz", type=float, default=10.0)
    p.add_argument("--projective", action="store_true",
                   help="projective NV re-initialization (no recharge pulse)")
    p.add_argument("--red-ns", type=float, default=200.0)
    p.add_argument("--ionize-ns", type=float, default=1.0)
    _add_fidelity_flags(p)
    p.set_defaults(func=cmd_inject_pair)

    p = subs.add_parser("detect", help="detection timeline and budget report")
    p.add_argument("--transport-ns", type=float, default=80.0)
    p.add_argument("--capture-ns", type=float, default=100.0)
    p.add_argument("--coupling-mhz", type=float, default=10.0)
    _add_fidelity_flags(p)
    p.set_defaults(func=cmd_detect)

    p = subs.add_parser("entangle", help="entanglement timeline and budget report")
    p.add_argument("--coupling-nv-ns", type=float, default=10.0)
    p.add_argument("--coupling-nv-logic", type=float, default=10.0)
    p.add_argument("--transport-ns", type=float, default=80.0)
    p.add_argument("--capture-ns", type=float, default=100.0)
    p.add_argument("--gate-ns", type=float, default=None,
                   help="force the entanglement-gate duration")
    _add_fidelity_flags(p)
    p.set_defaults(func=cmd_entangle)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ConstraintError as exc:
        print(f"constraint failed: {exc}", file=sys.stderr)
        return 1
    except SpinBusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
