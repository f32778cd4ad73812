"""Command-line entry point.

Exit codes: 0 success, 2 configuration/usage error, 1 runtime failure.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import __version__, _accel, gates, harness
from .electrostatics import coupling_constants
from .serialization import load_geometries, load_traps, save_geometries, save_traps
from .geometry import Encoding

ENV_SEED = "QUADQUBIT_SEED"
ENV_OUT = "QUADQUBIT_OUT"

DEFAULT_PRESET = {
    "couplings": "fig2",
    "decay": "fig2",
    "decaytimes": "fig3",
    "sweep-density": "fig4",
    "perturb": "fig5",
    "gate": "fig6",
    "gate-sweep": "fig6",
}


class ConfigError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _floats(text):
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _common(p):
    p.add_argument("--seed", type=int, help="base seed (env %s)" % ENV_SEED)
    p.add_argument("--config", help="RunConfig JSON or a previous manifest.json")
    p.add_argument("--out", help="output directory (env %s)" % ENV_OUT)
    p.add_argument("--threads", type=int, default=1, help="worker threads; never changes results")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="tabular output format")
    p.add_argument("--preset", choices=sorted(harness.PRESETS))
    p.add_argument("--densities", type=_floats, help="comma-separated trap densities (m^-2)")
    p.add_argument("--trap-count", type=int)
    p.add_argument("--window", type=float, help="fixed sampling window side (m); used when --trap-count 0")
    p.add_argument("--rate", type=float, help="trap switching rate (Hz)")
    p.add_argument("--n-distributions", type=int)
    p.add_argument("--n-trajectories", type=int)
    p.add_argument("--n-perturbations", type=int)
    p.add_argument("--sigmas", type=_floats)
    p.add_argument("--p", type=float, help="coherence threshold for decay times")
    p.add_argument("--horizon", type=float)
    p.add_argument("--epsilon-r", type=float, dest="relative_permittivity")
    p.add_argument("--kappa", type=float, help="override the Coulomb coupling constant (rad/s m)")
    p.add_argument("--n", type=int, dest="gate_n")
    p.add_argument("--m", type=int, dest="gate_m")
    p.add_argument("--delta", type=float, help="leakage energy (rad/s)")
    p.add_argument("--coupling-targets", type=_floats, help="2QD k_eff values to sweep (rad/s)")
    p.add_argument("--geometry-file")
    p.add_argument("--traps-file")


def build_parser():
    parser = _Parser(prog="quadqubit", description="Quadrupole charge-qubit dephasing and gate studies")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name, text in (
        ("couplings", "per-trap couplings and k_eff for both encodings"),
        ("decay", "coherence decay traces (MC and analytic)"),
        ("decaytimes", "decay time against effective coupling"),
        ("sweep-density", "decoupling ratio against trap density"),
        ("perturb", "decoupling ratio against dot placement error"),
        ("gate-sweep", "gate error ratio against noise coupling"),
    ):
        _common(sub.add_parser(name, help=text))
    gate = sub.add_parser("gate", help="gate design and simulation")
    gate.add_argument("action", choices=("design", "simulate"))
    gate.add_argument("--kind", choices=[k.value for k in gates.GateKind], default="half_pi")
    _common(gate)
    return parser


_FIELDS = ("densities", "trap_count", "window", "rate", "n_distributions", "n_trajectories", "n_perturbations",
           "sigmas", "p", "horizon", "relative_permittivity", "kappa", "gate_n", "gate_m", "delta",
           "coupling_targets")


def resolve_config(args) -> harness.RunConfig:
    """Preset < config file < CLI flags; seed from flag, then env, then file/preset."""
    try:
        base = {}
        if args.config:
            with open(args.config) as fh:
                data = json.load(fh)
            base = harness.RunConfig.from_dict(data).to_dict()
        preset = args.preset or (None if base else DEFAULT_PRESET[args.command])
        merged = dict(harness.PRESETS[preset]) if preset else {}
        merged.update(base)
        for name in _FIELDS:
            value = getattr(args, name, None)
            if value is not None:
                merged[name] = value
        if merged.get("trap_count") == 0:
            merged["trap_count"] = None
        if args.seed is not None:
            merged["seed"] = args.seed
        elif os.environ.get(ENV_SEED):
            merged["seed"] = int(os.environ[ENV_SEED])
        merged["experiment"] = args.command
        return harness.RunConfig(**merged)
    except (OSError, ValueError, TypeError, json.JSONDecodeError) as exc:
        raise ConfigError(str(exc)) from exc


def _out_dir(args, required=True):
    out = args.out or os.environ.get(ENV_OUT)
    if out is None:
        if required:
            raise ConfigError("this command writes files: pass --out DIR or set %s" % ENV_OUT)
        return None
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def _write_table(out: Path, stem: str, rows, columns, fmt: str):
    if fmt == "csv":
        (out / f"{stem}.csv").write_text(harness.rows_to_csv(rows, columns))
    else:
        (out / f"{stem}.json").write_text(harness.to_json([{c: r[c] for c in columns} for r in rows]))


def _write_result(out: Path, stem: str, result: harness.StudyResult, fmt: str):
    if result.rows:
        _write_table(out, stem, result.rows, result.columns, fmt)
    for name, (rows, columns) in result.tables.items():
        _write_table(out, name, rows, columns, fmt)
    (out / f"{stem}_summary.json").write_text(harness.to_json(result.summary))


def _inputs(args, config):
    geoms = harness.geometries(config)
    if args.geometry_file:
        loaded = load_geometries(args.geometry_file)
        try:
            geoms = (loaded[Encoding.DIPOLE], loaded[Encoding.QUADRUPOLE])
        except KeyError as exc:
            raise ConfigError("geometry file must contain a dipole2qd and a quadrupole4qd geometry") from exc
    traps = load_traps(args.traps_file) if args.traps_file else None
    return geoms, traps


def _couplings(args, config, out):
    (g2, g4), traps = _inputs(args, config)
    if traps is None:
        traps = harness.sample_ensemble(config, config.densities[0],
                                        harness.derive_seed(config.seed, harness._TRAPS, 0, 0),
                                        harness._avoid((g2, g4)))
    const = config.constants
    summary = {}
    for tag, geom in (("2qd", g2), ("4qd", g4)):
        k = coupling_constants(traps, geom, const)
        rows = [{"trap_index": j, "x_nm": p[0] * 1e9, "y_nm": p[1] * 1e9, "z_nm": p[2] * 1e9,
                 "lambda_hz": r, "k_radps": kj} for j, (p, r, kj) in enumerate(zip(traps.positions, traps.rates, k))]
        _write_table(out, f"couplings_{tag}", rows, ["trap_index", "x_nm", "y_nm", "z_nm", "lambda_hz", "k_radps"],
                     args.format)
        summary[f"k_eff_{tag}"] = harness._keff(k)
    summary["ratio"] = harness._ratio(summary["k_eff_2qd"], summary["k_eff_4qd"])
    summary["kappa"] = const.kappa
    (out / "couplings_summary.json").write_text(harness.to_json(summary))
    save_geometries(out / "geometry.json", (g2, g4))
    save_traps(out / "traps.json", traps)


def _gate(args, config, out):
    if args.action == "design":
        design = gates.design_gate(config.gate_n, config.gate_m, args.kind)
        text = harness.to_json(design.to_dict())
        if out is None:
            sys.stdout.write(text)
        else:
            (out / "gate_design.json").write_text(text)
        return
    trace = harness.gate_population_trace(config)
    _write_table(out, "gate_populations", trace.rows, trace.columns, args.format)
    traps, quad, dip, k2, s4 = harness.gate_setup(config)
    native = harness._keff(k2)
    target = next((c for c in config.coupling_targets if c > 0), native)
    scale = target / native if native > 0 else 0.0
    f4 = gates.average_fidelity(quad, s4 * scale, traps.rates, config.n_trajectories, config.seed,
                                stream=harness._GATE)
    f2 = gates.average_fidelity(dip, dip.noise_diagonals(k2 * scale), traps.rates, config.n_trajectories,
                                config.seed, stream=harness._GATE)
    result = {"keff_2qd_radps": target, "design": quad.design.to_dict(), "gate_time_s": quad.duration,
              "quadrupole": f4.to_dict(), "dipole": f2.to_dict()}
    (out / "gate_fidelity.json").write_text(harness.to_json(result))


def run(args) -> None:
    config = resolve_config(args)
    needs_out = not (args.command == "gate" and args.action == "design")
    out = _out_dir(args, required=needs_out)
    start = time.perf_counter()
    cmd = args.command
    if cmd == "couplings":
        _couplings(args, config, out)
    elif cmd == "decay":
        geoms, traps = _inputs(args, config)
        _write_result(out, "decay", harness.run_decay_comparison(config, traps=traps, geoms=geoms,
                                                                 threads=args.threads), args.format)
    elif cmd == "decaytimes":
        _write_result(out, "decaytimes", harness.run_decaytime_study(config, threads=args.threads), args.format)
    elif cmd == "sweep-density":
        _write_result(out, "sweep", harness.run_density_sweep(config), args.format)
    elif cmd == "perturb":
        _write_result(out, "perturb", harness.run_perturbation_study(config), args.format)
    elif cmd == "gate-sweep":
        _, traps = _inputs(args, config)
        _write_result(out, "gate_sweep", harness.run_gate_error_study(config, traps=traps), args.format)
    elif cmd == "gate":
        _gate(args, config, out)
    if out is not None:
        manifest = {
            "command": cmd if cmd != "gate" else f"gate {args.action}",
            "config": config.to_dict(),
            "seed": config.seed,
            "version": __version__,
            "backend": _accel.backend_name(),
            "threads": args.threads,
            "wall_time_s": time.perf_counter() - start,
        }
        (out / "manifest.json").write_text(json.dumps(harness._jsonable(manifest), indent=2, sort_keys=True) + "\n")


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    try:
        run(args)
    except ConfigError as exc:
        print(f"quadqubit: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - reported as a runtime failure
        print(f"quadqubit: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
