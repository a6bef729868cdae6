"""Command-line front end: ``qkls {solve,bench,overlap-study,complexity}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import __version__
from .bench import (
    ExperimentConfig,
    build_instances,
    compare_ordering,
    complexity_report,
    format_complexity,
    linear_fit,
    overlap_to_csv,
    records_to_csv,
    resolve_constants,
    run_compare,
    run_fourier,
    run_metadata,
    run_overlap_study,
    run_qkls,
    write_outputs,
)
from .exceptions import QKLSError
from .hamiltonian import PauliSum, build_ising, calibrate_kappa, spectral_info
from .krylov import Source, assemble, solve
from .lcu import apply_lcu_circuit, apply_lcu_direct, error_metric, plan_lcu
from .statevector import EvolutionBackend, exact_solution, prepare_b

# flag name -> (config field, type, nargs)
_CONFIG_FLAGS = {
    "--n": ("n", int, None),
    "--J": ("J", float, None),
    "--kappas": ("target_kappas", float, "+"),
    "--tau": ("tau", float, None),
    "--M-grid": ("M_grid", int, "+"),
    "--t-fd-grid": ("t_fd_grid", float, "+"),
    "--overlap-tau": ("overlap_tau", float, None),
    "--overlap-k-max": ("overlap_k_max", int, None),
    "--source": ("source", str, None),
    "--t-fd": ("t_fd", float, None),
    "--shots": ("shots", int, None),
    "--seed": ("seed", int, None),
    "--epsilons": ("epsilon_targets", float, "+"),
    "--svd-threshold": ("svd_threshold", float, None),
    "--reconstruction": ("reconstruction", str, None),
    "--evolution": ("evolution", str, None),
    "--trotter-steps": ("trotter_steps", int, None),
    "--workers": ("workers", int, None),
    "--output": ("output_path", str, None),
}


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file; explicit flags override its values")
    for flag, (dest, typ, nargs) in _CONFIG_FLAGS.items():
        p.add_argument(flag, dest=dest, type=typ, nargs=nargs, default=None)


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {dest: getattr(args, dest) for dest, _, _ in _CONFIG_FLAGS.values()}
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config:
        cfg = ExperimentConfig.from_file(args.config, **overrides)
    else:
        cfg = ExperimentConfig.from_dict(overrides)
    return cfg.validate()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qkls", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve one instance and print a JSON summary")
    p.add_argument("--hamiltonian", help="PauliSum JSON file (default: calibrated Ising chain)")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--J", type=float, default=0.1)
    p.add_argument("--kappa", type=float, default=27.6)
    p.add_argument("--tau", type=float, default=1e-3)
    p.add_argument("--M", type=int, default=8)
    p.add_argument("--source", default="exact", choices=["exact", "finite-difference"])
    p.add_argument("--t-fd", type=float, default=0.01)
    p.add_argument("--shots", type=int, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--svd-threshold", type=float, default=None)
    p.add_argument("--reconstruction", default="direct", choices=["direct", "circuit"])
    p.add_argument("--coefficients", action="store_true", help="include c in the output")

    bench = sub.add_parser("bench", help="benchmark sweeps")
    bench_sub = bench.add_subparsers(dest="method", required=True)
    for name in ("qkls", "fourier", "compare"):
        _add_config_flags(bench_sub.add_parser(name))

    _add_config_flags(sub.add_parser("overlap-study", help="finite-difference element error vs t_fd"))

    p = sub.add_parser("complexity", help="asymptotic query/gate counts of both methods")
    p.add_argument("--d", type=float, required=True)
    p.add_argument("--kappa", type=float, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--N", type=float, required=True)
    p.add_argument("--json", action="store_true")
    return parser


def cmd_solve(args) -> int:
    if args.hamiltonian:
        h = PauliSum.from_json(Path(args.hamiltonian).read_text())
        calib = None
    else:
        eta, zeta = calibrate_kappa(args.n, args.J, args.kappa)
        h = build_ising(args.n, args.J, eta, zeta)
        calib = {"eta": eta, "zeta": zeta}
    b = prepare_b(h.n)
    system = assemble(h, b, args.M, args.tau, Source(args.source, args.t_fd, args.shots, args.seed))
    result = solve(system, args.svd_threshold)
    if args.reconstruction == "circuit":
        outcome = apply_lcu_circuit(h, b, plan_lcu(result.c), args.tau)
    else:
        outcome = apply_lcu_direct(h, b, result.c, args.tau)
    info = spectral_info(h)
    summary = {
        "n": h.n,
        "kappa": info.kappa,
        "sparsity_d": info.sparsity_d,
        "calibration": calib,
        "M": args.M,
        "tau": args.tau,
        "error": error_metric(outcome.state, exact_solution(h, b)),
        "success_prob": outcome.success_prob,
        "expected_repetitions": outcome.expected_repetitions,
        "residual": result.residual,
        "f_condition": result.f_condition,
        "truncated_rank": result.truncated_rank,
    }
    if args.coefficients:
        summary["c"] = [[float(z.real), float(z.imag)] for z in np.asarray(result.c)]
    print(json.dumps(summary, indent=2))
    return 0


def _emit(config: ExperimentConfig, csv_text: str, metadata: Optional[dict]) -> None:
    if config.output_path:
        path, meta = write_outputs(config.output_path, csv_text, metadata)
        print(f"wrote {path}" + (f" and {meta}" if meta else ""), file=sys.stderr)
    else:
        sys.stdout.write(csv_text)


def cmd_bench(args) -> int:
    config = config_from_args(args)
    if args.method == "compare":
        records, meta = run_compare(config)
        meta["ordering"] = [compare_ordering(records, k) for k in config.target_kappas]
        for o in meta["ordering"]:
            print(f"kappa={o['kappa']}: crossover={o['crossover']} ordering_holds={o['holds']}",
                  file=sys.stderr)
    else:
        instances = build_instances(config)
        constants = None
        if args.method == "qkls":
            records = run_qkls(config, instances)
        else:
            constants = resolve_constants(config)
            records = run_fourier(config, instances, constants)
        meta = run_metadata(config, instances, constants, records)
    _emit(config, records_to_csv(records), meta)
    return 0


def cmd_overlap(args) -> int:
    config = config_from_args(args)
    records = run_overlap_study(config)
    fits = {}
    for kappa in config.target_kappas:
        rows = [r for r in records if r.kappa == kappa]
        slope, intercept, r2 = linear_fit([r.t_fd for r in rows], [r.max_element_error for r in rows])
        fits[str(kappa)] = {"slope": slope, "intercept": intercept, "r2": r2}
        print(f"kappa={kappa}: slope={slope:.4g} R^2={r2:.4f}", file=sys.stderr)
    meta = {"version": __version__, "config": config.to_dict(), "linear_fits": fits}
    _emit(config, overlap_to_csv(records), meta)
    return 0


def cmd_complexity(args) -> int:
    report = complexity_report(args.d, args.kappa, args.epsilon, args.N)
    print(json.dumps(report, indent=2) if args.json else format_complexity(report))
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    handlers = {
        "solve": cmd_solve,
        "bench": cmd_bench,
        "overlap-study": cmd_overlap,
        "complexity": cmd_complexity,
    }
    try:
        return handlers[args.command](args)
    except QKLSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
