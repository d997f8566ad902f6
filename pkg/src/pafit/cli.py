"""Command-line surface: simulate, fit, limits, experiment, ingest.

Exit codes: 0 success, 2 usage or config problems, 3 data/model mismatch,
4 numeric non-convergence.  Every run first prints its resolved
configuration as JSON, then a machine-readable result; files are written
atomically.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .buckley_osthus import bo_limit_report, bo_mle, sigma2_beta
from .errors import (
    ConfigError,
    ConvergenceError,
    DataFormatError,
    LabelingError,
    ParameterError,
    SizeGuardError,
    StructuralError,
)
from .experiments import (
    ExperimentConfig,
    resolve_workers,
    run_bo_experiment,
    run_hpam_experiment,
)
from .fileio import atomic_write_text
from .history import (
    HpamParams,
    community_stats,
    degree_counts,
    read_history_csv,
    write_history_csv,
)
from .hpam import gamma_mle, hpam_limits
from .ingest import LabelingRule, build_history, filter_addresses, parse_edges
from .simulate import SimConfig, simulate

USAGE_ERROR = 2
DATA_ERROR = 3
NONCONVERGENCE = 4


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.asarray([float(x) for x in text.split(",")], dtype=float)
    except ValueError:
        raise ParameterError(f"could not parse comma-separated reals from {text!r}")


def _parse_hpam_flags(pi_text: str, gamma_text: str) -> HpamParams:
    pi = _parse_vector(pi_text)
    gamma_flat = _parse_vector(gamma_text)
    K = pi.shape[0]
    if gamma_flat.shape[0] != K * K:
        raise ParameterError(
            f"--gamma needs K*K={K * K} row-major entries for K={K}, "
            f"got {gamma_flat.shape[0]}"
        )
    return HpamParams(pi=pi, gamma=gamma_flat.reshape(K, K))


def _print_config(name: str, resolved: dict) -> None:
    print(json.dumps({"command": name, "config": resolved}))


def _emit(result: dict, out: str | None) -> None:
    text = json.dumps(result, indent=2) + "\n"
    if out:
        atomic_write_text(out, text)
    print(text, end="")


def cmd_simulate(args) -> int:
    if args.model == "hpam":
        if args.pi is None or args.gamma is None:
            raise ParameterError("hpam simulation needs --pi and --gamma")
        params = _parse_hpam_flags(args.pi, args.gamma)
        config = SimConfig(model="hpam", n=args.n, seed=args.seed, hpam=params)
    elif args.model in ("bo", "general"):
        if args.a is None:
            raise ParameterError(f"{args.model} simulation needs --a")
        if args.model == "general":
            if args.delta is None:
                raise ParameterError("general simulation needs --delta")
            config = SimConfig(
                model="general_f", n=args.n, seed=args.seed, bo_a=args.a, delta=args.delta
            )
        else:
            config = SimConfig(model="bo", n=args.n, seed=args.seed, bo_a=args.a)
    else:
        config = SimConfig(model="lcd", n=args.n, seed=args.seed)
    _print_config("simulate", json.loads(config.to_json()))
    history = simulate(config)
    write_history_csv(history, args.out)
    degrees = history.degrees()
    _emit(
        {
            "n": history.n,
            "edges": history.n,
            "max_degree": int(degrees.max()),
            "out": args.out,
        },
        None,
    )
    return 0


def cmd_fit(args) -> int:
    _print_config(
        "fit",
        {"model": args.model, "input": args.input, "eps": args.eps, "max": args.max},
    )
    history = read_history_csv(args.input)
    if args.model == "bo":
        counts = degree_counts(history)
        fit = bo_mle(counts, domain=(args.eps, args.max))
        limits = sigma2_beta(fit.a_hat)
        report = fit.to_json_dict()
        report["model"] = "bo"
        report["stderr_plugin"] = float(np.sqrt(limits.avar / history.n))
        _emit(report, args.out)
        return 0 if fit.converged else NONCONVERGENCE
    if not history.labeled:
        raise LabelingError("hpam fit requires membership labels in the input CSV")
    stats = community_stats(history)
    fit = gamma_mle(stats, exact_denominator=not args.scaled_denominator)
    report = fit.to_json_dict()
    report["model"] = "hpam"
    _emit(report, args.out)
    return 0 if fit.converged else NONCONVERGENCE


def cmd_limits(args) -> int:
    if args.model == "bo":
        if args.a0 is None:
            raise ParameterError("bo limits need --a0")
        _print_config("limits", {"model": "bo", "a0": args.a0, "k_max": args.k_max})
        report = bo_limit_report(args.a0, k_max=args.k_max)
        _emit(report.to_json_dict(), args.out)
        return 0
    if args.pi is None or args.gamma is None:
        raise ParameterError("hpam limits need --pi and --gamma")
    params = _parse_hpam_flags(args.pi, args.gamma)
    _print_config(
        "limits",
        {"model": "hpam", "pi": params.pi.tolist(), "gamma": params.gamma.tolist()},
    )
    limits = hpam_limits(params)
    _emit(limits.to_json_dict(), args.out)
    return 0


def cmd_experiment(args) -> int:
    with open(args.config, "r", encoding="utf-8") as handle:
        config = ExperimentConfig.from_json(handle.read())
    if args.out is not None:
        config = ExperimentConfig(
            model=config.model,
            true_params=config.true_params,
            sample_sizes=config.sample_sizes,
            replications=config.replications,
            base_seed=config.base_seed,
            output_path=args.out,
        )
    if config.output_path is None:
        raise ConfigError("output_path: required (set it in the config or pass --out)")
    _print_config("experiment", json.loads(config.to_json()))
    workers = resolve_workers(args.workers)
    runner = run_bo_experiment if config.model == "bo" else run_hpam_experiment
    result = runner(config, workers=workers)
    _emit(
        {
            "output_path": config.output_path,
            "summary_rows": len(result.summary),
            "raw_rows": len(result.raw),
            "non_converged": len(result.failures),
        },
        None,
    )
    return 0


def cmd_ingest(args) -> int:
    rule = LabelingRule(top_fraction=args.top_fraction)
    _print_config(
        "ingest",
        {
            "input": args.input,
            "n_limit": args.n_limit,
            "top_fraction": args.top_fraction,
            "blocklist": args.blocklist,
            "out": args.out,
            "report": args.report,
        },
    )
    edges = parse_edges(args.input)
    if args.blocklist:
        edges = filter_addresses(edges, args.blocklist)
    history, report = build_history(edges, n_limit=args.n_limit, rule=rule)
    write_history_csv(history, args.out)
    report.write_json(args.report)
    _emit(
        {
            "out": args.out,
            "report": args.report,
            "nodes": history.n,
            **report.to_json_dict(),
        },
        None,
    )
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pafit",
        description="Preferential attachment growth: simulate, fit, limits, "
        "experiments, ingestion.",
    )
    parser.add_argument("--version", action="version", version=f"pafit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="sample a growth history to CSV")
    p.add_argument("--model", required=True, choices=["lcd", "bo", "hpam", "general"])
    p.add_argument("--n", required=True, type=int, help="number of nodes")
    p.add_argument("--seed", required=True, type=int)
    p.add_argument("--a", type=float, help="attachment parameter (bo/general)")
    p.add_argument("--delta", type=float, help="attachment exponent (general)")
    p.add_argument("--pi", help="comma-separated membership probabilities (hpam)")
    p.add_argument("--gamma", help="comma-separated row-major interaction matrix (hpam)")
    p.add_argument("--out", required=True, help="output history CSV path")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("fit", help="fit a model to a history CSV by MLE")
    p.add_argument("--model", required=True, choices=["bo", "hpam"])
    p.add_argument("--input", required=True, help="history CSV path")
    p.add_argument("--eps", type=float, default=1e-3, help="domain lower end (bo)")
    p.add_argument("--max", type=float, default=100.0, help="domain upper end (bo)")
    p.add_argument(
        "--scaled-denominator",
        action="store_true",
        help="hpam: drop the +gamma self term from step denominators",
    )
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("limits", help="limiting quantities for given parameters")
    p.add_argument("--model", required=True, choices=["bo", "hpam"])
    p.add_argument("--a0", type=float, help="true parameter (bo)")
    p.add_argument("--k-max", type=int, default=200, help="degrees reported (bo)")
    p.add_argument("--pi", help="membership probabilities (hpam)")
    p.add_argument("--gamma", help="row-major interaction matrix (hpam)")
    p.add_argument("--out", help="also write the JSON report here")
    p.set_defaults(func=cmd_limits)

    p = sub.add_parser("experiment", help="run a Monte Carlo replication study")
    p.add_argument("--config", required=True, help="experiment config JSON")
    p.add_argument("--out", help="override the config's output directory")
    p.add_argument(
        "--workers", type=int, help="worker processes (default: PA_THREADS or all cores)"
    )
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("ingest", help="build a labeled history from transactions")
    p.add_argument("--input", required=True, help="transaction CSV path")
    p.add_argument("--n-limit", type=int, help="use only the first N records")
    p.add_argument("--top-fraction", type=float, default=0.05)
    p.add_argument(
        "--blocklist", nargs="*", default=[], help="drop ids starting with these prefixes"
    )
    p.add_argument("--out", required=True, help="output history CSV path")
    p.add_argument("--report", required=True, help="output drop-report JSON path")
    p.set_defaults(func=cmd_ingest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits 0 for --help, 2 for usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParameterError, SizeGuardError, ConfigError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (DataFormatError, LabelingError, StructuralError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return DATA_ERROR
    except ConvergenceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
