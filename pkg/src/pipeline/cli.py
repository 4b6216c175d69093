"""
Command-line entry point.

    forward      config/preset -> state_forward.json
    sample       state JSON + config -> dataset.csv
    reconstruct  dataset.csv + config -> state_mle.json
    analyze      state JSON -> report.json, wigner.csv
    bootstrap    state JSON + dataset.csv + config -> bootstrap.json
    pipeline     all of the above
    table1       every Table-1 preset, table1.csv

Exit codes: 0 success, 1 a consistency or tolerance check failed (lines in
table1.MODEL_GAPS are reported but do not fail the run), 2 usage, configuration or stage error.
"""
import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

from ..evaluation.metrics import analyze_state, check_report_consistency
from ..evaluation.table1 import summarize_table, unexpected_failures
from ..homodyne.dataset import load_dataset, save_dataset
from ..homodyne.sampling import sample_quadratures
from ..tomo.bootstrap import bootstrap
from ..tomo.mle import mle_reconstruct
from .config import ConfigError, ExperimentConfig, grid_for_dim, load_config, save_config, with_overrides
from .io import load_state, save_bootstrap, save_report, save_state
from .presets import Preset, get_preset, get_preset_config
from .run import (PipelineStageError, bootstrap_seed, stage, export_wigner_grid,
                  reproduce_table1, run_pipeline, simulate_forward)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_ERROR = 2


def configure_logging(verbose: bool) -> None:
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s - %(levelname)s - %(message)s",
    )


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run configuration")
    common.add_argument("--preset", choices=[p.value for p in Preset], help="built-in configuration")
    common.add_argument("--out", type=Path, default=Path("out"), help="output directory")
    common.add_argument("--seed", type=int, help="override the run seed (unsigned 64-bit)")
    common.add_argument("--resamples", type=int, help="override the bootstrap resample count")
    common.add_argument("--dim", type=int, help="override the Fock truncation")
    common.add_argument("--samples", type=int, help="override the number of homodyne samples")
    common.add_argument("--workers", type=int, default=1, help="bootstrap worker processes")
    common.add_argument("--verbose", "-v", action="store_true", help="log stage progress")
    return common


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="css_cli",
        description="Photon-subtracted squeezed vacuum: simulate, measure, reconstruct, analyze.",
    )
    common = _common_flags()
    verbs = parser.add_subparsers(dest="verb", required=True)

    verbs.add_parser("forward", parents=[common], help="forward model to state_forward.json")

    sample = verbs.add_parser("sample", parents=[common], help="homodyne samples from a state")
    sample.add_argument("--state", type=Path, help="state JSON (default: run the forward model)")

    recon = verbs.add_parser("reconstruct", parents=[common], help="MLE from a dataset")
    recon.add_argument("--data", type=Path, required=True, help="dataset CSV")

    analyze = verbs.add_parser("analyze", parents=[common], help="report and Wigner grid for a state")
    analyze.add_argument("--state", type=Path, required=True, help="state JSON")

    boot = verbs.add_parser("bootstrap", parents=[common], help="parametric bootstrap")
    boot.add_argument("--state", type=Path, required=True, help="point-estimate state JSON")
    boot.add_argument("--data", type=Path, required=True, help="dataset CSV whose phases are reused")

    verbs.add_parser("pipeline", parents=[common], help="every stage for one configuration")
    verbs.add_parser("table1", parents=[common], help="all Table-1 presets against published values")
    return parser


def resolve_config(args: argparse.Namespace) -> ExperimentConfig:
    if args.config is not None and args.preset is not None:
        raise ConfigError("give either --config or --preset, not both")
    if args.config is not None:
        config = load_config(args.config)
    elif args.preset is not None:
        config = get_preset_config(get_preset(args.preset))
    else:
        raise ConfigError("a configuration is required (--config or --preset)")
    return with_overrides(config, seed=args.seed, resamples=args.resamples,
                          dim=args.dim, samples=args.samples)


def _cmd_forward(args) -> int:
    config = resolve_config(args)
    save_config(config, args.out / "config.json")
    with stage("forward"):
        forward = simulate_forward(config)
    save_state(forward.state, args.out / "state_forward.json")
    if forward.herald_prob is not None:
        print(f"herald probability: {forward.herald_prob:.6g}")
    print(f"✓ wrote {args.out / 'state_forward.json'}")
    return EXIT_OK


def _cmd_sample(args) -> int:
    config = resolve_config(args)
    if args.state is not None:
        rho = load_state(args.state)
    else:
        with stage("forward"):
            rho = simulate_forward(config).state
    with stage("sample"):
        data = sample_quadratures(rho, config.gamma_h, config.schedule,
                                  config.n_samples, config.seed, config.label)
    path = save_dataset(data, args.out / "dataset.csv")
    print(f"✓ wrote {len(data):,} samples to {path}")
    return EXIT_OK


def _cmd_reconstruct(args) -> int:
    config = resolve_config(args)
    data = load_dataset(args.data)
    if data.gamma_h != config.gamma_h:
        logger.warning("dataset gamma_h=%g differs from config gamma_h=%g; using the config value",
                       data.gamma_h, config.gamma_h)
    with stage("reconstruct"):
        result = mle_reconstruct(data, config.mle)
    save_state(result.state, args.out / "state_mle.json")
    print(result)
    return EXIT_OK


def _cmd_analyze(args) -> int:
    rho = load_state(args.state)
    if args.config is not None or args.preset is not None:
        grid = resolve_config(args).grid
    else:
        grid = grid_for_dim(rho.dim.dim)
    label = args.state.stem
    with stage("analyze"):
        report = analyze_state(rho, label, grid)
    save_report(report, args.out / "report.json")
    with stage("export"):
        export_wigner_grid(rho, grid, args.out / "wigner.csv")
    print(report)

    problems = check_report_consistency(report)
    for problem in problems:
        print(f"✗ {problem}", file=sys.stderr)
    return EXIT_CHECK_FAILED if problems else EXIT_OK


def _cmd_bootstrap(args) -> int:
    config = resolve_config(args)
    if config.bootstrap_n < 2:
        raise ConfigError("bootstrap needs --resamples >= 2 (or bootstrap_n in the config)")
    rho = load_state(args.state)
    data = load_dataset(args.data)
    with stage("bootstrap"):
        report = bootstrap(rho, data, config.bootstrap_n, config.mle, bootstrap_seed(config.seed),
                           grid=config.grid, workers=args.workers, progress=args.verbose)
    save_bootstrap(report, args.out / "bootstrap.json")
    print(report)
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    config = resolve_config(args)
    result = run_pipeline(config, args.out, workers=args.workers, progress=args.verbose)
    print(result)
    for problem in result.failed_checks:
        print(f"✗ {problem}", file=sys.stderr)
    return EXIT_OK if result.passed else EXIT_CHECK_FAILED


def _cmd_table1(args) -> int:
    if args.config is not None or args.preset is not None:
        raise ConfigError("table1 always runs the built-in presets")
    table = reproduce_table1(args.out, samples=args.samples, resamples=args.resamples,
                             dim=args.dim, seed=args.seed, workers=args.workers,
                             progress=args.verbose)
    metrics = table[table["row"] != "remark"]
    print(summarize_table(metrics[metrics["metric"] != "report_consistency"]))
    gaps = table[table["known_gap"].astype(bool) & ~table["passed"].astype(bool)]
    for _, line in gaps.iterrows():
        print(f"~ {line['row']} {line['metric']}: known model gap, published {line['published']}, "
              f"model {line['model']}", file=sys.stderr)
    failed = unexpected_failures(table)
    for _, line in failed.iterrows():
        print(f"✗ {line['row']} {line['metric']}: published {line['published']}, model {line['model']}",
              file=sys.stderr)
    return EXIT_CHECK_FAILED if len(failed) else EXIT_OK


COMMANDS = {
    "forward": _cmd_forward,
    "sample": _cmd_sample,
    "reconstruct": _cmd_reconstruct,
    "analyze": _cmd_analyze,
    "bootstrap": _cmd_bootstrap,
    "pipeline": _cmd_pipeline,
    "table1": _cmd_table1,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_ERROR
    configure_logging(args.verbose)

    try:
        return COMMANDS[args.verb](args)
    except PipelineStageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
