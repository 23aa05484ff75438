# src/cli/cli.py
# Command-line surface for Lipschitz standardization.
# Usage:
#   python -m src.cli.cli scale data.csv --out scaled.csv --method lip --trick gamma
#   python -m src.cli.cli recover --meta scaled.csv.meta.json --params learned.json
#   python -m src.cli.cli analyze data.csv --hints hints.json
#   python -m src.cli.cli demo --out-dir demo --alpha 3e-3 --iters 60000
#
# Exit codes:
# 0 = success; 1 = usage error; 2 = data error; 3 = numeric error

import os
import sys
import json
import logging
import argparse
from dataclasses import dataclass, replace

import numpy as np
import pandas as pd

from src.dataio.dataio import read_csv, read_metadata, read_parameters, recover_parameters, write_parameters
from src.expfam.expfam import fit_empirical
from src.harness.harness import DEMO_PIPELINES, DEMO_ROWS, report_table, run_demo, write_report, write_trace
from src.run_pipeline import run_pipeline
from src.scaler.scaler import METHODS, ScalingTarget, plan_column
from src.tricks.tricks import DEFAULT_DELTA, TRICKS, NoiseConfig, expand_frame
from src.utils.errors import LipstdError, UsageError
from src.utils.utils import configure_logging, get_settings

logger = logging.getLogger(__name__)

DEMO_ITERS = 60_000


@dataclass(frozen=True)
class CliConfig:
    subcommand: str
    input_path: str | None = None
    out_path: str | None = None
    meta_path: str | None = None
    params_path: str | None = None
    out_dir: str | None = None
    method: str = "lip"
    trick: str = "gamma"
    alpha: float = 1e-3
    seed: int = 0
    delimiter: str = ","
    hints: str | None = None
    delta: float = DEFAULT_DELTA
    format: str = "table"
    allow_unscaled_discrete: bool = False
    iters: int = DEMO_ITERS
    n_rows: int = DEMO_ROWS


class ArgumentParser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser():
    parser = ArgumentParser(prog="lipstd", description="Lipschitz standardization for mixed-type tables")
    parser.add_argument("--log-level", type=str, default=None, help="Logging level (default LIPSTD_LOG_LEVEL or INFO)")
    commands = parser.add_subparsers(dest="subcommand", required=True)

    def common(sub, data_input=True):
        if data_input:
            sub.add_argument("input_path", type=str, help="Delimited text file with a header row")
            sub.add_argument("--hints", type=str, default=None, help="JSON file mapping column names to kinds")
            sub.add_argument("--delimiter", type=str, default=None, help="Field delimiter (default LIPSTD_DELIMITER or ',')")
        sub.add_argument("--alpha", type=float, default=None, help="Learning rate behind the target L* = 1/(D alpha)")
        sub.add_argument("--seed", type=int, default=None, help="Seed for trick noise and synthetic data")
        sub.add_argument("--format", choices=("table", "json"), default="table", help="Standard output format")

    scale = commands.add_parser("scale", help="Scale a dataset and write its metadata sidecar")
    common(scale)
    scale.add_argument("--out", dest="out_path", type=str, required=True, help="Scaled output file")
    scale.add_argument("--meta", dest="meta_path", type=str, default=None, help="Sidecar path (default <out>.meta.json)")
    scale.add_argument("--method", choices=METHODS, default="lip", help="Scaling method (default lip)")
    scale.add_argument("--trick", choices=TRICKS, default="gamma", help="Trick for discrete columns (default gamma)")
    scale.add_argument("--allow-unscaled-discrete", action="store_true", help="Let discrete columns pass through unscaled")

    recover = commands.add_parser("recover", help="Map learned scaled-space parameters back to the original columns")
    recover.add_argument("--meta", dest="meta_path", type=str, required=True, help="Sidecar written by scale")
    recover.add_argument("--params", dest="params_path", type=str, required=True, help="Learned parameters (JSON)")
    recover.add_argument("--out", dest="out_path", type=str, default=None, help="Write recovered parameters here")
    recover.add_argument("--delta", type=float, default=DEFAULT_DELTA, help="Floor for recovered Poisson rates")
    recover.add_argument("--format", choices=("table", "json"), default="table", help="Standard output format")

    analyze = commands.add_parser("analyze", help="Show smoothness under every scaling method")
    common(analyze)
    analyze.add_argument("--trick", choices=TRICKS, default="none", help="Trick for discrete columns (default none)")

    demo = commands.add_parser("demo", help="Run the balance demonstration on synthetic data")
    common(demo, data_input=False)
    demo.add_argument("--out-dir", dest="out_dir", type=str, default=None, help="Directory for traces and reports")
    demo.add_argument("--iters", type=int, default=DEMO_ITERS, help=f"Iteration budget (default {DEMO_ITERS})")
    demo.add_argument("--n-rows", dest="n_rows", type=int, default=DEMO_ROWS, help=f"Rows per column (default {DEMO_ROWS})")
    return parser


def config_from_args(args, settings):
    """Flags win over the environment, which wins over built-in defaults."""
    values = {key: value for key, value in vars(args).items() if key in CliConfig.__dataclass_fields__}
    values["alpha"] = args.alpha if getattr(args, "alpha", None) is not None else settings.alpha
    values["seed"] = args.seed if getattr(args, "seed", None) is not None else settings.seed
    values["delimiter"] = getattr(args, "delimiter", None) or settings.delimiter
    values = {key: value for key, value in values.items() if value is not None}
    config = CliConfig(**values)

    if not config.alpha > 0:
        raise UsageError(f"--alpha must be positive, got {config.alpha}")
    if config.seed < 0:
        raise UsageError(f"--seed must be non-negative, got {config.seed}")
    if config.subcommand == "scale" and config.meta_path is None:
        config = replace(config, meta_path=f"{config.out_path}.meta.json")
    if config.subcommand == "demo" and (config.iters < 1 or config.n_rows < 2):
        raise UsageError("--iters must be at least 1 and --n-rows at least 2")
    return config


def emit(table, fmt):
    if fmt == "json":
        print(json.dumps(table.to_dict(orient="records"), indent=2, default=float))
    else:
        print(table.to_string(index=False))


def _fmt(values):
    return "(" + ", ".join(f"{value:.6g}" for value in values) + ")"


################################################ subcommands ################################################

def cmd_scale(config):
    outcome = run_pipeline(config)

    rows = []
    for plan in outcome.plans:
        result = plan.result
        rows.append(
            {
                "column": plan.name,
                "family": str(plan.family),
                "method": plan.scaling_method,
                "omega": plan.omega,
                "achieved_L": result.achieved.total if result else None,
                "target_L": result.target if result else None,
                "warnings": "; ".join(plan.warnings) or ("" if plan.ok else f"ERROR: {plan.error}"),
            }
        )
    emit(pd.DataFrame(rows), config.format)

    if outcome.errors:
        return outcome.errors[0].exit_code
    print(f"\nWrote {config.out_path} and {config.meta_path}")
    return 0


def cmd_recover(config):
    metadata = read_metadata(config.meta_path)
    params = read_parameters(config.params_path, metadata)
    recovered = recover_parameters(metadata, params, config.delta)

    if config.out_path:
        write_parameters(recovered, config.out_path)
    rows = [
        {"column": name, "family": str(canon.family), "parameters": _fmt(canon.values)}
        for name, canon in recovered.items()
    ]
    emit(pd.DataFrame(rows), config.format)
    return 0


def analyze_rows(frame, target):
    """One row per (column, method): omega, local smoothness and the scaled bound."""
    rows, errors = [], []
    for column in frame.columns:
        spec = column.spec
        if not spec.family.is_continuous:
            canon = fit_empirical(spec.family, column.values, column.mask)
            rows.append({"column": spec.name, "family": str(spec.family), "parameters": _fmt(canon.values),
                         "method": "none", "omega": 1.0, "local_L": None, "bound_L": None})
            continue
        for method in METHODS:
            try:
                plan = plan_column(replace(spec, scaling_method=method), column.values, column.mask, target)
            except LipstdError as error:
                errors.append(error.with_column(spec.name))
                rows.append({"column": spec.name, "family": str(spec.family), "parameters": "", "method": method,
                             "omega": None, "local_L": None, "bound_L": None, "error": str(error)})
                continue
            canon = fit_empirical(spec.family, column.values, column.mask)
            rows.append({"column": spec.name, "family": str(spec.family), "parameters": _fmt(canon.values),
                         "method": method, "omega": plan.omega, "local_L": plan.result.local.total,
                         "bound_L": plan.result.achieved.total})
    return rows, errors


def cmd_analyze(config):
    frame = read_csv(config.input_path, config.hints, config.delimiter)
    expanded, _ = expand_frame(frame, config.trick, NoiseConfig(seed=config.seed))
    target = ScalingTarget.from_learning_rate(config.alpha, len(frame.columns))

    rows, errors = analyze_rows(expanded, target)
    emit(pd.DataFrame(rows), config.format)
    print(f"\nTarget L* = {target.l_star:.6g} (alpha={config.alpha}, D={len(frame.columns)})")
    return errors[0].exit_code if errors else 0


def cmd_demo(config):
    runs = [
        run_demo(method, trick, config.alpha, config.iters, config.seed, config.n_rows)
        for method, trick in DEMO_PIPELINES
    ]
    if config.out_dir:
        for run in runs:
            write_trace(run.trace, os.path.join(config.out_dir, f"trace_{run.label}.csv"))
        write_report(runs, os.path.join(config.out_dir, "report.csv"))
    table = report_table(runs)
    lagging = table.loc[table["dispersion_t0_below_std"].eq(False), "pipeline"].tolist()
    if lagging:
        logger.warning(f"t=0 improvement dispersion is not below std-none for: {', '.join(lagging)}")
    emit(table, config.format)
    return 0


COMMANDS = {"scale": cmd_scale, "recover": cmd_recover, "analyze": cmd_analyze, "demo": cmd_demo}


def main(argv=None):
    try:
        settings = get_settings()
        args = build_parser().parse_args(argv)
        configure_logging(args.log_level.upper() if args.log_level else settings.log_level)
        config = config_from_args(args, settings)
        return COMMANDS[config.subcommand](config)
    except LipstdError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    np.seterr(all="ignore")
    sys.exit(main())
