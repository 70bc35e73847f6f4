"""
Command-line interface for SPROCKET experiments.

    python cli.py evaluate TRAIN.ts TEST.ts --kernels 512 --distance msm
    python cli.py benchmark manifest.toml --algorithms sprocket,rocket,rocket+sprocket
    python cli.py analyze results.csv --pair sprocket,rocket
    python cli.py fit TRAIN.ts --model-out model.npz
    python cli.py transform model.npz TEST.ts --output features.csv
"""
import argparse
import json
import logging
import os
import sys
from typing import List, Optional

# Add the current directory to the path so the utils package resolves
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from utils.ensemble_analysis import (accuracy_table, average_ranks, compare_pair,
                                     ensemble_grids, friedman_test, pairwise_accuracy,
                                     timing_table)
from utils.error_logger import ErrorLogger
from utils.errors import ConfigError, EmptyTable, OutputError, SprocketError, describe
from utils.experiment_runner import (ExperimentRunner, RunOutput, expand_sweep,
                                     mean_record, parse_algorithm, seeds_for)
from utils.manifest_parser import parse_manifest
from utils.results_writer import (ResultsWriter, read_results, records_frame,
                                  resolve_format, sidecar_path)
from utils.run_config import RunConfig, parse_distance_spec
from utils.sprocket_transform import PrototypeModel, apply_sprocket, fit_sprocket
from utils.ts_parser import load_dataset
from utils.zip_exporter import ZipExporter, bundle_readme

logger = logging.getLogger("sprocket")

EXIT_OK = 0
EXIT_DATASET_ERROR = 1
EXIT_USAGE_ERROR = 2

MEASURE_CHOICES = ("euclidean", "dtw", "wdtw", "adtw", "erp", "twe", "msm")


class UsageError(Exception):
    """Invalid flag combination; reported with exit status 2."""


def _print_error(error: Exception, usage: bool = False) -> None:
    info = describe(error)
    if usage and info["code"] == "internal_error":
        info["code"] = "usage_error"
    print(json.dumps({"error": info}), file=sys.stderr)


class JsonArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose errors are machine-readable JSON on stderr."""

    def error(self, message):
        print(json.dumps({"error": {"code": "usage_error", "message": message,
                                    "context": {"prog": self.prog}}}), file=sys.stderr)
        sys.exit(EXIT_USAGE_ERROR)


def _int_list(text: str) -> List[int]:
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")
    if not values or any(v < 1 for v in values):
        raise argparse.ArgumentTypeError("kernel counts must be positive")
    return values


def _config_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("run configuration")
    group.add_argument("--config", help="TOML file with a [run] table; flags override it")
    group.add_argument("--kernels", type=int, help="kernel count K (default 512)")
    group.add_argument("--distance", choices=MEASURE_CHOICES,
                       help="single distance measure (default msm)")
    group.add_argument("--distance-spec",
                       help='kernel shares per measure, e.g. "msm:300,euclidean:300", or a preset '
                            "(top2, top2e, top4, top4e, elastic, all)")
    group.add_argument("--proto-base", type=float, help="prototype log base b (default 4)")
    group.add_argument("--selection", choices=("random", "stratified", "kmeanspp"),
                       help="prototype selection strategy (default random)")
    group.add_argument("--window-rule", help="sqrt, none or fixed:N (default sqrt)")
    group.add_argument("--channel-mode", choices=("independent", "single"),
                       help="multichannel distance rule (default independent)")
    group.add_argument("--seed", type=int, help="master seed (default 0)")
    group.add_argument("--threads", type=int, help="worker threads (default: all cores)")
    return parent


def _log_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--log-file", help="also write log records to this file")
    parent.add_argument("--verbose", action="store_true", help="debug logging")
    return parent


def _output_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--output", help="results file to write")
    parent.add_argument("--format", choices=("json", "csv"),
                        help="results format (default: from the extension, else json)")
    parent.add_argument("--emit-correctness", action="store_true",
                        help="write the per-instance correctness sidecar")
    parent.add_argument("--repeats", type=int, default=1,
                        help="runs with seeds seed, seed+1, ... (default 1)")
    parent.add_argument("--bundle", help="also write a ZIP of the results, sidecars and a README")
    return parent


def build_parser() -> JsonArgumentParser:
    parser = JsonArgumentParser(prog="sprocket",
                                description="SPROCKET time series classification experiments")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=JsonArgumentParser)
    config_flags = _config_flags()
    output_flags = _output_flags()
    log_flags = _log_flags()

    fit = commands.add_parser("fit", parents=[config_flags, log_flags],
                               help="fit a transform and save it")
    fit.add_argument("train", help="training .ts or .csv file")
    fit.add_argument("--model-out", required=True, help="path of the model file (.npz)")
    fit.add_argument("--features-out", help="also write the training features as CSV")

    transform = commands.add_parser("transform", parents=[log_flags],
                                    help="apply a saved transform to a dataset")
    transform.add_argument("model", help="model file written by fit")
    transform.add_argument("data", help=".ts or .csv file to transform")
    transform.add_argument("--output", required=True, help="feature CSV to write")

    evaluate = commands.add_parser("evaluate", parents=[config_flags, output_flags, log_flags],
                                   help="fit on train and score on test")
    evaluate.add_argument("train", help="training .ts or .csv file")
    evaluate.add_argument("test", help="test .ts or .csv file")
    evaluate.add_argument("--algorithm", default="sprocket",
                          help='algorithm name, e.g. "sprocket", "rocket+sprocket-msm"')

    benchmark = commands.add_parser("benchmark", parents=[config_flags, output_flags, log_flags],
                                    help="run algorithms over a dataset manifest")
    benchmark.add_argument("manifest", help="TOML manifest of train/test pairs")
    benchmark.add_argument("--algorithms", default="sprocket",
                           help="comma-separated algorithm names (default sprocket)")
    benchmark.add_argument("--kernel-sweep", type=_int_list,
                           help="comma-separated kernel counts; runs <algorithm>@<K> for each")
    benchmark.add_argument("--skip-missing", action="store_true",
                           help="skip manifest entries whose files are missing")

    analyze = commands.add_parser("analyze", parents=[log_flags], help="rank, timing and diversity reports")
    analyze.add_argument("results", help="results file (.json or .csv)")
    analyze.add_argument("--output-dir", help="directory for report files (default: next to results)")
    analyze.add_argument("--pair", action="append", default=[],
                         help="algorithm pair a,b for the win/tie/loss sign test (repeatable)")
    analyze.add_argument("--correctness", help="correctness sidecar (default: <stem>.correctness.csv)")
    return parser


def configure_logging(verbose: bool = False, log_file: Optional[str] = None) -> ErrorLogger:
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO,
                        format='%(asctime)s - %(levelname)s - %(message)s', stream=sys.stderr)
    return ErrorLogger(log_file)


def resolve_config(args) -> RunConfig:
    """
    Merge a config file with command-line flags; flags win.

    Args:
        args: Parsed arguments

    Returns:
        Validated RunConfig
    """
    config = RunConfig.from_toml(args.config) if getattr(args, "config", None) else RunConfig()
    if args.kernels is not None and args.kernels < 1:
        raise ConfigError("kernel count must be positive", option="kernels", value=args.kernels)
    if args.distance and args.distance_spec:
        raise UsageError("--distance and --distance-spec are mutually exclusive")
    changes = {
        "kernel_count": args.kernels,
        "prototype_log_base": args.proto_base,
        "selection": args.selection,
        "window_rule": args.window_rule,
        "channel_mode": args.channel_mode,
        "seed": args.seed,
        "thread_count": args.threads,
    }
    kernel_count = args.kernels or config.kernel_count
    if args.distance_spec:
        changes["distance_spec"] = parse_distance_spec(args.distance_spec, kernel_count)
    elif args.distance:
        changes["distance_spec"] = ((args.distance, kernel_count),)
    return config.with_overrides(**changes)


def check_output_flags(args) -> None:
    """Reject output flags before any work is done."""
    if args.bundle and not args.output:
        raise UsageError("--bundle needs --output")
    if args.output:
        try:
            resolve_format(args.output, args.format)
        except OutputError as e:
            raise UsageError(e.message) from e


def _write_run(output: RunOutput, config: RunConfig, args) -> None:
    if not args.output:
        return
    writer = ResultsWriter()
    writer.write_results(output.records, args.output, args.format)
    files = {os.path.basename(args.output): args.output}
    config_path = sidecar_path(args.output, "config")
    config.to_toml(config_path)
    files[os.path.basename(config_path)] = config_path
    if output.costs:
        path = writer.write_costs(output.costs, sidecar_path(args.output, "costs"))
        files[os.path.basename(path)] = path
    if args.emit_correctness:
        path = writer.write_correctness(output.correctness, sidecar_path(args.output, "correctness"))
        files[os.path.basename(path)] = path
    logger.info(f"Wrote {len(output.records)} records to {args.output}")
    if args.bundle:
        with open(config_path, "r") as f:
            readme = bundle_readme(f.read(), len(output.records))
        ZipExporter().create_zip(files, args.bundle, readme)
        logger.info(f"Wrote bundle {args.bundle}")


def cmd_fit(args) -> int:
    config = resolve_config(args)
    train = load_dataset(args.train)
    model, features = fit_sprocket(train, config)
    model.save(args.model_out)
    if args.features_out:
        features.to_csv(args.features_out)
    print(json.dumps({"model": args.model_out, "rows": features.shape[0],
                      "features": features.shape[1], "distance_calls": features.distance_calls,
                      "timings": features.timings}))
    return EXIT_OK


def cmd_transform(args) -> int:
    model = PrototypeModel.load(args.model)
    data = load_dataset(args.data)
    features = apply_sprocket(model, data)
    features.to_csv(args.output)
    print(json.dumps({"output": args.output, "rows": features.shape[0],
                      "features": features.shape[1], "distance_calls": features.distance_calls}))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    config = resolve_config(args)
    check_output_flags(args)
    parse_algorithm(args.algorithm)
    seeds = seeds_for(config.seed, args.repeats)
    train = load_dataset(args.train)
    test = load_dataset(args.test)

    runner = ExperimentRunner(config, emit_correctness=args.emit_correctness)
    output = runner.run_dataset(train, test, [args.algorithm], seeds)
    _write_run(output, config, args)
    print(json.dumps({"records": [r.to_dict() for r in output.records],
                      "mean": mean_record(output.records)}, indent=2))
    return EXIT_OK


def cmd_benchmark(args) -> int:
    config = resolve_config(args)
    check_output_flags(args)
    algorithms = expand_sweep([a.strip() for a in args.algorithms.split(",") if a.strip()],
                              args.kernel_sweep)
    for algorithm in algorithms:
        parse_algorithm(algorithm)
    seeds = seeds_for(config.seed, args.repeats)
    manifest = parse_manifest(args.manifest)

    runner = ExperimentRunner(config, error_logger=args.error_logger,
                              emit_correctness=args.emit_correctness)
    output = runner.benchmark(manifest, algorithms, seeds, skip_missing=args.skip_missing)
    _write_run(output, config, args)
    if not args.output:
        print(json.dumps([r.to_dict() for r in output.records], indent=2))

    if args.error_logger.has_errors():
        for error in args.error_logger.get_errors():
            shown = {k: v for k, v in error["context"].items() if k != "traceback"}
            print(json.dumps({"error": {"type": error["type"], "message": error["message"],
                                        "context": shown}}, default=str), file=sys.stderr)
        return EXIT_DATASET_ERROR
    return EXIT_OK


def cmd_analyze(args) -> int:
    records = read_results(args.results)
    results = records_frame(records)
    if results.empty:
        raise EmptyTable("the results file has no records", path=args.results)
    output_dir = args.output_dir or os.path.dirname(os.path.abspath(args.results))
    os.makedirs(output_dir, exist_ok=True)
    stem = os.path.splitext(os.path.basename(args.results))[0]

    def out(name: str) -> str:
        return os.path.join(output_dir, f"{stem}.{name}.csv")

    report = {"files": []}
    table = accuracy_table(results)
    table.to_csv(out("accuracy"))
    report["files"].append(out("accuracy"))

    if table.shape[0] < 2:
        ranks = table.dropna(axis=1).notna().sum(axis=1).to_frame("best_count")
        ranks.insert(0, "mean_rank", 1.0)
        ranks.index.name = "algorithm"
        report["notice"] = "one algorithm only: grids and pair tests skipped"
    else:
        ranks = average_ranks(table)
    ranks.to_csv(out("ranks"))
    report["ranks"] = {a: {"mean_rank": float(r.mean_rank), "best_count": int(r.best_count)}
                       for a, r in ranks.iterrows()}
    report["files"].append(out("ranks"))

    timing_table(results).to_csv(out("timing"))
    report["files"].append(out("timing"))

    if table.shape[0] >= 2:
        pairwise_accuracy(results).to_csv(out("pairwise_accuracy"), index=False)
        report["files"].append(out("pairwise_accuracy"))

    if table.shape[0] >= 3:
        try:
            report["friedman"] = friedman_test(table)
        except EmptyTable as e:
            report["friedman"] = {"skipped": e.message}

    report["pairs"] = []
    for pair in args.pair:
        names = [p.strip() for p in pair.split(",")]
        if len(names) != 2:
            raise UsageError(f"--pair expects two comma-separated algorithms, got '{pair}'")
        report["pairs"].append(compare_pair(table, names[0], names[1]))

    correctness_path = args.correctness or sidecar_path(args.results, "correctness")
    if table.shape[0] >= 2 and os.path.isfile(correctness_path):
        frame = ResultsWriter().read_correctness(correctness_path)
        grids = ensemble_grids(frame)
        for view, by_stat in grids.items():
            for stat, grid in by_stat.items():
                path = out(f"grid.{view}.{stat}")
                grid.to_csv(path)
                report["files"].append(path)
    elif table.shape[0] >= 2:
        report["notice"] = f"no correctness sidecar at {correctness_path}: grids skipped"

    print(json.dumps(report, indent=2, default=str))
    return EXIT_OK


COMMANDS = {
    "fit": cmd_fit,
    "transform": cmd_transform,
    "evaluate": cmd_evaluate,
    "benchmark": cmd_benchmark,
    "analyze": cmd_analyze,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.error_logger = configure_logging(args.verbose, args.log_file)
    if getattr(args, "repeats", 1) < 1:
        _print_error(ConfigError("repeats must be positive", option="repeats"))
        return EXIT_USAGE_ERROR
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, UsageError) as e:
        _print_error(e, usage=True)
        return EXIT_USAGE_ERROR
    except (SprocketError, OSError) as e:
        args.error_logger.log_error(args.command, str(e), {"exception": e})
        _print_error(e)
        return EXIT_DATASET_ERROR


if __name__ == "__main__":
    sys.exit(main())
