"""
Command-line entry point.

    python main.py curve    --alpha 0.1,0.2,0.5 --grid 200 --out curves
    python main.py simulate --n 10000 --alpha 0.5 --trials 3 --seed 0 --out routes
    python main.py verify   --n 1000 --n 10000 --alpha 0.3,0.5,0.7 --trials 100 --seed 0 --out report
    python main.py selftest

Exit codes: 0 success, 1 I/O error, 2 usage error, 3 verification failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import analytics
import experiments
import export
from selftest import run_selftest

logger = logging.getLogger(__name__)

EXIT_OK, EXIT_IO, EXIT_USAGE, EXIT_VERIFY = 0, 1, 2, 3
COMMANDS = ("curve", "simulate", "verify", "selftest")
FAN_ALPHAS = tuple(round(0.1 * i, 1) for i in range(1, 10))

COMMAND_DEFAULTS = {
    "curve": {"alphas": FAN_ALPHAS, "ns": (), "trials": 1, "epsilons": ()},
    "simulate": {"alphas": FAN_ALPHAS, "ns": (10000,), "trials": 1, "epsilons": ()},
    "verify": {"alphas": (0.3, 0.5, 0.7), "ns": (1000, 10000), "trials": 100,
               "epsilons": (0.05, 0.1, 0.2)},
    "selftest": {"alphas": (), "ns": (), "trials": 1, "epsilons": ()},
}


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    alphas: tuple[float, ...]
    ns: tuple[int, ...]
    trials: int
    seed: int | None
    epsilons: tuple[float, ...]
    out: Path
    fmt: str = "csv"
    grid: int = analytics.DEFAULT_GRID_SIZE
    workers: int = 1
    exit_grid: int = experiments.DEFAULT_EXIT_GRID
    thresholds: Path | None = None
    calibrate: bool = False
    verbose: bool = False

    def validate(self):
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.fmt not in export.FORMATS:
            raise UsageError(f"--format must be one of {export.FORMATS}, got {self.fmt!r}")
        bad_alphas = [alpha for alpha in self.alphas if not 0.0 <= alpha < 1.0]
        if bad_alphas:
            raise UsageError(f"--alpha values must lie in [0, 1), got {bad_alphas}")
        bad_ns = [n for n in self.ns if n < 2]
        if bad_ns:
            raise UsageError(f"--n values must be at least 2, got {bad_ns}")
        if self.trials < 1:
            raise UsageError(f"--trials must be at least 1, got {self.trials}")
        if self.grid < 2:
            raise UsageError(f"--grid must be at least 2, got {self.grid}")
        if self.workers < 1:
            raise UsageError(f"--workers must be at least 1, got {self.workers}")
        if self.exit_grid < 0:
            raise UsageError(f"--exit-grid must be non-negative, got {self.exit_grid}")
        if any(epsilon <= 0 for epsilon in self.epsilons):
            raise UsageError(f"--epsilon values must be positive, got {list(self.epsilons)}")
        if self.command == "verify" and self.seed is None:
            raise UsageError("verify needs an explicit --seed")
        if self.seed is not None and not 0 <= self.seed < 2 ** 64:
            raise UsageError(f"--seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.calibrate and self.command != "verify":
            raise UsageError("--calibrate only applies to verify")
        return self


def _split(values):
    for value in values or ():
        for part in value.split(","):
            if part.strip():
                yield part.strip()


def _as_int(text):
    number = float(text)
    if not number.is_integer():
        raise UsageError(f"expected an integer, got {text!r}")
    return int(number)


def build_argparser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Bumping routes of Robinson-Schensted insertion and their limit shapes")
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--alpha", action="append", help="inserted value(s) in [0, 1); repeatable or comma list")
    parser.add_argument("--n", action="append", help="tableau scale(s) n >= 2; repeatable or comma list")
    parser.add_argument("--trials", type=int, default=None, help="trials per (n, alpha) cell")
    parser.add_argument("--seed", type=int, default=None, help="master seed (required by verify, default 0 elsewhere)")
    parser.add_argument("--epsilon", action="append", help="exceedance threshold(s) for the report")
    parser.add_argument("--grid", type=int, default=analytics.DEFAULT_GRID_SIZE, help="curve sample points")
    parser.add_argument("--format", dest="fmt", default="csv", help="csv or json")
    parser.add_argument("--out", default="out", help="output directory")
    parser.add_argument("--workers", type=int, default=1, help="worker processes for the trials")
    parser.add_argument("--exit-grid", type=int, default=experiments.DEFAULT_EXIT_GRID,
                        help="t-grid size for sublevel exit points (simulate), 0 to skip them")
    parser.add_argument("--thresholds", default=None, help="thresholds JSON overriding the shipped table (verify)")
    parser.add_argument("--calibrate", action="store_true",
                        help="verify: write thresholds.json from this run instead of checking it")
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    return parser


def parse_config(argv: Sequence[str] | None = None) -> RunConfig:
    args = build_argparser().parse_args(argv)
    defaults = COMMAND_DEFAULTS[args.command]
    try:
        # duplicates dropped, first occurrence keeps its place
        alphas = tuple(dict.fromkeys(float(part) for part in _split(args.alpha))) or defaults["alphas"]
        ns = tuple(dict.fromkeys(_as_int(part) for part in _split(args.n))) or defaults["ns"]
        epsilons = tuple(float(part) for part in _split(args.epsilon)) or defaults["epsilons"]
    except ValueError as error:
        raise UsageError(str(error)) from error
    seed = args.seed
    if seed is None and args.command != "verify":
        seed = 0
    return RunConfig(
        command=args.command, alphas=alphas, ns=ns,
        trials=args.trials if args.trials is not None else defaults["trials"],
        seed=seed, epsilons=epsilons, out=Path(args.out), fmt=args.fmt, grid=args.grid,
        workers=args.workers, exit_grid=args.exit_grid,
        thresholds=Path(args.thresholds) if args.thresholds else None,
        calibrate=args.calibrate, verbose=args.verbose,
    ).validate()


def _label(value):
    return f"{value:g}"


def cmd_curve(config: RunConfig) -> list[Path]:
    written = []
    for alpha in config.alphas:
        curve = analytics.sample_curve(alpha, config.grid)
        path = config.out / f"curve_alpha={_label(alpha)}.{config.fmt}"
        written.append(export.write_curve(curve, path, config.fmt))
    return written


def cmd_simulate(config: RunConfig) -> list[Path]:
    written = []
    for n in config.ns:
        results = experiments.run_trials(n, config.alphas, config.trials, config.seed, config.grid,
                                         config.exit_grid, config.workers)
        for alpha in config.alphas:
            cell = [result for result in results if result.alpha == alpha]
            stem = f"n={n}_alpha={_label(alpha)}"
            written.append(export.write_routes(cell, config.out / f"routes_{stem}.{config.fmt}", config.fmt))
            if config.exit_grid:
                written.append(export.write_exit_points(cell, config.out / f"exit_points_{stem}.{config.fmt}",
                                                        config.fmt))
    return written


def cmd_verify(config: RunConfig) -> Path:
    """
    Run the convergence report and check it against the thresholds.
    :return: path of the report file.
    :raises VerificationFailure: naming every criterion that failed.
    """
    thresholds = export.load_thresholds(config.thresholds) if config.thresholds else experiments.DEFAULT_THRESHOLDS
    report = experiments.convergence_report(config.ns, config.alphas, config.trials, config.epsilons,
                                            config.seed, config.grid, workers=config.workers)
    path = export.write_report(report, config.out / f"report.{config.fmt}", config.fmt)
    if config.calibrate:
        export.write_thresholds(experiments.calibrate_thresholds(report), config.out / "thresholds.json")
        return path

    failures = experiments.check_report(report, thresholds)
    if failures:
        raise experiments.VerificationFailure(failures)
    logger.info("all %d cells pass", len(report.cells))
    return path


def cmd_selftest(config: RunConfig) -> int:
    failed = run_selftest()
    if failed:
        logger.error("selftest failed: %s", ", ".join(failed))
        return EXIT_VERIFY
    return EXIT_OK


def run(config: RunConfig) -> int:
    if config.command == "curve":
        cmd_curve(config)
    elif config.command == "simulate":
        cmd_simulate(config)
    elif config.command == "verify":
        cmd_verify(config)
    else:
        return cmd_selftest(config)
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    try:
        config = parse_config(argv)
    except SystemExit as error:
        return EXIT_USAGE if error.code else EXIT_OK
    except UsageError as error:
        logging.basicConfig(level=logging.INFO)
        logger.error("usage error: %s", error)
        return EXIT_USAGE

    logging.basicConfig(level=logging.DEBUG if config.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return run(config)
    except experiments.VerificationFailure as error:
        for failure in error.failures:
            logger.error("verification failed [%s]: %s", failure.criterion, failure.detail)
        return EXIT_VERIFY
    except (analytics.DomainError, export.ThresholdsFileError) as error:
        logger.error("usage error: %s", error)
        return EXIT_USAGE
    except OSError as error:
        logger.error("I/O error: %s", error)
        return EXIT_IO


if __name__ == '__main__':
    sys.exit(main())
