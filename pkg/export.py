"""
CSV and JSON writers for curves, routes, exit points, reports and thresholds.

CSV: header row, UTF-8, '.' decimals, LF line endings, reals with 17 significant digits.
JSON: one object per file carrying a schema_version field.
"""
from __future__ import annotations

import json
import logging
from math import sqrt
from pathlib import Path
from typing import Sequence

import pandas as pd

from analytics import LimitCurve
from experiments import ConvergenceReport, Thresholds, TrialResult

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
FORMATS = ("csv", "json")
FLOAT_FORMAT = "%.17g"


def _write_csv(frame: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")
    logger.info("wrote %s (%d rows)", path, len(frame))
    return path


def _write_json(payload: dict, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")
    logger.info("wrote %s", path)
    return path


def _check_format(fmt):
    if fmt not in FORMATS:
        raise ValueError(f"unsupported format {fmt!r}, expected one of {FORMATS}")


def write_curve(curve: LimitCurve, path: Path, fmt: str = "csv") -> Path:
    """
    One limit curve: columns s, beta, kappa, U, V.
    """
    _check_format(fmt)
    u, v = curve.endpoint_uv
    if fmt == "json":
        return _write_json({
            "schema_version": SCHEMA_VERSION,
            "kind": "limit_curve",
            "alpha": curve.alpha,
            "kappa": curve.kappa,
            "endpoint_uv": [u, v],
            "samples": [[s, b] for s, b in curve.samples],
        }, path)
    frame = pd.DataFrame({"s": curve.s, "beta": curve.beta})
    frame["kappa"], frame["U"], frame["V"] = curve.kappa, u, v
    return _write_csv(frame, path)


def write_routes(results: Sequence[TrialResult], path: Path, fmt: str = "csv") -> Path:
    """
    Raw (m, b(m)) and scaled (m/sqrt(n), b(m)/sqrt(n)) route of every trial.
    """
    _check_format(fmt)
    if fmt == "json":
        return _write_json({
            "schema_version": SCHEMA_VERSION,
            "kind": "routes",
            "trials": [{
                "trial": result.trial,
                "seed": result.seed,
                "n": result.n,
                "alpha": result.alpha,
                "columns": list(result.route.columns),
                "route_length_scaled": result.route_length_scaled,
                "sup_distance": result.sup_distance,
                "endpoint_uv_scaled": list(result.endpoint_uv_scaled),
            } for result in results],
        }, path)
    records = []
    for result in results:
        root = sqrt(result.n)
        for m, column in enumerate(result.route.columns, start=1):
            records.append((result.trial, result.seed, result.n, result.alpha, m, column,
                            m / root, column / root))
    frame = pd.DataFrame.from_records(records, columns=["trial", "seed", "n", "alpha", "m", "column",
                                                        "m_scaled", "column_scaled"])
    return _write_csv(frame.astype({"seed": "uint64"}), path)


def write_exit_points(results: Sequence[TrialResult], path: Path, fmt: str = "csv") -> Path:
    """
    Sublevel exit points Phi(t) of every trial that recorded them.
    """
    _check_format(fmt)
    recorded = [result for result in results if result.exit_points is not None]
    if fmt == "json":
        return _write_json({
            "schema_version": SCHEMA_VERSION,
            "kind": "exit_points",
            "trials": [{
                "trial": result.trial,
                "n": result.n,
                "alpha": result.alpha,
                "points": [list(point) for point in result.exit_points],
                "exit_deviation": result.exit_deviation,
            } for result in recorded],
        }, path)
    records = []
    for result in recorded:
        root = sqrt(result.n)
        for t, column, row in result.exit_points:
            records.append((result.trial, result.n, result.alpha, t, column, row, column / root, row / root))
    frame = pd.DataFrame.from_records(records, columns=["trial", "n", "alpha", "t", "column", "row",
                                                        "x_scaled", "y_scaled"])
    return _write_csv(frame, path)


def write_report(report: ConvergenceReport, path: Path, fmt: str = "json") -> Path:
    """
    Convergence report; CSV flattens each cell into one row.
    """
    _check_format(fmt)
    if fmt == "json":
        return _write_json(report.to_dict(), path)
    rows = []
    for cell in report.cells:
        row = {
            "n": cell.n,
            "alpha": cell.alpha,
            "trials": cell.trials,
            "kappa": cell.kappa,
            "sup_distance_mean": cell.sup_distance_mean,
            "sup_distance_median": cell.sup_distance_median,
            "route_length_scaled_mean": cell.route_length_scaled_mean,
            "kappa_deviation_mean": cell.kappa_deviation_mean,
            "endpoint_u_mean": cell.endpoint_mean[0],
            "endpoint_v_mean": cell.endpoint_mean[1],
            "endpoint_distance": cell.endpoint_distance,
        }
        row.update({f"sup_distance_q{q!r}": value for q, value in cell.sup_distance_quantiles.items()})
        row.update({f"p_sup_gt_{e!r}": p for e, p in cell.sup_exceed_probability.items()})
        row.update({f"p_kappa_gt_{e!r}": p for e, p in cell.kappa_exceed_probability.items()})
        rows.append(row)
    return _write_csv(pd.DataFrame(rows), path)


def write_thresholds(thresholds: Thresholds, path: Path) -> Path:
    return _write_json(thresholds.to_dict(), path)


class ThresholdsFileError(ValueError):
    """A thresholds file that is not a usable thresholds table."""


def load_thresholds(path: Path) -> Thresholds:
    """
    Read a thresholds file written by write_thresholds.
    :raises OSError: when the file cannot be read.
    :raises ThresholdsFileError: naming the path, for anything else wrong with it.
    """
    with open(path, encoding="utf-8") as handle:
        try:
            data = json.load(handle)
        except (json.JSONDecodeError, UnicodeDecodeError) as error:
            raise ThresholdsFileError(f"{path}: not valid JSON ({error})") from error
    if not isinstance(data, dict):
        raise ThresholdsFileError(f"{path}: expected a JSON object")
    if data.get("schema_version") != SCHEMA_VERSION:
        raise ThresholdsFileError(f"{path}: unsupported thresholds schema version {data.get('schema_version')!r}")
    try:
        thresholds = Thresholds.from_dict(data)
    except (KeyError, TypeError, ValueError, AttributeError) as error:
        raise ThresholdsFileError(f"{path}: malformed thresholds table ({error!r})") from error
    for name, table in (("sup_distance", thresholds.sup_distance), ("kappa_statistic", thresholds.kappa_statistic)):
        if not table or min(table) < 1 or min(table.values()) <= 0.0:
            raise ThresholdsFileError(f"{path}: {name} needs at least one entry, with positive n and values")
    return thresholds
