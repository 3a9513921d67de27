"""
Monte Carlo comparison of bumping routes in T_{n-1} with the limiting curves beta_alpha.

A trial builds T_{n-1} from n-1 uniform draws, inserts alpha and measures the route
against the curve. Trials are independent given their seeds, and aggregation happens
in trial order, so the number of worker processes never changes a report.
"""
from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass, field
from math import sqrt
from multiprocessing import Pool
from typing import Iterable, Sequence

import numpy as np

import analytics
from analytics import DEFAULT_GRID_SIZE, DomainError, LimitCurve, sample_curve
from plancherel import SeededRng, child_seed, uniform_draws
from tableau import BumpingRoute, IncreasingTableau, TableauError, bumping_route, insertion_tableau

logger = logging.getLogger(__name__)

DEFAULT_EXIT_GRID = 64
INTERPOLATION_TOLERANCE = 1e-6
REPORT_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)

# Twice the worst median sup distance over alpha in {0.3, 0.5, 0.7} from the pilot
# `main.py verify --n 1000,10000,100000 --alpha 0.3,0.5,0.7 --trials 100 --seed 0 --calibrate`,
# whose medians were 0.14, 0.07 and 0.035. DESIGN.md records the run.
DEFAULT_SUP_DISTANCE_THRESHOLDS = {1000: 0.28, 10000: 0.14, 100000: 0.07}
# kappa statistic: 0.05 at n = 1e5 is the acceptance bound, the smaller n are looser
DEFAULT_KAPPA_THRESHOLDS = {1000: 0.3, 10000: 0.15, 100000: 0.05}


class CurveMismatchError(ValueError):
    pass


class VerificationFailure(Exception):
    def __init__(self, failures):
        self.failures = list(failures)
        super().__init__("; ".join(f"{failure.criterion}: {failure.detail}" for failure in self.failures))


@dataclass(frozen=True)
class TrialResult:
    n: int
    alpha: float
    seed: int
    trial: int
    route: BumpingRoute
    route_length_scaled: float
    sup_distance: float
    endpoint_uv_scaled: tuple[float, float]
    exit_points: tuple[tuple[float, int, int], ...] | None = None
    exit_deviation: float | None = None

    @property
    def kappa_deviation(self) -> float:
        return abs(self.route_length_scaled - analytics.kappa(self.alpha))


def scaled_endpoint(route: BumpingRoute, n: int) -> tuple[float, float]:
    """
    Last route box in rotated coordinates, ((b(k) - k) / sqrt(n), (b(k) + k) / sqrt(n)).
    """
    column, row = route.final_box
    root = sqrt(n)
    return (column - row) / root, (column + row) / root


def route_sup_distance(route: BumpingRoute, alpha: float, n: int, curve: LimitCurve,
                       tolerance: float = INTERPOLATION_TOLERANCE) -> float:
    """
    max over 1 <= m <= k of |b(m)/sqrt(n) - beta_alpha(min(m/sqrt(n), kappa(alpha)))|.

    Interpolates on the curve grid, calls beta() where the interpolation bound exceeds
    tolerance, then re-evaluates exactly every point that could still hold the maximum.
    :param route: bumping route of alpha.
    :param alpha: inserted value the curve was sampled for.
    :param n: scale, the order of the tableau after insertion.
    :param curve: LimitCurve for alpha.
    """
    if curve.alpha != float(alpha):
        raise CurveMismatchError(f"curve sampled for alpha={curve.alpha}, route inserted alpha={alpha}")
    root = sqrt(n)
    heights = np.minimum(np.arange(1, route.length + 1) / root, curve.kappa)
    columns = np.asarray(route.columns, dtype=float) / root

    values, bounds = curve.evaluate(heights, tolerance)
    distance = np.abs(columns - values)
    floor = float(np.max(distance - bounds))
    uncertain = (bounds > 0.0) & (distance + bounds >= floor)
    if np.any(uncertain):
        exact = np.array([analytics.beta(curve.alpha, s) for s in heights[uncertain]])
        distance[uncertain] = np.abs(columns[uncertain] - exact)
    return float(distance.max())


def _route_entries(tableau, route):
    entries = []
    for row, column in enumerate(route.columns[:-1], start=1):
        if not tableau.contains_box(column, row):
            raise TableauError(f"route box ({column}, {row}) is not a box of the tableau")
        entries.append(tableau.entry(column, row))
    column, row = route.final_box
    if tableau.contains_box(column, row):
        raise TableauError(f"final route box ({column}, {row}) is already occupied")
    return entries


def exit_points(tableau: IncreasingTableau, route: BumpingRoute, alpha: float,
                t_grid: Sequence[float]) -> list[tuple[float, int, int]]:
    """
    For each t, the first route box outside the t-sublevel tableau.

    Entries bumped along a route increase from row to row, so the first box outside
    T^(t) follows the number of bumped entries that are at most t.
    :param tableau: T_{n-1}, before alpha was inserted.
    :param route: route of alpha in this tableau.
    :param alpha: the inserted value.
    :param t_grid: values in [alpha, 1].
    :return: list of (t, column, row), 1-based.
    """
    entries = _route_entries(tableau, route)
    points = []
    for t in t_grid:
        if not alpha <= t <= 1.0:
            raise DomainError(f"t must lie in [alpha, 1] = [{alpha}, 1], got {t!r}")
        m = bisect_right(entries, t)
        points.append((float(t), route.columns[m], m + 1))
    return points


def exit_point_deviation(points: Sequence[tuple[float, int, int]], alpha: float, n: int) -> float:
    """
    max over the grid of the Euclidean distance between Phi(t)/sqrt(n) and (x_alpha(t), y_alpha(t)).
    """
    if not points:
        return 0.0
    grid = np.array([point[0] for point in points])
    scaled = np.array([(column, row) for _, column, row in points], dtype=float) / sqrt(n)
    limit = analytics.curve_xy(alpha, grid)
    return float(np.max(np.linalg.norm(scaled - limit, axis=1)))


def default_t_grid(alpha: float, size: int = DEFAULT_EXIT_GRID) -> np.ndarray:
    return np.linspace(alpha, 1.0, size)


def routes_are_coupled(lower: BumpingRoute, upper: BumpingRoute) -> bool:
    """
    Whether the route of a larger inserted value lies weakly to the right of the route of
    a smaller one in every common row, and is at most as long.
    """
    common = min(lower.length, upper.length)
    return (lower.length >= upper.length
            and all(upper.columns[j] >= lower.columns[j] for j in range(common)))


def evaluate_insertion(tableau: IncreasingTableau, alpha: float, n: int, seed: int,
                       curve: LimitCurve | None = None, t_grid: Sequence[float] | None = None,
                       trial: int = 0) -> TrialResult:
    """
    Insert alpha into a given T_{n-1} and measure the route.
    :param tableau: insertion tableau with n - 1 boxes, left untouched.
    :param alpha: inserted value, 0 <= alpha < 1.
    :param seed: seed the tableau was drawn with, recorded in the result.
    :param curve: LimitCurve for alpha, sampled on demand when omitted.
    :param t_grid: t values for the exit points, none recorded when omitted.
    """
    curve = sample_curve(alpha) if curve is None else curve
    route = bumping_route(tableau, alpha)
    points = deviation = None
    if t_grid is not None:
        points = tuple(exit_points(tableau, route, alpha, t_grid))
        deviation = exit_point_deviation(points, alpha, n)
    return TrialResult(n=n, alpha=float(alpha), seed=seed, trial=trial, route=route,
                       route_length_scaled=route.length / sqrt(n),
                       sup_distance=route_sup_distance(route, alpha, n, curve),
                       endpoint_uv_scaled=scaled_endpoint(route, n),
                       exit_points=points, exit_deviation=deviation)


def _check_trial_inputs(n, alphas):
    if n < 2:
        raise DomainError(f"n must be at least 2, got {n}")
    for alpha in alphas:
        if not 0.0 <= alpha < 1.0:
            raise DomainError(f"alpha must lie in [0, 1), got {alpha!r}")


def run_trial(n: int, alpha: float, rng: SeededRng, curve: LimitCurve | None = None,
              t_grid: Sequence[float] | None = None) -> TrialResult:
    """
    One Monte Carlo trial: T_{n-1} from n - 1 uniform draws of rng, then insert alpha.
    """
    _check_trial_inputs(n, (alpha,))
    tableau = insertion_tableau(uniform_draws(n - 1, rng, exclude=(alpha,)))
    return evaluate_insertion(tableau, alpha, n, rng.seed, curve, t_grid)


def _trial_task(task):
    n, alphas, trial, master_seed, grid_size, exit_grid = task
    seed = child_seed(master_seed, trial)
    rng = SeededRng(seed)
    tableau = insertion_tableau(uniform_draws(n - 1, rng, exclude=alphas))
    results = []
    for alpha in alphas:
        t_grid = default_t_grid(alpha, exit_grid) if exit_grid else None
        results.append(evaluate_insertion(tableau, alpha, n, seed, sample_curve(alpha, grid_size),
                                          t_grid, trial=trial))
    logger.debug("trial %d at n=%d done", trial, n)
    return results


def run_trials(n: int, alphas: Sequence[float], trials: int, master_seed: int,
               grid_size: int = DEFAULT_GRID_SIZE, exit_grid: int = 0,
               workers: int = 1) -> list[TrialResult]:
    """
    trials independent tableaux T_{n-1}; every alpha is inserted into each of them.

    Trial i uses the stream child_seed(master_seed, i) for every n and alpha, so
    routes of different alphas in one trial are coupled through the same tableau.
    :return: results ordered by alpha (as given, repeats dropped), then by trial.
    """
    alphas = tuple(dict.fromkeys(float(alpha) for alpha in alphas))
    _check_trial_inputs(n, alphas)
    if trials < 1:
        raise DomainError(f"trials must be at least 1, got {trials}")
    tasks = [(n, alphas, trial, master_seed, grid_size, exit_grid) for trial in range(trials)]
    if workers > 1:
        with Pool(workers) as pool:
            batches = pool.map(_trial_task, tasks, chunksize=1)
    else:
        batches = [_trial_task(task) for task in tasks]
    results = [result for batch in batches for result in batch]
    return sorted(results, key=lambda result: (alphas.index(result.alpha), result.trial))


@dataclass(frozen=True)
class CellSummary:
    n: int
    alpha: float
    trials: int
    kappa: float
    sup_distance_mean: float
    sup_distance_median: float
    sup_distance_quantiles: dict[float, float]
    route_length_scaled_mean: float
    kappa_deviation_mean: float
    sup_exceed_probability: dict[float, float]
    kappa_exceed_probability: dict[float, float]
    endpoint_mean: tuple[float, float]
    endpoint_distance: float
    exit_deviation_mean: float | None = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "alpha": self.alpha,
            "trials": self.trials,
            "kappa": self.kappa,
            "sup_distance_mean": self.sup_distance_mean,
            "sup_distance_median": self.sup_distance_median,
            "sup_distance_quantiles": {repr(q): value for q, value in self.sup_distance_quantiles.items()},
            "route_length_scaled_mean": self.route_length_scaled_mean,
            "kappa_deviation_mean": self.kappa_deviation_mean,
            "sup_exceed_probability": {repr(e): p for e, p in self.sup_exceed_probability.items()},
            "kappa_exceed_probability": {repr(e): p for e, p in self.kappa_exceed_probability.items()},
            "endpoint_mean": list(self.endpoint_mean),
            "endpoint_distance": self.endpoint_distance,
            "exit_deviation_mean": self.exit_deviation_mean,
        }


def summarize_cell(results: Sequence[TrialResult], epsilons: Sequence[float]) -> CellSummary:
    """
    Aggregate the trials of one (n, alpha) cell. The input order does not matter.
    """
    results = sorted(results, key=lambda result: result.trial)
    n, alpha = results[0].n, results[0].alpha
    sup = np.array([result.sup_distance for result in results])
    lengths = np.array([result.route_length_scaled for result in results])
    top = analytics.kappa(alpha)
    deviations = np.abs(lengths - top)
    endpoints = np.array([result.endpoint_uv_scaled for result in results])
    endpoint_mean = endpoints.mean(axis=0)
    exit_deviations = [result.exit_deviation for result in results if result.exit_deviation is not None]
    return CellSummary(
        n=n, alpha=alpha, trials=len(results), kappa=top,
        sup_distance_mean=float(sup.mean()),
        sup_distance_median=float(np.median(sup)),
        sup_distance_quantiles={q: float(np.quantile(sup, q)) for q in REPORT_QUANTILES},
        route_length_scaled_mean=float(lengths.mean()),
        kappa_deviation_mean=float(deviations.mean()),
        sup_exceed_probability={float(e): float(np.mean(sup > e)) for e in epsilons},
        kappa_exceed_probability={float(e): float(np.mean(deviations > e)) for e in epsilons},
        endpoint_mean=(float(endpoint_mean[0]), float(endpoint_mean[1])),
        endpoint_distance=float(np.linalg.norm(endpoint_mean - np.asarray(analytics.endpoint(alpha)))),
        exit_deviation_mean=float(np.mean(exit_deviations)) if exit_deviations else None,
    )


@dataclass(frozen=True)
class ConvergenceReport:
    n_list: tuple[int, ...]
    alpha_list: tuple[float, ...]
    trials: int
    epsilons: tuple[float, ...]
    master_seed: int
    cells: tuple[CellSummary, ...]
    trial_results: tuple[TrialResult, ...] = field(default=(), compare=False, repr=False)

    def cell(self, n: int, alpha: float) -> CellSummary:
        for cell in self.cells:
            if cell.n == n and cell.alpha == float(alpha):
                return cell
        raise KeyError((n, alpha))

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "convergence_report",
            "n_list": list(self.n_list),
            "alpha_list": list(self.alpha_list),
            "trials": self.trials,
            "epsilons": list(self.epsilons),
            "master_seed": self.master_seed,
            "cells": [cell.to_dict() for cell in self.cells],
        }


def convergence_report(n_list: Iterable[int], alpha_list: Iterable[float], trials: int,
                       epsilons: Iterable[float], master_seed: int,
                       grid_size: int = DEFAULT_GRID_SIZE, exit_grid: int = 0,
                       workers: int = 1, keep_trials: bool = False) -> ConvergenceReport:
    """
    Empirical versions of the probabilities in the limit theorem for every (n, alpha) cell.
    :param n_list: scales n, each at least 2.
    :param alpha_list: inserted values in [0, 1).
    :param trials: trials per cell.
    :param epsilons: thresholds for the exceedance probabilities.
    :param master_seed: the only source of randomness.
    :param keep_trials: keep the per-trial results in the report.
    """
    n_list = tuple(dict.fromkeys(int(n) for n in n_list))
    alpha_list = tuple(dict.fromkeys(float(alpha) for alpha in alpha_list))
    epsilons = tuple(sorted(float(e) for e in epsilons))
    cells, kept = [], []
    for n in n_list:
        results = run_trials(n, alpha_list, trials, master_seed, grid_size, exit_grid, workers)
        for alpha in alpha_list:
            cell_results = [result for result in results if result.alpha == alpha]
            summary = summarize_cell(cell_results, epsilons)
            logger.info("n=%d alpha=%g: median sup distance %.4f, mean |k/sqrt(n) - kappa| %.4f",
                        n, alpha, summary.sup_distance_median, summary.kappa_deviation_mean)
            cells.append(summary)
        if keep_trials:
            kept.extend(results)
    return ConvergenceReport(n_list=n_list, alpha_list=alpha_list, trials=trials, epsilons=epsilons,
                             master_seed=int(master_seed), cells=tuple(cells), trial_results=tuple(kept))


@dataclass(frozen=True)
class Thresholds:
    """
    Tolerances tabulated by n, interpolated linearly in log-log scale (and extrapolated
    along the nearest segment outside the table).
    """
    sup_distance: dict[int, float]
    kappa_statistic: dict[int, float]

    @staticmethod
    def _interpolate(table, n):
        keys = sorted(table)
        if len(keys) == 1:
            return table[keys[0]]
        logs = np.log([float(key) for key in keys])
        values = np.log([table[key] for key in keys])
        x = np.log(float(n))
        segment = int(np.clip(np.searchsorted(logs, x) - 1, 0, len(keys) - 2))
        slope = (values[segment + 1] - values[segment]) / (logs[segment + 1] - logs[segment])
        return float(np.exp(values[segment] + slope * (x - logs[segment])))

    def tau(self, n: int) -> float:
        return self._interpolate(self.sup_distance, n)

    def tau_kappa(self, n: int) -> float:
        return self._interpolate(self.kappa_statistic, n)

    def to_dict(self) -> dict:
        return {
            "schema_version": 1,
            "kind": "thresholds",
            "sup_distance": {str(n): value for n, value in sorted(self.sup_distance.items())},
            "kappa_statistic": {str(n): value for n, value in sorted(self.kappa_statistic.items())},
        }

    @classmethod
    def from_dict(cls, data: dict) -> Thresholds:
        return cls(sup_distance={int(n): float(v) for n, v in data["sup_distance"].items()},
                   kappa_statistic={int(n): float(v) for n, v in data["kappa_statistic"].items()})


DEFAULT_THRESHOLDS = Thresholds(DEFAULT_SUP_DISTANCE_THRESHOLDS, DEFAULT_KAPPA_THRESHOLDS)


def calibrate_thresholds(report: ConvergenceReport, slack: float = 2.0) -> Thresholds:
    """
    Thresholds from a pilot report: slack times the worst cell over alpha at each n.
    """
    sup, kappa_table = {}, {}
    for cell in report.cells:
        sup[cell.n] = max(sup.get(cell.n, 0.0), slack * cell.sup_distance_median)
        kappa_table[cell.n] = max(kappa_table.get(cell.n, 0.0), slack * cell.kappa_deviation_mean)
    # log-log interpolation needs positive values
    floor = np.finfo(float).tiny
    return Thresholds({n: max(v, floor) for n, v in sup.items()},
                      {n: max(v, floor) for n, v in kappa_table.items()})


@dataclass(frozen=True)
class Failure:
    criterion: str
    detail: str


def check_report(report: ConvergenceReport, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> list[Failure]:
    """
    Compare a report with the calibrated thresholds.
    :return: failures, each naming its criterion; empty when everything passes.
    """
    failures = []
    for cell in report.cells:
        tau = thresholds.tau(cell.n)
        if cell.sup_distance_median > tau:
            failures.append(Failure("sup_distance_threshold",
                                    f"n={cell.n} alpha={cell.alpha}: median {cell.sup_distance_median:.6g} > {tau:.6g}"))
        tau_kappa = thresholds.tau_kappa(cell.n)
        if cell.kappa_deviation_mean > tau_kappa:
            failures.append(Failure("kappa_statistic",
                                    f"n={cell.n} alpha={cell.alpha}: mean {cell.kappa_deviation_mean:.6g} > {tau_kappa:.6g}"))

    for alpha in report.alpha_list:
        medians = [(n, report.cell(n, alpha).sup_distance_median) for n in sorted(set(report.n_list))]
        for (n_small, small), (n_large, large) in zip(medians, medians[1:]):
            if not large < small:
                failures.append(Failure("sup_distance_decay",
                                        f"alpha={alpha}: median {large:.6g} at n={n_large} is not below "
                                        f"{small:.6g} at n={n_small}"))
    return failures
