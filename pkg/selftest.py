"""
Fast invariant suite behind `main.py selftest`: analytic identities, the worked
insertion example and the exhaustive longest-increasing-subsequence oracle.
"""
from __future__ import annotations

import logging
import math
from itertools import combinations, permutations

import numpy as np

import analytics
import tableau
from plancherel import SeededRng, uniform_draws

logger = logging.getLogger(__name__)

WORKED_EXAMPLE_ROWS = [[1, 2, 5, 8, 12, 15, 21], [3, 6, 9, 16, 19], [4, 11, 13, 18], [10, 17, 20], [14]]
WORKED_EXAMPLE_RESULT = [[1, 2, 5, 7, 12, 15, 21], [3, 6, 8, 16, 19], [4, 9, 13, 18], [10, 11, 20], [14, 17]]
WORKED_EXAMPLE_ROUTE = (4, 3, 2, 2, 2)
IDENTITY_TOLERANCE = 1e-12


class SelftestFailure(Exception):
    """A selftest check found a broken identity or invariant."""


def _require(condition, message):
    if not condition:
        raise SelftestFailure(message)


def brute_force_lis_length(sequence) -> int:
    for length in range(len(sequence), 0, -1):
        for indices in combinations(range(len(sequence)), length):
            chosen = [sequence[i] for i in indices]
            if all(a < b for a, b in zip(chosen, chosen[1:])):
                return length
    return 0


def _close(name, value, expected):
    _require(math.isclose(value, expected, abs_tol=IDENTITY_TOLERANCE), f"{name} = {value!r}, expected {expected!r}")


def check_omega():
    for u, expected in ((0.0, 4 / math.pi), (2.0, 2.0), (-2.0, 2.0)):
        _close(f"omega({u})", analytics.omega(u), expected)


def check_semicircle():
    for u, expected in ((0.0, 0.5), (-2.0, 0.0), (2.0, 1.0)):
        _close(f"F({u})", analytics.semicircle_cdf(u), expected)
    p = np.linspace(0.0, 1.0, 1001)
    error = float(np.max(np.abs(analytics.semicircle_cdf(analytics.semicircle_quantile(p)) - p)))
    _require(error <= 1e-10, f"F(F^-1(p)) is off by {error:.3g}")


def check_kappa():
    for alpha, expected in ((0.0, 2.0), (1.0, 0.0), (0.5, 2 / math.pi)):
        _close(f"kappa({alpha})", analytics.kappa(alpha), expected)


def check_beta():
    for alpha in (0.1, 0.3, 0.5, 0.7, 0.9):
        _close(f"beta({alpha}, 0)", analytics.beta(alpha, 0.0), 2 * math.sqrt(alpha))
    for s in np.linspace(0.0, 2.0, 11):
        _require(analytics.beta(0.0, s) == 0.0, f"beta(0, {s}) is not 0")


def check_worked_example():
    result, route = tableau.insert(tableau.IncreasingTableau(WORKED_EXAMPLE_ROWS), 7)
    _require(route.columns == WORKED_EXAMPLE_ROUTE, f"route {route.columns}, expected {WORKED_EXAMPLE_ROUTE}")
    _require(result.rows == WORKED_EXAMPLE_RESULT, f"tableau {result.rows}")


def check_route_monotone(trials=20, size=200):
    rng = SeededRng(0)
    for _ in range(trials):
        draws = uniform_draws(size + 1, rng)
        route = tableau.bumping_route(tableau.insertion_tableau(draws[:-1]), draws[-1])
        _require(all(a >= b for a, b in zip(route.columns, route.columns[1:])),
                 f"route columns increase: {route.columns}")


def make_lis_check(max_size):
    def check_lis_oracle():
        for size in range(1, max_size + 1):
            for permutation in permutations(range(1, size + 1)):
                first_row = tableau.insertion_tableau([float(x) for x in permutation]).rows[0]
                _require(len(first_row) == brute_force_lis_length(permutation), f"first row of {permutation}")
    return check_lis_oracle


def run_selftest(max_lis_size: int = 6) -> list[str]:
    """
    Run every check.
    :param max_lis_size: largest permutation size for the exhaustive oracle.
    :return: names of the failed checks.
    """
    checks = {
        "omega_identities": check_omega,
        "semicircle_identities": check_semicircle,
        "kappa_identities": check_kappa,
        "beta_identities": check_beta,
        "worked_example_insertion": check_worked_example,
        "route_monotone": check_route_monotone,
        "lis_oracle": make_lis_check(max_lis_size),
    }
    failed = []
    for name, check in checks.items():
        try:
            check()
        except (SelftestFailure, ValueError) as error:
            logger.error("selftest %s failed: %s", name, error)
            failed.append(name)
        else:
            logger.info("selftest %s passed", name)
    return failed
