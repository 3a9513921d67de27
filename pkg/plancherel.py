from __future__ import annotations

import logging
from bisect import bisect_right
from collections import Counter
from dataclasses import dataclass
from itertools import takewhile
from math import sqrt
from typing import Iterable, Sequence

import numpy as np

from analytics import DomainError
from tableau import (IncreasingTableau, InvariantViolationError, ShapePartition, TableauError,
                     insertion_tableau, shape, validate)

logger = logging.getLogger(__name__)

SEED_LIMIT = 2 ** 64


def child_seed(master_seed: int, index: int) -> int:
    """
    64-bit seed of the index-th child stream of a master seed.
    """
    sequence = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    return int(sequence.generate_state(1, dtype=np.uint64)[0])


class SeededRng:
    """
    PCG64 stream identified by a 64-bit seed. The same seed always yields the same draws.
    """

    def __init__(self, seed: int):
        seed = int(seed)
        if not 0 <= seed < SEED_LIMIT:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))

    def child(self, index: int) -> SeededRng:
        return SeededRng(child_seed(self.seed, index))

    def __repr__(self):
        return f"SeededRng({self.seed})"


def uniform_draws(n: int, rng: SeededRng, exclude: Iterable[float] = ()) -> np.ndarray:
    """
    n distinct draws from the uniform distribution on the open interval (0, 1).

    Zeros, repeated values and values listed in exclude are redrawn, which keeps the
    distinct-entries precondition of insertion without aborting a long run.
    :param n: number of draws.
    :param rng: stream to draw from.
    :param exclude: values the draws must avoid, e.g. a value inserted afterwards.
    """
    if n < 0:
        raise ValueError(f"number of draws must be non-negative, got {n}")
    draws = rng.generator.random(n)
    excluded = np.asarray(list(exclude), dtype=float)
    while True:
        bad = draws <= 0.0
        if excluded.size:
            bad |= np.isin(draws, excluded)
        order = np.argsort(draws, kind="stable")
        repeated = np.flatnonzero(draws[order][1:] == draws[order][:-1]) + 1
        bad[order[repeated]] = True
        count = int(np.count_nonzero(bad))
        if not count:
            return draws
        logger.warning("redrawing %d colliding uniform draws", count)
        draws[bad] = rng.generator.random(count)


def sample_uniform_tableau(n: int, rng: SeededRng) -> IncreasingTableau:
    """
    Insertion tableau T_n of n i.i.d. uniform draws.
    """
    return insertion_tableau(uniform_draws(n, rng))


def standardize(tableau: IncreasingTableau) -> IncreasingTableau:
    """
    Replace every entry by its rank among all entries, giving a standard Young tableau.
    :param tableau: valid increasing tableau with n boxes.
    :return: tableau of the same shape with entries 1..n in the same relative order.
    """
    violations = validate(tableau)
    if violations:
        raise InvariantViolationError(violations)
    entries = np.asarray(tableau.entries(), dtype=float)
    ranks = np.empty(entries.size, dtype=int)
    ranks[np.argsort(entries)] = np.arange(1, entries.size + 1)

    rows, start = [], 0
    for length in shape(tableau):
        rows.append(ranks[start:start + length].tolist())
        start += length
    return IncreasingTableau(rows)


def sample_plancherel(n: int, rng: SeededRng) -> IncreasingTableau:
    """
    Plancherel-random standard tableau of order n.
    """
    return standardize(sample_uniform_tableau(n, rng))


@dataclass(frozen=True)
class SublevelTableau:
    tableau: IncreasingTableau
    threshold: float

    @property
    def order(self) -> int:
        return self.tableau.order


def _cut(tableau, limit):
    cut = (row[:bisect_right(row, limit)] for row in tableau.rows)
    # rows above an empty one are empty too
    return IncreasingTableau(takewhile(len, cut))


def sublevel(tableau: IncreasingTableau, t: float) -> SublevelTableau:
    """
    Boxes of the tableau whose entries are at most t, in their original positions.
    :param tableau: valid increasing tableau.
    :param t: threshold in (0, 1].
    """
    if not 0.0 < t <= 1.0:
        raise DomainError(f"sublevel threshold must lie in (0, 1], got {t!r}")
    return SublevelTableau(_cut(tableau, t), float(t))


def rescale_entries(sublevel_tableau: SublevelTableau) -> IncreasingTableau:
    """
    Divide every entry by the threshold, mapping the sublevel tableau back into (0, 1].
    """
    t = sublevel_tableau.threshold
    return IncreasingTableau([entry / t for entry in row] for row in sublevel_tableau.tableau.rows)


def truncate(standard_tableau: IncreasingTableau, k: int) -> IncreasingTableau:
    """
    k-sublevel of a standard tableau: the boxes holding 1..k.
    """
    if not 0 <= k <= standard_tableau.order:
        raise DomainError(f"k must lie in [0, {standard_tableau.order}], got {k}")
    return _cut(standard_tableau, k)


def destandardize(standard_tableau: IncreasingTableau, values: Sequence[float]) -> IncreasingTableau:
    """
    Replace each entry p of a standard tableau by the p-th smallest of values.
    """
    ordered = np.sort(np.asarray(values, dtype=float))
    if ordered.size < standard_tableau.order:
        raise TableauError(f"need {standard_tableau.order} values, got {ordered.size}")
    return IncreasingTableau([float(ordered[p - 1]) for p in row] for row in standard_tableau.rows)


def conditioned_sublevel_shapes(n: int, t: float, k: int, trials: int, rng: SeededRng,
                                window: int = 0) -> list[ShapePartition]:
    """
    Shapes of the rescaled t-sublevel of T_{n-1}, keeping only trials with |T^(t)| within k +- window.
    :return: one shape per accepted trial, in trial order.
    """
    accepted = []
    for _ in range(trials):
        sub = sublevel(sample_uniform_tableau(n - 1, rng), t)
        if abs(sub.order - k) <= window:
            accepted.append(shape(standardize(rescale_entries(sub))))
    logger.info("conditioning on |T^(t)| = %d +- %d accepted %d of %d trials",
                k, window, len(accepted), trials)
    return accepted


def shape_frequencies(shapes: Iterable[ShapePartition]) -> dict[ShapePartition, float]:
    counts = Counter(shapes)
    total = sum(counts.values())
    return {key: count / total for key, count in counts.items()}


def exceeds_row_column_bound(partition: ShapePartition, factor: float = 3.0) -> bool:
    """
    True if the diagram has a row or a column of length at least factor * sqrt(n).
    """
    if not partition.parts:
        return False
    bound = factor * sqrt(partition.order)
    return partition.parts[0] >= bound or len(partition) >= bound
