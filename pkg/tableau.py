from __future__ import annotations

import logging
from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from math import factorial, isfinite, prod
from typing import Iterable, Iterator, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class TableauError(ValueError):
    """Base class for malformed tableaux and bad insertion inputs."""


class DuplicateEntryError(TableauError):
    def __init__(self, value):
        super().__init__(f"entry {value!r} is already present; tableau entries must be distinct")
        self.value = value


class InvariantViolationError(TableauError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(str(violation) for violation in self.violations))


@dataclass(frozen=True)
class Violation:
    """
    One failed tableau invariant. Rows and columns are 1-based, row 1 is the bottom row.
    """
    invariant: str
    row: int
    column: int
    message: str

    def __str__(self):
        return f"{self.invariant} at row {self.row}, column {self.column}: {self.message}"


@dataclass(frozen=True)
class ShapePartition:
    """
    Young diagram given by its row lengths, longest row first.
    """
    parts: tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(part) for part in self.parts)
        object.__setattr__(self, "parts", parts)
        if any(part < 1 for part in parts):
            raise TableauError(f"partition parts must be positive, got {parts}")
        if any(later > earlier for earlier, later in zip(parts, parts[1:])):
            raise TableauError(f"partition parts must be weakly decreasing, got {parts}")

    def __iter__(self) -> Iterator[int]:
        return iter(self.parts)

    def __len__(self) -> int:
        return len(self.parts)

    @property
    def order(self) -> int:
        return sum(self.parts)

    def conjugate(self) -> ShapePartition:
        """
        Column lengths of the diagram.
        """
        if not self.parts:
            return ShapePartition()
        return ShapePartition(tuple(sum(1 for part in self.parts if part > column)
                                    for column in range(self.parts[0])))

    def contains(self, other: ShapePartition) -> bool:
        if len(other) > len(self):
            return False
        return all(inner <= outer for inner, outer in zip(other.parts, self.parts))

    def dimension(self) -> int:
        """
        Number of standard Young tableaux of this shape, by the hook-length formula.
        :return: n! divided by the product of all hook lengths.
        """
        columns = self.conjugate().parts
        hooks = (part - j + columns[j] - i - 1
                 for i, part in enumerate(self.parts) for j in range(part))
        return factorial(self.order) // prod(hooks)

    def plancherel_probability(self) -> float:
        """
        Probability dim(λ)²/n! of this shape under the Plancherel measure of order n.
        """
        return self.dimension() ** 2 / factorial(self.order)


def partitions(n: int, largest: int | None = None) -> Iterator[ShapePartition]:
    """
    All partitions of n in reverse lexicographic order, (n) first.
    :param n: order of the partitions.
    :param largest: upper bound on the first part (used by the recursion).
    """
    if n < 0:
        raise TableauError(f"cannot partition a negative number, got {n}")
    largest = n if largest is None else min(largest, n)
    if n == 0:
        yield ShapePartition()
        return
    for first in range(largest, 0, -1):
        for rest in partitions(n - first, first):
            yield ShapePartition((first,) + rest.parts)


@dataclass(frozen=True)
class BumpingRoute:
    """
    Column indices b(1) >= b(2) >= ... >= b(k) of the boxes visited by one insertion,
    one per row, the last one being the newly added box.
    """
    columns: tuple[int, ...]

    def __post_init__(self):
        columns = tuple(int(column) for column in self.columns)
        object.__setattr__(self, "columns", columns)
        if not columns:
            raise TableauError("a bumping route visits at least one row")
        if columns[-1] < 1:
            raise TableauError(f"route columns are 1-based, got {columns}")
        if any(later > earlier for earlier, later in zip(columns, columns[1:])):
            raise TableauError(f"route columns must be nonincreasing, got {columns}")

    def __len__(self) -> int:
        return len(self.columns)

    @property
    def length(self) -> int:
        return len(self.columns)

    def positions(self) -> list[tuple[int, int]]:
        """
        Route boxes as (column, row) pairs, 1-based.
        """
        return [(column, row) for row, column in enumerate(self.columns, start=1)]

    @property
    def final_box(self) -> tuple[int, int]:
        return self.columns[-1], len(self.columns)


class IncreasingTableau:
    """
    Rows of strictly increasing reals, row 1 (the bottom row) stored first.

    The constructor copies the rows but does not check them; use from_rows to get
    a validated tableau, or validate() to list what is wrong with one.
    """

    def __init__(self, rows: Iterable[Sequence[float]] = ()):
        self.rows = [list(row) for row in rows]

    @classmethod
    def from_rows(cls, rows: Iterable[Sequence[float]]) -> IncreasingTableau:
        tableau = cls(rows)
        violations = validate(tableau)
        if violations:
            raise InvariantViolationError(violations)
        return tableau

    def copy(self) -> IncreasingTableau:
        return IncreasingTableau(self.rows)

    @property
    def order(self) -> int:
        return sum(len(row) for row in self.rows)

    def is_empty(self) -> bool:
        return not self.rows

    def entries(self) -> list[float]:
        return [entry for row in self.rows for entry in row]

    def entry(self, column: int, row: int) -> float:
        """
        Entry at 1-based (column, row).
        """
        return self.rows[row - 1][column - 1]

    def contains_box(self, column: int, row: int) -> bool:
        return 1 <= row <= len(self.rows) and 1 <= column <= len(self.rows[row - 1])

    def __eq__(self, other):
        if not isinstance(other, IncreasingTableau):
            return NotImplemented
        return self.rows == other.rows

    def __repr__(self):
        return f"IncreasingTableau({self.rows!r})"

    def __str__(self):
        # printed top row first, the way the diagram is drawn
        return "\n".join(" ".join(f"{entry:g}" for entry in row) for row in reversed(self.rows))


def shape(tableau: IncreasingTableau) -> ShapePartition:
    return ShapePartition(tuple(len(row) for row in tableau.rows))


def validate(tableau: IncreasingTableau) -> list[Violation]:
    """
    Check every IncreasingTableau invariant.
    :param tableau: tableau to check, possibly malformed.
    :return: list of violations, empty iff the tableau is valid.
    """
    violations = []
    rows = [np.asarray(row, dtype=float) for row in tableau.rows]

    for i, row in enumerate(rows, start=1):
        if row.size == 0:
            violations.append(Violation("shape", i, 1, "row is empty"))
            continue
        if i > 1 and row.size > rows[i - 2].size:
            violations.append(Violation("shape", i, rows[i - 2].size + 1,
                                        f"row {i} is longer than row {i - 1}"))
        if not np.all(np.isfinite(row)):
            column = int(np.argmin(np.isfinite(row))) + 1
            violations.append(Violation("finite", i, column, "entry is not a finite real"))
        for column in np.flatnonzero(np.diff(row) <= 0) + 2:
            violations.append(Violation("row_increasing", i, int(column),
                                        f"{row[column - 1]!r} does not exceed {row[column - 2]!r}"))

    for i in range(1, len(rows)):
        width = min(rows[i].size, rows[i - 1].size)
        below, above = rows[i - 1][:width], rows[i][:width]
        for column in np.flatnonzero(above <= below) + 1:
            violations.append(Violation("column_increasing", i + 1, int(column),
                                        f"{above[column - 1]!r} does not exceed "
                                        f"{below[column - 1]!r} below it"))

    if rows:
        values, counts = np.unique(np.concatenate(rows), return_counts=True)
        for value in values[counts > 1]:
            row, column = _locate(tableau, value)
            violations.append(Violation("distinct", row, column, f"{value!r} occurs more than once"))

    return violations


def _locate(tableau, value):
    for i, row in enumerate(tableau.rows, start=1):
        for j, entry in enumerate(row, start=1):
            if entry == value:
                return i, j
    return 0, 0


def _contains_value(rows, z):
    for row in rows:
        if row[0] > z:
            # every higher row starts above this one
            return False
        j = bisect_left(row, z)
        if j < len(row) and row[j] == z:
            return True
    return False


def insert_inplace(tableau: IncreasingTableau, z: float, check_distinct: bool = True) -> BumpingRoute:
    """
    Schensted row insertion of z, mutating the given tableau.
    :param tableau: valid tableau owned by the caller.
    :param z: value to insert, distinct from every entry.
    :param check_distinct: reject z if it already occurs in the tableau.
    :return: the bumping route, 1-based columns.
    """
    if not isfinite(z):
        raise TableauError(f"inserted value must be a finite real, got {z!r}")
    rows = tableau.rows
    if check_distinct and _contains_value(rows, z):
        raise DuplicateEntryError(z)

    columns = []
    for row in rows:
        j = bisect_right(row, z)
        columns.append(j + 1)
        if j == len(row):
            row.append(z)
            return BumpingRoute(tuple(columns))
        row[j], z = z, row[j]
    rows.append([z])
    columns.append(1)
    return BumpingRoute(tuple(columns))


def insert(tableau: IncreasingTableau, z: float) -> tuple[IncreasingTableau, BumpingRoute]:
    """
    Insert z into a copy of the tableau; the argument is left untouched.
    :return: (new tableau, bumping route).
    """
    violations = validate(tableau)
    if violations:
        raise InvariantViolationError(violations)
    result = tableau.copy()
    route = insert_inplace(result, z)
    return result, route


def bumping_route(tableau: IncreasingTableau, z: float) -> BumpingRoute:
    """
    Route that inserting z would follow, without building the new tableau.
    """
    rows = tableau.rows
    if _contains_value(rows, z):
        raise DuplicateEntryError(z)
    columns = []
    for row in rows:
        j = bisect_right(row, z)
        columns.append(j + 1)
        if j == len(row):
            return BumpingRoute(tuple(columns))
        z = row[j]
    columns.append(1)
    return BumpingRoute(tuple(columns))


def insertion_tableau(sequence: Sequence[float]) -> IncreasingTableau:
    """
    P(x_1, ..., x_n): insert the sequence one value at a time into the empty tableau.
    :param sequence: pairwise distinct finite reals.
    :return: the insertion tableau of order len(sequence).
    """
    values = np.asarray(sequence, dtype=float).ravel()
    if not np.all(np.isfinite(values)):
        raise TableauError("sequence entries must be finite reals")
    unique, counts = np.unique(values, return_counts=True)
    if np.any(counts > 1):
        raise DuplicateEntryError(float(unique[np.argmax(counts > 1)]))

    rows = []
    for z in values.tolist():
        for row in rows:
            j = bisect_right(row, z)
            if j == len(row):
                row.append(z)
                break
            row[j], z = z, row[j]
        else:
            rows.append([z])

    tableau = IncreasingTableau()
    tableau.rows = rows
    logger.debug("built insertion tableau of order %d with %d rows", len(values), len(rows))
    return tableau


def longest_increasing_subsequence_length(sequence: Sequence[float]) -> int:
    """
    Patience sorting: the number of piles equals the length of a longest strictly
    increasing subsequence, which is also the first row of the insertion tableau.
    """
    piles = []
    for value in sequence:
        j = bisect_left(piles, value)
        if j == len(piles):
            piles.append(value)
        else:
            piles[j] = value
    return len(piles)
