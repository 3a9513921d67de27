from collections import Counter
from itertools import permutations
from math import factorial

import pytest
from hypothesis import example, given, strategies as st

import tableau
from selftest import WORKED_EXAMPLE_RESULT, WORKED_EXAMPLE_ROUTE, WORKED_EXAMPLE_ROWS, brute_force_lis_length
from tableau import (BumpingRoute, DuplicateEntryError, IncreasingTableau, InvariantViolationError,
                     ShapePartition, TableauError, partitions)

distinct_values = st.lists(st.integers(min_value=1, max_value=10 ** 6), unique=True, max_size=60).map(
    lambda values: [value / 10 ** 6 for value in values])


def with_fresh_value(f):
    """Tableau built from distinct values plus one more value that is not among them."""
    strategy = distinct_values.flatmap(
        lambda values: st.tuples(st.just(values),
                                 st.integers(1, 10 ** 6).map(lambda k: k / 10 ** 6).filter(lambda z: z not in values)))
    return given(case=strategy)(f)


def test_worked_example_insertion():
    result, route = tableau.insert(IncreasingTableau.from_rows(WORKED_EXAMPLE_ROWS), 7)
    assert route.columns == WORKED_EXAMPLE_ROUTE
    assert result.rows == WORKED_EXAMPLE_RESULT
    assert route.final_box == (2, 5)


def test_insert_into_empty_tableau():
    result, route = tableau.insert(IncreasingTableau(), 0.5)
    assert route.columns == (1,)
    assert result.rows == [[0.5]]


def test_insert_largest_value_appends_to_first_row():
    result, route = tableau.insert(IncreasingTableau([[0.1, 0.2, 0.3]]), 0.9)
    assert route.columns == (4,)
    assert result.rows == [[0.1, 0.2, 0.3, 0.9]]


def test_insert_leaves_argument_untouched():
    original = IncreasingTableau.from_rows(WORKED_EXAMPLE_ROWS)
    tableau.insert(original, 7)
    assert original.rows == WORKED_EXAMPLE_ROWS


def test_insert_rejects_duplicate_without_mutation():
    t = IncreasingTableau.from_rows(WORKED_EXAMPLE_ROWS)
    with pytest.raises(DuplicateEntryError) as info:
        tableau.insert_inplace(t, 13)
    assert info.value.value == 13
    assert t.rows == WORKED_EXAMPLE_ROWS


@pytest.mark.parametrize("z", [float("nan"), float("inf")])
def test_insert_rejects_non_finite(z):
    with pytest.raises(TableauError):
        tableau.insert(IncreasingTableau([[0.1]]), z)


def test_insert_rejects_invalid_tableau():
    with pytest.raises(InvariantViolationError) as info:
        tableau.insert(IncreasingTableau([[2], [1]]), 0.5)
    assert info.value.violations[0].invariant == "column_increasing"


def test_insertion_tableau_of_monotone_sequences():
    assert tableau.insertion_tableau([0.1, 0.2, 0.3]).rows == [[0.1, 0.2, 0.3]]
    assert tableau.insertion_tableau([0.3, 0.2, 0.1]).rows == [[0.1], [0.2], [0.3]]


def test_insertion_tableau_rejects_repeats():
    with pytest.raises(DuplicateEntryError):
        tableau.insertion_tableau([0.1, 0.4, 0.1])


def test_shape_examples():
    assert tableau.shape(IncreasingTableau.from_rows(WORKED_EXAMPLE_ROWS)).parts == (7, 5, 4, 3, 1)
    assert tableau.shape(IncreasingTableau()).parts == ()
    assert tableau.shape(IncreasingTableau([[1, 2, 3]])).parts == (3,)


def test_validate_accepts_valid_tableau():
    assert tableau.validate(IncreasingTableau([[1, 3], [2]])) == []
    assert tableau.validate(IncreasingTableau()) == []


@pytest.mark.parametrize("rows, invariant, row, column", [
    ([[2], [1]], "column_increasing", 2, 1),
    ([[1, 1]], "row_increasing", 1, 2),
    ([[1, 3], [2, 4, 5]], "shape", 2, 3),
    ([[1, 2], []], "shape", 2, 1),
    ([[1, float("nan")]], "finite", 1, 2),
    ([[1, 2], [3], [3]], "distinct", 2, 1),
])
def test_validate_reports_violation(rows, invariant, row, column):
    violations = tableau.validate(IncreasingTableau(rows))
    assert (invariant, row, column) in [(v.invariant, v.row, v.column) for v in violations]


def test_from_rows_raises_on_violation():
    with pytest.raises(InvariantViolationError):
        IncreasingTableau.from_rows([[2], [1]])


def test_bumping_route_rejects_nonincreasing_columns():
    with pytest.raises(TableauError):
        BumpingRoute((1, 2))
    with pytest.raises(TableauError):
        BumpingRoute(())


@with_fresh_value
@example(case=([], 0.5))
def test_insert_adds_one_box_at_route_end(case):
    values, z = case
    before = tableau.insertion_tableau(values)
    after, route = tableau.insert(before, z)

    assert tableau.validate(after) == []
    assert after.order == before.order + 1
    assert Counter(after.entries()) == Counter(before.entries() + [z])
    assert all(a >= b for a, b in zip(route.columns, route.columns[1:]))

    grown = list(tableau.shape(before).parts) + [0]
    column, row = route.final_box
    grown[row - 1] += 1
    assert tuple(part for part in grown if part) == tableau.shape(after).parts
    assert not before.contains_box(column, row) and after.contains_box(column, row)


@with_fresh_value
def test_bumping_route_matches_insert_and_leaves_tableau(case):
    values, z = case
    before = tableau.insertion_tableau(values)
    rows = [list(row) for row in before.rows]
    assert tableau.bumping_route(before, z) == tableau.insert(before, z)[1]
    assert before.rows == rows


@given(values=distinct_values, data=st.data())
def test_larger_value_takes_weakly_right_and_shorter_route(values, data):
    t = tableau.insertion_tableau(values)
    low, high = sorted(data.draw(st.lists(st.integers(1, 10 ** 6).map(lambda k: k / 10 ** 6 + 0.5e-6),
                                          min_size=2, max_size=2, unique=True)))
    low_route, high_route = tableau.bumping_route(t, low), tableau.bumping_route(t, high)
    assert low_route.length >= high_route.length
    assert all(h >= lo for lo, h in zip(low_route.columns, high_route.columns))


@given(values=distinct_values)
def test_extreme_values(values):
    t = tableau.insertion_tableau(values)
    below = tableau.bumping_route(t, 0.0)
    assert below.columns == (1,) * (len(t.rows) + 1)
    above = tableau.bumping_route(t, 2.0)
    assert above.columns == (len(t.rows[0]) + 1 if t.rows else 1,)


@pytest.mark.parametrize("size", range(1, 8))
def test_first_row_is_longest_increasing_subsequence(size):
    for permutation in permutations(range(1, size + 1)):
        lis = brute_force_lis_length(permutation)
        assert len(tableau.insertion_tableau(permutation).rows[0]) == lis
        assert tableau.longest_increasing_subsequence_length(permutation) == lis


@given(values=distinct_values)
def test_patience_sorting_matches_first_row(values):
    expected = len(tableau.insertion_tableau(values).rows[0]) if values else 0
    assert tableau.longest_increasing_subsequence_length(values) == expected


def test_partitions_in_reverse_lexicographic_order():
    assert [p.parts for p in partitions(4)] == [(4,), (3, 1), (2, 2), (2, 1, 1), (1, 1, 1, 1)]
    assert [p.parts for p in partitions(0)] == [()]
    assert len(list(partitions(10))) == 42


@pytest.mark.parametrize("parts, dimension", [((2, 1), 2), ((3, 2, 1), 16), ((4,), 1), ((2, 2), 2), ((3, 1), 3)])
def test_hook_length_dimension(parts, dimension):
    assert ShapePartition(parts).dimension() == dimension


@pytest.mark.parametrize("n", range(1, 9))
def test_plancherel_probabilities_sum_to_one(n):
    assert sum(p.dimension() ** 2 for p in partitions(n)) == factorial(n)
    assert sum(p.plancherel_probability() for p in partitions(n)) == pytest.approx(1.0)


def test_shape_partition_helpers():
    shape = ShapePartition((3, 1))
    assert shape.conjugate().parts == (2, 1, 1)
    assert shape.order == 4
    assert shape.contains(ShapePartition((2, 1)))
    assert not shape.contains(ShapePartition((2, 2)))
    with pytest.raises(TableauError):
        ShapePartition((1, 2))
