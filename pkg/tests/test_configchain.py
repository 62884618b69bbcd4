from fractions import Fraction

import pytest

from moranweights.configchain import (
    Configuration,
    as_configuration,
    build_transition_matrix,
    configuration_of,
    falling,
    partitions,
)


def test_partition_counts():
    # p(k) for k = 1..10
    expected = [1, 2, 3, 5, 7, 11, 15, 22, 30, 42]
    for k, count in enumerate(expected, start=1):
        assert len(partitions(k)) == count


def test_partitions_are_sorted_and_unique():
    parts = partitions(6)
    assert parts[0].parts == (6,)
    assert parts[-1].parts == (1, 1, 1, 1, 1, 1)
    assert len({p.parts for p in parts}) == len(parts)
    for p in parts:
        assert p.total == 6


def test_configuration_validation_and_label():
    c = Configuration((3, 2, 2, 1))
    assert c.total == 8
    assert c.size == 4
    assert c.label == "{3,2,2,1}"
    assert str(c) == "{3,2,2,1}"
    with pytest.raises(ValueError):
        Configuration((1, 2))  # must be non-increasing
    with pytest.raises(ValueError):
        Configuration((2, 0))
    with pytest.raises(ValueError):
        Configuration(())


def test_as_configuration_sorts_tuples():
    assert as_configuration([1, 3, 2]).parts == (3, 2, 1)
    assert as_configuration(Configuration((2, 1))).parts == (2, 1)


def test_configuration_of_counts_multiplicities():
    assert configuration_of((4, 4, 7)).parts == (2, 1)
    assert configuration_of((1, 2, 3)).parts == (1, 1, 1)


def test_falling_factorial():
    assert falling(6, 3) == 120
    assert falling(6, 0) == 1
    assert falling(3, 5) == 0


def test_pair_chain_matrix_oracle():
    # two lineages, two parents: hand-derived transition probabilities
    for n in (5, 9):
        chain = build_transition_matrix(n, 2, 2)
        pair, split = chain.states
        assert pair.parts == (2,) and split.parts == (1, 1)
        assert chain.probability(pair, split) == Fraction(1, 2 * n)
        assert chain.probability(split, pair) == Fraction(2, n * (n - 1))
        assert chain.probability(pair, pair) == 1 - Fraction(1, 2 * n)


def test_rows_sum_to_one_exactly():
    for n, m, k in ((6, 2, 4), (7, 3, 3), (5, 4, 2)):
        chain = build_transition_matrix(n, m, k)
        for row in chain.matrix:
            assert sum(row, Fraction(0)) == 1


def test_table_lookup_matches_matrix():
    chain = build_transition_matrix(6, 2, 3)
    i = chain.index((2, 1))
    j = chain.index((1, 1, 1))
    assert chain.probability((2, 1), (1, 1, 1)) == chain.matrix[i][j]
    with pytest.raises(KeyError):
        chain.index((4,))


def test_chain_is_irreducible():
    for n, m, k in ((5, 2, 2), (6, 2, 4), (7, 3, 3)):
        assert build_transition_matrix(n, m, k).is_irreducible()


def test_build_validates_arguments():
    with pytest.raises(ValueError):
        build_transition_matrix(3, 2, 3)  # needs N > k
    with pytest.raises(ValueError):
        build_transition_matrix(2, 2, 1)  # needs N >= m + 1
    with pytest.raises(ValueError):
        build_transition_matrix(10, 1, 2)
    with pytest.raises(ValueError):
        build_transition_matrix(10, 2, 0)


def test_single_lineage_chain_is_trivial():
    chain = build_transition_matrix(8, 2, 1)
    assert len(chain.states) == 1
    assert chain.matrix[0][0] == 1
