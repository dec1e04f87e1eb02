import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from shapig.game import (Coalition, EnumerationCapError, Game, coalition_weight,
                         marginal_contribution, shapley_exact, shapley_from_table)
from conftest import random_table


def permutation_shapley(table, n):
    # textbook definition: average marginal over all n! orderings
    phi = np.zeros(n)
    for perm in itertools.permutations(range(n)):
        mask = 0
        for i in perm:
            phi[i] += table[mask | (1 << i)] - table[mask]
            mask |= 1 << i
    return phi / math.factorial(n)


def test_coalition_basics():
    S = Coalition.from_members([0, 2], 4)
    assert S.mask == 0b101 and len(S) == 2 and 2 in S and 1 not in S
    assert S.with_player(1).members == (0, 1, 2)
    assert S.to_vector().tolist() == [1, 0, 1, 0]
    assert len(Coalition.grand(3)) == 3 and len(Coalition.empty(3)) == 0


@pytest.mark.parametrize("members", [[0, 0], [4], [-1]])
def test_coalition_rejects_bad_members(members):
    with pytest.raises(ValueError):
        Coalition.from_members(members, 4)


def test_two_player_closed_form():
    v1, v2, v12 = 3.0, 5.0, 11.0
    phi = shapley_exact(Game.from_table([0.0, v1, v2, v12]))
    assert phi[0] == pytest.approx(0.5 * (v1 + v12 - v2))
    assert phi[1] == pytest.approx(0.5 * (v2 + v12 - v1))


def test_unanimity_and_additive_exact():
    masks = np.arange(8)
    una = Game.from_table(((masks & 3) == 3).astype(float))
    assert list(shapley_exact(una, exact=True)) == [Fraction(1, 2), Fraction(1, 2), 0]
    add = Game.from_table([bin(m).count("1") * 1.0 for m in masks])
    assert list(shapley_exact(add, exact=True)) == [1, 1, 1]


def test_weights_examples():
    assert coalition_weight(0, 2) == 0.5
    assert coalition_weight(1, 4, exact=True) == Fraction(1, 12)
    assert coalition_weight(0, 7) == pytest.approx(1 / 7)


@pytest.mark.parametrize("k,n", [(-1, 3), (3, 3), (0, 0)])
def test_weights_domain(k, n):
    with pytest.raises(ValueError):
        coalition_weight(k, n)


def test_marginal_contribution_errors():
    g = Game.from_table([0.0, 1.0, 2.0, 4.0])
    assert marginal_contribution(g, Coalition.from_members([0], 2), 1) == 3.0
    with pytest.raises(ValueError):
        marginal_contribution(g, Coalition.from_members([0], 2), 0)
    with pytest.raises(ValueError):
        marginal_contribution(g, Coalition.empty(2), 2)


def test_enumeration_cap():
    g = Game(21, lambda S: 0.0)
    with pytest.raises(EnumerationCapError):
        shapley_exact(g)


def test_callable_game_matches_table():
    table = random_table(4, 3)
    g = Game(4, lambda S: table[S.mask])
    np.testing.assert_allclose(shapley_exact(g), shapley_from_table(table), atol=1e-12)


@settings(max_examples=30, deadline=None)
@given(n=st.integers(1, 6), seed=st.integers(0, 10_000))
def test_matches_permutation_definition(n, seed):
    table = random_table(n, seed)
    np.testing.assert_allclose(shapley_from_table(table), permutation_shapley(table, n),
                               atol=1e-10)


def test_exact_mode_agrees_with_float():
    table = random_table(5, 8)
    exact = shapley_exact(Game.from_table(table), exact=True)
    np.testing.assert_allclose([float(v) for v in exact], shapley_from_table(table), atol=1e-12)


def test_duplicate_players_tie_exactly():
    # players 0 and 1 are interchangeable; the result must tie to the last bit
    n = 5
    rng = np.random.default_rng(1)
    base = {}
    table = np.zeros(1 << n)
    for m in range(1, 1 << n):
        key = (bin(m & 3).count("1"), m >> 2)
        table[m] = base.setdefault(key, rng.normal())
    phi = shapley_from_table(table)
    assert phi[0] == phi[1]
