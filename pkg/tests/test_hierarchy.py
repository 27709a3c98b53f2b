from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from kinetic.errors import ArityError, NotInImageError
from kinetic.hierarchy import (
    BracketCoefficient,
    ObservableHierarchy,
    bracket_coefficient,
    bracket_GN,
    bracket_GN_by_definition,
    bracket_Ginf,
    corrupted_coefficient,
    epsilon_compose_check,
    epsilon_embed,
    epsilon_invert,
    epsilon_rank,
    filtration_h,
    iota_epsilon,
    level_partition,
    r_min,
    random_hierarchy,
    wedge_r,
)
from kinetic.observables import Polynomial, SymObservable, kinetic_energy, lie_bracket_gk, random_sym_observable
from kinetic.polyparse import parse_observable, parse_polynomial

seeds = st.integers(min_value=0, max_value=2**32 - 1)
X = parse_observable("x", 1, 1)
V = parse_observable("v", 1, 1)


# ---------- ε ----------

def test_epsilon_one_into_two_averages():
    assert epsilon_embed(X, 2) == parse_polynomial("x1 + x2", 2, 1).scale(Fraction(1, 2))


@pytest.mark.parametrize("method", ["tuples", "subsets"])
def test_epsilon_methods_agree(rng, method):
    f = random_sym_observable(rng, 2, 1, 3)
    assert epsilon_embed(f, 4, method) == epsilon_embed(f, 4)


def test_epsilon_rejects_level_above_N():
    with pytest.raises(ArityError):
        epsilon_embed(parse_observable("x1*x2", 2, 1), 1)


def test_epsilon_invert_round_trip():
    assert epsilon_invert(epsilon_embed(X, 3), 1, 3) == X


def test_epsilon_invert_not_in_image():
    with pytest.raises(NotInImageError):
        epsilon_invert(parse_observable("x1*x2", 2, 1), 1, 2)


def test_epsilon_invert_zero():
    assert epsilon_invert(SymObservable.zero(3, 1), 2, 3).is_zero()


def test_epsilon_composition_examples():
    assert epsilon_compose_check(1, 2, 3, X)
    assert epsilon_compose_check(2, 2, 4, parse_observable("x1*v2", 2, 1))
    assert epsilon_compose_check(2, 3, 5, parse_observable("(x1 - x2)^2", 2, 1))


@given(seeds, st.integers(min_value=1, max_value=3), st.integers(min_value=0, max_value=2))
@hsettings(max_examples=25, deadline=None)
def test_epsilon_composition_random(seed, a, extra):
    rng = np.random.default_rng(seed)
    b, N = a + extra, a + extra + 1
    f = random_sym_observable(rng, a, 1, 2)
    assert epsilon_compose_check(a, b, N, f)


@pytest.mark.parametrize("k, N", [(1, 2), (2, 3), (2, 4), (3, 4)])
def test_epsilon_is_injective(k, N):
    rank, dim = epsilon_rank(k, N, 1, 2)
    assert rank == dim


# ---------- ∧_r y coeficientes ----------

def test_wedge_canonical_pair():
    assert wedge_r(X, V, 1) == Polynomial.constant(1, 1, 1)


def test_wedge_of_equal_kinetic_energies_vanishes():
    T = kinetic_energy(1, 1)
    assert wedge_r(T, T, 1).is_zero()


def test_wedge_kinetic_with_pair_potential():
    f = kinetic_energy(1, 1)
    g = parse_observable("(x1 - x2)^2", 2, 1)
    assert wedge_r(f, g, 1) == parse_polynomial("-4*(x1 - x2)*v1", 2, 1)


def test_wedge_rejects_r_out_of_range():
    with pytest.raises(ArityError):
        wedge_r(X, V, 2)


@pytest.mark.parametrize("N", [2, 3, 5, 10])
def test_bracket_coefficient_closed_forms(N):
    for l in range(1, N + 1):
        assert bracket_coefficient(l, 1, N, 1) == 1
        if r_min(l, 2, N) == 1:
            assert bracket_coefficient(l, 2, N, 1) == Fraction(N - l, N - 1)
        if l >= 2:
            assert bracket_coefficient(l, 2, N, 2) == Fraction(1, N - 1)


def test_bracket_coefficient_range_is_checked():
    with pytest.raises(ArityError):
        bracket_coefficient(3, 3, 4, 1)  # r_min = 2
    with pytest.raises(ArityError):
        bracket_coefficient(5, 1, 4, 1)


def test_coefficient_row():
    row = BracketCoefficient.row(2, 2, 3)
    assert [c.r for c in row] == [1, 2]
    assert [c.value for c in row] == [Fraction(1, 2), Fraction(1, 2)]
    assert all(c.r0 == 1 and c.k == 3 for c in row)
    assert row[1].scaled == Fraction(3, 2)
    assert [c.r for c in BracketCoefficient.row(3, 3, 4)] == [2, 3]


def test_scaled_coefficient_tends_to_one():
    for r in (1, 2):
        c = BracketCoefficient.of(2, 2, 1000, r)
        assert abs(c.scaled - 1) < Fraction(1, 100)


def test_corrupted_coefficient_is_scoped():
    base = bracket_coefficient(2, 2, 5, 1)
    with corrupted_coefficient(2, 2, 1):
        assert bracket_coefficient(2, 2, 5, 1) == 2 * base
        assert bracket_coefficient(2, 2, 5, 2) == Fraction(1, 4)
    assert bracket_coefficient(2, 2, 5, 1) == base


def test_level_partition_covers_grid():
    parts = level_partition([1, 2, 3], [1, 2], 3)
    pairs = sorted(p for ps in parts.values() for p in ps)
    assert pairs == [(l, j) for l in (1, 2, 3) for j in (1, 2)]
    assert set(parts) == {1, 2, 3}


# ---------- Corchetes de jerarquías ----------

def test_ginf_canonical_pair():
    F = ObservableHierarchy.single(X)
    G = ObservableHierarchy.single(V)
    H = bracket_Ginf(F, G)
    assert H.support() == [1]
    assert H.level(1) == 1


def test_gn_bracket_of_equal_hierarchies_vanishes(rng):
    F = random_hierarchy(rng, 1, [1, 2], 2, max_level=3)
    assert bracket_GN(F, F, 3).is_zero()
    assert bracket_Ginf(F, F).is_zero()


def test_hierarchy_rejects_level_above_N():
    with pytest.raises(ArityError):
        ObservableHierarchy(1, {3: parse_observable("x1*x2*x3", 3, 1)}, 2)


@given(seeds, st.integers(min_value=2, max_value=3))
@hsettings(max_examples=10, deadline=None)
def test_gn_jacobi(seed, N):
    rng = np.random.default_rng(seed)
    F, G, H = (random_hierarchy(rng, 1, [1, 2], 2, max_level=N) for _ in range(3))
    jac = (
        bracket_GN(F, bracket_GN(G, H, N), N)
        + bracket_GN(G, bracket_GN(H, F, N), N)
        + bracket_GN(H, bracket_GN(F, G, N), N)
    )
    assert jac.is_zero()


@given(seeds)
@hsettings(max_examples=10, deadline=None)
def test_ginf_jacobi(seed):
    rng = np.random.default_rng(seed)
    F, G, H = (random_hierarchy(rng, 1, [1, 2], 2) for _ in range(3))
    jac = (
        bracket_Ginf(F, bracket_Ginf(G, H))
        + bracket_Ginf(G, bracket_Ginf(H, F))
        + bracket_Ginf(H, bracket_Ginf(F, G))
    )
    assert jac.is_zero()


@pytest.mark.parametrize("N", [2, 3, 4])
def test_explicit_formula_matches_definition(rng, N):
    for _ in range(3):
        F = random_hierarchy(rng, 1, [1, 2], 2, max_level=N)
        G = random_hierarchy(rng, 1, [1, 2], 2, max_level=N)
        assert bracket_GN(F, G, N) == bracket_GN_by_definition(F, G, N)


@pytest.mark.parametrize("l, j, N", [(1, 1, 2), (1, 2, 3), (2, 2, 2), (2, 2, 4), (3, 2, 3)])
def test_filtration_identity(rng, l, j, N):
    f = random_sym_observable(rng, l, 1, 2)
    g = random_sym_observable(rng, j, 1, 2)
    k = min(l + j - 1, N)
    lhs = epsilon_embed(filtration_h(f, g, N), N)
    rhs = lie_bracket_gk(epsilon_embed(f, N), epsilon_embed(g, N))
    assert filtration_h(f, g, N).k == k
    assert lhs == rhs


def test_iota_epsilon_is_lie_morphism(rng):
    N = 3
    F = random_hierarchy(rng, 1, [1, 2], 2, max_level=N)
    G = random_hierarchy(rng, 1, [1, 3], 2, max_level=N)
    lhs = iota_epsilon(bracket_GN(F, G, N), N)
    rhs = lie_bracket_gk(iota_epsilon(F, N), iota_epsilon(G, N))
    assert lhs == rhs


def test_gn_bracket_requires_support_within_N():
    F = ObservableHierarchy.single(parse_observable("x1*x2*x3", 3, 1))
    with pytest.raises(ArityError):
        bracket_GN(F, F, 2)
