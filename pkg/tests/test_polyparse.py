from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings as hsettings, strategies as st

from kinetic.errors import PolynomialSyntaxError
from kinetic.observables import Polynomial, random_sym_observable
from kinetic.polyparse import format_polynomial, parse_polynomial


def test_parses_rationals_and_decimals():
    p = parse_polynomial("3/2*x + 0.25*v^2", 1, 1)
    assert p.terms[(1, 0)] == Fraction(3, 2)
    assert p.terms[(0, 2)] == Fraction(1, 4)


def test_full_variable_names():
    p = parse_polynomial("x1_2*v2_1", 2, 2)
    expected = Polynomial.variable(1, 2, "x", 2, 2) * Polynomial.variable(2, 1, "v", 2, 2)
    assert p == expected


def test_parentheses_and_unary_minus():
    assert parse_polynomial("-(x - v)", 1, 1) == parse_polynomial("v - x", 1, 1)


def test_empty_text_is_zero():
    assert parse_polynomial("", 1, 1).is_zero()


@pytest.mark.parametrize(
    "text, k, d",
    [
        ("y", 1, 1),
        ("x3", 2, 1),
        ("x", 2, 1),
        ("x1", 1, 2),
        ("x^-1", 1, 1),
        ("2x", 1, 1),
        ("(x", 1, 1),
        ("1/0", 1, 1),
        ("x $ v", 1, 1),
    ],
)
def test_rejects_malformed_input(text, k, d):
    with pytest.raises(PolynomialSyntaxError):
        parse_polynomial(text, k, d)


def test_positions_only():
    with pytest.raises(PolynomialSyntaxError):
        parse_polynomial("x*v", 1, 1, allow_velocity=False)


def test_format_orders_by_degree():
    assert format_polynomial(parse_polynomial("1 + x + v^2", 1, 1)) == "v1_1^2 + x1_1 + 1"
    assert format_polynomial(Polynomial.zero(1, 1)) == "0"


@given(st.integers(min_value=0, max_value=2**32 - 1))
@hsettings(max_examples=30, deadline=None)
def test_format_is_inverse_of_parse(seed):
    p = random_sym_observable(np.random.default_rng(seed), 2, 1, 3, n_terms=4)
    assert parse_polynomial(format_polynomial(p), 2, 1) == p
