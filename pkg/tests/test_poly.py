from fractions import Fraction

import pytest

from conftest import random_poly, random_rational
from structured_roabp.core.errors import DimensionMismatchError, DuplicateNodesError
from structured_roabp.core.poly import (
    DerivOperator,
    MonomialOrder,
    Poly,
    apply_operator,
    homogeneous_component,
    interpolate_univariate,
    interpolation_weights,
    iter_monomials_in_box,
    lagrange_basis,
    monomials_up_to,
    multi_factorial,
    pairing_at_zero,
    shift_operator,
    translate,
)

t = Poly.variable(0, 1)
x, y = Poly.variable(0, 2), Poly.variable(1, 2)


def test_graded_lex_listing():
    assert monomials_up_to(2, 2) == [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)]
    assert list(iter_monomials_in_box((1, 1))) == [(0, 0), (1, 0), (0, 1), (1, 1)]


def test_lex_order_sorts_terms():
    f = x * y + x**2 + y**2
    exponents = [e for e, _ in f.sorted_terms(MonomialOrder.LEX)]
    assert exponents == [(0, 2), (1, 1), (2, 0)]


def test_arithmetic_normalizes_terms():
    f = (x + y) ** 2
    assert f.terms == {(2, 0): 1, (1, 1): 2, (0, 2): 1}
    assert (f - f).is_zero
    assert f.degree() == 2
    assert Poly.zero(2).degree() == -1
    assert f.individual_degrees() == (2, 2)


def test_mismatched_variable_counts_raise():
    with pytest.raises(DimensionMismatchError):
        _ = x + t


def test_evaluation_is_exact():
    f = x**2 * Fraction(1, 2) + y
    assert f((Fraction(1, 3), 2)) == Fraction(1, 18) + 2


def test_derivative():
    f = x**3 * y**2
    assert f.derivative((2, 1)) == x * y * 12


def test_translate():
    assert translate(t**2, [1]) == t**2 + t * 2 + 1
    assert translate(x * y, [0, 0]) == x * y


def test_lagrange_basis_is_a_kronecker_delta():
    nodes = [0, 1, 3]
    basis = lagrange_basis(nodes)
    for k, L in enumerate(basis):
        for l, mu in enumerate(nodes):
            assert L((mu,)) == int(k == l)


def test_duplicate_nodes_raise():
    with pytest.raises(DuplicateNodesError):
        lagrange_basis([1, 2, 1])


def test_interpolation_weights_extract_coefficients():
    p = Poly.univariate([3, 2, 1])
    nodes = [1, 2, 3]
    W = interpolation_weights(nodes)
    for j in range(3):
        assert sum(W[j][k] * p((mu,)) for k, mu in enumerate(nodes)) == p.coefficient((j,))


def test_interpolate_univariate():
    p = interpolate_univariate([(0, 1), (1, 2), (2, 5)])
    assert p == t**2 + 1


def test_homogeneous_component_by_interpolation_matches_direct(rng):
    for _ in range(10):
        f = random_poly(rng, 3, 4)
        for j in range(f.degree() + 1):
            assert homogeneous_component(f, j, method='interpolate') == homogeneous_component(f, j)


def test_pairing_symmetry(rng):
    for _ in range(100):
        g, h = random_poly(rng, 2, 3), random_poly(rng, 2, 3)
        assert pairing_at_zero(g, h) == pairing_at_zero(h, g)
        assert pairing_at_zero(g, h) == apply_operator(h, g)((0, 0))


def test_shift_identity(rng):
    for _ in range(100):
        g, h = random_poly(rng, 2, 3), random_poly(rng, 2, 4)
        a = tuple(int(v) for v in rng.integers(0, 2, size=2))
        shifted = shift_operator(DerivOperator(h), a)
        assert apply_operator(shifted, g)((0, 0)) == apply_operator(h, g * Poly.monomial(a))((0, 0))


def test_product_rule(rng):
    for _ in range(100):
        f, g, h = random_poly(rng, 2, 2, 3), random_poly(rng, 2, 2, 3), random_poly(rng, 2, 2, 3)
        expected = Poly.zero(2)
        for a in iter_monomials_in_box(h.individual_degrees()):
            term = apply_operator(h.derivative(a), f) * g.derivative(a)
            expected = expected + term * Fraction(1, multi_factorial(a))
        assert apply_operator(h, f * g) == expected


def test_operator_on_translated_polynomial(rng):
    h = x * y
    g = random_poly(rng, 2, 3)
    alpha = [random_rational(rng), random_rational(rng)]
    assert pairing_at_zero(translate(g, alpha), h) == apply_operator(h, g)(alpha)


def test_to_str():
    assert (t**2 + 1).to_str() == '(1)*t^2 + (1)'
