"""Sparse multivariate polynomials, interpolation and derivative operators."""

import itertools
import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum
from fractions import Fraction
from typing import Any, Callable, Iterable, Iterator, Sequence

import numpy as np

from .errors import DimensionMismatchError, DuplicateNodesError, InvalidParameterError

logger = logging.getLogger(__name__)

Monomial = tuple[int, ...]
Scalar = Fraction | complex


class MonomialOrder(StrEnum):
    # graded, ties broken so that powers of the first variable come first:
    # 1, t1, t2, t1², t1t2, t2², ...
    GRADED_LEX = 'gradedLex'
    # smallest differing index has the smaller exponent in the smaller monomial
    LEX = 'lex'

    def key(self, exponents: Monomial) -> tuple:
        if self is MonomialOrder.GRADED_LEX:
            return (sum(exponents), tuple(-e for e in exponents))
        return tuple(exponents)


def clean_scalar(value: Any) -> Scalar:
    """Normalizes a number to Fraction (exact inputs) or complex (everything else)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError('Booleans are not polynomial coefficients.')
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, (complex, float, np.number)):
        return complex(value)
    raise TypeError(f'Unsupported scalar type: {type(value).__name__}')


def is_zero_scalar(value: Scalar) -> bool:
    return value == 0


def multi_factorial(exponents: Monomial) -> int:
    return math.prod(math.factorial(e) for e in exponents)


def falling_factorial(n: int, k: int) -> int:
    return math.perm(n, k)


def divides(a: Monomial, b: Monomial) -> bool:
    return all(x <= y for x, y in zip(a, b))


def monomials_of_degree(nvars: int, degree: int) -> list[Monomial]:
    """All monomials of a total degree, ascending in gradedLex."""
    if nvars == 0:
        return [()] if degree == 0 else []
    out = []
    for first in range(degree, -1, -1):
        for rest in monomials_of_degree(nvars - 1, degree - first):
            out.append((first, *rest))
    return out


def monomials_up_to(nvars: int, degree: int) -> list[Monomial]:
    return [m for k in range(degree + 1) for m in monomials_of_degree(nvars, k)]


@dataclass(frozen=True, eq=False)
class Poly:
    """Polynomial in ``nvars`` variables stored as {exponent tuple: nonzero coefficient}."""

    nvars: int
    terms: dict[Monomial, Scalar] = field(default_factory=dict)

    def __post_init__(self):
        cleaned: dict[Monomial, Scalar] = {}
        for exponents, coeff in self.terms.items():
            exponents = tuple(int(e) for e in exponents)
            if len(exponents) != self.nvars:
                raise DimensionMismatchError(
                    f'Monomial {exponents} does not have {self.nvars} exponents.'
                )
            if any(e < 0 for e in exponents):
                raise InvalidParameterError(f'Negative exponent in {exponents}.')
            coeff = clean_scalar(coeff) + cleaned.get(exponents, 0)
            if is_zero_scalar(coeff):
                cleaned.pop(exponents, None)
            else:
                cleaned[exponents] = coeff
        object.__setattr__(self, 'terms', cleaned)

    @classmethod
    def zero(cls, nvars: int) -> 'Poly':
        return cls(nvars, {})

    @classmethod
    def constant(cls, value: Any, nvars: int) -> 'Poly':
        return cls(nvars, {(0,) * nvars: value})

    @classmethod
    def variable(cls, index: int, nvars: int, coeff: Any = 1) -> 'Poly':
        exponents = [0] * nvars
        exponents[index] = 1
        return cls(nvars, {tuple(exponents): coeff})

    @classmethod
    def monomial(cls, exponents: Sequence[int], coeff: Any = 1) -> 'Poly':
        return cls(len(exponents), {tuple(exponents): coeff})

    @classmethod
    def univariate(cls, coeffs: Sequence[Any]) -> 'Poly':
        """Univariate polynomial from ascending coefficients."""
        return cls(1, {(j,): c for j, c in enumerate(coeffs)})

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        if isinstance(other, (int, Fraction, complex, float)):
            return self == Poly.constant(other, self.nvars)
        return NotImplemented

    __hash__ = None

    def __repr__(self) -> str:
        return f'Poly({self.nvars}, {self.to_str()})'

    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return '0'
        if names is None:
            names = ['t'] if self.nvars == 1 else [f't{i + 1}' for i in range(self.nvars)]
        parts = []
        for exponents, coeff in self.sorted_terms(descending=True):
            factors = [
                name if e == 1 else f'{name}^{e}'
                for name, e in zip(names, exponents)
                if e
            ]
            parts.append('*'.join([f'({coeff})'] + factors) if factors else f'({coeff})')
        return ' + '.join(parts)

    def _coerce(self, other: Any) -> 'Poly | None':
        if isinstance(other, Poly):
            if other.nvars != self.nvars:
                raise DimensionMismatchError(
                    f'Variable counts differ: {self.nvars} vs {other.nvars}.'
                )
            return other
        if isinstance(other, (int, Fraction, complex, float, np.number)):
            return Poly.constant(other, self.nvars)
        return None

    def __add__(self, other: Any) -> 'Poly':
        if (rhs := self._coerce(other)) is None:
            return NotImplemented
        terms = dict(self.terms)
        for exponents, coeff in rhs.terms.items():
            terms[exponents] = terms.get(exponents, 0) + coeff
        return Poly(self.nvars, terms)

    __radd__ = __add__

    def __neg__(self) -> 'Poly':
        return Poly(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other: Any) -> 'Poly':
        if (rhs := self._coerce(other)) is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other: Any) -> 'Poly':
        return (-self) + other

    def __mul__(self, other: Any) -> 'Poly':
        if isinstance(other, (int, Fraction, complex, float, np.number)):
            scale = clean_scalar(other)
            return Poly(self.nvars, {e: c * scale for e, c in self.terms.items()})
        if (rhs := self._coerce(other)) is None:
            return NotImplemented
        terms: dict[Monomial, Scalar] = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in rhs.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                terms[e] = terms.get(e, 0) + c1 * c2
        return Poly(self.nvars, terms)

    __rmul__ = __mul__

    def __pow__(self, k: int) -> 'Poly':
        if k < 0:
            raise InvalidParameterError('Negative powers are not polynomials.')
        result, base = Poly.constant(1, self.nvars), self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __call__(self, point: Sequence[Any]) -> Scalar:
        return eval_poly(self, point)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def is_rational(self) -> bool:
        return all(isinstance(c, Fraction) for c in self.terms.values())

    def coefficient(self, exponents: Sequence[int]) -> Scalar:
        return self.terms.get(tuple(exponents), Fraction(0))

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def individual_degrees(self) -> tuple[int, ...]:
        return tuple(
            max((e[i] for e in self.terms), default=0) for i in range(self.nvars)
        )

    def sorted_terms(
        self,
        order: MonomialOrder = MonomialOrder.GRADED_LEX,
        descending: bool = False,
    ) -> list[tuple[Monomial, Scalar]]:
        return sorted(
            self.terms.items(), key=lambda item: order.key(item[0]), reverse=descending
        )

    def map_coefficients(self, fn: Callable[[Scalar], Any]) -> 'Poly':
        return Poly(self.nvars, {e: fn(c) for e, c in self.terms.items()})

    def chop(self, tol: float) -> 'Poly':
        """Drops coefficients with |c| ≤ tol and zeroes negligible real/imaginary parts."""

        def _chop(c: Scalar) -> Scalar:
            if isinstance(c, Fraction):
                return c if abs(c) > tol else Fraction(0)
            re = c.real if abs(c.real) > tol else 0.0
            im = c.imag if abs(c.imag) > tol else 0.0
            return complex(re, im)

        return self.map_coefficients(_chop)

    def derivative(self, a: Sequence[int]) -> 'Poly':
        """∂_a of the polynomial."""
        a = tuple(a)
        if len(a) != self.nvars:
            raise DimensionMismatchError(f'Derivative index {a} has wrong length.')
        terms = {}
        for exponents, coeff in self.terms.items():
            if divides(a, exponents):
                scale = math.prod(falling_factorial(e, k) for e, k in zip(exponents, a))
                terms[tuple(e - k for e, k in zip(exponents, a))] = coeff * scale
        return Poly(self.nvars, terms)

    def homogeneous(self, j: int) -> 'Poly':
        return Poly(self.nvars, {e: c for e, c in self.terms.items() if sum(e) == j})

    def translate(self, alpha: Sequence[Any]) -> 'Poly':
        return translate(self, alpha)

    def scale_variables(self, mu: Any | Sequence[Any]) -> 'Poly':
        """f(μ·x) for a scalar μ or a per-variable vector μ."""
        if isinstance(mu, Sequence):
            mus = [clean_scalar(m) for m in mu]
        else:
            mus = [clean_scalar(mu)] * self.nvars
        return Poly(
            self.nvars,
            {
                e: c * math.prod((m**k for m, k in zip(mus, e)), start=Fraction(1))
                for e, c in self.terms.items()
            },
        )

    def embed(self, nvars: int, positions: Sequence[int]) -> 'Poly':
        """Moves variable i to position positions[i] in an nvars-variable ring."""
        if len(positions) != self.nvars:
            raise DimensionMismatchError('One position per variable is required.')
        terms = {}
        for exponents, coeff in self.terms.items():
            new = [0] * nvars
            for pos, e in zip(positions, exponents):
                new[pos] += e
            terms[tuple(new)] = coeff
        return Poly(nvars, terms)


@dataclass(frozen=True)
class DerivOperator:
    """The constant-coefficient operator D_h = Σ_a h_a·∂_a."""

    op_poly: Poly

    @property
    def nvars(self) -> int:
        return self.op_poly.nvars

    def degree(self) -> int:
        return self.op_poly.degree()

    def apply(self, g: Poly) -> Poly:
        return apply_operator(self, g)

    def shift(self, a: Sequence[int]) -> 'DerivOperator':
        return shift_operator(self, a)


def eval_poly(f: Poly, point: Sequence[Any]) -> Scalar:
    if len(point) != f.nvars:
        raise DimensionMismatchError(
            f'Point has {len(point)} coordinates, polynomial has {f.nvars} variables.'
        )
    xs = [clean_scalar(x) for x in point]
    powers: dict[tuple[int, int], Scalar] = {}
    total: Scalar = Fraction(0)
    for exponents, coeff in f.terms.items():
        value = coeff
        for i, e in enumerate(exponents):
            if e:
                if (i, e) not in powers:
                    powers[i, e] = xs[i] ** e
                value = value * powers[i, e]
        total = total + value
    return total


def _check_distinct(nodes: Sequence[Scalar]):
    for i, j in itertools.combinations(range(len(nodes)), 2):
        if nodes[i] == nodes[j]:
            raise DuplicateNodesError(f'Interpolation nodes {i} and {j} coincide ({nodes[i]}).')


def lagrange_basis(nodes: Sequence[Any]) -> list[Poly]:
    """Univariate Lagrange basis polynomials L_k with L_k(μ_l) = [k = l]."""
    mus = [clean_scalar(m) for m in nodes]
    _check_distinct(mus)
    t = Poly.variable(0, 1)
    basis = []
    for k, mu_k in enumerate(mus):
        numerator = Poly.constant(1, 1)
        denominator: Scalar = Fraction(1)
        for l, mu_l in enumerate(mus):
            if l != k:
                numerator = numerator * (t - mu_l)
                denominator = denominator * (mu_k - mu_l)
        basis.append(numerator * (1 / denominator))
    return basis


def interpolation_weights(nodes: Sequence[Any]) -> list[list[Scalar]]:
    """β[j][k] with coeff_{v^j}(p) = Σ_k β[j][k]·p(μ_k) for every p of degree < len(nodes)."""
    basis = lagrange_basis(nodes)
    return [[L.coefficient((j,)) for L in basis] for j in range(len(basis))]


def interpolate_univariate(values: Iterable[tuple[Any, Any]]) -> Poly:
    """The unique polynomial of degree < len(values) through the (node, value) pairs."""
    pairs = list(values)
    if not pairs:
        return Poly.zero(1)
    basis = lagrange_basis([node for node, _ in pairs])
    result = Poly.zero(1)
    for (_, value), L in zip(pairs, basis):
        result = result + L * clean_scalar(value)
    return result


def homogeneous_component(
    f: Poly, j: int, method: str = 'exact', nodes: Sequence[Any] | None = None
) -> Poly:
    """Degree-j part of f, read off directly or interpolated from the values f(μ·x)."""
    if j < 0:
        raise InvalidParameterError('Component degree must be non-negative.')
    if method == 'exact':
        return f.homogeneous(j)
    if method != 'interpolate':
        raise InvalidParameterError(f'Unknown homogeneous-component method: {method}')
    top = f.degree()
    if j > top:
        return Poly.zero(f.nvars)
    nodes = list(range(top + 1)) if nodes is None else list(nodes)
    if len(nodes) != top + 1:
        raise InvalidParameterError(f'Need {top + 1} nodes, got {len(nodes)}.')
    weights = interpolation_weights(nodes)[j]
    result = Poly.zero(f.nvars)
    for weight, mu in zip(weights, nodes):
        result = result + f.scale_variables(mu) * weight
    return result


def translate(f: Poly, alpha: Sequence[Any]) -> Poly:
    """Returns g with g(y) = f(y + α)."""
    if len(alpha) != f.nvars:
        raise DimensionMismatchError(
            f'Shift has {len(alpha)} coordinates, polynomial has {f.nvars} variables.'
        )
    shift = [clean_scalar(a) for a in alpha]
    if all(a == 0 for a in shift):
        return Poly(f.nvars, dict(f.terms))
    terms: dict[Monomial, Scalar] = {}
    for exponents, coeff in f.terms.items():
        for ks in itertools.product(*(range(e + 1) for e in exponents)):
            value = coeff
            for e, k, a in zip(exponents, ks, shift):
                if k < e:
                    value = value * math.comb(e, k) * a ** (e - k)
            terms[ks] = terms.get(ks, 0) + value
    return Poly(f.nvars, terms)


def _operator_poly(D: DerivOperator | Poly) -> Poly:
    return D.op_poly if isinstance(D, DerivOperator) else D


def apply_operator(D: DerivOperator | Poly, g: Poly) -> Poly:
    """D_h(g) = Σ_a h_a·∂_a g."""
    h = _operator_poly(D)
    if h.nvars != g.nvars:
        raise DimensionMismatchError(f'Operator has {h.nvars} variables, polynomial {g.nvars}.')
    result = Poly.zero(g.nvars)
    for a, coeff in h.terms.items():
        result = result + g.derivative(a) * coeff
    return result


def shift_operator(D: DerivOperator | Poly, a: Sequence[int]) -> DerivOperator:
    """σ_a(D_h) = D_{∂_a h}."""
    return DerivOperator(_operator_poly(D).derivative(a))


def pairing_at_zero(g: Poly, h: Poly) -> Scalar:
    """Σ_e e!·g_e·h_e, which equals D_h(g)(0) and D_g(h)(0)."""
    if g.nvars != h.nvars:
        raise DimensionMismatchError(f'Variable counts differ: {g.nvars} vs {h.nvars}.')
    small, large = (g, h) if len(g.terms) <= len(h.terms) else (h, g)
    total: Scalar = Fraction(0)
    for exponents, coeff in small.terms.items():
        if exponents in large.terms:
            total = total + multi_factorial(exponents) * coeff * large.terms[exponents]
    return total


def iter_monomials_in_box(bounds: Sequence[int]) -> Iterator[Monomial]:
    """All e with 0 ≤ e_i ≤ bounds[i], in gradedLex order."""
    box = list(itertools.product(*(range(b + 1) for b in bounds)))
    yield from sorted(box, key=MonomialOrder.GRADED_LEX.key)
