"""Powering decompositions, partial-derivative dimension and evaluation plans.

A decomposition writes h as Σ_k β_k·(⟨c_k, t⟩ + b_k)^{d_k}. Such a form turns the
operator D_h into a weighted sum of evaluations: each power contributes the
homogeneous parts of g at c_k, and those are interpolated from g(μ·c_k).
"""

import cmath
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

from ..config import SETTINGS
from ..utils import merge_points
from .errors import DecompositionError, GuardExceededError, InvalidParameterError, PlanError
from .exactnum import numeric_rank, rank_exact
from .poly import (
    Monomial,
    MonomialOrder,
    Poly,
    Scalar,
    clean_scalar,
    eval_poly,
    interpolation_weights,
    iter_monomials_in_box,
    pairing_at_zero,
    translate,
)

logger = logging.getLogger(__name__)

EXPANSION_TOL = 1e-10


@dataclass(frozen=True)
class WaringTerm:
    weight: Scalar
    form: tuple[Scalar, ...]
    constant: Scalar
    power: int

    def as_poly(self) -> Poly:
        """β·(⟨c, t⟩ + b)^d."""
        nvars = len(self.form)
        linear = Poly(nvars, {(0,) * nvars: self.constant})
        for i, c in enumerate(self.form):
            linear = linear + Poly.variable(i, nvars, c)
        return (linear**self.power) * self.weight


@dataclass(frozen=True)
class WaringDecomposition:
    nvars: int
    terms: tuple[WaringTerm, ...]

    @property
    def size(self) -> int:
        return len(self.terms)

    @property
    def is_exact(self) -> bool:
        return all(
            isinstance(x, Fraction)
            for term in self.terms
            for x in (term.weight, term.constant, *term.form)
        )


@dataclass(frozen=True)
class FunctionalEvalPlan:
    points: tuple[tuple[Scalar, ...], ...]
    weights: tuple[Scalar, ...]
    degree_bound: int

    @property
    def size(self) -> int:
        return len(self.points)

    def apply(self, g: Poly) -> Scalar:
        """Σ_q λ_q·g(y_q)."""
        if g.degree() > self.degree_bound:
            raise InvalidParameterError(
                f'Plan is valid up to degree {self.degree_bound}, got degree {g.degree()}.'
            )
        total: Scalar = Fraction(0)
        for point, weight in zip(self.points, self.weights):
            total = total + weight * eval_poly(g, point)
        return total


def _derivative_rows(f: Poly, exponents: Sequence[Monomial]) -> tuple[list[list[Scalar]], bool]:
    derivatives = [f.derivative(e) for e in exponents]
    support = sorted({m for d in derivatives for m in d.terms}, key=MonomialOrder.GRADED_LEX.key)
    rows = [[d.coefficient(m) for m in support] for d in derivatives]
    return rows, f.is_rational


def _rank(rows: list[list[Scalar]], exact: bool, tol: float | None) -> int:
    if not rows or not rows[0]:
        return 0
    if exact:
        return rank_exact(rows)
    return numeric_rank([[complex(v) for v in row] for row in rows], SETTINGS.run.tol if tol is None else tol)


def dpd(f: Poly, tol: float | None = None, max_rows: int | None = None) -> int:
    """Dimension of the span of all partial derivatives of f (f itself included).

    Exact over QQ for rational input; complex input falls back to a numeric rank at tol.
    """
    max_rows = SETTINGS.guards.max_dpd_rows if max_rows is None else max_rows
    if f.is_zero:
        return 0
    bounds = f.individual_degrees()
    count = math.prod(b + 1 for b in bounds)
    if count > max_rows:
        raise GuardExceededError(f'dpd needs {count} derivative rows, limit is {max_rows}.')
    rows, exact = _derivative_rows(f, list(iter_monomials_in_box(bounds)))
    return _rank(rows, exact, tol)


def catalecticant_rank(f: Poly, k: int, tol: float | None = None) -> int:
    """Rank of the order-k partial derivatives ∂_e f, |e| = k."""
    if k < 0:
        raise InvalidParameterError('Derivative order must be non-negative.')
    if f.is_zero:
        return 0
    exponents = [e for e in iter_monomials_in_box(f.individual_degrees()) if sum(e) == k]
    rows, exact = _derivative_rows(f, exponents)
    return _rank(rows, exact, tol)


def catalecticant_lower_bound(f: Poly, tol: float | None = None) -> int:
    """ceil(dpd(f) / (deg f + 1)), a lower bound on the number of powers needed for f."""
    if f.is_zero:
        return 0
    return -(-dpd(f, tol) // (f.degree() + 1))


def _roots_of_unity(k: int) -> list[Scalar]:
    if k == 1:
        return [Fraction(1)]
    if k == 2:
        return [Fraction(1), Fraction(-1)]
    return [cmath.exp(2j * cmath.pi * s / k) for s in range(k)]


def monomial_waring(a: Sequence[int]) -> WaringDecomposition:
    """x^a as Σ weighted d-th powers of linear forms via roots-of-unity extraction.

    The support variable with the smallest exponent gets coefficient 1; every other
    support variable i runs over the (a_i+1)-th roots of unity ζ_i, and the term
    weight is Π ζ_i^{-a_i} / (multinomial(d; a)·Π (a_i+1)).
    """
    a = tuple(int(e) for e in a)
    d = sum(a)
    if d == 0:
        raise InvalidParameterError('monomial_waring needs a non-constant monomial.')
    nvars = len(a)
    support = [i for i in range(nvars) if a[i] > 0]
    lead = min(support, key=lambda i: (a[i], i))
    others = [i for i in support if i != lead]

    multinomial = math.factorial(d) // math.prod(math.factorial(e) for e in a)
    norm = multinomial * math.prod(a[i] + 1 for i in others)

    choices: list[tuple[Scalar, ...]] = [()]
    for i in others:
        choices = [(*prefix, zeta) for prefix in choices for zeta in _roots_of_unity(a[i] + 1)]

    terms = []
    for zetas in choices:
        form: list[Scalar] = [Fraction(0)] * nvars
        form[lead] = Fraction(1)
        weight: Scalar = Fraction(1, norm)
        for i, zeta in zip(others, zetas):
            form[i] = zeta
            weight = weight * zeta ** -a[i]
        terms.append(WaringTerm(clean_scalar(weight), tuple(form), Fraction(0), d))
    return WaringDecomposition(nvars, tuple(terms))


def poly_waring(h: Poly) -> WaringDecomposition:
    """Concatenates monomial decompositions with the coefficients of h folded into the weights."""
    terms: list[WaringTerm] = []
    for a, coeff in h.sorted_terms():
        if sum(a) == 0:
            terms.append(WaringTerm(coeff, (Fraction(0),) * h.nvars, Fraction(1), 0))
            continue
        for term in monomial_waring(a).terms:
            terms.append(WaringTerm(clean_scalar(term.weight * coeff), term.form, term.constant, term.power))
    return WaringDecomposition(h.nvars, tuple(terms))


def expand_waring(dec: WaringDecomposition) -> Poly:
    total = Poly.zero(dec.nvars)
    for term in dec.terms:
        total = total + term.as_poly()
    return total


def decomposition_residual(dec: WaringDecomposition, target: Poly) -> float:
    """Largest coefficient error of the expansion, relative to max(1, largest target coefficient)."""
    diff = expand_waring(dec) - target
    if diff.is_zero:
        return 0.0
    scale = max([1.0, *(float(abs(c)) for c in target.terms.values())])
    return max(float(abs(c)) for c in diff.terms.values()) / scale


def check_decomposition(dec: WaringDecomposition, target: Poly, tol: float = EXPANSION_TOL) -> bool:
    """Raises DecompositionError unless dec re-expands to target (exactly when both are rational)."""
    if dec.nvars != target.nvars:
        raise DecompositionError(f'Decomposition has {dec.nvars} variables, target {target.nvars}.')
    residual = decomposition_residual(dec, target)
    exact = dec.is_exact and target.is_rational
    if (exact and residual != 0) or residual > tol:
        raise DecompositionError(f'Decomposition does not expand to its target (residual {residual:.3e}).')
    return True


def functional_eval_plan(
    h: Poly,
    dec: WaringDecomposition,
    d_prime: int,
    alpha: Sequence[Any],
    dedupe_tol: float | None = None,
) -> FunctionalEvalPlan:
    """Points y_q and weights λ_q with Σ_q λ_q·g(y_q) = (D_h g)(α) whenever deg g ≤ d_prime."""
    dedupe_tol = SETTINGS.convert.dedupe_tol if dedupe_tol is None else dedupe_tol
    if d_prime < h.degree():
        raise InvalidParameterError(f'd_prime = {d_prime} is below deg h = {h.degree()}.')
    if len(alpha) != h.nvars:
        raise InvalidParameterError(f'Shift has {len(alpha)} coordinates, expected {h.nvars}.')
    try:
        check_decomposition(dec, h)
    except DecompositionError as e:
        raise PlanError(f'Cannot build an evaluation plan: {e}') from e

    alpha = [clean_scalar(x) for x in alpha]
    nodes = [Fraction(mu) for mu in range(1, d_prime + 2)]
    W = interpolation_weights(nodes)

    points: list[list[Scalar]] = []
    weights: list[Scalar] = []
    for term in dec.terms:
        top = min(term.power, d_prime)
        gammas = [
            math.comb(term.power, j) * term.constant ** (term.power - j) * math.factorial(j) * term.weight
            for j in range(top + 1)
        ]
        if all(c == 0 for c in term.form) or term.power == 0:
            # only the constant part of g survives
            points.append(list(alpha))
            weights.append(gammas[0])
            continue
        for ell, mu in enumerate(nodes):
            weight = sum((gammas[j] * W[j][ell] for j in range(top + 1)), start=Fraction(0))
            points.append([mu * c + x for c, x in zip(term.form, alpha)])
            weights.append(weight)

    exact = all(isinstance(x, Fraction) for p in points for x in p)
    merged_points, merged_weights = merge_points(points, weights, 0 if exact else dedupe_tol)
    if len(merged_points) > dec.size * (d_prime + 1):
        raise PlanError(f'Plan has {len(merged_points)} points, more than |dec|·(d\'+1).')
    logger.debug('Evaluation plan for deg-%d operator: %d points', h.degree(), len(merged_points))
    return FunctionalEvalPlan(tuple(merged_points), tuple(merged_weights), d_prime)


def plan_value_at(h: Poly, g: Poly, alpha: Sequence[Any]) -> Scalar:
    """(D_h g)(α) computed symbolically."""
    return pairing_at_zero(translate(g, alpha), h)
