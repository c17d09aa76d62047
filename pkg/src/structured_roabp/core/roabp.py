import itertools
import logging
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, singledispatch
from typing import Any, Sequence

import numpy as np
import pandas as pd
from sympy.polys.matrices import DomainMatrix

from ..config import SETTINGS
from .errors import (
    DimensionMismatchError,
    GuardExceededError,
    InvalidParameterError,
    NonCommutingError,
)
from .exactnum import qidentity, qmatrix, qpow, qrows, qscale, rank_exact, to_object_array
from .matring import check_commuting
from .poly import MonomialOrder, Poly, Scalar, clean_scalar, interpolation_weights, lagrange_basis

logger = logging.getLogger(__name__)

Layer = tuple[tuple[Poly, ...], ...]


def _check_order(order: Sequence[int], n: int) -> tuple[int, ...]:
    order = tuple(int(v) for v in order)
    if sorted(order) != list(range(n)):
        raise InvalidParameterError(f'{order} is not a permutation of 0..{n - 1}.')
    return order


def _check_univariate(entry: Poly, d: int, where: str):
    if entry.nvars != 1:
        raise DimensionMismatchError(f'{where}: entries must be univariate.')
    if entry.degree() > d:
        raise InvalidParameterError(f'{where}: entry degree {entry.degree()} exceeds d = {d}.')


@dataclass(frozen=True)
class Roabp:
    """General ROABP: layer i is a matrix of univariate polynomials in x_{order[i]}."""

    n: int
    d: int
    order: tuple[int, ...]
    layers: tuple[Layer, ...]
    u: tuple[Fraction, ...]
    c: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, 'order', _check_order(self.order, self.n))
        object.__setattr__(self, 'u', tuple(Fraction(v) for v in self.u))
        object.__setattr__(self, 'c', tuple(Fraction(v) for v in self.c))
        if len(self.layers) != self.n:
            raise DimensionMismatchError(f'Expected {self.n} layers, got {len(self.layers)}.')
        cols = len(self.u)
        for i, layer in enumerate(self.layers):
            if len(layer) != cols:
                raise DimensionMismatchError(
                    f'Layer {i} has {len(layer)} rows, expected {cols}.'
                )
            widths = {len(row) for row in layer}
            if len(widths) > 1:
                raise DimensionMismatchError(f'Layer {i} has ragged rows.')
            cols = widths.pop() if widths else 0
            for row in layer:
                for entry in row:
                    _check_univariate(entry, self.d, f'layer {i}')
        if len(self.c) != cols:
            raise DimensionMismatchError(f'c has {len(self.c)} entries, expected {cols}.')

    @property
    def width(self) -> int:
        dims = [len(self.u)] + [len(layer[0]) if layer else 0 for layer in self.layers]
        return max(dims, default=0)


@dataclass(frozen=True)
class CommRoabp:
    """Commutative ROABP stored by its coefficient matrices A[i][j] (layer i, power j)."""

    n: int
    d: int
    w: int
    coeff_matrices: tuple[tuple[DomainMatrix, ...], ...]
    b: tuple[Fraction, ...]
    c: tuple[Fraction, ...]

    def __post_init__(self):
        object.__setattr__(self, 'b', tuple(Fraction(v) for v in self.b))
        object.__setattr__(self, 'c', tuple(Fraction(v) for v in self.c))
        object.__setattr__(
            self, 'coeff_matrices', tuple(tuple(m.to_dense() for m in mats) for mats in self.coeff_matrices)
        )
        if len(self.coeff_matrices) != self.n:
            raise DimensionMismatchError(
                f'Expected {self.n} layers of coefficient matrices, got {len(self.coeff_matrices)}.'
            )
        for i, mats in enumerate(self.coeff_matrices):
            if len(mats) != self.d + 1:
                raise DimensionMismatchError(
                    f'Layer {i} has {len(mats)} coefficient matrices, expected {self.d + 1}.'
                )
            for m in mats:
                if m.shape != (self.w, self.w):
                    raise DimensionMismatchError(
                        f'Layer {i} has a {m.shape} matrix, expected {self.w}×{self.w}.'
                    )
        if len(self.b) != self.w or len(self.c) != self.w:
            raise DimensionMismatchError(f'Boundary vectors must have length {self.w}.')
        if not check_commuting(self.distinct_matrices()):
            raise NonCommutingError('Coefficient matrices do not pairwise commute.')

    def distinct_matrices(self) -> list[DomainMatrix]:
        """Coefficient matrices with exact duplicates removed, in layer/power order."""
        seen: list[DomainMatrix] = []
        for mats in self.coeff_matrices:
            for m in mats:
                if not any(m == other for other in seen):
                    seen.append(m)
        return seen

    @cached_property
    def _object_matrices(self) -> list[list[np.ndarray]]:
        return [[to_object_array(m) for m in mats] for mats in self.coeff_matrices]

    def layer_value(self, i: int, x: Scalar) -> np.ndarray:
        mats = self._object_matrices[i]
        value = np.zeros((self.w, self.w), dtype=object)
        value[:] = Fraction(0)
        for j, m in enumerate(mats):
            value = value + m * (x**j)
        return value

    def layer_entry(self, i: int, row: int, col: int) -> Poly:
        return Poly.univariate([qrows(m)[row][col] for m in self.coeff_matrices[i]])


@dataclass(frozen=True)
class DiagRoabp:
    """Σ_j weights[j]·Π_i rows[j][i](x_i)."""

    n: int
    d: int
    w: int
    rows: tuple[tuple[Poly, ...], ...]
    weights: tuple[Scalar, ...]

    def __post_init__(self):
        object.__setattr__(self, 'weights', tuple(clean_scalar(v) for v in self.weights))
        if len(self.rows) != self.w or len(self.weights) != self.w:
            raise DimensionMismatchError(
                f'Width {self.w} needs {self.w} rows and weights, got {len(self.rows)} and {len(self.weights)}.'
            )
        for j, row in enumerate(self.rows):
            if len(row) != self.n:
                raise DimensionMismatchError(f'Row {j} has {len(row)} factors, expected {self.n}.')
            for entry in row:
                _check_univariate(entry, self.d, f'row {j}')

    @property
    def is_rational(self) -> bool:
        return all(isinstance(w, Fraction) for w in self.weights) and all(
            entry.is_rational for row in self.rows for entry in row
        )


@dataclass(frozen=True)
class NisanProfile:
    order: tuple[int, ...]
    ranks: tuple[int, ...]
    size: int
    width: int


@dataclass(frozen=True)
class DiagCurveForm:
    """f(x) = Σ_{t ∈ nodes} Π_i G_i(t, x_i); each factor is a Poly in (t, x)."""

    factors: tuple[Poly, ...]
    nodes: tuple[Scalar, ...]


def _point(n: int, point: Sequence[Any]) -> list[Scalar]:
    if len(point) != n:
        raise DimensionMismatchError(f'Point has {len(point)} coordinates, expected {n}.')
    return [clean_scalar(x) for x in point]


def _vector(values: Sequence[Any]) -> np.ndarray:
    out = np.empty(len(values), dtype=object)
    for k, v in enumerate(values):
        out[k] = v
    return out


@singledispatch
def eval_roabp(r: Any, point: Sequence[Any]) -> Scalar:
    """Evaluates a ROABP of any kind at a point."""
    raise TypeError(f'Cannot evaluate {type(r).__name__} as a ROABP.')


@eval_roabp.register
def _(r: Roabp, point: Sequence[Any]) -> Scalar:
    xs = _point(r.n, point)
    vec = _vector(r.u)
    for layer, var in zip(r.layers, r.order):
        rows, cols = len(layer), len(layer[0]) if layer else 0
        mat = np.empty((rows, cols), dtype=object)
        for a, row in enumerate(layer):
            for b, entry in enumerate(row):
                mat[a, b] = entry((xs[var],))
        vec = vec @ mat if rows else np.zeros(cols, dtype=object)
    return clean_scalar(sum(vec * _vector(r.c), Fraction(0)))


@eval_roabp.register
def _(r: CommRoabp, point: Sequence[Any]) -> Scalar:
    xs = _point(r.n, point)
    vec = _vector(r.b)
    for i in range(r.n):
        vec = vec @ r.layer_value(i, xs[i])
    return clean_scalar(sum(vec * _vector(r.c), Fraction(0)))


@eval_roabp.register
def _(r: DiagRoabp, point: Sequence[Any]) -> Scalar:
    xs = _point(r.n, point)
    total: Scalar = Fraction(0)
    for weight, row in zip(r.weights, r.rows):
        total = total + weight * math.prod((entry((x,)) for entry, x in zip(row, xs)), start=Fraction(1))
    return total


@eval_roabp.register
def _(r: Poly, point: Sequence[Any]) -> Scalar:
    return r(point)


def _guard_expand(n: int, d: int, max_terms: int | None):
    cap = SETTINGS.guards.max_expand_terms if max_terms is None else max_terms
    if (d + 1) ** n > cap:
        raise GuardExceededError(f'Expansion would enumerate (d+1)^n = {(d + 1) ** n} > {cap} monomials.')


def _contract(vec: list[Poly], layers: list[list[list[Poly]]], c: Sequence[Any], n: int) -> Poly:
    for layer in layers:
        cols = len(layer[0]) if layer else 0
        nxt = [Poly.zero(n) for _ in range(cols)]
        for a, entry_row in enumerate(layer):
            if vec[a].is_zero:
                continue
            for b, entry in enumerate(entry_row):
                if not entry.is_zero:
                    nxt[b] = nxt[b] + vec[a] * entry
        vec = nxt
    result = Poly.zero(n)
    for poly, weight in zip(vec, c):
        result = result + poly * weight
    return result


@singledispatch
def expand(r: Any, max_terms: int | None = None) -> Poly:
    """Full sparse expansion of the computed polynomial."""
    raise TypeError(f'Cannot expand {type(r).__name__}.')


@expand.register
def _(r: Roabp, max_terms: int | None = None) -> Poly:
    _guard_expand(r.n, r.d, max_terms)
    layers = [
        [[entry.embed(r.n, [var]) for entry in row] for row in layer]
        for layer, var in zip(r.layers, r.order)
    ]
    return _contract([Poly.constant(v, r.n) for v in r.u], layers, r.c, r.n)


@expand.register
def _(r: CommRoabp, max_terms: int | None = None) -> Poly:
    _guard_expand(r.n, r.d, max_terms)
    layers = []
    for i, mats in enumerate(r.coeff_matrices):
        entries = [qrows(m) for m in mats]
        layers.append(
            [
                [
                    Poly(r.n, {tuple(j if v == i else 0 for v in range(r.n)): entries[j][a][b] for j in range(r.d + 1)})
                    for b in range(r.w)
                ]
                for a in range(r.w)
            ]
        )
    return _contract([Poly.constant(v, r.n) for v in r.b], layers, r.c, r.n)


@expand.register
def _(r: DiagRoabp, max_terms: int | None = None) -> Poly:
    _guard_expand(r.n, r.d, max_terms)
    result = Poly.zero(r.n)
    for weight, row in zip(r.weights, r.rows):
        term = Poly.constant(weight, r.n)
        for i, entry in enumerate(row):
            term = term * entry.embed(r.n, [i])
        result = result + term
    return result


@expand.register
def _(r: Poly, max_terms: int | None = None) -> Poly:
    return r


def nisan_profile(f: Poly, order: Sequence[int] | None = None) -> NisanProfile:
    """Exact ranks of the prefix/suffix coefficient matrices of f under an order."""
    if not f.is_rational:
        raise InvalidParameterError('Nisan profiles need a polynomial with rational coefficients.')
    n = f.nvars
    order = tuple(range(n)) if order is None else _check_order(order, n)
    key = MonomialOrder.GRADED_LEX.key

    ranks = []
    for i in range(1, n):
        prefix, suffix = order[:i], order[i:]
        split = {
            e: (tuple(e[v] for v in prefix), tuple(e[v] for v in suffix)) for e in f.terms
        }
        row_keys = sorted({p for p, _ in split.values()}, key=key)
        col_keys = sorted({s for _, s in split.values()}, key=key)
        row_idx = {k: a for a, k in enumerate(row_keys)}
        col_idx = {k: b for b, k in enumerate(col_keys)}
        rows = [[Fraction(0)] * len(col_keys) for _ in row_keys]
        for e, (p, s) in split.items():
            rows[row_idx[p]][col_idx[s]] = f.terms[e]
        ranks.append(rank_exact(rows) if rows else 0)

    fallback = 0 if f.is_zero else 1
    return NisanProfile(order, tuple(ranks), sum(ranks), max(ranks, default=fallback))


def all_orders(n: int, max_vars: int | None = None) -> list[tuple[int, ...]]:
    cap = SETTINGS.guards.max_order_vars if max_vars is None else max_vars
    if n > cap:
        raise GuardExceededError(f'Order enumeration is limited to n ≤ {cap}, got n = {n}.')
    return list(itertools.permutations(range(n)))


def nisan_profiles(f: Poly, orders: Sequence[Sequence[int]]) -> list[NisanProfile]:
    logger.info('Computing Nisan profiles for %d orders...', len(orders))
    return [nisan_profile(f, order) for order in orders]


def profiles_frame(profiles: Sequence[NisanProfile]) -> pd.DataFrame:
    """One row per order with its ranks, size and width."""
    return pd.DataFrame(
        {
            'order': [list(p.order) for p in profiles],
            'ranks': [list(p.ranks) for p in profiles],
            'size': [p.size for p in profiles],
            'width': [p.width for p in profiles],
        }
    )


def _shift_matrix(d: int, weights: Sequence[int]) -> DomainMatrix:
    rows = [[0] * (d + 1) for _ in range(d + 1)]
    for i, value in enumerate(weights):
        rows[i][i + 1] = value
    return qmatrix(rows)


def _unit(w: int, k: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(int(i == k)) for i in range(w))


def construct_esym_comm(n: int, d: int) -> CommRoabp:
    """Width d+1 commutative ROABP for ESym^d_n with layers I + A·x_i."""
    if n < 0 or d < 0 or d > n:
        raise InvalidParameterError(f'ESym needs 0 ≤ d ≤ n, got n = {n}, d = {d}.')
    shift = _shift_matrix(d, [1] * d)
    layer = (qidentity(d + 1), shift)
    return CommRoabp(n, 1, d + 1, tuple(layer for _ in range(n)), _unit(d + 1, 0), _unit(d + 1, d))


def construct_power_comm(n: int, d: int) -> CommRoabp:
    """Width d+1 commutative ROABP for (x_1+…+x_n)^d with coefficient matrices A^j/j!."""
    if n < 0 or d < 0:
        raise InvalidParameterError(f'Power construction needs n, d ≥ 0, got n = {n}, d = {d}.')
    shift = _shift_matrix(d, [d - i for i in range(d)])
    layer = tuple(qscale(qpow(shift, j), Fraction(1, math.factorial(j))) for j in range(d + 1))
    return CommRoabp(n, d, d + 1, tuple(layer for _ in range(n)), _unit(d + 1, 0), _unit(d + 1, d))


def _default_nodes(count: int, nodes: Sequence[Any] | None) -> list[Scalar]:
    if nodes is None:
        return [Fraction(k) for k in range(count)]
    if len(nodes) != count:
        raise InvalidParameterError(f'Expected {count} nodes, got {len(nodes)}.')
    return [clean_scalar(a) for a in nodes]


def construct_esym_diag(n: int, d: int, nodes: Sequence[Any] | None = None) -> DiagRoabp:
    """Width n+1 diagonal ROABP for ESym^d_n by interpolating the t^d coefficient of Π(1 + t·x_i)."""
    if n < 0 or d < 0 or d > n:
        raise InvalidParameterError(f'ESym needs 0 ≤ d ≤ n, got n = {n}, d = {d}.')
    nodes = _default_nodes(n + 1, nodes)
    weights = interpolation_weights(nodes)[d]
    rows = tuple(tuple(Poly.univariate([1, a]) for _ in range(n)) for a in nodes)
    return DiagRoabp(n, 1, n + 1, rows, tuple(weights))


def construct_power_diag(n: int, d: int, nodes: Sequence[Any] | None = None) -> DiagRoabp:
    """Width nd+1 diagonal ROABP for (x_1+…+x_n)^d from truncated exponentials."""
    if n < 0 or d < 0:
        raise InvalidParameterError(f'Power construction needs n, d ≥ 0, got n = {n}, d = {d}.')
    nodes = _default_nodes(n * d + 1, nodes)
    weights = [math.factorial(d) * b for b in interpolation_weights(nodes)[d]]
    rows = tuple(
        tuple(
            Poly.univariate([a**k / math.factorial(k) for k in range(d + 1)]) for _ in range(n)
        )
        for a in nodes
    )
    return DiagRoabp(n, d, n * d + 1, rows, tuple(weights))


def construct_random_comm(
    n: int,
    d: int,
    w: int,
    seed: int,
    jordan: bool = False,
    poly_degree: int = 2,
) -> CommRoabp:
    """Coefficient matrices q(B) for one random integer matrix B = P·D·P⁻¹ with small spectrum."""
    if w < 1 or w > 7:
        raise InvalidParameterError(f'Random families support 1 ≤ w ≤ 7, got {w}.')
    rng = np.random.default_rng(seed)
    spectrum = [int(v) for v in rng.choice(np.arange(-3, 4), size=w, replace=False)]
    diag = [[0] * w for _ in range(w)]
    for k, value in enumerate(spectrum):
        diag[k][k] = value
    if jordan and w >= 2:
        diag[1][1] = diag[0][0]
        diag[0][1] = 1

    # unit triangular factors keep P unimodular, so B stays integral
    lower = [[int(rng.integers(-1, 2)) if a > b else int(a == b) for b in range(w)] for a in range(w)]
    upper = [[int(rng.integers(-1, 2)) if a < b else int(a == b) for b in range(w)] for a in range(w)]
    p = qmatrix(lower).matmul(qmatrix(upper))
    b_matrix = p.matmul(qmatrix(diag)).matmul(p.inv())

    powers = [qpow(b_matrix, k) for k in range(poly_degree + 1)]

    def random_element() -> DomainMatrix:
        coeffs = rng.integers(-2, 3, size=poly_degree + 1)
        total = qmatrix([[0] * w for _ in range(w)])
        for coeff, power in zip(coeffs, powers):
            total = total + qscale(power, int(coeff))
        return total

    layers = tuple(tuple(random_element() for _ in range(d + 1)) for _ in range(n))

    def random_vector() -> tuple[Fraction, ...]:
        vec = [int(v) for v in rng.integers(-3, 4, size=w)]
        if not any(vec):
            vec[0] = 1
        return tuple(Fraction(v) for v in vec)

    logger.debug('Random commutative family: spectrum %s, jordan=%s', spectrum, jordan)
    return CommRoabp(n, d, w, layers, random_vector(), random_vector())


def comm_to_roabp(cr: CommRoabp) -> Roabp:
    """Per-layer univariate form of a commutative ROABP (identity order)."""
    layers = tuple(
        tuple(tuple(cr.layer_entry(i, a, b) for b in range(cr.w)) for a in range(cr.w))
        for i in range(cr.n)
    )
    return Roabp(cr.n, cr.d, tuple(range(cr.n)), layers, cr.b, cr.c)


def roabp_to_comm(r: Roabp) -> CommRoabp:
    """Coefficient-matrix form of a ROABP whose square layers have commuting coefficients."""
    w = len(r.u)
    for i, layer in enumerate(r.layers):
        if len(layer) != w or any(len(row) != w for row in layer):
            raise DimensionMismatchError(f'Layer {i} is not {w}×{w}; no commutative form exists.')
    mats: list[tuple[DomainMatrix, ...]] = [()] * r.n
    for layer, var in zip(r.layers, r.order):
        mats[var] = tuple(
            qmatrix([[entry.coefficient((j,)) for entry in row] for row in layer], w)
            for j in range(r.d + 1)
        )
    return CommRoabp(r.n, r.d, w, tuple(mats), r.u, r.c)


def to_curve_form(r: DiagRoabp) -> DiagCurveForm:
    """G_i(t, x_i) = Σ_j L_j(t)·rows[j][i](x_i), weights folded into the first factor."""
    nodes = tuple(Fraction(j) for j in range(r.w))
    basis = lagrange_basis(nodes)
    factors = []
    for i in range(r.n):
        factor = Poly.zero(2)
        for j, (L, row) in enumerate(zip(basis, r.rows)):
            term = L.embed(2, [0]) * row[i].embed(2, [1])
            factor = factor + (term * r.weights[j] if i == 0 else term)
        factors.append(factor)
    return DiagCurveForm(tuple(factors), nodes)


def eval_curve_form(cf: DiagCurveForm, point: Sequence[Any]) -> Scalar:
    xs = _point(len(cf.factors), point)
    total: Scalar = Fraction(0)
    for t in cf.nodes:
        total = total + math.prod((g((t, x)) for g, x in zip(cf.factors, xs)), start=Fraction(1))
    return total
