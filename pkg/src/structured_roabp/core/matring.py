"""The commutative ring generated by commuting rational matrices.

Monomials t^a in r variables stand for the matrices A^a = A_1^{a_1}·…·A_r^{a_r}.
The ideal of dependencies J collects the polynomials that vanish when the
generators are substituted; its normal set and border relations are computed
by an exact closure over ``QQ``, and the variety by the eigenvalue method on the
multiplication matrices.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Any, Sequence

import numpy as np
import scipy.linalg
from sympy.polys.matrices import DomainMatrix

from ..config import SETTINGS
from .errors import (
    DimensionMismatchError,
    EigenConvergenceError,
    InvalidParameterError,
    NonCommutingError,
    NotInRingError,
    RingClosureError,
    VarietyError,
)
from .exactnum import (
    commutes,
    eigen,
    qflatten,
    qidentity,
    qmatrix,
    qscale,
    solve_exact,
    to_complex_array,
)
from .poly import Monomial, MonomialOrder, Poly, divides, monomials_of_degree

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class VarietyPoint:
    coords: tuple[complex, ...]


@dataclass(frozen=True)
class MatrixRing:
    w: int
    generators: tuple[DomainMatrix, ...]
    normal_set: tuple[Monomial, ...]
    # border monomial b -> coefficients c_a over the normal set with A^b = Σ c_a A^a
    border_relations: dict[Monomial, tuple[Fraction, ...]]
    mon_to_matrix: dict[Monomial, DomainMatrix]

    @property
    def r(self) -> int:
        return len(self.generators)

    @property
    def m(self) -> int:
        return len(self.normal_set)

    @cached_property
    def ns_index(self) -> dict[Monomial, int]:
        return {a: k for k, a in enumerate(self.normal_set)}

    @cached_property
    def border_monomials(self) -> tuple[Monomial, ...]:
        return tuple(sorted(self.border_relations, key=MonomialOrder.GRADED_LEX.key))

    @cached_property
    def basis_matrix(self) -> DomainMatrix:
        """w²×m matrix whose columns are the vectorized normal-set matrices."""
        return _columns([qflatten(self.mon_to_matrix[a]) for a in self.normal_set], self.w**2)

    def border_basis(self) -> list[Poly]:
        """t^b − Σ_a c_a t^a for every border monomial b."""
        polys = []
        for b in self.border_monomials:
            terms = {b: Fraction(1)}
            for a, coeff in zip(self.normal_set, self.border_relations[b]):
                if coeff:
                    terms[a] = -coeff
            polys.append(Poly(self.r, terms))
        return polys


def _columns(vectors: Sequence[Sequence[Fraction]], length: int) -> DomainMatrix:
    return qmatrix([[vec[row] for vec in vectors] for row in range(length)], len(vectors))


def _unit_exponent(r: int, i: int) -> Monomial:
    return tuple(int(k == i) for k in range(r))


def _add(a: Monomial, b: Monomial) -> Monomial:
    return tuple(x + y for x, y in zip(a, b))


def check_commuting(mats: Sequence[DomainMatrix]) -> bool:
    """True iff all matrices are square of one size and pairwise commute exactly."""
    if not mats:
        return True
    size = mats[0].shape[0]
    for m in mats:
        if m.shape != (size, size):
            raise DimensionMismatchError(f'Expected {size}×{size} matrices, got {m.shape}.')
    return all(
        commutes(mats[i], mats[j]) for i in range(len(mats)) for j in range(i + 1, len(mats))
    )


def build_ring(generators: Sequence[DomainMatrix]) -> MatrixRing:
    """Normal set and border relations of the ideal of dependencies by exact closure."""
    gens = tuple(g.to_dense() for g in generators)
    if not gens:
        raise InvalidParameterError('A matrix ring needs at least one generator.')
    if not check_commuting(gens):
        raise NonCommutingError('Ring generators do not pairwise commute.')
    w, r = gens[0].shape[0], len(gens)
    cap = w * w + 1
    logger.info('Building ring of %d generators of size %d×%d...', r, w, w)

    normal_set: list[Monomial] = []
    vectors: list[list[Fraction]] = []
    matrices: dict[Monomial, DomainMatrix] = {}
    corners: list[Monomial] = []

    degree = 0
    while True:
        candidates = [
            a for a in monomials_of_degree(r, degree) if not any(divides(c, a) for c in corners)
        ]
        if not candidates:
            break
        if degree > cap:
            raise RingClosureError(f'Closure did not terminate by total degree {cap}.')
        for a in candidates:
            if degree == 0:
                mat = qidentity(w)
            else:
                i = next(k for k, e in enumerate(a) if e > 0)
                mat = matrices[_add(a, tuple(-x for x in _unit_exponent(r, i)))].matmul(gens[i])
            vec = qflatten(mat)
            in_span = (
                solve_exact(_columns(vectors, w * w), vec) is not None
                if vectors
                else not any(vec)
            )
            if in_span:
                corners.append(a)
                logger.debug('Monomial %s depends on the normal set', a)
            else:
                normal_set.append(a)
                vectors.append(vec)
                matrices[a] = mat
        degree += 1

    basis = _columns(vectors, w * w)
    relations: dict[Monomial, tuple[Fraction, ...]] = {}
    ns_lookup = set(normal_set)
    for a in normal_set:
        for i in range(r):
            b = _add(a, _unit_exponent(r, i))
            if b in ns_lookup or b in relations:
                continue
            coeffs = solve_exact(basis, qflatten(matrices[a].matmul(gens[i])))
            if coeffs is None:
                raise RingClosureError(f'Border monomial {b} is not spanned by the normal set.')
            relations[b] = tuple(coeffs)

    logger.info('Normal set has %d monomials, %d border relations', len(normal_set), len(relations))
    return MatrixRing(w, gens, tuple(normal_set), relations, matrices)


def minimal_polynomial(a: DomainMatrix) -> Poly:
    """Monic least-degree p with p(A) = 0, from the first dependency among I, A, A², …"""
    rows, cols = a.shape
    if rows != cols:
        raise DimensionMismatchError(f'Minimal polynomial needs a square matrix, got {a.shape}.')
    a = a.to_dense()
    power = qidentity(rows)
    vectors: list[list[Fraction]] = []
    for k in range(rows + 1):
        vec = qflatten(power)
        coeffs = solve_exact(_columns(vectors, rows * rows), vec) if vectors else (None if any(vec) else [])
        if coeffs is not None:
            terms = {(k,): Fraction(1)}
            for j, c in enumerate(coeffs):
                if c:
                    terms[(j,)] = -c
            return Poly(1, terms)
        vectors.append(vec)
        power = power.matmul(a)
    raise RingClosureError('No dependency among powers up to the matrix size.')


def represent_in_quotient(ring: MatrixRing, b: DomainMatrix) -> Poly:
    """The unique normal-set-supported polynomial whose value at the generators is B."""
    if b.shape != (ring.w, ring.w):
        raise DimensionMismatchError(f'Expected a {ring.w}×{ring.w} matrix, got {b.shape}.')
    coeffs = solve_exact(ring.basis_matrix, qflatten(b))
    if coeffs is None:
        raise NotInRingError('Matrix lies outside the span of the normal-set matrices.')
    return Poly(ring.r, dict(zip(ring.normal_set, coeffs)))


def monomial_matrix(ring: MatrixRing, a: Monomial) -> DomainMatrix:
    if a in ring.mon_to_matrix:
        return ring.mon_to_matrix[a]
    result = qidentity(ring.w)
    for gen, e in zip(ring.generators, a):
        for _ in range(e):
            result = result.matmul(gen)
    return result


def evaluate_at_matrices(ring: MatrixRing, g: Poly) -> DomainMatrix:
    """Σ_a g_a·A^a for a rational polynomial g in the ring's variables."""
    if g.nvars != ring.r:
        raise DimensionMismatchError(f'Polynomial has {g.nvars} variables, ring has {ring.r}.')
    if not g.is_rational:
        raise InvalidParameterError('Matrix substitution needs rational coefficients.')
    total = qmatrix([[0] * ring.w for _ in range(ring.w)])
    for a, coeff in g.terms.items():
        total = total + qscale(monomial_matrix(ring, a), coeff)
    return total


def reduce_exact(ring: MatrixRing, g: Poly) -> Poly:
    """Normal form of g modulo J by rewriting border monomials, largest monomial first."""
    if g.nvars != ring.r:
        raise DimensionMismatchError(f'Polynomial has {g.nvars} variables, ring has {ring.r}.')
    key = MonomialOrder.GRADED_LEX.key
    pending = dict(g.terms)
    reduced: dict[Monomial, Any] = {}
    while pending:
        a = max(pending, key=key)
        coeff = pending.pop(a)
        if a in ring.ns_index:
            reduced[a] = reduced.get(a, 0) + coeff
            continue
        b = next(b for b in ring.border_monomials if divides(b, a))
        rest = tuple(x - y for x, y in zip(a, b))
        for s, k in zip(ring.normal_set, ring.border_relations[b]):
            if k:
                target = _add(rest, s)
                value = pending.get(target, 0) + coeff * k
                if value == 0:
                    pending.pop(target, None)
                else:
                    pending[target] = value
    return Poly(ring.r, reduced)


def multiplication_matrices(ring: MatrixRing) -> list[DomainMatrix]:
    """For each t_i, the m×m matrix of "multiply by t_i, reduce" on the normal-set basis (images as columns)."""
    mats = []
    for i in range(ring.r):
        rows = [[Fraction(0)] * ring.m for _ in range(ring.m)]
        for col, a in enumerate(ring.normal_set):
            b = _add(a, _unit_exponent(ring.r, i))
            if b in ring.ns_index:
                rows[ring.ns_index[b]][col] = Fraction(1)
            else:
                for row, coeff in enumerate(ring.border_relations[b]):
                    rows[row][col] = coeff
        mats.append(qmatrix(rows, ring.m))
    return mats


def _point_scale(g: Poly, point: Sequence[complex]) -> float:
    return sum(abs(c) * abs(Poly(g.nvars, {a: 1})(point)) for a, c in g.terms.items())


def _kills_border(point: Sequence[complex], border: Sequence[Poly], tol: float) -> bool:
    return all(abs(g(point)) <= tol * max(1.0, _point_scale(g, point)) for g in border)


def _dedupe(points: list[list[complex]], tol: float) -> list[list[complex]]:
    kept: list[list[complex]] = []
    for p in points:
        radius = tol * (1 + max((abs(x) for x in p), default=0.0))
        if not any(max(abs(x - y) for x, y in zip(p, q)) <= radius for q in kept):
            kept.append(p)
    return kept


def _cluster_radii(cluster_tol: float, tol: float) -> list[float]:
    """Clustering radii from cluster_tol down to tol, two decades apart."""
    radii = [cluster_tol]
    while radii[-1] / 100 > tol:
        radii.append(radii[-1] / 100)
    if radii[-1] > tol:
        radii.append(tol)
    return radii


def _read_points(
    combination: np.ndarray, mult: list[np.ndarray], cluster_tol: float
) -> list[list[complex]]:
    """One candidate point per eigenvalue cluster of the random combination."""
    points = []
    radius = cluster_tol * max(1.0, float(np.linalg.norm(combination, 2)))
    for pair in eigen(combination.T, tol=cluster_tol):
        if pair.multiplicity == 1:
            v = pair.vector
            norm = np.vdot(v, v)
            points.append([complex(np.vdot(v, m.T @ v) / norm) for m in mult])
            continue
        # multiple root: average each M_i over the invariant subspace of the cluster
        _, z, sdim = scipy.linalg.schur(
            combination.astype(complex),
            output='complex',
            sort=lambda x, centre=pair.value: abs(x - centre) <= radius,
        )
        if sdim == 0:
            raise EigenConvergenceError('Schur reordering lost an eigenvalue cluster.')
        q = z[:, :sdim]
        points.append([complex(np.trace(q.conj().T @ m @ q) / sdim) for m in mult])
    return points


def variety(
    ring: MatrixRing,
    tol: float | None = None,
    seed: int | None = None,
    retries: int | None = None,
) -> list[VarietyPoint]:
    """Distinct common zeros of J by the eigenvalue method."""
    tol = SETTINGS.run.tol if tol is None else tol
    seed = SETTINGS.run.seed if seed is None else seed
    retries = SETTINGS.ring.eigen_retries if retries is None else retries
    bound = SETTINGS.ring.coeff_bound
    cluster_tol = SETTINGS.ring.cluster_tol

    mult = [to_complex_array(m) for m in multiplication_matrices(ring)]
    border = ring.border_basis()
    rng = np.random.default_rng(seed)

    for attempt in range(1, retries + 2):
        coeffs = rng.integers(-bound, bound, endpoint=True, size=ring.r).astype(float)
        if not coeffs.any():
            continue
        coeffs /= np.abs(coeffs).max()
        combination = sum(c * m for c, m in zip(coeffs, mult))
        # distinct points merged into one cluster fail the border check
        for radius in _cluster_radii(cluster_tol, tol):
            try:
                points = _dedupe(_read_points(combination, mult, radius), tol)
            except EigenConvergenceError as e:
                logger.warning('Variety attempt %d, radius %.1e: %s', attempt, radius, e)
                continue
            if len(points) <= ring.m and all(_kills_border(p, border, tol) for p in points):
                points.sort(key=lambda p: tuple((x.real, x.imag) for x in p))
                logger.info(
                    'Variety has %d points (attempt %d, cluster radius %.1e)', len(points), attempt, radius
                )
                return [VarietyPoint(tuple(p)) for p in points]
            logger.debug('Clusters at radius %.1e do not all lie on the variety', radius)
        logger.warning(
            'Variety attempt %d did not separate the points; retrying with fresh coefficients',
            attempt,
        )

    raise VarietyError(f'Could not compute a verified variety after {retries} retries.')
