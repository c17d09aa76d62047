"""Commutative ROABP → curve polynomial modulo J → diagonal ROABP, and the equality check.

The layers Σ_j A_{i,j}·x_i^j are rewritten as polynomials G_i(t, x_i) in the
ring generated by the coefficient matrices, so that F(x) = Σ_a β_a·coeff_a of
Π_i G_i(t, x_i) reduced modulo J. The reduction is replaced by derivative
functionals at the variety points, each of which becomes a weighted sum of
evaluations of Π_i G_i(y, x_i): one diagonal row per evaluation point y.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
from sympy.polys.matrices import DomainMatrix

from ..config import SETTINGS
from ..utils import make_rng, merge_points, random_rational_point, relative_residual
from .dualspace import DualBasis, build_dual_basis
from .errors import (
    DimensionMismatchError,
    GuardExceededError,
    InvalidParameterError,
    NotInRingError,
    RingClosureError,
)
from .exactnum import is_scalar_identity, qrows
from .matring import MatrixRing, build_ring, monomial_matrix, reduce_exact, represent_in_quotient
from .poly import Monomial, Poly, Scalar, clean_scalar
from .roabp import CommRoabp, DiagRoabp, eval_roabp
from .waring import (
    FunctionalEvalPlan,
    WaringDecomposition,
    catalecticant_lower_bound,
    dpd,
    functional_eval_plan,
    poly_waring,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CurveForm:
    """G_i(t, x_i) = Σ_j coeffs[i][j](t)·x_i^j with every coeffs[i][j] supported on the normal set."""

    r: int
    coeffs: tuple[tuple[Poly, ...], ...]
    output_weights: dict[Monomial, Fraction]
    t_degree: int

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @property
    def d(self) -> int:
        return len(self.coeffs[0]) - 1 if self.coeffs else 0

    def factor(self, i: int) -> Poly:
        """G_i as a polynomial in (t_1, …, t_r, x_i)."""
        result = Poly.zero(self.r + 1)
        for j, g in enumerate(self.coeffs[i]):
            x_power = Poly.monomial((0,) * self.r + (j,))
            result = result + g.embed(self.r + 1, list(range(self.r))) * x_power
        return result

    def row_at(self, y: Sequence[Any]) -> tuple[Poly, ...]:
        """The univariate factors G_i(y, ·)."""
        return tuple(Poly.univariate([g(y) for g in coeffs]) for coeffs in self.coeffs)

    def evaluate(self, ring: MatrixRing, point: Sequence[Any]) -> Scalar:
        return eval_curve(self, ring, point)


@dataclass(frozen=True)
class OperatorSummary:
    point: int
    index: int
    op_poly: Poly
    degree: int
    weight: complex
    decomposition: WaringDecomposition
    plan_size: int
    dpd: int | None
    lower_bound: int | None

    @property
    def decomposition_size(self) -> int:
        return self.decomposition.size


@dataclass(frozen=True)
class VerificationReport:
    trials: int
    max_residual: float
    tol: float
    passed: bool
    worst_point: tuple[Fraction, ...] | None = None


@dataclass(frozen=True)
class ConversionReport:
    input_width: int
    r: int
    m: int
    variety_size: int
    local_dims: tuple[int, ...]
    plan_sizes: tuple[int, ...]
    decomposition_sizes: tuple[int, ...]
    operators: tuple[OperatorSummary, ...]
    output_width: int
    uniform_bound: int
    accounting_bound: int
    d_prime: int
    psi_condition: float
    verification: VerificationReport | None = field(default=None)


def _in_ring(kept: Sequence[DomainMatrix], m: DomainMatrix) -> bool:
    try:
        represent_in_quotient(build_ring(kept), m)
    except (NotInRingError, RingClosureError):
        return False
    return True


def select_generators(cr: CommRoabp) -> list[DomainMatrix]:
    """Distinct coefficient matrices, minus scalars and matrices already in the ring of earlier ones."""
    distinct = cr.distinct_matrices()
    kept: list[DomainMatrix] = []
    for m in distinct:
        if is_scalar_identity(m):
            continue
        if kept and _in_ring(kept, m):
            logger.debug('Dropping a generator already in the ring of %d kept matrices', len(kept))
            continue
        kept.append(m)
    if not kept:
        kept = distinct[:1]
    logger.info('Selected %d generators out of %d distinct matrices', len(kept), len(distinct))
    return kept


def comm_to_curve(cr: CommRoabp) -> tuple[MatrixRing, CurveForm]:
    """Builds the ring of the coefficient matrices and represents every layer coefficient in it."""
    ring = build_ring(select_generators(cr))
    coeffs = tuple(
        tuple(represent_in_quotient(ring, m) for m in mats) for mats in cr.coeff_matrices
    )

    weights: dict[Monomial, Fraction] = {}
    for a in ring.normal_set:
        rows = qrows(monomial_matrix(ring, a))
        weights[a] = sum(
            (cr.b[k] * rows[k][l] * cr.c[l] for k in range(cr.w) for l in range(cr.w)),
            start=Fraction(0),
        )

    t_degree = sum(max((g.degree() for g in layer), default=0) for layer in coeffs)
    return ring, CurveForm(ring.r, coeffs, weights, max(t_degree, 0))


def eval_curve(cf: CurveForm, ring: MatrixRing, point: Sequence[Any]) -> Scalar:
    """F(x) as Σ_a β_a·coeff_a of Π_i G_i(t, x_i) reduced modulo J."""
    if len(point) != cf.n:
        raise DimensionMismatchError(f'Point has {len(point)} coordinates, expected {cf.n}.')
    product = Poly.constant(1, cf.r)
    for coeffs, x in zip(cf.coeffs, point):
        x = clean_scalar(x)
        layer = Poly.zero(cf.r)
        for j, g in enumerate(coeffs):
            layer = layer + g * x**j
        product = reduce_exact(ring, product * layer)
    return sum(
        (product.coefficient(a) * beta for a, beta in cf.output_weights.items()),
        start=Fraction(0),
    )


def _operator_bounds(h: Poly) -> tuple[int | None, int | None]:
    try:
        return dpd(h), catalecticant_lower_bound(h)
    except GuardExceededError as e:
        logger.warning('Skipping DPD of an operator: %s', e)
        return None, None


def curve_to_diag(
    ring: MatrixRing,
    cf: CurveForm,
    tol: float | None = None,
    seed: int | None = None,
    workers: int | None = None,
    dual_basis: DualBasis | None = None,
) -> tuple[DiagRoabp, ConversionReport]:
    """Diagonal ROABP computing the same polynomial as the curve form."""
    tol = SETTINGS.run.tol if tol is None else tol
    workers = SETTINGS.convert.workers if workers is None else workers
    dedupe_tol = SETTINGS.convert.dedupe_tol

    db = build_dual_basis(ring, tol=tol, seed=seed) if dual_basis is None else dual_basis
    beta = np.array([complex(cf.output_weights[a]) for a in ring.normal_set], dtype=complex)
    beta_prime = beta @ db.gamma
    cutoff = tol * float(np.abs(beta_prime).max(initial=0.0))

    operators = [
        (u, v, space, op, complex(bp))
        for (u, v, space, op), bp in zip(db.operators(), beta_prime)
        if abs(bp) > cutoff
    ]
    logger.info('%d of %d dual operators carry weight', len(operators), ring.m)

    d_prime = max([cf.t_degree, *(op.degree() for _, _, _, op, _ in operators)])

    def build_plan(item) -> tuple[WaringDecomposition, FunctionalEvalPlan]:
        _, _, space, op, _ = item
        dec = poly_waring(op.op_poly)
        return dec, functional_eval_plan(op.op_poly, dec, d_prime, space.point.coords)

    if workers > 1 and len(operators) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            plans = list(pool.map(build_plan, operators))
    else:
        plans = [build_plan(item) for item in operators]

    points: list[tuple[Scalar, ...]] = []
    weights: list[Scalar] = []
    summaries = []
    for (u, v, _, op, bp), (dec, plan) in zip(operators, plans):
        points.extend(plan.points)
        weights.extend(bp * lam for lam in plan.weights)
        op_dpd, lower = _operator_bounds(op.op_poly)
        summaries.append(
            OperatorSummary(u, v, op.op_poly, op.degree(), bp, dec, plan.size, op_dpd, lower)
        )

    merged_points, merged_weights = merge_points(points, weights, dedupe_tol)
    if not merged_points:
        # F is identically zero
        merged_points, merged_weights = [tuple(complex(x) for x in db.spaces[0].point.coords)], [0j]
    rows = tuple(cf.row_at(y) for y in merged_points)
    dr = DiagRoabp(cf.n, cf.d, len(rows), rows, tuple(merged_weights))

    plan_sizes = tuple(s.plan_size for s in summaries)
    report = ConversionReport(
        input_width=ring.w,
        r=ring.r,
        m=ring.m,
        variety_size=len(db.spaces),
        local_dims=tuple(s.local_dim for s in db.spaces),
        plan_sizes=plan_sizes,
        decomposition_sizes=tuple(s.decomposition_size for s in summaries),
        operators=tuple(summaries),
        output_width=dr.w,
        uniform_bound=ring.m * max(plan_sizes, default=0),
        accounting_bound=sum(plan_sizes),
        d_prime=d_prime,
        psi_condition=db.condition,
    )
    logger.info('Diagonal ROABP of width %d (accounting bound %d)', dr.w, report.accounting_bound)
    return dr, report


def _arity(p: Any) -> int:
    if isinstance(p, Poly):
        return p.nvars
    return p.n


def verify_equal(
    p: Any,
    q: Any,
    trials: int | None = None,
    seed: int | None = None,
    tol: float | None = None,
    bound: int | None = None,
) -> VerificationReport:
    """Largest relative disagreement of p and q over seeded random rational points."""
    trials = SETTINGS.run.trials if trials is None else trials
    seed = SETTINGS.run.seed if seed is None else seed
    tol = SETTINGS.run.tol if tol is None else tol
    bound = SETTINGS.verify.coord_bound if bound is None else bound
    n = _arity(p)
    if _arity(q) != n:
        raise DimensionMismatchError(f'Cannot compare objects in {n} and {_arity(q)} variables.')

    rng = make_rng(seed)
    worst, worst_point = 0.0, None
    for _ in range(trials):
        point = random_rational_point(rng, n, bound)
        residual = relative_residual(eval_roabp(p, point), eval_roabp(q, point))
        if residual > worst or worst_point is None:
            worst, worst_point = residual, tuple(point)
    passed = worst <= tol
    logger.info('Verification over %d points: max residual %.3e (%s)', trials, worst, 'pass' if passed else 'FAIL')
    return VerificationReport(trials, worst, tol, passed, worst_point)


def _rationalize(value: Scalar, max_denominator: int) -> Scalar:
    if isinstance(value, Fraction):
        return value
    if abs(value.imag) > 1e-9 * max(1.0, abs(value.real)):
        raise InvalidParameterError(f'Cannot rationalize the non-real coefficient {value}.')
    return Fraction(value.real).limit_denominator(max_denominator)


def rationalize_diag(dr: DiagRoabp, max_denominator: int | None = None) -> DiagRoabp:
    """Rounds real-valued coefficients and weights to the nearest rational with a bounded denominator."""
    max_denominator = SETTINGS.convert.max_denominator if max_denominator is None else max_denominator
    rows = tuple(
        tuple(entry.map_coefficients(lambda c: _rationalize(c, max_denominator)) for entry in row)
        for row in dr.rows
    )
    weights = tuple(_rationalize(w, max_denominator) for w in dr.weights)
    return replace(dr, rows=rows, weights=weights)


def convert_comm(
    cr: CommRoabp,
    tol: float | None = None,
    seed: int | None = None,
    trials: int | None = None,
    verify_tol: float | None = None,
    rationalize: bool | None = None,
) -> tuple[DiagRoabp, ConversionReport]:
    """The full pipeline with verification of the output against the input."""
    seed = SETTINGS.run.seed if seed is None else seed
    verify_tol = SETTINGS.convert.verify_tol if verify_tol is None else verify_tol
    rationalize = SETTINGS.convert.rationalize if rationalize is None else rationalize
    if cr.n == 0:
        raise InvalidParameterError('Conversion needs at least one variable.')

    ring, cf = comm_to_curve(cr)
    dr, report = curve_to_diag(ring, cf, tol=tol, seed=seed)
    if rationalize:
        dr = rationalize_diag(dr)
    verification = verify_equal(cr, dr, trials=trials, seed=seed, tol=verify_tol)
    return dr, replace(report, verification=verification)
