"""Local dual spaces of J at variety points and the dual-basis constants.

At each point p the operators D with D(g)(p) = 0 for all g in J form a
down-closed space whose dimension is the local multiplicity. Evaluating a
polynomial under all these operators and applying the inverse of the
operator-by-monomial evaluation matrix gives its normal form modulo J.
"""

import logging
from dataclasses import dataclass
from typing import Iterator

import numpy as np
import scipy.linalg

from ..config import SETTINGS
from .errors import DualSpaceError, MultiplicityMismatchError, SingularDualBasisError
from .exactnum import numeric_nullspace
from .matring import MatrixRing, VarietyPoint, variety
from .poly import DerivOperator, Poly, monomials_up_to, multi_factorial, pairing_at_zero, translate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DualSpaceAtPoint:
    point: VarietyPoint
    basis: tuple[DerivOperator, ...]

    @property
    def local_dim(self) -> int:
        return len(self.basis)


@dataclass(frozen=True)
class DualBasis:
    ring: MatrixRing
    spaces: tuple[DualSpaceAtPoint, ...]
    psi: np.ndarray
    gamma: np.ndarray
    condition: float

    def operators(self) -> Iterator[tuple[int, int, DualSpaceAtPoint, DerivOperator]]:
        """(u, v, space, D_{u,v}) in the column order of gamma."""
        for u, space in enumerate(self.spaces):
            for v, op in enumerate(space.basis):
                yield u, v, space, op


def _shift_exponents(g: Poly, b: tuple[int, ...]) -> Poly:
    return Poly(g.nvars, {tuple(x + y for x, y in zip(e, b)): c for e, c in g.terms.items()})


def _constraint_rows(translated: list[Poly], order: int, columns: list[tuple[int, ...]]) -> np.ndarray:
    """Rows (e!·coeff_e(y^b·g)) over |e| ≤ order, normalized by the full weighted norm."""
    col_index = {e: k for k, e in enumerate(columns)}
    rows = []
    for g in translated:
        for b in monomials_up_to(g.nvars, order):
            q = _shift_exponents(g, b)
            weighted = {e: multi_factorial(e) * complex(c) for e, c in q.terms.items()}
            norm = float(np.linalg.norm(list(weighted.values()))) if weighted else 0.0
            if norm == 0.0:
                continue
            row = np.zeros(len(columns), dtype=complex)
            for e, value in weighted.items():
                if e in col_index:
                    row[col_index[e]] = value / norm
            rows.append(row)
    return np.array(rows, dtype=complex).reshape(len(rows), len(columns))


def _echelon(null: np.ndarray, tol: float) -> np.ndarray:
    """Reduced row echelon form with pivots on the lowest monomials."""
    a = null.copy()
    rows, cols = a.shape
    pivot_tol = np.sqrt(tol)
    row = 0
    for col in range(cols):
        if row == rows:
            break
        pivot = row + int(np.argmax(np.abs(a[row:, col])))
        if abs(a[pivot, col]) <= pivot_tol:
            continue
        a[[row, pivot]] = a[[pivot, row]]
        a[row] /= a[row, col]
        for other in range(rows):
            if other != row:
                a[other] -= a[other, col] * a[row]
        row += 1
    return a[:row]


def _orthonormalize(rows: np.ndarray) -> np.ndarray:
    """Gram-Schmidt in row order; row k keeps a positive coefficient on its pivot."""
    if rows.shape[0] == 0:
        return rows
    q, r = scipy.linalg.qr(rows.T, mode='economic')
    diag = np.diag(r)
    return (q * (diag / np.abs(diag))).T


def dual_space_at(ring: MatrixRing, point: VarietyPoint, tol: float | None = None) -> DualSpaceAtPoint:
    """Macaulay construction of the local dual space, raising the order until the dimension stabilizes."""
    tol = SETTINGS.run.tol if tol is None else tol
    translated = [translate(g, point.coords) for g in ring.border_basis()]

    previous: tuple[np.ndarray, list[tuple[int, ...]]] | None = None
    for order in range(ring.m + 1):
        columns = monomials_up_to(ring.r, order)
        null = numeric_nullspace(_constraint_rows(translated, order, columns), tol)
        logger.debug('Dual space at %s, order %d: dimension %d', point.coords, order, null.shape[0])
        if previous is not None and null.shape[0] == previous[0].shape[0]:
            basis, basis_columns = previous
            reduced = _orthonormalize(_echelon(basis, tol))
            ops = tuple(
                DerivOperator(Poly(ring.r, dict(zip(basis_columns, row))).chop(tol)) for row in reduced
            )
            return DualSpaceAtPoint(point, ops)
        previous = (null, columns)

    raise DualSpaceError(f'Dual space at {point.coords} did not stabilize by order {ring.m}.')


def operator_value(op: DerivOperator, g: Poly, point: VarietyPoint) -> complex:
    """(D_h g)(p) via the pairing of h with g translated to p."""
    return complex(pairing_at_zero(translate(g, point.coords), op.op_poly))


def build_dual_basis(
    ring: MatrixRing, tol: float | None = None, seed: int | None = None
) -> DualBasis:
    """Dual spaces at every variety point and Γ = Ψ⁻¹."""
    tol = SETTINGS.run.tol if tol is None else tol
    points = variety(ring, tol=tol, seed=seed)
    spaces = tuple(dual_space_at(ring, p, tol) for p in points)

    dims = [s.local_dim for s in spaces]
    if sum(dims) != ring.m:
        raise MultiplicityMismatchError(
            f'Local dimensions {dims} add up to {sum(dims)}, normal set has {ring.m} monomials.'
        )

    psi = np.zeros((ring.m, ring.m), dtype=complex)
    k = 0
    for space in spaces:
        for op in space.basis:
            for col, a in enumerate(ring.normal_set):
                psi[k, col] = operator_value(op, Poly(ring.r, {a: 1}), space.point)
            k += 1

    condition = float(np.linalg.cond(psi))
    if not np.isfinite(condition) or condition > 1 / tol:
        raise SingularDualBasisError(f'Operator evaluation matrix has condition number {condition:.3e}.')
    gamma = scipy.linalg.inv(psi)
    logger.info('Dual basis: local dimensions %s, cond(Ψ) = %.3e', dims, condition)
    return DualBasis(ring, spaces, psi, gamma, condition)


def reduce_mod_J(db: DualBasis, g: Poly) -> Poly:
    """g̃ on the normal set with coeff_a = Σ_{u,v} Γ[a,(u,v)]·(D_{u,v} g)(p_u)."""
    values = np.array(
        [operator_value(op, g, space.point) for _, _, space, op in db.operators()], dtype=complex
    )
    coeffs = db.gamma @ values
    return Poly(db.ring.r, {a: complex(c) for a, c in zip(db.ring.normal_set, coeffs)})
