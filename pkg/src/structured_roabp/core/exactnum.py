"""Scalars and dense linear algebra.

Exact work happens over ``QQ`` with sympy's ``DomainMatrix``; scalars cross the
module boundary as ``fractions.Fraction``. The numeric layer is numpy/scipy in
complex128.
"""

import logging
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Sequence

import numpy as np
import scipy.linalg
from sympy import QQ
from sympy.polys.matrices import DomainMatrix

from .errors import DimensionMismatchError, EigenConvergenceError

logger = logging.getLogger(__name__)

Rational = Fraction
Scalar = Fraction | complex


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray
    multiplicity: int = 1


def to_rational(value: Any) -> Fraction:
    """Converts ints, Fractions, 'p/q' strings and sympy domain rationals to a Fraction."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, np.integer)):
        return Fraction(int(value))
    if isinstance(value, str):
        return Fraction(value.strip())
    # PythonMPQ, gmpy2.mpq and flint.fmpq all print as 'p/q'
    return Fraction(str(value))


def is_exact(value: Any) -> bool:
    return isinstance(value, (int, Fraction, np.integer)) and not isinstance(value, bool)


def format_rational(value: Fraction) -> str:
    return f'{value.numerator}/{value.denominator}'


def _qq(value: Any):
    q = to_rational(value)
    return QQ(q.numerator, q.denominator)


def qmatrix(rows: Sequence[Sequence[Any]], ncols: int | None = None) -> DomainMatrix:
    """Builds an exact matrix over QQ from nested rows."""
    rows = [list(row) for row in rows]
    if ncols is None:
        ncols = len(rows[0]) if rows else 0
    if any(len(row) != ncols for row in rows):
        raise DimensionMismatchError('Matrix rows have different lengths.')
    if not rows or ncols == 0:
        return DomainMatrix.zeros((len(rows), ncols), QQ).to_dense()
    return DomainMatrix([[_qq(v) for v in row] for row in rows], (len(rows), ncols), QQ).to_dense()


def qrows(m: DomainMatrix) -> list[list[Fraction]]:
    rows, cols = m.shape
    if rows == 0 or cols == 0:
        return [[] for _ in range(rows)]
    return [[to_rational(v) for v in row] for row in m.to_list()]


def qidentity(n: int) -> DomainMatrix:
    # eye() builds a sparse matrix; every matrix in the package is dense
    return DomainMatrix.eye(n, QQ).to_dense()


def qscale(m: DomainMatrix, c: Any) -> DomainMatrix:
    c = to_rational(c)
    return qmatrix([[c * v for v in row] for row in qrows(m)], m.shape[1])


def qpow(m: DomainMatrix, k: int) -> DomainMatrix:
    m = m.to_dense()
    result = qidentity(m.shape[0])
    for _ in range(k):
        result = result.matmul(m)
    return result


def qflatten(m: DomainMatrix) -> list[Fraction]:
    return [v for row in qrows(m) for v in row]


def is_scalar_identity(m: DomainMatrix) -> bool:
    """True when m = c·I for some rational c (including c = 0)."""
    rows = qrows(m)
    n = len(rows)
    return all(
        rows[i][j] == (rows[0][0] if i == j else 0) for i in range(n) for j in range(n)
    )


def commutes(a: DomainMatrix, b: DomainMatrix) -> bool:
    a, b = a.to_dense(), b.to_dense()
    return a.matmul(b) == b.matmul(a)


def _as_domain(m: DomainMatrix | Sequence[Sequence[Any]]) -> DomainMatrix:
    return m.to_dense() if isinstance(m, DomainMatrix) else qmatrix(m)


def rank_exact(m: DomainMatrix | Sequence[Sequence[Any]]) -> int:
    """Rank over QQ by exact elimination."""
    dm = _as_domain(m)
    if 0 in dm.shape:
        return 0
    return dm.rank()


def nullspace_exact(m: DomainMatrix | Sequence[Sequence[Any]]) -> list[list[Fraction]]:
    """Basis of the right kernel; empty iff the matrix has full column rank."""
    dm = _as_domain(m)
    rows, cols = dm.shape
    if cols == 0:
        return []
    if rows == 0:
        return [[Fraction(int(i == j)) for j in range(cols)] for i in range(cols)]
    return qrows(dm.nullspace().to_dense())


def solve_exact(
    m: DomainMatrix | Sequence[Sequence[Any]], rhs: Sequence[Any]
) -> list[Fraction] | None:
    """Returns one exact solution of m·x = rhs (free variables zero), or None."""
    dm = _as_domain(m)
    rows, cols = dm.shape
    if len(rhs) != rows:
        raise DimensionMismatchError(f'Right-hand side has {len(rhs)} entries, expected {rows}.')
    if cols == 0:
        return [] if all(to_rational(v) == 0 for v in rhs) else None
    augmented = dm.hstack(qmatrix([[v] for v in rhs], 1))
    reduced, pivots = augmented.rref()
    if cols in pivots:
        return None
    reduced_rows = qrows(reduced)
    solution = [Fraction(0)] * cols
    for i, pivot in enumerate(pivots):
        solution[pivot] = reduced_rows[i][cols]
    return solution


def to_object_array(m: DomainMatrix) -> np.ndarray:
    """Exact matrix as a numpy object array of Fractions (supports ``@``)."""
    rows, cols = m.shape
    array = np.empty((rows, cols), dtype=object)
    for i, row in enumerate(qrows(m)):
        for j, v in enumerate(row):
            array[i, j] = v
    return array


def to_complex_array(m: DomainMatrix | np.ndarray | Sequence[Sequence[Any]]) -> np.ndarray:
    if isinstance(m, DomainMatrix):
        rows, cols = m.shape
        return np.array(
            [[complex(v) for v in row] for row in qrows(m)], dtype=complex
        ).reshape(rows, cols)
    return np.asarray(m, dtype=complex)


def eigen(m: DomainMatrix | np.ndarray, tol: float = 1e-9) -> list[EigenPair]:
    """Eigenpairs with merged clusters; eigenvalues within tol·max(1, ‖M‖) collapse into one pair."""
    a = to_complex_array(m)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatchError(f'eigen expects a square matrix, got shape {a.shape}.')
    if a.size == 0:
        return []

    try:
        values, vectors = scipy.linalg.eig(a)
    except (scipy.linalg.LinAlgError, ValueError) as e:
        raise EigenConvergenceError(f'Eigen-decomposition failed: {e}') from e
    if not (np.all(np.isfinite(values)) and np.all(np.isfinite(vectors))):
        raise EigenConvergenceError('Eigen-decomposition produced non-finite values.')

    norm = np.linalg.norm(a, 2)
    residuals = np.linalg.norm(a @ vectors - vectors * values, axis=0)
    if np.any(residuals > tol * norm + np.finfo(float).eps):
        worst = float(residuals.max())
        raise EigenConvergenceError(
            f'Eigenpair residual {worst:.3e} exceeds {tol:.1e}·‖M‖ = {tol * norm:.3e}.'
        )

    radius = tol * max(1.0, norm)
    clusters: list[list[int]] = []
    for idx in sorted(range(len(values)), key=lambda k: (values[k].real, values[k].imag)):
        for cluster in clusters:
            if abs(values[idx] - np.mean(values[cluster])) <= radius:
                cluster.append(idx)
                break
        else:
            clusters.append([idx])

    pairs = []
    for cluster in clusters:
        best = min(cluster, key=lambda k: residuals[k])
        pairs.append(
            EigenPair(
                value=complex(np.mean(values[cluster])),
                vector=vectors[:, best],
                multiplicity=len(cluster),
            )
        )
    logger.debug('eigen: %d raw eigenvalues merged into %d clusters', len(values), len(pairs))
    return sorted(pairs, key=lambda p: (p.value.real, p.value.imag))


def numeric_nullspace(a: np.ndarray, tol: float) -> np.ndarray:
    """Rows spanning the right kernel; singular values ≤ tol·max(1, σ_max) count as zero."""
    a = np.asarray(a, dtype=complex)
    cols = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(cols, dtype=complex)
    _, s, vh = scipy.linalg.svd(a)
    threshold = tol * max(1.0, float(s[0]) if s.size else 0.0)
    rank = int(np.sum(s > threshold))
    return vh[rank:].conj()


def numeric_rank(a: np.ndarray, tol: float) -> int:
    a = np.asarray(a, dtype=complex)
    if a.size == 0:
        return 0
    s = scipy.linalg.svdvals(a)
    if s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))
