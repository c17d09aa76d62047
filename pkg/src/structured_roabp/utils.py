import logging
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from .core.poly import Scalar, clean_scalar

logger = logging.getLogger(__name__)


def make_rng(seed: int | None) -> np.random.Generator:
    return np.random.default_rng(seed)


def random_rational_point(rng: np.random.Generator, n: int, bound: int = 100) -> list[Fraction]:
    """A point with coordinates p/q drawn from [-bound, bound], q ≤ 16."""
    point = []
    for _ in range(n):
        q = int(rng.integers(1, 17))
        point.append(Fraction(int(rng.integers(-bound * q, bound * q + 1)), q))
    return point


def relative_residual(a: Any, b: Any) -> float:
    """|a − b| / max(1, |a|, |b|)."""
    a, b = clean_scalar(a), clean_scalar(b)
    return float(abs(a - b)) / max(1.0, float(abs(a)), float(abs(b)))


def _close(p: Sequence[Scalar], q: Sequence[Scalar], tol: float) -> bool:
    if tol == 0:
        return all(x == y for x, y in zip(p, q))
    scale = max([1.0, *(float(abs(x)) for x in p), *(float(abs(y)) for y in q)])
    return all(float(abs(x - y)) <= tol * scale for x, y in zip(p, q))


def merge_points(
    points: Sequence[Sequence[Any]], weights: Sequence[Any], tol: float
) -> tuple[list[tuple[Scalar, ...]], list[Scalar]]:
    """Merges points that agree within tol (relative), summing their weights.

    First occurrences keep their position; merged weights that cancel to zero are dropped.
    """
    merged_points: list[tuple[Scalar, ...]] = []
    merged_weights: list[Scalar] = []
    for point, weight in zip(points, weights):
        point = tuple(clean_scalar(x) for x in point)
        weight = clean_scalar(weight)
        for k, existing in enumerate(merged_points):
            if _close(existing, point, tol):
                merged_weights[k] = merged_weights[k] + weight
                break
        else:
            merged_points.append(point)
            merged_weights.append(weight)

    kept = [(p, w) for p, w in zip(merged_points, merged_weights) if w != 0]
    if len(kept) < len(points):
        logger.debug('Merged %d points into %d', len(points), len(kept))
    return [p for p, _ in kept], [w for _, w in kept]
