from fractions import Fraction

import numpy as np

from structured_roabp.utils import make_rng, merge_points, random_rational_point


def test_seeded_points_repeat():
    first = random_rational_point(make_rng(3), 5)
    second = random_rational_point(make_rng(3), 5)
    assert first == second
    assert isinstance(make_rng(3), np.random.Generator)


def test_random_points_stay_in_bounds():
    rng = make_rng(11)
    for _ in range(20):
        point = random_rational_point(rng, 4, bound=2)
        assert len(point) == 4
        assert all(isinstance(x, Fraction) and abs(x) <= 2 and x.denominator <= 16 for x in point)


def test_merge_points_sums_weights_and_drops_cancellations():
    points, weights = merge_points([(1, 2), (1, 2), (3, 4), (3, 4)], [1, 2, 5, -5], 0)
    assert points == [(1, 2)]
    assert weights == [3]
