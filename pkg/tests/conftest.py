import itertools
from fractions import Fraction

import numpy as np
import pytest

from structured_roabp.core.exactnum import qmatrix
from structured_roabp.core.poly import Poly, monomials_up_to
from structured_roabp.core.roabp import construct_random_comm


def esym(n: int, d: int) -> Poly:
    """Brute-force elementary symmetric polynomial."""
    terms = {}
    for subset in itertools.combinations(range(n), d):
        terms[tuple(int(i in subset) for i in range(n))] = 1
    return Poly(n, terms)


def power_sum(n: int, d: int) -> Poly:
    total = Poly.zero(n)
    for i in range(n):
        total = total + Poly.variable(i, n)
    return total**d


def random_poly(rng: np.random.Generator, nvars: int, degree: int, terms: int = 6) -> Poly:
    monomials = monomials_up_to(nvars, degree)
    picks = rng.choice(len(monomials), size=min(terms, len(monomials)), replace=False)
    return Poly(nvars, {monomials[k]: int(rng.integers(-5, 6)) for k in picks})


def random_rational(rng: np.random.Generator, bound: int = 3) -> Fraction:
    return Fraction(int(rng.integers(-bound * 4, bound * 4 + 1)), int(rng.integers(1, 5)))


def commuting_generators(seed: int, w: int, r: int, jordan: bool = False) -> list:
    """r commuting matrices c0·I + c1·B for one random integer matrix B."""
    cr = construct_random_comm(r, 1, w, seed, jordan=jordan, poly_degree=1)
    return [cr.coeff_matrices[i][1] for i in range(r)]


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def nilpotent_2():
    return qmatrix([[0, 1], [0, 0]])


@pytest.fixture
def diag_12():
    return qmatrix([[1, 0], [0, 2]])


@pytest.fixture
def diag_34():
    return qmatrix([[3, 0], [0, 4]])
