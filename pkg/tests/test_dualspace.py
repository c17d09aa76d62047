import numpy as np
import pytest

from conftest import commuting_generators, random_poly
from structured_roabp.core.convert import select_generators
from structured_roabp.core.dualspace import (
    build_dual_basis,
    dual_space_at,
    operator_value,
    reduce_mod_J,
)
from structured_roabp.core.exactnum import qidentity, qmatrix
from structured_roabp.core.matring import build_ring, reduce_exact, variety
from structured_roabp.core.poly import Poly, shift_operator
from structured_roabp.core.roabp import construct_esym_comm

t = Poly.variable(0, 1)
t1, t2 = Poly.variable(0, 2), Poly.variable(1, 2)


def _close(p: Poly, q: Poly, tol: float = 1e-8) -> bool:
    diff = p - q
    scale = max([1.0, *(abs(c) for c in q.terms.values())])
    return all(abs(c) <= tol * scale for c in diff.terms.values())


def _op_polys(space) -> list[Poly]:
    return [op.op_poly for op in space.basis]


def test_dual_space_of_a_nilpotent(nilpotent_2):
    ring = build_ring([nilpotent_2])
    (point,) = variety(ring)
    space = dual_space_at(ring, point)
    assert space.local_dim == 2
    assert _close(_op_polys(space)[0], Poly.constant(1, 1))
    assert _close(_op_polys(space)[1], t)


def test_dual_space_of_a_repeated_generator(nilpotent_2):
    ring = build_ring([nilpotent_2, nilpotent_2])
    (point,) = variety(ring)
    space = dual_space_at(ring, point)
    assert space.local_dim == 2
    assert _close(_op_polys(space)[1], (t1 + t2) * (1 / np.sqrt(2)))


def test_dual_space_at_a_simple_root(diag_12):
    ring = build_ring([diag_12])
    for point in variety(ring):
        space = dual_space_at(ring, point)
        assert space.local_dim == 1
        assert _close(_op_polys(space)[0], Poly.constant(1, 1))


def test_dual_basis_of_a_nilpotent(nilpotent_2):
    db = build_dual_basis(build_ring([nilpotent_2]))
    assert np.allclose(db.psi, np.eye(2))
    assert np.allclose(db.gamma, np.eye(2))


def test_dual_basis_of_a_diagonal(diag_12):
    db = build_dual_basis(build_ring([diag_12]))
    assert np.allclose(db.psi, [[1, 1], [1, 2]])
    assert np.allclose(db.gamma, [[2, -1], [-1, 1]])


def test_dual_basis_of_the_identity():
    db = build_dual_basis(build_ring([qidentity(3)]))
    assert np.allclose(db.gamma, [[1]])


def test_dual_basis_of_esym_construction():
    ring = build_ring(select_generators(construct_esym_comm(5, 3)))
    db = build_dual_basis(ring)
    assert ring.normal_set == ((0,), (1,), (2,), (3,))
    assert [s.local_dim for s in db.spaces] == [4]
    assert np.allclose(db.psi, np.diag([1, 1, 2, 6]))


def test_reduce_mod_J_examples(nilpotent_2, diag_12):
    db = build_dual_basis(build_ring([nilpotent_2]))
    assert _close(reduce_mod_J(db, t**3 + t * 2 + 1), t * 2 + 1)
    assert _close(reduce_mod_J(db, t + 5), t + 5)

    db = build_dual_basis(build_ring([diag_12]))
    assert _close(reduce_mod_J(db, t**2), t * 3 - 2)


@pytest.mark.parametrize('seed', range(10))
def test_reduce_mod_J_agrees_with_exact_reduction(seed):
    gens = commuting_generators(seed, w=3, r=2, jordan=seed % 3 == 0)
    ring = build_ring(gens)
    db = build_dual_basis(ring, seed=seed)
    assert sum(s.local_dim for s in db.spaces) == ring.m

    rng = np.random.default_rng(seed)
    for _ in range(50):
        g = random_poly(rng, ring.r, 6)
        expected = reduce_exact(ring, g)
        reduced = reduce_mod_J(db, g)
        assert _close(reduced, expected)
        assert _close(reduce_mod_J(db, reduced), reduced)


@pytest.mark.parametrize('seed', range(5))
def test_operators_vanish_on_the_ideal(seed):
    gens = commuting_generators(seed, w=3, r=2, jordan=True)
    ring = build_ring(gens)
    db = build_dual_basis(ring, seed=seed)
    rng = np.random.default_rng(seed)
    border = ring.border_basis()
    for _ in range(10):
        j = Poly.zero(ring.r)
        for g in border:
            j = j + g * random_poly(rng, ring.r, 2, 3)
        scale = max([1.0, *(abs(c) for c in j.terms.values())])
        for _, _, space, op in db.operators():
            assert abs(operator_value(op, j, space.point)) <= 1e-7 * scale


@pytest.mark.parametrize('seed', range(5))
def test_dual_spaces_are_down_closed(seed):
    gens = commuting_generators(seed, w=3, r=2, jordan=True)
    db = build_dual_basis(build_ring(gens), seed=seed)
    for space in db.spaces:
        columns = sorted({e for op in space.basis for e in op.op_poly.terms})
        basis = np.array([[complex(op.op_poly.coefficient(e)) for e in columns] for op in space.basis])
        for op in space.basis:
            for i in range(db.ring.r):
                a = tuple(int(k == i) for k in range(db.ring.r))
                shifted = shift_operator(op, a).op_poly
                if shifted.is_zero:
                    continue
                vec = np.array([complex(shifted.coefficient(e)) for e in columns])
                coeffs, *_ = np.linalg.lstsq(basis.T, vec, rcond=None)
                assert np.linalg.norm(basis.T @ coeffs - vec) <= 1e-7 * max(1.0, np.linalg.norm(vec))


@pytest.mark.parametrize('seed', range(5))
def test_operators_detect_polynomials_outside_the_ideal(seed):
    gens = commuting_generators(seed, w=3, r=2, jordan=seed % 2 == 0)
    ring = build_ring(gens)
    db = build_dual_basis(ring, seed=seed)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        g = random_poly(rng, ring.r, 4)
        remainder = reduce_exact(ring, g)
        if remainder.is_zero:
            continue
        values = [abs(operator_value(op, g, space.point)) for _, _, space, op in db.operators()]
        assert max(values) > 1e-6 * max(1.0, *(abs(c) for c in remainder.terms.values()))


def test_dual_space_of_non_cyclic_generators():
    e12 = qmatrix([[0, 1, 0], [0, 0, 0], [0, 0, 0]])
    e13 = qmatrix([[0, 0, 1], [0, 0, 0], [0, 0, 0]])
    db = build_dual_basis(build_ring([e12, e13]))
    (space,) = db.spaces
    assert space.local_dim == 3
    supports = sorted({e for op in space.basis for e in op.op_poly.terms})
    assert supports == [(0, 0), (0, 1), (1, 0)]
    assert max(op.degree() for op in space.basis) == 1


@pytest.mark.parametrize('seed', range(4))
def test_dual_space_bases_are_orthonormal(seed):
    gens = commuting_generators(seed, w=4, r=2, jordan=True)
    db = build_dual_basis(build_ring(gens), seed=seed)
    for space in db.spaces:
        columns = sorted({e for op in space.basis for e in op.op_poly.terms})
        basis = np.array([[complex(op.op_poly.coefficient(e)) for e in columns] for op in space.basis])
        assert np.allclose(basis @ basis.conj().T, np.eye(space.local_dim), atol=1e-8)
