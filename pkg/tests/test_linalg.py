import random

import pytest

from twistcart.errors import NotContained
from twistcart.linalg import (QQ, GAUSS_I, GaussianRational, SparseMatrix,
                              Subspace, det, image_basis, kernel_basis,
                              quotient_dim, rank, solve)
from twistcart import serialize

from oracles import dense_rank


def M(rows):
    return SparseMatrix.from_dense([[QQ(v) for v in row] for row in rows])


def test_rank_examples():
    assert rank(SparseMatrix.identity(2)) == 2
    assert rank(SparseMatrix.zero(3, 4)) == 0
    assert rank(M([[1, 2], [2, 4]])) == 1


def test_kernel_examples():
    assert kernel_basis(SparseMatrix.identity(3)).dim == 0
    assert kernel_basis(SparseMatrix.zero(3, 3)).dim == 3
    k = kernel_basis(M([[1, 1]]))
    assert k.basis == ((QQ(1), QQ(-1)),)


def test_image_examples():
    assert image_basis(SparseMatrix.identity(3)) == Subspace.full(3)
    assert image_basis(SparseMatrix.zero(2, 5)).dim == 0
    im = image_basis(M([[1], [2]]))
    assert im.basis == ((QQ(1), QQ(2)),)


def test_quotient_examples():
    full = Subspace.full(3)
    assert quotient_dim(full, full) == (0, ())
    assert quotient_dim(Subspace.zero(3), full)[0] == 3
    sub = Subspace.from_vectors(2, [(QQ(1), QQ(1))])
    dim, reps = quotient_dim(sub, Subspace.full(2))
    assert dim == 1 and len(reps) == 1
    joined = sub.sum(Subspace.from_vectors(2, reps))
    assert joined == Subspace.full(2)


def test_quotient_not_contained():
    sub = Subspace.from_vectors(2, [(QQ(1), QQ(0))])
    sup = Subspace.from_vectors(2, [(QQ(0), QQ(1))])
    with pytest.raises(NotContained):
        quotient_dim(sub, sup)


def test_rank_nullity_random():
    rng = random.Random(11)
    for _ in range(30):
        rows = rng.randint(1, 6)
        cols = rng.randint(1, 6)
        entries = {}
        for _ in range(rng.randint(0, rows * cols)):
            entries[(rng.randrange(rows), rng.randrange(cols))] = QQ(
                rng.randint(-4, 4), rng.randint(1, 3))
        m = SparseMatrix(rows, cols, {k: v for k, v in entries.items() if v})
        r = rank(m)
        assert r + kernel_basis(m).dim == cols
        assert r == dense_rank(m.to_dense())
        assert image_basis(m).dim == r


def test_insertion_order_independence():
    rng = random.Random(5)
    items = [(0, 0, QQ(1)), (0, 2, QQ(3)), (1, 1, QQ(-2)), (2, 0, QQ(5)),
             (2, 2, QQ(7, 2)), (1, 2, QQ(1, 3))]
    reference = None
    for _ in range(5):
        rng.shuffle(items)
        m = SparseMatrix.from_entries(3, 3, items)
        sig = (kernel_basis(m).basis, image_basis(m).basis)
        if reference is None:
            reference = sig
        assert sig == reference


def test_composed_image_in_kernel():
    rng = random.Random(3)
    for _ in range(10):
        m2 = M([[rng.randint(-2, 2) for _ in range(4)] for _ in range(3)])
        ker = kernel_basis(m2)
        if ker.dim == 0:
            continue
        m1 = SparseMatrix.from_dense(
            [list(col) for col in zip(*ker.basis)])
        prod = m2 @ m1
        assert prod.is_zero()
        assert ker.contains_subspace(image_basis(m1))


def test_gaussian_field_axioms():
    a = GaussianRational(QQ(1, 2), QQ(3))
    b = GaussianRational(QQ(-2), QQ(1, 5))
    assert (a * b) / b == a
    assert a.conjugate().conjugate() == a
    assert (a + b).conjugate() == a.conjugate() + b.conjugate()
    assert GAUSS_I * GAUSS_I == QQ(-1)


def test_rank_over_gaussian_rationals():
    i = GAUSS_I
    m = SparseMatrix.from_dense([[GaussianRational(1), i],
                                 [i * QQ(-1), GaussianRational(1)]])
    # rows are (1, i), (-i, 1): second = -i * first
    assert rank(m) == 1
    assert kernel_basis(m).dim == 1


def test_solve_and_det():
    m = M([[2, 1], [1, 1]])
    x = solve(m, (QQ(3), QQ(2)))
    assert m.apply(x) == (QQ(3), QQ(2))
    assert solve(M([[1, 1], [1, 1]]), (QQ(0), QQ(1))) is None
    assert det(m) == QQ(1)
    assert det(M([[1, 2], [2, 4]])) == QQ(0)


def test_serialization_round_trip():
    assert serialize.rational_to_str(QQ(-3, 7)) == "-3/7"
    assert serialize.rational_to_str(QQ(4)) == "4"
    assert serialize.rational_from_str("-3/7") == QQ(-3, 7)
    z = GaussianRational(QQ(1, 2), QQ(-5))
    assert serialize.gaussian_from_json(serialize.gaussian_to_json(z)) == z
    m = M([[1, 0], [QQ(2, 3), -1]])
    back = serialize.sparse_from_json(2, 2, serialize.sparse_to_json(m))
    assert back == m
