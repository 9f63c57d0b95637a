"""Shared oracles: dense mod-p linear algebra done independently of the
package's sparse structures, plus seeded random generators."""

import random

import numpy as np
import pytest

from smithy import FieldSpec, SparseMatrix


def dense_rref(rows, p):
    """Row-reduce over F_p; returns (rref ndarray, pivot column list)."""
    a = np.array(rows, dtype=np.int64).reshape(len(rows), -1) % p
    m = a.shape[0]
    n = a.shape[1] if m else 0
    pivots = []
    r = 0
    for j in range(n):
        piv = None
        for i in range(r, m):
            if a[i, j]:
                piv = i
                break
        if piv is None:
            continue
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        a[r] = a[r] * pow(int(a[r, j]), p - 2, p) % p
        col = a[:, j].copy()
        col[r] = 0
        a = (a - np.outer(col, a[r])) % p
        pivots.append(j)
        r += 1
        if r == m:
            break
    return a, pivots


def dense_rank(rows, p):
    if not rows or not len(rows[0]):
        return 0
    return len(dense_rref(rows, p)[1])


def dense_kernel(rows, p, n=None):
    """Basis of the right kernel as a list of length-n vectors."""
    if not rows:
        assert n is not None
        return [[1 if t == j else 0 for t in range(n)] for j in range(n)]
    n = len(rows[0])
    a, pivots = dense_rref(rows, p)
    free = [j for j in range(n) if j not in pivots]
    basis = []
    for f in free:
        v = [0] * n
        v[f] = 1
        for r_i, pj in enumerate(pivots):
            v[pj] = int(-a[r_i, f]) % p
        basis.append(v)
    return basis


def dense_mat_vec(rows, x, p):
    return [sum(rv * xv for rv, xv in zip(row, x)) % p for row in rows]


def random_dense(rng, m, n, p, density):
    return [[rng.randrange(1, p) if rng.random() < density else 0
             for _ in range(n)] for _ in range(m)]


def sparse_from_dense(rows, p):
    return SparseMatrix.from_dense(rows, FieldSpec(p))


def random_slice(rng, n6, n5, n4, p):
    """(dTop rows, dBottom rows) with dTop.dBottom = 0 by construction:
    dBottom columns are random combinations of dTop's dense kernel."""
    top = random_dense(rng, n6, n5, p, rng.uniform(0.05, 0.3))
    kernel = dense_kernel(top, p, n=n5)
    bottom_cols = []
    for _ in range(n4):
        col = [0] * n5
        for kv in kernel:
            c = rng.randrange(p) if rng.random() < 0.6 else 0
            if c:
                col = [(a + c * b) % p for a, b in zip(col, kv)]
        bottom_cols.append(col)
    bottom = [[bottom_cols[j][i] for j in range(n4)] for i in range(n5)]
    return top, bottom


@pytest.fixture
def f7():
    return FieldSpec(7)


@pytest.fixture
def f12379():
    return FieldSpec(12379)
