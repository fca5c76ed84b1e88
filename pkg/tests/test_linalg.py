import random

import pytest
import sympy as sp

from wq.errors import NoSolution
from wq.linalg import (LinearSystem, SparseMatrix, express_in_span, nullspace,
                       rank, solve, vec_sub)
from wq.scalars import Scalar


def rand_matrix(rng, nrows, ncols, density=0.4):
    A = SparseMatrix(nrows, ncols)
    for r in range(nrows):
        for c in range(ncols):
            if rng.random() < density:
                A.add_entry(r, c, Scalar(rng.randint(-3, 3),
                                         rng.randint(-1, 1)))
    return A


def to_sympy(A):
    M = sp.zeros(A.nrows, A.ncols)
    for c, col in A.cols.items():
        for r, s in col.items():
            M[r, c] = sp.Rational(str(s.re)) + sp.I * sp.Rational(str(s.im))
    return M


class TestRank:
    def test_identity(self):
        assert rank(SparseMatrix.identity(5)) == 5

    def test_against_sympy(self):
        rng = random.Random(30)
        for _ in range(12):
            A = rand_matrix(rng, rng.randint(1, 7), rng.randint(1, 7))
            assert rank(A) == to_sympy(A).rank()

    def test_determinism_under_assembly_order(self):
        rng = random.Random(31)
        A = rand_matrix(rng, 6, 6)
        B = SparseMatrix(6, 6)
        for c in sorted(A.cols, reverse=True):
            B.set_column(c, dict(A.cols[c]))
        assert nullspace(A) == nullspace(B)


class TestNullspace:
    def test_kernel_is_kernel(self):
        rng = random.Random(32)
        for _ in range(10):
            A = rand_matrix(rng, 5, 8)
            basis = nullspace(A)
            assert len(basis) == 8 - rank(A)
            for v in basis:
                assert A.mul_vec(v) == {}


class TestSolve:
    def test_consistent(self):
        rng = random.Random(33)
        for _ in range(10):
            A = rand_matrix(rng, 6, 5)
            x0 = {c: Scalar(rng.randint(-2, 2)) for c in range(5)}
            x0 = {c: v for c, v in x0.items() if v}
            b = A.mul_vec(x0)
            x = solve(A, b)
            assert x is not None
            assert A.mul_vec(x) == b

    def test_inconsistent(self):
        A = SparseMatrix(2, 1)
        A.add_entry(0, 0, Scalar(1))
        assert solve(A, {1: Scalar(1)}) is None

    def test_express_in_span(self):
        v1 = {0: Scalar(1), 1: Scalar(2)}
        v2 = {1: Scalar(1)}
        target = {0: Scalar(2), 1: Scalar(5)}
        coords = express_in_span([v1, v2], target, 3)
        assert coords == {0: Scalar(2), 1: Scalar(1)}
        assert express_in_span([v1], {2: Scalar(1)}, 3) is None


class TestLinearSystem:
    def test_named_solve(self):
        sys = LinearSystem()
        sys.add_equation({"a": Scalar(1), "b": Scalar(1)}, Scalar(3), "sum")
        sys.add_equation({"a": Scalar(1), "b": Scalar(-1)}, Scalar(1), "diff")
        sol = sys.solve()
        assert sol["a"] == Scalar(2) and sol["b"] == Scalar(1)

    def test_inconsistent_reports_tag(self):
        sys = LinearSystem()
        sys.add_equation({"a": Scalar(1)}, Scalar(1), "first")
        sys.add_equation({"a": Scalar(1)}, Scalar(2), ("second", 7))
        with pytest.raises(NoSolution):
            sys.solve()

    def test_underdetermined_particular(self):
        sys = LinearSystem()
        sys.add_equation({"a": Scalar(1), "b": Scalar(1)}, Scalar(1), None)
        sol = sys.solve()
        got = sol.get("a", Scalar(0)) + sol.get("b", Scalar(0))
        assert got == Scalar(1)


def test_matmul_and_vec():
    A = SparseMatrix(2, 2, {0: {0: Scalar(1)}, 1: {0: Scalar(2), 1: Scalar(1)}})
    B = SparseMatrix(2, 2, {0: {1: Scalar(1)}})
    C = A.matmul(B)
    assert C.get(0, 0) == Scalar(2) and C.get(1, 0) == Scalar(1)
    assert vec_sub(A.mul_vec({0: Scalar(1)}), {0: Scalar(1)}) == {}


def test_json_roundtrip():
    rng = random.Random(34)
    A = rand_matrix(rng, 4, 5)
    assert SparseMatrix.from_json(A.to_json()) == A
