import unittest

import numpy as np

from linalg import (
    Gf2Echelon,
    Gf2Solver,
    bits_to_vector,
    nullity,
    nullspace,
    rank,
    rref,
    solve_min,
    span_rank,
    vector_to_bits,
)


class TestEchelon(unittest.TestCase):
    def test_relation_from_dependent_row(self):
        echelon = Gf2Echelon()
        self.assertEqual(echelon.insert(0b101, 1), (2, 1))
        self.assertEqual(echelon.insert(0b011, 2)[0], 1)
        lead, relation = echelon.insert(0b110, 4)
        self.assertIsNone(lead)
        self.assertEqual(relation, 0b111)
        self.assertEqual(echelon.rank, 2)

    def test_nullspace(self):
        self.assertEqual(nullspace([0b1, 0b10, 0b11]), [0b111])
        self.assertEqual(nullspace([0, 0b1]), [0b1])
        self.assertEqual(span_rank([0b1, 0b10, 0b11]), 2)

    def test_contains_inserted_rows(self):
        a, b = Gf2Echelon(), Gf2Echelon()
        for row in (0b1001, 0b110, 0b1):
            a.insert(row, 0)
        for row in (0b1, 0b110, 0b1001):
            b.insert(row, 0)
        self.assertEqual(a.rank, b.rank)
        self.assertTrue(all(a.contains(r) for r in (0b1001, 0b110, 0b1)))


class TestDense(unittest.TestCase):
    def test_bit_vector_conversion(self):
        v = bits_to_vector(0b1011, 6)
        self.assertEqual(v.tolist(), [1, 1, 0, 1, 0, 0])
        self.assertEqual(vector_to_bits(v), 0b1011)

    def test_rref_and_rank(self):
        M = np.array([[1, 1, 0], [0, 1, 1], [1, 0, 1]], dtype=np.uint8)
        R, pivots = rref(M)
        self.assertEqual(pivots, [0, 1])
        self.assertEqual(rank(M), 2)
        self.assertEqual(nullity(M), 1)
        self.assertFalse(R[2].any())

    def test_canonical_solution_uses_earliest_columns(self):
        A = np.array([[1, 1, 0], [0, 0, 1]], dtype=np.uint8)
        x = Gf2Solver(A).solve([1, 1])
        self.assertEqual(x.tolist(), [1, 0, 1])
        self.assertEqual(solve_min(A, [1, 1]).tolist(), [1, 0, 1])

    def test_inconsistent(self):
        A = np.array([[1, 0], [1, 0]], dtype=np.uint8)
        self.assertIsNone(Gf2Solver(A).solve([1, 0]))
        self.assertIsNone(solve_min(A, [1, 0]))

    def test_solvers_agree_on_random_systems(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            A = rng.integers(0, 2, size=(12, 9), dtype=np.uint8)
            x0 = rng.integers(0, 2, size=9, dtype=np.uint8)
            b = (A.astype(int) @ x0) % 2
            solver = Gf2Solver(A)
            x = solver.solve(b)
            self.assertTrue(np.array_equal((A.astype(int) @ x) % 2, b))
            self.assertTrue(np.array_equal(x, solve_min(A, b)))
            self.assertEqual(solver.rank + solver.nullity, 9)


if __name__ == "__main__":
    unittest.main()
