import unittest

import numpy as np

from adapted import (
    adapted_pipeline,
    build_adapted,
    check_faithful,
    check_kills_f0,
    check_local_nilpotence,
    check_shift_relations,
    extract_u,
    grid_cells,
    k_basis,
    t_matrix,
    wa_check,
)
from exceptions import NotMultiplication, TableTooSmall
from gf2poly import Gf2Poly
from modforms import PrecisionPolicy, ThetaKind, gen_theta, wa_series
from nmod import j_image
from semilinear import F_PLUS_G


class TestKBasis(unittest.TestCase):
    def test_smallest_basis(self):
        basis = k_basis(2, PrecisionPolicy(dmax=2, pmax=7))
        self.assertEqual(basis.degrees, [0, 2])
        self.assertEqual(basis.g, [1, 0b110])
        low = basis.series[0] & ((1 << 10) - 1)
        self.assertEqual(low, (1 << 1) | (1 << 5) | (1 << 9))

    def test_f0_columns_vanish(self):
        basis = k_basis(60, PrecisionPolicy(dmax=60, pmax=7))
        for p in (3, 7):
            check_kills_f0(t_matrix(p, basis, threads=1), basis)
        # T_3 sends f_n into the span of f_k, k < n
        self.assertFalse(np.tril(t_matrix(3, basis, threads=1).matrix).any())

    def test_policy_must_cover_prime(self):
        basis = k_basis(8, PrecisionPolicy(dmax=8, pmax=3))
        with self.assertRaises(TableTooSmall):
            t_matrix(7, basis, threads=1)


class TestAdaptedGrid(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.pipeline_run = adapted_pipeline(3, primes=(3, 7, 11, 13), threads=1)

    def test_grid_order(self):
        self.assertEqual(grid_cells(2), [(0, 0), (1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
        self.assertEqual(len(grid_cells(6)), 28)

    def test_cells(self):
        adapted = self.pipeline_run.adapted
        self.assertEqual(len(adapted.cells), 10)
        self.assertEqual(adapted.basis.degrees_of(adapted.cells[(0, 0)]), [0])
        self.assertEqual(adapted.to_payload()[0], {"i": 0, "j": 0, "f": [0]})
        check_shift_relations(adapted, self.pipeline_run.matrices[3], self.pipeline_run.matrices[7])

    def test_rebuild_is_deterministic(self):
        again = build_adapted(3, self.pipeline_run.matrices[3], self.pipeline_run.matrices[7], self.pipeline_run.basis)
        for cell, vector in self.pipeline_run.adapted.cells.items():
            self.assertTrue(np.array_equal(again.cells[cell], vector))

    def test_generators(self):
        self.assertEqual(extract_u(3, self.pipeline_run.adapted, self.pipeline_run.matrices[3]).to_payload(), [[1, 0]])
        self.assertEqual(extract_u(7, self.pipeline_run.adapted, self.pipeline_run.matrices[7]).to_payload(), [[0, 1]])

    def test_other_primes(self):
        for p in (11, 13):
            u = extract_u(p, self.pipeline_run.adapted, self.pipeline_run.matrices[p])
            self.assertEqual(u.constant_term, 0)
            check_kills_f0(self.pipeline_run.matrices[p], self.pipeline_run.basis)

    def test_faithful_and_nilpotent(self):
        check_faithful(self.pipeline_run.adapted, self.pipeline_run.matrices[3], self.pipeline_run.matrices[7])
        for p in (3, 7):
            check_local_nilpotence(self.pipeline_run.adapted, self.pipeline_run.matrices[p])

    def test_shallow_power_is_not_nilpotent(self):
        shallow = self.pipeline_run.adapted
        with self.assertRaises(NotMultiplication):
            check_local_nilpotence(
                type(shallow)(depth=shallow.depth - 2, basis=shallow.basis, cells=shallow.cells),
                self.pipeline_run.matrices[3],
            )


class TestWaEquivariance(unittest.TestCase):
    def test_small_range(self):
        basis = k_basis(24, PrecisionPolicy(dmax=24, pmax=7))
        matrices = {q: t_matrix(q, basis, threads=1) for q in (3, 7)}
        rows = wa_check(basis, 24, matrices)
        self.assertEqual(rows[0], {"n": 0, "leading": 1, "image": [1]})
        self.assertEqual(len(rows), len(basis.degrees))

    def test_image_of_f0(self):
        w = wa_series(j_image(F_PLUS_G), 200)
        self.assertEqual(w, gen_theta(ThetaKind.D, 200))
        self.assertTrue(wa_series(j_image(Gf2Poly(0)), 200).is_zero)


if __name__ == "__main__":
    unittest.main()
