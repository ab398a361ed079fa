import random
import unittest

from exceptions import BadIndex, NotInN2, ProjectionMismatch
from gf2poly import Gf2Poly
from nmod import (
    U_IMAGES,
    check_image_bound,
    check_j_identities,
    check_projection_injective,
    chi,
    j_assignment_report,
    j_basis_change,
    j_element,
    j_image,
    j_image_via_basis,
    n2_decompose,
    project_a,
    project_b,
    random_n2_g,
    verify_projection,
)
from recurrence import normalized_kernel_basis, u_elements
from semilinear import F, F_PLUS_G, G, from_g


class TestJBasis(unittest.TestCase):
    def test_chi(self):
        self.assertEqual(chi(3), 1)
        self.assertEqual(chi(13), -1)
        self.assertEqual(chi(21), 1)
        with self.assertRaises(BadIndex):
            chi(5)

    def test_elements(self):
        self.assertEqual(j_element(1), F)
        self.assertEqual(j_element(7), (F ** 2) * G)
        self.assertEqual(j_element(3) * G, F ** 8)
        self.assertEqual(j_element(11), j_element(1) * G ** 2)
        with self.assertRaises(BadIndex):
            j_element(0)

    def test_identities(self):
        result = check_j_identities()
        self.assertEqual(result["determinant"], [0])
        self.assertEqual(j_basis_change().determinant, Gf2Poly(1))

    def test_assignment_report(self):
        report = j_assignment_report()
        self.assertTrue(report["adopted"]["consistent"])
        self.assertIn("literal", report)


class TestN2(unittest.TestCase):
    def test_decompose_generators(self):
        coords = n2_decompose(u_elements()[0])
        self.assertEqual({i: c.bits for i, c in coords.coeffs.items()}, {0: 1, 1: 0, 2: 0, 4: 0, 5: 0})
        self.assertEqual(n2_decompose(F_PLUS_G)[0], Gf2Poly(1))
        self.assertEqual(n2_decompose(G ** 3)[2], Gf2Poly(0b10))

    def test_recompose(self):
        rng = random.Random(41)
        for _ in range(20):
            g = random_n2_g(rng, 60)
            f = from_g(g)
            self.assertEqual(n2_decompose(f).recompose(), f)

    def test_not_in_n2(self):
        with self.assertRaises(NotInN2):
            n2_decompose(Gf2Poly.monomial(1))

    def test_images(self):
        u = u_elements()
        self.assertEqual(j_image(u[1]), frozenset({7, 3}))
        self.assertEqual(j_image(u[2]), frozenset())
        self.assertEqual(j_image(u[5] * G ** 2), frozenset({21, 19, 17}))
        for i, expected in U_IMAGES.items():
            self.assertEqual(j_image_via_basis(u[i]), frozenset(expected))

    def test_two_routes_agree(self):
        rng = random.Random(43)
        for _ in range(20):
            f = from_g(random_n2_g(rng, 90))
            self.assertEqual(j_image(f), j_image_via_basis(f))

    def test_projections(self):
        self.assertEqual(project_a({11, 9, 7}), frozenset({9, 7}))
        self.assertEqual(project_a(set()), frozenset())
        self.assertEqual(project_a({13, 17}), frozenset())
        self.assertEqual(project_b({11, 9, 13}), frozenset({11, 13}))

    def test_projections_split_every_vector(self):
        rng = random.Random(67)
        indices = [k for k in range(1, 400, 2) if k % 5]
        vectors = [frozenset(rng.sample(indices, rng.randint(0, 30))) for _ in range(50)]
        vectors += [j_image(from_g(random_n2_g(rng, 60))) for _ in range(10)]
        for v in vectors:
            a, b = project_a(v), project_b(v)
            self.assertEqual(a | b, v)
            self.assertFalse(a & b)
            self.assertTrue(all(chi(k) == 1 for k in a))
            self.assertTrue(all(chi(k) == -1 for k in b))


class TestProjection(unittest.TestCase):
    def test_first_block(self):
        rows = verify_projection(0, normalized_kernel_basis(8))
        self.assertEqual(rows[0]["n"], 0)
        self.assertEqual(rows[0]["leading"], 1)
        self.assertEqual(rows[0]["remainder"], [])
        self.assertEqual(rows[1]["leading"], 3)
        self.assertEqual([row["leading"] for row in rows], [1, 3, 7, 9])

    def test_second_block(self):
        rows = verify_projection(1, normalized_kernel_basis(20))
        self.assertEqual(rows[0]["n"], 12)
        self.assertEqual(rows[0]["leading"], 21)

    def test_injective_range(self):
        basis = normalized_kernel_basis(12 * 10 + 8)
        rows = [row for m in range(11) for row in verify_projection(m, basis)]
        self.assertEqual(check_projection_injective(rows)["count"], 44)

    def test_image_bounds(self):
        rng = random.Random(59)
        for m in range(8):
            for _ in range(5):
                check_image_bound(random_n2_g(rng, 6 * m + 4), 10 * m + 7)
                check_image_bound(random_n2_g(rng, 12 * m), 20 * m + 1)

    def test_injective_rejects_repeats(self):
        with self.assertRaises(ProjectionMismatch):
            check_projection_injective([{"leading": 1}, {"leading": 1}])


if __name__ == "__main__":
    unittest.main()
