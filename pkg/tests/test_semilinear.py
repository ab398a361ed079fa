import random
import unittest

from exceptions import NotInMOdd, ShapeViolation
from gf2poly import Gf2Poly
from recurrence import u_elements
from semilinear import (
    F,
    G,
    MOddElem,
    alpha,
    apply_T,
    apply_T_direct,
    apply_U,
    apply_U_by_decomposition,
    check_fixed_points,
    check_frobenius,
    check_semilinearity,
    check_six_term_recursion,
    check_t_law,
    check_t_paths,
    check_u_squared_identity,
    eval_in_F,
    f_coordinates,
    from_g,
    g_basis_decompose,
    modd_convert,
    random_poly,
    to_g,
    u_plus_i_on_modd,
)

r = Gf2Poly.monomial


class TestDecomposition(unittest.TestCase):
    def test_r_cubed(self):
        coords = g_basis_decompose(r(3))
        self.assertEqual([c.bits for c in coords.coeffs], [0, 0, 0, 1, 0, 0])

    def test_r_sixth(self):
        coords = g_basis_decompose(r(6))
        self.assertEqual([c.bits for c in coords.coeffs], [0b10, 0, 0, 0, 0, 1])

    def test_r_eighth(self):
        coords = g_basis_decompose(r(8))
        self.assertEqual([c.bits for c in coords.coeffs], [0b10, 0b10, 0b10, 0, 0, 1])
        self.assertEqual(coords.recompose(), r(8))

    def test_recompose_random(self):
        rng = random.Random(5)
        for _ in range(50):
            f = random_poly(rng, rng.randint(0, 300))
            self.assertEqual(g_basis_decompose(f).recompose(), f)


class TestU(unittest.TestCase):
    def test_known_values(self):
        self.assertEqual(apply_U(r(5)), Gf2Poly.from_exponents([1, 4, 5]))
        self.assertEqual(apply_U(G), F)
        self.assertEqual(apply_U(r(4) + r(3)), Gf2Poly(0b110) * Gf2Poly(0b101))

    def test_routes_agree(self):
        rng = random.Random(17)
        for _ in range(40):
            f = random_poly(rng, rng.randint(0, 400))
            self.assertEqual(apply_U(f), apply_U_by_decomposition(f))

    def test_fixed_points(self):
        self.assertIn("r^10", check_fixed_points()["checked"])

    def test_frobenius_and_semilinearity(self):
        rng = random.Random(23)
        for _ in range(30):
            f = random_poly(rng, rng.randint(0, 600))
            check_frobenius(f)
            check_semilinearity(f)

    def test_six_term_recursion(self):
        for n in range(10):
            check_six_term_recursion(n)

    def test_u_plus_i_values(self):
        self.assertEqual(u_plus_i_on_modd(0), Gf2Poly(0))
        self.assertEqual(u_plus_i_on_modd(1), Gf2Poly(1))
        self.assertEqual(u_plus_i_on_modd(5), Gf2Poly.from_exponents([1, 2, 4]))


class TestModd(unittest.TestCase):
    def test_from_g(self):
        self.assertEqual(from_g(Gf2Poly(1)), Gf2Poly(0b110))
        self.assertEqual(from_g(Gf2Poly(0b100)), G)
        self.assertEqual(from_g(MOddElem(Gf2Poly(1))), MOddElem(Gf2Poly(1)).poly)

    def test_to_g(self):
        self.assertEqual(to_g(u_elements()[5]), Gf2Poly.from_exponents([3, 5]))
        self.assertEqual(modd_convert(G, "to_g"), Gf2Poly(0b100))

    def test_to_g_rejects(self):
        for x in (Gf2Poly(1), r(1), r(2) + r(1) + r(4)):
            with self.assertRaises(NotInMOdd):
                to_g(x)

    def test_u_preserves_modd(self):
        rng = random.Random(29)
        for _ in range(20):
            g = random_poly(rng, rng.randint(0, 100))
            to_g(apply_U(from_g(g)))


class TestT(unittest.TestCase):
    def test_small_powers(self):
        self.assertEqual(apply_T(Gf2Poly(0b100)), Gf2Poly(0))
        self.assertEqual(apply_T(Gf2Poly.monomial(5)), Gf2Poly(0b10))
        self.assertEqual(apply_T(Gf2Poly.monomial(7)), Gf2Poly(0b1000))

    def test_direct_definition(self):
        self.assertEqual(apply_T_direct(Gf2Poly.monomial(7)), Gf2Poly(0b1000))
        rng = random.Random(31)
        for _ in range(20):
            check_t_paths(random_poly(rng, rng.randint(0, 60)))

    def test_parity_degree_law(self):
        for n in range(0, 400, 7):
            check_t_law(n)

    def test_u_squared_identity(self):
        rng = random.Random(37)
        for i in range(5):
            check_u_squared_identity(i, rng.randint(0, 40))

    def test_f_variable(self):
        h = Gf2Poly.from_exponents([0, 3, 4])
        self.assertEqual(f_coordinates(eval_in_F(h)), h)
        self.assertEqual(apply_U(eval_in_F(h)), alpha(h))
        with self.assertRaises(ShapeViolation):
            f_coordinates(r(1))


if __name__ == "__main__":
    unittest.main()
