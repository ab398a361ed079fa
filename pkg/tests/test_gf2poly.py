import random
import unittest

from exceptions import DivisionImpossible, MalformedInput, ShapeViolation
from gf2poly import (
    NEGATIVE_INFINITY,
    ZERO,
    Gf2Poly,
    Gf2Series,
    clmul,
    codec,
    div_by_t_plus_one,
    div_exact,
    format_value,
    parse_value,
    poly_arith,
    poly_compose_square,
    poly_divmod,
    series_arith,
    unsquare,
)


def schoolbook(a: int, b: int) -> int:
    out = 0
    i = 0
    while b >> i:
        if (b >> i) & 1:
            out ^= a << i
        i += 1
    return out


class TestPolyArith(unittest.TestCase):
    def test_add_is_characteristic_two(self):
        g = Gf2Poly.from_exponents([0, 3, 7])
        self.assertEqual(poly_arith(g, g, "add"), ZERO)

    def test_square_of_t_plus_one(self):
        self.assertEqual(poly_arith(Gf2Poly(0b11), ZERO, "square"), Gf2Poly(0b101))

    def test_mul_hand_expansion(self):
        self.assertEqual(poly_arith(Gf2Poly(0b110), Gf2Poly(0b11), "mul"), Gf2Poly(0b1010))

    def test_unknown_op(self):
        with self.assertRaises(MalformedInput):
            poly_arith(ZERO, ZERO, "div")

    def test_zero_degree(self):
        self.assertEqual(ZERO.degree, NEGATIVE_INFINITY)
        self.assertEqual(Gf2Poly(0b1000).degree, 3)

    def test_compose_square(self):
        self.assertEqual(poly_compose_square(Gf2Poly(1)), Gf2Poly(1))
        self.assertEqual(poly_compose_square(Gf2Poly(0b11)), Gf2Poly(0b101))
        self.assertEqual(poly_compose_square(Gf2Poly.from_exponents([1, 2, 4])), Gf2Poly.from_exponents([2, 4, 8]))

    def test_unsquare(self):
        self.assertEqual(unsquare(Gf2Poly.from_exponents([0, 4, 10])), Gf2Poly.from_exponents([0, 2, 5]))
        with self.assertRaises(ShapeViolation):
            unsquare(Gf2Poly(0b10))

    def test_clmul_paths_agree(self):
        rng = random.Random(7)
        for size in (5, 90, 700, 3000):
            a = rng.getrandbits(size) | 1
            b = rng.getrandbits(size) | 1
            expected = schoolbook(a, b)
            self.assertEqual(clmul(a, b), expected)
            self.assertEqual(clmul(a, b, threshold=64), expected)

    def test_divmod(self):
        rng = random.Random(11)
        for _ in range(20):
            a = rng.getrandbits(200)
            b = rng.getrandbits(40) | (1 << 40)
            q, r = poly_divmod(a, b)
            self.assertLess(r.bit_length(), b.bit_length())
            self.assertEqual(clmul(q, b) ^ r, a)
        with self.assertRaises(DivisionImpossible):
            poly_divmod(5, 0)

    def test_div_by_t_plus_one(self):
        q, c = div_by_t_plus_one(0b1111)
        self.assertEqual((clmul(q, 0b11) ^ c, c), (0b1111, 0))
        q, c = div_by_t_plus_one(0b111)
        self.assertEqual((clmul(q, 0b11) ^ c, c), (0b111, 1))

    def test_power(self):
        self.assertEqual(Gf2Poly(0b11) ** 4, Gf2Poly(0b10001))
        self.assertEqual(Gf2Poly(0b11) ** 0, Gf2Poly(1))


class TestSeries(unittest.TestCase):
    def test_bits_masked_to_precision(self):
        s = Gf2Series(0b1111, 2)
        self.assertEqual(s.bits, 0b11)
        self.assertEqual(Gf2Series(0, 7).valuation, 7)

    def test_mul_and_div_exact(self):
        a = Gf2Series.from_exponents([1, 3], 10)
        square = series_arith(a, a, "mul")
        self.assertEqual(square.support(), [2, 6])
        self.assertEqual(square.precision, 11)
        quotient = series_arith(square, a, "div_exact")
        self.assertEqual(quotient.support(), [1, 3])
        self.assertEqual(quotient.precision, 9)

    def test_add_self(self):
        s = Gf2Series.from_exponents([0, 4, 9], 12)
        self.assertTrue(series_arith(s, s, "add").is_zero)

    def test_div_exact_errors(self):
        with self.assertRaises(DivisionImpossible):
            div_exact(Gf2Series(1, 10), Gf2Series(0, 10))
        with self.assertRaises(DivisionImpossible):
            div_exact(Gf2Series(0b1, 10), Gf2Series(0b10, 10))

    def test_inverse(self):
        s = Gf2Series(0b1011, 64)
        product = s * s.inverse()
        self.assertEqual(product.bits, 1)
        self.assertEqual(product.precision, 64)

    def test_frobenius_doubles_precision(self):
        f = Gf2Series(0b101, 5).frobenius()
        self.assertEqual(f.support(), [0, 4])
        self.assertEqual(f.precision, 10)

    def test_agrees_with(self):
        a = Gf2Series(0b1011, 4)
        b = Gf2Series(0b111011, 8)
        self.assertTrue(a.agrees_with(b))
        self.assertFalse(a.agrees_with(Gf2Series(0b0011, 8)))


class TestCodec(unittest.TestCase):
    def test_format(self):
        self.assertEqual(format_value(Gf2Poly.from_exponents([1, 2, 4])), [1, 2, 4])
        self.assertEqual(codec(Gf2Series(0b101, 5), "format"), {"precision": 5, "exponents": [0, 2]})

    def test_parse(self):
        self.assertEqual(parse_value([]), ZERO)
        self.assertEqual(parse_value([0, 5]), Gf2Poly(0b100001))
        self.assertEqual(parse_value('{"precision": 4, "exponents": [1]}'), Gf2Series(0b10, 4))

    def test_parse_rejects(self):
        for raw in ("[1, 0]", "[-1]", "not json", '{"precision": 3, "exponents": [5]}', [1.5]):
            with self.assertRaises(MalformedInput):
                parse_value(raw)

    def test_parse_is_strict(self):
        for raw in ([True], ["3"], {"exponents": [1]}, {"precision": "4", "exponents": []}, 7):
            with self.assertRaises(MalformedInput):
                parse_value(raw)

    def test_unknown_direction(self):
        with self.assertRaises(MalformedInput):
            codec([], "encode")


if __name__ == "__main__":
    unittest.main()
