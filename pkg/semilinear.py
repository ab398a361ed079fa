"""The ring Z/2[r], its elements F and G, and the operators U and T.

Elements of Z/2[r] are ``Gf2Poly`` values read in the variable r. Elements of
Z/2[F] handed to ``apply_T`` are ``Gf2Poly`` values read in the variable F
(bit k is the coefficient of F^k).
"""
import logging
import random
from dataclasses import dataclass
from typing import Any, Dict, List, Tuple, Union

from cache_manager import algebra_cache
from exceptions import BadIndex, MalformedInput, NotInMOdd, ShapeViolation
from gf2poly import (
    Gf2Poly,
    clmul,
    compress_even_bits,
    div_by_t_plus_one,
    odd_bits,
    spread_bits,
    support,
)

logger = logging.getLogger(__name__)

R = Gf2Poly(0b10)
F = Gf2Poly(0b1100110)  # r(r+1)^5 = r^6+r^5+r^2+r
G = Gf2Poly(0b1100000)  # r^5(r+1) = r^6+r^5
F_PLUS_G = Gf2Poly(0b110)

# U on the Z/2[G]-basis 1, r, ..., r^5
U_BASIS_IMAGES = (0b1, 0b10, 0b100, 0b1110, 0b10000, 0b110010)

PolyInR = Gf2Poly


def mul_F(bits: int) -> int:
    return (bits << 6) ^ (bits << 5) ^ (bits << 2) ^ (bits << 1)


def mul_G(bits: int) -> int:
    return (bits << 6) ^ (bits << 5)


def _horner(bits: int, mul) -> int:
    acc = 0
    for ch in bin(bits)[2:]:
        acc = mul(acc)
        if ch == "1":
            acc ^= 1
    return acc


def eval_in_F(h: Gf2Poly) -> PolyInR:
    """h(F) as an element of Z/2[r]."""
    return Gf2Poly(_horner(h.bits, mul_F))


def alpha(h: Gf2Poly) -> PolyInR:
    """The isomorphism Z/2[F] -> Z/2[G] taking F^n to G^n."""
    return Gf2Poly(_horner(h.bits, mul_G))


def _check_module_constants():
    if (F + G) != F_PLUS_G:
        raise ShapeViolation("F+G differs from r^2+r")
    if (F_PLUS_G ** 6) + F * G:
        raise ShapeViolation("(F+G)^6+FG is not zero")


_check_module_constants()


@dataclass(frozen=True)
class GCoords:
    """Coordinates a_0..a_5 over the Z/2[G]-basis 1, r, ..., r^5."""

    coeffs: Tuple[Gf2Poly, Gf2Poly, Gf2Poly, Gf2Poly, Gf2Poly, Gf2Poly]

    def __getitem__(self, i: int) -> Gf2Poly:
        return self.coeffs[i]

    def recompose(self) -> PolyInR:
        total = 0
        for i, a in enumerate(self.coeffs):
            total ^= _horner(a.bits, mul_G) << i
        return Gf2Poly(total)


@dataclass(frozen=True)
class MOddElem:
    """The element (r^2+r) g(r^2) of M(odd)."""

    g: Gf2Poly

    @property
    def poly(self) -> PolyInR:
        return from_g(self.g)


def g_basis_decompose(f: PolyInR) -> GCoords:
    # f = rem + G*q with deg rem < 6, where G = r^5 (r+1): split off r^5 and
    # divide the high part by r+1.
    bits = f.bits
    levels = []
    while bits:
        quotient, carry = div_by_t_plus_one(bits >> 5)
        levels.append((bits & 0b11111) | (carry << 5))
        bits = quotient
    coeffs = [0] * 6
    for k, rem in enumerate(levels):
        for i in range(6):
            if (rem >> i) & 1:
                coeffs[i] |= 1 << k
    return GCoords(tuple(Gf2Poly(a) for a in coeffs))


def _extend_u_table(table: List[int], size: int) -> None:
    while len(table) < size:
        n = len(table) - 6
        table.append(table[n + 5] ^ mul_F(table[n]))


def u_monomial_table(degree: int) -> List[int]:
    """U(r^m) for 0 <= m <= degree; from r^(n+6) = r^(n+5) + G r^n."""
    return algebra_cache.table_cache.grow(
        algebra_cache._get_u_monomial_key(),
        lambda: list(U_BASIS_IMAGES),
        degree + 1,
        _extend_u_table,
    )


def apply_U(f: PolyInR) -> PolyInR:
    if f.is_zero:
        return f
    table = u_monomial_table(f.degree)
    out = 0
    for m in f.support():
        out ^= table[m]
    return Gf2Poly(out)


def apply_U_by_decomposition(f: PolyInR) -> PolyInR:
    """U(f) = sum a_i(F) U(r^i), straight from the semi-linear definition."""
    coords = g_basis_decompose(f)
    out = 0
    for a, image in zip(coords.coeffs, U_BASIS_IMAGES):
        if a:
            out ^= clmul(_horner(a.bits, mul_F), image)
    return Gf2Poly(out)


def from_g(g: Union[Gf2Poly, MOddElem]) -> PolyInR:
    if isinstance(g, MOddElem):
        g = g.g
    s = spread_bits(g.bits)
    return Gf2Poly((s << 2) ^ (s << 1))


def to_g(x: PolyInR) -> Gf2Poly:
    bits = x.bits
    if bits & 1:
        raise NotInMOdd("Constant term is nonzero", {"exponents": x.support()[:16]})
    quotient, carry = div_by_t_plus_one(bits >> 1)
    if carry:
        raise NotInMOdd("Not divisible by r^2+r", {"degree": x.degree})
    stray = odd_bits(quotient)
    if stray:
        raise NotInMOdd(
            "Cofactor of r^2+r is not a polynomial in r^2",
            {"odd_exponents": support(stray)[:16]},
        )
    return Gf2Poly(compress_even_bits(quotient))


def modd_convert(x, direction: str):
    if direction == "from_g":
        return from_g(x)
    if direction == "to_g":
        return to_g(x)
    raise MalformedInput(f"Unknown direction: {direction}", {"direction": direction})


def u_plus_i_on_modd(n: int) -> Gf2Poly:
    """C_n, read off from (U+I)((r^2+r) r^(2n)) = (r^2+r) C_n(r^2)."""
    if n < 0:
        raise BadIndex("n must be nonnegative", {"n": n})
    table = u_monomial_table(2 * n + 2)
    image = table[2 * n + 2] ^ table[2 * n + 1] ^ (0b11 << (2 * n + 1))
    try:
        return to_g(Gf2Poly(image))
    except NotInMOdd as e:
        raise ShapeViolation(f"(U+I)((r^2+r)r^{2 * n}) left M(odd)", {"n": n, **e.certificate})


def _extend_t_table(table: List[int], size: int) -> None:
    while len(table) < size:
        n = len(table) - 6
        table.append((table[n + 4] << 2) ^ (table[n + 2] << 4) ^ (table[n] << 6) ^ (table[n + 1] << 1))


def t_table(degree: int) -> List[int]:
    """T(F^n) for 0 <= n <= degree, bits read in the variable F."""
    return algebra_cache.table_cache.grow(
        algebra_cache._get_t_table_key(),
        lambda: [0, 0, 0, 0, 0, 0b10],
        degree + 1,
        _extend_t_table,
    )


def apply_T(h: Gf2Poly) -> Gf2Poly:
    if h.is_zero:
        return h
    table = t_table(h.degree)
    out = 0
    for n in h.support():
        out ^= table[n]
    return Gf2Poly(out)


def _extend_f_powers(table: List[int], size: int) -> None:
    while len(table) < size:
        table.append(mul_F(table[-1]))


def f_powers(degree: int) -> List[int]:
    return algebra_cache.table_cache.grow(
        algebra_cache._get_power_key("F"),
        lambda: [1],
        degree + 1,
        _extend_f_powers,
    )


def f_coordinates(x: PolyInR) -> Gf2Poly:
    """Write x as a polynomial in F; ShapeViolation when x is not in Z/2[F]."""
    bits = x.bits
    if not bits:
        return Gf2Poly(0)
    powers = f_powers((bits.bit_length() - 1) // 6)
    out = 0
    while bits:
        d = bits.bit_length() - 1
        if d % 6:
            raise ShapeViolation("Element is not a polynomial in F", {"degree": d})
        bits ^= powers[d // 6]
        out |= 1 << (d // 6)
    return Gf2Poly(out)


def apply_T_direct(h: Gf2Poly) -> Gf2Poly:
    """T(h) = U(h(F)) + h(G), converted back to the F-variable."""
    return f_coordinates(apply_U(eval_in_F(h)) + alpha(h))


def check_frobenius(f: PolyInR) -> Dict[str, Any]:
    if apply_U(f.square()) != apply_U(f).square():
        raise ShapeViolation("U(f^2) differs from U(f)^2", {"f": f.support()})
    return {"degree": f.degree}


def check_semilinearity(f: PolyInR) -> Dict[str, Any]:
    if apply_U(G * f) != F * apply_U(f):
        raise ShapeViolation("U(Gf) differs from F U(f)", {"f": f.support()})
    if apply_U(f) != apply_U_by_decomposition(f):
        raise ShapeViolation("Table and decomposition routes for U disagree", {"f": f.support()})
    return {"degree": f.degree}


def check_modd_stable(g: Gf2Poly) -> Dict[str, Any]:
    image = to_g(apply_U(from_g(g)))
    return {"degree": g.degree, "image_degree": image.degree}


def check_fixed_points() -> Dict[str, Any]:
    s = F_PLUS_G
    if apply_U(s) != s or apply_U(s ** 3) != s ** 3:
        raise ShapeViolation("U does not fix F+G and (F+G)^3")
    if apply_U(s ** 5) != s ** 5 + F:
        raise ShapeViolation("U((F+G)^5) differs from (F+G)^5+F")
    expected = [G ** k for k in range(6)]
    expected[5] = expected[5] + F
    for k in range(6):
        if apply_U(F ** k) != expected[k]:
            raise ShapeViolation("U(F^k) differs from G^k", {"k": k})
    if apply_U(G) != F:
        raise ShapeViolation("U(G) differs from F")
    small = {
        6: [6, 4, 2],
        8: [8],
        10: [10, 8, 2],
    }
    for m, exponents in small.items():
        if apply_U(Gf2Poly.monomial(m)) != Gf2Poly.from_exponents(exponents):
            raise ShapeViolation("Unexpected U(r^m)", {"m": m})
    return {"checked": ["F+G", "(F+G)^3", "(F+G)^5", "F^0..F^5", "r^6", "r^8", "r^10"]}


def check_six_term_recursion(n: int) -> Dict[str, Any]:
    """G^n and U(F^n) both satisfy P_{n+6}+F^2P_{n+4}+F^4P_{n+2}+F^6P_n+FP_{n+1}=0."""
    for name, P in (("G^n", lambda k: G ** k), ("U(F^n)", lambda k: apply_U(F ** k))):
        total = P(n + 6) + (F ** 2) * P(n + 4) + (F ** 4) * P(n + 2) + (F ** 6) * P(n) + F * P(n + 1)
        if total:
            raise ShapeViolation(f"{name} breaks the six-term recursion", {"n": n})
    return {"n": n}


def check_t_law(n: int) -> Dict[str, Any]:
    """T(F^n) only involves F^k with k = n mod 2 and k <= n-4."""
    image = t_table(n)[n]
    for k in support(image):
        if (k - n) % 2 or k > n - 4:
            raise ShapeViolation("T(F^n) has a term outside the parity/degree law", {"n": n, "k": k})
    return {"n": n, "terms": image.bit_count()}


def check_t_paths(h: Gf2Poly) -> Dict[str, Any]:
    table_value = apply_T(h)
    direct_value = apply_T_direct(h)
    if table_value != direct_value:
        raise ShapeViolation(
            "Table and direct routes for T disagree",
            {"h": h.support(), "table": table_value.support(), "direct": direct_value.support()},
        )
    return {"degree": h.degree}


def check_u_squared_identity(i: int, k: int) -> Dict[str, Any]:
    """(U^2+I)(F^i G^k) = F^i T(F^k) for 0 <= i <= 4."""
    x = (F ** i) * (G ** k)
    left = apply_U(apply_U(x)) + x
    right = eval_in_F(Gf2Poly(t_table(k)[k] << i))
    if left != right:
        raise ShapeViolation("(U^2+I)(F^i G^k) differs from F^i T(F^k)", {"i": i, "k": k})
    return {"i": i, "k": k}


def random_poly(rng: random.Random, degree: int) -> Gf2Poly:
    if degree < 0:
        return Gf2Poly(0)
    return Gf2Poly(rng.getrandbits(degree) | (1 << degree))
