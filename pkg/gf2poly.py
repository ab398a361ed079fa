"""Bit-packed arithmetic for polynomials and truncated power series over GF(2).

A polynomial b_n t^n + ... + b_1 t + b_0 is stored as the nonnegative
integer b_n 2^n + ... + b_1 2 + b_0, so addition is xor and the CPython
big-integer implementation provides word-packed storage. The same carrier is
read as an element of Z/2[t], Z/2[r], Z/2[F] or Z/2[G] depending on context.

Truncated power series carry an explicit precision P: the coefficients of
x^e are known exactly for 0 <= e < P and no bit at index >= P is ever set.
"""
import json
import logging
from typing import Any, Dict, Iterable, List, Tuple, Union

from pydantic import ValidationError

from config import config
from exceptions import DivisionImpossible, MalformedInput, ShapeViolation
from schemas import PolyPayload, SeriesPayload

logger = logging.getLogger(__name__)

NEGATIVE_INFINITY = float("-inf")

_SPREAD_BYTES = []
for _b in range(256):
    _v = 0
    for _j in range(8):
        if (_b >> _j) & 1:
            _v |= 1 << (2 * _j)
    _SPREAD_BYTES.append(_v.to_bytes(2, "little"))

_COMPRESS = [sum(((b >> (2 * j)) & 1) << j for j in range(4)) for b in range(256)]

_HEX_DIGITS = "0123456789abcdef"


def mask(precision: int) -> int:
    return (1 << precision) - 1 if precision > 0 else 0


def support(bits: int) -> List[int]:
    """Ascending list of exponents with a set coefficient."""
    return [i for i, ch in enumerate(bin(bits)[:1:-1]) if ch == "1"]


def spread_bits(bits: int) -> int:
    """Move bit e to bit 2e (the Frobenius map on Z/2[t])."""
    if bits == 0:
        return 0
    data = bits.to_bytes((bits.bit_length() + 7) // 8, "little")
    return int.from_bytes(b"".join(map(_SPREAD_BYTES.__getitem__, data)), "little")


def compress_even_bits(bits: int) -> int:
    """Move bit 2e to bit e, discarding odd-position bits."""
    if bits == 0:
        return 0
    nbytes = (bits.bit_length() + 15) // 16 * 2
    data = bits.to_bytes(nbytes, "little")
    out = bytes(_COMPRESS[data[i]] | (_COMPRESS[data[i + 1]] << 4) for i in range(0, nbytes, 2))
    return int.from_bytes(out, "little")


def odd_bits(bits: int) -> int:
    if bits == 0:
        return 0
    nbytes = (bits.bit_length() + 7) // 8
    return bits & int.from_bytes(b"\xaa" * nbytes, "little")


def suffix_xor(bits: int) -> int:
    """Bit j of the result is the xor of the bits of ``bits`` at positions >= j."""
    y = bits
    shift = 1
    length = bits.bit_length()
    while shift < length:
        y ^= y >> shift
        shift <<= 1
    return y


def div_by_t_plus_one(bits: int) -> Tuple[int, int]:
    """Return (q, c) with bits = q*(t+1) + c and c in {0, 1}."""
    if bits == 0:
        return 0, 0
    return suffix_xor(bits >> 1), bits.bit_count() & 1


def _clmul_sparse(dense: int, sparse: int) -> int:
    c = 0
    while sparse:
        low = sparse & -sparse
        c ^= dense << (low.bit_length() - 1)
        sparse ^= low
    return c


def _clmul_windowed(a: int, b: int) -> int:
    table = [0] * 16
    table[1] = a
    for k in range(2, 16):
        table[k] = table[k >> 1] << 1 if k % 2 == 0 else table[k - 1] ^ a
    lookup = dict(zip(_HEX_DIGITS, table))
    c = 0
    for digit in format(b, "x"):
        c = (c << 4) ^ lookup[digit]
    return c


def _karatsuba(a: int, b: int, threshold: int) -> int:
    if a.bit_length() <= threshold or b.bit_length() <= threshold:
        return clmul(a, b, threshold)
    half = max(a.bit_length(), b.bit_length()) // 2
    low = mask(half)
    a0, a1 = a & low, a >> half
    b0, b1 = b & low, b >> half
    z0 = clmul(a0, b0, threshold)
    z2 = clmul(a1, b1, threshold)
    z1 = clmul(a0 ^ a1, b0 ^ b1, threshold) ^ z0 ^ z2
    return (z2 << (2 * half)) ^ (z1 << half) ^ z0


def clmul(a: int, b: int, threshold: int = None) -> int:
    """Carry-less product of two bit-packed polynomials."""
    if a == 0 or b == 0:
        return 0
    if threshold is None:
        threshold = config.KARATSUBA_THRESHOLD
    if a.bit_count() < b.bit_count():
        a, b = b, a
    if b.bit_count() <= 32 or b.bit_count() * 8 <= b.bit_length():
        return _clmul_sparse(a, b)
    if a.bit_length() > threshold and b.bit_length() > threshold:
        return _karatsuba(a, b, threshold)
    return _clmul_windowed(a, b)


def bits_from_exponents(exponents: Iterable[int]) -> int:
    bits = 0
    for e in exponents:
        bits ^= 1 << e
    return bits


class Gf2Poly:
    """Immutable polynomial over Z/2 in one variable."""

    __slots__ = ("bits",)

    def __init__(self, bits: int = 0):
        if bits < 0:
            raise MalformedInput("Polynomial bitvector must be nonnegative", {"bits": bits})
        object.__setattr__(self, "bits", bits)

    def __setattr__(self, name, value):
        raise AttributeError("Gf2Poly is immutable")

    @classmethod
    def from_exponents(cls, exponents: Iterable[int]) -> "Gf2Poly":
        return cls(bits_from_exponents(exponents))

    @classmethod
    def monomial(cls, e: int) -> "Gf2Poly":
        return cls(1 << e)

    @property
    def degree(self) -> Union[int, float]:
        if self.bits == 0:
            return NEGATIVE_INFINITY
        return self.bits.bit_length() - 1

    @property
    def is_zero(self) -> bool:
        return self.bits == 0

    def support(self) -> List[int]:
        return support(self.bits)

    def coefficient(self, e: int) -> int:
        return (self.bits >> e) & 1 if e >= 0 else 0

    def __bool__(self):
        return self.bits != 0

    def __eq__(self, other):
        if isinstance(other, Gf2Poly):
            return self.bits == other.bits
        if isinstance(other, int):
            return self.bits == other
        return NotImplemented

    def __hash__(self):
        return hash(("Gf2Poly", self.bits))

    def __add__(self, other: "Gf2Poly") -> "Gf2Poly":
        return Gf2Poly(self.bits ^ other.bits)

    __sub__ = __add__
    __xor__ = __add__

    def __mul__(self, other: "Gf2Poly") -> "Gf2Poly":
        return Gf2Poly(clmul(self.bits, other.bits))

    def __lshift__(self, k: int) -> "Gf2Poly":
        return Gf2Poly(self.bits << k)

    def __divmod__(self, other: "Gf2Poly") -> Tuple["Gf2Poly", "Gf2Poly"]:
        q, r = poly_divmod(self.bits, other.bits)
        return Gf2Poly(q), Gf2Poly(r)

    def __floordiv__(self, other: "Gf2Poly") -> "Gf2Poly":
        return divmod(self, other)[0]

    def __mod__(self, other: "Gf2Poly") -> "Gf2Poly":
        return divmod(self, other)[1]

    def __pow__(self, e: int) -> "Gf2Poly":
        return Gf2Poly(poly_pow(self.bits, e))

    def square(self) -> "Gf2Poly":
        return Gf2Poly(spread_bits(self.bits))

    def __repr__(self):
        if self.bits == 0:
            return "Gf2Poly(0)"
        terms = []
        for e in reversed(self.support()):
            terms.append("1" if e == 0 else ("t" if e == 1 else f"t^{e}"))
        return f"Gf2Poly({'+'.join(terms)})"


ZERO = Gf2Poly(0)
ONE = Gf2Poly(1)
T = Gf2Poly(2)


def poly_divmod(a: int, b: int) -> Tuple[int, int]:
    if b == 0:
        raise DivisionImpossible("Division by the zero polynomial")
    m = a.bit_length() - 1
    n = b.bit_length() - 1
    if m < n:
        return 0, a
    q = 0
    for shift in range(m - n, -1, -1):
        if (a >> (shift + n)) & 1:
            a ^= b << shift
            q |= 1 << shift
    return q, a


def poly_pow(a: int, e: int) -> int:
    if e < 0:
        raise MalformedInput("Negative exponent", {"exponent": e})
    result = 1
    while e:
        if e & 1:
            result = clmul(result, a)
        e >>= 1
        if e:
            a = spread_bits(a)
    return result


def unsquare(a: Gf2Poly) -> Gf2Poly:
    """Inverse of exponent doubling; the input must have only even exponents."""
    stray = odd_bits(a.bits)
    if stray:
        raise ShapeViolation(
            "Polynomial has odd exponents and is not a square",
            {"odd_exponents": support(stray)[:16]},
        )
    return Gf2Poly(compress_even_bits(a.bits))


def poly_compose_square(g: Gf2Poly) -> Gf2Poly:
    """g(t^2), computed by spreading exponents."""
    return Gf2Poly(spread_bits(g.bits))


def poly_arith(a: Gf2Poly, b: Gf2Poly, op: str) -> Gf2Poly:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "square":
        return a.square()
    raise MalformedInput(f"Unknown polynomial operation: {op}", {"op": op})


class Gf2Series:
    """Immutable truncated power series over Z/2 with explicit precision."""

    __slots__ = ("bits", "precision")

    def __init__(self, bits: int, precision: int):
        if precision < 0:
            raise MalformedInput("Series precision must be nonnegative", {"precision": precision})
        if bits < 0:
            raise MalformedInput("Series bitvector must be nonnegative")
        object.__setattr__(self, "bits", bits & mask(precision))
        object.__setattr__(self, "precision", precision)

    def __setattr__(self, name, value):
        raise AttributeError("Gf2Series is immutable")

    @classmethod
    def from_exponents(cls, exponents: Iterable[int], precision: int) -> "Gf2Series":
        return cls(bits_from_exponents(e for e in exponents if e < precision), precision)

    @property
    def valuation(self) -> int:
        """Index of the first nonzero coefficient; the precision when none is known."""
        if self.bits == 0:
            return self.precision
        return (self.bits & -self.bits).bit_length() - 1

    @property
    def is_zero(self) -> bool:
        return self.bits == 0

    def support(self) -> List[int]:
        return support(self.bits)

    def coefficient(self, e: int) -> int:
        if e >= self.precision:
            raise MalformedInput("Coefficient beyond known precision", {"exponent": e, "precision": self.precision})
        return (self.bits >> e) & 1

    def truncate(self, precision: int) -> "Gf2Series":
        return Gf2Series(self.bits, min(precision, self.precision))

    def agrees_with(self, other: "Gf2Series") -> bool:
        """Equality on the coefficients both series know."""
        common = min(self.precision, other.precision)
        return (self.bits ^ other.bits) & mask(common) == 0

    def __eq__(self, other):
        if not isinstance(other, Gf2Series):
            return NotImplemented
        return self.bits == other.bits and self.precision == other.precision

    def __hash__(self):
        return hash(("Gf2Series", self.bits, self.precision))

    def __add__(self, other: "Gf2Series") -> "Gf2Series":
        return Gf2Series(self.bits ^ other.bits, min(self.precision, other.precision))

    __sub__ = __add__

    def __mul__(self, other: "Gf2Series") -> "Gf2Series":
        precision = min(
            self.precision + other.valuation,
            other.precision + self.valuation,
            self.precision + other.precision,
        )
        return Gf2Series(clmul(self.bits, other.bits) & mask(precision), precision)

    def square(self) -> "Gf2Series":
        return self * self

    def frobenius(self) -> "Gf2Series":
        """f(x^2); in characteristic 2 this is f^2 and doubles the known precision."""
        return Gf2Series(spread_bits(self.bits), 2 * self.precision)

    def inverse(self) -> "Gf2Series":
        if self.precision == 0 or not self.bits & 1:
            raise DivisionImpossible("Only unit series are invertible", {"valuation": self.valuation})
        return Gf2Series(_inverse_bits(self.bits, self.precision), self.precision)

    def __repr__(self):
        shown = self.support()[:8]
        more = "..." if self.bits.bit_count() > 8 else ""
        return f"Gf2Series({shown}{more}, precision={self.precision})"


def _inverse_bits(unit: int, precision: int) -> int:
    # Newton step in characteristic 2: y <- b * y^2
    y = 1
    known = 1
    while known < precision:
        known = min(2 * known, precision)
        y = clmul(unit & mask(known), spread_bits(y)) & mask(known)
    return y


def div_exact(a: Gf2Series, b: Gf2Series) -> Gf2Series:
    if b.is_zero:
        raise DivisionImpossible("Divisor has no known nonzero coefficient", {"precision": b.precision})
    vb = b.valuation
    va = a.valuation
    if vb > va:
        raise DivisionImpossible(
            "Divisor valuation exceeds dividend valuation",
            {"valuation_dividend": va, "valuation_divisor": vb},
        )
    precision = min(a.precision, b.precision) - vb
    quotient = clmul(a.bits >> vb, _inverse_bits(b.bits >> vb, precision)) & mask(precision)
    return Gf2Series(quotient, precision)


def series_arith(a: Gf2Series, b: Gf2Series, op: str) -> Gf2Series:
    if op == "add":
        return a + b
    if op == "mul":
        return a * b
    if op == "div_exact":
        return div_exact(a, b)
    raise MalformedInput(f"Unknown series operation: {op}", {"op": op})


def format_value(value: Union[Gf2Poly, Gf2Series]) -> Union[List[int], Dict[str, Any]]:
    if isinstance(value, Gf2Poly):
        return value.support()
    if isinstance(value, Gf2Series):
        return {"precision": value.precision, "exponents": value.support()}
    raise MalformedInput(f"Cannot format {type(value).__name__}")


def parse_value(raw: Any) -> Union[Gf2Poly, Gf2Series]:
    if isinstance(raw, str):
        try:
            raw = json.loads(raw)
        except json.JSONDecodeError as e:
            raise MalformedInput(f"Invalid JSON: {e}")
    try:
        if isinstance(raw, dict):
            payload = SeriesPayload.model_validate(raw)
            return Gf2Series(bits_from_exponents(payload.exponents), payload.precision)
        payload = PolyPayload.model_validate({"exponents": raw})
    except ValidationError as e:
        raise MalformedInput(f"Invalid payload: {e.errors()[0]['msg']}", {"value": repr(raw)[:80]})
    return Gf2Poly(bits_from_exponents(payload.exponents))


def codec(value: Any, direction: str) -> Any:
    if direction == "format":
        return format_value(value)
    if direction == "parse":
        return parse_value(value)
    raise MalformedInput(f"Unknown codec direction: {direction}", {"direction": direction})
