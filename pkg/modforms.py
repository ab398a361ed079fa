"""Power-series realization of Z/2[r]: theta series, T_p, U_5 and pr.

r is the series sum_{n>0} x^(n^2) + x^(2n^2) + x^(5n^2) + x^(10n^2); every
polynomial in r is evaluated at it. Precision is tracked on every value and
each operator narrows it to what its inputs determine.
"""
import logging
from dataclasses import dataclass
from enum import Enum
from math import gcd, isqrt
from typing import Any, Dict, Iterable, List, Union

from cache_manager import algebra_cache
from config import config
from exceptions import AgreementFailure, BadPrime, MalformedInput, NotInMOddSpan
from gf2poly import Gf2Poly, Gf2Series, clmul, compress_even_bits, div_exact, mask, spread_bits, support
from nmod import j_element
from semilinear import F, G, MOddElem, PolyInR, apply_U, from_g

logger = logging.getLogger(__name__)


class ThetaKind(str, Enum):
    R = "R"
    F = "F"
    G = "G"
    D = "D"


@dataclass(frozen=True)
class PrecisionPolicy:
    """Input precision needed to reconstruct g of degree <= dmax after an operator dividing precision by pmax."""

    dmax: int
    pmax: int = 1

    @property
    def precision(self) -> int:
        return self.pmax * (2 * self.dmax + 3)

    @property
    def output_precision(self) -> int:
        return (self.precision - 1) // self.pmax + 1


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % d for d in range(2, isqrt(p) + 1))


def _theta_bits(kind: ThetaKind, precision: int) -> int:
    bits = 0
    top = isqrt(max(precision - 1, 0)) + 1
    for n in range(1, top + 1):
        square = n * n
        if kind == ThetaKind.R:
            for scale in (1, 2, 5, 10):
                if scale * square < precision:
                    bits ^= 1 << (scale * square)
        elif kind == ThetaKind.F:
            if n % 2 and square < precision:
                bits ^= 1 << square
        elif kind == ThetaKind.G:
            if n % 2 and 5 * square < precision:
                bits ^= 1 << (5 * square)
        elif gcd(n, 10) == 1 and square < precision:
            bits ^= 1 << square
    return bits


def gen_theta(kind: Union[ThetaKind, str], precision: int) -> Gf2Series:
    kind = ThetaKind(kind)
    if precision < 1:
        raise MalformedInput("Theta precision must be positive", {"precision": precision})
    return algebra_cache.series_cache.get_or_build(
        algebra_cache._get_theta_key(kind.value, precision),
        lambda: Gf2Series(_theta_bits(kind, precision), precision),
    )


def _check_prime(p: int):
    if not is_prime(p) or p in (2, 5):
        raise BadPrime(f"T_{p} needs an odd prime other than 5", {"p": p})


def _decimate(f: Gf2Series, p: int) -> Dict[str, int]:
    precision = (f.precision - 1) // p + 1 if f.precision > 0 else 0
    out = 0
    for e in support(f.bits):
        if e % p == 0 and e // p < precision:
            out ^= 1 << (e // p)
    return {"bits": out, "precision": precision}


def hecke_tp(f: Gf2Series, p: int) -> Gf2Series:
    """sum c_n x^n -> sum (c_{pn} + c_{n/p}) x^n."""
    _check_prime(p)
    part = _decimate(f, p)
    precision = part["precision"]
    out = part["bits"]
    for e in support(f.bits):
        if e * p < precision:
            out ^= 1 << (e * p)
        else:
            break
    return Gf2Series(out, precision)


def u5(f: Gf2Series) -> Gf2Series:
    part = _decimate(f, 5)
    return Gf2Series(part["bits"], part["precision"])


def _not_divisible_by_5_mask(precision: int) -> int:
    pattern = sum(1 << i for i in range(40) if i % 5)
    repeats = precision // 40 + 1
    return int.from_bytes(pattern.to_bytes(5, "little") * repeats, "little") & mask(precision)


def pr(f: Gf2Series) -> Gf2Series:
    return Gf2Series(f.bits & _not_divisible_by_5_mask(f.precision), f.precision)


def _series_bits(bits: int, precision: int, r_bits: int) -> int:
    # f(r) = f_e(r)^2 + r f_o(r)^2 where f(t) = f_e(t^2) + t f_o(t^2)
    if precision <= 0 or bits == 0:
        return 0
    if bits == 1:
        return 1
    half = (precision + 1) // 2
    from_even = spread_bits(_series_bits(_even_part(bits), half, r_bits & mask(half)))
    odd = _odd_part(bits)
    out = from_even
    if odd:
        from_odd = spread_bits(_series_bits(odd, half, r_bits & mask(half)))
        out ^= clmul(r_bits & mask(precision), from_odd & mask(precision))
    return out & mask(precision)


def _even_part(bits: int) -> int:
    return compress_even_bits(bits)


def _odd_part(bits: int) -> int:
    return compress_even_bits(bits >> 1)


def series_of_poly(f: Union[PolyInR, MOddElem], precision: int) -> Gf2Series:
    if isinstance(f, MOddElem):
        f = f.poly
    if precision < 0:
        raise MalformedInput("Precision must be nonnegative", {"precision": precision})
    if precision == 0:
        return Gf2Series(0, 0)
    r_bits = gen_theta(ThetaKind.R, precision).bits
    return Gf2Series(_series_bits(f.bits, precision, r_bits), precision)


def _extend_basis_series(precision: int):
    r_squared = spread_bits(gen_theta(ThetaKind.R, precision).bits) & mask(precision)

    def extend(table: List[int], size: int) -> None:
        while len(table) < size:
            table.append(clmul(table[-1], r_squared) & mask(precision))

    return extend


def _basis_seed(precision: int) -> List[int]:
    r_bits = gen_theta(ThetaKind.R, precision).bits
    return [r_bits ^ (spread_bits(r_bits) & mask(precision))]


def basis_series(N: int, precision: int) -> List[int]:
    """Bits of the series of (r^2+r) r^(2n), 0 <= n <= N, at the given precision."""
    return algebra_cache.series_cache.grow(
        algebra_cache._get_basis_series_key(precision),
        lambda: _basis_seed(precision),
        N + 1,
        _extend_basis_series(precision),
    )


def series_of_modd(g: Gf2Poly, precision: int) -> Gf2Series:
    """Series of (r^2+r) g(r^2), summed from the basis table."""
    if g.is_zero:
        return Gf2Series(0, precision)
    table = basis_series(g.degree, precision)
    out = 0
    for n in g.support():
        out ^= table[n]
    return Gf2Series(out, precision)


def poly_of_series(s: Gf2Series, dmax: int) -> Gf2Poly:
    """The g with series_of_poly((r^2+r) g(r^2)) = s, deg g <= dmax.

    (r^2+r) r^(2n) has valuation 2n+1 with leading coefficient 1, so the
    residual is cleared from its lowest term upward.
    """
    if s.precision < 2 * dmax + 3:
        raise MalformedInput(
            "Series precision too small for the requested degree",
            {"precision": s.precision, "dmax": dmax, "required": 2 * dmax + 3},
        )
    table = basis_series(dmax, s.precision)
    residual = s.bits
    g = 0
    while residual:
        v = (residual & -residual).bit_length() - 1
        if v % 2 == 0:
            raise NotInMOddSpan(v, "even_valuation", {"g_so_far": support(g)[-8:]})
        n = (v - 1) // 2
        if n > dmax:
            raise NotInMOddSpan(v, "degree", {"dmax": dmax})
        residual ^= table[n]
        g |= 1 << n
    return Gf2Poly(g)


def verify_u_agreement(n: int, precision: int = None) -> Dict[str, Any]:
    """U_5 and U agree on (r^2+r) r^(2n)."""
    if precision is None:
        precision = 5 * (4 * n + 6)
    if precision < 5 * (4 * n + 6):
        raise MalformedInput("Precision below the agreement policy", {"n": n, "precision": precision})
    x = from_g(Gf2Poly.monomial(n))
    left = u5(series_of_poly(x, precision))
    right = series_of_poly(apply_U(x), left.precision)
    if left.bits != right.bits:
        diff = support(left.bits ^ right.bits)
        logger.error(f"U_5 and U disagree on (r^2+r)r^{2 * n} at x^{diff[0]}")
        raise AgreementFailure(f"U_5 and U disagree for n = {n}", {"n": n, "first_difference": diff[0]})
    return {"n": n, "precision": left.precision}


def check_theta_identities(precision: int = None) -> Dict[str, Any]:
    precision = precision or config.THETA_CHECK_PRECISION
    for name, poly, kind in (("F", F, ThetaKind.F), ("G", G, ThetaKind.G)):
        evaluated = series_of_poly(poly, precision)
        expected = gen_theta(kind, precision)
        if evaluated != expected:
            diff = support(evaluated.bits ^ expected.bits)
            raise AgreementFailure(
                f"Series of {name} as a polynomial in r differs from its theta series",
                {"series": name, "first_difference": diff[0], "precision": precision},
            )
    if pr(gen_theta(ThetaKind.F, precision)) != gen_theta(ThetaKind.D, precision):
        raise AgreementFailure("pr(F) differs from D", {"precision": precision})
    return {"precision": precision}


def wa_generators(precision: int) -> Dict[int, Gf2Series]:
    """pr(J_1), pr(J_3), pr(J_7), pr(J_9) as D, D^8/G, D^2 G, D^4 G."""
    d = gen_theta(ThetaKind.D, precision)
    g = gen_theta(ThetaKind.G, precision)
    d2 = d.frobenius()
    d4 = d2.frobenius()
    d8 = d4.frobenius()
    return {
        1: d,
        3: div_exact(d8, g),
        7: (d2 * g).truncate(precision),
        9: (d4 * g).truncate(precision),
    }


def wa_series(v: Iterable[int], precision: int) -> Gf2Series:
    """Series of pr(sum J_k) for k in the chi = +1 part, via J_(k+20) -> G^4 pr(J_k)."""
    generators = wa_generators(precision)
    g4 = gen_theta(ThetaKind.G, precision).frobenius().frobenius().truncate(precision)
    out = Gf2Series(0, precision)
    for k in v:
        shift, base = divmod(k, 20)
        if base not in generators:
            raise MalformedInput(f"J_{k} is not in the chi = +1 part", {"k": k})
        term = generators[base]
        for _ in range(shift):
            term = term * g4
        out = out + term
    return out


def check_wa_generators(precision: int, max_index: int = 49) -> Dict[str, Any]:
    generators = wa_generators(precision)
    checked = []
    for k in range(1, max_index + 1):
        if k % 20 not in generators:
            continue
        direct = pr(series_of_poly(j_element(k), precision))
        via_generators = wa_series([k], precision)
        if not direct.agrees_with(via_generators):
            diff = support((direct.bits ^ via_generators.bits) & mask(min(direct.precision, via_generators.precision)))
            raise AgreementFailure(f"pr(J_{k}) differs from its W_a generator form", {"k": k, "first_difference": diff[0]})
        checked.append(k)
    return {"indices": checked, "precision": precision}


def check_tp_stabilizes_modd(g: Gf2Poly, p: int) -> Dict[str, Any]:
    policy = PrecisionPolicy(dmax=max(g.degree, 0), pmax=p)
    image = hecke_tp(series_of_modd(g, policy.precision), p)
    h = poly_of_series(image, policy.dmax)
    return {"p": p, "degree": g.degree, "image_degree": h.degree}


def check_tp_commutes_with_u5(g: Gf2Poly, p: int) -> Dict[str, Any]:
    policy = PrecisionPolicy(dmax=max(g.degree, 0), pmax=5 * p)
    s = series_of_modd(g, policy.precision)
    left = u5(hecke_tp(s, p))
    right = hecke_tp(u5(s), p)
    if not left.agrees_with(right):
        raise AgreementFailure("T_p and U_5 do not commute", {"p": p, "g": g.support()})
    return {"p": p, "precision": min(left.precision, right.precision)}
