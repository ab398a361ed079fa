"""The sequences A_n and C_n, the map phi: t^k -> C_k and its kernel basis."""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set

from cache_manager import algebra_cache
from exceptions import (
    BadIndex,
    DimensionViolation,
    LemmaViolated,
    NotApplicable,
    TableTooSmall,
    TheoremViolated,
)
from gf2poly import NEGATIVE_INFINITY, Gf2Poly, poly_pow, support
from linalg import Gf2Echelon, nullspace
from semilinear import F, F_PLUS_G, G, PolyInR, apply_U, from_g, mul_F, to_g, u_plus_i_on_modd

logger = logging.getLogger(__name__)

A_SEEDS = (0b1, 0b11, 0b101, 0b1010, 0b10100, 0b110110)
C_SEEDS = (0, 0b1, 0b1, 0b10, 0b100, 0b10110)

NORMALIZATIONS = ("reduced", "lemma34")

# Leading-window targets of the normalized g_n: (modulus, residue) -> (fixed
# depth below n, exponents n-d forced to 1 for d in the tuple).
WINDOW_PATTERNS = [
    ((12, 0), 1, ()),
    ((12, 2), 1, (1,)),
    ((24, 8), 3, ()),
    ((24, 20), 3, (2,)),
    ((48, 6), 5, (1, 2, 3, 4, 5)),
    ((48, 18), 5, (1,)),
    ((48, 30), 5, (1, 2, 3)),
    ((48, 42), 5, (1, 4, 5)),
]

# Leading approximations g_n ~ (t^6+t^5)^(2m) X with the degree slack of the
# difference, keyed by n - 12m.
APPROXIMATIONS = {
    0: (0b1, -2),
    6: (0b1111110, 0),
    2: (0b110, 0),
    8: (0b100000000, 4),
}

GOLDEN_C = {
    0: 0,
    1: 0b1,
    2: 0b1,
    3: 0b10,
    4: 0b100,
    5: 0b10110,
    6: 0b10000,
    8: 0b100,
    12: 0b100010100,
}

# deg of a sum of C_k over the given indices
GOLDEN_SUM_DEGREES = [
    ((14, 13), 10),
    ((20, 18), 8),
    ((30, 29, 28, 27, 26, 25), 22),
    ((18, 17), 8),
    ((42, 41), 34),
]


def is_kernel_degree(n: int) -> bool:
    return n >= 0 and n % 6 in (0, 2)


def degree(bits: int):
    return bits.bit_length() - 1 if bits else NEGATIVE_INFINITY


def _extend_c(table: List[int], size: int) -> None:
    while len(table) < size:
        n = len(table) - 6
        table.append(table[n + 5] ^ mul_F(table[n]) ^ (0b110 << n))


def _extend_a(table: List[int], size: int) -> None:
    while len(table) < size:
        n = len(table) - 6
        table.append(table[n + 5] ^ mul_F(table[n]))


@dataclass
class SequenceTable:
    bound: int
    C: List[int]
    A: List[int]

    def c(self, n: int) -> Gf2Poly:
        return Gf2Poly(self.C[n])

    def a(self, n: int) -> Gf2Poly:
        return Gf2Poly(self.A[n])


def gen_sequences(N: int) -> SequenceTable:
    if N < 5:
        N = 5
    cache = algebra_cache.sequence_cache
    C = cache.grow(algebra_cache._get_sequence_key("C"), lambda: list(C_SEEDS), N + 1, _extend_c)
    A = cache.grow(algebra_cache._get_sequence_key("A"), lambda: list(A_SEEDS), N + 1, _extend_a)
    for n in range(N + 1):
        if C[n] ^ A[n] != 1 << n:
            raise TheoremViolated("C_n differs from A_n + t^n", {"n": n})
    return SequenceTable(bound=N, C=C, A=A)


def phi(g: Gf2Poly, table: Optional[SequenceTable] = None) -> Gf2Poly:
    if g.is_zero:
        return g
    if table is None:
        table = gen_sequences(g.degree)
    if g.degree > table.bound:
        raise TableTooSmall("Sequence table does not cover the input", {"degree": g.degree, "bound": table.bound})
    out = 0
    for k in g.support():
        out ^= table.C[k]
    return Gf2Poly(out)


@dataclass
class KernelBasis:
    bound: int
    g: Dict[int, int] = field(default_factory=dict)
    normalization: str = "reduced"

    def degrees(self) -> List[int]:
        return sorted(self.g)

    def poly(self, n: int) -> Gf2Poly:
        return Gf2Poly(self.g[n])

    def f(self, n: int) -> PolyInR:
        return from_g(self.poly(n))

    def covers(self, n: int) -> bool:
        return n <= self.bound


def _build_kernel_basis(N: int) -> KernelBasis:
    table = gen_sequences(N)
    echelon = Gf2Echelon()
    basis = KernelBasis(bound=N)
    kernel_mask = 0
    for n in range(N + 1):
        lead, combo = echelon.insert(table.C[n], 1 << n)
        expected = is_kernel_degree(n)
        if (lead is None) != expected:
            state = "dependent" if lead is None else "independent"
            logger.error(f"C_{n} is {state} of its predecessors")
            raise TheoremViolated(
                f"C_{n} is {state} of C_0..C_{n - 1}",
                {"n": n, "residue": n % 6, "echelon_hash": echelon.state_hash()},
            )
        if lead is None:
            # clear coefficients at lower kernel degrees; stored rows carry none
            hits = combo & kernel_mask
            while hits:
                k = hits.bit_length() - 1
                combo ^= basis.g[k]
                hits = combo & kernel_mask & ((1 << k) - 1)
            basis.g[n] = combo
            kernel_mask |= 1 << n
    logger.debug(f"Kernel basis to {N}: {len(basis.g)} elements, rank {echelon.rank}")
    return basis


def kernel_basis(N: int) -> KernelBasis:
    if N < 0:
        raise BadIndex("N must be nonnegative", {"N": N})
    return algebra_cache.basis_cache.get_or_build(
        algebra_cache._get_kernel_key(N, "reduced"),
        lambda: _build_kernel_basis(N),
    )


def express_C(n: int, basis: Optional[KernelBasis] = None) -> Set[int]:
    if not is_kernel_degree(n):
        raise NotApplicable(f"C_{n} is not a combination of earlier terms", {"n": n, "residue": n % 6})
    if basis is None or not basis.covers(n):
        basis = kernel_basis(n)
    return set(support(basis.g[n])) - {n}


def window_pattern(n: int):
    for (modulus, residue), depth, ones in WINDOW_PATTERNS:
        if n % modulus == residue:
            return depth, {n - d for d in ones}
    return None


def _fix_window(n: int, g: int, normalized: Dict[int, int]) -> int:
    pattern = window_pattern(n)
    if pattern is None:
        return g
    depth, ones = pattern
    for d in range(n - 1, n - depth - 1, -1):
        if d < 0:
            break
        want = 1 if d in ones else 0
        if (g >> d) & 1 == want:
            continue
        if d not in normalized:
            logger.error(f"Window of g_{n} cannot be fixed at degree {d}")
            raise LemmaViolated(
                f"g_{n} has a window mismatch at non-pivot degree {d}",
                {"n": n, "degree": d, "g_window": [e for e in support(g) if e >= n - depth]},
            )
        g ^= normalized[d]
    return g


def normalize_lemma34(basis: KernelBasis) -> KernelBasis:
    """Adjust each g_n by lower g_k so its top window matches the residue-class pattern."""
    normalized: Dict[int, int] = {}
    for n in basis.degrees():
        normalized[n] = _fix_window(n, basis.g[n], normalized)
    return KernelBasis(bound=basis.bound, g=normalized, normalization="lemma34")


def normalized_kernel_basis(N: int) -> KernelBasis:
    return algebra_cache.basis_cache.get_or_build(
        algebra_cache._get_kernel_key(N, "lemma34"),
        lambda: normalize_lemma34(kernel_basis(N)),
    )


def check_window(basis: KernelBasis, n: int) -> Dict[str, Any]:
    pattern = window_pattern(n)
    g = basis.g[n]
    if pattern is not None:
        depth, ones = pattern
        for d in range(n - 1, max(n - depth - 1, -1), -1):
            if (g >> d) & 1 != (1 if d in ones else 0):
                raise LemmaViolated(f"g_{n} misses its window pattern at degree {d}", {"n": n, "degree": d})
    return {"n": n, "g_top": [e for e in support(g) if e >= n - 6]}


def check_approximation(basis: KernelBasis, n: int) -> Dict[str, Any]:
    """deg(g_n + (t^6+t^5)^(2m) X) is within the residue-class bound."""
    m, rest = divmod(n, 12)
    if rest not in APPROXIMATIONS:
        raise NotApplicable(f"No approximation for n = {n}", {"n": n})
    x, slack = APPROXIMATIONS[rest]
    q = poly_pow(0b1100000, 2 * m)
    difference = basis.g[n] ^ (Gf2Poly(q) * Gf2Poly(x)).bits
    bound = 12 * m + slack
    if degree(difference) > bound:
        raise TheoremViolated(
            f"g_{n} is not approximated to degree {bound}",
            {"n": n, "m": m, "degree": degree(difference), "bound": bound},
        )
    return {"n": n, "difference_degree": degree(difference), "bound": bound}


def check_degree_law(table: SequenceTable, n: int) -> Dict[str, Any]:
    d = degree(table.C[n])
    residue = n % 6
    if residue in (1, 5):
        ok = d == n - 1
    elif residue in (3, 4):
        ok = d == n - 2
    else:
        ok = d <= n - 2
    if not ok:
        raise TheoremViolated(f"deg C_{n} = {d} breaks the degree law", {"n": n, "degree": d})
    if degree(table.A[n]) > n:
        raise TheoremViolated(f"deg A_{n} exceeds {n}", {"n": n})
    return {"n": n, "degree": d}


def check_u_plus_i(table: SequenceTable, n: int) -> Dict[str, Any]:
    """C_n from the recurrence against the (U+I) image on M(odd)."""
    image = u_plus_i_on_modd(n)
    if image.bits != table.C[n]:
        raise TheoremViolated(
            f"C_{n} differs from the (U+I) image",
            {"n": n, "C": support(table.C[n]), "image": image.support()},
        )
    return {"n": n}


def _sum_degree(table: SequenceTable, indices) -> int:
    total = 0
    for k in indices:
        total ^= table.C[k]
    return degree(total)


def _require(condition: bool, label: str, n: int, value: int, bound: int):
    if not condition:
        raise TheoremViolated(f"{label} fails at n = {n}", {"n": n, "degree": value, "bound": bound, "identity": label})


def check_window_identities(table: SequenceTable, n: int) -> Dict[str, Any]:
    """Degree bounds on short combinations of C_n, C_{n-24}, C_{n-48} and neighbours."""
    checked = []
    C = table.C
    if n >= 24:
        bound = n - 6 if n % 2 == 0 else n - 5
        d = degree(C[n] ^ (C[n - 24] << 24))
        _require(d <= bound, "shift24", n, d, bound)
        checked.append("shift24")
    if n >= 48:
        d = degree(C[n] ^ (C[n - 48] << 48))
        _require(d <= n - 9, "shift48", n, d, n - 9)
        checked.append("shift48")
    if n % 12 == 0:
        d = degree(C[n])
        _require(d <= n - 4, "zero_mod_12", n, d, n - 4)
        checked.append("zero_mod_12")
    if n % 12 == 2:
        d = _sum_degree(table, (n, n - 1))
        _require(d <= n - 4, "two_mod_12", n, d, n - 4)
        checked.append("two_mod_12")
    if n % 24 == 8:
        d = degree(C[n])
        _require(d <= n - 6, "eight_mod_24", n, d, n - 6)
        checked.append("eight_mod_24")
    if n % 24 == 20:
        d = _sum_degree(table, (n, n - 2))
        _require(d <= n - 6, "twenty_mod_24", n, d, n - 6)
        checked.append("twenty_mod_24")
    if n % 24 == 6:
        for indices in ((n, n - 1, n - 2, n - 3, n - 4, n - 5), (n, n - 1, n - 2, n - 3)):
            d = _sum_degree(table, indices)
            _require(d <= n - 8, "six_mod_24", n, d, n - 8)
        checked.append("six_mod_24")
    if n % 24 == 18:
        for indices in ((n, n - 1), (n, n - 1, n - 4, n - 5)):
            d = _sum_degree(table, indices)
            _require(d <= n - 8, "eighteen_mod_24", n, d, n - 8)
        checked.append("eighteen_mod_24")
    return {"n": n, "identities": checked}


def check_golden_values(table: Optional[SequenceTable] = None) -> Dict[str, Any]:
    table = table or gen_sequences(48)
    for n, bits in GOLDEN_C.items():
        if table.C[n] != bits:
            raise TheoremViolated(f"C_{n} differs from its known value", {"n": n, "C": support(table.C[n])})
    for n, bits in enumerate(A_SEEDS):
        if table.A[n] != bits:
            raise TheoremViolated(f"A_{n} differs from its seed", {"n": n})
    for indices, expected in GOLDEN_SUM_DEGREES:
        d = _sum_degree(table, indices)
        if d != expected:
            raise TheoremViolated("Sum of C_k has an unexpected degree", {"indices": list(indices), "degree": d})
    return {"checked": sorted(GOLDEN_C) + [list(i) for i, _ in GOLDEN_SUM_DEGREES]}


def u_elements() -> Dict[int, PolyInR]:
    """u_0, u_1, u_2, u_4, u_5 as elements of Z/2[r]."""
    s = F_PLUS_G
    return {
        0: s,
        1: s ** 3 + G,
        2: G,
        4: (s ** 2) * G,
        5: (s ** 4) * G + s * F * G,
    }


def l_space(m: int) -> List[int]:
    """g-coordinates of the u_i G^(2n), 0 <= n <= m."""
    g2 = G ** 2
    out = []
    for n in range(m + 1):
        power = g2 ** n
        for u in u_elements().values():
            out.append(to_g(u * power).bits)
    return out


@dataclass
class KmKernel:
    m: int
    dimension: int
    basis: List[Gf2Poly]
    square_dimension: int
    l_dimension: int
    l_stable: bool


def _phi_bits(g: int, C: List[int]) -> int:
    out = 0
    for k in support(g):
        out ^= C[k]
    return out


def km_kernel(m: int) -> KmKernel:
    if m < 0:
        raise BadIndex("m must be nonnegative", {"m": m})
    top = 6 * m + 5
    table = gen_sequences(top)
    C = table.C

    relations = nullspace(C[: top + 1])
    if len(relations) != 2 * m + 2:
        raise DimensionViolation(
            f"dim K_{m} = {len(relations)}, expected {2 * m + 2}",
            {"m": m, "dimension": len(relations)},
        )

    # (U+I)^2 corresponds to phi applied twice in g-coordinates
    square_images = [_phi_bits(C[k], C) for k in range(top + 1)]
    square_star = nullspace(square_images)
    if len(square_star) != 4 * m + 4:
        raise DimensionViolation(
            f"(U+I)^2 kernel on L* has dimension {len(square_star)}, expected {4 * m + 4}",
            {"m": m, "dimension": len(square_star)},
        )

    l_vectors = l_space(m)
    l_echelon = Gf2Echelon()
    for v in l_vectors:
        if v.bit_length() - 1 > top:
            raise DimensionViolation("L is not contained in L*", {"m": m, "degree": v.bit_length() - 1})
        l_echelon.insert(v, 0)
    if l_echelon.rank != 5 * m + 5:
        raise DimensionViolation(f"dim L = {l_echelon.rank}, expected {5 * m + 5}", {"m": m})

    l_images = [_phi_bits(_phi_bits(v, C), C) for v in l_vectors]
    square_l = nullspace(l_images)
    kernel_in_l = Gf2Echelon()
    for combo in square_l:
        vector = 0
        for j in support(combo):
            vector ^= l_vectors[j]
        kernel_in_l.insert(vector, 0)
    for combo in square_star:
        if not kernel_in_l.contains(combo):
            raise DimensionViolation(
                "(U+I)^2 kernels on L and L* differ",
                {"m": m, "witness": support(combo)},
            )

    witness = G ** 5
    l_stable = True
    if m >= 2:
        l_stable = l_echelon.contains(to_g(apply_U(witness)).bits)

    return KmKernel(
        m=m,
        dimension=len(relations),
        basis=[Gf2Poly(r) for r in relations],
        square_dimension=len(square_star),
        l_dimension=l_echelon.rank,
        l_stable=l_stable,
    )
