"""The modules N1 and N2 over Z/2[G^2], the J_k basis of N2/N1 and its splitting by chi."""
import logging
import random
from dataclasses import dataclass
from math import gcd
from typing import Any, Dict, FrozenSet, Iterable, List, Sequence

from cache_manager import algebra_cache
from exceptions import BadIndex, MalformedInput, NotInN2, ProjectionMismatch, TableTooSmall
from gf2poly import Gf2Poly, poly_divmod, support
from recurrence import KernelBasis, l_space, u_elements
from semilinear import F, G, PolyInR, from_g

logger = logging.getLogger(__name__)

U_INDICES = (0, 1, 2, 4, 5)
J_BASES = (1, 3, 7, 9)

# u_i G^(2n) has r-degree U_DEGREES[i] + 12n
U_DEGREES = {0: 2, 1: 4, 2: 6, 4: 10, 5: 12}
_INDEX_BY_RESIDUE = {2: 0, 4: 1, 6: 2, 10: 4, 0: 5}

# images of u_i in N2/N1; u_2 = G lies in N1
U_IMAGES = {0: (1,), 1: (7, 3), 2: (), 4: (7,), 5: (11, 9, 7)}

JVector = FrozenSet[int]


def _g_squared_times(bits: int) -> int:
    return (bits << 12) ^ (bits << 10)


def chi(k: int) -> int:
    if gcd(k, 10) != 1:
        raise BadIndex(f"{k} is not prime to 10", {"k": k})
    return 1 if k % 20 in (1, 3, 7, 9) else -1


def _j_representatives(assignment: str = "adopted") -> Dict[int, int]:
    eighth_over_g, remainder = poly_divmod((F ** 8).bits, G.bits)
    if remainder:
        raise NotInN2("G does not divide F^8")
    f4g = ((F ** 4) * G).bits
    reps = {1: F.bits, 7: ((F ** 2) * G).bits}
    if assignment == "adopted":
        reps.update({3: eighth_over_g, 9: f4g})
    elif assignment == "literal":
        reps.update({3: f4g, 9: eighth_over_g})
    else:
        raise MalformedInput(f"Unknown J assignment: {assignment}", {"assignment": assignment})
    return reps


def j_element(k: int) -> PolyInR:
    if k <= 0:
        raise BadIndex(f"J_{k} is undefined", {"k": k})
    chi(k)
    shift, base = divmod(k, 10)
    bits = _j_representatives()[base]
    for _ in range(shift):
        bits = _g_squared_times(bits)
    return Gf2Poly(bits)


@dataclass(frozen=True)
class N2Coords:
    """Coordinates over Z/2[G^2] on u_0, u_1, u_2, u_4, u_5; bit n of coeffs[i] is the G^(2n) u_i term."""

    coeffs: Dict[int, Gf2Poly]

    def __getitem__(self, i: int) -> Gf2Poly:
        return self.coeffs[i]

    def recompose(self) -> PolyInR:
        out = 0
        for i, c in self.coeffs.items():
            table = _generators(c.degree if c else 0)
            for n in c.support():
                out ^= table[n][i]
        return Gf2Poly(out)


def _extend_generators(table: List[Dict[int, int]], size: int) -> None:
    while len(table) < size:
        table.append({i: _g_squared_times(v) for i, v in table[-1].items()})


def _generators(n: int) -> List[Dict[int, int]]:
    """u_i G^(2k) for k <= n."""
    return algebra_cache.table_cache.grow(
        algebra_cache._get_power_key("u_G2"),
        lambda: [{i: u.bits for i, u in u_elements().items()}],
        n + 1,
        _extend_generators,
    )


def n2_decompose(f: PolyInR) -> N2Coords:
    bits = f.bits
    coeffs = {i: 0 for i in U_INDICES}
    if bits:
        table = _generators(max(0, (bits.bit_length() - 1) // 12))
    while bits:
        d = bits.bit_length() - 1
        i = _INDEX_BY_RESIDUE.get(d % 12)
        if i is None or d < U_DEGREES[i]:
            raise NotInN2(
                f"No N2 generator has r-degree {d}",
                {"degree": d, "exponents": support(bits)[-8:]},
            )
        n = (d - U_DEGREES[i]) // 12
        bits ^= table[n][i]
        coeffs[i] |= 1 << n
    return N2Coords({i: Gf2Poly(c) for i, c in coeffs.items()})


def j_image(f: PolyInR) -> JVector:
    coords = n2_decompose(f)
    image: set = set()
    for i, c in coords.coeffs.items():
        for n in c.support():
            image.symmetric_difference_update(k + 10 * n for k in U_IMAGES[i])
    return frozenset(image)


def project_a(v: Iterable[int]) -> JVector:
    return frozenset(k for k in v if chi(k) == 1)


def project_b(v: Iterable[int]) -> JVector:
    return frozenset(k for k in v if chi(k) == -1)


def format_jvector(v: Iterable[int]) -> List[int]:
    return sorted(v)


def _permanent(matrix: Sequence[Sequence[Gf2Poly]]) -> Gf2Poly:
    # over GF(2) the determinant equals the permanent
    size = len(matrix)
    if size == 0:
        return Gf2Poly(1)
    if size == 1:
        return matrix[0][0]
    total = Gf2Poly(0)
    for j in range(size):
        if matrix[0][j]:
            minor = [row[:j] + row[j + 1:] for row in matrix[1:]]
            total = total + matrix[0][j] * _permanent(minor)
    return total


def _minor(matrix, row: int, col: int):
    return [r[:col] + r[col + 1:] for i, r in enumerate(matrix) if i != row]


@dataclass
class JBasisChange:
    """Rows: u-coordinates of G, J_1, J_3, J_7, J_9; inverse maps u-coordinates back."""

    labels: List[int]
    matrix: List[List[Gf2Poly]]
    determinant: Gf2Poly
    inverse: List[List[Gf2Poly]]


def j_basis_change(assignment: str = "adopted") -> JBasisChange:
    reps = _j_representatives(assignment)
    labels = [0] + list(J_BASES)
    rows = [G.bits] + [reps[b] for b in J_BASES]
    matrix = []
    for bits in rows:
        coords = n2_decompose(Gf2Poly(bits))
        matrix.append([coords[i] for i in U_INDICES])
    det = _permanent(matrix)
    size = len(matrix)
    inverse = [[_permanent(_minor(matrix, j, i)) for j in range(size)] for i in range(size)]
    return JBasisChange(labels=labels, matrix=matrix, determinant=det, inverse=inverse)


def _basis_change_cached(assignment: str) -> JBasisChange:
    return algebra_cache.basis_cache.get_or_build(
        f"j_basis_change:{assignment}",
        lambda: j_basis_change(assignment),
    )


def j_image_via_basis(f: PolyInR, assignment: str = "adopted") -> JVector:
    """Image in N2/N1 through the Z/2[G^2]-basis G, J_1, J_3, J_7, J_9."""
    change = _basis_change_cached(assignment)
    if change.determinant != Gf2Poly(1):
        raise NotInN2(
            "G, J_1, J_3, J_7, J_9 are not a basis of N2",
            {"assignment": assignment, "determinant": change.determinant.support()},
        )
    coords = n2_decompose(f)
    x = [coords[i] for i in U_INDICES]
    image: set = set()
    for col, label in enumerate(change.labels):
        if label == 0:
            continue
        c = Gf2Poly(0)
        for row in range(len(x)):
            if x[row]:
                c = c + x[row] * change.inverse[row][col]
        image.symmetric_difference_update(label + 10 * n for n in c.support())
    return frozenset(image)


def j_assignment_report() -> Dict[str, Any]:
    """Which J_3/J_9 assignment reproduces the u_i -> J table."""
    report = {}
    for assignment in ("adopted", "literal"):
        change = _basis_change_cached(assignment)
        consistent = change.determinant == Gf2Poly(1)
        mismatches = []
        if consistent:
            for i, u in u_elements().items():
                image = j_image_via_basis(u, assignment)
                if image != frozenset(U_IMAGES[i]):
                    consistent = False
                    mismatches.append({"u": i, "image": sorted(image)})
        report[assignment] = {"consistent": consistent, "mismatches": mismatches}
    if report["literal"]["consistent"]:
        logger.warning("Both J_3/J_9 assignments reproduce the u_i images")
    return report


def check_j_identities() -> Dict[str, Any]:
    j3 = j_element(3)
    if j3 != F ** 3 + F * G ** 2 + G ** 7:
        raise NotInN2("F^8/G differs from F^3 + F G^2 + G^7")
    for b in J_BASES:
        n2_decompose(j_element(b))
    change = _basis_change_cached("adopted")
    if change.determinant != Gf2Poly(1):
        raise NotInN2("Change of basis to G, J_1, J_3, J_7, J_9 is not invertible")
    return {"determinant": change.determinant.support()}


# (n offset from 12m, leading index offset from 20m, remainder bound offset)
PROJECTION_CASES = [
    (0, 1, -11),
    (6, 3, 1),
    (2, 7, 3),
    (8, 9, 7),
]


def verify_projection(m: int, basis: KernelBasis) -> List[Dict[str, Any]]:
    if not basis.covers(12 * m + 8):
        raise TableTooSmall(
            f"Kernel basis bound {basis.bound} does not reach {12 * m + 8}",
            {"m": m, "bound": basis.bound},
        )
    rows = []
    for offset, lead_offset, bound_offset in PROJECTION_CASES:
        n = 12 * m + offset
        f = basis.f(n)
        image = j_image(f)
        projected = project_a(image)
        lead = max(projected) if projected else None
        rest = projected - {lead} if lead is not None else projected
        expected_lead = 20 * m + lead_offset
        bound = 20 * m + bound_offset
        witness = {
            "n": n,
            "leading": lead,
            "remainder": format_jvector(rest),
            "expected_leading": expected_lead,
            "bound": bound,
        }
        if lead != expected_lead or (rest and max(rest) > bound):
            logger.error(f"Projection of f_{n} has leading index {lead}, expected {expected_lead}")
            raise ProjectionMismatch(
                f"Projection of f_{n} misses its leading index or bound",
                {**witness, "image": format_jvector(image)},
            )
        if j_image_via_basis(f) != image:
            raise ProjectionMismatch(
                f"Two routes to the image of f_{n} disagree",
                {"n": n, "image": format_jvector(image), "via_basis": format_jvector(j_image_via_basis(f))},
            )
        rows.append(witness)
    return rows


def check_projection_injective(rows: Sequence[Dict[str, Any]]) -> Dict[str, Any]:
    leads = [row["leading"] for row in rows]
    if len(set(leads)) != len(leads):
        raise ProjectionMismatch("Leading indices repeat", {"leading": leads})
    return {"count": len(leads)}


def random_n2_g(rng: random.Random, max_degree: int) -> Gf2Poly:
    """Random element of N2, in g-coordinates, of g-degree at most max_degree."""
    m = max_degree // 6 + 1
    bits = 0
    for v in l_space(m):
        if v.bit_length() - 1 <= max_degree and rng.random() < 0.5:
            bits ^= v
    return Gf2Poly(bits)


def check_image_bound(h: Gf2Poly, index_bound: int) -> Dict[str, Any]:
    image = j_image(from_g(h))
    top = max(image) if image else None
    if top is not None and top > index_bound:
        raise ProjectionMismatch(
            "Image exceeds its index bound",
            {"h": h.support(), "top": top, "bound": index_bound},
        )
    return {"top": top, "bound": index_bound}
