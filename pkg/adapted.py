"""Hecke operators on the kernel K of U_5+I and the adapted basis m_{i,j}.

K has the basis f_n = (r^2+r) g_n(r^2), n = 0, 2 mod 6. Operators are stored
as bit matrices over that basis, column j holding the coordinates of T_p
applied to the j-th basis element.
"""
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from config import config
from exceptions import (
    ClosureFailure,
    DimensionViolation,
    EquivarianceFailure,
    MembershipFailure,
    NoSolution,
    NotInMOddSpan,
    NotMultiplication,
    TableTooSmall,
)
from gf2poly import Gf2Poly, Gf2Series, support
from linalg import Gf2Echelon, Gf2Solver, rank, solve_min, vector_to_bits
from modforms import (
    PrecisionPolicy,
    ThetaKind,
    gen_theta,
    hecke_tp,
    poly_of_series,
    series_of_modd,
    u5,
    wa_series,
)
from nmod import format_jvector, j_image, project_a
from recurrence import normalized_kernel_basis
from semilinear import from_g

logger = logging.getLogger(__name__)

Cell = Tuple[int, int]


@dataclass
class KBasis:
    bound: int
    degrees: List[int]
    g: List[int]
    series: List[int]
    policy: PrecisionPolicy

    @property
    def size(self) -> int:
        return len(self.degrees)

    @property
    def precision(self) -> int:
        return self.policy.precision

    def index(self, n: int) -> int:
        return self.degrees.index(n)

    def g_of(self, coords: np.ndarray) -> Gf2Poly:
        bits = 0
        for idx in np.nonzero(coords)[0]:
            bits ^= self.g[int(idx)]
        return Gf2Poly(bits)

    def degrees_of(self, coords: np.ndarray) -> List[int]:
        return [self.degrees[int(idx)] for idx in np.nonzero(coords)[0]]


def k_basis(N: int, policy: PrecisionPolicy) -> KBasis:
    kernel = normalized_kernel_basis(N)
    degrees = kernel.degrees()
    series = []
    for n in degrees:
        s = series_of_modd(kernel.poly(n), policy.precision)
        fixed = u5(s)
        if fixed.bits != s.truncate(fixed.precision).bits:
            diff = support(fixed.bits ^ s.truncate(fixed.precision).bits)
            logger.error(f"f_{n} is not fixed by U_5")
            raise MembershipFailure(f"U_5(f_{n}) differs from f_{n}", {"n": n, "first_difference": diff[0]})
        series.append(s.bits)
    logger.info(f"K basis to {N}: {len(degrees)} elements at precision {policy.precision}")
    return KBasis(bound=N, degrees=degrees, g=[kernel.g[n] for n in degrees], series=series, policy=policy)


@dataclass
class OperatorMatrix:
    p: int
    matrix: np.ndarray
    max_index: int = -1

    def apply(self, vector: np.ndarray) -> np.ndarray:
        return ((self.matrix.astype(np.int32) @ np.asarray(vector, dtype=np.int32)) & 1).astype(np.uint8)

    def power_apply(self, vector: np.ndarray, times: int) -> np.ndarray:
        for _ in range(times):
            vector = self.apply(vector)
        return vector


def _t_column(series_bits: int, precision: int, p: int, dmax: int, degree_index: Dict[int, int], g: Sequence[int], n: int) -> List[int]:
    image = hecke_tp(Gf2Series(series_bits, precision), p)
    try:
        h = poly_of_series(image, dmax).bits
    except NotInMOddSpan as e:
        if e.reason == "degree":
            raise ClosureFailure(f"T_{p}(f_{n}) leaves the degree range", {"p": p, "n": n, **e.certificate})
        raise
    column = []
    while h:
        d = h.bit_length() - 1
        idx = degree_index.get(d)
        if idx is None:
            raise ClosureFailure(
                f"T_{p}(f_{n}) is outside the span of the basis",
                {"p": p, "n": n, "degree": d},
            )
        h ^= g[idx]
        column.append(idx)
    return column


def t_matrix(p: int, basis: KBasis, threads: Optional[int] = None) -> OperatorMatrix:
    if basis.policy.pmax < p:
        raise TableTooSmall(
            f"Basis precision policy covers primes up to {basis.policy.pmax}, not {p}",
            {"p": p, "pmax": basis.policy.pmax},
        )
    threads = threads or config.THREADS
    degree_index = {n: i for i, n in enumerate(basis.degrees)}
    columns = Parallel(n_jobs=threads)(
        delayed(_t_column)(s, basis.precision, p, basis.bound, degree_index, basis.g, n)
        for s, n in zip(basis.series, basis.degrees)
    )
    matrix = np.zeros((basis.size, basis.size), dtype=np.uint8)
    max_index = -1
    for j, column in enumerate(columns):
        for i in column:
            matrix[i, j] = 1
            max_index = max(max_index, i)
    logger.debug(f"T_{p} matrix on {basis.size} basis elements, max output index {max_index}")
    return OperatorMatrix(p=p, matrix=matrix, max_index=max_index)


def grid_cells(depth: int) -> List[Cell]:
    """Cells (i, j) with i + j <= depth in diagonal order."""
    return [(i, s - i) for s in range(depth + 1) for i in range(s, -1, -1)]


@dataclass
class AdaptedBasis:
    depth: int
    basis: KBasis
    cells: Dict[Cell, np.ndarray] = field(default_factory=dict)

    def vector(self, i: int, j: int) -> np.ndarray:
        if i < 0 or j < 0:
            return np.zeros(self.basis.size, dtype=np.uint8)
        return self.cells[(i, j)]

    def to_payload(self) -> List[Dict[str, Any]]:
        return [
            {"i": i, "j": j, "f": self.basis.degrees_of(v)}
            for (i, j), v in sorted(self.cells.items(), key=lambda item: (sum(item[0]), -item[0][0]))
        ]


def build_adapted(depth: int, M3: OperatorMatrix, M7: OperatorMatrix, basis: KBasis) -> AdaptedBasis:
    size = basis.size
    stacked = np.concatenate([M3.matrix, M7.matrix], axis=0)
    solver = Gf2Solver(stacked)
    adapted = AdaptedBasis(depth=depth, basis=basis)

    m00 = np.zeros(size, dtype=np.uint8)
    m00[basis.index(0)] = 1
    adapted.cells[(0, 0)] = m00

    for i, j in grid_cells(depth)[1:]:
        rhs = np.concatenate([adapted.vector(i - 1, j), adapted.vector(i, j - 1)])
        x = solver.solve(rhs)
        if x is None:
            raise NoSolution(
                f"No m_({i},{j}) in the span of f_n, n <= {basis.bound}",
                {"i": i, "j": j, "bound": basis.bound, "rank": solver.rank, "size": size},
            )
        adapted.cells[(i, j)] = x

    check_shift_relations(adapted, M3, M7)
    grid = np.array([adapted.cells[c] for c in grid_cells(depth)], dtype=np.uint8)
    grid_rank = rank(grid)
    if grid_rank != len(grid):
        raise DimensionViolation(
            "Adapted grid is linearly dependent",
            {"depth": depth, "rank": grid_rank, "cells": len(grid)},
        )
    return adapted


def check_shift_relations(adapted: AdaptedBasis, M3: OperatorMatrix, M7: OperatorMatrix) -> Dict[str, Any]:
    for (i, j), v in adapted.cells.items():
        if not np.array_equal(M3.apply(v), adapted.vector(i - 1, j)):
            raise NoSolution(f"T_3 m_({i},{j}) differs from m_({i - 1},{j})", {"i": i, "j": j, "p": 3})
        if not np.array_equal(M7.apply(v), adapted.vector(i, j - 1)):
            raise NoSolution(f"T_7 m_({i},{j}) differs from m_({i},{j - 1})", {"i": i, "j": j, "p": 7})
    return {"cells": len(adapted.cells)}


@dataclass
class UElement:
    """u_p in Z/2[[X, Y]] truncated at total degree ``depth``; terms are (a, b) for X^a Y^b."""

    p: int
    depth: int
    terms: List[Cell]

    @property
    def constant_term(self) -> int:
        return 1 if (0, 0) in self.terms else 0

    def to_payload(self) -> List[List[int]]:
        return [[a, b] for a, b in sorted(self.terms, key=lambda t: (t[0] + t[1], -t[0]))]


def extract_u(p: int, adapted: AdaptedBasis, Mp: OperatorMatrix) -> UElement:
    """Solve T_p m_(i,j) = sum u_(a,b) m_(i-a, j-b) over the whole grid at once."""
    cells = grid_cells(adapted.depth)
    size = adapted.basis.size
    blocks = []
    rhs = []
    for i, j in cells:
        block = np.zeros((size, len(cells)), dtype=np.uint8)
        for col, (a, b) in enumerate(cells):
            if a <= i and b <= j:
                block[:, col] = adapted.vector(i - a, j - b)
        blocks.append(block)
        rhs.append(Mp.apply(adapted.cells[(i, j)]))
    solution = solve_min(np.concatenate(blocks, axis=0), np.concatenate(rhs))
    if solution is None:
        logger.error(f"T_{p} is not a multiplication operator on the depth-{adapted.depth} grid")
        raise NotMultiplication(f"T_{p} is not multiplication by a power series", {"p": p, "depth": adapted.depth})
    terms = [cells[k] for k in np.nonzero(solution)[0]]
    u = UElement(p=p, depth=adapted.depth, terms=terms)
    if u.constant_term:
        raise NotMultiplication(f"u_{p} has a nonzero constant term", {"p": p, "terms": u.to_payload()})
    return u


def check_faithful(adapted: AdaptedBasis, M3: OperatorMatrix, M7: OperatorMatrix) -> Dict[str, Any]:
    """The monomials X^a Y^b, a + b <= depth, act independently on the grid."""
    cells = grid_cells(adapted.depth)
    echelon = Gf2Echelon()
    for a, b in cells:
        image = 0
        for offset, cell in enumerate(cells):
            v = M7.power_apply(M3.power_apply(adapted.cells[cell], a), b)
            image |= vector_to_bits(v) << (offset * adapted.basis.size)
        lead, _ = echelon.insert(image, 0)
        if lead is None:
            raise NotMultiplication("Monomial action is not faithful", {"a": a, "b": b})
    return {"monomials": len(cells)}


def check_local_nilpotence(adapted: AdaptedBasis, M: OperatorMatrix) -> Dict[str, Any]:
    for cell, v in adapted.cells.items():
        if M.power_apply(v, adapted.depth + 1).any():
            raise NotMultiplication(
                f"T_{M.p}^{adapted.depth + 1} does not annihilate m_{cell}",
                {"p": M.p, "i": cell[0], "j": cell[1]},
            )
    return {"p": M.p, "power": adapted.depth + 1}


def check_kills_f0(M: OperatorMatrix, basis: KBasis) -> Dict[str, Any]:
    column = M.matrix[:, basis.index(0)]
    if column.any():
        raise NotMultiplication(f"T_{M.p}(F+G) is not zero", {"p": M.p, "f": basis.degrees_of(column)})
    return {"p": M.p}


@dataclass
class AdaptedRun:
    basis: KBasis
    adapted: AdaptedBasis
    matrices: Dict[int, OperatorMatrix]
    enlargements: int = 0


def adapted_pipeline(depth: int, primes: Sequence[int] = (3, 7), threads: Optional[int] = None,
                     start_n: Optional[int] = None, max_n: Optional[int] = None) -> AdaptedRun:
    """Build the adapted grid, doubling the kernel bound until it closes."""
    primes = sorted(set(primes) | {3, 7})
    N = start_n or config.ADAPTED_START_N
    cap = max_n or config.ADAPTED_MAX_N
    enlargements = 0
    while True:
        policy = PrecisionPolicy(dmax=N, pmax=max(primes))
        try:
            basis = k_basis(N, policy)
            M3 = t_matrix(3, basis, threads)
            M7 = t_matrix(7, basis, threads)
            adapted = build_adapted(depth, M3, M7, basis)
            break
        except (ClosureFailure, NoSolution) as e:
            if 2 * N > cap:
                logger.error(f"Adapted basis did not close below the cap {cap}")
                raise
            logger.warning(f"Enlarging kernel bound from {N} to {2 * N}: {e.detail}")
            N *= 2
            enlargements += 1
    matrices = {3: M3, 7: M7}
    for p in primes:
        if p not in matrices:
            matrices[p] = t_matrix(p, basis, threads)
    return AdaptedRun(basis=basis, adapted=adapted, matrices=matrices, enlargements=enlargements)


def w_series(image: Sequence[int], precision: int) -> Gf2Series:
    return wa_series(project_a(image), precision)


def _image_of_coords(basis: KBasis, coords: np.ndarray) -> frozenset:
    total: set = set()
    for idx in np.nonzero(coords)[0]:
        total ^= set(j_image(from_g(Gf2Poly(basis.g[int(idx)]))))
    return frozenset(total)


def wa_check(basis: KBasis, nmax: int, matrices: Dict[int, OperatorMatrix], precision: Optional[int] = None) -> List[Dict[str, Any]]:
    """K -> W_a: injectivity, w(f_0) = D and T_q-equivariance for q in {3, 7}."""
    precision = precision or basis.precision
    rows = []
    images: Dict[int, frozenset] = {}
    echelon = Gf2Echelon()
    leads = set()
    for idx, n in enumerate(basis.degrees):
        if n > nmax:
            break
        image = j_image(from_g(Gf2Poly(basis.g[idx])))
        images[idx] = image
        projected = project_a(image)
        w = w_series(image, precision)
        if n == 0 and not w.agrees_with(gen_theta(ThetaKind.D, w.precision)):
            raise EquivarianceFailure("w(F+G) differs from D", {"n": 0, "q": None})
        lead = max(projected) if projected else None
        if lead in leads:
            raise EquivarianceFailure("Leading N2a index repeats", {"n": n, "leading": lead})
        leads.add(lead)
        if echelon.insert(w.bits, 0)[0] is None:
            raise EquivarianceFailure("w(f_n) is dependent on earlier images", {"n": n, "q": None})
        for q in (3, 7):
            M = matrices[q]
            coords = np.zeros(basis.size, dtype=np.uint8)
            coords[idx] = 1
            image_of_t = _image_of_coords(basis, M.apply(coords))
            left = w_series(image_of_t, precision)
            right = hecke_tp(w, q)
            if not left.agrees_with(right):
                difference = support(left.truncate(right.precision).bits ^ right.truncate(left.precision).bits)
                logger.error(f"w(T_{q} f_{n}) differs from T_{q} w(f_{n})")
                raise EquivarianceFailure(
                    f"w(T_{q} f_{n}) differs from T_{q} w(f_{n})",
                    {"n": n, "q": q, "first_difference": difference[0]},
                )
        rows.append({"n": n, "leading": lead, "image": format_jvector(projected)})
    return rows
