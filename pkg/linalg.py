"""GF(2) linear algebra.

Two representations are used. Long vectors whose length grows during a run
(images of C_n, g-polynomials) are Python ints used as bitsets and reduced by
``Gf2Echelon``. Fixed-size operator matrices are numpy uint8 arrays reduced by
``rref`` and solved by ``Gf2Solver``.
"""
import hashlib
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

logger = logging.getLogger(__name__)


class Gf2Echelon:
    """Streaming echelon form over GF(2).

    Each pivot is keyed by the leading bit of its row and carries a combo:
    the xor of the tags of the inserted rows it is built from. A row that
    reduces to zero yields its combo as a linear relation.
    """

    def __init__(self):
        self.pivots: Dict[int, Tuple[int, int]] = {}

    def reduce(self, row: int, combo: int = 0) -> Tuple[int, int]:
        pivots = self.pivots
        while row:
            lead = row.bit_length() - 1
            pivot = pivots.get(lead)
            if pivot is None:
                break
            row ^= pivot[0]
            combo ^= pivot[1]
        return row, combo

    def insert(self, row: int, combo: int) -> Tuple[Optional[int], int]:
        """Insert ``row`` tagged ``combo``.

        Returns (leading bit, combo) for a new pivot, or (None, relation)
        when the row lies in the current span.
        """
        row, combo = self.reduce(row, combo)
        if row == 0:
            return None, combo
        lead = row.bit_length() - 1
        self.pivots[lead] = (row, combo)
        return lead, combo

    def contains(self, row: int) -> bool:
        return self.reduce(row)[0] == 0

    @property
    def rank(self) -> int:
        return len(self.pivots)

    def state_hash(self) -> str:
        digest = hashlib.sha256()
        for lead in sorted(self.pivots):
            row, combo = self.pivots[lead]
            digest.update(f"{lead}:{row:x}:{combo:x};".encode())
        return digest.hexdigest()


def nullspace(vectors: Sequence[int]) -> List[int]:
    """Basis of the kernel of e_i -> vectors[i], as bitmasks over i."""
    echelon = Gf2Echelon()
    relations = []
    for i, v in enumerate(vectors):
        lead, combo = echelon.insert(v, 1 << i)
        if lead is None:
            relations.append(combo)
    return relations


def span_rank(vectors: Sequence[int]) -> int:
    echelon = Gf2Echelon()
    for v in vectors:
        echelon.insert(v, 0)
    return echelon.rank


def bits_to_vector(bits: int, length: int) -> np.ndarray:
    nbytes = max(1, (length + 7) // 8)
    data = (bits & ((1 << length) - 1)).to_bytes(nbytes, "little")
    return np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")[:length].copy()


def vector_to_bits(vector: np.ndarray) -> int:
    packed = np.packbits(np.asarray(vector, dtype=np.uint8) & 1, bitorder="little")
    return int.from_bytes(packed.tobytes(), "little")


def rref(M, n_pivot_cols: Optional[int] = None) -> Tuple[np.ndarray, List[int]]:
    """Reduced row echelon form of a binary matrix.

    Pivots are searched in natural column order among the first
    ``n_pivot_cols`` columns; row operations act on the full width.
    """
    R = (np.asarray(M, dtype=np.uint8) & 1).copy()
    m, n = R.shape
    if n_pivot_cols is None:
        n_pivot_cols = n

    pivot_cols: List[int] = []
    pivot_row = 0
    for col in range(n_pivot_cols):
        if pivot_row == m:
            break
        below = np.nonzero(R[pivot_row:, col])[0]
        if below.size == 0:
            continue
        found = pivot_row + int(below[0])
        if found != pivot_row:
            R[[pivot_row, found]] = R[[found, pivot_row]]
        rows = np.nonzero(R[:, col])[0]
        rows = rows[rows != pivot_row]
        if rows.size:
            R[rows] ^= R[pivot_row]
        pivot_cols.append(col)
        pivot_row += 1
    return R, pivot_cols


def rank(M) -> int:
    return len(rref(M)[1])


def nullity(M) -> int:
    M = np.asarray(M)
    return M.shape[1] - rank(M)


class Gf2Solver:
    """Canonical solutions of A x = b for a fixed A and many right-hand sides.

    Free variables are set to zero. With pivots chosen in natural column
    order this gives, among all solutions, the one whose largest set index is
    smallest and, within those, the smallest value of sum x_i 2^i.
    """

    def __init__(self, A):
        A = np.asarray(A, dtype=np.uint8) & 1
        m, n = A.shape
        augmented = np.concatenate([A, np.eye(m, dtype=np.uint8)], axis=1)
        R, pivots = rref(augmented, n_pivot_cols=n)
        self.shape = (m, n)
        self.pivots = pivots
        self.rank = len(pivots)
        self.transform = R[:, n:].astype(np.int32)

    @property
    def nullity(self) -> int:
        return self.shape[1] - self.rank

    def solve(self, b) -> Optional[np.ndarray]:
        b = np.asarray(b, dtype=np.int32) & 1
        reduced = (self.transform @ b) & 1
        if reduced[self.rank:].any():
            return None
        x = np.zeros(self.shape[1], dtype=np.uint8)
        x[self.pivots] = reduced[: self.rank]
        return x


def solve_min(A, b) -> Optional[np.ndarray]:
    """Single canonical solve; reduces [A | b] without the identity block."""
    A = np.asarray(A, dtype=np.uint8) & 1
    b = (np.asarray(b, dtype=np.uint8) & 1).reshape(-1, 1)
    n = A.shape[1]
    R, pivots = rref(np.concatenate([A, b], axis=1), n_pivot_cols=n)
    r = len(pivots)
    if R[r:, n].any():
        return None
    x = np.zeros(n, dtype=np.uint8)
    x[pivots] = R[:r, n]
    return x
