"""Exact linear algebra over GF(2) on bit-packed rows"""

from typing import Iterable, List, Optional, Sequence, Tuple
import logging

import numpy as np

from plrmc.exceptions import F2DimensionError, NotInvertibleError

logger = logging.getLogger(__name__)

WORD = 64
COLUMN_CAP = 100_000

_ONE = np.uint64(1)
_LOW_BITS = np.uint64(0x5555555555555555)


def _nwords(ncols: int) -> int:
    return max(1, (ncols + WORD - 1) // WORD)


def _check_cap(ncols: int):
    if ncols > COLUMN_CAP:
        raise F2DimensionError(f"{ncols} columns exceed the cap of {COLUMN_CAP}")


def pack_dense(dense: np.ndarray, ncols: Optional[int] = None) -> np.ndarray:
    """Pack a 0/1 array (vector or matrix) into little-endian uint64 words"""
    dense = np.asarray(dense, dtype=np.uint8) & 1
    squeeze = dense.ndim == 1
    if squeeze:
        dense = dense[None, :]
    ncols = dense.shape[1] if ncols is None else ncols
    width = _nwords(ncols) * WORD
    padded = np.zeros((dense.shape[0], width), dtype=np.uint8)
    padded[:, : dense.shape[1]] = dense
    words = np.packbits(padded, axis=-1, bitorder="little").view(np.uint64)
    return words[0].copy() if squeeze else words


def unpack_words(words: np.ndarray, ncols: int) -> np.ndarray:
    squeeze = words.ndim == 1
    if squeeze:
        words = words[None, :]
    bits = np.unpackbits(
        np.ascontiguousarray(words).view(np.uint8), axis=-1, bitorder="little"
    )[:, :ncols]
    return bits[0] if squeeze else bits


def vector_from_indices(indices: Iterable[int], ncols: int) -> np.ndarray:
    v = np.zeros(_nwords(ncols), dtype=np.uint64)
    for i in indices:
        v[i // WORD] ^= _ONE << np.uint64(i % WORD)
    return v


def vector_indices(v: np.ndarray, ncols: int) -> List[int]:
    return [int(i) for i in np.flatnonzero(unpack_words(v, ncols))]


def bit(v: np.ndarray, col: int) -> int:
    return int((v[col // WORD] >> np.uint64(col % WORD)) & _ONE)


def _column(words: np.ndarray, col: int) -> np.ndarray:
    return ((words[:, col // WORD] >> np.uint64(col % WORD)) & _ONE).astype(bool)


def swap_xz(words: np.ndarray) -> np.ndarray:
    """Exchange each adjacent (x, z) bit pair of interleaved symplectic rows"""
    return ((words >> _ONE) & _LOW_BITS) | ((words & _LOW_BITS) << _ONE)


class F2Matrix:
    """Row-major bit matrix over GF(2), rows packed into uint64 words"""

    def __init__(self, words: np.ndarray, ncols: int):
        _check_cap(ncols)
        words = np.asarray(words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[1] != _nwords(ncols):
            raise F2DimensionError(
                f"word array of shape {words.shape} does not hold {ncols} columns"
            )
        self.words = words
        self.ncols = ncols

    @classmethod
    def zeros(cls, nrows: int, ncols: int) -> "F2Matrix":
        return cls(np.zeros((nrows, _nwords(ncols)), dtype=np.uint64), ncols)

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_dense(cls, dense, ncols: Optional[int] = None) -> "F2Matrix":
        dense = np.asarray(dense, dtype=np.uint8)
        if dense.ndim != 2:
            if dense.size == 0 and ncols is not None:
                return cls.zeros(0, ncols)
            raise F2DimensionError("dense matrix must be two-dimensional")
        ncols = dense.shape[1] if ncols is None else ncols
        if dense.shape[0] == 0:
            return cls.zeros(0, ncols)
        return cls(pack_dense(dense, ncols), ncols)

    @classmethod
    def from_vectors(cls, vectors: Sequence[np.ndarray], ncols: int) -> "F2Matrix":
        if not vectors:
            return cls.zeros(0, ncols)
        return cls(np.vstack([np.asarray(v, dtype=np.uint64) for v in vectors]), ncols)

    @property
    def nrows(self) -> int:
        return self.words.shape[0]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.nrows, self.ncols

    def dense(self) -> np.ndarray:
        if self.nrows == 0:
            return np.zeros((0, self.ncols), dtype=np.uint8)
        return unpack_words(self.words, self.ncols)

    def row(self, i: int) -> np.ndarray:
        return self.words[i]

    def copy(self) -> "F2Matrix":
        return F2Matrix(self.words.copy(), self.ncols)

    def take(self, rows: Sequence[int]) -> "F2Matrix":
        return F2Matrix(self.words[list(rows)].reshape(-1, self.words.shape[1]), self.ncols)

    def vstack(self, other: "F2Matrix") -> "F2Matrix":
        if other.ncols != self.ncols:
            raise F2DimensionError(f"cannot stack {self.ncols} and {other.ncols} columns")
        return F2Matrix(np.vstack([self.words, other.words]), self.ncols)

    def hstack(self, other: "F2Matrix") -> "F2Matrix":
        if other.nrows != self.nrows:
            raise F2DimensionError(f"cannot join {self.nrows} and {other.nrows} rows")
        return F2Matrix.from_dense(np.hstack([self.dense(), other.dense()]))

    def columns(self, cols: Sequence[int]) -> "F2Matrix":
        return F2Matrix.from_dense(self.dense()[:, list(cols)], len(cols))

    def transpose(self) -> "F2Matrix":
        return F2Matrix.from_dense(self.dense().T.copy(), self.nrows)

    def is_zero(self) -> bool:
        return not self.words.any()

    def row_is_zero(self) -> np.ndarray:
        return ~self.words.any(axis=1)

    def __matmul__(self, other: "F2Matrix") -> "F2Matrix":
        return matmul(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, F2Matrix):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.words, other.words))

    def __hash__(self):
        return hash((self.ncols, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"F2Matrix({self.nrows}x{self.ncols})"


def _reduce(
    words: np.ndarray, ncols: int, limit: Optional[int] = None, keep_all: bool = False
) -> Tuple[np.ndarray, List[int]]:
    """Gauss-Jordan elimination; pivots are searched among the first `limit` columns

    With keep_all the rows below the pivot rows are returned too; they vanish on the
    first `limit` columns.
    """
    w = np.array(words, dtype=np.uint64, copy=True)
    nrows = w.shape[0]
    pivots: List[int] = []
    r = 0
    for col in range(ncols if limit is None else limit):
        if r == nrows:
            break
        below = np.flatnonzero(_column(w[r:], col))
        if below.size == 0:
            continue
        p = r + int(below[0])
        if p != r:
            w[[r, p]] = w[[p, r]]
        mask = _column(w, col)
        mask[r] = False
        if mask.any():
            w[mask] ^= w[r]
        pivots.append(col)
        r += 1
    return (w if keep_all else w[:r]), pivots


def rref(m: F2Matrix) -> Tuple[F2Matrix, int]:
    """Reduced row-echelon form and rank; zero rows are dropped"""
    words, pivots = _reduce(m.words, m.ncols)
    return F2Matrix(words.reshape(-1, m.words.shape[1]), m.ncols), len(pivots)


def rref_pivots(m: F2Matrix) -> Tuple[F2Matrix, List[int]]:
    words, pivots = _reduce(m.words, m.ncols)
    return F2Matrix(words.reshape(-1, m.words.shape[1]), m.ncols), pivots


def rank(m: F2Matrix) -> int:
    return rref(m)[1]


def matmul(a: F2Matrix, b: F2Matrix) -> F2Matrix:
    if a.ncols != b.nrows:
        raise F2DimensionError(f"cannot multiply {a.shape} by {b.shape}")
    if a.nrows == 0 or b.ncols == 0:
        return F2Matrix.zeros(a.nrows, b.ncols)
    product = a.dense().astype(np.int64) @ b.dense().astype(np.int64)
    return F2Matrix.from_dense((product & 1).astype(np.uint8), b.ncols)


def reduce_vector(basis_words: np.ndarray, pivots: Sequence[int], v: np.ndarray) -> np.ndarray:
    """Residue of v against fully reduced rows with the given pivot columns"""
    if not pivots:
        return v.copy()
    sel = np.array([bit(v, p) for p in pivots], dtype=bool)
    if not sel.any():
        return v.copy()
    return v ^ np.bitwise_xor.reduce(basis_words[sel], axis=0)


class Subspace:
    """Row space of a matrix, held as its canonical RREF basis"""

    def __init__(self, ambient_dim: int, basis: Optional[F2Matrix] = None):
        _check_cap(ambient_dim)
        if basis is None:
            basis = F2Matrix.zeros(0, ambient_dim)
        if basis.ncols != ambient_dim:
            raise F2DimensionError(
                f"basis has {basis.ncols} columns, ambient dimension is {ambient_dim}"
            )
        self.ambient_dim = ambient_dim
        self.basis, self.pivots = rref_pivots(basis)

    @classmethod
    def span(cls, rows: F2Matrix) -> "Subspace":
        return cls(rows.ncols, rows)

    @property
    def dim(self) -> int:
        return self.basis.nrows

    def residue(self, v: np.ndarray) -> np.ndarray:
        return reduce_vector(self.basis.words, self.pivots, v)

    def contains(self, v: np.ndarray) -> bool:
        return not self.residue(v).any()

    def contains_all(self, rows: F2Matrix) -> bool:
        return all(self.contains(rows.row(i)) for i in range(rows.nrows))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Subspace):
            return NotImplemented
        return self.ambient_dim == other.ambient_dim and self.basis == other.basis

    def __hash__(self):
        return hash(self.basis)

    def __repr__(self) -> str:
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim})"


class Echelon:
    """Incrementally grown, always fully reduced row basis"""

    def __init__(self, ncols: int, capacity: int = 16):
        _check_cap(ncols)
        self.ncols = ncols
        self._rows = np.zeros((max(capacity, 1), _nwords(ncols)), dtype=np.uint64)
        self.pivots: List[int] = []

    @property
    def rank(self) -> int:
        return len(self.pivots)

    @property
    def rows(self) -> np.ndarray:
        return self._rows[: self.rank]

    def residue(self, v: np.ndarray) -> np.ndarray:
        return reduce_vector(self.rows, self.pivots, v)

    def add(self, v: np.ndarray) -> bool:
        """Insert v; returns False when v is already in the span"""
        res = self.residue(v)
        nz = np.flatnonzero(res)
        if nz.size == 0:
            return False
        word = int(nz[0])
        pivot = word * WORD + int(np.flatnonzero(unpack_words(res[word : word + 1], WORD))[0])
        k = self.rank
        if k:
            hit = _column(self._rows[:k], pivot)
            if hit.any():
                self._rows[:k][hit] ^= res
        if k == self._rows.shape[0]:
            self._rows = np.vstack([self._rows, np.zeros_like(self._rows)])
        self._rows[k] = res
        self.pivots.append(pivot)
        return True

    def to_subspace(self) -> Subspace:
        return Subspace(self.ncols, F2Matrix(self.rows.copy(), self.ncols))


def independent_rows(candidates: F2Matrix, seed: Optional[F2Matrix] = None) -> List[int]:
    """Indices of candidate rows that greedily extend span(seed)"""
    ech = Echelon(candidates.ncols, capacity=candidates.nrows + (seed.nrows if seed else 0))
    if seed is not None:
        for i in range(seed.nrows):
            ech.add(seed.row(i))
    return [i for i in range(candidates.nrows) if ech.add(candidates.row(i))]


def subspace_sum(u: Subspace, v: Subspace) -> Subspace:
    if u.ambient_dim != v.ambient_dim:
        raise F2DimensionError("ambient dimensions differ")
    return Subspace(u.ambient_dim, u.basis.vstack(v.basis))


def subspace_intersection(u: Subspace, v: Subspace) -> Subspace:
    """u ∩ v by Zassenhaus elimination of [[u, u], [v, 0]]"""
    if u.ambient_dim != v.ambient_dim:
        raise F2DimensionError(
            f"ambient dimensions differ: {u.ambient_dim} vs {v.ambient_dim}"
        )
    n = u.ambient_dim
    if u.dim == 0 or v.dim == 0:
        return Subspace(n)
    ud, vd = u.basis.dense(), v.basis.dense()
    block = np.vstack([np.hstack([ud, ud]), np.hstack([vd, np.zeros_like(vd)])])
    reduced, pivots = rref_pivots(F2Matrix.from_dense(block))
    rows = [i for i, p in enumerate(pivots) if p >= n]
    right = reduced.dense()[rows, n:] if rows else np.zeros((0, n), dtype=np.uint8)
    return Subspace(n, F2Matrix.from_dense(right, n))


def kernel(m: F2Matrix) -> F2Matrix:
    """Basis of {x : m x = 0} as rows"""
    reduced, pivots = rref_pivots(m)
    n = m.ncols
    pivot_set = set(pivots)
    free = [c for c in range(n) if c not in pivot_set]
    out = np.zeros((len(free), n), dtype=np.uint8)
    if free:
        out[np.arange(len(free)), free] = 1
        if pivots:
            out[:, pivots] = reduced.dense()[:, free].T
    return F2Matrix.from_dense(out, n)


def left_kernel(m: F2Matrix) -> F2Matrix:
    """Basis of {y : y m = 0} as rows"""
    return kernel(m.transpose())


def solve_in_span(basis: F2Matrix, target: np.ndarray) -> Optional[np.ndarray]:
    """Coefficients c with c·basis == target, or None when target is outside the row space"""
    k, n = basis.shape
    if target.shape[0] != _nwords(n):
        raise F2DimensionError("target length does not match basis columns")
    if k == 0:
        return None if target.any() else np.zeros(0, dtype=np.uint8)
    solver = SpanSolver(basis)
    return solver.solve(target)


class SpanSolver:
    """Row reduction of [basis | I] kept for repeated solves against the same basis"""

    def __init__(self, basis: F2Matrix):
        self.k, self.n = basis.shape
        aug = np.hstack([basis.dense(), np.eye(self.k, dtype=np.uint8)])
        words, self.pivots = _reduce(pack_dense(aug, self.n + self.k), self.n + self.k, self.n)
        self.rows = words
        self.total = self.n + self.k

    def solve(self, target: np.ndarray) -> Optional[np.ndarray]:
        dense = np.zeros(self.total, dtype=np.uint8)
        dense[: self.n] = unpack_words(target, self.n)
        res = reduce_vector(self.rows, self.pivots, pack_dense(dense, self.total))
        bits = unpack_words(res, self.total)
        if bits[: self.n].any():
            return None
        return bits[self.n :].copy()


def quotient_basis(
    big: Subspace, small: Subspace, candidates: Optional[F2Matrix] = None
) -> F2Matrix:
    """Coset representatives forming a basis of big/small

    Representatives are taken from `candidates` (default: the basis of big) in order.
    """
    if big.ambient_dim != small.ambient_dim:
        raise F2DimensionError("ambient dimensions differ")
    if not big.contains_all(small.basis):
        raise F2DimensionError("small subspace is not contained in big subspace")
    pool = big.basis if candidates is None else candidates
    picked = independent_rows(pool, seed=small.basis)
    expected = big.dim - small.dim
    if len(picked) != expected:
        raise F2DimensionError(
            f"candidates give {len(picked)} representatives, expected {expected}"
        )
    return pool.take(picked)


def inverse(m: F2Matrix) -> F2Matrix:
    n = m.nrows
    if m.ncols != n:
        raise F2DimensionError(f"cannot invert a {m.shape} matrix")
    if n == 0:
        return F2Matrix.zeros(0, 0)
    aug = np.hstack([m.dense(), np.eye(n, dtype=np.uint8)])
    words, pivots = _reduce(pack_dense(aug, 2 * n), 2 * n, n)
    if len(pivots) != n:
        raise NotInvertibleError(f"matrix has rank {len(pivots)} < {n}")
    return F2Matrix.from_dense(unpack_words(words, 2 * n)[:, n:], n)


def is_invertible(m: F2Matrix) -> bool:
    return m.nrows == m.ncols and rank(m) == m.nrows


def symplectic_products(a: F2Matrix, b: F2Matrix) -> np.ndarray:
    """Commutation matrix of interleaved symplectic rows: out[i, j] = <a_i, b_j>"""
    if a.ncols != b.ncols:
        raise F2DimensionError("symplectic rows must share the column count")
    if a.nrows == 0 or b.nrows == 0:
        return np.zeros((a.nrows, b.nrows), dtype=np.uint8)
    left = a.dense().astype(np.int64)
    right = unpack_words(swap_xz(b.words), b.ncols).astype(np.int64)
    return ((left @ right.T) & 1).astype(np.uint8)


def eliminate_leading(m: F2Matrix, limit: int) -> Tuple[F2Matrix, F2Matrix]:
    """Split the row space by the first `limit` columns

    Returns (pivot rows, tail rows): the tail rows vanish on the leading columns and
    span every combination of rows of m that does.
    """
    words, pivots = _reduce(m.words, m.ncols, limit, keep_all=True)
    r = len(pivots)
    nw = m.words.shape[1]
    return (
        F2Matrix(words[:r].reshape(-1, nw), m.ncols),
        F2Matrix(words[r:].reshape(-1, nw), m.ncols),
    )
