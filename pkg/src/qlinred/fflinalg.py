"""Arithmetic and linear algebra over the prime field F_p.

Vectors are stored as ``int64`` numpy arrays with entries in ``[0, p)``.
A vector of ``F_p^n`` is identified with its mixed-radix index
``sum_i v[i] * p**(n - 1 - i)``, so coordinate 0 is the most significant
digit.  This is the same order as ``np.ravel_multi_index`` over a tensor of
shape ``(p,) * n``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "FieldElement",
    "FpVector",
    "FpMatrix",
    "RrefResult",
    "is_prime",
    "field_arith",
    "matvec",
    "inner_product",
    "rref_with_pivots",
    "all_vectors",
    "vector_to_index",
    "index_to_vector",
    "indices_to_vectors",
    "vectors_to_indices",
]


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    if p < 4:
        return True
    if p % 2 == 0:
        return False
    d = 3
    while d * d <= p:
        if p % d == 0:
            return False
        d += 2
    return True


def _check_prime(p: int) -> int:
    p = int(p)
    if not is_prime(p):
        raise ValueError(f"modulus {p} is not prime")
    return p


@dataclass(frozen=True)
class FieldElement:
    """An element of F_p with ``0 <= value < p``."""

    value: int
    p: int

    def __post_init__(self):
        _check_prime(self.p)
        if not 0 <= self.value < self.p:
            raise ValueError(f"value {self.value} outside [0, {self.p})")

    @classmethod
    def of(cls, value: int, p: int) -> "FieldElement":
        return cls(int(value) % p, p)

    def __add__(self, other):
        return field_arith(self, other, "add")

    def __sub__(self, other):
        return field_arith(self, other, "sub")

    def __mul__(self, other):
        return field_arith(self, other, "mul")

    def __truediv__(self, other):
        return field_arith(self, other, "div")

    def __neg__(self):
        return FieldElement((-self.value) % self.p, self.p)

    def inverse(self) -> "FieldElement":
        if self.value == 0:
            raise ZeroDivisionError("zero has no inverse in F_p")
        return FieldElement(pow(self.value, -1, self.p), self.p)

    def __int__(self):
        return self.value


def field_arith(a: FieldElement, b: FieldElement, op: str) -> FieldElement:
    """Apply ``op`` in {"add", "sub", "mul", "div", "inv"} to elements of F_p.

    ``"inv"`` returns the inverse of ``a``; ``b`` only fixes the modulus.

    Raises
    ------
    ValueError
        If the moduli differ or ``op`` is unknown.
    ZeroDivisionError
        On division by zero.
    """
    if a.p != b.p:
        raise ValueError(f"modulus mismatch: {a.p} vs {b.p}")
    p = a.p
    if op == "add":
        return FieldElement((a.value + b.value) % p, p)
    if op == "sub":
        return FieldElement((a.value - b.value) % p, p)
    if op == "mul":
        return FieldElement((a.value * b.value) % p, p)
    if op == "div":
        if b.value == 0:
            raise ZeroDivisionError("division by zero in F_p")
        return FieldElement((a.value * pow(b.value, -1, p)) % p, p)
    if op == "inv":
        if a.value == 0:
            raise ZeroDivisionError("zero has no inverse in F_p")
        return FieldElement(pow(a.value, -1, p), p)
    raise ValueError(f"unknown operation {op!r}")


class FpVector:
    """A vector of F_p^n backed by an ``int64`` array."""

    __slots__ = ("entries", "p")

    def __init__(self, entries, p: int):
        self.p = _check_prime(p)
        arr = np.asarray(entries, dtype=np.int64).reshape(-1)
        self.entries = np.mod(arr, self.p)
        self.entries.setflags(write=False)

    @property
    def n(self) -> int:
        return int(self.entries.shape[0])

    @classmethod
    def zeros(cls, n: int, p: int) -> "FpVector":
        return cls(np.zeros(n, dtype=np.int64), p)

    @classmethod
    def basis(cls, n: int, k: int, p: int) -> "FpVector":
        e = np.zeros(n, dtype=np.int64)
        e[k] = 1
        return cls(e, p)

    @classmethod
    def from_index(cls, index: int, n: int, p: int) -> "FpVector":
        return cls(index_to_vector(index, n, p), p)

    def index(self) -> int:
        return vector_to_index(self.entries, self.p)

    def __array__(self, dtype=None, copy=None):
        return self.entries if dtype is None else self.entries.astype(dtype)

    def __len__(self):
        return self.n

    def __iter__(self):
        return iter(int(x) for x in self.entries)

    def __getitem__(self, k):
        return int(self.entries[k])

    def _coerce(self, other) -> np.ndarray:
        if isinstance(other, FpVector):
            if other.p != self.p:
                raise ValueError(f"modulus mismatch: {self.p} vs {other.p}")
            other = other.entries
        other = np.asarray(other, dtype=np.int64)
        if other.shape != self.entries.shape:
            raise ValueError(f"length mismatch: {self.n} vs {other.shape}")
        return other

    def __add__(self, other):
        return FpVector(self.entries + self._coerce(other), self.p)

    def __sub__(self, other):
        return FpVector(self.entries - self._coerce(other), self.p)

    def __neg__(self):
        return FpVector(-self.entries, self.p)

    def scale(self, c: int) -> "FpVector":
        return FpVector(self.entries * int(c), self.p)

    def __eq__(self, other):
        if not isinstance(other, FpVector):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.p, tuple(self.entries.tolist())))

    def __repr__(self):
        return f"FpVector({self.entries.tolist()}, p={self.p})"

    def tolist(self) -> list[int]:
        return self.entries.tolist()


class FpMatrix:
    """An ``m x n`` matrix over F_p, stored row-major."""

    __slots__ = ("rows", "p")

    def __init__(self, rows, p: int):
        self.p = _check_prime(p)
        arr = np.asarray(rows, dtype=np.int64)
        if arr.ndim != 2:
            raise ValueError("matrix must be two-dimensional")
        self.rows = np.mod(arr, self.p)
        self.rows.setflags(write=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows.shape

    def __array__(self, dtype=None, copy=None):
        return self.rows if dtype is None else self.rows.astype(dtype)

    def __eq__(self, other):
        if not isinstance(other, FpMatrix):
            return NotImplemented
        return self.p == other.p and np.array_equal(self.rows, other.rows)

    def __hash__(self):
        return hash((self.p, self.rows.shape, tuple(self.rows.ravel().tolist())))

    def __sub__(self, other: "FpMatrix") -> "FpMatrix":
        if other.p != self.p or other.shape != self.shape:
            raise ValueError("incompatible matrices")
        return FpMatrix(self.rows - other.rows, self.p)

    def __add__(self, other: "FpMatrix") -> "FpMatrix":
        if other.p != self.p or other.shape != self.shape:
            raise ValueError("incompatible matrices")
        return FpMatrix(self.rows + other.rows, self.p)

    def __repr__(self):
        return f"FpMatrix({self.rows.tolist()}, p={self.p})"

    def tolist(self) -> list[list[int]]:
        return self.rows.tolist()


def _as_array(x, p: int | None) -> tuple[np.ndarray, int]:
    if isinstance(x, (FpVector, FpMatrix)):
        if p is not None and p != x.p:
            raise ValueError(f"modulus mismatch: {x.p} vs {p}")
        return np.asarray(x), x.p
    if p is None:
        raise ValueError("modulus p is required for raw arrays")
    return np.mod(np.asarray(x, dtype=np.int64), p), _check_prime(p)


def matvec(M, v, p: int | None = None) -> FpVector:
    """Return ``M v`` over F_p."""
    A, p = _as_array(M, p)
    x, p2 = _as_array(v, p)
    if A.ndim != 2 or A.shape[1] != x.shape[0]:
        raise ValueError(f"dimension mismatch: {A.shape} vs {x.shape}")
    return FpVector(A @ x, p)


def inner_product(u, v, p: int | None = None) -> FieldElement:
    """Return ``sum_i u_i v_i`` in F_p."""
    a, p = _as_array(u, p)
    b, _ = _as_array(v, p)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return FieldElement(int(a @ b) % p, p)


@dataclass(frozen=True)
class RrefResult:
    """Reduced row echelon basis of a span.

    ``basis[j][pivots[j]] == 1`` and ``basis[j][pivots[i]] == 0`` for
    ``i != j``.  Pivots are 0-based and strictly increasing.
    """

    basis: tuple[FpVector, ...]
    pivots: tuple[int, ...]
    rank: int

    def matrix(self, n: int | None = None) -> np.ndarray:
        if self.rank == 0:
            return np.zeros((0, n or 0), dtype=np.int64)
        return np.stack([np.asarray(b) for b in self.basis])


def _rref_array(A: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    A = np.mod(np.array(A, dtype=np.int64), p)
    m, n = A.shape
    pivots: list[int] = []
    row = 0
    for col in range(n):
        if row == m:
            break
        nz = np.nonzero(A[row:, col])[0]
        if nz.size == 0:
            continue
        pr = row + int(nz[0])
        if pr != row:
            A[[row, pr]] = A[[pr, row]]
        A[row] = (A[row] * pow(int(A[row, col]), -1, p)) % p
        others = np.nonzero(A[:, col])[0]
        for r in others:
            if r != row:
                A[r] = (A[r] - A[r, col] * A[row]) % p
        pivots.append(col)
        row += 1
    return A[:row], pivots


def rref_with_pivots(rows, p: int | None = None, n: int | None = None) -> RrefResult:
    """Row-reduce a list of vectors.

    Columns are scanned left to right; the pivot row for a column is the
    first remaining row with a nonzero entry there.

    Parameters
    ----------
    rows : sequence of FpVector or array of shape (m, n)
    p : int, optional
        Required when ``rows`` is a raw array.
    n : int, optional
        Ambient dimension, only needed when ``rows`` is empty.
    """
    rows = list(rows) if not isinstance(rows, np.ndarray) else rows
    if isinstance(rows, list):
        if len(rows) == 0:
            if p is None:
                raise ValueError("modulus p is required for an empty list")
            return RrefResult((), (), 0)
        if all(isinstance(r, FpVector) for r in rows):
            ps = {r.p for r in rows}
            if len(ps) != 1 or (p is not None and ps != {p}):
                raise ValueError("modulus mismatch among rows")
            p = ps.pop()
            lengths = {r.n for r in rows}
            if len(lengths) != 1:
                raise ValueError("rows have different lengths")
            A = np.stack([r.entries for r in rows])
        else:
            A = np.asarray(rows, dtype=np.int64)
    else:
        A = rows
    if p is None:
        raise ValueError("modulus p is required for raw arrays")
    p = _check_prime(p)
    A = np.asarray(A, dtype=np.int64)
    if A.ndim != 2:
        raise ValueError("rows must form a 2-D array")
    if A.shape[0] == 0:
        return RrefResult((), (), 0)
    R, piv = _rref_array(A, p)
    return RrefResult(tuple(FpVector(r, p) for r in R), tuple(piv), len(piv))


def all_vectors(n: int, p: int) -> np.ndarray:
    """All of F_p^n as an array of shape (p**n, n), in index order."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int64)
    return np.indices((p,) * n, dtype=np.int64).reshape(n, -1).T.copy()


def _radix(n: int, p: int) -> np.ndarray:
    return p ** np.arange(n - 1, -1, -1, dtype=np.int64)


def vector_to_index(v, p: int) -> int:
    v = np.asarray(v, dtype=np.int64)
    return int(np.mod(v, p) @ _radix(v.shape[-1], p))


def vectors_to_indices(V, p: int) -> np.ndarray:
    V = np.asarray(V, dtype=np.int64)
    return np.mod(V, p) @ _radix(V.shape[-1], p)


def index_to_vector(index: int, n: int, p: int) -> np.ndarray:
    if not 0 <= index < p ** n:
        raise ValueError(f"index {index} out of range for F_{p}^{n}")
    return (int(index) // _radix(n, p)) % p


def indices_to_vectors(idx, n: int, p: int) -> np.ndarray:
    idx = np.asarray(idx, dtype=np.int64)
    return (idx[..., None] // _radix(n, p)) % p
