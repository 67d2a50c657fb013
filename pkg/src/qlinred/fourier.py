"""Fourier analysis of functions on F_p^n.

Functions are given as arrays of length ``p**n`` in mixed-radix index order
(see :mod:`qlinred.fflinalg`).  The transform is normalised as

    f_hat(y) = p**-n * sum_x omega**(x . y) f(x),    omega = exp(2 pi i / p),

with inverse ``f(x) = sum_y f_hat(y) omega**(-x . y)``.  With this
normalisation the uniform-measure convolution satisfies
``(f * g)_hat = f_hat g_hat``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from .fflinalg import (
    FpVector,
    all_vectors,
    index_to_vector,
    vector_to_index,
    vectors_to_indices,
)

__all__ = [
    "Spectrum",
    "CharacterSet",
    "indicator",
    "fourier_transform",
    "inverse_fourier_transform",
    "spec_threshold",
    "convolution_probability",
    "convolution_profile",
    "fourier_convolution_profile",
    "ENUMERATION_BUDGET",
]

# Largest p**(3n) we are willing to enumerate for convolution counts.
ENUMERATION_BUDGET = 2 ** 24


@dataclass(frozen=True)
class Spectrum:
    """Fourier coefficients of a function on F_p^n, indexed like the domain."""

    coeffs: np.ndarray
    n: int
    p: int

    def __post_init__(self):
        if self.coeffs.shape != (self.p ** self.n,):
            raise ValueError("coefficient array has the wrong length")

    def at(self, y) -> complex:
        if isinstance(y, (int, np.integer)):
            return complex(self.coeffs[int(y)])
        return complex(self.coeffs[vector_to_index(np.asarray(y), self.p)])

    def magnitudes(self) -> np.ndarray:
        return np.abs(self.coeffs)


@dataclass(frozen=True)
class CharacterSet:
    """A set of nonzero characters of F_p^n, stored as sorted indices."""

    indices: tuple[int, ...]
    n: int
    p: int
    gamma: float | None = None
    meta: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        if 0 in self.indices:
            raise ValueError("the zero character is never a member")
        if list(self.indices) != sorted(set(self.indices)):
            object.__setattr__(self, "indices", tuple(sorted(set(self.indices))))

    @classmethod
    def from_vectors(cls, vectors: Iterable, n: int, p: int, gamma=None) -> "CharacterSet":
        idx = sorted({vector_to_index(np.asarray(v), p) for v in vectors})
        return cls(tuple(idx), n, p, gamma)

    def __len__(self):
        return len(self.indices)

    def __contains__(self, y) -> bool:
        if isinstance(y, (int, np.integer)):
            return int(y) in self.indices
        return vector_to_index(np.asarray(y), self.p) in self.indices

    def __iter__(self) -> Iterator[FpVector]:
        for i in self.indices:
            yield FpVector.from_index(i, self.n, self.p)

    def vectors(self) -> np.ndarray:
        """Members as an integer array of shape (len(self), n)."""
        if not self.indices:
            return np.zeros((0, self.n), dtype=np.int64)
        return np.stack([index_to_vector(i, self.n, self.p) for i in self.indices])

    def issubset(self, other: "CharacterSet") -> bool:
        return set(self.indices) <= set(other.indices)


def indicator(members, n: int, p: int) -> np.ndarray:
    """Boolean indicator array of a subset of F_p^n.

    ``members`` may be a boolean array of length ``p**n``, an iterable of
    indices, or an iterable of vectors.
    """
    N = p ** n
    arr = np.asarray(members) if not isinstance(members, (set, frozenset)) else None
    if arr is not None and arr.dtype == bool:
        if arr.shape != (N,):
            raise ValueError("indicator array has the wrong length")
        return arr.copy()
    out = np.zeros(N, dtype=bool)
    items = list(members)
    if not items:
        return out
    first = items[0]
    if isinstance(first, (int, np.integer)):
        out[np.asarray(items, dtype=np.int64)] = True
    else:
        out[vectors_to_indices(np.asarray([np.asarray(v) for v in items]), p)] = True
    return out


def _as_table(f, n: int, p: int) -> np.ndarray:
    f = np.asarray(f)
    if f.shape != (p ** n,):
        raise ValueError(f"expected {p ** n} values, got shape {f.shape}")
    return f


def fourier_transform(f, n: int, p: int) -> Spectrum:
    """Fourier transform of ``f : F_p^n -> C``.

    Computed as ``n`` successive length-``p`` transforms, one per axis of the
    ``(p,) * n`` tensor.  ``numpy.fft.ifftn`` has exactly the sign and
    normalisation used here.
    """
    f = _as_table(f, n, p).astype(complex)
    if n == 0:
        return Spectrum(f.copy(), 0, p)
    F = np.fft.ifftn(f.reshape((p,) * n))
    return Spectrum(F.reshape(-1), n, p)


def inverse_fourier_transform(spec: Spectrum) -> np.ndarray:
    """Recover ``f`` from its spectrum."""
    n, p = spec.n, spec.p
    if n == 0:
        return spec.coeffs.copy()
    return np.fft.fftn(spec.coeffs.reshape((p,) * n)).reshape(-1)


def spec_threshold(spec: Spectrum, gamma: float, tol: float = 1e-12) -> CharacterSet:
    """Nonzero characters ``y`` with ``|f_hat(y)| >= gamma``.

    A slack of ``tol`` absorbs rounding so that exact ties count as members.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    mags = spec.magnitudes()
    hits = np.nonzero(mags >= gamma - tol)[0]
    return CharacterSet(tuple(int(i) for i in hits if i != 0), spec.n, spec.p, gamma)


def _shift_tables(members: np.ndarray, n: int, p: int) -> np.ndarray:
    # row k holds the index of z - x_k for every z
    D = all_vectors(n, p)
    X = all_vectors(n, p)[members]
    return vectors_to_indices(D[None, :, :] - X[:, None, :], p)


def convolution_profile(X, n: int, p: int) -> np.ndarray:
    """Exact ``Pr_{x1,x2,x3}[x1, x2, x3, v - x1 - x2 - x3 in X]`` for every v.

    The quadruple count is built one summand at a time by exhaustive
    enumeration over members of ``X``; no transform is involved, so this is
    an independent check on the Fourier identity.

    Raises
    ------
    ValueError
        If ``p**(3n)`` exceeds :data:`ENUMERATION_BUDGET`.
    """
    N = p ** n
    if N ** 3 > ENUMERATION_BUDGET:
        raise ValueError(f"enumeration over F_{p}^{n} exceeds the budget")
    ind = indicator(X, n, p)
    shifts = _shift_tables(ind, n, p)
    counts = ind.astype(np.int64)
    for _ in range(3):
        counts = counts[shifts].sum(axis=0)
    return counts / float(N) ** 3


def convolution_probability(X, v, n: int, p: int) -> float:
    """``Pr_{x1,x2,x3 in F_p^n}[x1, x2, x3, v - x1 - x2 - x3 in X]``."""
    idx = v if isinstance(v, (int, np.integer)) else vector_to_index(np.asarray(v), p)
    return float(convolution_profile(X, n, p)[int(idx)])


def fourier_convolution_profile(spec: Spectrum) -> np.ndarray:
    """``sum_r f_hat(r)**4 omega**(-<v, r>)`` for every v.

    For an indicator this equals :func:`convolution_profile`.
    """
    return inverse_fourier_transform(Spectrum(spec.coeffs ** 4, spec.n, spec.p))
