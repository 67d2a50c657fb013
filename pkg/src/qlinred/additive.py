"""Subspaces from large Fourier coefficients, and local correction.

Given a set ``X`` of density ``alpha`` in F_p^n and a set ``R`` of its heavy
characters, the annihilator ``V = R^perp`` is a subspace of dimension at
least ``n - 4 / alpha**2`` on which every point is a sum of four elements
of ``X`` with probability at least ``alpha**5``.  A reduced basis of ``R``
then moves any ``y`` into ``V`` by changing at most ``|R|`` coordinates.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .fflinalg import (
    FpVector,
    all_vectors,
    rref_with_pivots,
    vectors_to_indices,
)
from .fourier import (
    CharacterSet,
    convolution_profile,
    fourier_transform,
    indicator,
    spec_threshold,
)

__all__ = [
    "CorrectionBasis",
    "Subspace",
    "BogolyubovReport",
    "Decomposition",
    "DecompositionError",
    "correction_basis",
    "bogolyubov_subspace",
    "verify_robust_bogolyubov",
    "shift_vector",
    "decompose",
    "uniform_sampler",
    "membership",
]


@dataclass(frozen=True)
class CorrectionBasis:
    """Reduced row echelon basis ``B`` of a character set with its pivots.

    ``B[j, pivots[j]] == 1`` and ``B[j, pivots[i]] == 0`` for ``i != j``.
    """

    B: np.ndarray
    pivots: tuple[int, ...]
    n: int
    p: int

    @property
    def t(self) -> int:
        return len(self.pivots)

    def size_bound_ok(self, alpha: float) -> bool:
        """Whether ``t <= ceil(4 / alpha**2)``."""
        return self.t <= math.ceil(4.0 / alpha ** 2)


@dataclass(frozen=True)
class Subspace:
    """The annihilator ``{v : <v, b> = 0 for all rows b of B}``."""

    cb: CorrectionBasis

    @property
    def n(self) -> int:
        return self.cb.n

    @property
    def p(self) -> int:
        return self.cb.p

    @property
    def dim(self) -> int:
        return self.cb.n - self.cb.t

    def contains(self, v) -> bool:
        if self.cb.t == 0:
            return True
        return not np.any((self.cb.B @ np.asarray(v, dtype=np.int64)) % self.p)

    def mask(self) -> np.ndarray:
        """Boolean membership array over all of F_p^n."""
        D = all_vectors(self.n, self.p)
        if self.cb.t == 0:
            return np.ones(D.shape[0], dtype=bool)
        return ~np.any((D @ self.cb.B.T) % self.p, axis=1)

    def elements(self) -> np.ndarray:
        return all_vectors(self.n, self.p)[self.mask()]


def correction_basis(R, n: int | None = None, p: int | None = None) -> CorrectionBasis:
    """Reduced basis and pivots of the span of ``R``."""
    if isinstance(R, CharacterSet):
        n, p, rows = R.n, R.p, R.vectors()
    else:
        rows = np.asarray([np.asarray(r) for r in R], dtype=np.int64)
        if p is None or n is None:
            raise ValueError("n and p are required for raw vectors")
        rows = rows.reshape(-1, n)
    res = rref_with_pivots(rows, p=p)
    B = res.matrix(n) if res.rank else np.zeros((0, n), dtype=np.int64)
    return CorrectionBasis(B, res.pivots, n, p)


def bogolyubov_subspace(R, n: int | None = None, p: int | None = None) -> tuple[Subspace, CorrectionBasis]:
    """The subspace annihilated by ``R`` together with its correction basis."""
    cb = correction_basis(R, n, p)
    return Subspace(cb), cb


@dataclass
class BogolyubovReport:
    """Outcome of checking the robust Bogolyubov conclusion on one instance."""

    n: int
    p: int
    alpha: float
    size_R: int
    size_bound: float
    dim: int
    dim_bound: float
    min_probability: float
    min_conditional: float
    sandwich_ok: bool
    violations: list[str] = field(default_factory=list)

    @property
    def vacuous(self) -> bool:
        return self.dim_bound <= 0

    @property
    def ok(self) -> bool:
        return not self.violations


def verify_robust_bogolyubov(X, R: CharacterSet, alpha: float | None = None) -> BogolyubovReport:
    """Check the robust Bogolyubov conclusion exactly.

    Parameters
    ----------
    X : indicator array or collection of vectors/indices
    R : CharacterSet
        Must satisfy ``Spec_X(alpha**1.5) <= R <= Spec_X(alpha**1.5 / 2)``;
        a failure is recorded in ``violations`` rather than raised.
    alpha : float, optional
        Density of ``X``.  Defaults to ``|X| / p**n``.
    """
    n, p = R.n, R.p
    ind = indicator(X, n, p)
    dens = ind.mean()
    if alpha is None:
        alpha = float(dens)
    if alpha <= 0:
        raise ValueError("X must be non-empty")
    violations = []
    if dens + 1e-12 < alpha:
        violations.append(f"density {dens:.6g} below alpha {alpha:.6g}")
    spec = fourier_transform(ind.astype(float), n, p)
    lo = spec_threshold(spec, alpha ** 1.5)
    hi = spec_threshold(spec, alpha ** 1.5 / 2)
    sandwich = lo.issubset(R) and R.issubset(hi)
    if not sandwich:
        violations.append("R is not between Spec(alpha^1.5) and Spec(alpha^1.5/2)")
    V, cb = bogolyubov_subspace(R)
    size_bound = 4.0 / alpha ** 2
    if len(R) > size_bound + 1e-9:
        violations.append(f"|R| = {len(R)} exceeds 4/alpha^2 = {size_bound:.4g}")
    dim_bound = n - size_bound
    if V.dim < dim_bound - 1e-9:
        violations.append(f"dim V = {V.dim} below n - 4/alpha^2 = {dim_bound:.4g}")
    prof = convolution_profile(ind, n, p)
    pmin = float(prof[V.mask()].min())
    if pmin < alpha ** 5 - 1e-12:
        violations.append(f"min probability {pmin:.6g} below alpha^5 = {alpha ** 5:.6g}")
    return BogolyubovReport(
        n=n, p=p, alpha=alpha, size_R=len(R), size_bound=size_bound,
        dim=V.dim, dim_bound=dim_bound, min_probability=pmin,
        min_conditional=pmin / alpha ** 3, sandwich_ok=sandwich,
        violations=violations,
    )


def shift_vector(y, cb: CorrectionBasis) -> np.ndarray:
    """``s = sum_j <y, b_j> e_{k_j}``, so that ``y - s`` lies in ``R^perp``.

    ``s`` is supported on the pivot coordinates, hence has at most ``t``
    nonzero entries.
    """
    y = np.asarray(y, dtype=np.int64)
    s = np.zeros(cb.n, dtype=np.int64)
    if cb.t:
        s[list(cb.pivots)] = (cb.B @ y) % cb.p
    return s


class DecompositionError(RuntimeError):
    """Raised when the retry budget runs out before a valid split is found."""


@dataclass(frozen=True)
class Decomposition:
    """``y = x1 + x2 + x3 + x4 + s`` with all four ``x`` in the target set."""

    x: tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]
    s: np.ndarray
    attempts: int


def decompose(
    y,
    cb: CorrectionBasis,
    sampler: Callable[[], np.ndarray],
    is_member: Callable[[np.ndarray], bool],
    budget: int | None = None,
    alpha: float | None = None,
) -> Decomposition:
    """Split ``y`` into four members of ``X`` plus a sparse correction.

    Draws ``x1, x2, x3`` from ``sampler`` and sets
    ``x4 = y - s - x1 - x2 - x3`` until ``is_member(x4)``.

    Parameters
    ----------
    budget : int, optional
        Maximum number of attempts, ``ceil(8 / alpha**2)`` by default.

    Raises
    ------
    DecompositionError
        If no attempt succeeds within the budget.
    """
    if budget is None:
        if alpha is None:
            raise ValueError("either budget or alpha must be given")
        budget = math.ceil(8.0 / alpha ** 2)
    p = cb.p
    y = np.asarray(y, dtype=np.int64) % p
    s = shift_vector(y, cb)
    base = (y - s) % p
    for attempt in range(1, budget + 1):
        x1, x2, x3 = (np.asarray(sampler(), dtype=np.int64) for _ in range(3))
        x4 = (base - x1 - x2 - x3) % p
        if is_member(x4):
            return Decomposition((x1, x2, x3, x4), s, attempt)
    raise DecompositionError(f"no decomposition found in {budget} attempts")


def uniform_sampler(X, n: int, p: int, rng: np.random.Generator) -> Callable[[], np.ndarray]:
    """Sampler drawing uniformly from the members of ``X``."""
    ind = indicator(X, n, p)
    members = all_vectors(n, p)[ind]
    if members.shape[0] == 0:
        raise ValueError("cannot sample from an empty set")

    def draw() -> np.ndarray:
        return members[rng.integers(members.shape[0])]

    return draw


def membership(X, n: int, p: int) -> Callable[[np.ndarray], bool]:
    """Membership predicate for a subset of F_p^n."""
    ind = indicator(X, n, p)

    def test(v) -> bool:
        return bool(ind[int(vectors_to_indices(np.asarray(v), p))])

    return test
