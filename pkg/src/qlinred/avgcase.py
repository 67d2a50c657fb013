"""Planted average-case algorithms, threshold sets and test instances.

A planted algorithm for ``v -> M v`` is specified by a success profile
``p_v`` and a policy for its wrong answers.  Its unitary sends
``|v, 0, 0>`` to ``sqrt(p_v) |v, M v, 0> + sqrt(1 - p_v) |v, wrong, 1>``,
with the last qubit acting as workspace, and is completed to a full
unitary block by block.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .fflinalg import all_vectors, index_to_vector, is_prime, vectors_to_indices
from .fourier import fourier_transform

__all__ = [
    "SuccessProfile",
    "PlantedAlg",
    "make_planted_alg",
    "threshold_set",
    "DensityReport",
    "verify_density",
    "ThresholdPair",
    "random_threshold",
    "BandReport",
    "check_band",
    "band_success_fraction",
    "Instance",
    "generate_instance",
    "INSTANCE_KINDS",
    "POLICIES",
]

POLICIES = ("single-adjacent-wrong", "uniform-wrong", "custom")


@dataclass(frozen=True)
class SuccessProfile:
    """Success probability ``p_v`` for every ``v`` in F_p^n, in index order."""

    probs: np.ndarray
    n: int
    p: int

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float)
        if probs.shape != (self.p ** self.n,):
            raise ValueError("profile has the wrong length")
        if np.any(probs < 0) or np.any(probs > 1):
            raise ValueError("profile entries must lie in [0, 1]")
        object.__setattr__(self, "probs", probs)

    @property
    def mean(self) -> float:
        return float(self.probs.mean())


def threshold_set(profile: SuccessProfile, kappa: float) -> np.ndarray:
    """Indicator of ``X_kappa = {v : p_v >= kappa}``."""
    return profile.probs >= kappa


def _gram_schmidt_block(col: np.ndarray) -> np.ndarray:
    # complete a unit column to a unitary, adding basis states in index order
    d = col.size
    Q = [col / np.linalg.norm(col)]
    for k in range(d):
        if len(Q) == d:
            break
        e = np.zeros(d, dtype=complex)
        e[k] = 1.0
        for q in Q:
            e = e - q * np.vdot(q, e)
        for q in Q:
            e = e - q * np.vdot(q, e)
        nrm = np.linalg.norm(e)
        if nrm > 1e-9:
            Q.append(e / nrm)
    return np.stack(Q, axis=1)


class PlantedAlg:
    """An algorithm for ``v -> M v`` with a prescribed success profile.

    Parameters
    ----------
    M : array (n, n)
    profile : SuccessProfile
    policy : str
        ``"single-adjacent-wrong"`` answers ``M v + e_1`` when wrong,
        ``"uniform-wrong"`` spreads the error uniformly over all wrong
        answers, ``"custom"`` uses ``wrong`` (a callable from the input index
        to a mapping of output index to weight).
    """

    def __init__(self, M, profile: SuccessProfile, policy: str = "single-adjacent-wrong",
                 wrong: Callable[[int], Mapping[int, float]] | None = None):
        if policy not in POLICIES:
            raise ValueError(f"unknown policy {policy!r}")
        if policy == "custom" and wrong is None:
            raise ValueError("custom policy needs a wrong-answer map")
        self.n, self.p = profile.n, profile.p
        self.M = np.asarray(M, dtype=np.int64) % self.p
        if self.M.shape != (self.n, self.n):
            raise ValueError(f"M must be {self.n}x{self.n}")
        self.profile = profile
        self.policy = policy
        self._wrong = wrong
        self.N = self.p ** self.n
        self._answers = vectors_to_indices(all_vectors(self.n, self.p) @ self.M.T, self.p)
        self._dist_cache: dict[int, tuple[np.ndarray, np.ndarray]] = {}
        self._blocks = None

    def answer(self, v_index: int) -> int:
        """Index of the correct output ``M v``."""
        return int(self._answers[v_index])

    def answers(self) -> np.ndarray:
        return self._answers

    def wrong_distribution(self, v_index: int) -> dict[int, float]:
        """Normalised law of the output on the wrong branch."""
        good = self.answer(v_index)
        if self.policy == "single-adjacent-wrong":
            z = index_to_vector(good, self.n, self.p)
            z[0] = (z[0] + 1) % self.p
            return {int(vectors_to_indices(z, self.p)): 1.0}
        if self.policy == "uniform-wrong":
            w = 1.0 / (self.N - 1)
            return {z: w for z in range(self.N) if z != good}
        law = {int(k): float(v) for k, v in self._wrong(v_index).items() if v > 0}
        if good in law:
            raise ValueError("custom wrong-answer map includes the correct answer")
        tot = sum(law.values())
        return {k: v / tot for k, v in law.items()}

    def output_distribution(self, v_index: int) -> tuple[np.ndarray, np.ndarray]:
        """Outputs with positive probability and their probabilities."""
        hit = self._dist_cache.get(v_index)
        if hit is not None:
            return hit
        pv = float(self.profile.probs[v_index])
        law = {self.answer(v_index): pv}
        if pv < 1:
            for z, w in self.wrong_distribution(v_index).items():
                law[z] = law.get(z, 0.0) + (1 - pv) * w
        zs = np.array(sorted(law), dtype=np.int64)
        ps = np.array([law[z] for z in zs])
        self._dist_cache[v_index] = (zs, ps)
        return zs, ps

    def blocks(self) -> np.ndarray:
        """Per-input unitaries on (output register, workspace qubit).

        Block ``v`` maps ``|0, 0>`` to the planted state; the remaining
        columns come from Gram-Schmidt over basis states in index order.
        """
        if self._blocks is not None:
            return self._blocks
        d = 2 * self.N
        out = np.zeros((self.N, d, d), dtype=complex)
        for v in range(self.N):
            col = np.zeros(d, dtype=complex)
            pv = float(self.profile.probs[v])
            col[2 * self.answer(v)] = math.sqrt(pv)
            if pv < 1:
                for z, w in self.wrong_distribution(v).items():
                    col[2 * z + 1] = math.sqrt((1 - pv) * w)
            out[v] = _gram_schmidt_block(col)
        self._blocks = out
        return out

    def unitarity_defect(self) -> float:
        B = self.blocks()
        prod = np.einsum("cji,cjk->cik", B.conj(), B)
        return float(np.abs(prod - np.eye(B.shape[1])).max())

    def gate(self, in_wires, out_wires, work: str):
        """The algorithm as a gate controlled on the input wires."""
        from .qsim import MultiplexedGate

        return MultiplexedGate(list(in_wires), list(out_wires) + [work], self.blocks(),
                               label="ALG", query="ALG", inverse_query="ALG^dag", check=False)


def make_planted_alg(M, profile: SuccessProfile, policy: str = "single-adjacent-wrong",
                     wrong=None) -> PlantedAlg:
    return PlantedAlg(M, profile, policy, wrong)


@dataclass
class DensityReport:
    alpha: float
    mean: float
    premise: bool
    min_density: float
    worst_kappa: float
    holds: bool


def verify_density(profile: SuccessProfile, alpha: float) -> DensityReport:
    """Check ``|X_kappa| >= (alpha / 2) p**n`` for every ``kappa <= alpha / 2``.

    Sets shrink as ``kappa`` grows, so the distinct profile values below
    ``alpha / 2`` together with ``alpha / 2`` itself cover every case.
    """
    probs = profile.probs
    kappas = np.unique(np.concatenate([[alpha / 2], probs[probs <= alpha / 2]]))
    dens = np.array([(probs >= k).mean() for k in kappas])
    i = int(np.argmin(dens))
    return DensityReport(alpha, profile.mean, profile.mean >= alpha - 1e-12,
                         float(dens[i]), float(kappas[i]), bool(dens[i] >= alpha / 2 - 1e-12))


@dataclass(frozen=True)
class ThresholdPair:
    """Thresholds ``tau' < tau`` drawn for a given ``alpha``."""

    r: int
    K: int
    alpha: float
    tau: float
    tau_prime: float
    band: str


def threshold_K(alpha: float) -> int:
    return int(math.ceil(4.0 / alpha ** 1.5))


def make_threshold(alpha: float, r: int, K: int | None = None, band: str = "narrow") -> ThresholdPair:
    K = K or threshold_K(alpha)
    if not 1 <= r <= K:
        raise ValueError(f"r must lie in 1..{K}")
    tau = (1 + r / K) * alpha / 4
    if band == "narrow":
        tau_p = tau - alpha / (4 * K)
    elif band == "wide":
        tau_p = tau - 1.0 / K
    else:
        raise ValueError(f"unknown band rule {band!r}")
    return ThresholdPair(r, K, alpha, tau, tau_p, band)


def random_threshold(alpha: float, rng: np.random.Generator, K: int | None = None,
                     band: str = "narrow") -> ThresholdPair:
    """Draw ``r`` uniformly from ``1..K`` and return the threshold pair.

    ``tau = (1 + r/K) alpha / 4``.  The lower threshold is
    ``tau - alpha / (4K)`` for ``band="narrow"`` and ``tau - 1/K`` for
    ``band="wide"``.
    """
    K = K or threshold_K(alpha)
    return make_threshold(alpha, int(rng.integers(1, K + 1)), K, band)


@dataclass
class BandReport:
    tp: ThresholdPair
    gap: float
    bound: float
    within: bool
    fourier_gap: float


def check_band(profile: SuccessProfile, tp: ThresholdPair) -> BandReport:
    """Density of ``X_tau' \\ X_tau`` against ``2/K``.

    ``fourier_gap`` is ``max_r |1_X'(r) - 1_X(r)|`` for the widest
    sandwiched set ``X' = X_tau'``.
    """
    hi = threshold_set(profile, tp.tau)
    lo = threshold_set(profile, tp.tau_prime)
    gap = float(lo.mean() - hi.mean())
    fa = fourier_transform(hi.astype(float), profile.n, profile.p).coeffs
    fb = fourier_transform(lo.astype(float), profile.n, profile.p).coeffs
    bound = 2.0 / tp.K
    return BandReport(tp, gap, bound, gap <= bound + 1e-12, float(np.abs(fa - fb).max()))


def band_success_fraction(profile: SuccessProfile, alpha: float, K: int | None = None,
                          band: str = "narrow") -> float:
    """Fraction of ``r`` in ``1..K`` whose band has density at most ``2/K``."""
    K = K or threshold_K(alpha)
    ok = [check_band(profile, make_threshold(alpha, r, K, band)).within for r in range(1, K + 1)]
    return float(np.mean(ok))


# -------------------------------------------------------------- instances

INSTANCE_KINDS = ("half-space", "footnote-adversary", "random-profile", "coset", "matrix-avg", "spread")


@dataclass
class Instance:
    """A seeded problem instance, serialisable to JSON.

    ``profile`` is indexed by the mixed-radix index of ``v``.  For the
    ``matrix-avg`` kind the profile applies to good matrices only, and
    ``good_entries`` lists ``(i, j, value)`` constraints defining them.
    """

    kind: str
    p: int
    n: int
    M: np.ndarray
    profile: np.ndarray
    policy: str
    seed: int
    alpha: float
    good_entries: list = field(default_factory=list)

    @property
    def instance_id(self) -> str:
        return f"{self.kind}-p{self.p}-n{self.n}-s{self.seed}"

    def success_profile(self) -> SuccessProfile:
        return SuccessProfile(self.profile, self.n, self.p)

    def planted(self, M=None) -> PlantedAlg:
        return PlantedAlg(self.M if M is None else M, self.success_profile(), self.policy)

    def is_good_matrix(self, M) -> bool:
        M = np.asarray(M) % self.p
        return all(int(M[i, j]) == int(val) for i, j, val in self.good_entries)

    def algorithm_for(self, M) -> PlantedAlg:
        """Behaviour on matrix ``M``: the profile on good matrices, never correct otherwise."""
        prof = self.profile if self.is_good_matrix(M) else np.zeros_like(self.profile)
        return PlantedAlg(M, SuccessProfile(prof, self.n, self.p), self.policy)

    def to_dict(self) -> dict:
        d = dict(kind=self.kind, p=self.p, n=self.n, M=np.asarray(self.M).tolist(),
                 profile=[float(x) for x in self.profile], policy=self.policy,
                 seed=self.seed, alpha=self.alpha, instance_id=self.instance_id)
        if self.good_entries:
            d["good_entries"] = [list(map(int, e)) for e in self.good_entries]
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: Mapping) -> "Instance":
        p, n = int(d["p"]), int(d["n"])
        if not is_prime(p):
            raise ValueError(f"p = {p} is not prime")
        M = np.asarray(d["M"], dtype=np.int64)
        if M.shape != (n, n):
            raise ValueError(f"M must be {n}x{n}")
        prof = np.asarray(d["profile"], dtype=float)
        if prof.shape != (p ** n,):
            raise ValueError(f"profile must have {p ** n} entries")
        return cls(d.get("kind", "custom"), p, n, M % p, prof, d.get("policy", "single-adjacent-wrong"),
                   int(d.get("seed", 0)), float(d.get("alpha", prof.mean())),
                   [tuple(e) for e in d.get("good_entries", [])])

    @classmethod
    def from_json(cls, text: str) -> "Instance":
        return cls.from_dict(json.loads(text))


def _rescale_to_mean(x: np.ndarray, target: float) -> np.ndarray:
    # multiplicative rescale, then nudge so the mean is at least target
    x = np.clip(x * (target / x.mean()), 0.0, 1.0)
    for _ in range(50):
        deficit = target - x.mean()
        if deficit <= 0:
            break
        room = 1.0 - x
        x = np.clip(x + room * (deficit / room.mean()) * (1 + 1e-12), 0.0, 1.0)
    return x


def generate_instance(kind: str, n: int, p: int = 2, seed: int = 0, alpha: float | None = None,
                      policy: str = "single-adjacent-wrong", M=None, level: float | None = None,
                      coset=None) -> Instance:
    """Seeded instance generator.

    Kinds
    -----
    half-space
        ``p_v = level`` on ``{v_1 = 0}``, else 0.
    coset
        ``p_v = level`` on an affine coset, else 0.  ``coset`` lists
        ``(coordinate, value)`` constraints, ``[(0, 1)]`` (``v_1 = 1``) by
        default; an empty list is rejected.
    footnote-adversary
        ``p_v = 1`` on ``{v_1 = 1}``, else 0, with ``M = I``.
    random-profile
        i.i.d. uniform on ``[0, 2 alpha]``, rescaled to mean ``>= alpha``.
    spread
        ``p_v = rank(v) / p**n`` under a random ordering.
    matrix-avg
        Two-sided: the profile ``level`` applies when ``M[0, 0] = 0``.
    """
    if kind not in INSTANCE_KINDS:
        raise ValueError(f"unknown instance kind {kind!r}")
    if not is_prime(p):
        raise ValueError(f"p = {p} is not prime")
    rng = np.random.default_rng(seed)
    N = p ** n
    D = all_vectors(n, p)
    if M is None:
        M = np.eye(n, dtype=np.int64) if kind == "footnote-adversary" else rng.integers(0, p, (n, n))
    M = np.asarray(M, dtype=np.int64) % p
    good = []
    if level is not None and not 0 < level <= 1:
        raise ValueError(f"level must lie in (0, 1], got {level}")
    if kind == "half-space":
        level = 0.9 if level is None else level
        prof = np.where(D[:, 0] == 0, level, 0.0)
    elif kind == "coset":
        level = 0.9 if level is None else level
        cons = [(0, 1)] if coset is None else [(int(i), int(b) % p) for i, b in coset]
        if not cons or any(not 0 <= i < n for i, _ in cons):
            raise ValueError("coset needs at least one constraint on a valid coordinate")
        on = np.ones(N, dtype=bool)
        for i, b in cons:
            on &= D[:, i] == b
        prof = np.where(on, level, 0.0)
    elif kind == "footnote-adversary":
        prof = np.where(D[:, 0] == 1, 1.0, 0.0)
    elif kind == "random-profile":
        a = 0.25 if alpha is None else alpha
        prof = _rescale_to_mean(rng.uniform(0, min(1.0, 2 * a), N), a)
    elif kind == "spread":
        prof = rng.permutation(N) / N
    else:
        level = 0.9 if level is None else level
        prof = np.full(N, level)
        good = [(0, 0, 0)]
        if M[0, 0] != 0 and rng.random() < 0.5:
            M[0, 0] = 0
    prof = np.asarray(prof, dtype=float)
    if alpha is None:
        alpha = float(prof.mean()) if kind != "matrix-avg" else float(level) / p
    return Instance(kind, p, n, M, prof, policy, seed, float(alpha), good)
