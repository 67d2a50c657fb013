"""Worst-case solver for ``v -> M v`` from an average-case algorithm.

The reduction draws a random threshold ``tau``, learns the heavy
characters of a set ``X*`` sandwiched between ``X_tau`` and ``X_tau'``, and
for the requested ``v`` repeats:

1. sample ``x1, x2, x3`` from ``X_tau``;
2. shift ``v`` into the annihilator of the learned characters,
   ``x4 = v - s - x1 - x2 - x3``;
3. ``b = sum_i boost(x_i) + M s``, where boost reruns the algorithm until
   a verified answer appears;
4. return ``b`` if it passes verification.

Two execution modes share this driver.  ``"circuit"`` obtains every law
(verification acceptance, Fourier sampling, the sampler, algorithm outputs)
from statevector simulation and caches it per threshold.  ``"idealized"``
replaces the quantum routines with classical procedures that honour the
same guarantees.  In that mode the set ``X*`` is picked adversarially inside
the band for each seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import erfcinv

from .additive import CorrectionBasis, correction_basis, shift_vector
from .avgcase import PlantedAlg, ThresholdPair, make_threshold, threshold_K, threshold_set
from .fflinalg import all_vectors, index_to_vector, vectors_to_indices
from .fourier import CharacterSet
from .qsim import QueryCounter
from .qsub import (
    alg_verified,
    gl_distribution_from_membership,
    gl_fourier_sample,
    heavy_from_distribution,
    indicator_oracle,
    indicator_width,
    q_sample,
    q_verify,
    sampling_oracle,
    verify_accept_probability,
    verify_query_counts,
)
from .qsvt import _degree, fpaa_length

__all__ = [
    "ReductionConfig",
    "AttemptRecord",
    "LearnRecord",
    "ReductionTrace",
    "ReductionResult",
    "BoostResult",
    "PremiseError",
    "Solver",
    "alg_boost",
    "run_reduction",
    "matrix_shift_reduce",
    "large_field_reduce",
    "MODES",
]

MODES = ("idealized", "circuit")


class PremiseError(ValueError):
    """The average-case algorithm does not meet the stated success rate."""


@dataclass(frozen=True)
class ReductionConfig:
    """Parameters of one reduction run.

    Unset budgets and tolerances follow from ``alpha`` and ``delta``:

    * ``verify_eps``: ``alpha**2 / 8`` (final check of ``b``)
    * ``boost_eps``: ``1e-9`` (check of each algorithm output while boosting)
    * ``boost_rounds``: ``ceil(8 ln 8 / alpha)``
    * ``attempts``: ``ceil(8 / alpha**2)`` decompositions per learned basis
    * ``density_lb``: ``alpha / 2``, the guaranteed density of ``X_tau``
    * ``oracle_noise``: ``alpha**1.5 / 10`` per-input error of the classical
      membership oracle
    """

    alpha: float
    delta: float = 0.1
    seed: int = 0
    mode: str = "idealized"
    K: int | None = None
    band: str = "narrow"
    verify_eps: float | None = None
    boost_eps: float = 1e-9
    boost_rounds: int | None = None
    attempts: int | None = None
    relearn: int = 3
    learn_delta: float | None = None
    density_lb: float | None = None
    oracle_noise: float | None = None
    sample_fail: float | None = None
    eta: float = 0.01
    check_premise: bool = False
    record_trace: bool = True

    def __post_init__(self):
        if not 0 < self.alpha <= 1:
            raise ValueError("alpha must lie in (0, 1]")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if self.mode not in MODES:
            raise ValueError(f"unknown mode {self.mode!r}")

    @property
    def K_eff(self) -> int:
        return self.K or threshold_K(self.alpha)

    @property
    def verify_eps_eff(self) -> float:
        return self.verify_eps if self.verify_eps is not None else self.alpha ** 2 / 8

    @property
    def rounds_eff(self) -> int:
        return self.boost_rounds or int(math.ceil(8 * math.log(8) / self.alpha))

    @property
    def attempts_eff(self) -> int:
        return self.attempts or int(math.ceil(8 / self.alpha ** 2))

    @property
    def learn_delta_eff(self) -> float:
        return self.learn_delta or self.delta / 8

    @property
    def density_lb_eff(self) -> float:
        return self.density_lb or self.alpha / 2

    @property
    def noise_eff(self) -> float:
        return self.oracle_noise if self.oracle_noise is not None else self.alpha ** 1.5 / 10

    @property
    def sample_fail_eff(self) -> float:
        return self.sample_fail if self.sample_fail is not None else self.delta / 16

    def replace(self, **kw) -> "ReductionConfig":
        from dataclasses import replace

        return replace(self, **kw)


@dataclass
class AttemptRecord:
    round: int
    attempt: int
    x: tuple[int, int, int, int]
    s: tuple[int, ...]
    stage: str
    b: int | None = None
    accepted: bool = False


@dataclass
class LearnRecord:
    r: int
    tau: float
    tau_prime: float
    size_R: int
    t: int
    shots: int
    density_X: float


@dataclass
class ReductionTrace:
    learns: list[LearnRecord] = field(default_factory=list)
    attempts: list[AttemptRecord] = field(default_factory=list)


@dataclass
class ReductionResult:
    """Outcome of one run.  ``b`` is set only when verification accepted."""

    v: int
    success: bool
    b: np.ndarray | None
    attempts: int
    queries: dict
    trace: ReductionTrace | None = None

    @property
    def queries_UM(self) -> int:
        return self.queries.get("U_M", 0) + self.queries.get("U_M^dag", 0)

    @property
    def queries_ALG(self) -> int:
        return self.queries.get("ALG", 0) + self.queries.get("ALG^dag", 0)


@dataclass
class BoostResult:
    output: int | None
    rounds: int

    @property
    def success(self) -> bool:
        return self.output is not None


# ------------------------------------------------------------ backends

def _accumulate(counter: QueryCounter, counts: dict, times: int = 1):
    for k, v in counts.items():
        counter.add(k, v * times)


@dataclass
class _Learned:
    tp: ThresholdPair
    R: CharacterSet
    cb: CorrectionBasis
    draw: Callable[[np.random.Generator], int]
    counts: dict
    per_sample: dict
    record: LearnRecord


class _Backend:
    """Laws shared by both modes; subclasses supply learning and sampling."""

    def __init__(self, alg: PlantedAlg, cfg: ReductionConfig):
        self.alg = alg
        self.cfg = cfg
        self.n, self.p, self.N = alg.n, alg.p, alg.N
        self.D = all_vectors(self.n, self.p)
        self._boost_cache: dict[tuple[int, float], tuple[float, np.ndarray, np.ndarray]] = {}
        self._verify_cache: dict[tuple[int, int, float], float] = {}

    def verify_prob(self, v: int, b: int, eps: float) -> float:
        raise NotImplementedError

    def verify_counts(self, eps: float) -> dict:
        return verify_query_counts(self.n, self.p, eps)

    def boost_law(self, x: int, eps: float):
        key = (x, eps)
        hit = self._boost_cache.get(key)
        if hit is None:
            zs, ps = self.alg.output_distribution(x)
            acc = np.array([self.verify_prob(x, int(z), eps) for z in zs])
            stop = ps * acc
            q = float(stop.sum())
            hit = (q, zs, stop / q if q > 0 else stop)
            self._boost_cache[key] = hit
        return hit


class _Idealized(_Backend):

    def verify_prob(self, v, b, eps):
        good = self.alg.answer(v)
        if b == good:
            return 1.0
        m = int(np.count_nonzero(self.D[good] != self.D[b]))
        return float(verify_accept_probability(m, self.n, eps))

    def _counts(self, tp: ThresholdPair, shots: int) -> tuple[dict, dict]:
        """Formula-based oracle counts of the learning stage and of one sample."""
        cfg = self.cfg
        t = _indicator_t(tp.tau)
        t_min = _indicator_t(make_threshold(cfg.alpha, 1, cfg.K_eff, cfg.band).tau)
        per_ver = dict(verify_query_counts(self.n, self.p, t_min ** 2))
        per_ver["ALG"] = 1
        d_ind = _svt_degree(indicator_width(t), t * t)
        d_smp = _svt_degree(cfg.eta * math.sqrt(tp.tau), t_min ** 2)
        L_smp = fpaa_length(math.sqrt(cfg.density_lb_eff), math.sqrt(cfg.sample_fail_eff))
        learn = {k: v * 2 * d_ind * shots for k, v in per_ver.items()}
        sample = {k: v * L_smp * d_smp for k, v in per_ver.items()}
        return learn, sample

    def learn(self, tp: ThresholdPair, rng: np.random.Generator) -> _Learned:
        cfg = self.cfg
        probs = self.alg.profile.probs
        hi = threshold_set(self.alg.profile, tp.tau)
        lo = threshold_set(self.alg.profile, tp.tau_prime)
        band = lo & ~hi
        mode = int(rng.integers(3))
        if mode == 0:
            star = hi.copy()
        elif mode == 1:
            star = lo.copy()
        else:
            star = hi | (band & (rng.random(self.N) < 0.5))
        noise = rng.uniform(0, cfg.noise_eff, self.N)
        q = np.where(star, 1 - noise, noise)
        dist = gl_distribution_from_membership(q, self.n, self.p)
        c = cfg.density_lb_eff ** 1.5
        R = heavy_from_distribution(dist, c, cfg.learn_delta_eff, rng)
        cb = correction_basis(R)
        # sampler: uniform on a set between X_{(1+eta) tau} and X_tau
        top = probs >= (1 + cfg.eta) * tp.tau
        S = top | (hi & ~top & (rng.random(self.N) < 0.5))
        if not S.any():
            S = hi
        members = np.nonzero(S)[0]
        fail = cfg.sample_fail_eff
        N = self.N

        def draw(g: np.random.Generator) -> int:
            if members.size == 0 or g.random() < fail:
                return int(g.integers(N))
            return int(members[g.integers(members.size)])

        counts, per_sample = self._counts(tp, R.meta["shots"])
        rec = LearnRecord(tp.r, tp.tau, tp.tau_prime, len(R), cb.t, R.meta["shots"], float(star.mean()))
        return _Learned(tp, R, cb, draw, counts, per_sample, rec)


def _svt_degree(width: float, eps: float) -> int:
    # degree of the threshold polynomial before the fit checks
    eta = eps / 4
    return _degree(2.0 * float(erfcinv(eta)) / width, eta, "even")


def _indicator_t(tau: float) -> float:
    # t with t + t^2 = tau, so X_tau is inside the oracle's guaranteed set
    return (-1.0 + math.sqrt(1.0 + 4.0 * tau)) / 2.0


class _Circuit(_Backend):
    """Every law read from statevector simulation, cached per threshold."""

    def __init__(self, alg, cfg):
        super().__init__(alg, cfg)
        self._va = None
        self._io: dict[int, tuple] = {}

    def verify_prob(self, v, b, eps):
        key = (v, b, eps)
        hit = self._verify_cache.get(key)
        if hit is None:
            res = q_verify(self.alg.M, self.D[v], self.D[b], eps, p=self.p)
            hit = res.accept_prob
            self._verify_cache[key] = hit
        return hit

    def verified(self):
        if self._va is None:
            tau_min = make_threshold(self.cfg.alpha, 1, self.cfg.K_eff, self.cfg.band).tau
            t_min = _indicator_t(tau_min)
            self._va = alg_verified(self.alg, t_min * t_min)
        return self._va

    def oracles(self, tp: ThresholdPair):
        hit = self._io.get(tp.r)
        if hit is None:
            va = self.verified()
            io = indicator_oracle(va, _indicator_t(tp.tau))
            gl = gl_fourier_sample(io)
            so = sampling_oracle(va, tp.tau, va.eps, self.cfg.eta)
            law = q_sample(so, tp.tau, self.cfg.sample_fail_eff, self.cfg.density_lb_eff)
            hit = (io, gl, so, law)
            self._io[tp.r] = hit
        return hit

    def learn(self, tp, rng):
        cfg = self.cfg
        io, gl, so, law = self.oracles(tp)
        R = heavy_from_distribution(gl, cfg.density_lb_eff ** 1.5, cfg.learn_delta_eff, rng)
        cb = correction_basis(R)
        probs = law.probs / law.probs.sum()
        cdf = np.cumsum(probs)

        def draw(g: np.random.Generator) -> int:
            return int(min(np.searchsorted(cdf, g.random() * cdf[-1], side="right"), probs.size - 1))

        counts = {k: v * R.meta["shots"] for k, v in gl.queries.items()}
        rec = LearnRecord(tp.r, tp.tau, tp.tau_prime, len(R), cb.t, R.meta["shots"],
                          float(np.mean(io.member_prob)))
        return _Learned(tp, R, cb, draw, counts, dict(law.queries), rec)


# ------------------------------------------------------------- driver

class Solver:
    """Runs the reduction for many inputs, sharing the per-seed learning stage.

    The learning stage (threshold, heavy characters, sampler) does not
    depend on ``v``; its randomness is derived from ``(seed, round)`` only,
    so sharing it across inputs gives the same results as recomputing it.
    """

    def __init__(self, alg: PlantedAlg, cfg: ReductionConfig, backend: _Backend | None = None):
        self.alg = alg
        self.cfg = cfg
        if cfg.check_premise and alg.profile.mean < cfg.alpha - 1e-12:
            raise PremiseError(f"mean success {alg.profile.mean:.4g} below alpha = {cfg.alpha}")
        if backend is None:
            backend = _Circuit(alg, cfg) if cfg.mode == "circuit" else _Idealized(alg, cfg)
        self.backend = backend
        self._learned: dict[int, _Learned] = {}
        self.N, self.n, self.p = alg.N, alg.n, alg.p
        self._radix = self.p ** np.arange(self.n - 1, -1, -1, dtype=np.int64)

    def with_seed(self, seed: int) -> "Solver":
        """A solver for another seed that keeps the cached quantum laws."""
        return Solver(self.alg, self.cfg.replace(seed=seed), self.backend)

    def learned(self, rnd: int) -> _Learned:
        hit = self._learned.get(rnd)
        if hit is None:
            rng = np.random.default_rng([self.cfg.seed, rnd, 0x5EED])
            tp = make_threshold(self.cfg.alpha, int(rng.integers(1, self.cfg.K_eff + 1)),
                                self.cfg.K_eff, self.cfg.band)
            hit = self.backend.learn(tp, rng)
            self._learned[rnd] = hit
        return hit

    def boost(self, x: int, rng: np.random.Generator, counter: QueryCounter, eps: float | None = None,
              rounds: int | None = None) -> BoostResult:
        eps = self.cfg.boost_eps if eps is None else eps
        rounds = rounds or self.cfg.rounds_eff
        q, zs, law = self.backend.boost_law(x, eps)
        used = rounds if q <= 0 else int(rng.geometric(q))
        out = None
        if used <= rounds:
            out = int(zs[rng.choice(zs.size, p=law)]) if zs.size > 1 else int(zs[0])
        else:
            used = rounds
        counter.add("ALG", used)
        _accumulate(counter, self.backend.verify_counts(eps), used)
        return BoostResult(out, used)

    def solve(self, v) -> ReductionResult:
        cfg = self.cfg
        p, n = self.p, self.n
        vi = int(v) if np.isscalar(v) else int(vectors_to_indices(np.asarray(v), p))
        vv = self.backend.D[vi]
        counter = QueryCounter()
        trace = ReductionTrace() if cfg.record_trace else None
        D = self.backend.D
        M = self.alg.M
        eps_v = cfg.verify_eps_eff
        total = 0
        for rnd in range(cfg.relearn):
            L = self.learned(rnd)
            _accumulate(counter, L.counts)
            if trace is not None:
                trace.learns.append(L.record)
            rng = np.random.default_rng([cfg.seed, vi, rnd, 0xA77])
            s = shift_vector(vv, L.cb)
            base = (vv - s) % p
            sM = (M @ s) % p
            s_cost = n * L.cb.t
            for att in range(cfg.attempts_eff):
                total += 1
                xs = [L.draw(rng) for _ in range(3)]
                _accumulate(counter, L.per_sample, 3)
                x4v = (base - D[xs[0]] - D[xs[1]] - D[xs[2]]) % p
                xs.append(int(x4v @ self._radix))
                outs = []
                stage = "ok"
                for x in xs:
                    r = self.boost(x, rng, counter)
                    if not r.success:
                        stage = "boost-failed"
                        break
                    outs.append(r.output)
                rec = None
                if trace is not None:
                    rec = AttemptRecord(rnd, att, tuple(xs), tuple(int(c) for c in s), stage)
                    trace.attempts.append(rec)
                if stage != "ok":
                    continue
                counter.add("U_M", s_cost)
                b = (D[outs[0]] + D[outs[1]] + D[outs[2]] + D[outs[3]] + sM) % p
                bi = int(b @ self._radix)
                acc = self.backend.verify_prob(vi, bi, eps_v)
                _accumulate(counter, self.backend.verify_counts(eps_v))
                accepted = bool(rng.random() < acc)
                if rec is not None:
                    rec.b, rec.accepted = bi, accepted
                    rec.stage = "accepted" if accepted else "rejected"
                if accepted:
                    return ReductionResult(vi, True, b, total, counter.snapshot(), trace)
        return ReductionResult(vi, False, None, total, counter.snapshot(), trace)


def run_reduction(alg: PlantedAlg, v, cfg: ReductionConfig) -> ReductionResult:
    """Compute ``M v`` for one input.

    Returns a verified answer or a failure verdict; it never returns an
    answer that was rejected by verification.

    Raises
    ------
    PremiseError
        If ``cfg.check_premise`` is set and the mean success rate is below
        ``cfg.alpha``.
    """
    return Solver(alg, cfg).solve(v)


def alg_boost(alg: PlantedAlg, x, rounds: int, eps: float = 1e-9, seed: int = 0,
              mode: str = "idealized") -> BoostResult:
    """Rerun ``alg`` on ``x`` until an output passes verification.

    Returns the first verified output, or ``None`` after ``rounds`` tries.
    """
    cfg = ReductionConfig(alpha=1.0, seed=seed, mode=mode, boost_eps=eps, boost_rounds=rounds)
    sol = Solver(alg, cfg)
    xi = int(x) if np.isscalar(x) else int(vectors_to_indices(np.asarray(x), alg.p))
    return sol.boost(xi, np.random.default_rng([seed, xi, 0xB0]), QueryCounter())


# ------------------------------------------------------ two-sided variants

def _verify_final(alg_or_M, p, v, b, eps, rng, mode, counter) -> bool:
    M = np.asarray(alg_or_M)
    n = M.shape[0]
    if mode == "circuit":
        acc = q_verify(M, v, b, eps, p=p).accept_prob
    else:
        m = int(np.count_nonzero((M @ v - b) % p))
        acc = float(verify_accept_probability(m, n, eps))
    _accumulate(counter, verify_query_counts(n, p, eps))
    return bool(rng.random() < acc)


def matrix_shift_reduce(alg_for: Callable[[np.ndarray], PlantedAlg], M, v, cfg: ReductionConfig,
                        attempts: int | None = None) -> ReductionResult:
    """Worst case over matrices: run on ``M - R`` for random ``R`` and add ``R v``.

    ``alg_for(M')`` returns the algorithm's behaviour on matrix ``M'``.
    Each candidate is verified against ``M`` with ``eps = delta / 2``.
    """
    M = np.asarray(M, dtype=np.int64)
    n = M.shape[0]
    probe = alg_for(M)
    p = probe.p
    v = np.asarray(v, dtype=np.int64) % p
    vi = int(vectors_to_indices(v, p))
    attempts = attempts or int(math.ceil(8 / cfg.alpha))
    rng = np.random.default_rng([cfg.seed, vi, 0x5817])
    counter = QueryCounter()
    inner = cfg.replace(relearn=1, check_premise=False, record_trace=False)
    for k in range(attempts):
        R = rng.integers(0, p, (n, n))
        sub = run_reduction(alg_for((M - R) % p), v, inner.replace(seed=int(rng.integers(2 ** 31))))
        _accumulate(counter, sub.queries)
        if not sub.success:
            continue
        b = (sub.b + R @ v) % p
        if _verify_final(M, p, v, b, cfg.delta / 2, rng, cfg.mode, counter):
            return ReductionResult(vi, True, b, k + 1, counter.snapshot())
    return ReductionResult(vi, False, None, attempts, counter.snapshot())


def large_field_reduce(alg: PlantedAlg, v, cfg: ReductionConfig, attempts: int | None = None,
                       check_field: bool = True) -> ReductionResult:
    """Local correction along a random line, for fields with ``p >= 10 / alpha``.

    Picks ``x`` at random, takes two random points ``a = v + la d`` and
    ``b = v + lb d`` on the line through ``v`` with direction ``d = x - v``,
    boosts the algorithm on both and interpolates
    ``M v = (lb M a - la M b) / (lb - la)``.

    Raises
    ------
    ValueError
        If ``check_field`` is set and ``p < 10 / alpha``.
    """
    p, n = alg.p, alg.n
    if check_field and p < 10 / cfg.alpha:
        raise ValueError(f"field size {p} below 10/alpha = {10 / cfg.alpha:.3g}")
    v = np.asarray(v, dtype=np.int64) % p
    vi = int(vectors_to_indices(v, p))
    attempts = attempts or int(math.ceil(8 / cfg.alpha ** 3))
    sol = Solver(alg, cfg.replace(check_premise=False))
    D = sol.backend.D
    rng = np.random.default_rng([cfg.seed, vi, 0x11AE])
    counter = QueryCounter()
    for k in range(attempts):
        d = rng.integers(0, p, n)
        while not d.any():
            d = rng.integers(0, p, n)
        la, lb = rng.choice(np.arange(1, p), size=2, replace=False)
        a = (v + la * d) % p
        bpt = (v + lb * d) % p
        ra = sol.boost(int(vectors_to_indices(a, p)), rng, counter)
        if not ra.success:
            continue
        rb = sol.boost(int(vectors_to_indices(bpt, p)), rng, counter)
        if not rb.success:
            continue
        inv = pow(int(lb - la) % p, -1, p)
        out = ((lb * D[ra.output] - la * D[rb.output]) * inv) % p
        if _verify_final(alg.M, p, v, out, cfg.verify_eps_eff, rng, cfg.mode, counter):
            return ReductionResult(vi, True, out, k + 1, counter.snapshot())
    return ReductionResult(vi, False, None, attempts, counter.snapshot())
