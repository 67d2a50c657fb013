"""Quantum subroutines built on the simulator.

* :func:`q_verify` decides ``M v = b`` with one-sided error.  It checks a
  uniformly random coordinate in superposition and amplifies the mismatch
  flag with fixed-point amplification.
* :func:`alg_verified` runs a planted algorithm and flags wrong outputs
  without measuring them.
* :func:`indicator_oracle` thresholds the singular values of the verified
  algorithm to get a noisy membership oracle for ``{v : p_v large}``.
* :func:`q_sample` draws near-uniform members of that set.
* :func:`gl_fourier_sample` and :func:`learn_heavy_characters` find the
  large Fourier coefficients of the set the oracle indicates.

Flag conventions are normalised at the boundary of each routine.
``VerifiedAlg.flag = 1`` means the output is claimed correct, and
``IndicatorOracle.flag = 1`` means the input is claimed to be a member.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np

from .avgcase import PlantedAlg, SuccessProfile
from .fflinalg import all_vectors, vectors_to_indices
from .fourier import CharacterSet
from .qsim import (
    Circuit,
    MultiplexedGate,
    QueryCounter,
    RegisterLayout,
    StateVector,
    comparator,
    controlled_add,
    distribution,
    inv_qft,
    pauli_x,
    qft,
    register_read,
    umv_circuit,
    vector_oracle,
    wire_names,
)
from .qsvt import (
    BlockEncoding,
    BoundedPolynomial,
    FixedPointAmplifier,
    SVTUnitary,
    apply_svt,
    fixed_point_amplify,
    fpaa_length,
    fpaa_success_probability,
    threshold_polynomial,
)

__all__ = [
    "VerifyResult",
    "q_verify",
    "verify_accept_probability",
    "verify_query_counts",
    "comparison_circuit",
    "VerifiedAlg",
    "alg_verified",
    "IndicatorOracle",
    "indicator_oracle",
    "sampling_oracle",
    "indicator_width",
    "planted_indicator",
    "SampleLaw",
    "q_sample",
    "GLDistribution",
    "gl_fourier_sample",
    "gl_distribution_from_membership",
    "learn_heavy_characters",
    "heavy_from_distribution",
    "heavy_shots",
    "WORK_WIRES",
]

WORK_WIRES = ("idx", "col", "m", "u", "acc", "bb", "diff", "flag")


def _work_layout(n: int, p: int) -> list[tuple[str, int]]:
    return [("idx", n), ("col", n), ("m", p), ("u", p), ("acc", p), ("bb", p), ("diff", p), ("flag", 2)]


def _mv_minus_b(n, p, M, v_read, b_read) -> Circuit:
    """``diff += (M v)_idx - b_idx``; ``acc`` and ``bb`` are returned to zero."""
    umv = umv_circuit(n, p, M, idx="idx", col="col", m="m", u="u", acc="acc", v_read=v_read)
    ub = b_read("idx", "bb")
    c = Circuit(label="U_Mv-b")
    c.extend([umv, ub, controlled_add("acc", "diff", p, 1), controlled_add("bb", "diff", p, -1),
              ub.inverse(), umv.inverse()])
    return c


def comparison_circuit(n: int, p: int, M, v_read, b_read) -> Circuit:
    """Uniform index, then flag ``(M v)_idx != b_idx`` with the workspace cleaned.

    Starting from all-zero workspace the output is
    ``sqrt((n - m)/n) |psi0>|0> + sqrt(m/n) |psi1>|1>`` where ``m`` is the
    number of mismatching coordinates.
    """
    core = _mv_minus_b(n, p, M, v_read, b_read)
    c = Circuit(label="U_cmp")
    c.extend([qft("idx", n), core, comparator("diff", "flag", p), core.inverse()])
    return c


def _verify_eps(eps: float) -> float:
    # weight bound eps on acceptance -> amplitude parameter sqrt(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    return math.sqrt(eps)


@dataclass
class VerifyResult:
    """Outcome of a verification call.

    ``accept_prob`` is exact; ``accepted`` is a sampled decision when a
    generator was supplied.
    """

    accept_prob: float
    L: int
    queries: dict
    accepted: bool | None = None


def q_verify(M, v, b, eps: float, rng: np.random.Generator | None = None, p: int | None = None) -> VerifyResult:
    """Decide ``M v == b`` by simulation.

    Accepts with probability exactly 1 when ``M v = b`` and at most ``eps``
    otherwise.  The entry oracles for ``v`` and ``b`` are classical tables.
    """
    M = np.asarray(M, dtype=np.int64)
    if p is None:
        raise ValueError("modulus p is required")
    n = M.shape[1]
    v = np.asarray(v, dtype=np.int64) % p
    b = np.asarray(b, dtype=np.int64) % p
    if M.shape != (n, n) or v.shape != (n,) or b.shape != (n,):
        raise ValueError("dimension mismatch")
    layout = RegisterLayout.of(_work_layout(n, p))
    A = comparison_circuit(n, p, M,
                           lambda i, t: vector_oracle(v, i, t, p, "U_v"),
                           lambda i, t: vector_oracle(b, i, t, p, "U_b"))
    be = BlockEncoding(A, layout, layout.mask({w: 0 for w in WORK_WIRES}),
                       layout.mask({"flag": 1}), "U_cmp")
    amp = fixed_point_amplify(be, 1.0 / (2.0 * math.sqrt(n)), _verify_eps(eps))
    out = amp.apply(StateVector.basis(layout))
    reject = float(distribution(out, ["flag"])[1])
    acc = min(1.0, max(0.0, 1.0 - reject))
    res = VerifyResult(acc, amp.L, out.counter.snapshot())
    if rng is not None:
        res.accepted = bool(rng.random() < acc)
    return res


def verify_accept_probability(mismatches, n: int, eps: float):
    """Closed-form acceptance probability for ``mismatches`` wrong coordinates.

    Matches :func:`q_verify` exactly; used by the classical execution mode.
    """
    m = np.asarray(mismatches)
    L = fpaa_length(1.0 / (2.0 * math.sqrt(n)), _verify_eps(eps))
    acc = 1.0 - fpaa_success_probability(np.sqrt(m / n), L, _verify_eps(eps))
    return np.where(m == 0, 1.0, np.clip(acc, 0.0, 1.0))


@lru_cache(maxsize=None)
def _pass_counts(n: int, p: int) -> tuple[tuple[str, int], ...]:
    layout = RegisterLayout.of(_work_layout(n, p))
    zero = np.zeros(n, dtype=np.int64)
    A = comparison_circuit(n, p, np.zeros((n, n), dtype=np.int64),
                           lambda i, t: vector_oracle(zero, i, t, p, "U_v"),
                           lambda i, t: vector_oracle(zero, i, t, p, "U_b"))
    return tuple(sorted(A.query_counts(layout).items()))


def verify_query_counts(n: int, p: int, eps: float) -> dict[str, int]:
    """Oracle counts of one :func:`q_verify` call, without simulating it."""
    L = fpaa_length(1.0 / (2.0 * math.sqrt(n)), _verify_eps(eps))
    return {k: v * L for k, v in _pass_counts(n, p)}


# ------------------------------------------------------- verified algorithm

@dataclass
class VerifiedAlg:
    """A planted algorithm followed by in-superposition verification.

    Wires: ``in*`` (input), ``out*`` (output), ``work`` and the verification
    workspace.  After the circuit, ``flag = 1`` means the output is claimed
    correct.
    """

    alg: PlantedAlg
    eps: float
    layout: RegisterLayout
    circuit: Circuit
    amplifier: FixedPointAmplifier
    in_wires: list[str]
    out_wires: list[str]
    _be: BlockEncoding | None = field(default=None, repr=False)

    @property
    def n(self):
        return self.alg.n

    @property
    def p(self):
        return self.alg.p

    def input_index(self, v_index: int) -> int:
        digits = all_vectors(self.n, self.p)[v_index]
        return self.layout.basis_index(dict(zip(self.in_wires, map(int, digits))))

    def input_mask(self) -> np.ndarray:
        """Basis states with every wire except the input at zero."""
        return self.layout.mask({w: 0 for w in self.layout.names if w not in self.in_wires})

    def run(self, v_index: int) -> StateVector:
        return self.circuit.apply(StateVector.basis(self.layout, dict(
            zip(self.in_wires, map(int, all_vectors(self.n, self.p)[v_index])))))

    def joint_law(self, v_index: int) -> np.ndarray:
        """``P[output index, flag]`` on input ``v``."""
        st = self.run(v_index)
        d = distribution(st, self.out_wires + ["flag"])
        return d.reshape(self.alg.N, 2)

    def block_encoding(self) -> BlockEncoding:
        if self._be is None:
            self._be = BlockEncoding(self.circuit, self.layout, self.input_mask(),
                                     self.layout.mask({"flag": 1}), "ALG_ver")
        return self._be


def alg_verified(alg: PlantedAlg, eps: float) -> VerifiedAlg:
    """Wrap ``alg`` so that wrong outputs are flagged with probability ``>= 1 - eps``.

    The output superposition is left untouched.  Correct outputs are never
    flagged as wrong.
    """
    n, p = alg.n, alg.p
    ins, outs = wire_names("in", n), wire_names("out", n)
    layout = RegisterLayout.of([(w, p) for w in ins] + [(w, p) for w in outs] + [("work", 2)]
                               + _work_layout(n, p))
    A = comparison_circuit(n, p, alg.M,
                           lambda i, t: register_read(i, ins, t, p, "U_v"),
                           lambda i, t: register_read(i, outs, t, p, "U_b"))
    be = BlockEncoding(A, layout, layout.mask({w: 0 for w in WORK_WIRES}),
                       layout.mask({"flag": 1}), "U_cmp")
    amp = fixed_point_amplify(be, 1.0 / (2.0 * math.sqrt(n)), _verify_eps(eps))
    circ = Circuit([alg.gate(ins, outs, "work"), amp, pauli_x("flag")], label="ALG_ver")
    return VerifiedAlg(alg, eps, layout, circ, amp, ins, outs)


# ------------------------------------------------------- indicator oracle

def indicator_width(t: float) -> float:
    """Transition width ``t**1.5 / 2 - t**2.5 / 8`` around the threshold ``sqrt(t)``."""
    return 0.5 * t ** 1.5 - 0.125 * t ** 2.5


@dataclass
class IndicatorOracle:
    """Noisy membership oracle.

    ``flag = 1`` claims membership.  ``member_prob[v]`` is the exact
    probability of that claim on input ``v``.
    """

    layout: RegisterLayout
    v_wires: list[str]
    flag: str
    op: Circuit
    svt: SVTUnitary
    t: float
    eps: float
    sv_threshold: float
    sv_width: float
    poly: BoundedPolynomial
    member_prob: np.ndarray
    good: np.ndarray
    bad: np.ndarray
    n: int
    p: int

    @property
    def wasteland(self) -> np.ndarray:
        return ~(self.good | self.bad)

    def apply(self, state: StateVector) -> StateVector:
        return self.op.apply(state)

    def inverse(self):
        return self.op.inverse()

    @property
    def cost(self) -> int:
        return self.svt.cost


def _threshold_oracle(va: VerifiedAlg, sv_t: float, sv_width: float, eps: float,
                      t_label: float, good: np.ndarray, bad: np.ndarray) -> IndicatorOracle:
    P = threshold_polynomial(sv_t, sv_width, eps)
    svt = apply_svt(va.block_encoding(), P, ext="ext")
    op = Circuit([svt, pauli_x("ext")], label="O_ind")
    # member claim = ext lands on the block, i.e. |P(zeta_v)|^2
    member = np.zeros(va.alg.N)
    V = svt.V
    rows = np.array([va.input_index(v) for v in range(va.alg.N)])
    for j in range(svt.values.size):
        col = V[rows, j]
        member += np.abs(col) ** 2 * svt.values[j] ** 2
    return IndicatorOracle(svt.layout, list(va.in_wires), "ext", op, svt, t_label, eps,
                           sv_t, sv_width, P, member, good, bad, va.n, va.p)


def indicator_oracle(va: VerifiedAlg, t: float, eps: float | None = None) -> IndicatorOracle:
    """Membership oracle for ``{v : p_v >= t + t**2}`` against ``{v : p_v <= t - 2 t**2}``.

    The singular value on input ``v`` is ``sqrt(p_v + (1 - p_v) * leak)``
    where ``leak <= va.eps``.  Thresholding it at ``sqrt(t)`` with width
    :func:`indicator_width` gives a member claim with probability at least
    ``1 - 2 eps`` on the first set and at most ``2 eps`` on the second.
    Inputs in between (the wasteland) get no guarantee.

    Raises
    ------
    ValueError
        If ``va.eps > t**2``, which would void the guarantee on the second set.
    """
    eps = t * t if eps is None else eps
    if va.eps > t * t + 1e-15:
        raise ValueError("verification error must be at most t^2")
    probs = va.alg.profile.probs
    good = probs >= t + t * t
    bad = probs <= t - 2 * t * t
    return _threshold_oracle(va, math.sqrt(t), indicator_width(t), eps, t, good, bad)


def sampling_oracle(va: VerifiedAlg, tau: float, eps: float, eta: float = 0.01) -> IndicatorOracle:
    """Sharper oracle used for sampling: threshold ``sqrt(tau)``, width ``eta sqrt(tau)``."""
    st = math.sqrt(tau)
    w = eta * st
    probs = va.alg.profile.probs
    good = probs >= (st + w / 2) ** 2
    bad = probs + va.eps <= (st - w / 2) ** 2
    return _threshold_oracle(va, st, w, eps, tau, good, bad)


@dataclass
class _PlantedIndicatorOp:
    gate: MultiplexedGate

    def apply(self, state):
        return self.gate.apply(state)

    def inverse(self):
        return self.gate.inverse()


@dataclass
class PlantedIndicator:
    """Membership oracle with prescribed per-input error rates.

    On input ``v`` the flag reads ``f(v)`` with probability ``1 - err[v]``;
    the error branch is entangled with a workspace qubit.
    """

    layout: RegisterLayout
    v_wires: list[str]
    flag: str
    op: _PlantedIndicatorOp
    f: np.ndarray
    err: np.ndarray
    n: int
    p: int

    @property
    def member_prob(self) -> np.ndarray:
        return np.where(self.f, 1 - self.err, self.err)

    def apply(self, state):
        return self.op.apply(state)

    def inverse(self):
        return self.op.inverse()


def planted_indicator(f, err, n: int, p: int) -> PlantedIndicator:
    """Build a :class:`PlantedIndicator` for the boolean table ``f``."""
    f = np.asarray(f, dtype=bool)
    err = np.asarray(err, dtype=float)
    N = p ** n
    if f.shape != (N,) or err.shape != (N,):
        raise ValueError("tables must have p**n entries")
    from .avgcase import _gram_schmidt_block

    blocks = np.zeros((N, 4, 4), dtype=complex)
    for v in range(N):
        col = np.zeros(4, dtype=complex)
        fv = int(f[v])
        col[fv] = math.sqrt(1 - err[v])          # work 0, flag f
        col[2 + (1 - fv)] = math.sqrt(err[v])    # work 1, flag not f
        blocks[v] = _gram_schmidt_block(col)
    ins = wire_names("in", n)
    layout = RegisterLayout.of([(w, p) for w in ins] + [("work", 2), ("flag", 2)])
    g = MultiplexedGate(ins, ["work", "flag"], blocks, "O_f", query="O_f", inverse_query="O_f^dag")
    return PlantedIndicator(layout, ins, "flag", _PlantedIndicatorOp(g), f, err, n, p)


# ------------------------------------------------------------ sampling

@dataclass
class SampleLaw:
    """Output law of the sampler.

    ``probs[v]`` is the probability that the measured input register reads
    ``v``; ``fail`` is the weight left without a member claim.
    """

    probs: np.ndarray
    fail: float
    L: int
    queries: dict

    def sample(self, rng: np.random.Generator) -> int:
        return int(rng.choice(self.probs.size, p=self.probs / self.probs.sum()))


def q_sample(io, tau: float, delta: float, density_lb: float | None = None) -> SampleLaw:
    """Amplify the member-claim component of the uniform superposition.

    Parameters
    ----------
    io : IndicatorOracle or PlantedIndicator
    tau : float
        Threshold the oracle was built for (recorded for reporting).
    delta : float
        Target failure weight; amplification parameter ``sqrt(delta)``.
    density_lb : float, optional
        Lower bound on the claimed-member mass.  Defaults to half the exact
        mass, read from the amplitudes.

    Raises
    ------
    ValueError
        If the claimed-member mass vanishes.
    """
    n, p = io.n, io.p
    mass = float(np.mean(io.member_prob))
    if mass <= 1e-15:
        raise ValueError("the oracle claims no members")
    if density_lb is None:
        density_lb = mass / 2
    prep = Circuit([qft(w, p) for w in io.v_wires] + [io], label="S")
    layout = io.layout
    be = BlockEncoding(prep, layout, layout.mask({w: 0 for w in layout.names}),
                       layout.mask({io.flag: 1}), "S")
    amp = fixed_point_amplify(be, math.sqrt(density_lb), math.sqrt(delta))
    out = amp.apply(StateVector.basis(layout))
    joint = distribution(out, io.v_wires + [io.flag]).reshape(p ** n, 2)
    return SampleLaw(joint.sum(axis=1), float(joint[:, 0].sum()), amp.L, out.counter.snapshot())


# --------------------------------------------------------- Fourier sampling

@dataclass
class GLDistribution:
    """Outcome law of the Fourier-sampling circuit.

    ``probs[y]`` is the probability of reading ``y`` with every other wire
    at zero and the phase qubit back in ``|->``; ``remainder`` is the rest.
    """

    probs: np.ndarray
    remainder: float
    n: int
    p: int
    queries: dict = field(default_factory=dict)


def gl_fourier_sample(io) -> GLDistribution:
    """Exact output law of QFT, oracle, phase kickback, oracle^-1, QFT^-1.

    For an oracle whose member claim on ``v`` has probability ``q_v``,
    ``probs[y] = |g_hat(y)|**2`` with ``g = 1 - 2 q``.
    """
    n, p = io.n, io.p
    layout = io.layout.extend([("gl", 2)])
    # the oracle acts on its own layout; the phase qubit rides along as a batch axis
    st = StateVector.basis(io.layout)
    for w in io.v_wires:
        st = qft(w, p).apply(st)
    minus = np.array([1.0, -1.0]) / math.sqrt(2)
    st = st.with_amps(np.outer(st.amps, minus))
    st = io.apply(st)
    f_ax = io.layout.axis(io.flag)
    t = st.amps.reshape(io.layout.dims + (2,))
    t = t.copy()
    sl = [slice(None)] * t.ndim
    sl[f_ax] = 1
    t[tuple(sl)] = t[tuple(sl)][..., ::-1]   # CNOT from the flag onto the phase qubit
    st = st.with_amps(t.reshape(-1, 2))
    st = io.inverse().apply(st)
    for w in io.v_wires:
        st = inv_qft(w, p).apply(st)
    proj = st.amps @ minus
    zero = io.layout.mask({w: 0 for w in io.layout.names if w not in io.v_wires})
    amps = proj[zero]
    probs = np.abs(amps) ** 2
    # index order over the zero-workspace subspace is the order of v
    return GLDistribution(probs, max(0.0, 1.0 - float(probs.sum())), n, p, st.counter.snapshot())


def gl_distribution_from_membership(member_prob: np.ndarray, n: int, p: int) -> GLDistribution:
    """The same law computed classically from ``q_v``."""
    from .fourier import fourier_transform

    g = 1.0 - 2.0 * np.asarray(member_prob, dtype=float)
    probs = np.abs(fourier_transform(g, n, p).coeffs) ** 2
    return GLDistribution(probs, max(0.0, 1.0 - float(probs.sum())), n, p)


def heavy_shots(c: float, delta: float, N: int) -> int:
    """Shots so that every ``|q_hat(y)|`` estimate is within ``c/8``.

    Hoeffding with a union bound over ``N`` outcomes puts each frequency
    within ``c**2 / 16`` of its mean, and ``|sqrt(a) - sqrt(b)| <=
    sqrt(|a - b|)`` turns that into ``c/4`` on ``sqrt(prob)``, which is
    ``c/8`` on ``|q_hat| = sqrt(prob) / 2``.
    """
    return int(math.ceil(128.0 * math.log(2.0 * N / delta) / c ** 4))


def heavy_from_distribution(dist: GLDistribution, c: float, delta: float, rng: np.random.Generator,
                            shots_budget: int | None = None) -> CharacterSet:
    """Estimate ``|q_hat(y)|`` by frequencies and keep ``y != 0`` above ``3c/4``.

    The result contains every character with ``|q_hat| >= c`` and only
    characters with ``|q_hat| >= c/2``, with probability ``>= 1 - delta``.

    Raises
    ------
    RuntimeError
        If ``shots_budget`` is below the number of shots needed.
    """
    N = dist.probs.size
    shots = heavy_shots(c, delta, N)
    if shots_budget is not None and shots_budget < shots:
        raise RuntimeError(f"shot budget {shots_budget} below the required {shots}")
    pr = np.append(np.clip(dist.probs, 0, None), max(dist.remainder, 0.0))
    counts = rng.multinomial(shots, pr / pr.sum())[:N]
    est = np.sqrt(counts / shots) / 2.0
    hits = tuple(int(y) for y in np.nonzero(est >= 0.75 * c)[0] if y != 0)
    cs = CharacterSet(hits, dist.n, dist.p, c)
    cs.meta.update(shots=shots, shots_ae=int(math.ceil(16 * math.pi / c ** 2 * math.log(2.0 * N / delta))),
                   estimates=est)
    return cs


def learn_heavy_characters(io, c: float, delta: float, rng: np.random.Generator,
                           shots_budget: int | None = None) -> CharacterSet:
    """Heavy characters of the set indicated by ``io``, from Fourier sampling.

    The circuit reads ``|g_hat(y)|**2`` for ``g = 1 - 2 q``; for ``y != 0``
    that is ``4 |q_hat(y)|**2``, and the factor 2 is removed here.
    """
    return heavy_from_distribution(gl_fourier_sample(io), c, delta, rng, shots_budget)
