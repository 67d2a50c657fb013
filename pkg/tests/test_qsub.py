import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qlinred.avgcase import SuccessProfile, make_planted_alg
from qlinred.fflinalg import all_vectors
from qlinred.fourier import fourier_transform, spec_threshold
from qlinred.qsub import (
    alg_verified,
    gl_distribution_from_membership,
    gl_fourier_sample,
    heavy_shots,
    indicator_oracle,
    learn_heavy_characters,
    planted_indicator,
    q_sample,
    q_verify,
    verify_accept_probability,
    verify_query_counts,
)
from qlinred.qsvt import fpaa_length, fpaa_success_probability


def test_verify_examples():
    I2 = np.eye(2, dtype=int)
    assert q_verify(I2, (1, 0), (1, 0), 0.05, p=2).accept_prob == 1.0
    assert q_verify(I2, (1, 0), (0, 0), 0.05, p=2).accept_prob <= 0.05
    assert q_verify(np.array([[1]]), (1,), (0,), 0.05, p=2).accept_prob <= 0.05


@settings(max_examples=15)
@given(st.sampled_from([(2, 2), (3, 2), (2, 3)]), st.integers(0, 2 ** 31))
def test_verify_matches_closed_form(pn, seed):
    p, n = pn
    rng = np.random.default_rng(seed)
    M = rng.integers(0, p, (n, n))
    v = rng.integers(0, p, n)
    b = (M @ v + (rng.random(n) < 0.5) * rng.integers(1, p, n)) % p
    eps = float(rng.uniform(0.01, 0.3))
    res = q_verify(M, v, b, eps, p=p)
    m = int(np.count_nonzero((M @ v - b) % p))
    assert res.accept_prob == pytest.approx(float(verify_accept_probability(m, n, eps)), abs=1e-12)
    assert (res.accept_prob == 1.0) == (m == 0)
    assert res.accept_prob <= eps or m == 0
    assert res.queries == verify_query_counts(n, p, eps)


def test_verify_query_shape():
    q = verify_query_counts(3, 2, 0.05)
    assert q["U_M"] == q["U_M^dag"] == q["U_v"] == q["U_v^dag"]
    # per pass, each row comparison reads b once and n entries of M twice
    assert q["U_M"] == 2 * 3 * q["U_b"]
    L = fpaa_length(1 / (2 * math.sqrt(3)), 0.05 ** 0.5)
    assert all(c % L == 0 for c in q.values())
    assert verify_query_counts(3, 2, 1e-4)["U_M"] > q["U_M"]


def profile(values, n, p=2):
    return SuccessProfile(np.asarray(values, dtype=float), n, p)


def test_alg_verified_perfect():
    M = np.array([[1, 1], [0, 1]])
    va = alg_verified(make_planted_alg(M, profile(np.ones(4), 2)), 0.1)
    for v in range(4):
        law = va.joint_law(v)
        assert law[:, 1].sum() == pytest.approx(1.0, abs=1e-12)


def test_alg_verified_flags_wrong_answers():
    M = np.array([[1, 0], [1, 1]])
    alg = make_planted_alg(M, profile(np.zeros(4), 2))
    va = alg_verified(alg, 0.1)
    for v in range(4):
        assert va.joint_law(v)[:, 0].sum() >= 0.9


def test_alg_verified_joint_law():
    M = np.array([[1, 0], [1, 1]])
    alg = make_planted_alg(M, profile(np.full(4, 0.5), 2))
    eps = 0.1
    va = alg_verified(alg, eps)
    rng = np.random.default_rng(0)
    leak = 1 - fpaa_success_probability(math.sqrt(1 / 2), va.amplifier.L, math.sqrt(eps))
    for v in range(4):
        law = va.joint_law(v)
        good = alg.answer(v)
        (wrong,) = [z for z in np.nonzero(law.sum(axis=1) > 1e-12)[0] if z != good]
        # the form: correct output always flagged correct, wrong output leaks with weight `leak`
        want = {(good, 1): 0.5, (wrong, 1): 0.5 * leak, (wrong, 0): 0.5 * (1 - leak)}
        for (z, f), w in want.items():
            assert law[z, f] == pytest.approx(w, abs=1e-9)
        assert law[good].sum() == pytest.approx(0.5, abs=1e-9)
        shots = rng.multinomial(10_000, law.reshape(-1) / law.sum()).reshape(law.shape) / 10_000
        for (z, f), w in want.items():
            assert abs(shots[z, f] - w) <= 0.02


def test_alg_verified_keeps_success_probability():
    rng = np.random.default_rng(3)
    probs = rng.uniform(0, 1, 8)
    M = rng.integers(0, 2, (3, 3))
    alg = make_planted_alg(M, profile(probs, 3), policy="uniform-wrong")
    va = alg_verified(alg, 0.05)
    for v in range(8):
        assert va.joint_law(v)[alg.answer(v)].sum() == pytest.approx(probs[v], abs=1e-9)


@pytest.fixture(scope="module")
def two_level_oracle():
    M = np.array([[1, 1], [0, 1]])
    alg = make_planted_alg(M, profile([0.9, 0.05, 0.9, 0.05], 2))
    t = 0.4
    va = alg_verified(alg, 0.01)
    return indicator_oracle(va, t), t


def test_indicator_without_wasteland(two_level_oracle):
    io, t = two_level_oracle
    eps = io.eps
    assert not io.wasteland.any()
    for v in range(4):
        want = 1.0 if io.good[v] else 0.0
        assert abs(io.member_prob[v] - want) <= 2 * eps
    assert np.all((io.member_prob >= 0) & (io.member_prob <= 1 + 1e-12))


def test_indicator_all_good():
    alg = make_planted_alg(np.eye(2, dtype=int), profile(np.ones(4), 2))
    io = indicator_oracle(alg_verified(alg, 0.04), 0.3)
    assert io.member_prob.min() >= 1 - 2 * io.eps


def test_indicator_wasteland_is_bounded():
    t = 0.3
    alg = make_planted_alg(np.eye(2, dtype=int), profile([t, 0.9, 0.0, t + 0.02], 2))
    io = indicator_oracle(alg_verified(alg, t * t), t)
    assert io.wasteland[0] and io.wasteland[3]
    assert np.all(io.member_prob <= 1 + 1e-12)


def test_indicator_rejects_loose_verification():
    alg = make_planted_alg(np.eye(2, dtype=int), profile(np.ones(4), 2))
    with pytest.raises(ValueError):
        indicator_oracle(alg_verified(alg, 0.2), 0.3)


def test_sample_half_space():
    n = 4
    X = all_vectors(n, 2)[:, 0] == 0
    io = planted_indicator(X, np.where(X, 0.01, 0.0), n, 2)
    law = q_sample(io, 0.3, 0.01)
    probs = law.probs / law.probs.sum()
    assert 0.5 * np.abs(probs - X / X.sum()).sum() <= 0.05
    assert law.fail <= 0.01 + 1e-12


def test_sample_everything_is_uniform():
    io = planted_indicator(np.ones(8, dtype=bool), np.zeros(8), 3, 2)
    law = q_sample(io, 0.5, 0.01)
    assert np.allclose(law.probs, 1 / 8)


def test_sample_single_vector():
    f = np.zeros(8, dtype=bool)
    f[5] = True
    eps, delta = 0.01, 0.05
    io = planted_indicator(f, np.where(f, eps, 0.0), 3, 2)
    law = q_sample(io, 0.5, delta)
    assert law.probs[5] >= 1 - delta - 2 * eps


def test_sample_from_circuit_oracle(two_level_oracle):
    io, _ = two_level_oracle
    law = q_sample(io, 0.4, 0.01)
    good = np.nonzero(io.good)[0]
    assert law.probs[good].sum() >= 0.98
    assert np.allclose(law.probs[good], law.probs[good].mean(), atol=1e-3)


def test_gl_linear_function():
    x = all_vectors(2, 2)
    f = (x @ np.array([1, 1])) % 2 == 1
    dist = gl_fourier_sample(planted_indicator(f, np.zeros(4), 2, 2))
    assert dist.probs[3] == pytest.approx(1.0, abs=1e-12)


def test_gl_half_space():
    X = all_vectors(3, 2)[:, 0] == 0
    dist = gl_fourier_sample(planted_indicator(X, np.zeros(8), 3, 2))
    coef = fourier_transform(X.astype(float), 3, 2).at((1, 0, 0))
    assert dist.probs[4] == pytest.approx(4 * abs(coef) ** 2, abs=1e-12)
    assert dist.probs[4] == pytest.approx(1.0, abs=1e-12)


@given(st.integers(0, 2 ** 31), st.sampled_from([(2, 3), (3, 2)]))
@settings(max_examples=20)
def test_gl_noise_bound_and_classical_match(seed, pn):
    p, n = pn
    N = p ** n
    rng = np.random.default_rng(seed)
    f = rng.random(N) < 0.5
    eps = 0.02
    err = rng.uniform(0, eps, N)
    io = planted_indicator(f, err, n, p)
    dist = gl_fourier_sample(io)
    g = fourier_transform(1 - 2 * f.astype(float), n, p).coeffs
    assert np.abs(dist.probs - np.abs(g) ** 2).max() <= 4 * eps
    ref = gl_distribution_from_membership(io.member_prob, n, p)
    assert np.allclose(dist.probs, ref.probs, atol=1e-12)
    assert dist.probs.sum() <= 1 + 1e-12 and dist.remainder >= 0


def test_gl_from_real_indicator(two_level_oracle):
    io, _ = two_level_oracle
    dist = gl_fourier_sample(io)
    ref = gl_distribution_from_membership(io.member_prob, 2, 2)
    assert np.allclose(dist.probs, ref.probs, atol=1e-12)


def test_learn_half_space():
    n = 4
    X = all_vectors(n, 2)[:, 0] == 0
    io = planted_indicator(X, np.zeros(16), n, 2)
    c = 0.5 ** 1.5
    hits = sum(learn_heavy_characters(io, c, 0.1, np.random.default_rng(s)).indices == (8,) for s in range(20))
    assert hits == 20


def test_learn_constant_and_subspace():
    io = planted_indicator(np.ones(16, dtype=bool), np.zeros(16), 4, 2)
    assert len(learn_heavy_characters(io, 0.3, 0.1, np.random.default_rng(0))) == 0
    X = (all_vectors(4, 2)[:, 0] == 0) & (all_vectors(4, 2)[:, 1] == 0)
    io = planted_indicator(X, np.zeros(16), 4, 2)
    R = learn_heavy_characters(io, 0.25, 0.1, np.random.default_rng(1))
    want = spec_threshold(fourier_transform(X.astype(float), 4, 2), 0.25)
    assert R.indices == want.indices and len(R) == 3


@given(st.integers(0, 2 ** 31), st.floats(0.1, 0.6))
@settings(max_examples=20)
def test_learn_size_bound(seed, c):
    rng = np.random.default_rng(seed)
    io = planted_indicator(rng.random(16) < 0.5, rng.uniform(0, 0.05, 16), 4, 2)
    R = learn_heavy_characters(io, c, 0.2, rng)
    assert len(R) <= 16 / c ** 2
    assert R.meta["shots"] == heavy_shots(c, 0.2, 16)
