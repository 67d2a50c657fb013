import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from qlinred.qsim import Circuit, RegisterLayout, StateVector, UnitaryGate
from qlinred.qsvt import (
    BlockEncoding,
    BoundedPolynomial,
    apply_svt,
    fixed_point_amplify,
    fpaa_length,
    fpaa_success_probability,
    sign_polynomial,
    threshold_polynomial,
)

GRID = list(itertools.product((0.3, 0.5, 0.7), (0.05, 0.1, 0.2), (0.1, 0.01, 0.001)))


def rotation(z):
    s = math.sqrt(1 - z * z)
    return np.array([[z, -s], [s, z]], dtype=complex)


def planted_block(values, extra_dim=2, seed=0):
    """A unitary whose top-left block has the given singular values."""
    rng = np.random.default_rng(seed)
    k = len(values)
    D = k * extra_dim
    B = np.zeros((D, D), dtype=complex)
    for i, z in enumerate(values):
        R = rotation(z)
        B[np.ix_([i, k + i], [i, k + i])] = R
    Q1, _ = np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))
    Q2, _ = np.linalg.qr(rng.normal(size=(k, k)) + 1j * rng.normal(size=(k, k)))
    L = np.eye(D, dtype=complex)
    Rm = np.eye(D, dtype=complex)
    L[:k, :k], Rm[:k, :k] = Q1, Q2
    U = L @ B @ Rm
    layout = RegisterLayout.of([("a", D)])
    mask = np.arange(D) < k
    return BlockEncoding(Circuit([UnitaryGate(["a"], U, "U", query="U")]), layout, mask, mask, "BE"), U


@pytest.mark.parametrize("t,delta,eps", GRID)
def test_threshold_polynomial_grid(t, delta, eps):
    P = threshold_polynomial(t, delta, eps)
    x = np.linspace(0, 1, 20001)
    y = P(x)
    assert np.abs(y).max() <= 1 + 1e-6
    assert y[x >= t + delta / 2].min() >= 1 - eps
    assert np.abs(y[x <= t - delta / 2]).max() <= eps
    assert P.parity == "even"
    assert np.allclose(P(-x), y)


def test_threshold_polynomial_example():
    P = threshold_polynomial(0.5, 0.2, 0.01)
    assert P(0.7) >= 0.99 and abs(P(0.3)) <= 0.01
    assert abs(P(0.5)) <= 1


def test_degree_monotone():
    assert threshold_polynomial(0.5, 0.2, 0.49).degree < threshold_polynomial(0.5, 0.2, 0.01).degree
    for t in (0.3, 0.5, 0.7):
        d = {(de, e): threshold_polynomial(t, de, e).degree for tt, de, e in GRID if tt == t}
        for (de, e), deg in d.items():
            for (de2, e2), deg2 in d.items():
                if de2 >= de and e2 >= e:
                    assert deg2 <= deg


def test_threshold_polynomial_rejects_bad_params():
    for args in [(0.5, 0.0, 0.1), (0.1, 0.3, 0.1), (0.5, 0.1, 1.0), (1.2, 0.1, 0.1)]:
        with pytest.raises(ValueError):
            threshold_polynomial(*args)


def test_sign_polynomial():
    P = sign_polynomial(0.1, 0.01)
    x = np.linspace(0.1, 1, 2000)
    assert P(x).min() >= 0.99 and np.allclose(P(-x), -P(x))
    assert P.sup_norm() <= 1 + 1e-6


def test_identity_polynomial_keeps_block():
    be, U = planted_block([0.3, 0.6, 0.9])
    svt = apply_svt(be, BoundedPolynomial(np.array([0.0, 1.0]), "odd", {}))
    # ext is the last wire, so the block sits at even indices
    top = svt.matrix()[::2, ::2][np.ix_(be.pi_out, be.pi_in)]
    assert np.abs(top - U[:3, :3]).max() <= 1e-8


@pytest.mark.parametrize("z,bound", [(0.8, "high"), (0.2, "low")])
def test_single_value_threshold(z, bound):
    layout = RegisterLayout.of([("q", 2)])
    m = np.array([True, False])
    be = BlockEncoding(Circuit([UnitaryGate(["q"], rotation(z))]), layout, m, m)
    svt = apply_svt(be, threshold_polynomial(0.5, 0.2, 0.01))
    val = abs(svt.matrix()[0, 0])
    assert (val >= 0.99) if bound == "high" else (val <= 0.01)


@given(st.integers(0, 2 ** 31))
def test_svt_singular_pairs_and_unitarity(seed):
    rng = np.random.default_rng(seed)
    vals = sorted(rng.uniform(0.05, 0.99, 3))
    be, _ = planted_block(vals, seed=seed)
    P = threshold_polynomial(0.5, 0.2, 0.01)
    svt = apply_svt(be, P)
    M = svt.matrix()
    assert np.abs(M.conj().T @ M - np.eye(M.shape[0])).max() <= 1e-9
    block = M[::2, ::2]
    for j in range(svt.values.size):
        w, v = svt.W[:, j], svt.V[:, j]
        assert abs(w.conj() @ block @ v - P(svt.zeta[j])) <= 1e-8
    assert np.allclose(np.sort(svt.zeta), vals, atol=1e-10)


def test_zeta_table():
    t, delta, eps = 0.5, 0.2, 0.01
    be, _ = planted_block([0.2, t, 0.8])
    P = threshold_polynomial(t, delta, eps)
    svt = apply_svt(be, P)
    got = dict(zip(np.round(svt.zeta, 10), svt.values))
    assert abs(got[0.2]) <= eps and got[0.8] >= 1 - eps and abs(got[0.5]) <= 1
    for z, v in got.items():
        assert abs(v - P(z)) <= 1e-8


def test_svt_counts_queries():
    be, _ = planted_block([0.5, 0.7])
    P = threshold_polynomial(0.5, 0.2, 0.1)
    svt = apply_svt(be, P)
    st_ = svt.apply(StateVector.basis(svt.layout))
    assert st_.counter["U"] == P.degree and st_.counter["BE"] == P.degree


@given(st.floats(0.02, 1.0), st.floats(1e-4, 0.9))
def test_fpaa_formula_matches_chebyshev(a, eps):
    L = 7
    gi = math.cosh(math.acosh(1 / eps) / L)
    want = 1 - eps ** 2 * oracles.chebyshev_T(L, gi * math.sqrt(1 - a * a)) ** 2
    assert fpaa_success_probability(a, L, eps) == pytest.approx(want, abs=1e-9)


@pytest.mark.parametrize("n", [2, 4, 9])
def test_fpaa_from_worst_case_amplitude(n):
    a = 1 / (2 * math.sqrt(n))
    eps = 0.01
    layout = RegisterLayout.of([("q", 2)])
    be = BlockEncoding(Circuit([UnitaryGate(["q"], rotation(math.sqrt(1 - a * a)).T)]), layout,
                       np.array([True, False]), np.array([False, True]))
    amp = fixed_point_amplify(be, a, eps)
    out = amp.apply(StateVector.basis(layout))
    weight = abs(out.amps[1]) ** 2
    assert weight >= 1 - eps ** 2 - 1e-12
    assert math.sqrt(weight) >= 1 - eps
    assert weight == pytest.approx(fpaa_success_probability(a, amp.L, eps), abs=1e-12)


def test_fpaa_trivial_and_length_growth():
    assert fpaa_length(1.0, 0.1) == 1
    d = 0.25
    L_big, L_small = fpaa_length(d, 0.5), fpaa_length(d, 0.001)
    ratio = math.acosh(1 / 0.001) / math.acosh(1 / 0.5)
    assert L_small > L_big
    assert abs(L_small / L_big - ratio) <= 2 * ratio / L_big + 1
    assert all(fpaa_length(d, e) % 2 == 1 for e in (0.5, 0.1, 0.001))


def test_fpaa_keeps_zero_amplitude():
    layout = RegisterLayout.of([("q", 2)])
    be = BlockEncoding(Circuit([UnitaryGate(["q"], np.eye(2))]), layout,
                       np.array([True, False]), np.array([False, True]))
    out = fixed_point_amplify(be, 0.2, 0.1).apply(StateVector.basis(layout))
    assert abs(out.amps[1]) == 0.0


def test_fpaa_inverse():
    layout = RegisterLayout.of([("q", 2)])
    be = BlockEncoding(Circuit([UnitaryGate(["q"], rotation(0.9).T)]), layout,
                       np.array([True, False]), np.array([False, True]))
    amp = fixed_point_amplify(be, 0.3, 0.05)
    M = amp.matrix()
    assert np.allclose(amp.inverse().matrix() @ M, np.eye(2))
