import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlinred.avgcase import (
    INSTANCE_KINDS,
    Instance,
    SuccessProfile,
    band_success_fraction,
    check_band,
    generate_instance,
    make_planted_alg,
    make_threshold,
    random_threshold,
    threshold_K,
    threshold_set,
    verify_density,
)
from qlinred.fflinalg import all_vectors
from qlinred.fourier import fourier_transform


def success_from_amplitudes(alg, v):
    col = alg.blocks()[v][:, 0]
    z = alg.answer(v)
    return float(np.sum(np.abs(col[2 * z:2 * z + 2]) ** 2))


def test_perfect_alg_maps_to_answer():
    M = np.array([[1, 1], [0, 1]])
    alg = make_planted_alg(M, SuccessProfile(np.ones(4), 2, 2))
    for v in range(4):
        col = alg.blocks()[v][:, 0]
        assert abs(col[2 * alg.answer(v)]) == pytest.approx(1.0)


def test_first_coordinate_adversary_mean():
    inst = generate_instance("footnote-adversary", 4)
    assert inst.success_profile().mean == 0.5
    assert (inst.M == np.eye(4)).all()


def test_uniform_quarter():
    alg = make_planted_alg(np.eye(3, dtype=int), SuccessProfile(np.full(8, 0.25), 3, 2))
    assert np.mean([success_from_amplitudes(alg, v) for v in range(8)]) == pytest.approx(0.25, abs=1e-12)


@given(st.sampled_from([(2, 3), (3, 2)]), st.sampled_from(["single-adjacent-wrong", "uniform-wrong"]),
       st.integers(0, 2 ** 31))
def test_planted_unitary_and_success(pn, policy, seed):
    p, n = pn
    rng = np.random.default_rng(seed)
    probs = rng.uniform(0, 1, p ** n)
    probs[rng.integers(p ** n)] = 1.0
    probs[rng.integers(p ** n)] = 0.0
    alg = make_planted_alg(rng.integers(0, p, (n, n)), SuccessProfile(probs, n, p), policy)
    assert alg.unitarity_defect() <= 1e-9
    for v in range(p ** n):
        assert success_from_amplitudes(alg, v) == pytest.approx(probs[v], abs=1e-9)
        zs, ps = alg.output_distribution(v)
        assert ps.sum() == pytest.approx(1.0)


def test_wrong_answers_avoid_the_answer():
    alg = make_planted_alg(np.eye(2, dtype=int), SuccessProfile(np.zeros(4), 2, 2),
                           "custom", wrong=lambda v: {v: 1.0})
    with pytest.raises(ValueError):
        alg.output_distribution(1)
    with pytest.raises(ValueError):
        make_planted_alg(np.eye(2, dtype=int), SuccessProfile(np.zeros(4), 2, 2), "nope")
    with pytest.raises(ValueError):
        SuccessProfile(np.full(4, 1.5), 2, 2)


def test_threshold_set_examples():
    D = all_vectors(3, 2)
    prof = SuccessProfile(np.where(D[:, 0] == 0, 0.8, 0.1), 3, 2)
    assert (threshold_set(prof, 0.5) == (D[:, 0] == 0)).all()
    assert threshold_set(prof, 0.1).all()
    assert not threshold_set(prof, 0.9).any()


def test_verify_density_examples():
    rep = verify_density(generate_instance("footnote-adversary", 5).success_profile(), 0.5)
    assert rep.holds and rep.premise and rep.min_density == 0.5
    flat = SuccessProfile(np.full(16, 0.3), 4, 2)
    assert threshold_set(flat, 0.15).all() and verify_density(flat, 0.3).holds


def test_verify_density_boundary():
    # five entries sit exactly at alpha/2 and still count as members of X_{alpha/2}
    a = 0.5
    prof = SuccessProfile(np.array([0.25] * 5 + [1.0] * 3), 3, 2)
    assert prof.mean >= a
    rep = verify_density(prof, a)
    assert rep.holds and rep.worst_kappa == a / 2 and rep.min_density == 1.0


def test_verify_density_reports_premise():
    rep = verify_density(SuccessProfile(np.full(4, 0.1), 2, 2), 0.5)
    assert not rep.premise


@pytest.mark.parametrize("kind", INSTANCE_KINDS)
@pytest.mark.parametrize("seed", range(5))
def test_density_claim_on_generated(kind, seed):
    inst = generate_instance(kind, 5, seed=seed)
    prof = inst.success_profile()
    a = prof.mean
    rep = verify_density(prof, a)
    assert rep.premise and rep.holds


def test_threshold_pair_invariants():
    for a in (0.25, 0.5, 1.0):
        K = threshold_K(a)
        for r in range(1, K + 1):
            tp = make_threshold(a, r)
            assert a / 4 <= tp.tau <= a / 2 + 1e-12
            assert tp.tau - tp.tau_prime == pytest.approx(a / (4 * K))
    alg_band = make_threshold(0.5, 3, band="wide")
    assert alg_band.tau - alg_band.tau_prime == pytest.approx(1 / alg_band.K)
    with pytest.raises(ValueError):
        make_threshold(0.5, 0)


def test_random_threshold_is_uniform():
    rng = np.random.default_rng(0)
    rs = [random_threshold(0.5, rng, K=8).r for _ in range(4000)]
    counts = np.bincount(rs, minlength=9)[1:]
    assert counts.min() > 400


def test_spread_profile_band():
    inst = generate_instance("spread", 6, seed=1)
    prof = inst.success_profile()
    a = prof.mean
    assert band_success_fraction(prof, a, K=8) > 0.5
    for r in range(1, 9):
        rep = check_band(prof, make_threshold(a, r, 8))
        assert rep.fourier_gap <= rep.gap + 1e-12


def test_band_empty():
    D = all_vectors(4, 2)
    prof = SuccessProfile(np.where(D[:, 0] == 0, 0.9, 0.05), 4, 2)
    for r in range(1, 9):
        assert check_band(prof, make_threshold(0.45, r, 8)).gap == 0


def test_single_band():
    rep = check_band(SuccessProfile(np.linspace(0, 1, 16), 4, 2), make_threshold(0.5, 1, 1))
    assert rep.tp.K == 1 and rep.bound == 2.0 and rep.within


@given(st.integers(0, 2 ** 31), st.integers(1, 8))
def test_fourier_closeness_in_band(seed, r):
    rng = np.random.default_rng(seed)
    n = 5
    prof = SuccessProfile(rng.permutation(32) / 32, n, 2)
    a = prof.mean
    tp = make_threshold(a, r, 8)
    hi, lo = threshold_set(prof, tp.tau), threshold_set(prof, tp.tau_prime)
    X = hi | (lo & (rng.random(32) < 0.5))
    gap = X.mean() - hi.mean()
    diff = fourier_transform(X.astype(float), n, 2).coeffs - fourier_transform(hi.astype(float), n, 2).coeffs
    assert np.abs(diff).max() <= gap + 1e-12


def test_random_profile_mean():
    for seed in range(5):
        inst = generate_instance("random-profile", 6, seed=seed, alpha=0.25)
        assert abs(inst.success_profile().mean - 0.25) <= 0.02


def test_generator_rejects():
    with pytest.raises(ValueError):
        generate_instance("coset", 3, coset=[])
    with pytest.raises(ValueError):
        generate_instance("coset", 3, coset=[(5, 1)])
    with pytest.raises(ValueError):
        generate_instance("unknown", 3)
    with pytest.raises(ValueError):
        generate_instance("half-space", 3, p=4)
    with pytest.raises(ValueError):
        generate_instance("half-space", 3, level=0.0)


def test_generator_deterministic_and_coset():
    a, b = generate_instance("random-profile", 4, seed=9), generate_instance("random-profile", 4, seed=9)
    assert a.to_json() == b.to_json()
    inst = generate_instance("coset", 3, coset=[(0, 1), (2, 0)], level=0.8)
    D = all_vectors(3, 2)
    assert (inst.profile == np.where((D[:, 0] == 1) & (D[:, 2] == 0), 0.8, 0.0)).all()


def test_matrix_avg_good_matrices():
    inst = generate_instance("matrix-avg", 2, seed=0)
    assert inst.good_entries == [(0, 0, 0)]
    good = np.array([[0, 1], [1, 1]])
    assert inst.is_good_matrix(good) and not inst.is_good_matrix([[1, 1], [1, 1]])
    assert inst.algorithm_for([[1, 1], [1, 1]]).profile.mean == 0
    assert inst.algorithm_for(good).profile.mean == pytest.approx(0.9)


def test_json_round_trip():
    inst = generate_instance("matrix-avg", 3, p=3, seed=4)
    back = Instance.from_json(inst.to_json())
    assert back.to_json() == inst.to_json()
    d = json.loads(inst.to_json())
    assert {"p", "n", "M", "profile", "policy", "seed"} <= set(d)
    d["p"] = 4
    with pytest.raises(ValueError):
        Instance.from_dict(d)
