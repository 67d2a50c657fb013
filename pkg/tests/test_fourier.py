import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from qlinred.fflinalg import all_vectors
from qlinred.fourier import (
    CharacterSet,
    convolution_probability,
    convolution_profile,
    fourier_convolution_profile,
    fourier_transform,
    indicator,
    inverse_fourier_transform,
    spec_threshold,
)


def half_space(n, p=2):
    return all_vectors(n, p)[:, 0] == 0


def test_constant_function():
    s = fourier_transform(np.ones(4), 2, 2)
    assert s.coeffs[0] == pytest.approx(1)
    assert np.allclose(s.coeffs[1:], 0)
    s3 = fourier_transform(np.ones(3), 1, 3)
    assert abs(s3.at((1,))) < 1e-12


def test_half_space_coefficients():
    s = fourier_transform(half_space(2).astype(float), 2, 2)
    assert s.at((0, 0)) == pytest.approx(0.5)
    assert s.at((1, 0)) == pytest.approx(0.5)
    assert abs(s.at((0, 1))) < 1e-12 and abs(s.at((1, 1))) < 1e-12


def test_spec_threshold_examples():
    s = fourier_transform(half_space(2).astype(float), 2, 2)
    assert [v.tolist() for v in spec_threshold(s, 0.4)] == [[1, 0]]
    assert len(spec_threshold(fourier_transform(np.ones(8), 3, 2), 0.01)) == 0
    assert len(spec_threshold(s, 2.0)) == 0


def test_character_set_rejects_zero():
    with pytest.raises(ValueError):
        CharacterSet((0, 1), 2, 2)


@given(st.sampled_from([(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (5, 1)]), st.data())
def test_transform_matches_definition(pn, data):
    p, n = pn
    f = np.array(data.draw(st.lists(st.floats(-3, 3), min_size=p ** n, max_size=p ** n)))
    assert np.allclose(fourier_transform(f, n, p).coeffs, oracles.dft(f, n, p), atol=1e-9)


@given(st.sampled_from([(2, 4), (3, 3), (5, 2), (7, 1)]), st.integers(0, 2 ** 31))
def test_parseval_and_round_trip(pn, seed):
    p, n = pn
    rng = np.random.default_rng(seed)
    X = rng.random(p ** n) < rng.random()
    s = fourier_transform(X.astype(float), n, p)
    assert abs(np.sum(np.abs(s.coeffs) ** 2) - X.mean()) <= 1e-9
    assert abs(s.coeffs[0] - X.mean()) <= 1e-12
    assert np.allclose(inverse_fourier_transform(s), X, atol=1e-9)


def test_convolution_examples():
    assert convolution_probability(np.ones(8, dtype=bool), (1, 0, 1), 3, 2) == 1.0
    # X = {v_1 = 0}: x1, x2, x3 in X with probability 1/8 and then x4 is in X automatically
    assert convolution_probability(half_space(3), (0, 0, 0), 3, 2) == pytest.approx(1 / 8)
    assert convolution_probability(np.zeros(8, dtype=bool), 0, 3, 2) == 0.0


@given(st.sampled_from([(2, 2), (2, 3), (3, 1), (3, 2)]), st.integers(0, 2 ** 31))
def test_convolution_counts_match_loops_and_fourier(pn, seed):
    p, n = pn
    rng = np.random.default_rng(seed)
    X = rng.random(p ** n) < 0.5
    prof = convolution_profile(X, n, p)
    want = oracles.four_fold([v for v in oracles.vectors(n, p) if X[oracles.index(v, p)]], n, p)
    assert np.allclose(prof, [want[v] for v in oracles.vectors(n, p)], atol=1e-12)
    fourier = fourier_convolution_profile(fourier_transform(X.astype(float), n, p))
    assert np.allclose(prof, fourier.real, atol=1e-9) and np.allclose(fourier.imag, 0, atol=1e-9)


@pytest.mark.parametrize("n", [4, 5, 6])
def test_fourier_identity_binary(n):
    rng = np.random.default_rng(n)
    X = rng.random(2 ** n) < 0.6
    prof = convolution_profile(X, n, 2)
    assert np.allclose(prof, fourier_convolution_profile(fourier_transform(X.astype(float), n, 2)).real,
                       atol=1e-9)


def test_indicator_forms_agree():
    vecs = [(0, 1), (1, 1)]
    a = indicator(vecs, 2, 2)
    b = indicator([1, 3], 2, 2)
    assert (a == b).all() and a.tolist() == [False, True, False, True]
