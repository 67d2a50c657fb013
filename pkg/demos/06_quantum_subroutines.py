"""Verification of a claimed product, indicator oracles, sampling, and Goldreich-Levin.

Run: python3 demos/06_quantum_subroutines.py
"""
import numpy as np

from qlinred.avgcase import SuccessProfile, make_planted_alg
from qlinred.fflinalg import all_vectors
from qlinred.qsub import (
    alg_verified,
    gl_fourier_sample,
    indicator_oracle,
    learn_heavy_characters,
    planted_indicator,
    q_sample,
    q_verify,
)

M = np.array([[1, 1], [0, 1]])
for b in ((1, 1), (0, 1)):
    r = q_verify(M, (0, 1), b, 0.05, p=2)
    print(f"verify M (0,1) = {b}: accept probability {r.accept_prob:.4f}, L = {r.L}")

alg = make_planted_alg(M, SuccessProfile(np.array([0.9, 0.05, 0.9, 0.05]), 2, 2))
io = indicator_oracle(alg_verified(alg, 0.01), 0.4)
print("indicator of {v : p_v high}: member probabilities", io.member_prob.round(4))
law = q_sample(io, 0.4, 0.01)
print("sampler output law:", law.probs.round(4), "failure weight", round(law.fail, 4))

n = 4
X = all_vectors(n, 2)[:, 0] == 0
noisy = planted_indicator(X, np.full(16, 0.02), n, 2)
dist = gl_fourier_sample(noisy)
print("Goldreich-Levin law on the half-space, top entries:",
      {int(i): round(float(dist.probs[i]), 4) for i in np.argsort(dist.probs)[::-1][:3]})
R = learn_heavy_characters(noisy, 0.5 ** 1.5, 0.1, np.random.default_rng(0))
print("learned heavy characters:", [v.tolist() for v in R], "from", R.meta["shots"], "shots")
