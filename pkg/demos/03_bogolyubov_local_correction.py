"""A dense set, its large Fourier characters, and four-fold sums.

Every vector y splits as y = s + x1 + x2 + x3 + x4 with x_i in X and a
sparse correction s read off a row-reduced basis of the heavy characters.

Run: python3 demos/03_bogolyubov_local_correction.py
"""
import numpy as np

from qlinred.additive import (
    bogolyubov_subspace,
    decompose,
    membership,
    uniform_sampler,
    verify_robust_bogolyubov,
)
from qlinred.fourier import fourier_transform, spec_threshold

from qlinred.fflinalg import all_vectors

n, p, alpha = 6, 2, 0.5
rng = np.random.default_rng(4)
# the half-space {v_1 = 0} with four members swapped for outsiders
X = all_vectors(n, p)[:, 0] == 0
X[rng.choice(np.nonzero(X)[0], 4, replace=False)] = False
X[rng.choice(np.nonzero(~X)[0][::2], 4, replace=False)] = True
R = spec_threshold(fourier_transform(X.astype(float), n, p), alpha ** 1.5)
V, cb = bogolyubov_subspace(R, n, p)
print(f"|X| = {X.sum()}, |R| = {len(R)}, dim V = {V.dim}, correction size t = {cb.t}")

rep = verify_robust_bogolyubov(X, R, alpha=alpha)
print(f"min over V of Pr[x1+x2+x3+x4 = v] = {rep.min_probability:.4f} (bound alpha^5 = {alpha ** 5:.4f})")

draw, member = uniform_sampler(X, n, p, rng), membership(X, n, p)
for y in ([1, 0, 1, 1, 0, 1], [0, 0, 0, 0, 0, 1]):
    d = decompose(y, cb, draw, member, alpha=alpha)
    parts = " + ".join(str(x.tolist()) for x in d.x)
    print(f"{y} = {d.s.tolist()} + {parts}  (attempts: {d.attempts})")
