"""Fourier coefficients of subsets of F_p^n and their heavy characters.

Run: python3 demos/02_fourier_spectrum.py
"""
import numpy as np

from qlinred.fflinalg import all_vectors
from qlinred.fourier import (
    convolution_probability,
    fourier_transform,
    inverse_fourier_transform,
    spec_threshold,
)

n, p = 4, 2
D = all_vectors(n, p)
X = D[:, 0] == 0
spec = fourier_transform(X.astype(float), n, p)
print("half-space {v_1 = 0} in F_2^4 has density", X.mean())
print("nonzero coefficients:", {tuple(D[i].tolist()): round(float(spec.coeffs[i].real), 4)
                                for i in np.nonzero(np.abs(spec.coeffs) > 1e-12)[0]})
print("characters above 0.3:", [v.tolist() for v in spec_threshold(spec, 0.3)])
print("round-trip error:", np.abs(inverse_fourier_transform(spec) - X).max())

rng = np.random.default_rng(0)
Y = rng.random(3 ** 3) < 0.5
spec3 = fourier_transform(Y.astype(float), 3, 3)
print("\nrandom subset of F_3^3, density", round(Y.mean(), 3))
print("Parseval:", round(Y.mean(), 12), "=", round(float(np.sum(np.abs(spec3.coeffs) ** 2)), 12))
print("Pr[x1+x2+x3+x4 = 0 for x_i uniform in Y]:", round(convolution_probability(Y, (0, 0, 0), 3, 3), 6))
