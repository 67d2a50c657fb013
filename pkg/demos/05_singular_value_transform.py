"""Threshold polynomials, singular value transformation, and fixed-point amplification.

Run: python3 demos/05_singular_value_transform.py
"""
import math

import numpy as np

from qlinred.qsim import Circuit, RegisterLayout, StateVector, UnitaryGate
from qlinred.qsvt import BlockEncoding, apply_svt, fixed_point_amplify, threshold_polynomial


def rotation(z):
    s = math.sqrt(1 - z * z)
    return np.array([[z, -s], [s, z]], dtype=complex)


P = threshold_polynomial(0.5, 0.2, 0.01)
print(f"threshold polynomial: degree {P.degree}, parity {P.parity}, sup norm {P.sup_norm():.6f}")
for x in (0.2, 0.35, 0.5, 0.65, 0.8):
    print(f"  P({x}) = {P(x):+.5f}")

layout = RegisterLayout.of([("q", 2)])
top = np.array([True, False])
for z in (0.3, 0.7):
    be = BlockEncoding(Circuit([UnitaryGate(["q"], rotation(z))]), layout, top, top)
    svt = apply_svt(be, P)
    print(f"block value {z} is mapped to {abs(svt.matrix()[0, 0]):.5f}")

for n in (2, 4, 9):
    a = 1 / (2 * math.sqrt(n))
    be = BlockEncoding(Circuit([UnitaryGate(["q"], rotation(math.sqrt(1 - a * a)).T)]), layout,
                       top, ~top)
    amp = fixed_point_amplify(be, a, 0.01)
    out = amp.apply(StateVector.basis(layout))
    print(f"amplitude {a:.3f} amplified to {abs(out.amps[1]):.5f} with L = {amp.L}")
