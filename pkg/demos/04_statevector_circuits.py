"""Mixed-radix state vectors and the matrix-vector product circuit.

Run: python3 demos/04_statevector_circuits.py
"""
import numpy as np

from qlinred.qsim import RegisterLayout, StateVector, distribution, qft, umv_circuit, vector_oracle

p, n = 3, 2
M = np.array([[1, 2], [0, 1]])
v = np.array([1, 1])
layout = RegisterLayout.of([("idx", n), ("col", n), ("m", p), ("u", p), ("acc", p)])
c = umv_circuit(n, p, M, idx="idx", col="col", m="m", u="u", acc="acc",
                v_read=lambda a, t: vector_oracle(v, a, t, p))

for i in range(n):
    out = c.apply(StateVector.basis(layout, {"idx": i}))
    acc = int(np.argmax(distribution(out, ["acc"])))
    print(f"row {i}: circuit gives {acc}, direct (Mv)_{i} = {(M @ v)[i] % p}, queries {out.counter.snapshot()}")

psi = qft("idx", n).apply(StateVector.basis(layout))
out = c.apply(psi)
print("on a superposition of rows the accumulator reads", distribution(out, ["acc"]).round(3))
