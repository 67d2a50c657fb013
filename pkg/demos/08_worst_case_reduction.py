"""Worst-case matrix-vector products from an average-case algorithm.

The "footnote-adversary" instance is correct only when v_1 = 1.  The reduction still
returns M v for every input, and every returned vector was verified.

Run: python3 demos/08_worst_case_reduction.py
"""
import numpy as np

from qlinred.avgcase import generate_instance
from qlinred.fflinalg import index_to_vector
from qlinred.reduction import ReductionConfig, Solver, large_field_reduce, matrix_shift_reduce

inst = generate_instance("footnote-adversary", 4)
alg = inst.planted()
base = Solver(alg, ReductionConfig(alpha=0.5))
wins = np.zeros(16)
for seed in range(50):
    sol = base.with_seed(seed)
    for v in range(16):
        res = sol.solve(v)
        wins[v] += res.success and (res.b == (alg.M @ index_to_vector(v, 4, 2)) % 2).all()
print("per-input success over 50 seeds:", (wins / 50).round(2).tolist())

res = Solver(alg, ReductionConfig(alpha=0.5, seed=7)).solve(0)
learn = res.trace.learns[0]
print(f"v = 0: threshold r = {learn.r}, |R| = {learn.size_R}, t = {learn.t}, attempts {res.attempts}")
for rec in res.trace.attempts:
    print(f"  x = {rec.x}, s = {rec.s}, stage {rec.stage}")
print(f"  queries: U_M {res.queries_UM:.3e}, ALG {res.queries_ALG}")

shift = generate_instance("matrix-avg", 2, seed=0, level=1.0)
M = np.array([[1, 0], [1, 1]])
r = matrix_shift_reduce(shift.algorithm_for, M, (1, 1), ReductionConfig(alpha=0.5, seed=3))
print(f"matrix shift: success {r.success}, b = {r.b.tolist()}, matrix draws {r.attempts}")

big = generate_instance("random-profile", 2, p=11, seed=2, alpha=0.92).planted()
r = large_field_reduce(big, (3, 5), ReductionConfig(alpha=0.92, seed=1))
print(f"interpolation over F_11: b = {r.b.tolist()}, M v = {((big.M @ [3, 5]) % 11).tolist()}")
