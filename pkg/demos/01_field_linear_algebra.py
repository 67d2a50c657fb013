"""Arithmetic and row reduction over a prime field.

Run: python3 demos/01_field_linear_algebra.py
"""
import numpy as np

from qlinred.fflinalg import FieldElement, FpMatrix, FpVector, field_arith, matvec, rref_with_pivots

p = 7
a, b = FieldElement(3, p), FieldElement(4, p)
print(f"In F_{p}: 3 + 4 = {field_arith(a, b, 'add').value}, 3 * 4 = {field_arith(a, b, 'mul').value}, "
      f"3 / 4 = {field_arith(a, b, 'div').value}, 1 / 3 = {field_arith(a, b, 'inv').value}")

M = FpMatrix([[1, 2, 3], [0, 1, 4], [5, 6, 0]], p)
v = FpVector((1, 1, 1), p)
print("M v =", matvec(M, v).tolist())

rows = [FpVector(r, p) for r in ([1, 2, 3], [2, 4, 6], [0, 1, 4])]
res = rref_with_pivots(rows)
print("row-reduced basis:", [r.tolist() for r in res.basis])
print("pivot columns (0-based):", res.pivots, "rank:", res.rank)
print("the basis matrix has an identity on the pivot columns:")
print(np.asarray(res.matrix(3))[:, list(res.pivots)])
