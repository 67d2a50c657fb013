"""Brute-force reference implementations.

Everything here is written from definitions with plain loops so that it
shares no code path with the library.
"""
import itertools
import math

import numpy as np


def vectors(n, p):
    """All of F_p^n, coordinate 0 most significant."""
    return [tuple(v) for v in itertools.product(range(p), repeat=n)]


def index(v, p):
    k = 0
    for c in v:
        k = k * p + int(c)
    return k


def matvec(M, v, p):
    return tuple(sum(int(M[i][j]) * int(v[j]) for j in range(len(v))) % p for i in range(len(M)))


def dot(a, b, p):
    return sum(int(x) * int(y) for x, y in zip(a, b)) % p


def dft(f, n, p):
    """f_hat(y) = p^-n sum_x omega^(x.y) f(x)."""
    w = np.exp(2j * np.pi / p)
    V = vectors(n, p)
    return np.array([sum(f[index(x, p)] * w ** dot(x, y, p) for x in V) / p ** n for y in V])


def rref(rows, p):
    """Textbook Gauss-Jordan on lists of ints."""
    A = [[int(x) % p for x in r] for r in rows]
    if not A:
        return [], []
    m, n = len(A), len(A[0])
    piv, r = [], 0
    for c in range(n):
        k = next((i for i in range(r, m) if A[i][c]), None)
        if k is None:
            continue
        A[r], A[k] = A[k], A[r]
        inv = pow(A[r][c], -1, p)
        A[r] = [(x * inv) % p for x in A[r]]
        for i in range(m):
            if i != r and A[i][c]:
                f = A[i][c]
                A[i] = [(x - f * y) % p for x, y in zip(A[i], A[r])]
        piv.append(c)
        r += 1
        if r == m:
            break
    return A[:r], piv


def span(rows, p):
    """Every linear combination of ``rows``."""
    rows = [tuple(r) for r in rows]
    if not rows:
        return set()
    n = len(rows[0])
    out = set()
    for coeffs in itertools.product(range(p), repeat=len(rows)):
        out.add(tuple(sum(c * r[j] for c, r in zip(coeffs, rows)) % p for j in range(n)))
    return out


def four_fold(X, n, p):
    """Pr over x1, x2, x3 uniform that x1, x2, x3 and v - x1 - x2 - x3 are all in X, per v."""
    V = vectors(n, p)
    S = set(map(tuple, X))
    out = {}
    for v in V:
        c = 0
        for x1 in S:
            for x2 in S:
                for x3 in S:
                    x4 = tuple((v[j] - x1[j] - x2[j] - x3[j]) % p for j in range(n))
                    c += x4 in S
        out[v] = c / len(V) ** 3
    return out


def annihilator(R, n, p):
    return {v for v in vectors(n, p) if all(dot(v, r, p) == 0 for r in R)}


def chebyshev_T(L, x):
    x = float(x)
    if abs(x) <= 1:
        return math.cos(L * math.acos(x))
    return math.cosh(L * math.acosh(x))

