"""Singular-value transformation and fixed-point amplitude amplification.

The transformation is idealised: the block ``Pi_out U Pi_in`` is read off by
simulation, decomposed by SVD, its singular values are mapped through a
bounded polynomial and the result is completed to a unitary by the standard
two-block dilation on one extra qubit.  Phase factors are never synthesised.

Fixed-point amplification is a real circuit built from ``U``, ``U^-1`` and
phase reflections, using the closed-form phases of Yoder, Low and Chuang.
It acts on every singular vector of the block at once, so it can be applied
to states that are in superposition over other registers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial import chebyshev as C
from scipy.special import erf, erfcinv

from .qsim import Circuit, QueryCounter, RegisterLayout, StateVector

__all__ = [
    "BoundedPolynomial",
    "threshold_polynomial",
    "sign_polynomial",
    "BlockEncoding",
    "SVTUnitary",
    "apply_svt",
    "FixedPointAmplifier",
    "fixed_point_amplify",
    "fpaa_length",
    "fpaa_success_probability",
    "SUP_TOLERANCE",
]

SUP_TOLERANCE = 1e-6
# Degree scale for erf-type targets: deg ~ DEGREE_SCALE * sqrt((k^2 + L) L)
DEGREE_SCALE = 1.4


@dataclass(frozen=True)
class BoundedPolynomial:
    """Real polynomial on [-1, 1] in the Chebyshev basis, with ``sup |P| <= 1``."""

    coeffs: np.ndarray
    parity: str | None = None
    params: dict = field(default_factory=dict, compare=False)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        return C.chebval(np.asarray(x, dtype=float), self.coeffs)

    def grid(self, points: int | None = None) -> np.ndarray:
        points = points or max(10_000, 20 * (self.degree + 1))
        # Chebyshev-Lobatto points resolve the oscillation near +-1
        k = np.arange(points)
        return np.union1d(np.cos(np.pi * k / (points - 1)), np.linspace(-1, 1, points))

    def sup_norm(self, points: int | None = None) -> float:
        return float(np.max(np.abs(self(self.grid(points)))))


def _fit(target: Callable, degree: int, parity: str) -> np.ndarray:
    c = C.chebinterpolate(target, degree)
    drop = 1 if parity == "even" else 0
    c[drop::2] = 0.0
    return c


def _degree(k: float, eta: float, parity: str) -> int:
    L = math.log(1.0 / eta)
    d = int(math.ceil(DEGREE_SCALE * math.sqrt((k * k + L) * L))) + 2
    want = 0 if parity == "even" else 1
    return d + ((d - want) % 2)


def _build(target, k, eta, parity, check) -> tuple[np.ndarray, int]:
    d = _degree(k, eta, parity)
    for _ in range(64):
        c = _fit(target, d, parity)
        # the check grid must resolve oscillations of a degree-d polynomial
        xs = np.cos(np.pi * np.arange(4 * d + 1) / (4 * d))
        if np.max(np.abs(C.chebval(xs, c) - target(xs))) <= eta and check(c):
            return c, d
        d += 2 * max(1, d // 50)
    raise RuntimeError("polynomial fit did not converge")


def threshold_polynomial(t: float, delta: float, eps: float) -> BoundedPolynomial:
    """Even polynomial separating singular values above and below ``t``.

    Guarantees ``P >= 1 - eps`` on ``[t + delta/2, 1]``, ``|P| <= eps`` on
    ``[0, t - delta/2]`` and ``|P| <= 1`` on ``[-1, 1]``.  The target is a
    smoothed window built from two error functions, scaled by ``1 - eps/4``
    and approximated to within ``eps/4``.

    Raises
    ------
    ValueError
        Unless ``0 < delta < min(t, 1 - t)`` and ``0 < eps < 1``.
    """
    if not (0 < t < 1 and 0 < delta < min(t, 1 - t) and 0 < eps < 1):
        raise ValueError(f"infeasible threshold parameters t={t}, delta={delta}, eps={eps}")
    eta = eps / 4
    k = 2.0 * float(erfcinv(eta)) / delta
    scale = 1.0 - eta

    def target(x):
        return scale * (1.0 + 0.5 * (erf(k * (x - t)) - erf(k * (x + t))))

    lo = np.linspace(0, t - delta / 2, 400)
    hi = np.linspace(t + delta / 2, 1, 400)

    def check(c):
        return (C.chebval(hi, c).min() >= 1 - eps and np.abs(C.chebval(lo, c)).max() <= eps)

    c, d = _build(target, k, eta, "even", check)
    P = BoundedPolynomial(c, "even", dict(kind="threshold", t=t, delta=delta, eps=eps, k=k))
    if P.sup_norm() > 1 + SUP_TOLERANCE:
        raise RuntimeError("threshold polynomial exceeds the unit bound")
    return P


def sign_polynomial(delta: float, eps: float) -> BoundedPolynomial:
    """Odd polynomial with ``P >= 1 - eps`` on ``[delta, 1]`` and ``|P| <= 1``."""
    if not (0 < delta < 1 and 0 < eps < 1):
        raise ValueError("need 0 < delta < 1 and 0 < eps < 1")
    eta = eps / 4
    k = float(erfcinv(eta)) / delta
    scale = 1.0 - eta

    def target(x):
        return scale * erf(k * x)

    hi = np.linspace(delta, 1, 400)
    c, d = _build(target, k, eta, "odd", lambda c: C.chebval(hi, c).min() >= 1 - eps)
    return BoundedPolynomial(c, "odd", dict(kind="sign", delta=delta, eps=eps, k=k))


# ------------------------------------------------------------ block encodings

@dataclass
class BlockEncoding:
    """A unitary ``U`` on ``layout`` with input and output projector masks.

    ``U`` is anything with ``apply(StateVector)`` and ``inverse()``; a
    :class:`~qlinred.qsim.Circuit` is the usual choice.
    """

    U: object
    layout: RegisterLayout
    pi_in: np.ndarray
    pi_out: np.ndarray
    label: str = "U"

    def __post_init__(self):
        D = self.layout.total_dim
        self.pi_in = np.asarray(self.pi_in, dtype=bool).reshape(-1)
        self.pi_out = np.asarray(self.pi_out, dtype=bool).reshape(-1)
        if self.pi_in.shape != (D,) or self.pi_out.shape != (D,):
            raise ValueError("projector masks must cover the layout")
        self._columns = None

    def columns(self) -> tuple[np.ndarray, dict[str, int]]:
        """``U`` applied to every basis state in the range of ``pi_in``.

        Returns the output columns and the oracle counts of a single pass.
        """
        if self._columns is None:
            idx = np.nonzero(self.pi_in)[0]
            st = self.U.apply(StateVector.columns(self.layout, idx))
            self._columns = (st.amps, st.counter.snapshot())
        return self._columns

    def block(self) -> np.ndarray:
        cols, _ = self.columns()
        return cols[self.pi_out]


class SVTUnitary:
    """Two-block dilation of ``B = sum_j P(zeta_j) |w_j><v_j|``.

    Acts on ``layout`` extended by one qubit ``ext``; the block sits at
    ``ext = 0``.  With ``T_B = sqrt(I - B^dag B)`` the unitary is
    ``[[B, sqrt(I - B B^dag)], [T_B, -B^dag]]``.
    """

    def __init__(self, layout: RegisterLayout, W: np.ndarray, V: np.ndarray, values: np.ndarray,
                 zeta: np.ndarray, poly: BoundedPolynomial, inner_counts: dict[str, int],
                 ext: str = "ext", label: str = "SVT", adjoint: bool = False):
        self.base = layout
        self.layout = layout.extend([(ext, 2)])
        self.ext = ext
        self.W, self.V = W, V
        self.values = values
        self.zeta = zeta
        self.poly = poly
        self.inner_counts = dict(inner_counts)
        self.label = label
        self.adjoint = adjoint
        self._gap = 1.0 - np.sqrt(np.clip(1.0 - values ** 2, 0.0, None))

    @property
    def cost(self) -> int:
        """Uses of the encoded unitary charged per application."""
        return max(self.poly.degree, 1)

    def _B(self, x, dag=False):
        if dag:
            return self.V @ (self.values[:, None] * (self.W.conj().T @ x))
        return self.W @ (self.values[:, None] * (self.V.conj().T @ x))

    def _defect(self, x, left=False):
        Q = self.W if left else self.V
        return x - Q @ (self._gap[:, None] * (Q.conj().T @ x))

    def apply_array(self, psi: np.ndarray) -> np.ndarray:
        extra = psi.shape[1:]
        D = self.base.total_dim
        t = psi.reshape(D, 2, -1)
        a, b = t[:, 0, :], t[:, 1, :]
        if not self.adjoint:
            top = self._B(a) + self._defect(b, left=True)
            bot = self._defect(a) - self._B(b, dag=True)
        else:
            top = self._B(a, dag=True) + self._defect(b)
            bot = self._defect(a, left=True) - self._B(b)
        out = np.stack([top, bot], axis=1)
        return out.reshape((D * 2,) + extra)

    def apply(self, state: StateVector) -> StateVector:
        if state.layout != self.layout:
            raise ValueError("state layout does not match the dilated layout")
        state.counter.add(self.label, self.cost)
        for k, v in self.inner_counts.items():
            state.counter.add(k, v * self.cost)
        return state.with_amps(self.apply_array(state.amps))

    def inverse(self) -> "SVTUnitary":
        return SVTUnitary(self.base, self.W, self.V, self.values, self.zeta, self.poly,
                          self.inner_counts, self.ext, self.label, not self.adjoint)

    def block(self) -> np.ndarray:
        """The transformed block as a dense ``D x D`` matrix (small layouts only)."""
        return (self.W * self.values) @ self.V.conj().T

    def matrix(self, max_dim: int = 2 ** 12) -> np.ndarray:
        D = self.layout.total_dim
        if D > max_dim:
            raise ValueError(f"dimension {D} exceeds the dense limit {max_dim}")
        return self.apply_array(np.eye(D, dtype=complex))


def apply_svt(be: BlockEncoding, P: BoundedPolynomial, ext: str = "ext",
              tol: float = 1e-12) -> SVTUnitary:
    """Idealised singular-value transformation of ``Pi_out U Pi_in``.

    Singular values below ``tol`` are dropped: their singular vectors are
    not defined, and both polynomial families used here vanish or nearly
    vanish there.
    """
    cols, counts = be.columns()
    A = cols[be.pi_out]
    Wl, s, Vh = np.linalg.svd(A, full_matrices=False)
    keep = s > tol
    Wl, s, Vh = Wl[:, keep], np.clip(s[keep], 0.0, 1.0), Vh[keep]
    D = be.layout.total_dim
    W = np.zeros((D, s.size), dtype=complex)
    W[be.pi_out] = Wl
    V = np.zeros((D, s.size), dtype=complex)
    V[np.nonzero(be.pi_in)[0]] = Vh.conj().T
    values = np.asarray(P(s), dtype=float)
    if np.any(np.abs(values) > 1 + SUP_TOLERANCE):
        raise ValueError("polynomial exceeds 1 on a singular value")
    values = np.clip(values, -1.0, 1.0)
    return SVTUnitary(be.layout, W, V, values, s, P, counts, ext, be.label)


# ------------------------------------------------------ fixed-point search

def fpaa_length(delta_lb: float, eps: float) -> int:
    """Smallest odd sequence length reaching target weight ``1 - eps**2``.

    The guarantee holds for every initial target amplitude ``>= delta_lb``.
    """
    if not (0 < delta_lb <= 1 and 0 < eps < 1):
        raise ValueError("need 0 < delta_lb <= 1 and 0 < eps < 1")
    if delta_lb >= 1:
        return 1
    need = math.acosh(1.0 / eps) / math.acosh(1.0 / math.sqrt(1.0 - delta_lb ** 2))
    L = max(1, math.ceil(need - 1e-12))
    return L if L % 2 else L + 1


def _phases(L: int, eps: float) -> tuple[np.ndarray, np.ndarray]:
    l = (L - 1) // 2
    gamma_inv = math.cosh(math.acosh(1.0 / eps) / L)
    root = math.sqrt(max(0.0, 1.0 - 1.0 / gamma_inv ** 2))
    j = np.arange(1, l + 1)
    alpha = 2.0 * np.arctan2(1.0, np.tan(2 * np.pi * j / L) * root)
    beta = -alpha[::-1]
    return alpha, beta


def fpaa_success_probability(amplitude, L: int, eps: float):
    """Exact target weight after the length-``L`` sequence.

    ``1 - eps**2 T_L(T_{1/L}(1/eps) sqrt(1 - a**2))**2``.
    """
    a = np.asarray(amplitude, dtype=float)
    gamma_inv = math.cosh(math.acosh(1.0 / eps) / L)
    x = gamma_inv * np.sqrt(np.clip(1.0 - a ** 2, 0.0, 1.0))
    T = np.where(x <= 1, np.cos(L * np.arccos(np.clip(x, -1, 1))),
                 np.cosh(L * np.arccosh(np.maximum(x, 1.0))))
    return 1.0 - eps ** 2 * T ** 2


class FixedPointAmplifier:
    """``G_l ... G_1 U`` with ``G_j = -U S_in(alpha_j) U^-1 S_out(beta_j)``.

    ``S_in(a)`` multiplies the range of ``pi_in`` by ``exp(i a)`` and
    ``S_out(b)`` multiplies the range of ``pi_out`` by ``exp(-i b)``.
    """

    def __init__(self, be: BlockEncoding, L: int, eps: float, adjoint: bool = False):
        self.be = be
        self.layout = be.layout
        self.L = L
        self.eps = eps
        self.alpha, self.beta = _phases(L, eps)
        self.adjoint = adjoint
        self._U = be.U
        self._Uinv = be.U.inverse()

    @property
    def uses(self) -> int:
        return self.L

    def _forward(self, state: StateVector) -> StateVector:
        s = self._U.apply(state)
        for a, b in zip(self.alpha, self.beta):
            amps = np.where(_col(self.be.pi_out, s.amps), np.exp(-1j * b) * s.amps, s.amps)
            s = self._Uinv.apply(s.with_amps(amps))
            amps = np.where(_col(self.be.pi_in, s.amps), np.exp(1j * a) * s.amps, s.amps)
            s = self._U.apply(s.with_amps(amps))
            s = s.with_amps(-s.amps)
        return s

    def _backward(self, state: StateVector) -> StateVector:
        s = state
        for a, b in zip(self.alpha[::-1], self.beta[::-1]):
            s = self._Uinv.apply(s.with_amps(-s.amps))
            amps = np.where(_col(self.be.pi_in, s.amps), np.exp(-1j * a) * s.amps, s.amps)
            s = self._U.apply(s.with_amps(amps))
            amps = np.where(_col(self.be.pi_out, s.amps), np.exp(1j * b) * s.amps, s.amps)
            s = s.with_amps(amps)
        return self._Uinv.apply(s)

    def apply(self, state: StateVector) -> StateVector:
        return self._backward(state) if self.adjoint else self._forward(state)

    def inverse(self) -> "FixedPointAmplifier":
        return FixedPointAmplifier(self.be, self.L, self.eps, not self.adjoint)

    def matrix(self, max_dim: int = 2 ** 12) -> np.ndarray:
        D = self.layout.total_dim
        if D > max_dim:
            raise ValueError(f"dimension {D} exceeds the dense limit {max_dim}")
        return self.apply(StateVector(self.layout, np.eye(D, dtype=complex))).amps


def _col(mask, amps):
    return mask if amps.ndim == 1 else mask[:, None]


def fixed_point_amplify(be: BlockEncoding, delta_lb: float, eps: float) -> FixedPointAmplifier:
    """Fixed-point amplification of the ``pi_out`` component of ``U pi_in``.

    For every singular value ``a >= delta_lb`` of the block the output puts
    weight at least ``1 - eps**2`` on the target, so the overlap with the
    normalised target is at least ``1 - eps``.  A zero singular value stays
    at zero target weight exactly.  Uses ``U`` or ``U^-1`` ``L`` times with
    ``L = O(log(1/eps) / delta_lb)``.
    """
    return FixedPointAmplifier(be, fpaa_length(delta_lb, eps), eps)
