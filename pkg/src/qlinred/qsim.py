"""Dense statevector simulation over mixed-radix registers.

A :class:`RegisterLayout` names each wire and gives its dimension (2 for
qubits, ``p`` for field qudits, ``n`` for index registers).  Amplitudes are
stored flat in C order over the wires, optionally with a trailing batch axis
so that a whole set of input columns can be pushed through a circuit at
once.

Oracle gates carry a query label and increment the :class:`QueryCounter`
attached to the state every time they are applied.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "RegisterLayout",
    "QueryCounter",
    "StateVector",
    "Gate",
    "UnitaryGate",
    "PermutationGate",
    "DiagonalGate",
    "MultiplexedGate",
    "Circuit",
    "apply",
    "measure",
    "distribution",
    "dft_matrix",
    "qft",
    "inv_qft",
    "hadamard",
    "pauli_x",
    "shift",
    "ccx",
    "controlled_add",
    "comparator",
    "classical_gate",
    "matrix_oracle",
    "vector_oracle",
    "register_read",
    "phase_on",
    "umv_circuit",
    "wire_names",
]


def wire_names(prefix: str, n: int) -> list[str]:
    return [f"{prefix}{i}" for i in range(n)]


@dataclass(frozen=True)
class RegisterLayout:
    """Ordered named wires with their dimensions."""

    names: tuple[str, ...]
    dims: tuple[int, ...]

    def __post_init__(self):
        if len(self.names) != len(self.dims):
            raise ValueError("names and dims differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate wire name")
        if any(d < 1 for d in self.dims):
            raise ValueError("wire dimensions must be positive")

    @classmethod
    def of(cls, wires: Iterable[tuple[str, int]]) -> "RegisterLayout":
        wires = list(wires)
        return cls(tuple(w for w, _ in wires), tuple(int(d) for _, d in wires))

    @property
    def total_dim(self) -> int:
        return int(np.prod(self.dims, dtype=np.int64)) if self.dims else 1

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no wire named {name!r}") from None

    def dim(self, name: str) -> int:
        return self.dims[self.axis(name)]

    def extend(self, wires: Iterable[tuple[str, int]]) -> "RegisterLayout":
        extra = list(wires)
        return RegisterLayout(self.names + tuple(w for w, _ in extra),
                              self.dims + tuple(int(d) for _, d in extra))

    def basis_index(self, assignment: Mapping[str, int] | None = None) -> int:
        """Flat index of a basis state; unnamed wires are 0."""
        assignment = dict(assignment or {})
        digits = [0] * len(self.names)
        for k, val in assignment.items():
            ax = self.axis(k)
            if not 0 <= val < self.dims[ax]:
                raise ValueError(f"value {val} out of range for wire {k}")
            digits[ax] = int(val)
        return int(np.ravel_multi_index(digits, self.dims)) if self.dims else 0

    def mask(self, conditions: Mapping[str, object]) -> np.ndarray:
        """Boolean mask over basis states.

        Each condition is an int (wire equals value), a collection of ints,
        or a predicate on the wire value.
        """
        m = np.ones(self.dims, dtype=bool)
        for k, cond in conditions.items():
            ax = self.axis(k)
            vals = np.arange(self.dims[ax])
            if callable(cond):
                ok = np.array([bool(cond(int(x))) for x in vals])
            elif isinstance(cond, (int, np.integer)):
                ok = vals == int(cond)
            else:
                ok = np.isin(vals, list(cond))
            shape = [1] * len(self.dims)
            shape[ax] = self.dims[ax]
            m = m & ok.reshape(shape)
        return m.reshape(-1)


class QueryCounter:
    """Per-simulation tally of oracle applications, keyed by oracle label."""

    def __init__(self):
        self.counts: Counter = Counter()

    def add(self, label: str, k: int = 1):
        self.counts[label] += k

    def __getitem__(self, label: str) -> int:
        return self.counts.get(label, 0)

    def total(self, labels: Iterable[str] | None = None) -> int:
        if labels is None:
            return sum(self.counts.values())
        return sum(self.counts.get(l, 0) for l in labels)

    def merge(self, other: "QueryCounter", times: int = 1):
        for k, v in other.counts.items():
            self.counts[k] += v * times

    def snapshot(self) -> dict[str, int]:
        return dict(sorted(self.counts.items()))

    def __repr__(self):
        return f"QueryCounter({self.snapshot()})"


@dataclass
class StateVector:
    """Amplitudes over a layout, with an optional trailing batch axis."""

    layout: RegisterLayout
    amps: np.ndarray
    counter: QueryCounter = field(default_factory=QueryCounter)

    def __post_init__(self):
        D = self.layout.total_dim
        if self.amps.shape[0] != D or self.amps.ndim > 2:
            raise ValueError(f"amplitude array of shape {self.amps.shape} does not fit dim {D}")

    @classmethod
    def basis(cls, layout: RegisterLayout, assignment: Mapping[str, int] | None = None,
              counter: QueryCounter | None = None) -> "StateVector":
        amps = np.zeros(layout.total_dim, dtype=complex)
        amps[layout.basis_index(assignment)] = 1.0
        return cls(layout, amps, counter or QueryCounter())

    @classmethod
    def columns(cls, layout: RegisterLayout, indices: Sequence[int],
                counter: QueryCounter | None = None) -> "StateVector":
        """A batch of basis states, one per column."""
        amps = np.zeros((layout.total_dim, len(indices)), dtype=complex)
        amps[np.asarray(indices, dtype=np.int64), np.arange(len(indices))] = 1.0
        return cls(layout, amps, counter or QueryCounter())

    @property
    def batched(self) -> bool:
        return self.amps.ndim == 2

    def norm(self) -> np.ndarray | float:
        n = np.linalg.norm(self.amps, axis=0)
        return n if self.batched else float(n)

    def with_amps(self, amps: np.ndarray) -> "StateVector":
        return StateVector(self.layout, amps, self.counter)

    def tensor(self) -> np.ndarray:
        extra = self.amps.shape[1:]
        return self.amps.reshape(self.layout.dims + extra)


def _gather(psi: np.ndarray, layout: RegisterLayout, wires: Sequence[str]):
    # bring the listed wires to the front as one flat axis
    axes = [layout.axis(w) for w in wires]
    extra = psi.shape[1:]
    t = psi.reshape(layout.dims + extra)
    t = np.moveaxis(t, axes, range(len(axes)))
    Dw = int(np.prod([layout.dims[a] for a in axes], dtype=np.int64))
    return t.reshape(Dw, -1), axes, t.shape


def _scatter(flat: np.ndarray, axes, moved_shape, layout: RegisterLayout, extra):
    t = flat.reshape(moved_shape)
    t = np.moveaxis(t, range(len(axes)), axes)
    return np.ascontiguousarray(t).reshape((layout.total_dim,) + extra)


class Gate:
    """Base class: an operator acting on a fixed list of wires."""

    wires: tuple[str, ...]
    label: str = "gate"
    query: str | None = None

    def _local(self, flat: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def inverse(self) -> "Gate":
        raise NotImplementedError

    def local_dims(self, layout: RegisterLayout) -> tuple[int, ...]:
        return tuple(layout.dim(w) for w in self.wires)

    def apply_array(self, psi: np.ndarray, layout: RegisterLayout) -> np.ndarray:
        flat, axes, shape = _gather(psi, layout, self.wires)
        return _scatter(self._local(flat), axes, shape, layout, psi.shape[1:])

    def apply(self, state: StateVector) -> StateVector:
        if self.query is not None:
            state.counter.add(self.query)
        return state.with_amps(self.apply_array(state.amps, state.layout))

    def __repr__(self):
        return f"{type(self).__name__}({self.label}, {list(self.wires)})"


class UnitaryGate(Gate):
    """A dense unitary on the product space of its wires."""

    def __init__(self, wires: Sequence[str], matrix: np.ndarray, label: str = "U",
                 query: str | None = None, inverse_query: str | None = None, check: bool = True):
        self.wires = tuple(wires)
        self.matrix = np.asarray(matrix, dtype=complex)
        self.label = label
        self.query = query
        self.inverse_query = inverse_query
        if check:
            d = self.matrix.shape[0]
            if self.matrix.shape != (d, d):
                raise ValueError("gate matrix must be square")
            if not np.allclose(self.matrix.conj().T @ self.matrix, np.eye(d), atol=1e-9):
                raise ValueError(f"gate {label} is not unitary")

    def _local(self, flat):
        return self.matrix @ flat

    def inverse(self):
        return UnitaryGate(self.wires, self.matrix.conj().T, self.label + "^-1",
                           self.inverse_query, self.query, check=False)


class PermutationGate(Gate):
    """A classical reversible map on basis states of its wires.

    ``table[i]`` is the local index that basis state ``i`` is sent to.
    """

    def __init__(self, wires: Sequence[str], table: np.ndarray, label: str = "perm",
                 query: str | None = None, inverse_query: str | None = None):
        self.wires = tuple(wires)
        self.table = np.asarray(table, dtype=np.int64)
        self.label = label
        self.query = query
        self.inverse_query = inverse_query
        if not np.array_equal(np.sort(self.table), np.arange(self.table.size)):
            raise ValueError(f"gate {label} is not a permutation")
        self._pull = np.argsort(self.table)

    def _local(self, flat):
        return flat[self._pull]

    def inverse(self):
        return PermutationGate(self.wires, self._pull, self.label + "^-1",
                               self.inverse_query, self.query)


class DiagonalGate(Gate):
    """Multiplies each local basis state by a unit-modulus phase."""

    def __init__(self, wires: Sequence[str], phases: np.ndarray, label: str = "phase"):
        self.wires = tuple(wires)
        self.phases = np.asarray(phases, dtype=complex)
        self.label = label
        self.query = None
        if not np.allclose(np.abs(self.phases), 1.0, atol=1e-12):
            raise ValueError("diagonal entries must have modulus one")

    def _local(self, flat):
        return self.phases[:, None] * flat

    def inverse(self):
        return DiagonalGate(self.wires, self.phases.conj(), self.label + "^-1")


class MultiplexedGate(Gate):
    """Applies ``blocks[c]`` to the target wires when the controls read ``c``."""

    def __init__(self, controls: Sequence[str], targets: Sequence[str], blocks: np.ndarray,
                 label: str = "mux", query: str | None = None, inverse_query: str | None = None,
                 check: bool = True):
        self.controls = tuple(controls)
        self.targets = tuple(targets)
        self.wires = self.controls + self.targets
        self.blocks = np.asarray(blocks, dtype=complex)
        self.label = label
        self.query = query
        self.inverse_query = inverse_query
        if check:
            eye = np.eye(self.blocks.shape[1])
            prod = np.einsum("cji,cjk->cik", self.blocks.conj(), self.blocks)
            if not np.allclose(prod, eye, atol=1e-9):
                raise ValueError(f"gate {label} has a non-unitary block")

    def _local(self, flat):
        C, T = self.blocks.shape[0], self.blocks.shape[1]
        x = flat.reshape(C, T, -1)
        return np.einsum("cij,cjr->cir", self.blocks, x).reshape(C * T, -1)

    def inverse(self):
        return MultiplexedGate(self.controls, self.targets,
                               np.conj(np.transpose(self.blocks, (0, 2, 1))),
                               self.label + "^-1", self.inverse_query, self.query, check=False)


class Circuit:
    """A sequence of gates or nested operators."""

    def __init__(self, ops: Iterable = (), label: str = "circuit"):
        self.ops = list(ops)
        self.label = label

    def append(self, op):
        self.ops.append(op)
        return self

    def extend(self, ops: Iterable):
        self.ops.extend(ops)
        return self

    def apply(self, state: StateVector) -> StateVector:
        for op in self.ops:
            state = op.apply(state)
        return state

    def inverse(self) -> "Circuit":
        return Circuit([op.inverse() for op in reversed(self.ops)], self.label + "^-1")

    def __len__(self):
        return len(self.ops)

    def matrix(self, layout: RegisterLayout, max_dim: int = 2 ** 12) -> np.ndarray:
        """Dense matrix by pushing every basis state through the circuit."""
        D = layout.total_dim
        if D > max_dim:
            raise ValueError(f"dimension {D} exceeds the dense limit {max_dim}")
        out = self.apply(StateVector(layout, np.eye(D, dtype=complex)))
        return out.amps

    def query_counts(self, layout: RegisterLayout) -> dict[str, int]:
        """Oracle applications made by one pass, from a dry run on a basis state."""
        st = self.apply(StateVector.basis(layout))
        return st.counter.snapshot()


def apply(state: StateVector, gate) -> StateVector:
    """Apply a gate, circuit or any operator with an ``apply`` method."""
    return gate.apply(state)


def distribution(state: StateVector, wires: Sequence[str]) -> np.ndarray:
    """Marginal outcome probabilities of the listed wires.

    Returns an array with one axis per wire.
    """
    if state.batched:
        raise ValueError("distribution is defined for a single state")
    probs = np.abs(state.amps) ** 2
    t = probs.reshape(state.layout.dims)
    axes = [state.layout.axis(w) for w in wires]
    others = tuple(i for i in range(t.ndim) if i not in axes)
    marg = t.sum(axis=others)
    order = np.argsort(np.argsort(axes))
    return np.transpose(marg, order) if marg.ndim > 1 else marg


def measure(state: StateVector, wires: Sequence[str], rng_seed=None):
    """Sample the listed wires and collapse.

    Returns
    -------
    outcome : tuple of int
    post : StateVector
        Normalised post-measurement state.
    """
    rng = np.random.default_rng(rng_seed)
    dist = distribution(state, wires)
    flat = dist.reshape(-1)
    k = int(rng.choice(flat.size, p=flat / flat.sum()))
    outcome = tuple(int(x) for x in np.unravel_index(k, dist.shape))
    mask = state.layout.mask(dict(zip(wires, outcome)))
    amps = np.where(mask, state.amps, 0)
    amps = amps / np.linalg.norm(amps)
    return outcome, state.with_amps(amps)


# ---------------------------------------------------------------- gate zoo

def dft_matrix(d: int) -> np.ndarray:
    """``F[y, x] = omega**(x y) / sqrt(d)`` with ``omega = exp(2 pi i / d)``."""
    k = np.arange(d)
    return np.exp(2j * np.pi * np.outer(k, k) / d) / np.sqrt(d)


def qft(wire: str, d: int) -> UnitaryGate:
    return UnitaryGate([wire], dft_matrix(d), f"QFT{d}", check=False)


def inv_qft(wire: str, d: int) -> UnitaryGate:
    return UnitaryGate([wire], dft_matrix(d).conj().T, f"QFT{d}^-1", check=False)


def hadamard(wire: str) -> UnitaryGate:
    return qft(wire, 2)


def classical_gate(wires: Sequence[str], dims: Sequence[int], fn: Callable[[tuple], tuple],
                   label: str, query: str | None = None, inverse_query: str | None = None) -> PermutationGate:
    """Permutation gate from a reversible function on digit tuples."""
    dims = tuple(int(d) for d in dims)
    D = int(np.prod(dims, dtype=np.int64))
    digits = np.array(np.unravel_index(np.arange(D), dims)).T
    out = np.array([fn(tuple(int(x) for x in row)) for row in digits], dtype=np.int64)
    table = np.ravel_multi_index(tuple(out.T), dims)
    return PermutationGate(wires, table, label, query, inverse_query)


def shift(wire: str, d: int, k: int = 1) -> PermutationGate:
    """``|z> -> |z + k mod d>``."""
    return PermutationGate([wire], (np.arange(d) + k) % d, f"X^{k}")


def pauli_x(wire: str) -> PermutationGate:
    return shift(wire, 2, 1)


def ccx(s1: str, s2: str, target: str, p: int) -> PermutationGate:
    """Field Toffoli ``|s1, s2, z> -> |s1, s2, z + s1 s2>``."""
    return classical_gate([s1, s2, target], (p, p, p),
                          lambda t: (t[0], t[1], (t[2] + t[0] * t[1]) % p), "CCX")


def controlled_add(src: str, dst: str, p: int, coeff: int = 1) -> PermutationGate:
    """``|a, z> -> |a, z + coeff a>``."""
    return classical_gate([src, dst], (p, p),
                          lambda t: (t[0], (t[1] + coeff * t[0]) % p), f"ADD{coeff}")


def comparator(wire: str, flag: str, d: int) -> PermutationGate:
    """Flips the qubit ``flag`` when ``wire`` is nonzero."""
    return classical_gate([wire, flag], (d, 2),
                          lambda t: (t[0], t[1] ^ (t[0] != 0)), "CMP")


def matrix_oracle(M: np.ndarray, row: str, col: str, target: str, p: int,
                  label: str = "U_M") -> PermutationGate:
    """``|j, k, z> -> |j, k, z + M[j, k]>`` (0-based indices)."""
    M = np.asarray(M, dtype=np.int64) % p
    nr, nc = M.shape
    return classical_gate([row, col, target], (nr, nc, p),
                          lambda t: (t[0], t[1], (t[2] + M[t[0], t[1]]) % p),
                          label, query=label, inverse_query=label + "^dag")


def vector_oracle(v: np.ndarray, idx: str, target: str, p: int, label: str = "U_v") -> PermutationGate:
    """``|j, z> -> |j, z + v[j]>``."""
    v = np.asarray(v, dtype=np.int64) % p
    return classical_gate([idx, target], (v.size, p),
                          lambda t: (t[0], (t[1] + v[t[0]]) % p),
                          label, query=label, inverse_query=label + "^dag")


def register_read(idx: str, register: Sequence[str], target: str, p: int,
                  label: str = "U_v") -> PermutationGate:
    """Entry oracle for a vector held in quantum wires.

    ``|j, r_0 .. r_{n-1}, z> -> |j, r, z + r_j>``.
    """
    n = len(register)
    dims = (n,) + (p,) * n + (p,)

    def fn(t):
        return t[:-1] + ((t[-1] + t[1 + t[0]]) % p,)

    return classical_gate([idx, *register, target], dims, fn, label,
                          query=label, inverse_query=label + "^dag")


def phase_on(layout: RegisterLayout, wires: Sequence[str], conditions: Mapping[str, object],
             angle: float, label: str = "phase") -> DiagonalGate:
    """Phase ``exp(i angle)`` on basis states of ``wires`` meeting ``conditions``."""
    sub = RegisterLayout(tuple(wires), tuple(layout.dim(w) for w in wires))
    m = sub.mask(conditions)
    return DiagonalGate(wires, np.where(m, np.exp(1j * angle), 1.0), label)


def umv_circuit(n: int, p: int, M: np.ndarray, *, idx: str, col: str, m: str, u: str,
                acc: str, v_read: Callable[[str, str], Gate]) -> Circuit:
    """Compute ``acc += (M v)_idx`` with ``n`` queries to each of U_M, U_v and their inverses.

    Each term loads ``M[idx, j]`` into ``m`` and ``v_j`` into ``u``,
    multiplies into ``acc`` and unloads, so ``m`` and ``u`` return to zero.
    ``v_read(col, u)`` builds the entry oracle for ``v``.
    """
    um = matrix_oracle(M, idx, col, m, p)
    uv = v_read(col, u)
    c = Circuit(label="U_Mv")
    for j in range(n):
        c.extend([shift(col, n, j), um, uv, ccx(m, u, acc, p),
                  uv.inverse(), um.inverse(), shift(col, n, -j)])
    return c
