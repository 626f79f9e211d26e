"""Small dense statevector engine.

Register position ``q`` (0-based) is bit ``q`` of the flat amplitude index,
so the 1-based qubit label ``j = q + 1`` carries weight ``2**(j-1)``.
Operations never mutate their inputs; measured qubits are removed from the
register rather than left collapsed.
"""
from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from . import kernels
from .errors import GateValidationError, ProbabilityUnderflowError

UNITARY_TOL = 1e-10
NORM_TOL = 1e-9
UNDERFLOW = 1e-15


class StateVector:
    """Amplitudes over ``num_qubits`` qubits.

    ``normalized`` records whether the vector is meant to be a physical
    state; when set, the norm is checked at construction.
    """

    __slots__ = ("_amps", "normalized")

    def __init__(self, amps, normalized: bool = True):
        arr = np.ascontiguousarray(amps, dtype=np.complex128).reshape(-1)
        size = arr.size
        if size == 0 or size & (size - 1):
            raise ValueError(f"amplitude count {size} is not a power of two")
        if not np.all(np.isfinite(arr)):
            raise ValueError("amplitudes must be finite")
        if normalized:
            norm2 = float(np.vdot(arr, arr).real)
            if abs(norm2 - 1.0) > NORM_TOL:
                raise ValueError(f"state not normalised: |psi|^2 = {norm2!r}")
        self._amps = arr
        self.normalized = normalized

    @classmethod
    def _wrap(cls, arr, normalized=True):
        # trusted constructor for kernel output
        obj = cls.__new__(cls)
        obj._amps = arr
        obj.normalized = normalized
        return obj

    @classmethod
    def basis(cls, bits: Sequence[int]) -> "StateVector":
        """Computational basis state; ``bits[q]`` is the value of position ``q``."""
        index = sum(int(b) << q for q, b in enumerate(bits))
        arr = np.zeros(1 << len(bits), dtype=np.complex128)
        arr[index] = 1.0
        return cls._wrap(arr)

    @classmethod
    def zeros(cls, num_qubits: int) -> "StateVector":
        return cls.basis([0] * num_qubits)

    @classmethod
    def plus(cls, num_qubits: int = 1) -> "StateVector":
        size = 1 << num_qubits
        return cls._wrap(np.full(size, 1.0 / math.sqrt(size), dtype=np.complex128))

    @property
    def amps(self) -> np.ndarray:
        view = self._amps.view()
        view.flags.writeable = False
        return view

    @property
    def num_qubits(self) -> int:
        return self._amps.size.bit_length() - 1

    def norm(self) -> float:
        return float(np.sqrt(np.vdot(self._amps, self._amps).real))

    def append(self, other: "StateVector") -> "StateVector":
        """Tensor ``other`` onto the high end of the register."""
        return StateVector._wrap(np.multiply.outer(other._amps, self._amps).reshape(-1),
                                 self.normalized and other.normalized)

    def __repr__(self):
        return f"StateVector(num_qubits={self.num_qubits}, amps={self._amps!r})"


class Gate:
    """A validated 2x2 or 4x4 unitary.

    For two-qubit gates the first target passed to :func:`apply_gate` is
    the first Kronecker factor (the high bit of the 4x4 index).
    """

    __slots__ = ("matrix", "name")

    def __init__(self, matrix, name: str = ""):
        mat = np.array(matrix, dtype=np.complex128)
        if mat.shape not in ((2, 2), (4, 4)):
            raise GateValidationError(f"gate matrix has shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise GateValidationError("gate matrix has non-finite entries")
        dev = np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0])))
        if dev > UNITARY_TOL:
            raise GateValidationError(f"gate {name!r} not unitary (max |U+U - I| = {dev:.3g})")
        mat.flags.writeable = False
        self.matrix = mat
        self.name = name

    @classmethod
    def _wrap(cls, mat, name=""):
        # unitary by construction (products/phases of validated gates)
        obj = cls.__new__(cls)
        mat.flags.writeable = False
        obj.matrix = mat
        obj.name = name
        return obj

    @property
    def arity(self) -> int:
        return 1 if self.matrix.shape[0] == 2 else 2

    def __matmul__(self, other: "Gate") -> "Gate":
        if not isinstance(other, Gate):
            return NotImplemented
        return Gate._wrap(self.matrix @ other.matrix, f"{self.name}*{other.name}")

    def __repr__(self):
        return f"Gate({self.name!r}, arity={self.arity})"


IDENTITY = Gate(np.eye(2), "I")
HADAMARD = Gate(np.array([[1, 1], [1, -1]]) / math.sqrt(2), "H")


def phase_gate(angle: float) -> Gate:
    """diag(1, e^{i angle})."""
    mat = np.zeros((2, 2), dtype=np.complex128)
    mat[0, 0] = 1.0
    mat[1, 1] = np.exp(1j * angle)
    return Gate._wrap(mat, "R")


def _check_qubit(state, qubit):
    if not isinstance(qubit, (int, np.integer)) or not 0 <= qubit < state.num_qubits:
        raise ValueError(f"qubit {qubit!r} out of range for {state.num_qubits}-qubit register")


def apply_gate(state: StateVector, gate: Gate, targets) -> StateVector:
    """Apply ``gate`` to the register positions in ``targets``."""
    if not isinstance(gate, Gate):
        gate = Gate(gate)
    if isinstance(targets, (int, np.integer)):
        targets = (int(targets),)
    targets = tuple(int(t) for t in targets)
    if len(targets) != gate.arity:
        raise ValueError(f"{gate.arity}-qubit gate given {len(targets)} targets")
    if len(set(targets)) != len(targets):
        raise ValueError(f"duplicate targets {targets}")
    for t in targets:
        _check_qubit(state, t)
    if gate.arity == 1:
        out = kernels.apply_1q(state._amps, targets[0], gate.matrix)
    else:
        out = kernels.apply_2q(state._amps, targets[0], targets[1], gate.matrix)
    return StateVector._wrap(out, state.normalized)


def phase_kick(state: StateVector, qubit: int, angle: float) -> StateVector:
    """Multiply every amplitude with ``qubit`` set by e^{i angle}."""
    _check_qubit(state, qubit)
    out = state._amps.copy()
    mask = (np.arange(out.size) >> qubit) & 1 == 1
    out[mask] *= np.exp(1j * angle)
    return StateVector._wrap(out, state.normalized)


def _split(state, qubit, basis_rotation):
    _check_qubit(state, qubit)
    if basis_rotation is not None and basis_rotation is not IDENTITY:
        if basis_rotation.arity != 1:
            raise ValueError("basis rotation must be a single-qubit gate")
        state = apply_gate(state, basis_rotation, qubit)
    n = state.num_qubits
    psi = state._amps.reshape(1 << (n - qubit - 1), 2, 1 << qubit)
    halves = [np.ascontiguousarray(psi[:, b, :]).reshape(-1) for b in (0, 1)]
    probs = [float(np.vdot(h, h).real) for h in halves]
    if probs[0] < UNDERFLOW and probs[1] < UNDERFLOW:
        raise ProbabilityUnderflowError(f"both outcomes of qubit {qubit} have probability < {UNDERFLOW}")
    total = probs[0] + probs[1]
    return halves, [p / total for p in probs]


def branch_qubit(state: StateVector, qubit: int, basis_rotation: Gate | None = None):
    """Both measurement branches of ``qubit`` as ``[(p0, s0), (p1, s1)]``.

    The measured qubit is removed. A branch of probability below 1e-15 is
    kept with weight 0.0 and an all-zero, non-normalised state.
    """
    halves, probs = _split(state, qubit, basis_rotation)
    out = []
    for h, p in zip(halves, probs):
        if p < UNDERFLOW:
            out.append((0.0, StateVector._wrap(np.zeros_like(h), normalized=False)))
        else:
            out.append((p, StateVector._wrap(h / math.sqrt(p))))
    return out


def measure_qubit(state: StateVector, qubit: int, basis_rotation: Gate | None, rng):
    """Sample ``qubit`` after ``basis_rotation``; return ``(bit, state, probability)``.

    ``rng`` needs only a ``random()`` method; the outcome is 0 iff the draw
    is below the zero-outcome probability.
    """
    halves, probs = _split(state, qubit, basis_rotation)
    bit = 0 if rng.random() < probs[0] else 1
    p = probs[bit]
    return bit, StateVector._wrap(halves[bit] / math.sqrt(p)), p


def fidelity_up_to_global_phase(a: StateVector, b: StateVector) -> float:
    if a.num_qubits != b.num_qubits:
        raise ValueError(f"dimension mismatch: {a.num_qubits} vs {b.num_qubits} qubits")
    return float(abs(np.vdot(a._amps, b._amps)) ** 2)
