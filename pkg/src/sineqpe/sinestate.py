"""Closed forms for the sine (Holevo-optimal) control state.

The state on ``m`` qubits is an equal-weight sum of two product states,
so every bipartite cut has Schmidt rank 2 and a single flag qubit can
carry the entanglement while the register is built one qubit at a time.
Qubit ``j`` (1-based) lives at register position ``j - 1``.

Two-qubit preparation matrices are written in the ordered basis
``|++>, |+->, |-+>, |-->`` with the fresh qubit as the first factor and
the incoming flag as the second.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .statevec import Gate, StateVector

_H = np.array([[1, 1], [1, -1]], dtype=np.complex128) / math.sqrt(2)
_HH = np.kron(_H, _H)
# swaps |-+> and |-->: flips the flag when the fresh qubit is |->
_FLAG_FLIP = np.eye(4, dtype=np.complex128)[[0, 1, 3, 2]]


@dataclass(frozen=True)
class SineStateParams:
    """Register size ``m``; ``N = 2**m - 1`` is the largest photon-number
    label and ``M = N + 2`` the sine period."""

    m: int
    N: int = field(init=False)
    M: int = field(init=False)

    def __post_init__(self):
        if not isinstance(self.m, (int, np.integer)) or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m!r}")
        object.__setattr__(self, "m", int(self.m))
        object.__setattr__(self, "N", (1 << self.m) - 1)
        object.__setattr__(self, "M", (1 << self.m) + 1)

    @property
    def dim(self) -> int:
        return 1 << self.m


def _sign(sign) -> int:
    if sign in (1, "+"):
        return 1
    if sign in (-1, "-"):
        return -1
    raise ValueError(f"sign must be +1 or -1, got {sign!r}")


def _check_level(params, level, upper):
    if not 1 <= level <= upper:
        raise ValueError(f"level {level} outside [1, {upper}] for m={params.m}")


def sine_amplitudes(N: int) -> np.ndarray:
    """sqrt(2/(N+2)) sin(pi (n+1)/(N+2)) for n = 0..N; any N >= 0."""
    n = np.arange(N + 1)
    return math.sqrt(2.0 / (N + 2)) * np.sin(math.pi * (n + 1) / (N + 2))


def amplitudes(params: SineStateParams) -> np.ndarray:
    return sine_amplitudes(params.N)


def phi_qubit_state(params: SineStateParams, j: int, sign) -> np.ndarray:
    """Single-qubit factor of the ``sign`` product branch for qubit ``j``."""
    _check_level(params, j, params.m)
    s = _sign(sign)
    alpha = math.pi * 2.0 ** (j - 2) / params.M
    return np.array([np.exp(1j * s * alpha), np.exp(-1j * s * alpha)]) / math.sqrt(2)


def overlap_product(params: SineStateParams, level: int) -> float:
    """prod_{j=1..level} cos(pi 2^(j-1) / M): overlap of the two product branches."""
    _check_level(params, level, params.m)
    j = np.arange(1, level + 1)
    return float(np.prod(np.cos(math.pi * 2.0 ** (j - 1) / params.M)))


def product_branch(params: SineStateParams, level: int, sign) -> np.ndarray:
    """Amplitudes of phi_1 (x) ... (x) phi_level on ``level`` qubits."""
    _check_level(params, level, params.m)
    vec = phi_qubit_state(params, 1, sign)
    for j in range(2, level + 1):
        vec = np.kron(phi_qubit_state(params, j, sign), vec)
    return vec


def _one_minus_overlap(params: SineStateParams, level: int) -> float:
    """1 - overlap_product without cancellation (every angle is below pi/2)."""
    j = np.arange(1, level + 1)
    half = np.sin(math.pi * 2.0 ** (j - 1) / params.M / 2)
    return float(-np.expm1(np.sum(np.log1p(-2 * half ** 2))))


def big_phi_norm(params: SineStateParams, level: int, sign) -> float:
    if _sign(sign) > 0:
        return math.sqrt(2.0 + 2.0 * overlap_product(params, level))
    return math.sqrt(2.0 * _one_minus_overlap(params, level))


def big_phi_state(params: SineStateParams, level: int, sign, normalized: bool = True) -> StateVector:
    """Sum (``+``) or difference (``-``) of the two product branches on qubits 1..level.

    Branch entries are 2^(-level/2) e^{+-i beta_n}, so the combination is
    formed as 2 cos(beta_n) or 2i sin(beta_n) to avoid cancellation.
    """
    _check_level(params, level, params.m)
    s = _sign(sign)
    n = np.arange(1 << level)
    beta = np.zeros(n.size)
    for j in range(1, level + 1):
        alpha = math.pi * 2.0 ** (j - 2) / params.M
        beta += alpha * (1 - 2 * ((n >> (j - 1)) & 1))
    scale = 2.0 ** (1 - level / 2)
    amps = scale * (np.cos(beta) if s > 0 else 1j * np.sin(beta))
    if normalized:
        amps = amps / big_phi_norm(params, level, s)
    return StateVector(amps, normalized=normalized)


@dataclass(frozen=True)
class RecursionCoeffs:
    level: int
    mu0_plus: complex
    mu1_plus: complex
    mu0_minus: complex
    mu1_minus: complex

    def pair(self, sign):
        if _sign(sign) > 0:
            return self.mu0_plus, self.mu1_plus
        return self.mu0_minus, self.mu1_minus


def mu_coeffs(params: SineStateParams, level: int) -> RecursionCoeffs:
    """Coefficients of the level -> level+1 recurrence for the normalised
    sum/difference states."""
    _check_level(params, level, params.m - 1)
    c_here = overlap_product(params, level)
    c_next = overlap_product(params, level + 1)
    angle = math.pi * 2.0 ** (level - 1) / params.M
    cos_a, sin_a = math.cos(angle), math.sin(angle)

    # 1 +/- C for this level and the next; the minus side is small for large M
    here = {1: 1 + c_here, -1: _one_minus_overlap(params, level)}
    nxt = {1: 1 + c_next, -1: _one_minus_overlap(params, level + 1)}

    def ratio(s, sign):
        return math.sqrt(here[sign * (-1) ** s] / nxt[sign])

    return RecursionCoeffs(
        level=level,
        mu0_plus=complex(cos_a * ratio(0, 1)),
        mu1_plus=1j * sin_a * ratio(1, 1),
        mu0_minus=complex(cos_a * ratio(0, -1)),
        mu1_minus=1j * sin_a * ratio(1, -1),
    )


def _su2_from_column(a, b):
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]], dtype=np.complex128)


def complete_unitary(columns) -> np.ndarray:
    """Extend orthonormal ``columns`` to a unitary by modified Gram-Schmidt
    over the canonical basis vectors in order."""
    cols = [np.asarray(c, dtype=np.complex128) for c in columns]
    dim = cols[0].size
    for e in np.eye(dim, dtype=np.complex128):
        if len(cols) == dim:
            break
        v = e.copy()
        for _ in range(2):
            for c in cols:
                v = v - np.vdot(c, v) * c
        nv = np.linalg.norm(v)
        if nv > 1e-8:
            cols.append(v / nv)
    return np.stack(cols, axis=1)


def preparation_matrix_pm(params: SineStateParams, level: int, method: str = "controlled",
                          coeffs: RecursionCoeffs | None = None) -> np.ndarray:
    """4x4 matrix of U_level in the |+->-product basis.

    ``method="controlled"`` builds the flag-controlled rotation followed
    by a flag flip on fresh |->; ``"gram_schmidt"`` fixes the two
    constrained columns and completes them deterministically.
    """
    c = coeffs if coeffs is not None else mu_coeffs(params, level)
    if method == "controlled":
        v_plus = _su2_from_column(c.mu0_plus, c.mu1_plus)
        # V^- |+> = mu1- |+> + mu0- |->
        v_minus = _su2_from_column(c.mu1_minus, c.mu0_minus)
        proj_p = np.diag([1.0, 0.0]).astype(np.complex128)
        proj_m = np.diag([0.0, 1.0]).astype(np.complex128)
        controlled = np.kron(v_plus, proj_p) + np.kron(v_minus, proj_m)
        return _FLAG_FLIP @ controlled
    if method == "gram_schmidt":
        col0 = np.array([c.mu0_plus, 0, 0, c.mu1_plus], dtype=np.complex128)
        col1 = np.array([0, c.mu1_minus, c.mu0_minus, 0], dtype=np.complex128)
        return complete_unitary([col0, col1])
    raise ValueError(f"unknown completion method {method!r}")


def build_preparation_unitary(params: SineStateParams, level: int, method: str = "controlled",
                              coeffs: RecursionCoeffs | None = None) -> Gate:
    """U_level in the computational basis; targets (qubit level, qubit level+1)."""
    u_pm = preparation_matrix_pm(params, level, method, coeffs)
    return Gate(_HH @ u_pm @ _HH, f"U_{level}")


_FLAG_FIX = Gate(np.array([[1 + 1j, 1 - 1j], [1 - 1j, 1 + 1j]]) / 2, "S_pm")


def flag_fix_gate() -> Gate:
    """|+> -> |+>, |-> -> i|->."""
    return _FLAG_FIX


@dataclass(frozen=True)
class PreparationPlan:
    params: SineStateParams
    gates: tuple  # ((level, Gate), ...) from level m-1 down to 1
    flag_fix: Gate

    def stacked(self) -> np.ndarray:
        """Gate matrices indexed by ``level - 1``, shape (m-1, 4, 4)."""
        out = np.zeros((max(self.params.m - 1, 0), 4, 4), dtype=np.complex128)
        for level, gate in self.gates:
            out[level - 1] = gate.matrix
        return out


@lru_cache(maxsize=64)
def preparation_plan(params: SineStateParams, method: str = "controlled") -> PreparationPlan:
    gates = tuple((level, build_preparation_unitary(params, level, method))
                  for level in range(params.m - 1, 0, -1))
    return PreparationPlan(params, gates, flag_fix_gate())
