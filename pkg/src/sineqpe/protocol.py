"""Phase-measurement protocols on the control register.

The target register is never simulated: a controlled ``U^(2^(j-1))`` acting
on an eigenstate is a diagonal kick ``diag(1, e^{i 2^(j-1) phi})`` on
control qubit ``j``. Outcomes are reported as ``k = sum_j b_j 2^(m-j)``
with estimate ``2 pi k / 2^m + offset``.

Covariant runs kick with ``phi - offset`` and add the offset back to the
estimate, which is the same as measuring in the shifted phase basis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._accel import set_num_threads
from .errors import LiveRegisterError, RegisterSizeError
from .sinestate import (
    SineStateParams,
    amplitudes,
    build_preparation_unitary,
    flag_fix_gate,
    preparation_plan,
)
from .statevec import (
    HADAMARD,
    StateVector,
    apply_gate,
    branch_qubit,
    measure_qubit,
    phase_gate,
    phase_kick,
)

TWO_PI = 2.0 * math.pi
STATE_KINDS = ("optimal", "uniform")
MAX_LIVE = 2
MAX_ENUMERATION_M = 14
MAX_DENSE_M = 12


def wrap_angle(x):
    """Map to (-pi, pi]."""
    return math.pi - np.mod(math.pi - np.asarray(x, dtype=float), TWO_PI)


def _check_kind(kind):
    if kind not in STATE_KINDS:
        raise ValueError(f"state_kind must be one of {STATE_KINDS}, got {kind!r}")


@dataclass(frozen=True)
class ProtocolConfig:
    params: SineStateParams
    phase: float = 0.0
    state_kind: str = "optimal"
    covariant: bool = False
    offset: float = 0.0
    seed: int = 0

    def __post_init__(self):
        _check_kind(self.state_kind)
        object.__setattr__(self, "phase", float(np.mod(self.phase, TWO_PI)))
        if not 0.0 <= self.offset < self.grid_step:
            raise ValueError(f"offset {self.offset!r} outside [0, 2pi/2^m)")

    @property
    def grid_step(self) -> float:
        return TWO_PI / self.params.dim

    @property
    def effective_offset(self) -> float:
        return self.offset if self.covariant else 0.0


@dataclass(frozen=True)
class MeasurementRecord:
    bits: tuple        # b_1..b_m
    angles: tuple      # feedback angles theta_1..theta_m
    k: int
    estimate: float
    error: float
    offset: float = 0.0
    max_live: int = 0


@dataclass(frozen=True)
class OutcomeDistribution:
    params: SineStateParams
    probabilities: np.ndarray
    phase: float = 0.0
    offset: float = 0.0
    state_kind: str = "optimal"

    @property
    def grid(self) -> np.ndarray:
        return TWO_PI * np.arange(self.params.dim) / self.params.dim + self.offset

    @property
    def errors(self) -> np.ndarray:
        return wrap_angle(self.grid - self.phase)


def outcome_index(bits) -> int:
    """k from (b_1..b_m); qubit j contributes 2^(m-j)."""
    m = len(bits)
    return sum(int(b) << (m - j) for j, b in enumerate(bits, start=1))


def control_amplitudes(params: SineStateParams, state_kind: str) -> np.ndarray:
    _check_kind(state_kind)
    if state_kind == "optimal":
        return amplitudes(params)
    return np.full(params.dim, 1.0 / math.sqrt(params.dim))


# -- full-register preparation ---------------------------------------------

def prepare_full(params: SineStateParams, method: str = "controlled") -> StateVector:
    """All qubits in |+>, then U_{m-1} .. U_1 on neighbouring pairs and the flag fix."""
    state = StateVector.plus(params.m)
    for level in range(params.m - 1, 0, -1):
        state = apply_gate(state, build_preparation_unitary(params, level, method),
                           (level - 1, level))
    return apply_gate(state, flag_fix_gate(), 0)


# -- streaming schedule ----------------------------------------------------

def feedback_angle(j: int, later_bits) -> float:
    """-pi * sum_{i>j} b_i 2^(j-i), with ``later_bits = (b_{j+1}, ..., b_m)``."""
    return -math.pi * sum(int(b) * 2.0 ** (-(i + 1)) for i, b in enumerate(later_bits))


def streaming_schedule(params: SineStateParams, state_kind: str = "optimal"):
    """Ordered ops ``("fresh", j)``, ``("gate", l)``, ``("fix",)``, ``("measure", j)``.

    Each U_l is applied as late as possible, right after qubit l+2 is
    measured, so at most two control qubits are ever live.
    """
    _check_kind(state_kind)
    m = params.m
    ops = []
    if state_kind == "uniform":
        for j in range(m, 0, -1):
            ops += [("fresh", j), ("measure", j)]
        return ops
    ops.append(("fresh", m))
    for level in range(m - 1, 0, -1):
        ops += [("fresh", level), ("gate", level), ("measure", level + 1)]
    ops += [("fix",), ("measure", 1)]
    return ops


class _Walker:
    """Applies the non-measurement ops of the schedule to a live register."""

    def __init__(self, config: ProtocolConfig):
        self.config = config
        params = config.params
        self.m = params.m
        self.gates = {}
        if config.state_kind == "optimal":
            self.gates = {level: gate for level, gate in preparation_plan(params).gates}
        self.fix = flag_fix_gate()
        self.shift = config.phase - config.effective_offset

    def step(self, op, state, labels):
        kind = op[0]
        if kind == "fresh":
            state = state.append(StateVector.plus(1))
            labels = labels + (op[1],)
            if len(labels) > MAX_LIVE:
                raise LiveRegisterError(f"{len(labels)} live control qubits {labels}")
        elif kind == "gate":
            level = op[1]
            state = apply_gate(state, self.gates[level],
                               (labels.index(level), labels.index(level + 1)))
        elif kind == "fix":
            state = apply_gate(state, self.fix, labels.index(1))
        else:
            raise ValueError(f"unknown op {op!r}")
        return state, labels

    def prepare_measurement(self, j, state, labels, bits):
        """Kick qubit j, return (kicked state, position, basis rotation, angle)."""
        pos = labels.index(j)
        later = [bits[i] for i in range(j + 1, self.m + 1)]
        theta = feedback_angle(j, later)
        state = phase_kick(state, pos, 2.0 ** (j - 1) * self.shift)
        return state, pos, HADAMARD @ phase_gate(theta), theta

    def record(self, bits, angles, max_live):
        ordered = tuple(bits[j] for j in range(1, self.m + 1))
        k = outcome_index(ordered)
        offset = self.config.effective_offset
        estimate = TWO_PI * k / (1 << self.m) + offset
        return MeasurementRecord(
            bits=ordered,
            angles=tuple(angles[j] for j in range(1, self.m + 1)),
            k=k,
            estimate=estimate,
            error=float(wrap_angle(estimate - self.config.phase)),
            offset=offset,
            max_live=max_live,
        )


def run_streaming(config: ProtocolConfig, rng) -> MeasurementRecord:
    """One shot of the streaming protocol; ``rng`` supplies ``random()`` draws."""
    walker = _Walker(config)
    state, labels = StateVector.plus(0), ()
    bits, angles, max_live = {}, {}, 0
    for op in streaming_schedule(config.params, config.state_kind):
        if op[0] != "measure":
            state, labels = walker.step(op, state, labels)
            max_live = max(max_live, len(labels))
            continue
        j = op[1]
        state, pos, rotation, theta = walker.prepare_measurement(j, state, labels, bits)
        bits[j], state, _ = measure_qubit(state, pos, rotation, rng)
        angles[j] = theta
        labels = labels[:pos] + labels[pos + 1:]
    return walker.record(bits, angles, max_live)


def enumerate_branches(config: ProtocolConfig) -> OutcomeDistribution:
    """Exact outcome probabilities by following both branches of every measurement."""
    m = config.params.m
    if m > MAX_ENUMERATION_M:
        raise RegisterSizeError(f"exact enumeration limited to m <= {MAX_ENUMERATION_M}, got {m}")
    walker = _Walker(config)
    ops = streaming_schedule(config.params, config.state_kind)
    probs = np.zeros(1 << m)

    def walk(i, state, labels, bits, weight):
        while i < len(ops) and ops[i][0] != "measure":
            state, labels = walker.step(ops[i], state, labels)
            i += 1
        if i == len(ops):
            probs[outcome_index([bits[j] for j in range(1, m + 1)])] += weight
            return
        j = ops[i][1]
        state, pos, rotation, _ = walker.prepare_measurement(j, state, labels, bits)
        rest = labels[:pos] + labels[pos + 1:]
        for b, (p, branch) in enumerate(branch_qubit(state, pos, rotation)):
            if p > 0.0:
                walk(i + 1, branch, rest, {**bits, j: b}, weight * p)

    walk(0, StateVector.plus(0), (), {}, 1.0)
    return OutcomeDistribution(config.params, probs, config.phase,
                               config.effective_offset, config.state_kind)


# -- independent oracles ----------------------------------------------------

def canonical_distribution(params: SineStateParams, phase: float, offset: float = 0.0,
                           state_kind: str = "optimal") -> OutcomeDistribution:
    """P(k) = 2^-m |sum_n a_n e^{i n (phi - est_k)}|^2 on the offset grid."""
    a = control_amplitudes(params, state_kind)
    n = np.arange(params.dim)
    # numpy's forward FFT carries e^{-2 pi i n k / 2^m}
    amp = np.fft.fft(a * np.exp(1j * n * (phase - offset)))
    probs = np.abs(amp) ** 2 / params.dim
    return OutcomeDistribution(params, probs, float(np.mod(phase, TWO_PI)), offset, state_kind)


def inverse_qft_reference(params: SineStateParams, phase: float, state_kind: str = "optimal",
                          offset: float = 0.0) -> OutcomeDistribution:
    """Kick every qubit of the full register, apply the dense inverse QFT, read |amp|^2."""
    if params.m > MAX_DENSE_M:
        raise RegisterSizeError(f"dense inverse QFT limited to m <= {MAX_DENSE_M}, got {params.m}")
    state = StateVector(control_amplitudes(params, state_kind))
    for j in range(1, params.m + 1):
        state = phase_kick(state, j - 1, 2.0 ** (j - 1) * (phase - offset))
    dim = params.dim
    k = np.arange(dim)
    iqft = np.exp(-2j * math.pi * np.outer(k, k) / dim) / math.sqrt(dim)
    probs = np.abs(iqft @ state.amps) ** 2
    return OutcomeDistribution(params, probs, float(np.mod(phase, TWO_PI)), offset, state_kind)


# -- batched Monte Carlo ----------------------------------------------------

@dataclass(frozen=True)
class TrialBatch:
    params: SineStateParams
    phase: float
    offsets: np.ndarray
    bits: np.ndarray           # (trials, m); column j-1 holds b_j
    k: np.ndarray = field(init=False)
    estimates: np.ndarray = field(init=False)
    errors: np.ndarray = field(init=False)

    def __post_init__(self):
        m = self.params.m
        weights = 1 << (m - np.arange(1, m + 1))
        k = self.bits.astype(np.int64) @ weights
        est = TWO_PI * k / self.params.dim + self.offsets
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "estimates", est)
        object.__setattr__(self, "errors", wrap_angle(est - self.phase))

    def __len__(self):
        return self.bits.shape[0]


def trial_uniforms(m: int, trials: int, seed: int) -> np.ndarray:
    """Row t feeds trial t: column 0 the offset draw, then one draw per
    measurement in time order. Rows do not depend on ``trials``."""
    return np.random.default_rng(seed).random((trials, m + 1))


def sample_trials(params: SineStateParams, phase: float, trials: int, seed: int,
                  state_kind: str = "optimal", covariant: bool = False, offset: float = 0.0,
                  threads: int | None = None, backend=None) -> TrialBatch:
    """Run ``trials`` independent shots of the streaming protocol.

    ``backend`` overrides the kernel (``kernels.stream_trials_numba`` or
    ``kernels.stream_trials_numpy``); results do not depend on ``threads``.
    """
    _check_kind(state_kind)
    if trials < 1:
        raise ValueError("trials must be >= 1")
    m = params.m
    u = trial_uniforms(m, trials, seed)
    step = TWO_PI / params.dim
    offsets = u[:, 0] * step if covariant else np.full(trials, float(offset))
    plan = preparation_plan(params) if state_kind == "optimal" else None
    gates = plan.stacked() if plan else np.zeros((max(m - 1, 0), 4, 4), dtype=np.complex128)
    fix = np.ascontiguousarray(flag_fix_gate().matrix)
    set_num_threads(threads)
    run = backend or kernels.stream_trials
    phase = float(np.mod(phase, TWO_PI))
    bits = run(m, phase, offsets, gates, fix, state_kind == "optimal",
               np.ascontiguousarray(u[:, 1:]))
    return TrialBatch(params, phase, offsets, np.asarray(bits))
