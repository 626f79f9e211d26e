"""Named invariant checks shared by ``sineqpe verify`` and the test-suite."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .analysis import min_holevo_variance, sharpness_canonical, stats_from_distribution
from .errors import GateValidationError
from .protocol import (
    STATE_KINDS,
    ProtocolConfig,
    canonical_distribution,
    enumerate_branches,
    inverse_qft_reference,
    run_streaming,
)
from .sinestate import (
    SineStateParams,
    amplitudes,
    big_phi_norm,
    big_phi_state,
    build_preparation_unitary,
    flag_fix_gate,
    mu_coeffs,
    overlap_product,
    product_branch,
)
from .statevec import StateVector, apply_gate, fidelity_up_to_global_phase

PHASE_GRID = 16
EQUIVALENCE_MAX_M = 12


@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.max_error <= self.tolerance)

    def as_dict(self):
        return {
            "name": self.name,
            "status": "pass" if self.passed else "fail",
            "max_error": self.max_error,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def _coeffs(params, level, perturb):
    c = mu_coeffs(params, level)
    return replace(c, mu0_plus=c.mu0_plus + perturb) if perturb else c


def check_decomposition(ms):
    worst = 0.0
    for m in ms:
        p = SineStateParams(m)
        c = math.sqrt(2 ** (m - 1) / p.M)
        built = c * (product_branch(p, m, +1) + product_branch(p, m, -1))
        worst = max(worst, np.max(np.abs(built - amplitudes(p))))
    return CheckResult("product_decomposition", float(worst), 1e-12)


def check_orthogonality(ms):
    worst = 0.0
    for m in ms:
        p = SineStateParams(m)
        for level in range(1, m + 1):
            plus = big_phi_state(p, level, +1, normalized=False).amps
            minus = big_phi_state(p, level, -1, normalized=False).amps
            worst = max(worst, abs(np.vdot(minus, plus)))
    return CheckResult("branch_orthogonality", float(worst), 1e-12)


def check_norms(ms):
    worst = 0.0
    for m in ms:
        p = SineStateParams(m)
        for level in range(1, m + 1):
            for s in (1, -1):
                amps = big_phi_state(p, level, s, normalized=False).amps
                direct = float(np.vdot(amps, amps).real)
                worst = max(worst, abs(direct - big_phi_norm(p, level, s) ** 2))
    return CheckResult("big_phi_norms", float(worst), 1e-12)


def check_telescoping(ms):
    worst = max(abs(overlap_product(SineStateParams(m), m) - 2.0 ** -m) for m in ms)
    return CheckResult("overlap_telescoping", float(worst), 1e-12)


def check_mu_normalization(ms, perturb=0.0):
    worst = 0.0
    for m in ms:
        p = SineStateParams(m)
        for level in range(1, m):
            c = _coeffs(p, level, perturb)
            for s in (1, -1):
                a, b = c.pair(s)
                worst = max(worst, abs(abs(a) ** 2 + abs(b) ** 2 - 1))
    return CheckResult("mu_normalization", float(worst), 1e-12)


def check_recurrence(ms, perturb=0.0):
    plus1 = np.array([1, 1]) / math.sqrt(2)
    minus1 = np.array([1, -1]) / math.sqrt(2)
    worst = 0.0
    for m in ms:
        p = SineStateParams(m)
        for level in range(1, m):
            c = _coeffs(p, level, perturb)
            for s in (1, -1):
                a, b = c.pair(s)
                same = big_phi_state(p, level, s).amps
                other = big_phi_state(p, level, -s).amps
                # qubit level+1 is the high factor
                rhs = a * np.kron(plus1, same) + b * np.kron(minus1, other)
                lhs = big_phi_state(p, level + 1, s).amps
                worst = max(worst, np.max(np.abs(lhs - rhs)))
    return CheckResult("recurrence", float(worst), 1e-12)


def check_unitarity(ms):
    worst = 0.0
    gates = [flag_fix_gate()]
    for m in ms:
        p = SineStateParams(m)
        for level in range(1, m):
            for method in ("controlled", "gram_schmidt"):
                gates.append(build_preparation_unitary(p, level, method))
    for g in gates:
        mat = g.matrix
        worst = max(worst, np.max(np.abs(mat.conj().T @ mat - np.eye(mat.shape[0]))))
    return CheckResult("gate_unitarity", float(worst), 1e-10)


def check_preparation(ms, perturb=0.0):
    worst = 0.0
    for m in ms:
        p = SineStateParams(m)
        state = StateVector.plus(m)
        try:
            for level in range(m - 1, 0, -1):
                gate = build_preparation_unitary(p, level, coeffs=_coeffs(p, level, perturb))
                state = apply_gate(state, gate, (level - 1, level))
        except GateValidationError as exc:
            return CheckResult("preparation_fidelity", math.inf, 1e-10, str(exc))
        state = apply_gate(state, flag_fix_gate(), 0)
        worst = max(worst, 1 - fidelity_up_to_global_phase(state, StateVector(amplitudes(p))))
    return CheckResult("preparation_fidelity", float(worst), 1e-10)


def check_equivalence(ms, grid=PHASE_GRID):
    worst = 0.0
    for m in ms:
        if m > EQUIVALENCE_MAX_M:
            continue
        p = SineStateParams(m)
        step = 2 * math.pi / p.dim
        for phase in 2 * math.pi * (np.arange(grid) + 0.25) / grid:
            for kind in STATE_KINDS:
                for covariant in (False, True):
                    offset = 0.61803398875 * step if covariant else 0.0
                    cfg = ProtocolConfig(p, phase, kind, covariant, offset)
                    e = enumerate_branches(cfg).probabilities
                    c = canonical_distribution(p, phase, offset, kind).probabilities
                    q = inverse_qft_reference(p, phase, kind, offset).probabilities
                    worst = max(worst, np.max(np.abs(e - c)), np.max(np.abs(q - c)),
                                abs(e.sum() - 1))
    return CheckResult("measurement_equivalence", float(worst), 1e-10)


def check_live_register(ms):
    worst = 0
    for m in ms:
        p = SineStateParams(m)
        for kind in STATE_KINDS:
            rec = run_streaming(ProtocolConfig(p, 1.0, kind), np.random.default_rng(m))
            worst = max(worst, rec.max_live)
    return CheckResult("live_register_bound", float(worst), 2.0)


def check_sharpness_identity(ms):
    worst = 0.0
    for m in ms:
        p = SineStateParams(m)
        s = sharpness_canonical(amplitudes(p))
        worst = max(worst, abs(1 / s ** 2 - 1 - min_holevo_variance(p.N)))
    return CheckResult("holevo_sharpness_identity", float(worst), 1e-12)


def check_holevo_minimum(ms):
    worst = 0.0
    for m in ms:
        p = SineStateParams(m)
        exact = stats_from_distribution(canonical_distribution(p, 0.4), average_offsets=True)
        worst = max(worst, abs(exact.holevo - min_holevo_variance(p.N)))
    return CheckResult("holevo_minimum", float(worst), 1e-8)


def check_uniform_baseline(ms):
    worst = 0.0
    ok = True
    for m in ms:
        p = SineStateParams(m)
        exact = stats_from_distribution(canonical_distribution(p, 0.4, 0.0, "uniform"),
                                        average_offsets=True)
        closed = (p.dim / (p.dim - 1)) ** 2 - 1
        worst = max(worst, abs(exact.holevo - closed))
        if m >= 2 and not exact.holevo > min_holevo_variance(p.N):
            ok = False
    return CheckResult("uniform_baseline", float(worst) if ok else math.inf, 1e-10)


def run_checks(max_m: int, mu_perturbation: float = 0.0):
    if max_m < 1:
        raise ValueError("max_m must be >= 1")
    ms = range(1, max_m + 1)
    return [
        check_decomposition(ms),
        check_orthogonality(ms),
        check_norms(ms),
        check_telescoping(ms),
        check_mu_normalization(ms, mu_perturbation),
        check_recurrence(ms, mu_perturbation),
        check_unitarity(ms),
        check_preparation(ms, mu_perturbation),
        check_equivalence(ms),
        check_live_register(ms),
        check_sharpness_identity(ms),
        check_holevo_minimum(ms),
        check_uniform_baseline(ms),
    ]
