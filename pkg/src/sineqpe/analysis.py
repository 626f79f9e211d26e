"""Error densities and Holevo-variance statistics."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .protocol import (
    OutcomeDistribution,
    ProtocolConfig,
    canonical_distribution,
    enumerate_branches,
    inverse_qft_reference,
    wrap_angle,
)
from .sinestate import sine_amplitudes

SINGULAR_TOL = 1e-8
SHARPNESS_FLOOR = 1e-12
OFFSET_POINTS = 64


@dataclass(frozen=True)
class ErrorStats:
    """Phase-error moments.

    ``holevo`` uses the mean phasor, ``holevo_unbiased`` the mean cosine;
    both are ``inf`` when the relevant mean vanishes. ``sample_count`` is
    0 for moments computed from an exact distribution.
    """

    sharpness: complex
    holevo: float
    holevo_unbiased: float
    cost_luis: float
    sample_count: int

    def as_dict(self):
        return {
            "sharpness_re": float(self.sharpness.real),
            "sharpness_im": float(self.sharpness.imag),
            "sharpness_abs": float(abs(self.sharpness)),
            "holevo": self.holevo,
            "holevo_unbiased": self.holevo_unbiased,
            "cost_luis": self.cost_luis,
            "sample_count": self.sample_count,
        }


@dataclass(frozen=True)
class DensityCurve:
    thetas: np.ndarray
    densities: np.ndarray

    def integral(self) -> float:
        return float(np.trapezoid(self.densities, self.thetas))


# -- densities --------------------------------------------------------------

def fourier_density(theta, amps) -> np.ndarray:
    """(1/2pi) |sum_n a_n e^{i n theta}|^2 for the canonical measurement."""
    theta = np.asarray(theta, dtype=float)
    n = np.arange(len(amps))
    phasors = np.exp(1j * np.multiply.outer(theta, n))
    return np.abs(phasors @ np.asarray(amps)) ** 2 / (2 * math.pi)


def pdf_optimal(theta, N: int):
    theta = np.asarray(theta, dtype=float)
    c0 = math.cos(math.pi / (N + 2))
    denom = c0 - np.cos(theta)
    singular = np.abs(denom) < SINGULAR_TOL
    safe = np.where(singular, 1.0, denom)
    num = np.cos(theta * (1 + N / 2)) * math.sin(math.pi / (N + 2))
    out = (num / safe) ** 2 / (math.pi * (N + 2))
    if np.any(singular):
        out = np.where(singular, fourier_density(theta, sine_amplitudes(N)), out)
    return out[()] if out.ndim == 0 else out


def pdf_uniform(theta, N: int):
    theta = np.asarray(theta, dtype=float)
    half = np.sin(theta / 2)
    singular = np.abs(half) < SINGULAR_TOL
    safe = np.where(singular, 1.0, half)
    out = np.sin((N + 1) * theta / 2) ** 2 / safe ** 2 / (2 * math.pi * (N + 1))
    if np.any(singular):
        flat = np.full(N + 1, 1.0 / math.sqrt(N + 1))
        out = np.where(singular, fourier_density(theta, flat), out)
    return out[()] if out.ndim == 0 else out


def density_curve(pdf, N: int, points: int = 2001) -> DensityCurve:
    thetas = np.linspace(-math.pi, math.pi, points)
    return DensityCurve(thetas, pdf(thetas, N))


def min_holevo_variance(N: int) -> float:
    if N < 1:
        raise ValueError("N must be >= 1")
    return math.tan(math.pi / (N + 2)) ** 2


def sharpness_canonical(amps):
    """<e^{i error}> of the covariant canonical measurement: sum_n conj(a_n) a_{n+1}."""
    a = np.asarray(amps)
    s = np.vdot(a[:-1], a[1:])
    return float(s.real) if np.isrealobj(a) else complex(s)


# -- moments ----------------------------------------------------------------

def _stats(phasor, mean_cos, count):
    mag = abs(phasor)
    holevo = math.inf if mag < SHARPNESS_FLOOR else mag ** -2 - 1
    unbiased = math.inf if mean_cos < SHARPNESS_FLOOR else mean_cos ** -2 - 1
    return ErrorStats(complex(phasor), float(holevo), float(unbiased),
                      float(2 * (1 - mean_cos)), int(count))


def stats_from_errors(errors) -> ErrorStats:
    errors = np.asarray(errors, dtype=float).reshape(-1)
    if errors.size == 0:
        raise ValueError("no samples")
    return _stats(np.mean(np.exp(1j * errors)), float(np.mean(np.cos(errors))), errors.size)


def stats_from_samples(estimates, phases) -> ErrorStats:
    """Moments of the wrapped errors ``estimate - phase``; ``phases`` broadcasts."""
    estimates = np.asarray(estimates, dtype=float)
    if estimates.size == 0:
        raise ValueError("no samples")
    return stats_from_errors(wrap_angle(estimates - np.asarray(phases, dtype=float)))


def stats_from_records(records) -> ErrorStats:
    records = list(records)
    if not records:
        raise ValueError("no samples")
    return stats_from_errors([r.error for r in records])


def _enumerated(params, phase, offset, state_kind):
    return enumerate_branches(ProtocolConfig(params, phase, state_kind, covariant=True, offset=offset))


EXACT_SOURCES = {
    "canonical": canonical_distribution,
    "enumerated": _enumerated,
    "inverse_qft": lambda params, phase, offset, kind: inverse_qft_reference(params, phase, kind, offset),
}


def offset_grid(params, points: int = OFFSET_POINTS) -> np.ndarray:
    return np.arange(points) * (2 * math.pi / params.dim) / points


def stats_from_distribution(dist: OutcomeDistribution, average_offsets: bool = False,
                            source="canonical", points: int = OFFSET_POINTS) -> ErrorStats:
    """Exact moments of ``dist``.

    With ``average_offsets`` the distribution is recomputed by ``source``
    (a name in ``EXACT_SOURCES`` or a callable ``(params, phase, offset,
    state_kind)``) on a uniform offset grid and the moments averaged. The
    averaged integrand is periodic in the offset with period one grid
    step, so the rectangle rule is exact.
    """
    if not average_offsets:
        p = dist.probabilities
        err = dist.errors
        return _stats(np.sum(p * np.exp(1j * err)), float(np.sum(p * np.cos(err))), 0)
    make = EXACT_SOURCES[source] if isinstance(source, str) else source
    phasor, mean_cos = 0j, 0.0
    for off in offset_grid(dist.params, points):
        d = make(dist.params, dist.phase, float(off), dist.state_kind)
        err = d.errors
        phasor += np.sum(d.probabilities * np.exp(1j * err))
        mean_cos += float(np.sum(d.probabilities * np.cos(err)))
    return _stats(phasor / points, mean_cos / points, 0)


def error_moments(dist_source, params, phase, state_kind, orders=(1, 2, 3, 4),
                  points: int = OFFSET_POINTS) -> np.ndarray:
    """Offset-averaged <e^{i q error}> for each q in ``orders``."""
    make = EXACT_SOURCES[dist_source] if isinstance(dist_source, str) else dist_source
    q = np.asarray(orders)
    acc = np.zeros(q.size, dtype=complex)
    for off in offset_grid(params, points):
        d = make(params, phase, float(off), state_kind)
        acc += np.exp(1j * np.multiply.outer(q, d.errors)) @ d.probabilities
    return acc / points
