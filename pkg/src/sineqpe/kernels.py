"""Hot numeric kernels, each in a numba and a vectorised-numpy flavour.

Index convention everywhere: register position ``q`` is bit ``q`` of the
flat amplitude index. Two-qubit matrices are indexed ``2*b(q0) + b(q1)``,
i.e. the first target is the first Kronecker factor.

``stream_trials`` is bound to the numba variant unless ``SINEQPE_PURE_NUMPY``
is set; ``apply_1q`` and ``apply_2q`` also pick numba, but only for
registers of ``NUMBA_MIN_QUBITS`` or more.
"""
import math

import numpy as np

from ._accel import USE_NUMBA, njit, prange

_SQRT_HALF = 1.0 / math.sqrt(2.0)


# -- gate application -------------------------------------------------------

def apply_1q_numpy(amps, q, mat):
    n = amps.size.bit_length() - 1
    psi = amps.reshape((1 << (n - q - 1), 2, 1 << q))
    return np.einsum("ab,ibj->iaj", mat, psi).reshape(-1)


def apply_2q_numpy(amps, q0, q1, mat):
    n = amps.size.bit_length() - 1
    psi = amps.reshape((2,) * n)
    # tensor axis of register position q is n-1-q
    a0, a1 = n - 1 - q0, n - 1 - q1
    out = np.tensordot(mat.reshape(2, 2, 2, 2), psi, axes=([2, 3], [a0, a1]))
    return np.moveaxis(out, (0, 1), (a0, a1)).reshape(-1)


@njit(cache=True)
def apply_1q_numba(amps, q, mat):
    out = np.empty_like(amps)
    step = 1 << q
    for i in range(amps.size):
        if i & step:
            continue
        a = amps[i]
        b = amps[i | step]
        out[i] = mat[0, 0] * a + mat[0, 1] * b
        out[i | step] = mat[1, 0] * a + mat[1, 1] * b
    return out


@njit(cache=True)
def apply_2q_numba(amps, q0, q1, mat):
    out = np.empty_like(amps)
    s0 = 1 << q0
    s1 = 1 << q1
    idx = np.empty(4, dtype=np.int64)
    vec = np.empty(4, dtype=amps.dtype)
    for i in range(amps.size):
        if (i & s0) or (i & s1):
            continue
        idx[0] = i
        idx[1] = i | s1
        idx[2] = i | s0
        idx[3] = i | s0 | s1
        for r in range(4):
            vec[r] = amps[idx[r]]
        for r in range(4):
            acc = 0j
            for c in range(4):
                acc += mat[r, c] * vec[c]
            out[idx[r]] = acc
    return out


# -- streaming Monte Carlo --------------------------------------------------
#
# Each trial runs the two-live-qubit schedule: the flag qubit (already
# released data qubit j) and a fresh |+> enter U_{j-1}; qubit j is kicked,
# feedback-rotated, Hadamard-measured and dropped; the survivor is the next
# flag. The accumulated feedback obeys f_{j-1} = (f_j + b_j) / 2 and the
# rotation angle on qubit j is -pi * f_j.
#
# uniforms[t, c] drives the c-th measurement in time order (qubit m - c);
# a bit is 0 iff the uniform is below the normalised zero-probability.

@njit(cache=True, parallel=True)
def stream_trials_numba(m, phase, offsets, gates, fix, entangled, uniforms):
    trials = uniforms.shape[0]
    bits = np.zeros((trials, m), dtype=np.int8)
    for t in prange(trials):
        shift = phase - offsets[t]
        fb = 0.0
        f0 = _SQRT_HALF + 0j
        f1 = _SQRT_HALF + 0j
        s = np.empty(4, dtype=np.complex128)
        for c in range(m):
            j = m - c
            kick = np.exp(1j * ((2.0 ** (j - 1)) * shift - math.pi * fb))
            if entangled and j >= 2:
                # U_{j-1} on (fresh, flag); fresh |+> contributes equal weights
                g = gates[j - 2]
                for r in range(4):
                    s[r] = _SQRT_HALF * (
                        g[r, 0] * f0 + g[r, 1] * f1 + g[r, 2] * f0 + g[r, 3] * f1
                    )
                # kick + feedback on the flag (low bit), then Hadamard
                x0 = s[0]
                x1 = s[1] * kick
                y0 = s[2]
                y1 = s[3] * kick
                s[0] = _SQRT_HALF * (x0 + x1)
                s[1] = _SQRT_HALF * (x0 - x1)
                s[2] = _SQRT_HALF * (y0 + y1)
                s[3] = _SQRT_HALF * (y0 - y1)
                p0 = abs(s[0]) ** 2 + abs(s[2]) ** 2
                p1 = abs(s[1]) ** 2 + abs(s[3]) ** 2
                b = 0 if uniforms[t, c] < p0 / (p0 + p1) else 1
                norm = math.sqrt(p0 if b == 0 else p1)
                f0 = s[b] / norm
                f1 = s[2 + b] / norm
            else:
                if not entangled:
                    f0 = _SQRT_HALF + 0j
                    f1 = _SQRT_HALF + 0j
                else:
                    # flag fix |+> -> |+>, |-> -> i|->
                    a0 = fix[0, 0] * f0 + fix[0, 1] * f1
                    a1 = fix[1, 0] * f0 + fix[1, 1] * f1
                    f0 = a0
                    f1 = a1
                x1 = f1 * kick
                z0 = _SQRT_HALF * (f0 + x1)
                z1 = _SQRT_HALF * (f0 - x1)
                p0 = abs(z0) ** 2
                p1 = abs(z1) ** 2
                b = 0 if uniforms[t, c] < p0 / (p0 + p1) else 1
            bits[t, j - 1] = b
            fb = 0.5 * (fb + b)
    return bits


def stream_trials_numpy(m, phase, offsets, gates, fix, entangled, uniforms):
    trials = uniforms.shape[0]
    bits = np.zeros((trials, m), dtype=np.int8)
    shift = phase - offsets
    fb = np.zeros(trials)
    f = np.full((trials, 2), _SQRT_HALF, dtype=np.complex128)
    rows = np.arange(trials)
    for c in range(m):
        j = m - c
        kick = np.exp(1j * ((2.0 ** (j - 1)) * shift - math.pi * fb))
        if entangled and j >= 2:
            plus_f = np.concatenate([f, f], axis=1) * _SQRT_HALF
            s = plus_f @ gates[j - 2].T
            s[:, 1] *= kick
            s[:, 3] *= kick
            s = np.stack([s[:, 0] + s[:, 1], s[:, 0] - s[:, 1],
                          s[:, 2] + s[:, 3], s[:, 2] - s[:, 3]], axis=1) * _SQRT_HALF
            p0 = np.abs(s[:, 0]) ** 2 + np.abs(s[:, 2]) ** 2
            p1 = np.abs(s[:, 1]) ** 2 + np.abs(s[:, 3]) ** 2
            b = (uniforms[:, c] >= p0 / (p0 + p1)).astype(np.int8)
            norm = np.sqrt(np.where(b == 0, p0, p1))
            f = np.stack([s[rows, b], s[rows, 2 + b]], axis=1) / norm[:, None]
        else:
            if not entangled:
                f = np.full((trials, 2), _SQRT_HALF, dtype=np.complex128)
            else:
                f = f @ fix.T
            x1 = f[:, 1] * kick
            p0 = np.abs(_SQRT_HALF * (f[:, 0] + x1)) ** 2
            p1 = np.abs(_SQRT_HALF * (f[:, 0] - x1)) ** 2
            b = (uniforms[:, c] >= p0 / (p0 + p1)).astype(np.int8)
        bits[:, j - 1] = b
        fb = 0.5 * (fb + b)
    return bits


# Registers this small finish in microseconds either way; routing them to
# numpy keeps short runs from paying the one-off jit/cache load.
NUMBA_MIN_QUBITS = 12


def apply_1q(amps, q, mat):
    if USE_NUMBA and amps.size >= 1 << NUMBA_MIN_QUBITS:
        return apply_1q_numba(amps, q, mat)
    return apply_1q_numpy(amps, q, mat)


def apply_2q(amps, q0, q1, mat):
    if USE_NUMBA and amps.size >= 1 << NUMBA_MIN_QUBITS:
        return apply_2q_numba(amps, q0, q1, mat)
    return apply_2q_numpy(amps, q0, q1, mat)


stream_trials = stream_trials_numba if USE_NUMBA else stream_trials_numpy
