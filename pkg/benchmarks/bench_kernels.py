"""Time the numba and numpy kernels side by side.

    python3 benchmarks/bench_kernels.py --m 6 --trials 100000

The first numba call compiles (or loads the on-disk cache) and is
reported separately as warm-up.
"""
import argparse
import time

import numpy as np

from sineqpe import kernels
from sineqpe._accel import HAVE_NUMBA
from sineqpe.protocol import ProtocolConfig, run_streaming, sample_trials
from sineqpe.sinestate import SineStateParams


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return min(times)


def bench_stream(m, trials, repeat):
    params = SineStateParams(m)
    backends = {"numpy": kernels.stream_trials_numpy}
    if HAVE_NUMBA:
        backends["numba"] = kernels.stream_trials_numba
    results = {}
    for name, fn in backends.items():
        warm = best_of(lambda: sample_trials(params, 1.0, 16, 0, covariant=True, backend=fn), 1)
        t = best_of(lambda: sample_trials(params, 1.0, trials, 0, covariant=True, backend=fn), repeat)
        results[name] = t
        print(f"stream_trials[{name:5s}] m={m} trials={trials}: {t * 1e3:9.2f} ms "
              f"({t / trials * 1e9:7.1f} ns/trial, warm-up {warm * 1e3:.0f} ms)")
    shots = max(trials // 100, 200)
    rng = np.random.default_rng(0)
    cfg = ProtocolConfig(params, 1.0, covariant=True, offset=0.01)
    t = best_of(lambda: [run_streaming(cfg, rng) for _ in range(shots)], 1)
    print(f"run_streaming[python] m={m} shots={shots}: {t / shots * 1e6:9.1f} us/shot")
    if "numba" in results:
        print(f"numba speed-up over numpy: {results['numpy'] / results['numba']:.1f}x")


def bench_gates(n, repeat):
    rng = np.random.default_rng(1)
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    amps /= np.linalg.norm(amps)
    u2 = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))[0]
    u4 = np.linalg.qr(rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4)))[0]
    pairs = [("apply_1q", kernels.apply_1q_numpy, kernels.apply_1q_numba, (amps, n // 2, u2)),
             ("apply_2q", kernels.apply_2q_numpy, kernels.apply_2q_numba, (amps, 1, n - 2, u4))]
    for name, np_fn, nb_fn, args in pairs:
        line = f"{name} n={n}: numpy {best_of(lambda: np_fn(*args), repeat) * 1e6:9.1f} us"
        if HAVE_NUMBA:
            nb_fn(*args)
            line += f", numba {best_of(lambda: nb_fn(*args), repeat) * 1e6:9.1f} us"
        print(line)


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--m", type=int, default=6)
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--qubits", type=int, default=16, help="register size for the gate kernels")
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    bench_stream(args.m, args.trials, args.repeat)
    bench_gates(args.qubits, args.repeat)


if __name__ == "__main__":
    main()
