"""Command-line front end.

Exit codes: 0 success, 1 failed verification, 2 usage error. Data goes to
stdout (or ``--output``), diagnostics to stderr. CSV floats carry 17
significant digits; the default seed comes from ``SINEQPE_SEED``.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from .analysis import (
    min_holevo_variance,
    pdf_optimal,
    pdf_uniform,
    stats_from_errors,
)
from .protocol import (
    MAX_DENSE_M,
    MAX_ENUMERATION_M,
    STATE_KINDS,
    ProtocolConfig,
    canonical_distribution,
    enumerate_branches,
    inverse_qft_reference,
    prepare_full,
    sample_trials,
)
from .sinestate import SineStateParams, amplitudes
from .statevec import StateVector, fidelity_up_to_global_phase
from .verify import run_checks

DEFAULT_SEED = 2024
AGREEMENT_TOL = 1e-10


def _fmt(x):
    return format(float(x), ".17g")


def _int_range(lo, hi):
    def parse(text):
        try:
            value = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
        if not lo <= value <= hi:
            raise argparse.ArgumentTypeError(f"must be in [{lo}, {hi}], got {value}")
        return value
    return parse


def _phase_spec(text):
    """A float in radians, or ``grid:P`` for P equally spaced phases."""
    if text.startswith("grid:"):
        try:
            points = int(text[5:])
        except ValueError:
            raise argparse.ArgumentTypeError(f"bad grid spec {text!r}")
        if points < 1:
            raise argparse.ArgumentTypeError("grid needs at least one point")
        return list(2 * math.pi * np.arange(points) / points)
    try:
        return [float(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected radians or grid:P, got {text!r}")


def _default_seed():
    raw = os.environ.get("SINEQPE_SEED")
    return int(raw) if raw else DEFAULT_SEED


def _write_csv(out, header, rows):
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])


def _emit(args, text):
    if args.output and args.output != "-":
        with open(args.output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _table(args, header, rows, extra=None):
    if args.format == "json":
        payload = {"columns": header, "rows": [list(r) for r in rows]}
        payload.update(extra or {})
        return json.dumps(payload, indent=2, default=float) + "\n"
    buf = io.StringIO()
    _write_csv(buf, header, rows)
    for key, value in (extra or {}).items():
        buf.write(f"# {key}={_fmt(value) if isinstance(value, float) else value}\n")
    return buf.getvalue()


# -- subcommands ------------------------------------------------------------

def cmd_prepare(args):
    params = SineStateParams(args.m)
    direct = amplitudes(params)
    prepared = prepare_full(params)
    fidelity = fidelity_up_to_global_phase(prepared, StateVector(direct))
    rows = [(n, float(direct[n]), float(prepared.amps[n].real), float(prepared.amps[n].imag))
            for n in range(params.dim)]
    _emit(args, _table(args, ["n", "amplitude", "prepared_re", "prepared_im"], rows,
                       {"fidelity": float(fidelity)}))
    return 0


def cmd_verify(args):
    checks = run_checks(args.max_m, mu_perturbation=args.inject_mu_error)
    failed = [c.name for c in checks if not c.passed]
    report = {
        "max_m": args.max_m,
        "passed": not failed,
        "failed": failed,
        "checks": [c.as_dict() for c in checks],
    }
    _emit(args, json.dumps(report, indent=2) + "\n")
    for name in failed:
        print(f"verify: check failed: {name}", file=sys.stderr)
    return 1 if failed else 0


def cmd_distribution(args):
    params = SineStateParams(args.m)
    step = 2 * math.pi / params.dim
    if not 0.0 <= args.offset < step:
        print(f"distribution: --offset must lie in [0, {step!r})", file=sys.stderr)
        return 2
    offset = args.offset if args.covariant else 0.0
    rows, worst = [], 0.0
    for phase in args.phase:
        cfg = ProtocolConfig(params, phase, args.state_kind, args.covariant, offset)
        enum = enumerate_branches(cfg)
        canon = canonical_distribution(params, cfg.phase, offset, args.state_kind)
        dense = (inverse_qft_reference(params, cfg.phase, args.state_kind, offset)
                 if params.m <= MAX_DENSE_M else None)
        worst = max(worst, float(np.max(np.abs(enum.probabilities - canon.probabilities))))
        if dense is not None:
            worst = max(worst, float(np.max(np.abs(dense.probabilities - canon.probabilities))))
        for k in range(params.dim):
            rows.append((cfg.phase, k, float(canon.grid[k]), float(enum.probabilities[k]),
                         float(canon.probabilities[k]),
                         float(dense.probabilities[k]) if dense is not None else ""))
    header = ["phase", "k", "estimate", "p_enumerated", "p_canonical", "p_inverse_qft"]
    _emit(args, _table(args, header, rows, {"max_disagreement": worst}))
    if worst > AGREEMENT_TOL:
        print(f"distribution: backends disagree by {worst:.3g}", file=sys.stderr)
        return 1
    return 0


def cmd_simulate(args):
    params = SineStateParams(args.m)
    phase = args.phase[0]
    batch = sample_trials(params, phase, args.trials, args.seed, state_kind=args.state_kind,
                          covariant=args.covariant, threads=args.threads)
    stats = stats_from_errors(batch.errors)
    report = {
        "m": params.m,
        "N": params.N,
        "state_kind": args.state_kind,
        "covariant": args.covariant,
        "phase": batch.phase,
        "trials": args.trials,
        "seed": args.seed,
        "stats": stats.as_dict(),
        "min_holevo_variance": min_holevo_variance(params.N),
    }
    _emit(args, json.dumps(report, indent=2) + "\n")
    if args.trials_csv:
        with open(args.trials_csv, "w", newline="") as fh:
            rows = ((t, float(batch.offsets[t]), int(batch.k[t]), float(batch.estimates[t]),
                     float(batch.errors[t])) for t in range(len(batch)))
            _write_csv(fh, ["trial", "offset", "k", "estimate", "error"], rows)
    return 0


def cmd_sweep(args):
    thetas = np.linspace(-math.pi, math.pi, args.points)
    opt = pdf_optimal(thetas, args.N)
    uni = pdf_uniform(thetas, args.N)
    rows = zip(thetas.tolist(), opt.tolist(), uni.tolist())
    _emit(args, _table(args, ["theta", "pdf_optimal", "pdf_uniform"], rows))
    return 0


# -- parser -----------------------------------------------------------------

def build_parser():
    parser = argparse.ArgumentParser(
        prog="sineqpe",
        description="Two-control-qubit optimal phase estimation laboratory",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--output", "-o", default=None, help="write data here instead of stdout")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")

    p = sub.add_parser("prepare", help="direct and sequentially prepared amplitudes")
    p.add_argument("--m", type=_int_range(1, MAX_ENUMERATION_M), required=True)
    common(p)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("verify", help="run the invariant suite, JSON report")
    p.add_argument("--max-m", type=_int_range(1, MAX_ENUMERATION_M), default=8)
    p.add_argument("--inject-mu-error", type=float, default=0.0, help=argparse.SUPPRESS)
    common(p, fmt=False)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("distribution", help="outcome probabilities from all three backends")
    p.add_argument("--m", type=_int_range(1, MAX_ENUMERATION_M), required=True)
    p.add_argument("--phase", type=_phase_spec, default=[0.0])
    p.add_argument("--state-kind", choices=STATE_KINDS, default="optimal")
    p.add_argument("--covariant", action="store_true")
    p.add_argument("--offset", type=float, default=0.0, help="grid offset in radians (covariant only)")
    common(p)
    p.set_defaults(func=cmd_distribution)

    p = sub.add_parser("simulate", help="Monte Carlo error statistics")
    p.add_argument("--m", type=_int_range(1, 30), required=True)
    p.add_argument("--trials", type=_int_range(1, 10 ** 9), default=100000)
    p.add_argument("--phase", type=_phase_spec, default=[0.0])
    p.add_argument("--state-kind", choices=STATE_KINDS, default="optimal")
    p.add_argument("--covariant", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--threads", type=_int_range(1, 1024), default=None)
    p.add_argument("--trials-csv", default=None, help="also write per-trial rows here")
    common(p, fmt=False)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="error densities on a theta grid")
    p.add_argument("--N", type=_int_range(1, 10 ** 6), default=10)
    p.add_argument("--points", type=_int_range(2, 10 ** 7), default=2001)
    common(p)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "seed", 0) is None:
        try:
            args.seed = _default_seed()
        except ValueError:
            parser.error("SINEQPE_SEED must be an integer")
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"sineqpe {args.command}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
