"""Command-line entry point: ``diagcirc <subcommand> [flags]``.

Every subcommand writes CSV or JSON (``--format``) to ``--output`` or
stdout. The single ``--seed`` is expanded with :class:`numpy.random.SeedSequence`
into one independent child stream per sampled object, so equal flags give
byte-identical output. Exit status is 0 when the run's internal consistency
checks pass, 1 when one fails, and 2 for usage and capacity errors.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings

import numpy as np

from . import iqp, moments, state_designs, thermo
from .errors import DiagcircError, NonConvergentError

EXIT_OK, EXIT_CHECK_FAILED, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(x):
    if isinstance(x, float):
        return f"{x:.17g}"
    if x is None:
        return ""
    return x


def _render(rows: list[dict], fmt: str, extra: dict | None = None) -> str:
    if fmt == "json":
        payload = dict(extra or {})
        payload["rows"] = rows
        return json.dumps(payload, indent=2) + "\n"
    buf = io.StringIO()
    if rows:
        w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        w.writeheader()
        for row in rows:
            w.writerow({k: _fmt(v) for k, v in row.items()})
    return buf.getvalue()


def _emit(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _children(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise UsageError(message)


# ---------------------------------------------------------------------------


def cmd_design_check(args) -> int:
    _require(1 <= args.n <= 4, "--n must be in 1..4")
    _require(1 <= args.r <= args.n, "--r must be in 1..n")
    _require(1 <= args.t <= 8, "--t must be in 1..8")
    report = moments.is_exact_design(args.n, args.r, args.t, method=args.method)
    predicted = moments.exact_design_predicate(args.n, args.r, args.t)
    row = report.to_dict()
    row["predicted_exact"] = predicted
    if args.format == "json":
        text = json.dumps(row) + "\n"
    else:
        text = _render([row], "csv")
    _emit(text, args.output)
    return EXIT_OK if report.is_exact == predicted else EXIT_CHECK_FAILED


def cmd_eta_scan(args) -> int:
    _require(args.t >= 1, "--t must be positive")
    _require(1 <= args.n_min <= args.n_max, "need 1 <= --n-min <= --n-max")
    results = [state_designs.eta_exact(n, args.t) for n in range(args.n_min, args.n_max + 1)]
    ok = all(abs(res.exact_distance - state_designs.eta_class_sum(res.n, res.t)) < 1e-9
             for res in results)
    _emit(_render([res.row() for res in results], args.format), args.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def cmd_mixing_scan(args) -> int:
    _require(2 <= args.n <= 6, "--n must be in 2..6")
    _require(0 < args.eps <= 1, "--eps must lie in (0, 1]")
    T = moments.t_conv(args.n, args.eps)
    rows = [{"T": k, "epsilon": moments.gcz_epsilon(args.n, k)} for k in range(T + 1)]
    ok = rows[-1]["epsilon"] <= args.eps and (T == 0 or rows[-2]["epsilon"] > args.eps)
    ok = ok and all(b["epsilon"] <= a["epsilon"] for a, b in zip(rows, rows[1:]))
    extra = {"n": args.n, "eps": args.eps, "t_conv": T,
             "slowest_mode": moments.gcz_slowest_mode(args.n)}
    _emit(_render(rows, args.format, extra), args.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


def _circuit_from_args(args, rng) -> iqp.IQPCircuit:
    if args.circuit:
        with open(args.circuit) as fh:
            return iqp.IQPCircuit.from_json(args.n, fh.read())
    return iqp.random_zproduct_circuit(args.n, args.gates, rng, max_arity=args.max_arity)


def cmd_iqp_sample(args) -> int:
    _require(1 <= args.n <= 14, "--n must be in 1..14")
    _require(args.shots >= 1, "--shots must be positive")
    circ_rng, shot_rng = _children(args.seed, 2)
    circuit = _circuit_from_args(args, circ_rng)
    dist = iqp.output_distribution(circuit)
    samples = iqp.sample_outputs(circuit, args.shots, shot_rng, dist=dist)
    counts = np.bincount([iqp.bitstring_to_index(s, args.n) for s in samples],
                         minlength=2 ** args.n)
    rows = [{"bitstring": iqp.index_to_bitstring(m, args.n), "probability": float(p),
             "count": int(counts[m])} for m, p in enumerate(dist.probabilities)]
    extra = {"n": args.n, "shots": args.shots, "seed": args.seed,
             "circuit": json.loads(circuit.to_json()), "samples": samples}
    _emit(_render(rows, args.format, extra), args.output)
    return EXIT_OK if abs(dist.probabilities.sum() - 1) <= 1e-10 else EXIT_CHECK_FAILED


def cmd_iqp_verify(args) -> int:
    _require(1 <= args.n <= 12, "--n must be in 1..12")
    (circ_rng,) = _children(args.seed, 1)
    circuit = _circuit_from_args(args, circ_rng)
    fast = iqp.output_amplitudes(circuit)
    energies = iqp.ising_energies(circuit)
    slow = np.array([iqp.ising_amplitude(circuit, x, energies) for x in range(2 ** args.n)])
    disc = float(np.max(np.abs(fast - slow)))
    norm_err = float(abs(np.sum(np.abs(slow) ** 2) - 1.0))
    row = {"n": args.n, "gates": len(circuit.gates), "seed": args.seed,
           "max_discrepancy": disc, "norm_error": norm_err}
    _emit(_render([row], args.format), args.output)
    return EXIT_OK if disc <= 1e-10 and norm_err <= 1e-9 else EXIT_CHECK_FAILED


def cmd_thermalize(args) -> int:
    _require(args.n_s >= 1 and args.n - args.n_s >= 1, "need 1 <= --n-s < --n")
    _require(args.r >= 1 and args.runs >= 1, "--r and --runs must be positive")
    h = thermo.ising_chain(args.n, args.J, args.h, periodic=args.periodic)
    split = thermo.SystemSplit(args.n_s, args.n - args.n_s)
    hS = h.restrict(split.system_sites)
    beta = thermo.calibrate_beta(h, args.E, args.delta)
    rows = []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        for k, gen in enumerate(_children(args.seed, args.runs)):
            out = thermo.qpe_thermalize(h, split, args.E, args.delta, args.r, gen)
            row = {"run": k}
            row.update(thermo.thermalize_report(h, split, args.E, args.delta, out, hS, beta))
            rows.append(row)
    ok = all(0.0 <= row["success_probability"] <= 1.0 for row in rows)
    _emit(_render(rows, args.format), args.output)
    return EXIT_OK if ok else EXIT_CHECK_FAILED


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="diagcirc", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, default_format="csv"):
        p.add_argument("--output", "-o", default=None, help="write here instead of stdout")
        p.add_argument("--format", choices=("csv", "json"), default=default_format)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("design-check", help="exactness of the G_r circuit as a t-design")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--r", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--method", choices=("multiset", "sweep"), default="multiset")
    common(p, "json")
    p.set_defaults(func=cmd_design_check)

    p = sub.add_parser("eta-scan", help="phase-random state design distance vs n")
    p.add_argument("--t", type=int, default=2)
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, required=True)
    common(p)
    p.set_defaults(func=cmd_eta_scan)

    p = sub.add_parser("mixing-scan", help="G_CZ distance to a diagonal 2-design vs length")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    common(p)
    p.set_defaults(func=cmd_mixing_scan)

    for name, func, helptext in (("iqp-sample", cmd_iqp_sample, "sample an IQP circuit"),
                                 ("iqp-verify", cmd_iqp_verify,
                                  "Ising partition sum vs statevector amplitudes")):
        p = sub.add_parser(name, help=helptext)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--gates", type=int, default=20)
        p.add_argument("--max-arity", type=int, default=3)
        p.add_argument("--circuit", default=None, help="JSON list of {sites, theta} gates")
        if name == "iqp-sample":
            p.add_argument("--shots", type=int, default=1000)
        common(p)
        p.set_defaults(func=func)

    p = sub.add_parser("thermalize", help="QPE thermalizer on an Ising chain")
    p.add_argument("--n", type=int, default=8)
    p.add_argument("--n-s", type=int, default=2)
    p.add_argument("--J", type=float, default=1.0)
    p.add_argument("--h", type=float, default=0.3)
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--E", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--r", type=int, default=8)
    p.add_argument("--runs", type=int, default=10)
    common(p)
    p.set_defaults(func=cmd_thermalize)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        parser.error(str(exc))
    except NonConvergentError as exc:
        print(f"diagcirc: {exc}", file=sys.stderr)
        return EXIT_CHECK_FAILED
    except DiagcircError as exc:
        print(f"diagcirc: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
