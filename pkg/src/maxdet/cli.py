"""Command line interface.

Subcommands: solve, mvs, sample, gen, graph, bench, verify.  Machine
reports go to stdout (or --out) as canonical JSON; progress and timing
lines go to stderr so repeated runs stay byte-identical.  Exit codes:
0 success, 1 domain/precondition error, 2 internal-consistency error
(a bug in this package), 64 usage error.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
import time

import numpy as np

from . import __version__, fileio, graphs, greedy, instances, mvs, oracle, sampling
from .errors import DomainError, InternalConsistencyError, MaxdetError
from .kernels import backend_name
from .numerics import log_abs_det
from .verification import verify_instance

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _envelope(command, config):
    return {
        "tool": {"name": "maxdet", "version": __version__, "backend": backend_name()},
        "command": command,
        "config": config,
    }


def _basis_result(indices, lg, sign=None):
    out = {
        "basisIndices": [int(i) for i in sorted(indices)],
        "logAbsDet": float(lg),
    }
    if lg < 690.0:  # keep absDet only while it fits a double comfortably
        out["absDet"] = math.exp(lg)
    if sign is not None:
        out["sign"] = int(sign)
    return out


def _cmd_solve(args):
    instance, meta = fileio.load_matrix(args.input)
    config = {
        "input": args.input,
        "method": args.method,
        "eps": args.eps,
        "round": not args.no_round,
        "samples": args.samples,
        "seed": args.seed,
        "threads": args.threads,
    }
    report = _envelope("solve", config)
    report["instance"] = {"d": instance.d, "n": instance.n, "meta": meta}
    report["method"] = args.method
    if args.method == "exact":
        basis = oracle.max_subdet_bruteforce(instance)
        report["result"] = _basis_result(basis.indices, basis.log_abs_det, basis.sign)
    elif args.method == "greedy":
        trace = greedy.khachiyan_greedy(
            instance, epsilon=args.eps, apply_rounding=not args.no_round
        )
        result = _basis_result(trace.sorted_basis_indices(), trace.log_abs_det_output)
        result["pickOrder"] = [int(i) for i in trace.picked_indices]
        result["rho"] = [float(r) for r in trace.rho]
        result["rounded"] = trace.rounded
        if trace.rounded:
            kh, imp = greedy.certify_bounds(trace)
            cert = greedy.lemma1_certificate(trace)
            result["certificates"] = {
                "khachiyanFactorLog": kh,
                "improvedFactorLog": imp,
                "groupCount": cert.t,
                "alpha": cert.alpha,
            }
        report["result"] = result
    else:  # sample
        sr = sampling.best_of_n(
            instance, args.samples, args.seed, threads=args.threads
        )
        result = _basis_result(sr.best_basis.indices, sr.best_basis.log_abs_det)
        result.update(
            {
                "samples": sr.samples,
                "columnRatio": sr.column_ratio,
                "guaranteeFactorLog": sr.guarantee_factor_log,
                "empiricalMeanLog": sr.empirical_mean_log,
            }
        )
        report["result"] = result
    fileio.write_report(report, args.out)
    return 0


def _cmd_mvs(args):
    points, meta = fileio.load_points(args.input)
    config = {
        "input": args.input,
        "method": args.method,
        "eps": args.eps,
    }
    report = _envelope("mvs", config)
    report["instance"] = {"n": int(points.shape[0]), "d": int(points.shape[1]), "meta": meta}
    solution = mvs.mvs_via_anchors(points, method=args.method, epsilon=args.eps)
    report["result"] = {
        "vertexIndices": [int(v) for v in solution.vertex_indices],
        "logVolume": solution.log_volume,
        "volume": solution.volume if solution.log_volume < 690.0 else None,
    }
    fileio.write_report(report, args.out)
    return 0


def _cmd_sample(args):
    args.method = "sample"
    args.no_round = True
    args.eps = None
    return _cmd_solve(args)


def _cmd_gen(args):
    meta = {"family": args.family, "seed": args.seed}
    if args.family == "adversarial":
        if args.d is None:
            raise DomainError("gen adversarial needs --d")
        inst = instances.adversarial_instance(args.d, args.e_columns, args.seed)
        meta.update(
            {
                "d": inst.d,
                "c": inst.c,
                "eColumns": inst.e_column_count,
                "predictedRatioLog": inst.predicted_ratio_log,
                "relaxedBallContainment": True,
                "recommendNoRound": True,
            }
        )
        matrix = inst.matrix
    elif args.family == "hadamard":
        if args.d is None:
            raise DomainError("gen hadamard needs --d")
        from .numerics import InstanceMatrix

        matrix = InstanceMatrix(
            instances.sylvester_hadamard(args.d).astype(np.float64)
        )
        meta.update({"d": args.d})
    else:  # random
        if args.d is None or args.n is None:
            raise DomainError("gen random needs --d and --n")
        matrix = instances.random_instance(args.d, args.n, args.distribution, args.seed)
        meta.update({"d": args.d, "n": args.n, "distribution": args.distribution})
    fileio.save_matrix(args.out, matrix, meta) if args.out else fileio.write_report(
        fileio.matrix_payload(matrix, meta)
    )
    return 0


def _cmd_graph(args):
    g = fileio.load_graph(args.input)
    op = args.op
    if op == "subdivide":
        fileio.save_graph(args.out or sys.stdout, graphs.double_subdivide(g))
        return 0
    if op == "matching-subdivide":
        result = graphs.matching_subdivide(g)
        fileio.save_graph(args.out or sys.stdout, result.graph)
        print(
            "matching size %d: %s"
            % (len(result.matching), " ".join(f"{u}-{v}" for u, v in result.matching)),
            file=sys.stderr,
        )
        return 0
    if op == "gadget":
        fileio.save_graph(args.out or sys.stdout, graphs.gadget_graph(g))
        return 0
    if op == "incidence":
        matrix = graphs.incidence_matrix(g)
        payload = fileio.matrix_payload(
            matrix, {"family": "incidence", "vertices": g.vertex_count}
        )
        fileio.write_report(payload, args.out)
        return 0

    report = _envelope("graph", {"input": args.input, "op": op})
    report["graph"] = {"vertices": g.vertex_count, "edges": g.edge_count}
    if op == "ocp":
        packing = graphs.ocp_bruteforce(g)
        report["result"] = {
            "value": packing.value,
            "witness": [list(c) for c in packing.witness],
        }
    elif op == "triangles":
        packing = graphs.triangle_packing_bruteforce(g)
        report["result"] = {
            "value": packing.value,
            "witness": [list(c) for c in packing.witness],
        }
    elif op == "stable-set":
        report["result"] = {"value": graphs.stable_set_bruteforce(g)}
    else:  # verify
        ver = graphs.verify_ocp_subdet(g)
        report["result"] = {
            "ocp": ver.ocp_value,
            "log2MaxSubdet": ver.log2_max_subdet,
            "equal": ver.matches,
            "mode": ver.mode,
            "basisIndices": [int(i) for i in ver.basis_indices],
            "witness": [list(c) for c in ver.witness],
        }
    fileio.write_report(report, args.out)
    return 0


def _parse_range(spec):
    if ":" in spec:
        lo, hi = spec.split(":", 1)
        return range(int(lo), int(hi) + 1)
    return range(int(spec), int(spec) + 1)


def _cmd_bench(args):
    config = {
        "family": args.family,
        "trials": args.trials,
        "d": args.d,
        "nMax": args.n_max,
        "eps": args.eps,
        "seed": args.seed,
    }
    report = _envelope("bench", config)
    rows = []
    rng = np.random.default_rng(args.seed)
    dims = list(_parse_range(args.d))
    for d in dims:
        worst = 0.0
        total = 0.0
        holds = 0
        trials = 0
        for _ in range(args.trials):
            n = int(rng.integers(d, args.n_max + 1))
            inst = instances.random_instance(
                d, n, "gauss", int(rng.integers(0, 2**62))
            )
            exact = oracle.max_subdet_bruteforce(inst)
            trace = greedy.khachiyan_greedy(inst, epsilon=args.eps)
            kh, imp = greedy.certify_bounds(trace)
            gap = exact.log_abs_det - trace.log_abs_det_output
            worst = max(worst, gap)
            total += gap
            if gap <= min(kh, imp) + 1e-6:
                holds += 1
            trials += 1
        kh, imp = greedy.certify_bounds(
            greedy.GreedyTrace((0,) * d, np.ones(d), args.eps, True, 0.0, None, np.eye(d), 0.0)
        )
        rows.append(
            {
                "d": d,
                "trials": trials,
                "meanLogGap": total / trials,
                "worstLogGap": worst,
                "guaranteeLogImproved": imp,
                "guaranteeLogClassic": kh,
                "withinGuarantee": holds,
            }
        )
    report["result"] = {"rows": rows}
    print(
        f"{'d':>3} {'trials':>7} {'mean gap':>10} {'worst gap':>10} "
        f"{'improved':>10} {'classic':>10} {'ok':>5}",
        file=sys.stderr,
    )
    for r in rows:
        print(
            f"{r['d']:>3} {r['trials']:>7} {r['meanLogGap']:>10.4f} "
            f"{r['worstLogGap']:>10.4f} {r['guaranteeLogImproved']:>10.4f} "
            f"{r['guaranteeLogClassic']:>10.4f} {r['withinGuarantee']:>5}",
            file=sys.stderr,
        )
    fileio.write_report(report, args.out)
    return 0


def _cmd_verify(args):
    instance, meta = fileio.load_matrix(args.input)
    checks = verify_instance(instance, epsilon=args.eps, seed=args.seed, meta=meta)
    report = _envelope(
        "verify", {"input": args.input, "eps": args.eps, "seed": args.seed}
    )
    report["instance"] = {"d": instance.d, "n": instance.n, "meta": meta}
    report["result"] = checks
    fileio.write_report(report, args.out)
    return 0 if checks["allPassed"] else 2


def build_parser():
    parser = _Parser(prog="maxdet", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    default_threads = int(os.environ.get("MAXDET_THREADS", "1"))

    p = sub.add_parser("solve", parents=[], help="solve a max-subdeterminant instance")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=("exact", "greedy", "sample"), default="greedy")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--no-round", action="store_true")
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=default_threads)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_solve)

    p = sub.add_parser("mvs", help="solve a maximum volume simplex instance")
    p.add_argument("--input", required=True)
    p.add_argument("--method", choices=("exact", "greedy"), default="exact")
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_mvs)

    p = sub.add_parser("sample", help="best-of-N volume sampling")
    p.add_argument("--input", required=True)
    p.add_argument("--samples", type=int, default=64)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=int, default=default_threads)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_sample)

    p = sub.add_parser("gen", help="generate instances")
    p.add_argument("--family", choices=("adversarial", "random", "hadamard"), required=True)
    p.add_argument("--d", type=int)
    p.add_argument("--n", type=int)
    p.add_argument("--e-columns", type=int, default=None)
    p.add_argument("--distribution", choices=instances.DISTRIBUTIONS, default="gauss")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("graph", help="graph pipeline operations")
    p.add_argument("--input", required=True)
    p.add_argument(
        "--op",
        choices=(
            "subdivide",
            "matching-subdivide",
            "gadget",
            "incidence",
            "ocp",
            "triangles",
            "stable-set",
            "verify",
        ),
        required=True,
    )
    p.add_argument("--out")
    p.set_defaults(func=_cmd_graph)

    p = sub.add_parser("bench", help="achieved vs guaranteed ratio table")
    p.add_argument("--family", choices=("random",), default="random")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--d", default="2:4")
    p.add_argument("--n-max", type=int, default=10)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("verify", help="run all bound checks on an instance")
    p.add_argument("--input", required=True)
    p.add_argument("--eps", type=float, default=0.25)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=_cmd_verify)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    start = time.perf_counter()
    try:
        rc = args.func(args)
    except DomainError as e:
        print(f"maxdet: error: {e}", file=sys.stderr)
        return 1
    except InternalConsistencyError as e:
        print(f"maxdet: internal error: {e}", file=sys.stderr)
        return 2
    except MaxdetError as e:
        print(f"maxdet: error: {e}", file=sys.stderr)
        return 1
    elapsed_ms = (time.perf_counter() - start) * 1000.0
    print(f"maxdet {args.command}: {elapsed_ms:.1f} ms", file=sys.stderr)
    return rc


if __name__ == "__main__":
    sys.exit(main())
