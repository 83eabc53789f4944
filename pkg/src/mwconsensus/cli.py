"""Command-line front end.

Exit codes: 0 success, 1 validation/parse failure, 2 predictions disagree.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .clustering import MAX_PATHS, find_clusters
from .dynamics import equilibrium_report, measure_decay_rate, simulate
from .errors import AgreementFailure, ConsensusError, StepTooLarge, ValidationError
from .generators import random_graph
from .scenario import Scenario, load_scenario
from .spectral import analyze_spectrum
from .verify import cross_check

EXIT_OK, EXIT_INVALID, EXIT_DISAGREE = 0, 1, 2


def _write(args, name: str, text: str) -> Path:
    out = Path(args.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    path.write_text(text)
    return path


def _scenario(args) -> Scenario:
    sc = load_scenario(args.scenario)
    return sc.with_overrides(weight_tol=args.tol, group_tol=args.group_tol, convergence_tol=args.convergence_tol)


def analysis_report(sc: Scenario, max_paths: int = MAX_PATHS) -> dict:
    g = sc.graph()
    part = find_clusters(g, max_paths)
    spec = analyze_spectrum(g)
    return {
        "scenario": sc.name,
        "n": g.n,
        "d": g.d,
        "edges": [
            {"i": i, "j": j, "kind": w.kind.value, "nullspace_dim": w.nullspace.dim,
             "eigenvalues": [float(x) for x in w.eigenvalues]}
            for (i, j), w in zip(g.edges, g.weights)
        ],
        "positive_trees": part.trees.as_lists(),
        "merge_trace": [s.as_dict() for s in part.steps],
        "clusters": [list(c) for c in part.clusters],
        "truncated_queries": [[v, list(c)] for v, c in part.truncated],
        "nullspace_dim": spec.nullspace_dim,
        "lambda_d_plus_1": spec.lambda_d_plus_1 if spec.consensus_predicted else None,
        "consensus_graph_theoretic": part.spanning,
        "consensus_spectral": spec.consensus_predicted,
        "agreement": part.spanning == spec.consensus_predicted,
    }


def cmd_analyze(args) -> int:
    sc = _scenario(args)
    rep = analysis_report(sc, args.max_paths)
    path = _write(args, f"{sc.name}_analysis.json", json.dumps(rep, indent=2))
    print(f"{sc.name}: clusters {rep['clusters']}")
    print(f"  dim N(L) = {rep['nullspace_dim']} (d = {rep['d']}), consensus = {rep['consensus_spectral']}")
    print(f"  agreement = {rep['agreement']}; report written to {path}")
    return EXIT_OK if rep["agreement"] else EXIT_DISAGREE


def cmd_simulate(args) -> int:
    sc = _scenario(args)
    g = sc.graph()
    try:
        traj = simulate(g, sc.initial_state(args.seed), sc.sim_config())
    except StepTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    csv_path = _write(args, f"{sc.name}_trajectory.csv", traj.to_csv())
    predicted = find_clusters(g, args.max_paths)
    report = {"scenario": sc.name, "converged": bool(traj.converged), "samples": len(traj.times),
              "t_end": float(traj.times[-1]), "step": traj.step,
              "predicted_clusters": [list(c) for c in predicted.clusters]}
    code = EXIT_OK
    if traj.converged:
        eq = equilibrium_report(g, traj, sc.group_tol, args.max_paths)
        report["equilibrium"] = eq.as_dict()
        report["agreement"] = set(eq.clusters) == set(predicted.clusters)
        if analyze_spectrum(g).consensus_predicted and g.n > 1:
            fit = measure_decay_rate(traj, g)
            report["decay"] = {"fitted_rate": fit.rate, "lambda_d_plus_1": fit.lambda_d_plus_1,
                               "bound_ok": fit.bound_ok, "degenerate": fit.degenerate}
        if not report["agreement"]:
            code = EXIT_DISAGREE
    else:
        report["agreement"] = None
    rep_path = _write(args, f"{sc.name}_equilibrium.json", json.dumps(report, indent=2))
    print(f"{sc.name}: converged={traj.converged} after t={traj.times[-1]:.6g}")
    if traj.converged:
        print(f"  observed clusters {report['equilibrium']['clusters']}, predicted {report['predicted_clusters']}")
    print(f"  trajectory: {csv_path}\n  report: {rep_path}")
    return code


def cmd_spectrum(args) -> int:
    sc = _scenario(args)
    rep = analyze_spectrum(sc.graph())
    _write(args, f"{sc.name}_spectrum.json", json.dumps(rep.as_dict(with_basis=args.basis), indent=2))
    for k, lam in enumerate(rep.eigenvalues, start=1):
        print(f"lambda_{k} = {lam:.12g}")
    print(f"nullspace dimension: {rep.nullspace_dim}")
    if args.basis:
        print(np.array2string(rep.nullspace_basis, precision=6, suppress_small=True))
    return EXIT_OK


def _print_checks(title: str, result) -> None:
    print(title)
    for c in result.checks:
        print("  " + c.line())


def cmd_verify(args) -> int:
    if args.random is not None:
        n, d, seed, count = args.random
        rng = np.random.default_rng(seed)
        passed = 0
        failures = []
        for k in range(count):
            g = random_graph(rng, n, d)
            res = cross_check(g, rng.uniform(-5, 5, n * d), max_paths=args.max_paths)
            if res.passed:
                passed += 1
            else:
                failures.append((k, [c.line() for c in res.failures()]))
        summary = {"n": n, "d": d, "seed": seed, "count": count, "passed": passed, "pass_rate": passed / count if count else 1.0,
                   "failures": failures}
        _write(args, f"random_n{n}_d{d}_s{seed}_verify.json", json.dumps(summary, indent=2))
        print(f"random verification: {passed}/{count} graphs passed ({summary['pass_rate']:.1%})")
        for k, lines in failures:
            print(f"  graph #{k}:")
            for line in lines:
                print("    " + line)
        return EXIT_OK if passed == count else EXIT_DISAGREE

    if args.scenario is None:
        print("error: verify needs a scenario or --random", file=sys.stderr)
        return EXIT_INVALID
    sc = _scenario(args)
    res = cross_check(sc.graph(), sc.initial_state(args.seed), sc.sim_config(), sc.group_tol, args.max_paths)
    summary = {"scenario": sc.name, "passed": res.passed,
               "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in res.checks]}
    _write(args, f"{sc.name}_verify.json", json.dumps(summary, indent=2))
    _print_checks(sc.name, res)
    if not res.passed:
        err = AgreementFailure("; ".join(c.line() for c in res.failures()))
        print(f"error: {err}", file=sys.stderr)
        return EXIT_DISAGREE
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mwconsensus", description="Analyze and simulate matrix-weighted consensus networks.")
    p.add_argument("--output-dir", default="out", help="directory for reports and trajectories (default: out)")
    p.add_argument("--seed", type=int, default=None, help="override the scenario seed for initial states")
    p.add_argument("--max-paths", type=int, default=MAX_PATHS, help=f"path budget per membership query (default: {MAX_PATHS})")
    p.add_argument("--tol", type=float, default=None, help="weight classification tolerance override")
    p.add_argument("--group-tol", type=float, default=None, help="distance below which final states are grouped")
    p.add_argument("--convergence-tol", type=float, default=None, help="state-derivative norm that counts as converged")
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", help="cluster analysis and consensus prediction")
    a.add_argument("scenario", help="scenario file or bundled name")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("simulate", help="simulate x' = -Lx and write a CSV trajectory")
    s.add_argument("scenario")
    s.set_defaults(func=cmd_simulate)

    e = sub.add_parser("spectrum", help="Laplacian eigenvalues and nullspace")
    e.add_argument("scenario")
    e.add_argument("--basis", action="store_true", help="also print the nullspace basis")
    e.set_defaults(func=cmd_spectrum)

    v = sub.add_parser("verify", help="cross-check spectral, graph-theoretic and simulated predictions")
    v.add_argument("scenario", nargs="?")
    v.add_argument("--random", nargs=4, type=int, metavar=("N", "D", "SEED", "COUNT"),
                   help="verify COUNT random graphs with N vertices in R^D")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except ConsensusError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DISAGREE


if __name__ == "__main__":
    sys.exit(main())
