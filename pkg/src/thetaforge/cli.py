"""Command-line interface.

Subcommands: construct, prune, scan, moments, claim-check, lemma-check,
scaling, bertrand.  Flags override values from --config (a JSON file),
which override built-in defaults.  Exit code 0 only when every check
the command asserts has passed.
"""

import argparse
import json
import sys

from . import graphgen, harness, paths
from .harness import RunConfig, atomic_write_json


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--threads", type=int)
    p.add_argument("--out-dir", help="output directory "
                   f"(default ${harness.ENV_OUT_DIR} or .)")
    p.add_argument("--report", help="write the JSON report to this file")


def _add_params(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int)
    p.add_argument("--tau", type=int)
    p.add_argument("--lambda", type=int, dest="lam")
    p.add_argument("--q", type=int)
    p.add_argument("--target-n", type=int)
    p.add_argument("--d-eff", type=int)
    p.add_argument("--r-eff", type=int)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="thetaforge",
        description="Random algebraic bipartite graphs with bounded "
                    "path multiplicity: construction, oracles, experiments")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("construct", help="build, scan, prune, write files")
    _add_params(p)
    p.add_argument("--c", type=int, help="bad-pair threshold")
    p.add_argument("--out", help="graph file name")
    p.add_argument("--pairs-cap", type=int)
    _add_common(p)

    p = sub.add_parser("prune", help="prune an existing graph file")
    p.add_argument("--graph", required=True)
    p.add_argument("--c", type=int)
    p.add_argument("--out", help="pruned graph file name")
    p.add_argument("--pairs-cap", type=int)
    _add_common(p)

    p = sub.add_parser("scan", help="bad-pair scan and path histogram")
    p.add_argument("--graph", required=True)
    p.add_argument("--c", type=int)
    p.add_argument("--pairs-cap", type=int)
    p.add_argument("--csv", help="histogram CSV file name")
    p.add_argument("--bad-csv", help="bad-pair CSV file name")
    _add_common(p)

    p = sub.add_parser("moments", help="Monte Carlo moment estimate vs bound")
    _add_params(p)
    p.add_argument("--trials", type=int)
    _add_common(p)

    p = sub.add_parser("claim-check", help="exhaustive increment inequality check")
    p.add_argument("--k", type=int)
    p.add_argument("--tau", type=int)
    p.add_argument("--lambda", type=int, dest="lam")
    p.add_argument("--r", type=int, default=2)
    p.add_argument("--pools", type=int, default=3)
    _add_common(p)

    p = sub.add_parser("lemma-check", help="vanishing-frequency checks")
    p.add_argument("--t", type=int, dest="lemma_t")
    p.add_argument("--d", type=int, dest="lemma_d")
    p.add_argument("--q", type=int, dest="lemma_q")
    p.add_argument("--samples", type=int, dest="lemma_samples")
    _add_common(p)

    p = sub.add_parser("scaling", help="edges-vs-n slope over a prime list")
    _add_params(p)
    p.add_argument("--c", type=int)
    p.add_argument("--primes", help="comma-separated primes, e.g. 3,5,7")
    p.add_argument("--seeds-per-prime", type=int)
    p.add_argument("--slope-tol", type=float)
    _add_common(p)

    p = sub.add_parser("bertrand", help="prime window table for target sizes")
    p.add_argument("--n", help="comma-separated target sizes", required=True)
    p.add_argument("--k", type=int)
    p.add_argument("--lambda", type=int, dest="lam")
    _add_common(p)
    return ap


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    file_values = {}
    if args.config:
        with open(args.config) as fh:
            file_values = json.load(fh)
    skip = {"command", "config", "report", "csv", "bad_csv", "r", "pools", "n"}
    cli_values = {k: v for k, v in vars(args).items() if k not in skip}
    if "primes" in cli_values and isinstance(cli_values["primes"], str):
        cli_values["primes"] = tuple(
            int(v) for v in cli_values["primes"].split(","))
    return RunConfig.from_sources(file_values, cli_values)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        from .errors import ThetaForgeError
        if isinstance(exc, ThetaForgeError):
            print(f"error: {exc}", file=sys.stderr)
            return 2
        raise


def _dispatch(args: argparse.Namespace) -> int:
    cfg = _config_from_args(args)

    if args.command == "construct":
        report = harness.run_construct(cfg)
        print(f"edges {report['edges_before']} -> {report['edges_after']}, "
              f"bad pairs {report['bad_pairs']}, "
              f"max |S| {report['max_path_count_before']}")
    elif args.command == "prune":
        g, header = graphgen.read_graph(cfg.graph)
        k = g.params.k if g.params else cfg.k
        c = cfg.c if cfg.c is not None else (
            cfg.resolve_c(g.params) if g.params else 2)
        pruned, prep = graphgen.prune_bad_pairs(g, c, k=k,
                                                pairs_cap=cfg.pairs_cap,
                                                chunk_rows=cfg.chunk_rows)
        out = cfg.out or (str(cfg.graph) + ".pruned")
        graphgen.write_graph(pruned, cfg.out_path(out),
                             target_n=header.get("target_n"))
        report = {"command": "prune", "c": c, "graph_file": cfg.graph,
                  "out": out, "ok": True}
        report.update(prep.to_json_dict())
        print(f"removed {len(prep.removed_b)} B-vertices, "
              f"edges {prep.edges_before} -> {prep.edges_after}")
    elif args.command == "scan":
        report = harness.run_scan(cfg)
        if args.csv:
            hist = {int(k): v for k, v in
                    report["dichotomy"]["histogram"].items()}
            harness.write_histogram_csv(cfg.out_path(args.csv), hist)
        if args.bad_csv:
            g, _ = graphgen.read_graph(cfg.graph)
            k = g.params.k if g.params else cfg.k
            scan = paths.scan_bad_pairs(g, report["c"], k=k,
                                        pairs_cap=cfg.pairs_cap)
            harness.write_bad_pairs_csv(cfg.out_path(args.bad_csv), scan)
        print(f"bad pairs {report['scan']['lambda_observed']}, "
              f"max |S| {report['scan']['max_path_count']}")
    elif args.command == "moments":
        report = harness.run_moments(cfg)
        print(f"E[|S|^{report['r_eff']}] estimate {report['estimate']:.6g} "
              f"+- {report['std_error']:.3g} vs bound {report['bound']}")
        if report["rigor_note"]:
            print(f"note: {report['rigor_note']}")
    elif args.command == "claim-check":
        report = harness.run_claim_check(cfg, args.r, args.pools)
        print(f"{report['collections_checked']} collections checked, "
              f"{len(report['violations'])} violations")
    elif args.command == "lemma-check":
        report = harness.run_lemma_checks(cfg)
        single = report["single_point"]
        print(f"single-point: freq {single['frequency']:.6f} vs "
              f"1/q = {single['expected']:.6f} ({'ok' if single['ok'] else 'FAIL'})")
        for case in report["multi_point"]:
            print(f"m={case['m']}: freq {case['frequency']:.3e} vs "
                  f"q^-m = {case['expected']:.3e} "
                  f"({'ok' if case['ok'] else 'FAIL'})")
    elif args.command == "scaling":
        report = harness.run_scaling(cfg)
        print(f"fitted slope {report['fitted_slope']:.4f} vs theoretical "
              f"{report['theoretical_slope']:.4f}")
    elif args.command == "bertrand":
        ns = [int(v) for v in args.n.split(",")]
        report = harness.run_bertrand_table(ns, cfg.k, cfg.lam)
        for row in report["rows"]:
            if row.get("p"):
                print(f"n={row['n']}: p={row['p']}, ratio {row['ratio']:.4f}")
            else:
                print(f"n={row['n']}: {row.get('error')}")
    else:  # pragma: no cover
        raise AssertionError(args.command)

    if args.report:
        atomic_write_json(cfg.out_path(args.report), report)
    return 0 if report.get("ok", True) else 1


if __name__ == "__main__":
    sys.exit(main())
