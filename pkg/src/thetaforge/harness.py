"""End-to-end pipelines and empirical validation runs.

Every report is a plain JSON-able dict embedding the exact parameters,
mode, and seeds that produced it, so re-running a report's config
reproduces its numbers byte for byte.  Files are written atomically
(write-then-rename) and contain no wall-clock data.
"""

import json
import math
import os
from dataclasses import dataclass, field, fields

import numpy as np

from . import __version__, graphgen, moments, paths
from .errors import RigorError
from .mpoly import (GENERATOR_NAME, TAG_RUN, TAG_SAMPLE, derive_seed,
                    enumerate_monomials, monomial_matrix)
from .params import (Params, Reduced, Rigorous, bertrand_prime, derive_params,
                     theoretical_exponent)

ENV_OUT_DIR = "THETAFORGE_OUT"


@dataclass
class RunConfig:
    """Single source of configuration; CLI flags override file values."""

    k: int = 3
    tau: int = 1
    lam: int = 2
    q: int | None = 5
    target_n: int | None = None
    mode: str = "reduced"
    d_eff: int | None = None     # default 2k
    r_eff: int = 2
    seed: int = 1
    c: int | None = None         # default: moment_bound at r_eff
    trials: int = 200
    primes: tuple = (3, 5, 7)
    seeds_per_prime: int = 3
    slope_tol: float = 0.15
    lemma_t: int = 3
    lemma_d: int = 2
    lemma_q: int = 7
    lemma_samples: int = 10_000
    # (m, q, d, samples) cases for the joint-vanishing check
    multi_cases: tuple = ((2, 7, 2, 100_000), (3, 11, 2, 1_000_000))
    pair_cap: int = graphgen.DEFAULT_PAIR_CAP
    pairs_cap: int = paths.DEFAULT_PAIRS_CAP
    walk_cap: int = paths.DEFAULT_WALK_CAP
    chunk_rows: int = 4096
    threads: int = 1
    out_dir: str | None = None
    out: str | None = None
    graph: str | None = None
    ns: tuple = ()

    @classmethod
    def from_sources(cls, file_values: dict | None = None,
                     cli_values: dict | None = None) -> "RunConfig":
        names = {f.name for f in fields(cls)}
        merged: dict = {}
        for src in (file_values or {}), (cli_values or {}):
            for key, val in src.items():
                key = key.replace("-", "_")
                if key == "lambda":
                    key = "lam"
                if key not in names:
                    raise ValueError(f"unknown config key {key!r}")
                if val is not None:
                    merged[key] = val
        cfg = cls(**merged)
        if cfg.out_dir is None:
            cfg.out_dir = os.environ.get(ENV_OUT_DIR, ".")
        return cfg

    def resolve_params(self) -> Params:
        k, tau, lam = self.k, self.tau, self.lam
        # an explicit target size wins: q is then the Bertrand prime for it
        if self.target_n is not None:
            q = bertrand_prime(self.target_n, k * lam)
        elif self.q is not None:
            q = self.q
        else:
            raise ValueError("need q or target_n")
        if self.mode == "rigorous":
            mode = Rigorous()
        else:
            d_eff = 2 * k if self.d_eff is None else self.d_eff
            mode = Reduced(d_eff=d_eff, r_eff=self.r_eff)
        return derive_params(k, tau, lam, q, mode)

    def resolve_c(self, params: Params) -> int:
        # default threshold: the r_eff-th moment bound, so that bad
        # pairs are tail events at desk scale
        return self.c if self.c is not None else moments.moment_bound(
            params, params.r_eff)

    def out_path(self, name: str) -> str:
        return os.path.join(self.out_dir or ".", name)


def atomic_write_json(path, obj) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        json.dump(obj, fh, sort_keys=True, indent=2)
        fh.write("\n")
    os.replace(tmp, path)


def write_histogram_csv(path, histogram: dict) -> None:
    lines = ["count,num_pairs"]
    lines += [f"{cnt},{npairs}" for cnt, npairs in sorted(histogram.items())]
    graphgen._atomic_write_text(path, "\n".join(lines) + "\n")


def write_bad_pairs_csv(path, scan: paths.ScanResult) -> None:
    lines = ["w1,w2,path_count,walk_count"]
    lines += [f"{r.w1},{r.w2},{r.path_count},{r.walk_count}"
              for r in scan.bad]
    graphgen._atomic_write_text(path, "\n".join(lines) + "\n")


def _base_report(params: Params, seed: int | None) -> dict:
    return {
        "version": __version__,
        "generator": GENERATOR_NAME,
        "params": params.to_json_dict(),
        "seed": seed,
    }


def construct_and_prune(params: Params, seed: int, c: int, *,
                        pair_cap=graphgen.DEFAULT_PAIR_CAP,
                        pairs_cap=paths.DEFAULT_PAIRS_CAP,
                        chunk_rows=4096, threads=1):
    """Build, prune at c, and return (pruned graph, stats dict)."""
    g = graphgen.build_graph(params, seed, pair_cap=pair_cap,
                             chunk_rows=chunk_rows, threads=threads)
    pruned, prune_rep = graphgen.prune_bad_pairs(g, c, pairs_cap=pairs_cap,
                                                 chunk_rows=chunk_rows)
    stats = {
        "c": c,
        "edges_before": prune_rep.edges_before,
        "edges_after": prune_rep.edges_after,
        "bad_pairs": len(prune_rep.bad_pairs),
        "removed_b": list(prune_rep.removed_b),
        "max_path_count_before": prune_rep.max_path_count_before,
        "max_path_count_after": prune_rep.max_path_count_after,
    }
    return pruned, stats


def run_construct(cfg: RunConfig) -> dict:
    """Full pipeline: build, scan, prune, write graph file and report."""
    params = cfg.resolve_params()
    c = cfg.resolve_c(params)
    pruned, stats = construct_and_prune(
        params, cfg.seed, c, pair_cap=cfg.pair_cap, pairs_cap=cfg.pairs_cap,
        chunk_rows=cfg.chunk_rows, threads=cfg.threads)
    exp = graphgen.expected_edges(params)
    report = _base_report(params, cfg.seed)
    report.update(stats)
    report.update({
        "command": "construct",
        "expected_edges": exp.exact,
        "expected_edges_lower_bound": exp.lower_bound,
        "final_edge_lower_bound": moments.final_edge_lower_bound(
            params).to_json_dict(),
        "target_n": cfg.target_n,
        "n_a": params.n_a,
        "n_b": params.n_b,
    })
    report["ok"] = stats["max_path_count_after"] <= c - 1
    if cfg.out:
        graph_path = cfg.out_path(cfg.out)
        graphgen.write_graph(pruned, graph_path, target_n=cfg.target_n)
        report["graph_file"] = cfg.out
        atomic_write_json(graph_path + ".report.json", report)
    return report


def run_scaling(cfg: RunConfig) -> dict:
    """One construct-and-prune per prime (seeds averaged), slope fit."""
    if len(cfg.primes) < 3:
        raise ValueError("need at least three primes to fit a slope")
    rows = []
    for q in sorted(cfg.primes):
        sub = RunConfig.from_sources(
            None, {"k": cfg.k, "tau": cfg.tau, "lam": cfg.lam, "q": q,
                   "d_eff": cfg.d_eff, "r_eff": cfg.r_eff, "c": cfg.c,
                   "out_dir": cfg.out_dir})
        params = sub.resolve_params()
        c = sub.resolve_c(params)
        per_seed = []
        for i in range(cfg.seeds_per_prime):
            seed = derive_seed(cfg.seed, TAG_RUN, q * 1000 + i)
            _, stats = construct_and_prune(
                params, seed, c, pair_cap=cfg.pair_cap,
                pairs_cap=cfg.pairs_cap, chunk_rows=cfg.chunk_rows,
                threads=cfg.threads)
            per_seed.append(stats)
        mean_after = float(np.mean([s["edges_after"] for s in per_seed]))
        rows.append({
            "q": q,
            "n": params.n_a,
            "n_b": params.n_b,
            "c": c,
            "edges_before_mean": float(np.mean(
                [s["edges_before"] for s in per_seed])),
            "edges_after_mean": mean_after,
            "bad_pairs_total": int(sum(s["bad_pairs"] for s in per_seed)),
            "max_path_count": max(s["max_path_count_before"]
                                  for s in per_seed),
            "per_seed": per_seed,
            "excluded": mean_after <= 0,
        })
    usable = [r for r in rows if not r["excluded"]]
    params0 = derive_params(cfg.k, cfg.tau, cfg.lam, sorted(cfg.primes)[0],
                            Reduced(2 * cfg.k if cfg.d_eff is None
                                    else cfg.d_eff, cfg.r_eff))
    theo = float(theoretical_exponent(params0))
    report = _base_report(params0, cfg.seed)
    report.update({
        "command": "scaling",
        "rows": rows,
        "theoretical_slope": theo,
        "seeds_per_prime": cfg.seeds_per_prime,
    })
    if len(usable) >= 2:
        xs = np.log([r["n"] for r in usable])
        ys = np.log([r["edges_after_mean"] for r in usable])
        slope, intercept = np.polyfit(xs, ys, 1)
        resid = ys - (slope * xs + intercept)
        report["fitted_slope"] = float(slope)
        report["residuals"] = [float(v) for v in resid]
        report["ok"] = bool(abs(report["fitted_slope"] - theo)
                            <= cfg.slope_tol)
    else:
        report["fitted_slope"] = None
        report["ok"] = False
    return report


def _zero_fraction(t: int, d: int, q: int, points: np.ndarray, samples: int,
                   seed: int) -> float:
    """Fraction of uniform polynomials vanishing at every given point.

    Draws coefficient rows in bulk (the same i.i.d. law the polynomial
    sampler uses) and tests all points with one matrix product.
    """
    mono = monomial_matrix(t, d, q, points)          # (m, N)
    n_coef = mono.shape[1]
    rng = np.random.default_rng(seed)
    hits = 0
    done = 0
    while done < samples:
        batch = min(200_000, samples - done)
        coeffs = rng.integers(0, q, size=(batch, n_coef), dtype=np.int64)
        vals = coeffs @ mono.T % q
        hits += int((vals == 0).all(axis=1).sum())
        done += batch
    return hits / samples


def check_vanishing_frequency(t: int, d: int, q: int, m: int, samples: int,
                              seed: int, points=None) -> dict:
    """Empirical joint-vanishing frequency at m distinct points vs q^-m.

    m = 1 needs no hypotheses; for m >= 2 the exactness hypotheses
    q > C(m, 2) and d >= m - 1 are enforced.  Pass/fail is a four-sigma
    binomial band around q^-m.
    """
    if m < 1:
        raise ValueError("m must be at least 1")
    if m >= 2:
        need = math.comb(m, 2)
        if q <= need:
            raise RigorError(f"need q > C({m},2) = {need}, got q = {q}")
        if d < m - 1:
            raise RigorError(f"need d >= m - 1 = {m - 1}, got d = {d}")
    if points is None:
        rng = np.random.default_rng(derive_seed(seed, TAG_SAMPLE, m))
        while True:
            points = rng.integers(0, q, size=(m, t), dtype=np.int64)
            if len({tuple(p) for p in points.tolist()}) == m:
                break
    else:
        points = np.asarray(points, dtype=np.int64) % q
        if points.shape != (m, t):
            raise ValueError(f"need {m} points with {t} coordinates")
        if len({tuple(p) for p in points.tolist()}) != m:
            raise ValueError("points must be pairwise distinct")
    freq = _zero_fraction(t, d, q, points, samples, seed)
    p = q**-float(m)
    sigma = math.sqrt(p * (1 - p) / samples)
    return {
        "t": t, "d": d, "q": q, "m": m, "samples": samples, "seed": seed,
        "points": points.tolist(),
        "frequency": freq,
        "expected": p,
        "sigma": sigma,
        "deviation": abs(freq - p),
        "ok": abs(freq - p) <= 4 * sigma,
    }


def run_lemma_checks(cfg: RunConfig) -> dict:
    """Single-point and multi-point vanishing frequencies at 4 sigma."""
    single = check_vanishing_frequency(cfg.lemma_t, cfg.lemma_d, cfg.lemma_q,
                                       1, cfg.lemma_samples, cfg.seed)
    multi = [
        check_vanishing_frequency(cfg.lemma_t, d, q, m, samples, cfg.seed)
        for m, q, d, samples in cfg.multi_cases
    ]
    report = {
        "version": __version__,
        "generator": GENERATOR_NAME,
        "command": "lemma-check",
        "seed": cfg.seed,
        "single_point": single,
        "multi_point": multi,
        "ok": single["ok"] and all(c["ok"] for c in multi),
    }
    return report


def run_bertrand_table(ns, k: int, lam: int) -> dict:
    """Prime p for each n with n/4^(k*lam) < p^(k*lam) < n asserted."""
    e = k * lam
    rows = []
    all_ok = True
    for n in ns:
        row: dict = {"n": n}
        try:
            p = bertrand_prime(n, e)
            ratio = p**e / n
            row.update({
                "p": p,
                "p_pow": p**e,
                "ratio": ratio,
                "ok": 4.0**-e < ratio < 1.0,
            })
        except Exception as exc:  # flagged row, not a crash
            row.update({"p": None, "error": str(exc), "ok": False})
        all_ok = all_ok and row["ok"]
        rows.append(row)
    return {
        "version": __version__,
        "command": "bertrand",
        "exponent": e,
        "rows": rows,
        "ok": all_ok,
    }


def run_moments(cfg: RunConfig) -> dict:
    params = cfg.resolve_params()
    est = moments.estimate_moment(params, cfg.r_eff, cfg.trials, cfg.seed)
    report = _base_report(params, cfg.seed)
    report.update({
        "command": "moments",
        "bound": est.bound,
        "estimate": est.mean,
        "std_error": est.std_error,
        "trials": est.trials,
        "r_eff": est.r_eff,
        "mode": params.mode.label(),
        "rigor_ok": est.rigor_ok,
        "rigor_note": est.rigor_note,
        "ok": est.mean + 4 * est.std_error <= est.bound,
    })
    return report


def run_claim_check(cfg: RunConfig, r: int, pools: int) -> dict:
    rep = moments.verify_claim_exhaustive(cfg.k, cfg.tau, cfg.lam, r,
                                          pools, pools)
    out = rep.to_json_dict()
    out.update({
        "version": __version__,
        "command": "claim-check",
        "ok": not rep.violations,
    })
    return out


def run_scan(cfg: RunConfig) -> dict:
    """Scan a graph file for bad pairs and emit histogram + reports."""
    if not cfg.graph:
        raise ValueError("scan needs a graph file")
    g, header = graphgen.read_graph(cfg.graph)
    k = g.params.k if g.params else cfg.k
    c = cfg.c if cfg.c is not None else (
        cfg.resolve_c(g.params) if g.params else 2)
    scan = paths.scan_bad_pairs(g, c, k=k, pairs_cap=cfg.pairs_cap,
                                chunk_rows=cfg.chunk_rows,
                                walk_cap=cfg.walk_cap)
    hist = paths.dichotomy_histogram(g, k, pairs_cap=cfg.pairs_cap,
                                     chunk_rows=cfg.chunk_rows)
    report = {
        "version": __version__,
        "command": "scan",
        "graph_file": cfg.graph,
        "header": header,
        "c": c,
        "scan": scan.to_json_dict(),
        "dichotomy": hist.to_json_dict(),
        "ok": not scan.bad,
    }
    return report
