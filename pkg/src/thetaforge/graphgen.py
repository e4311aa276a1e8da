"""Random bipartite graph construction and bad-pair pruning.

Part A is F_q^(k*lambda) and part B is F_q^(k*tau); a pair (u, v) is an
edge exactly when all gamma sampled polynomials vanish at the combined
point u ++ v.  Vertices are identified with base-q digit strings
(big-endian), and adjacency is stored CSR-style in both directions so
the graph is cheap to share and to hand to scipy.

The builder restricts every polynomial to each A-vertex (batched as a
matrix product over the split monomial bases) and evaluates the
restrictions against a precomputed B-side monomial matrix.  All
arithmetic is exact integer arithmetic, so results are bit-identical
regardless of chunking or thread count.
"""

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import paths as _paths
from .errors import CapacityError, DimensionError
from .mpoly import (GENERATOR_NAME, PolySystem, evaluate, matmul_mod,
                    monomial_matrix, sample_system, split_coefficient_matrix)
from .params import Params, params_from_json_dict

DEFAULT_PAIR_CAP = 100_000_000
FILE_MAGIC = "THETA-FORGE v1"


@dataclass(frozen=True)
class VertexCodec:
    """Bijection between vertex ids and coordinate vectors (base-q digits)."""

    q: int
    dim: int

    @property
    def size(self) -> int:
        return self.q**self.dim

    def encode(self, vec) -> int:
        vec = np.asarray(vec, dtype=np.int64)
        if vec.shape != (self.dim,):
            raise DimensionError(f"vector must have {self.dim} coordinates")
        out = 0
        for x in vec.tolist():
            out = out * self.q + int(x) % self.q
        return out

    def decode(self, vid: int) -> np.ndarray:
        return self.decode_block(np.array([vid]))[0]

    def decode_block(self, ids) -> np.ndarray:
        ids = np.asarray(ids, dtype=np.int64)
        out = np.empty((len(ids), self.dim), dtype=np.int64)
        rem = ids.copy()
        for i in range(self.dim - 1, -1, -1):
            out[:, i] = rem % self.q
            rem //= self.q
        return out

    def all_points(self) -> np.ndarray:
        return self.decode_block(np.arange(self.size))


@dataclass(frozen=True, eq=False)
class BipartiteGraph:
    """Immutable bipartite graph with forward and reverse adjacency."""

    n_a: int
    n_b: int
    indptr_a: np.ndarray
    indices_a: np.ndarray
    indptr_b: np.ndarray
    indices_b: np.ndarray
    params: Params | None = None
    master_seed: int | None = None
    removed_b: frozenset = field(default_factory=frozenset)

    @property
    def n_edges(self) -> int:
        return len(self.indices_a)

    def neighbors_a(self, u: int) -> np.ndarray:
        return self.indices_a[self.indptr_a[u]:self.indptr_a[u + 1]]

    def neighbors_b(self, v: int) -> np.ndarray:
        return self.indices_b[self.indptr_b[v]:self.indptr_b[v + 1]]

    def degrees_a(self) -> np.ndarray:
        return np.diff(self.indptr_a)

    def degrees_b(self) -> np.ndarray:
        return np.diff(self.indptr_b)

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Edge list sorted by (u, v)."""
        us = np.repeat(np.arange(self.n_a, dtype=np.int64), self.degrees_a())
        return us, self.indices_a.copy()

    def to_biadjacency(self):
        """scipy CSR biadjacency matrix (n_a x n_b) with 0/1 entries."""
        from scipy.sparse import csr_matrix
        return csr_matrix(
            (np.ones(self.n_edges, dtype=np.int64), self.indices_a,
             self.indptr_a), shape=(self.n_a, self.n_b))


def _csr_from_sorted(keys: np.ndarray, values: np.ndarray, n_rows: int):
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.add.at(indptr, keys + 1, 1)
    np.cumsum(indptr, out=indptr)
    return indptr, values.astype(np.int64)


def from_edges(n_a: int, n_b: int, us, vs, params: Params | None = None,
               master_seed: int | None = None,
               removed_b: frozenset = frozenset()) -> BipartiteGraph:
    """Build a graph from an edge list, validating ranges and duplicates."""
    us = np.asarray(us, dtype=np.int64)
    vs = np.asarray(vs, dtype=np.int64)
    if us.shape != vs.shape:
        raise ValueError("edge arrays must have matching length")
    if len(us) and (us.min() < 0 or us.max() >= n_a):
        raise ValueError("A-vertex id out of range")
    if len(vs) and (vs.min() < 0 or vs.max() >= n_b):
        raise ValueError("B-vertex id out of range")
    order = np.lexsort((vs, us))
    us, vs = us[order], vs[order]
    if len(us) > 1:
        dup = (np.diff(us) == 0) & (np.diff(vs) == 0)
        if dup.any():
            raise ValueError("duplicate edges")
    if removed_b and len(vs) and np.isin(vs, np.fromiter(removed_b, dtype=np.int64)).any():
        raise ValueError("removed B-vertices must have no incident edges")
    indptr_a, indices_a = _csr_from_sorted(us, vs, n_a)
    order_b = np.lexsort((us, vs))
    indptr_b, indices_b = _csr_from_sorted(vs[order_b], us[order_b], n_b)
    return BipartiteGraph(n_a=n_a, n_b=n_b, indptr_a=indptr_a,
                          indices_a=indices_a, indptr_b=indptr_b,
                          indices_b=indices_b, params=params,
                          master_seed=master_seed,
                          removed_b=frozenset(removed_b))


def complete_bipartite(n_a: int, n_b: int) -> BipartiteGraph:
    us = np.repeat(np.arange(n_a), n_b)
    vs = np.tile(np.arange(n_b), n_a)
    return from_edges(n_a, n_b, us, vs)


def check_invariants(g: BipartiteGraph) -> None:
    """Raise ValueError if the adjacency structure is inconsistent."""
    if g.indptr_a[-1] != g.indptr_b[-1]:
        raise ValueError("forward and reverse edge counts differ")
    for indptr, indices, n_rows, n_cols, name in (
            (g.indptr_a, g.indices_a, g.n_a, g.n_b, "A"),
            (g.indptr_b, g.indices_b, g.n_b, g.n_a, "B")):
        if len(indptr) != n_rows + 1 or indptr[0] != 0:
            raise ValueError(f"bad indptr for part {name}")
        if len(indices) and (indices.min() < 0 or indices.max() >= n_cols):
            raise ValueError(f"neighbor id out of range for part {name}")
        for row in range(n_rows):
            nbrs = indices[indptr[row]:indptr[row + 1]]
            if len(nbrs) > 1 and not (np.diff(nbrs) > 0).all():
                raise ValueError(f"neighbor list of {name}-vertex {row} "
                                 "not sorted strictly")
    us, vs = g.edges()
    vs2 = np.repeat(np.arange(g.n_b, dtype=np.int64), g.degrees_b())
    us2 = g.indices_b
    order = np.lexsort((vs2, us2))
    if not (np.array_equal(us, us2[order]) and np.array_equal(vs, vs2[order])):
        raise ValueError("forward and reverse adjacency disagree")
    if g.removed_b:
        removed = np.fromiter(g.removed_b, dtype=np.int64)
        if (removed < 0).any() or (removed >= g.n_b).any():
            raise ValueError("removed B-vertex id out of range")
        if g.degrees_b()[removed].sum() != 0:
            raise ValueError("removed B-vertices still have edges")


@dataclass(frozen=True)
class ExpectedEdges:
    exact: int        # q ** (k(lambda+tau) - gamma)
    lower_bound: int  # q ** ((lambda+tau)(k+1)/2), an integer for odd k


def expected_edges(params: Params) -> ExpectedEdges:
    exact = params.q**(params.t - params.gamma)
    lower = params.q**((params.lam + params.tau) * (params.k + 1) // 2)
    return ExpectedEdges(exact=exact, lower_bound=lower)


def _edge_chunk(lo, hi, codec_a, coeff_mats, mono_b_t, q, gamma):
    ids = np.arange(lo, hi, dtype=np.int64)
    pts = codec_a.decode_block(ids)
    n_b = mono_b_t.shape[1]
    if gamma == 0:
        mask = np.ones((hi - lo, n_b), dtype=bool)
    else:
        front = monomial_matrix(pts.shape[1], coeff_mats[0][1], q, pts)
        mask = None
        for cm, _ in coeff_mats:
            restricted = matmul_mod(front, cm, q)
            values = matmul_mod(restricted, mono_b_t, q)
            mask = (values == 0) if mask is None else mask & (values == 0)
    us, vs = np.nonzero(mask)
    return us + lo, vs


def build_graph(params: Params, master_seed: int | None = None, *,
                system: PolySystem | None = None,
                pair_cap: int = DEFAULT_PAIR_CAP, chunk_rows: int = 4096,
                threads: int = 1, method: str = "fast") -> BipartiteGraph:
    """Construct the random graph for ``params``.

    The edge set is exactly the common zero locus of the system's
    polynomials over A x B.  ``system`` may be supplied for tests
    (e.g. an empty system yields the complete bipartite graph);
    otherwise it is sampled from ``master_seed``.
    """
    n_a, n_b = params.n_a, params.n_b
    if n_a * n_b > pair_cap:
        raise CapacityError(
            f"{n_a} x {n_b} pairs exceed pair cap {pair_cap}")
    if system is None:
        if master_seed is None:
            raise ValueError("master_seed is required when no system is given")
        system = sample_system(params.gamma, params.t, params.d_eff,
                               params.q, master_seed)
    for f in system.polys:
        if (f.t, f.q) != (params.t, params.q):
            raise DimensionError("system does not match params")
    seed = system.master_seed if master_seed is None else master_seed
    ka, kt, q = params.k * params.lam, params.k * params.tau, params.q
    codec_a = VertexCodec(q=q, dim=ka)
    codec_b = VertexCodec(q=q, dim=kt)

    if method == "naive":
        us, vs = [], []
        pts_b = codec_b.all_points()
        for u in range(n_a):
            pu = codec_a.decode(u)
            for v in range(n_b):
                point = np.concatenate([pu, pts_b[v]])
                if all(evaluate(f, point) == 0 for f in system.polys):
                    us.append(u)
                    vs.append(v)
        return from_edges(n_a, n_b, us, vs, params=params, master_seed=seed)
    if method != "fast":
        raise ValueError(f"unknown method {method!r}")

    mono_b_t = np.ascontiguousarray(
        monomial_matrix(kt, params.d_eff, q, codec_b.all_points()).T)
    coeff_mats = [(split_coefficient_matrix(f, ka), f.d) for f in system.polys]

    spans = [(lo, min(lo + chunk_rows, n_a)) for lo in range(0, n_a, chunk_rows)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(
                lambda s: _edge_chunk(s[0], s[1], codec_a, coeff_mats,
                                      mono_b_t, q, system.gamma), spans))
    else:
        parts = [_edge_chunk(lo, hi, codec_a, coeff_mats, mono_b_t, q,
                             system.gamma) for lo, hi in spans]
    us = np.concatenate([p[0] for p in parts]) if parts else np.empty(0, np.int64)
    vs = np.concatenate([p[1] for p in parts]) if parts else np.empty(0, np.int64)
    return from_edges(n_a, n_b, us, vs, params=params, master_seed=seed)


@dataclass(frozen=True)
class PruneReport:
    edges_before: int
    edges_after: int
    bad_pairs: tuple          # (w1, w2, path_count) triples
    removed_b: tuple          # newly removed B-vertex ids, sorted
    max_path_count_before: int
    max_path_count_after: int

    def to_json_dict(self) -> dict:
        return {
            "edges_before": self.edges_before,
            "edges_after": self.edges_after,
            "bad_pairs": [list(t) for t in self.bad_pairs],
            "removed_b": list(self.removed_b),
            "max_path_count_before": self.max_path_count_before,
            "max_path_count_after": self.max_path_count_after,
        }


def prune_bad_pairs(g: BipartiteGraph, c: int, *, k: int | None = None,
                    pairs_cap: int = DEFAULT_PAIR_CAP,
                    chunk_rows: int = 4096):
    """Remove the B-endpoint of every pair with more than c-1 paths.

    Returns (pruned graph, PruneReport).  A post-scan confirms that no
    remaining pair exceeds c-1 paths (removal only destroys paths, so
    one pass suffices).
    """
    if k is None:
        if g.params is None:
            raise ValueError("k is required for graphs without params")
        k = g.params.k
    scan = _paths.scan_bad_pairs(g, c, k=k, pairs_cap=pairs_cap,
                                 chunk_rows=chunk_rows)
    doomed = sorted({rep.w2 for rep in scan.bad})
    if doomed:
        us, vs = g.edges()
        keep = ~np.isin(vs, np.asarray(doomed, dtype=np.int64))
        us, vs = us[keep], vs[keep]
    else:
        us, vs = g.edges()
    pruned = from_edges(g.n_a, g.n_b, us, vs, params=g.params,
                        master_seed=g.master_seed,
                        removed_b=g.removed_b | set(doomed))
    rescan = _paths.scan_bad_pairs(pruned, c, k=k, pairs_cap=pairs_cap,
                                   chunk_rows=chunk_rows)
    if rescan.bad:
        raise RuntimeError("pruning left bad pairs behind; this is a bug")
    report = PruneReport(
        edges_before=g.n_edges, edges_after=pruned.n_edges,
        bad_pairs=tuple((rep.w1, rep.w2, rep.path_count) for rep in scan.bad),
        removed_b=tuple(doomed),
        max_path_count_before=scan.max_path_count,
        max_path_count_after=rescan.max_path_count)
    return pruned, report


def _atomic_write_text(path, text: str) -> None:
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def write_graph(g: BipartiteGraph, path, target_n: int | None = None) -> None:
    """Text graph file: magic line, JSON header line, one "u v" per line."""
    from . import __version__
    header = {
        "params": g.params.to_json_dict() if g.params else None,
        "n_a": g.n_a,
        "n_b": g.n_b,
        "edges": g.n_edges,
        "removed_b": sorted(g.removed_b),
        "master_seed": g.master_seed,
        "generator": GENERATOR_NAME,
        "target_n": target_n,
        "version": __version__,
    }
    us, vs = g.edges()
    lines = [FILE_MAGIC, json.dumps(header, sort_keys=True)]
    lines.extend(f"{u} {v}" for u, v in zip(us.tolist(), vs.tolist()))
    _atomic_write_text(path, "\n".join(lines) + "\n")


def read_graph(path) -> tuple[BipartiteGraph, dict]:
    """Parse and validate a v1 graph file; returns (graph, header)."""
    with open(path) as fh:
        magic = fh.readline().rstrip("\n")
        if magic != FILE_MAGIC:
            raise ValueError(f"not a {FILE_MAGIC} file: {path}")
        header = json.loads(fh.readline())
        us, vs = [], []
        for line in fh:
            if not line.strip():
                continue
            u, v = line.split()
            us.append(int(u))
            vs.append(int(v))
    params = params_from_json_dict(header["params"]) if header["params"] else None
    g = from_edges(header["n_a"], header["n_b"], us, vs, params=params,
                   master_seed=header.get("master_seed"),
                   removed_b=frozenset(header.get("removed_b", ())))
    if g.n_edges != header["edges"]:
        raise ValueError("edge count does not match header")
    check_invariants(g)
    return g, header
