"""Moment bookkeeping: exhaustive path-collection enumeration, the
per-increment inequality oracle, closed-form tail bounds, and seeded
Monte Carlo estimation of E[|S|^r] for a fixed cross pair.

All closed-form values use exact integer or Fraction arithmetic;
floats appear only in Monte Carlo summaries.
"""

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .errors import CapacityError, RigorError
from .mpoly import (DEFAULT_GRID_CAP, TAG_TRIAL, PolySystem, derive_seed,
                    grid_values, matmul_mod, monomial_matrix, restrict,
                    restrict_back, sample_system)
from .params import Params

DEFAULT_COLLECTION_CAP = 10_000_000


@dataclass(frozen=True)
class CollectionStats:
    """Ordered r-tuples of length-k paths grouped by union shape."""

    r: int
    m: int    # edges in the union
    n1: int   # distinct inner A-vertices in the union
    n2: int   # distinct inner B-vertices in the union
    multiplicity: int


@dataclass(frozen=True)
class IncrementStats:
    """Per-path increments (new edges, new inner A, new inner B)."""

    increments: tuple

    def totals(self) -> tuple[int, int, int]:
        m = sum(i[0] for i in self.increments)
        n1 = sum(i[1] for i in self.increments)
        n2 = sum(i[2] for i in self.increments)
        return m, n1, n2


def _pool_paths(k: int, pool_a: int, pool_b: int) -> list[dict]:
    """All length-k paths from w1 to w2 in the complete bipartite graph
    with pool_a spare A-vertices and pool_b spare B-vertices.

    A-labels: 0 is w1, spares are 1..pool_a.  B-labels likewise with 0
    as w2.  Edges are (a_label, b_label) pairs.
    """
    x = (k - 1) // 2
    paths = []
    for bs in itertools.permutations(range(1, pool_b + 1), x):
        for as_ in itertools.permutations(range(1, pool_a + 1), x):
            verts_a = (0,) + as_          # w1, inner A in path order
            verts_b = bs + (0,)           # inner B in path order, w2
            edges = []
            for i in range(x + 1):
                edges.append((verts_a[i], verts_b[i]))       # A_i - B_i
                if i < x:
                    edges.append((verts_a[i + 1], verts_b[i]))  # B_i - A_{i+1}
            paths.append({
                "edges": frozenset(edges),
                "inner_a": frozenset(as_),
                "inner_b": frozenset(bs),
            })
    return paths


def _collection_iter(k: int, r: int, pool_a: int, pool_b: int, cap: int):
    paths = _pool_paths(k, pool_a, pool_b)
    total = len(paths) ** r
    if total > cap:
        raise CapacityError(
            f"{total} ordered collections exceed cap {cap}")
    return itertools.product(paths, repeat=r)


def collection_increments(collection) -> IncrementStats:
    """m_j, n1_j, n2_j: what path j adds beyond the union of paths < j."""
    seen_e: frozenset = frozenset()
    seen_a: frozenset = frozenset()
    seen_b: frozenset = frozenset()
    incs = []
    for p in collection:
        incs.append((len(p["edges"] - seen_e), len(p["inner_a"] - seen_a),
                     len(p["inner_b"] - seen_b)))
        seen_e |= p["edges"]
        seen_a |= p["inner_a"]
        seen_b |= p["inner_b"]
    return IncrementStats(increments=tuple(incs))


def enumerate_collections(k: int, r: int, pool_a: int, pool_b: int,
                          cap: int = DEFAULT_COLLECTION_CAP
                          ) -> list[CollectionStats]:
    """Exhaustive union statistics of ordered r-path collections."""
    counter: dict[tuple[int, int, int], int] = {}
    for coll in _collection_iter(k, r, pool_a, pool_b, cap):
        edges = frozenset().union(*(p["edges"] for p in coll))
        n1 = len(frozenset().union(*(p["inner_a"] for p in coll)))
        n2 = len(frozenset().union(*(p["inner_b"] for p in coll)))
        key = (len(edges), n1, n2)
        counter[key] = counter.get(key, 0) + 1
    return [CollectionStats(r=r, m=m, n1=n1, n2=n2, multiplicity=mult)
            for (m, n1, n2), mult in sorted(counter.items())]


def check_claim_inequality(k: int, tau: int, lam: int, m: int, n1: int,
                           n2: int) -> bool:
    """k*lambda*n1 + k*tau*n2 <= x*(lambda+tau)*m with x = (k-1)/2."""
    x = (k - 1) // 2
    return k * (lam * n1 + tau * n2) <= x * (lam + tau) * m


def increment_case_holds(m_j: int, n1_j: int, n2_j: int) -> bool:
    """One of the three structural inequality sets for a path increment.

    An empty increment (no new edges, hence no new inner vertices) adds
    nothing and is vacuously fine.
    """
    if m_j == 0 and n1_j == 0 and n2_j == 0:
        return True
    return ((m_j >= 2 * n1_j + 1 and m_j >= 2 * n2_j + 1)
            or (m_j >= 2 * n1_j + 2 and m_j >= 2 * n2_j)
            or (m_j >= 2 * n1_j and m_j >= 2 * n2_j + 2))


@dataclass(frozen=True)
class ClaimReport:
    k: int
    tau: int
    lam: int
    r: int
    pool_a: int
    pool_b: int
    collections_checked: int
    stats: tuple           # distinct CollectionStats
    violations: tuple      # (kind, payload) pairs, empty on success

    def to_json_dict(self) -> dict:
        return {
            "k": self.k, "tau": self.tau, "lambda": self.lam, "r": self.r,
            "pool_a": self.pool_a, "pool_b": self.pool_b,
            "collections_checked": self.collections_checked,
            "distinct_stats": [
                {"m": s.m, "n1": s.n1, "n2": s.n2,
                 "multiplicity": s.multiplicity} for s in self.stats],
            "violations": [list(v) for v in self.violations],
        }


def verify_claim_exhaustive(k: int, tau: int, lam: int, r: int, pool_a: int,
                            pool_b: int,
                            cap: int = DEFAULT_COLLECTION_CAP) -> ClaimReport:
    """Brute-force check of the aggregate inequality and the per-path
    increment cases over every ordered collection in the pool."""
    counter: dict[tuple[int, int, int], int] = {}
    violations: list[tuple] = []
    checked = 0
    for coll in _collection_iter(k, r, pool_a, pool_b, cap):
        checked += 1
        inc = collection_increments(coll)
        m, n1, n2 = inc.totals()
        key = (m, n1, n2)
        counter[key] = counter.get(key, 0) + 1
        if not check_claim_inequality(k, tau, lam, m, n1, n2):
            violations.append(("aggregate", key))
        for j, (mj, n1j, n2j) in enumerate(inc.increments):
            if not increment_case_holds(mj, n1j, n2j):
                violations.append(("increment", (j, mj, n1j, n2j)))
    stats = tuple(CollectionStats(r=r, m=m, n1=n1, n2=n2, multiplicity=mult)
                  for (m, n1, n2), mult in sorted(counter.items()))
    return ClaimReport(k=k, tau=tau, lam=lam, r=r, pool_a=pool_a,
                       pool_b=pool_b, collections_checked=checked,
                       stats=stats, violations=tuple(violations))


def gamma_sets(k: int, r: int, pool_a: int, pool_b: int,
               cap: int = DEFAULT_COLLECTION_CAP) -> dict[int, set]:
    """m -> set of realizable (n1, n2) pairs, from enumeration."""
    out: dict[int, set] = {}
    for s in enumerate_collections(k, r, pool_a, pool_b, cap):
        out.setdefault(s.m, set()).add((s.n1, s.n2))
    return out


def prm_upper_bound(params: Params, m: int, gamma_m,
                    r: int | None = None) -> tuple[int, bool]:
    """Sum of q^(k*lambda*n1 + k*tau*n2) over (n1, n2) in gamma_m.

    Also reports whether |gamma_m| <= x^2 r^2 (r defaults to params.r).
    """
    if r is None:
        r = params.r
    k, tau, lam, q = params.k, params.tau, params.lam, params.q
    bound = sum(q**(k * lam * n1 + k * tau * n2) for n1, n2 in gamma_m)
    gamma_ok = len(set(gamma_m)) <= params.x**2 * r**2
    return bound, gamma_ok


def moment_bound(params: Params, r_eff: int) -> int:
    """k * ((k-1)/2)^2 * r^3, the closed-form bound on E[|S|^r]."""
    return params.k * params.x**2 * r_eff**3


def markov_tail(params: Params, r_eff: int, s) -> Fraction:
    """Tail bound P[|S| >= s] <= moment_bound / s^r, exact Fraction."""
    s = Fraction(s)
    if s <= 0:
        raise ValueError("s must be positive")
    return Fraction(moment_bound(params, r_eff)) / s**r_eff


def lambda_expectation_bound(params: Params, r_eff: int) -> Fraction:
    """Expected bad pairs: q^(k(lambda+tau)) * tail at s = q/2."""
    return params.q**params.t * markov_tail(params, r_eff,
                                            Fraction(params.q, 2))


@dataclass(frozen=True)
class FinalBound:
    main_term: int
    correction_term: int
    difference: int
    main_exponent: Fraction
    correction_exponent: Fraction
    main_dominates: bool

    def to_json_dict(self) -> dict:
        return {
            "main_term": self.main_term,
            "correction_term": self.correction_term,
            "difference": self.difference,
            "main_exponent": str(self.main_exponent),
            "correction_exponent": str(self.correction_exponent),
            "main_dominates": self.main_dominates,
        }


def final_edge_lower_bound(params: Params) -> FinalBound:
    """Post-pruning expected-edge lower bound at the derived order r.

    main term      q^(k(lambda+tau)(k+1)/(2k))
    correction     q^(k(lambda+tau) + k*lambda - r) * k x^2 r^3 * 2^r

    The exponents are compared exactly on rationals; with the derived r
    the correction exponent is the main exponent minus one.
    """
    k, tau, lam, q, r = params.k, params.tau, params.lam, params.q, params.r
    main_exp = Fraction(k * (lam + tau) * (k + 1), 2 * k)
    corr_exp = Fraction(k * (lam + tau) + k * lam - r)
    main = q**int(main_exp)  # integral: (k+1)/2 is a whole number for odd k
    corr = q**int(corr_exp) * params.k * params.x**2 * r**3 * 2**r
    return FinalBound(main_term=main, correction_term=corr,
                      difference=main - corr, main_exponent=main_exp,
                      correction_exponent=corr_exp,
                      main_dominates=main_exp > corr_exp)


def _fixed_pair_paths_k3(system: PolySystem, params: Params,
                         grid_cap: int) -> int:
    """|S| for w1 = w2 = origin when k = 3, without building the graph.

    x1 runs over the B-neighbors of w1 (found on the small B grid), x2
    over the A-neighbors of w2 (found on the A grid); an (x1, x2) pair
    contributes when x2 ~ x1, checked by restricting each polynomial at
    x1 and evaluating on the candidate list.
    """
    q = params.q
    ka, kt = params.k * params.lam, params.k * params.tau
    w1 = np.zeros(ka, dtype=np.int64)
    w2 = np.zeros(kt, dtype=np.int64)

    mask_b = None
    for f in system.polys:
        vals = grid_values(restrict(f, w1), cap=grid_cap)
        mask_b = (vals == 0) if mask_b is None else mask_b & (vals == 0)
    x1_ids = np.nonzero(mask_b)[0]
    x1_ids = x1_ids[x1_ids != 0]  # exclude w2 (origin of B)
    if len(x1_ids) == 0:
        return 0

    mask_a = None
    for f in system.polys:
        vals = grid_values(restrict_back(f, w2), cap=grid_cap)
        mask_a = (vals == 0) if mask_a is None else mask_a & (vals == 0)
    x2_ids = np.nonzero(mask_a)[0]
    x2_ids = x2_ids[x2_ids != 0]  # exclude w1 (origin of A)
    if len(x2_ids) == 0:
        return 0

    from .graphgen import VertexCodec
    cand = VertexCodec(q=q, dim=ka).decode_block(x2_ids)
    mono = monomial_matrix(ka, params.d_eff, q, cand)
    codec_b = VertexCodec(q=q, dim=kt)
    total = 0
    for x1 in x1_ids:
        pt = codec_b.decode(int(x1))
        ok = None
        for f in system.polys:
            coeffs = restrict_back(f, pt).coeffs
            vals = matmul_mod(mono, coeffs[:, None], q)[:, 0]
            ok = (vals == 0) if ok is None else ok & (vals == 0)
        total += int(ok.sum())
    return total


def count_fixed_pair_paths(system: PolySystem, params: Params,
                           grid_cap: int = DEFAULT_GRID_CAP) -> int:
    """Exact |S| between the two origins for the given system."""
    if params.k == 3:
        return _fixed_pair_paths_k3(system, params, grid_cap)
    from . import paths as _paths
    from .graphgen import build_graph
    g = build_graph(params, system=system)
    return _paths.count_paths(g, 0, 0, params.k)


@dataclass(frozen=True)
class MomentEstimate:
    mean: float
    std_error: float
    trials: int
    r_eff: int
    bound: int
    seed: int
    rigor_ok: bool
    rigor_note: str

    def to_json_dict(self) -> dict:
        return {
            "mean": self.mean,
            "std_error": self.std_error,
            "trials": self.trials,
            "r_eff": self.r_eff,
            "bound": self.bound,
            "seed": self.seed,
            "rigor_ok": self.rigor_ok,
            "rigor_note": self.rigor_note,
        }


def estimate_moment(params: Params, r_eff: int, trials: int, seed: int,
                    system_sampler=None,
                    grid_cap: int = DEFAULT_GRID_CAP) -> MomentEstimate:
    """Monte Carlo estimate of E[|S|^r_eff] at a fixed cross pair.

    Every pair has the same |S| distribution (the coefficient law is
    invariant under translating either block), so the origin pair
    stands in for all of them.  Trials draw independent systems from
    per-trial sub-seeds of ``seed``; the same seed reproduces the same
    estimate exactly.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    if r_eff < 1:
        raise ValueError("r_eff must be at least 1")
    if params.d_eff < params.k * r_eff:
        raise RigorError(
            f"moment order {r_eff} needs degree >= {params.k * r_eff}, "
            f"working degree is {params.d_eff}")
    need_q = comb(params.k * r_eff, 2)
    rigor_ok = params.q > need_q
    rigor_note = ("" if rigor_ok else
                  f"q = {params.q} <= C(k*r_eff, 2) = {need_q}: joint "
                  f"vanishing is exact only for collections with at most "
                  f"{_max_exact_points(params.q)} distinct edges")
    if system_sampler is None:
        def system_sampler(trial_seed):
            return sample_system(params.gamma, params.t, params.d_eff,
                                 params.q, trial_seed)
    values = np.empty(trials, dtype=np.float64)
    for i in range(trials):
        system = system_sampler(derive_seed(seed, TAG_TRIAL, i))
        s = count_fixed_pair_paths(system, params, grid_cap)
        values[i] = float(s) ** r_eff
    mean = float(values.mean())
    std_error = float(values.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return MomentEstimate(mean=mean, std_error=std_error, trials=trials,
                          r_eff=r_eff, bound=moment_bound(params, r_eff),
                          seed=seed, rigor_ok=rigor_ok, rigor_note=rigor_note)


def _max_exact_points(q: int) -> int:
    m = 2
    while comb(m + 1, 2) < q:
        m += 1
    return m
