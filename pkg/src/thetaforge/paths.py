"""Exact counting and classification of length-k paths and walks.

Only cross pairs (w1 in A, w2 in B) are ever scanned: k is odd, so a
length-k path joins opposite parts, and same-part pairs have none.

For k = 3 the all-pairs scan uses an exact closed form: with
biadjacency M, the walk count is (M M^T M)[w1, w2], and a walk
degenerates only when it revisits an endpoint, giving

    paths(w1, w2) = walks(w1, w2) - e * (deg(w1) + deg(w2) - 1)

where e = 1 iff w1 ~ w2.  Other k fall back to a per-pair depth-first
count under the pair cap.  Both routes are testable against exhaustive
tuple enumeration on small graphs.
"""

import bisect
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError

DEFAULT_PAIRS_CAP = 100_000_000
DEFAULT_WALK_CAP = 1_000_000


def _check_k(k: int) -> None:
    if k < 1 or k % 2 == 0:
        raise ValueError(f"path length k must be odd and positive, got {k}")


def _has(sorted_arr, x: int) -> bool:
    i = bisect.bisect_left(sorted_arr, x)
    return i < len(sorted_arr) and sorted_arr[i] == x


def count_paths(g, w1: int, w2: int, k: int) -> int:
    """Number of simple paths with k edges from w1 (A) to w2 (B)."""
    _check_k(k)
    nbrs_a = [g.neighbors_a(u).tolist() for u in range(g.n_a)] \
        if g.n_a <= 64 else None
    adj_a = (lambda u: nbrs_a[u]) if nbrs_a else (lambda u: g.neighbors_a(u).tolist())
    visited_a = {w1}
    visited_b: set[int] = set()

    def rec(u: int, remaining: int) -> int:
        mine = adj_a(u)
        if remaining == 1:
            return 1 if _has(mine, w2) else 0
        total = 0
        for b in mine:
            if b == w2 or b in visited_b:
                continue
            visited_b.add(b)
            for a in g.neighbors_b(b).tolist():
                if a in visited_a:
                    continue
                visited_a.add(a)
                total += rec(a, remaining - 2)
                visited_a.discard(a)
            visited_b.discard(b)
        return total

    return rec(w1, k)


def count_walks(g, w1: int, w2: int, k: int) -> int:
    """Number of walk tuples (x1, ..., x_{k-1}), repeats allowed.

    Dynamic programming over adjacency layers; exact integers.
    """
    _check_k(k)
    counts = {w1: 1}
    on_a = True
    for _ in range(k - 1):
        nxt: dict[int, int] = {}
        for u, c in counts.items():
            for v in (g.neighbors_a(u) if on_a else g.neighbors_b(u)).tolist():
                nxt[v] = nxt.get(v, 0) + c
        counts = nxt
        on_a = not on_a
    return sum(c for u, c in counts.items()
               if _has(g.neighbors_a(u).tolist(), w2))


def _iter_walks(g, w1: int, w2: int, k: int, cap: int):
    """Yield every walk tuple (x1, ..., x_{k-1}) from w1 to w2."""
    out_count = 0
    stack: list[int] = []

    def rec(u: int, on_a: bool, remaining: int):
        nonlocal out_count
        if remaining == 1:
            if _has(g.neighbors_a(u).tolist(), w2):
                out_count += 1
                if out_count > cap:
                    raise CapacityError(f"walk enumeration exceeds cap {cap}")
                yield tuple(stack)
            return
        for v in (g.neighbors_a(u) if on_a else g.neighbors_b(u)).tolist():
            stack.append(v)
            yield from rec(v, not on_a, remaining - 1)
            stack.pop()

    yield from rec(w1, True, k)


def _first_collision_family(w1: int, inner: tuple, w2: int, k: int) -> str | None:
    """Family of the lexicographically first index collision, or None.

    Sequence positions 0..k hold w1, x1, ..., x_{k-1}, w2; even
    positions live in A and odd positions in B, so only same-parity
    positions can collide.  Families: position 0 involved -> "0b",
    position k involved -> "ak", interior pair -> "ab".
    """
    seq = (w1,) + inner + (w2,)
    best: tuple[int, int] | None = None
    for i in range(k):
        for j in range(i + 2, k + 1, 2):
            if seq[i] == seq[j]:
                best = (i, j)
                break
        if best is not None and best[0] == i:
            break
    if best is None:
        return None
    i, j = best
    if i == 0:
        return "0b"
    if j == k:
        return "ak"
    return "ab"


def classify_degenerate(g, w1: int, w2: int, k: int,
                        cap: int = DEFAULT_WALK_CAP) -> dict[str, int]:
    """Count degenerate walks by first-collision family.

    The families partition the degenerate walks, so the returned counts
    satisfy walk_count == path_count + sum(breakdown.values()).
    """
    _check_k(k)
    if count_walks(g, w1, w2, k) > cap:
        raise CapacityError(f"walk count exceeds classification cap {cap}")
    breakdown: dict[str, int] = {}
    for inner in _iter_walks(g, w1, w2, k, cap):
        fam = _first_collision_family(w1, inner, w2, k)
        if fam is not None:
            breakdown[fam] = breakdown.get(fam, 0) + 1
    return breakdown


@dataclass(frozen=True)
class PairPathReport:
    w1: int
    w2: int
    path_count: int
    walk_count: int
    degenerate_breakdown: dict
    bad: bool

    def to_json_dict(self) -> dict:
        return {
            "w1": self.w1,
            "w2": self.w2,
            "path_count": self.path_count,
            "walk_count": self.walk_count,
            "degenerate_breakdown": dict(sorted(self.degenerate_breakdown.items())),
            "bad": self.bad,
        }


def pair_report(g, w1: int, w2: int, k: int, c: int,
                cap: int = DEFAULT_WALK_CAP) -> PairPathReport:
    """Full per-pair report; uses the k=3 closed form when it applies."""
    p = count_paths(g, w1, w2, k)
    if k == 3:
        e = 1 if _has(g.neighbors_a(w1).tolist(), w2) else 0
        deg1 = len(g.neighbors_a(w1))
        deg2 = len(g.neighbors_b(w2))
        breakdown = {}
        if e:
            if deg1:
                breakdown["0b"] = deg1
            if deg2 > 1:
                breakdown["ak"] = deg2 - 1
        w = p + e * (deg1 + deg2 - 1)
    else:
        breakdown = classify_degenerate(g, w1, w2, k, cap)
        w = p + sum(breakdown.values())
    return PairPathReport(w1=w1, w2=w2, path_count=p, walk_count=w,
                          degenerate_breakdown=breakdown, bad=p > c - 1)


def _count_blocks_k3(g, chunk_rows: int):
    m = g.to_biadjacency()
    deg_a = g.degrees_a()
    deg_b = g.degrees_b()
    mtm = (m.T @ m).toarray()
    for lo in range(0, g.n_a, chunk_rows):
        hi = min(lo + chunk_rows, g.n_a)
        block = m[lo:hi] @ mtm
        block = np.asarray(block)
        rows = np.repeat(np.arange(lo, hi, dtype=np.int64),
                         deg_a[lo:hi])
        cols = g.indices_a[g.indptr_a[lo]:g.indptr_a[hi]]
        block[rows - lo, cols] -= deg_b[cols] + deg_a[rows] - 1
        yield lo, hi, block


def _count_blocks_generic(g, k: int, chunk_rows: int):
    for lo in range(0, g.n_a, chunk_rows):
        hi = min(lo + chunk_rows, g.n_a)
        block = np.empty((hi - lo, g.n_b), dtype=np.int64)
        for u in range(lo, hi):
            for v in range(g.n_b):
                block[u - lo, v] = count_paths(g, u, v, k)
        yield lo, hi, block


def path_count_blocks(g, k: int, chunk_rows: int = 4096,
                      pairs_cap: int = DEFAULT_PAIRS_CAP):
    """Yield (lo, hi, block) of exact path counts for A-rows [lo, hi)."""
    _check_k(k)
    if g.n_a * g.n_b > pairs_cap:
        raise CapacityError(
            f"{g.n_a} x {g.n_b} pairs exceed pairs cap {pairs_cap}")
    if k == 3:
        yield from _count_blocks_k3(g, chunk_rows)
    else:
        yield from _count_blocks_generic(g, k, chunk_rows)


@dataclass(frozen=True)
class ScanResult:
    bad: tuple
    max_path_count: int
    lambda_observed: int
    pairs_scanned: int

    def to_json_dict(self) -> dict:
        return {
            "bad_pairs": [rep.to_json_dict() for rep in self.bad],
            "max_path_count": self.max_path_count,
            "lambda_observed": self.lambda_observed,
            "pairs_scanned": self.pairs_scanned,
        }


def scan_bad_pairs(g, c: int, *, k: int | None = None,
                   pairs_cap: int = DEFAULT_PAIRS_CAP,
                   chunk_rows: int = 4096,
                   walk_cap: int = DEFAULT_WALK_CAP) -> ScanResult:
    """Exact scan of every cross pair for path counts above c - 1."""
    if k is None:
        if g.params is None:
            raise ValueError("k is required for graphs without params")
        k = g.params.k
    if c < 1:
        raise ValueError("threshold c must be at least 1")
    max_count = 0
    bad: list[PairPathReport] = []
    for lo, hi, block in path_count_blocks(g, k, chunk_rows, pairs_cap):
        if block.size:
            max_count = max(max_count, int(block.max()))
        for u, v in zip(*np.nonzero(block > c - 1)):
            bad.append(pair_report(g, int(u) + lo, int(v), k, c, walk_cap))
    return ScanResult(bad=tuple(bad), max_path_count=max_count,
                      lambda_observed=len(bad),
                      pairs_scanned=g.n_a * g.n_b)


@dataclass(frozen=True)
class DichotomyReport:
    histogram: dict
    q_half: float | None
    max_below_half: int | None
    at_or_above_half: dict
    gap_width: float | None

    def to_json_dict(self) -> dict:
        return {
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "q_half": self.q_half,
            "max_below_half": self.max_below_half,
            "at_or_above_half": {str(k): v for k, v in
                                 sorted(self.at_or_above_half.items())},
            "gap_width": self.gap_width,
        }


def dichotomy_histogram(g, k: int | None = None, *,
                        pairs_cap: int = DEFAULT_PAIRS_CAP,
                        chunk_rows: int = 4096) -> DichotomyReport:
    """Histogram of path counts over all cross pairs, with the observed
    boundary below q/2 reported (never asserted)."""
    if k is None:
        if g.params is None:
            raise ValueError("k is required for graphs without params")
        k = g.params.k
    counts = np.zeros(1, dtype=np.int64)
    for _, _, block in path_count_blocks(g, k, chunk_rows, pairs_cap):
        if not block.size:
            continue
        top = int(block.max())
        if top + 1 > len(counts):
            counts = np.concatenate(
                [counts, np.zeros(top + 1 - len(counts), dtype=np.int64)])
        counts += np.bincount(block.reshape(-1), minlength=len(counts))
    histogram = {i: int(n) for i, n in enumerate(counts) if n > 0}
    q_half = g.params.q / 2 if g.params is not None else None
    max_below = None
    above: dict[int, int] = {}
    gap_width = None
    if q_half is not None:
        below = [v for v in histogram if v < q_half]
        max_below = max(below) if below else None
        above = {v: n for v, n in histogram.items() if v >= q_half}
        if max_below is not None:
            gap_width = q_half - max_below
    return DichotomyReport(histogram=histogram, q_half=q_half,
                           max_below_half=max_below,
                           at_or_above_half=above, gap_width=gap_width)


@dataclass(frozen=True)
class ThetaWitness:
    """ell internally disjoint length-k paths between one cross pair."""

    w1: int
    w2: int
    paths: tuple  # vertex sequences (w1, x1, ..., x_{k-1}, w2)


def _enum_paths(g, w1: int, w2: int, k: int, limit: int) -> list[tuple]:
    found: list[tuple] = []
    visited_a = {w1}
    visited_b: set[int] = set()
    stack = [w1]

    def rec(u: int, remaining: int):
        if len(found) > limit:
            raise CapacityError(f"more than {limit} paths for one pair")
        if remaining == 1:
            if _has(g.neighbors_a(u).tolist(), w2):
                found.append(tuple(stack) + (w2,))
            return
        for b in g.neighbors_a(u).tolist():
            if b == w2 or b in visited_b:
                continue
            visited_b.add(b)
            stack.append(b)
            for a in g.neighbors_b(b).tolist():
                if a in visited_a:
                    continue
                visited_a.add(a)
                stack.append(a)
                rec(a, remaining - 2)
                stack.pop()
                visited_a.discard(a)
            stack.pop()
            visited_b.discard(b)

    rec(w1, k)
    return found


def _split_inner(seq) -> tuple[frozenset, frozenset]:
    """Inner vertices of a path sequence, split by part.

    Positions alternate A (even) and B (odd); ids of different parts
    live in different id spaces, so they are never compared directly.
    """
    inner_a = frozenset(seq[i] for i in range(2, len(seq) - 1, 2))
    inner_b = frozenset(seq[i] for i in range(1, len(seq) - 1, 2))
    return inner_a, inner_b


def validate_theta_witness(g, wit: ThetaWitness, k: int, ell: int) -> None:
    """Raise ValueError unless the witness really is a theta subgraph."""
    if len(wit.paths) != ell:
        raise ValueError(f"witness needs {ell} paths, has {len(wit.paths)}")
    seen_a: frozenset = frozenset()
    seen_b: frozenset = frozenset()
    for seq in wit.paths:
        if len(seq) != k + 1 or seq[0] != wit.w1 or seq[-1] != wit.w2:
            raise ValueError("path endpoints or length wrong")
        inner_a, inner_b = _split_inner(seq)
        if (len(inner_a) != (k - 1) // 2 or len(inner_b) != (k - 1) // 2
                or wit.w1 in inner_a or wit.w2 in inner_b):
            raise ValueError("path is degenerate")
        for i in range(k):
            on_a = i % 2 == 0
            nbrs = g.neighbors_a(seq[i]) if on_a else g.neighbors_b(seq[i])
            if not _has(nbrs.tolist(), seq[i + 1]):
                raise ValueError(f"missing edge {seq[i]}-{seq[i + 1]}")
        if (inner_a & seen_a) or (inner_b & seen_b):
            raise ValueError("paths share an inner vertex")
        seen_a |= inner_a
        seen_b |= inner_b


def find_theta(g, k: int, ell: int, *, max_paths_per_pair: int = 5000,
               pairs_cap: int = 1_000_000) -> ThetaWitness | None:
    """First witness of ell internally disjoint length-k paths, if any.

    Deterministic scan order: pairs by (w1, w2), paths in DFS order,
    greedy backtracking over path subsets.
    """
    _check_k(k)
    if ell < 1:
        raise ValueError("ell must be at least 1")
    if g.n_a * g.n_b > pairs_cap:
        raise CapacityError(
            f"{g.n_a} x {g.n_b} pairs exceed pairs cap {pairs_cap}")
    for w1 in range(g.n_a):
        if len(g.neighbors_a(w1)) == 0:
            continue
        for w2 in range(g.n_b):
            cands = _enum_paths(g, w1, w2, k, max_paths_per_pair)
            if len(cands) < ell:
                continue
            inner_sets = [_split_inner(seq) for seq in cands]
            chosen: list[int] = []

            def backtrack(start: int, used_a: frozenset,
                          used_b: frozenset) -> bool:
                if len(chosen) == ell:
                    return True
                for i in range(start, len(cands)):
                    ia, ib = inner_sets[i]
                    if (ia & used_a) or (ib & used_b):
                        continue
                    chosen.append(i)
                    if backtrack(i + 1, used_a | ia, used_b | ib):
                        return True
                    chosen.pop()
                return False

            if backtrack(0, frozenset(), frozenset()):
                wit = ThetaWitness(w1=w1, w2=w2,
                                   paths=tuple(cands[i] for i in chosen))
                validate_theta_witness(g, wit, k, ell)
                return wit
    return None
