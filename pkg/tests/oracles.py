"""Independent reference implementations used as test oracles.

Everything here is deliberately naive and self-contained: pure-Python
integer arithmetic, exhaustive enumeration with filtering, dense matrix
convolution.  Nothing imports the code paths under test.
"""

import itertools

import numpy as np


def eval_poly_naive(exps, coeffs, point, q):
    """Term-by-term polynomial evaluation with Python ints."""
    acc = 0
    for e, c in zip(exps, coeffs):
        term = int(c)
        for x, a in zip(point, e):
            for _ in range(int(a)):
                term = term * int(x) % q
        acc = (acc + term) % q
    return acc


def all_exponents_brute(t, d):
    """Every exponent tuple with total degree <= d, as a set."""
    return {e for e in itertools.product(range(d + 1), repeat=t)
            if sum(e) <= d}


def dense_biadjacency(g):
    m = np.zeros((g.n_a, g.n_b), dtype=np.int64)
    for u in range(g.n_a):
        for v in g.neighbors_a(u).tolist():
            m[u, v] = 1
    return m


def count_paths_tuples(g, w1, w2, k):
    """Exhaustive inner-tuple enumeration with a distinctness filter.

    Inner positions alternate B, A, B, A, ...; adjacency and
    all-vertices-distinct are checked on complete tuples only.
    """
    m = dense_biadjacency(g)
    x = (k - 1) // 2
    total = 0
    for bs in itertools.product(range(g.n_b), repeat=x):
        for as_ in itertools.product(range(g.n_a), repeat=x):
            if len(set(bs)) != x or len(set(as_)) != x:
                continue
            if w2 in bs or w1 in as_:
                continue
            seq_a = (w1,) + as_
            seq_b = bs + (w2,)
            ok = True
            for i in range(x + 1):
                if not m[seq_a[i], seq_b[i]]:
                    ok = False
                    break
                if i < x and not m[seq_a[i + 1], seq_b[i]]:
                    ok = False
                    break
            total += ok
    return total


def count_walks_matrix(g, w1, w2, k):
    """Walk count by dense matrix convolution."""
    m = dense_biadjacency(g)
    vec = np.zeros(g.n_a, dtype=object)
    vec[w1] = 1
    on_a = True
    for _ in range(k):
        vec = vec @ m if on_a else vec @ m.T
        on_a = not on_a
    return int(vec[w2])


def walk_tuples(g, w1, w2, k):
    """All inner tuples (x1, ..., x_{k-1}) of walks from w1 to w2."""
    m = dense_biadjacency(g)
    x = (k - 1) // 2
    out = []
    for bs in itertools.product(range(g.n_b), repeat=x):
        for as_ in itertools.product(range(g.n_a), repeat=x):
            seq_a = (w1,) + as_
            seq_b = bs + (w2,)
            ok = True
            for i in range(x + 1):
                if not m[seq_a[i], seq_b[i]]:
                    ok = False
                    break
                if i < x and not m[seq_a[i + 1], seq_b[i]]:
                    ok = False
                    break
            if ok:
                inner = []
                for i in range(x):
                    inner.append(("b", bs[i]))
                    inner.append(("a", as_[i]))
                out.append(tuple(inner))
    return out


def primes_by_trial_division(lo, hi):
    """Primes p with lo < p < hi, by trial division."""
    out = []
    for n in range(max(lo + 1, 2), hi):
        if all(n % d for d in range(2, int(n**0.5) + 1)):
            out.append(n)
    return out


def random_bipartite(rng, max_a, max_b, density=None):
    """Random small bipartite graph as an edge list plus sizes."""
    n_a = int(rng.integers(1, max_a + 1))
    n_b = int(rng.integers(1, max_b + 1))
    if density is None:
        density = float(rng.uniform(0.15, 0.8))
    mask = rng.random((n_a, n_b)) < density
    us, vs = np.nonzero(mask)
    return n_a, n_b, us, vs
