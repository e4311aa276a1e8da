"""Dense multivariate polynomials over a prime field.

A polynomial in t variables of total degree at most d is a dense
coefficient vector over the graded-lexicographic monomial basis (degree
ascending, x1-heaviest first within a degree).  The basis has
C(t + d, t) monomials, so a hard cap guards every entry point that
would allocate one.

Sampling draws each coefficient i.i.d. uniform from F_q with numpy's
PCG64 generator; the integer seed is stored on the polynomial so any
run can be reproduced elsewhere.  Seeds for derived streams (one per
polynomial of a system, one per Monte Carlo trial) come from
SeedSequence spawn keys, never from shared generator state.
"""

import itertools
from dataclasses import dataclass
from functools import lru_cache
from math import comb

import numpy as np

from .errors import CapacityError, DimensionError

DEFAULT_MONOMIAL_CAP = 10_000_000
DEFAULT_GRID_CAP = 10_000_000

GENERATOR_NAME = "numpy-pcg64"

# spawn-key domains for seed derivation
TAG_POLY = 0
TAG_TRIAL = 1
TAG_SAMPLE = 2
TAG_RUN = 3


def derive_seed(master_seed: int, tag: int, index: int) -> int:
    """Deterministic 64-bit sub-seed for stream (tag, index) of a master seed."""
    ss = np.random.SeedSequence(entropy=master_seed, spawn_key=(tag, index))
    return int(ss.generate_state(1, np.uint64)[0])


def monomial_count(t: int, d: int) -> int:
    return comb(t + d, t)


@lru_cache(maxsize=64)
def _basis(t: int, d: int) -> np.ndarray:
    rows = np.empty((monomial_count(t, d), t), dtype=np.int64)
    i = 0
    for g in range(d + 1):
        for combo in itertools.combinations_with_replacement(range(t), g):
            row = np.zeros(t, dtype=np.int64)
            for v in combo:
                row[v] += 1
            rows[i] = row
            i += 1
    rows.flags.writeable = False
    return rows


def enumerate_monomials(t: int, d: int,
                        cap: int = DEFAULT_MONOMIAL_CAP) -> np.ndarray:
    """Exponent matrix (N x t) of the degree-<=d basis in graded-lex order."""
    if t < 1 or d < 0:
        raise ValueError(f"need t >= 1 and d >= 0, got t={t}, d={d}")
    n = monomial_count(t, d)
    if n > cap:
        raise CapacityError(
            f"basis for (t={t}, d={d}) has {n} monomials, cap is {cap}")
    return _basis(t, d)


@lru_cache(maxsize=64)
def _parent_table(t: int, d: int):
    """For each non-constant monomial: the index of the monomial with its
    first nonzero exponent decremented, and that variable's index.

    Monomial j is then parent's value times one coordinate, which lets
    value matrices grow column by column with a single multiply each.
    """
    exps = _basis(t, d)
    pos = {tuple(e): i for i, e in enumerate(exps.tolist())}
    parent = np.zeros(len(exps), dtype=np.int64)
    var = np.zeros(len(exps), dtype=np.int64)
    for j, e in enumerate(exps.tolist()):
        if j == 0:
            continue
        v = next(i for i, a in enumerate(e) if a > 0)
        reduced = list(e)
        reduced[v] -= 1
        parent[j] = pos[tuple(reduced)]
        var[j] = v
    parent.flags.writeable = False
    var.flags.writeable = False
    return parent, var


@lru_cache(maxsize=64)
def _split_index(t: int, d: int, t_front: int):
    """Map each full monomial to its front-block and back-block pattern index."""
    exps = _basis(t, d)
    front = _basis(t_front, d)
    back = _basis(t - t_front, d)
    front_pos = {tuple(e): i for i, e in enumerate(front.tolist())}
    back_pos = {tuple(e): i for i, e in enumerate(back.tolist())}
    f_idx = np.array([front_pos[tuple(e)] for e in exps[:, :t_front].tolist()],
                     dtype=np.int64)
    b_idx = np.array([back_pos[tuple(e)] for e in exps[:, t_front:].tolist()],
                     dtype=np.int64)
    f_idx.flags.writeable = False
    b_idx.flags.writeable = False
    return f_idx, b_idx


def power_table(q: int, d: int) -> np.ndarray:
    """pt[x, e] = x**e mod q for x in [0, q), e in [0, d]; 0**0 = 1."""
    pt = np.empty((q, d + 1), dtype=np.int64)
    pt[:, 0] = 1
    for e in range(1, d + 1):
        pt[:, e] = pt[:, e - 1] * np.arange(q) % q
    return pt


def matmul_mod(a: np.ndarray, b: np.ndarray, q: int) -> np.ndarray:
    """(a @ b) % q with exact integer arithmetic.

    Uses float64 BLAS when every dot product stays below 2**53, int64
    otherwise, chunking the inner dimension as a last resort.  The
    result is exact, hence independent of summation order and thread
    count.
    """
    inner = a.shape[-1]
    bound = inner * (q - 1) * (q - 1)
    if bound < 2**53:
        return (a.astype(np.float64) @ b.astype(np.float64) % q).astype(np.int64)
    if bound < 2**63:
        return a.astype(np.int64) @ b.astype(np.int64) % q
    step = max(1, 2**62 // ((q - 1) * (q - 1)))
    out = np.zeros(a.shape[:-1] + b.shape[1:], dtype=np.int64)
    for lo in range(0, inner, step):
        out += a[..., lo:lo + step].astype(np.int64) @ b[lo:lo + step].astype(np.int64) % q
        out %= q
    return out


@dataclass(frozen=True, eq=False)
class Polynomial:
    """Dense polynomial: coefficient i multiplies basis monomial i."""

    t: int
    d: int
    q: int
    coeffs: np.ndarray
    seed: int | None = None

    def __post_init__(self):
        if len(self.coeffs) != monomial_count(self.t, self.d):
            raise DimensionError(
                f"expected {monomial_count(self.t, self.d)} coefficients, "
                f"got {len(self.coeffs)}")
        self.coeffs.flags.writeable = False

    def exponents(self) -> np.ndarray:
        return _basis(self.t, self.d)


def from_terms(t: int, d: int, q: int, terms: dict[tuple, int]) -> Polynomial:
    """Build a polynomial from {exponent tuple: coefficient} (for fixtures)."""
    exps = enumerate_monomials(t, d)
    pos = {tuple(e): i for i, e in enumerate(exps.tolist())}
    coeffs = np.zeros(len(exps), dtype=np.int64)
    for e, c in terms.items():
        if len(e) != t:
            raise DimensionError(f"exponent tuple {e} has wrong arity")
        coeffs[pos[tuple(e)]] = c % q
    return Polynomial(t=t, d=d, q=q, coeffs=coeffs)


def sample_uniform(t: int, d: int, q: int, seed: int,
                   cap: int = DEFAULT_MONOMIAL_CAP) -> Polynomial:
    """Uniform draw from the degree-<=d polynomials, reproducible from seed."""
    n = monomial_count(t, d)
    if n > cap:
        raise CapacityError(
            f"sampling (t={t}, d={d}) needs {n} coefficients, cap is {cap}")
    rng = np.random.default_rng(seed)
    coeffs = rng.integers(0, q, size=n, dtype=np.int64)
    return Polynomial(t=t, d=d, q=q, coeffs=coeffs, seed=seed)


@dataclass(frozen=True)
class PolySystem:
    """gamma independent uniform polynomials over the same (t, d, q)."""

    polys: tuple[Polynomial, ...]
    master_seed: int | None = None

    @property
    def gamma(self) -> int:
        return len(self.polys)


def sample_system(gamma: int, t: int, d: int, q: int, master_seed: int,
                  cap: int = DEFAULT_MONOMIAL_CAP) -> PolySystem:
    """gamma polynomials from independent sub-streams of master_seed."""
    polys = tuple(
        sample_uniform(t, d, q, derive_seed(master_seed, TAG_POLY, i), cap)
        for i in range(gamma))
    return PolySystem(polys=polys, master_seed=master_seed)


def monomial_values(t: int, d: int, q: int, point) -> np.ndarray:
    """Value of every basis monomial at one point, as an (N,) int64 vector."""
    point = np.asarray(point, dtype=np.int64)
    if point.shape != (t,):
        raise DimensionError(f"point must have {t} coordinates")
    exps = _basis(t, d)
    pt = power_table(q, d)
    out = np.ones(len(exps), dtype=np.int64)
    for i in range(t):
        out = out * pt[point[i] % q, exps[:, i]] % q
    return out


def monomial_matrix(t: int, d: int, q: int, points: np.ndarray) -> np.ndarray:
    """Monomial values for many points at once: (P x N) int64.

    Built incrementally along the parent table, one multiply per
    monomial.  Memory is P * C(t+d, t) int64 entries; callers chunk P.
    """
    points = np.asarray(points, dtype=np.int64) % q
    if points.ndim != 2 or points.shape[1] != t:
        raise DimensionError(f"points must be (P, {t})")
    parent, var = _parent_table(t, d)
    cols = np.ascontiguousarray(points.T)
    out = np.empty((len(parent), len(points)), dtype=np.int64)
    out[0] = 1
    for j in range(1, len(parent)):
        np.multiply(out[parent[j]], cols[var[j]], out=out[j])
        out[j] %= q
    return np.ascontiguousarray(out.T)


def evaluate(f: Polynomial, point) -> int:
    """f(point) in F_q via per-coordinate power tables."""
    vals = monomial_values(f.t, f.d, f.q, point)
    return int(f.coeffs @ vals % f.q)


def restrict(f: Polynomial, u) -> Polynomial:
    """Fix the first len(u) variables at u; polynomial in the rest.

    evaluate(restrict(f, u), v) == evaluate(f, u ++ v) for all v.
    """
    u = np.asarray(u, dtype=np.int64)
    if u.ndim != 1 or not (1 <= len(u) < f.t):
        raise DimensionError(
            f"can fix 1..{f.t - 1} leading variables, got {len(u)}")
    t_front = len(u)
    f_idx, b_idx = _split_index(f.t, f.d, t_front)
    front_vals = monomial_values(t_front, f.d, f.q, u)
    contrib = f.coeffs * front_vals[f_idx] % f.q
    out = np.zeros(monomial_count(f.t - t_front, f.d), dtype=np.int64)
    np.add.at(out, b_idx, contrib)
    return Polynomial(t=f.t - t_front, d=f.d, q=f.q, coeffs=out % f.q)


def restrict_back(f: Polynomial, v) -> Polynomial:
    """Fix the last len(v) variables at v; polynomial in the leading ones."""
    v = np.asarray(v, dtype=np.int64)
    if v.ndim != 1 or not (1 <= len(v) < f.t):
        raise DimensionError(
            f"can fix 1..{f.t - 1} trailing variables, got {len(v)}")
    t_front = f.t - len(v)
    f_idx, b_idx = _split_index(f.t, f.d, t_front)
    back_vals = monomial_values(len(v), f.d, f.q, v)
    contrib = f.coeffs * back_vals[b_idx] % f.q
    out = np.zeros(monomial_count(t_front, f.d), dtype=np.int64)
    np.add.at(out, f_idx, contrib)
    return Polynomial(t=t_front, d=f.d, q=f.q, coeffs=out % f.q)


def split_coefficient_matrix(f: Polynomial, t_front: int) -> np.ndarray:
    """Coefficients as an (N_front x N_back) matrix over the split bases.

    Row p, column s accumulates every coefficient whose front-block
    pattern is p and back-block pattern is s; restriction at u is then
    the vector-matrix product (front monomial values at u) @ matrix.
    """
    f_idx, b_idx = _split_index(f.t, f.d, t_front)
    out = np.zeros((monomial_count(t_front, f.d),
                    monomial_count(f.t - t_front, f.d)), dtype=np.int64)
    np.add.at(out, (f_idx, b_idx), f.coeffs)
    return out % f.q


def restrict_many(f: Polynomial, points: np.ndarray,
                  coeff_matrix: np.ndarray | None = None) -> np.ndarray:
    """Restriction coefficients for many leading-block points at once.

    Returns (P x N_back) int64; row i equals restrict(f, points[i]).coeffs.
    """
    points = np.asarray(points, dtype=np.int64)
    t_front = points.shape[1]
    if coeff_matrix is None:
        coeff_matrix = split_coefficient_matrix(f, t_front)
    front = monomial_matrix(t_front, f.d, f.q, points)
    return matmul_mod(front, coeff_matrix, f.q)


def grid_values(f: Polynomial, cap: int = DEFAULT_GRID_CAP) -> np.ndarray:
    """f evaluated at every point of F_q^t, flattened big-endian.

    Entry sum(x[i] * q**(t-1-i)) holds f(x).  Works by scattering the
    coefficients into a (d+1)^t tensor and contracting one Vandermonde
    factor per axis, so the cost is O(t * q^t * (d+1)) instead of
    O(q^t * N).
    """
    if f.q**f.t > cap or (f.d + 1) ** f.t > cap:
        raise CapacityError(
            f"grid for (t={f.t}, d={f.d}, q={f.q}) exceeds cap {cap}")
    tensor = np.zeros((f.d + 1,) * f.t, dtype=np.float64)
    tensor[tuple(_basis(f.t, f.d).T)] = f.coeffs
    vand = power_table(f.q, f.d).astype(np.float64)
    vals = tensor
    for _ in range(f.t):
        # contract the leading exponent axis; the new point axis lands last,
        # so after t steps the axes are (x_1, ..., x_t) in order
        vals = np.tensordot(vals, vand, axes=([0], [1])) % f.q
    return vals.reshape(-1).astype(np.int64)


def dump_polynomial(f: Polynomial, path) -> None:
    """Debug text format: header "t d q seed", then one coefficient per line."""
    with open(path, "w") as fh:
        seed = f.seed if f.seed is not None else -1
        fh.write(f"{f.t} {f.d} {f.q} {seed}\n")
        for c in f.coeffs:
            fh.write(f"{int(c)}\n")


def load_polynomial(path) -> Polynomial:
    with open(path) as fh:
        t, d, q, seed = (int(v) for v in fh.readline().split())
        coeffs = np.array([int(line) for line in fh], dtype=np.int64)
    return Polynomial(t=t, d=d, q=q, coeffs=coeffs,
                      seed=None if seed == -1 else seed)
