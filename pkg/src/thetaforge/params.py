"""Parameter validation and derivation for the bipartite construction.

Everything downstream (polynomial sampling, graph building, moment
bookkeeping) reads its sizes from a single immutable ``Params`` value:

    k       odd path length, k = 2x + 1
    a       part-size ratio tau/lambda, kept as an exact Fraction
    gamma   number of independent polynomial constraints, x*(lambda+tau)
    t       number of polynomial variables, k*(lambda+tau)
    r       moment order used by the closed-form bounds
    d       polynomial degree needed for rigor at order r, d = k*r
    q       the prime field size

``d = k*r`` makes the coefficient space astronomically large for any
interesting k, so desk-scale runs use Reduced mode: a working degree
``d_eff`` and a working moment order ``r_eff`` with d_eff >= k*r_eff,
under which the same expectation arguments hold for collections of up
to r_eff paths.  Every report records which mode produced it.
"""

from dataclasses import dataclass
from fractions import Fraction
from math import comb, gcd

from .errors import ParityError, RangeError, RigorError, TooSmallError
from .primes import integer_root, is_prime, primes_in_window

MAX_Q = 2**31  # field elements and products must fit machine words


@dataclass(frozen=True)
class Rigorous:
    """Full-degree mode: d_eff = k*r, moment claims valid to order r."""

    def label(self) -> str:
        return "rigorous"


@dataclass(frozen=True)
class Reduced:
    """Desk-scale mode: degree d_eff, moment claims only up to r_eff."""

    d_eff: int
    r_eff: int

    def label(self) -> str:
        return "reduced"


Mode = Rigorous | Reduced


@dataclass(frozen=True)
class Params:
    k: int
    tau: int
    lam: int
    q: int
    x: int
    a: Fraction
    gamma: int
    t: int
    r: int
    d: int
    mode: Mode

    @property
    def d_eff(self) -> int:
        """Working polynomial degree: d in Rigorous mode, else mode.d_eff."""
        return self.d if isinstance(self.mode, Rigorous) else self.mode.d_eff

    @property
    def r_eff(self) -> int:
        """Working moment order: r in Rigorous mode, else mode.r_eff."""
        return self.r if isinstance(self.mode, Rigorous) else self.mode.r_eff

    @property
    def n_a(self) -> int:
        return self.q**(self.k * self.lam)

    @property
    def n_b(self) -> int:
        return self.q**(self.k * self.tau)

    def to_json_dict(self) -> dict:
        """Flat JSON object embedded in reports and graph file headers."""
        return {
            "k": self.k,
            "tau": self.tau,
            "lambda": self.lam,
            "q": self.q,
            "x": self.x,
            "a": f"{self.a.numerator}/{self.a.denominator}",
            "gamma": self.gamma,
            "t": self.t,
            "r": self.r,
            "d": self.d,
            "mode": self.mode.label(),
            "d_eff": self.d_eff,
            "r_eff": self.r_eff,
        }


def params_from_json_dict(obj: dict) -> "Params":
    mode: Mode
    if obj["mode"] == "rigorous":
        mode = Rigorous()
    else:
        mode = Reduced(d_eff=int(obj["d_eff"]), r_eff=int(obj["r_eff"]))
    return derive_params(int(obj["k"]), int(obj["tau"]), int(obj["lambda"]),
                         int(obj["q"]), mode)


def derive_params(k: int, tau: int, lam: int, q: int,
                  mode: Mode | None = None) -> Params:
    """Validate (k, tau, lambda, q) and derive every construction parameter.

    The admissible ratio window is (k-1)/(k+1) <= tau/lambda < 1 with
    tau, lambda coprime; k must be odd and at least 3; q must be prime.
    Rigorous mode additionally demands q > C(k*r, 2) so that the joint
    vanishing probability is exact for the largest point set the moment
    argument touches.  ``mode=None`` selects Reduced(d_eff=2k, r_eff=2).
    """
    if k % 2 == 0:
        raise ParityError(f"k must be odd, got {k}")
    if k < 3:
        raise RangeError(f"k must be at least 3, got {k}")
    if tau < 1 or lam < 1:
        raise RangeError("tau and lambda must be positive")
    if gcd(tau, lam) != 1:
        raise RangeError(f"tau={tau} and lambda={lam} must be coprime")
    a = Fraction(tau, lam)
    lo = Fraction(k - 1, k + 1)
    if a < lo:
        raise RangeError(f"tau/lambda = {a} below (k-1)/(k+1) = {lo}")
    if a >= 1:
        raise RangeError(f"tau/lambda = {a} must be < 1")
    if not (2 <= q < MAX_Q) or not is_prime(q):
        raise ValueError(f"q = {q} is not a prime in [2, 2^31)")

    x = (k - 1) // 2
    gamma = x * (lam + tau)
    t = k * (lam + tau)
    r = (3 * k - 1) // 2 * lam + (k - 1) // 2 * tau + 1
    d = k * r

    if mode is None:
        mode = Reduced(d_eff=2 * k, r_eff=2)
    if isinstance(mode, Rigorous):
        need = comb(k * r, 2)
        if q <= need:
            raise RigorError(
                f"rigorous mode needs q > C(k*r, 2) = {need}, got q = {q}")
    else:
        if mode.d_eff < 1:
            raise RangeError("d_eff must be at least 1")
        if mode.r_eff < 0:
            raise RangeError("r_eff must be non-negative")
        if mode.d_eff < k * mode.r_eff:
            raise RigorError(
                f"reduced mode needs d_eff >= k*r_eff = {k * mode.r_eff}, "
                f"got d_eff = {mode.d_eff}")

    return Params(k=k, tau=tau, lam=lam, q=q, x=x, a=a, gamma=gamma, t=t,
                  r=r, d=d, mode=mode)


def bertrand_prime(n: int, exponent: int) -> int:
    """Smallest prime p with floor(n^(1/e))/2 < p < 2*floor(n^(1/e)/2).

    The window (h, 2h) with h = floor(n^(1/exponent) / 2) is non-empty
    for h >= 2 by Bertrand's postulate, and any prime in it satisfies
    n / 4^exponent < p^exponent < n.
    """
    if exponent < 1:
        raise ValueError("exponent must be positive")
    h = integer_root(n, exponent) // 2
    if h < 2:
        raise TooSmallError(
            f"no prime window for n = {n} at exponent {exponent}: "
            f"floor(n^(1/{exponent}))/2 = {h} < 2")
    window = primes_in_window(h, 2 * h)
    if not window:
        raise TooSmallError(f"empty prime window ({h}, {2 * h})")
    return window[0]


def exponent_formula(k: int, a: Fraction) -> Fraction:
    """(1 + a)(k + 1)/(2k), the predicted log-log slope of edges vs n."""
    return (1 + Fraction(a)) * Fraction(k + 1, 2 * k)


def theoretical_exponent(params: Params) -> Fraction:
    return exponent_formula(params.k, params.a)
