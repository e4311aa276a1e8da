"""Arithmetic in the prime field Z/qZ.

Elements are plain ints in [0, q); the modulus lives on the field
object, not on the elements.  0**0 = 1 so that the constant monomial
always evaluates to its coefficient.
"""

from dataclasses import dataclass

from .params import MAX_Q
from .primes import is_prime


@dataclass(frozen=True)
class PrimeField:
    q: int

    def __post_init__(self):
        if not (2 <= self.q < MAX_Q) or not is_prime(self.q):
            raise ValueError(f"q = {self.q} is not a prime in [2, 2^31)")

    def element(self, x: int) -> int:
        return x % self.q

    def add(self, x: int, y: int) -> int:
        return (x + y) % self.q

    def sub(self, x: int, y: int) -> int:
        return (x - y) % self.q

    def mul(self, x: int, y: int) -> int:
        return (x * y) % self.q

    def inv(self, x: int) -> int:
        if x % self.q == 0:
            raise ZeroDivisionError("0 has no multiplicative inverse")
        return pow(x, self.q - 2, self.q)

    def pow(self, x: int, e: int) -> int:
        if e < 0:
            raise ValueError("exponent must be non-negative")
        if e == 0:
            return 1
        return pow(x % self.q, e, self.q)
