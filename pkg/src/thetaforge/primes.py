"""Prime generation and testing utilities."""

import math


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for n < 3,215,031,751."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_upto(n: int) -> list[int]:
    """Sieve of Eratosthenes, primes <= n."""
    if n < 2:
        return []
    flags = bytearray([1]) * (n + 1)
    flags[0] = flags[1] = 0
    for p in range(2, math.isqrt(n) + 1):
        if flags[p]:
            flags[p * p :: p] = bytearray(len(flags[p * p :: p]))
    return [i for i, f in enumerate(flags) if f]


def primes_in_window(lo: int, hi: int) -> list[int]:
    """Primes p with lo < p < hi (both exclusive)."""
    return [p for p in primes_upto(max(hi - 1, 0)) if p > lo]


def integer_root(n: int, e: int) -> int:
    """floor(n ** (1/e)) computed exactly on integers."""
    if n < 0 or e < 1:
        raise ValueError("need n >= 0 and e >= 1")
    if n in (0, 1) or e == 1:
        return n
    r = int(round(n ** (1.0 / e)))
    while r > 0 and r**e > n:
        r -= 1
    while (r + 1) ** e <= n:
        r += 1
    return r
