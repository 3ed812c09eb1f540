"""Base-p digit sums and exact p-adic valuations of factorials and binomials.

Two independent routes to nu_p(C(n, k)) are kept side by side: the digit-sum
(Legendre) formula and the carry count (Kummer). They must agree, and tests
also pin both against direct factorization of exactly computed binomials.
"""

from dataclasses import dataclass
from math import comb


def alpha_p(n: int, p: int) -> int:
    """Sum of the base-p digits of n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    s = 0
    while n:
        n, d = divmod(n, p)
        s += d
    return s


def nu_factorial(n: int, p: int) -> int:
    """nu_p(n!) = (n - alpha_p(n)) / (p - 1)."""
    return (n - alpha_p(n, p)) // (p - 1)


def carry_count(k: int, m: int, p: int) -> int:
    """Number of carries when adding k and m in base p."""
    carries = 0
    carry = 0
    while k or m or carry:
        k, dk = divmod(k, p)
        m, dm = divmod(m, p)
        carry = 1 if dk + dm + carry >= p else 0
        carries += carry
    return carries


def nu_binomial(n: int, k: int, p: int) -> int:
    """nu_p(C(n, k)) by the digit-sum formula, cross-checked against carries."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    v = (alpha_p(k, p) + alpha_p(n - k, p) - alpha_p(n, p)) // (p - 1)
    assert v == carry_count(k, n - k, p)
    return v


@dataclass(frozen=True)
class CarryProfile:
    """Carry structure of the base-p addition k + (n - k) = n."""

    n: int
    k: int
    p: int
    carries: int

    @classmethod
    def of(cls, n: int, k: int, p: int) -> "CarryProfile":
        if not 0 <= k <= n:
            raise ValueError("need 0 <= k <= n")
        return cls(n=n, k=k, p=p, carries=carry_count(k, n - k, p))


def binomial_exact(n: int, k: int) -> int:
    """Exact binomial coefficient (oracle path)."""
    if not 0 <= k <= n:
        raise ValueError("need 0 <= k <= n")
    return comb(n, k)
