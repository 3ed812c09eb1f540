"""Exact rationals, p-adic valuations, and precision-tracked p-adic arithmetic.

The ground-truth number type is `fractions.Fraction` (arbitrary precision,
always reduced, positive denominator), aliased here as `Rational`.
Approximate p-adic numbers carry an explicit valuation, unit part, and a
relative precision N: the value is unit * p**valuation + O(p**(valuation+N)).
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Optional, Union

Rational = Union[int, Fraction]


class PrecisionExhausted(ArithmeticError):
    """A cancellation consumed every tracked digit.

    `valuation_bound` is still a certificate: the exact result is known to be
    divisible by p**valuation_bound (it just cannot be distinguished from 0).
    """

    def __init__(self, message: str, valuation_bound: Optional[int] = None):
        super().__init__(message)
        self.valuation_bound = valuation_bound


def valuation_int(n: int, p: int) -> int:
    """Exponent of the prime p in the nonzero integer n."""
    if n == 0:
        raise ValueError("valuation undefined for exact zero")
    if p == 2:
        return (n & -n).bit_length() - 1
    n = abs(n)
    v = 0
    step = p ** 16
    while n % step == 0:
        n //= step
        v += 16
    while n % p == 0:
        n //= p
        v += 1
    return v


def valuation_rational(q: Rational, p: int) -> int:
    """nu_p(q) = nu_p(numerator) - nu_p(denominator) for nonzero rational q."""
    q = Fraction(q)
    if q == 0:
        raise ValueError("valuation undefined for exact zero")
    num_v = valuation_int(q.numerator, p)
    if num_v:
        return num_v  # reduced fraction: p cannot also divide the denominator
    if q.denominator == 1:
        return 0
    return -valuation_int(q.denominator, p)


def unit_and_valuation(n: int, p: int) -> tuple[int, int]:
    """Split nonzero integer n as (v, u) with n = u * p**v and p not dividing u."""
    v = valuation_int(n, p)
    return v, n // p ** v


@dataclass(frozen=True)
class PadicValue:
    """A p-adic number u * p**v known to relative precision N digits.

    `is_zero` marks an exact zero (no valuation or unit). Exact zeros are only
    ever constructed explicitly; cancellation past the tracked precision raises
    PrecisionExhausted instead of inventing one.
    """

    prime: int
    valuation: int
    unit: int
    rel_precision: int
    is_zero: bool = False

    def __post_init__(self):
        if self.prime < 2:
            raise ValueError("prime must be >= 2")
        if self.is_zero:
            return
        if self.rel_precision < 1:
            raise ValueError("relative precision must be >= 1")
        modulus = self.prime ** self.rel_precision
        if not (0 < self.unit < modulus) or self.unit % self.prime == 0:
            raise ValueError("unit must be a p-unit reduced mod p**N")

    @classmethod
    def zero(cls, p: int) -> "PadicValue":
        return cls(prime=p, valuation=0, unit=0, rel_precision=1, is_zero=True)

    @classmethod
    def from_rational(cls, q: Rational, p: int, rel_precision: int) -> "PadicValue":
        q = Fraction(q)
        if q == 0:
            return cls.zero(p)
        v = valuation_rational(q, p)
        modulus = p ** rel_precision
        num = q.numerator
        den = q.denominator
        if v > 0:
            num //= p ** v
        elif v < 0:
            den //= p ** (-v)
        unit = num * pow(den, -1, modulus) % modulus
        return cls(prime=p, valuation=v, unit=unit, rel_precision=rel_precision)

    @property
    def nu(self) -> int:
        if self.is_zero:
            raise ValueError("valuation undefined for exact zero")
        return self.valuation

    def _check_same_prime(self, other: "PadicValue") -> None:
        if self.prime != other.prime:
            raise ValueError("operands have different primes")

    def with_precision(self, n: int) -> "PadicValue":
        """Truncate to at most n known digits (never extends knowledge)."""
        if self.is_zero or n >= self.rel_precision:
            return self
        if n < 1:
            raise ValueError("relative precision must be >= 1")
        return PadicValue(self.prime, self.valuation,
                          self.unit % self.prime ** n, n)

    def _addsub(self, other: "PadicValue", sign: int) -> "PadicValue":
        self._check_same_prime(other)
        if other.is_zero:
            return self
        if self.is_zero:
            return other if sign > 0 else -other
        p = self.prime
        a, b = (self, other) if self.valuation <= other.valuation else (other, self)
        sa = 1 if a is self else sign
        sb = sign if a is self else 1
        shift = b.valuation - a.valuation
        known = min(a.rel_precision, b.rel_precision + shift)
        modulus = p ** known
        r = (sa * a.unit + sb * b.unit * p ** shift) % modulus
        if r == 0:
            raise PrecisionExhausted(
                "precision exhausted", valuation_bound=a.valuation + known)
        t = valuation_int(r, p)
        if t >= known:
            raise PrecisionExhausted(
                "precision exhausted", valuation_bound=a.valuation + known)
        return PadicValue(p, a.valuation + t, (r // p ** t) % p ** (known - t),
                          known - t)

    def __add__(self, other: "PadicValue") -> "PadicValue":
        return self._addsub(other, +1)

    def __sub__(self, other: "PadicValue") -> "PadicValue":
        return self._addsub(other, -1)

    def __neg__(self) -> "PadicValue":
        if self.is_zero:
            return self
        modulus = self.prime ** self.rel_precision
        return PadicValue(self.prime, self.valuation, (-self.unit) % modulus,
                          self.rel_precision)

    def __mul__(self, other: "PadicValue") -> "PadicValue":
        self._check_same_prime(other)
        if self.is_zero or other.is_zero:
            return PadicValue.zero(self.prime)
        n = min(self.rel_precision, other.rel_precision)
        modulus = self.prime ** n
        return PadicValue(self.prime, self.valuation + other.valuation,
                          self.unit * other.unit % modulus, n)

    def __truediv__(self, other: "PadicValue") -> "PadicValue":
        self._check_same_prime(other)
        if other.is_zero:
            raise ZeroDivisionError("division by zero")
        if self.is_zero:
            return PadicValue.zero(self.prime)
        n = min(self.rel_precision, other.rel_precision)
        modulus = self.prime ** n
        inv = pow(other.unit, -1, modulus)
        return PadicValue(self.prime, self.valuation - other.valuation,
                          self.unit * inv % modulus, n)

    def scale(self, q: Rational) -> "PadicValue":
        """Multiply by an exact nonzero rational (loses no precision)."""
        q = Fraction(q)
        if q == 0:
            return PadicValue.zero(self.prime)
        if self.is_zero:
            return self
        return self * PadicValue.from_rational(q, self.prime, self.rel_precision)

    def agrees_with(self, other: "PadicValue") -> bool:
        """True if the two values match on every digit either side claims."""
        self._check_same_prime(other)
        if self.is_zero or other.is_zero:
            return self.is_zero and other.is_zero
        if self.valuation != other.valuation:
            return False
        n = min(self.rel_precision, other.rel_precision)
        modulus = self.prime ** n
        return self.unit % modulus == other.unit % modulus

    def residue(self, k: int) -> int:
        """Value mod p**k as an integer in [0, p**k); needs v >= 0 and v+N >= k."""
        if self.is_zero:
            return 0
        if self.valuation < 0:
            raise ValueError("negative valuation has no integer residue")
        if self.valuation >= k:
            return 0
        if self.valuation + self.rel_precision < k:
            raise PrecisionExhausted("precision exhausted")
        p = self.prime
        return self.unit * p ** self.valuation % p ** k

    def __repr__(self) -> str:
        if self.is_zero:
            return f"PadicValue(0 exactly, p={self.prime})"
        return (f"PadicValue({self.unit}*{self.prime}^{self.valuation}"
                f"+O({self.prime}^{self.valuation + self.rel_precision}))")


def padic_arith(a: PadicValue, b: PadicValue, op: str) -> PadicValue:
    """Dispatch one arithmetic operation: op in {add, sub, mul, div}."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def digits_of_rational(q: Rational, p: int, count: int) -> list[int]:
    """First `count` base-p digits of a rational lying in the p-adic integers.

    Peels one digit at a time: eps = q mod p (normalized to 0..p-1), then
    q := (q - eps) / p.
    """
    q = Fraction(q)
    if q.denominator % p == 0:
        raise ValueError("not a p-adic integer")
    out = []
    for _ in range(count):
        eps = q.numerator * pow(q.denominator, -1, p) % p
        out.append(eps)
        q = (q - eps) / p
    return out


@dataclass(frozen=True)
class PadicIntegerSpec:
    """A p-adic integer given as a rational, a digit rule, or sparse 2-powers.

    Exactly one form is populated:
      rational   -- q in Z_p (denominator coprime to p)
      prefix/repeat -- explicit digits, then an eventually-periodic tail
                    (empty repeat means all further digits are 0)
      exponents  -- strictly increasing exponents e_0 < e_1 < ... of a sum of
                    powers of 2 (p = 2 only)
    """

    prime: int
    rational: Optional[Fraction] = None
    prefix: Optional[tuple[int, ...]] = None
    repeat: Optional[tuple[int, ...]] = None
    exponents: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        forms = sum(x is not None for x in (self.rational, self.prefix, self.exponents))
        if forms != 1:
            raise ValueError("spec must use exactly one form")
        p = self.prime
        if self.rational is not None and self.rational.denominator % p == 0:
            raise ValueError("not a p-adic integer")
        if self.prefix is not None:
            for d in list(self.prefix) + list(self.repeat or ()):
                if not 0 <= d < p:
                    raise ValueError("digit out of range")
        if self.exponents is not None:
            if p != 2:
                raise ValueError("sparse form requires p=2")
            if list(self.exponents) != sorted(set(self.exponents)):
                raise ValueError("exponents must be strictly increasing")

    @classmethod
    def from_rational(cls, q: Rational, p: int) -> "PadicIntegerSpec":
        return cls(prime=p, rational=Fraction(q))

    @classmethod
    def from_digits(cls, p: int, prefix: Iterable[int],
                    repeat: Iterable[int] = ()) -> "PadicIntegerSpec":
        return cls(prime=p, prefix=tuple(prefix), repeat=tuple(repeat))

    @classmethod
    def sparse2(cls, exponents: Iterable[int]) -> "PadicIntegerSpec":
        return cls(prime=2, exponents=tuple(exponents))

    def digit(self, i: int) -> int:
        if self.rational is not None:
            return digits_of_rational(self.rational, self.prime, i + 1)[i]
        if self.prefix is not None:
            if i < len(self.prefix):
                return self.prefix[i]
            if not self.repeat:
                return 0
            return self.repeat[(i - len(self.prefix)) % len(self.repeat)]
        return 1 if i in self.exponents else 0

    def change_indices(self, depth: int) -> list[int]:
        """Indices n <= depth where the partial sum strictly increases."""
        if self.exponents is not None:
            return [e for e in self.exponents if e <= depth]
        return [n for n in range(depth + 1) if self.digit(n) != 0]

    def describe(self) -> str:
        if self.rational is not None:
            return str(self.rational)
        if self.exponents is not None:
            return "2^" + "+2^".join(str(e) for e in self.exponents)
        rep = ",".join(map(str, self.repeat or ()))
        return f"digits[{','.join(map(str, self.prefix))};{rep}]"


def partial_sum(spec: PadicIntegerSpec, n: int) -> int:
    """x_n = sum of digit(i) * p**i for i = 0..n, as an exact natural number."""
    if n < 0:
        raise ValueError("index must be >= 0")
    p = spec.prime
    if spec.rational is not None:
        modulus = p ** (n + 1)
        q = spec.rational
        return q.numerator * pow(q.denominator, -1, modulus) % modulus
    if spec.exponents is not None:
        return sum(1 << e for e in spec.exponents if e <= n)
    total = 0
    power = 1
    for i in range(n + 1):
        total += spec.digit(i) * power
        power *= p
    return total
