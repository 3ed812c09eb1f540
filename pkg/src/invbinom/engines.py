"""Engines for f(n) = sum over k of 1/C(n, k), its valuations and differences,
plus the auxiliary exact sums the congruence verifiers need.

Three mutually checking routes to f(n):

  * direct     -- literal summation of reciprocal binomials (the oracle),
  * recursive  -- the first-order recurrence f(n) = (n+1)/(2n) f(n-1) + 1,
  * modular    -- a transform of f into the prefix sums of 2**k / k, cleared
                  over lcm(1..n+1); this identity is not part of the source
                  material for the rest of the package, so it is gated behind
                  an equivalence test against the direct engine before any
                  scanner relies on it.

All valuation claims are certified: exact paths are exact, and modular paths
track precision explicitly (PrecisionExhausted escalates the working
precision rather than guessing).
"""

from __future__ import annotations

import threading
from fractions import Fraction
from functools import lru_cache

from . import config
from .padic import (
    PadicValue,
    PrecisionExhausted,
    valuation_int,
    valuation_rational,
)


class CapExceeded(ValueError):
    """Requested n is beyond the configured cap for this engine."""


class EngineMismatch(AssertionError):
    """Two engines disagreed on a value they both certify: a build failure."""


# ---------------------------------------------------------------------------
# primes and lcm plumbing


def primes_upto(n: int) -> list[int]:
    """All primes <= n by a bytearray sieve."""
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0] = sieve[1] = 0
    for p in range(2, int(n ** 0.5) + 1):
        if sieve[p]:
            start = p * p
            sieve[start:n + 1:p] = bytearray(len(range(start, n + 1, p)))
    return [i for i in range(2, n + 1) if sieve[i]]


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin for n < 3.3e24 (covers every use here)."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
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


def _tree_product(values: list[int]) -> int:
    while len(values) > 1:
        values = [values[i] * values[i + 1] for i in range(0, len(values) - 1, 2)] \
            + ([values[-1]] if len(values) % 2 else [])
    return values[0] if values else 1


@lru_cache(maxsize=8)
def lcm_upto(m: int) -> int:
    """lcm(1, 2, ..., m) as a product of maximal prime powers."""
    if m < 1:
        return 1
    factors = []
    for p in primes_upto(m):
        q = p
        while q * p <= m:
            q *= p
        factors.append(q)
    return _tree_product(factors)


# ---------------------------------------------------------------------------
# exact engines


def f_exact(n: int, cap: int | None = None) -> Fraction:
    """Direct summation of 1/C(n, k) over k = 0..n. The oracle engine."""
    if n < 0:
        raise ValueError("n must be >= 0")
    cap = config.env_caps()["exact_n_cap"] if cap is None else cap
    if n > cap:
        raise CapExceeded("use modular engine")
    total = Fraction(0)
    b = 1
    for k in range(n + 1):
        total += Fraction(1, b)
        b = b * (n - k) // (k + 1)
    return total


_REC_CACHE: list[Fraction] = [Fraction(1)]
_REC_LOCK = threading.Lock()
_REC_CACHE_LIMIT = 8192


def f_recursive(n: int) -> Fraction:
    """f(n) by the recurrence f(n) = (n+1)/(2n) f(n-1) + 1, f(0) = 1."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n < len(_REC_CACHE):
        return _REC_CACHE[n]
    with _REC_LOCK:
        while len(_REC_CACHE) <= min(n, _REC_CACHE_LIMIT - 1):
            i = len(_REC_CACHE)
            _REC_CACHE.append(Fraction(i + 1, 2 * i) * _REC_CACHE[-1] + 1)
        value = _REC_CACHE[min(n, _REC_CACHE_LIMIT - 1)]
    for i in range(_REC_CACHE_LIMIT, n + 1):
        value = Fraction(i + 1, 2 * i) * value + 1
    return value


def f_prev_from(f_n: Fraction, n: int) -> Fraction:
    """Invert one recurrence step: recover f(n-1) from f(n)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return (f_n - 1) * Fraction(2 * n, n + 1)


def _identity_numerator(n: int) -> tuple[int, int]:
    """(U, L) with f(n) = (n+1) * U / (L * 2**(n+1)) and L = lcm(1..n+1)."""
    L = lcm_upto(n + 1)
    U = 0
    for k in range(1, n + 2):
        U += (L // k) << k
    return U, L


def f_identity_exact(n: int) -> Fraction:
    """Exact f(n) through the cleared prefix-sum transform; cheap for large n."""
    if n < 0:
        raise ValueError("n must be >= 0")
    U, L = _identity_numerator(n)
    return Fraction((n + 1) * U, L << (n + 1))


_IDENTITY_GATE = {"validated_upto": 0}
_GATE_LOCK = threading.Lock()


def ensure_identity_validated(limit: int = 300) -> None:
    """Equivalence-test the transform engine against direct summation.

    Runs once per process (per limit); raises EngineMismatch on the first
    disagreement. Scanners call this before trusting any prefix-sum shortcut.
    """
    with _GATE_LOCK:
        if _IDENTITY_GATE["validated_upto"] >= limit:
            return
        for n in range(limit + 1):
            direct = f_exact(n, cap=limit)
            if f_identity_exact(n) != direct:
                raise EngineMismatch(f"transform engine diverges from direct sum at n={n}")
            if f_recursive(n) != direct:
                raise EngineMismatch(f"recurrence diverges from direct sum at n={n}")
        _IDENTITY_GATE["validated_upto"] = limit


_FVAL_EXACT_FEASIBLE = 1 << 17  # single identity-engine evaluation stays subsecond-ish


@lru_cache(maxsize=128)
def fval_exact(n: int) -> Fraction:
    """Exact f(n) by the cheapest exact route available."""
    if n < _REC_CACHE_LIMIT:
        return f_recursive(n)
    if n <= _FVAL_EXACT_FEASIBLE:
        return f_identity_exact(n)
    raise CapExceeded("use modular engine")


# ---------------------------------------------------------------------------
# modular engine


def _batched_inverses(units: list[int], modulus: int) -> list[int]:
    """Inverses of units mod modulus with one pow per batch."""
    prefix = []
    acc = 1
    for u in units:
        acc = acc * u % modulus
        prefix.append(acc)
    inv = pow(acc, -1, modulus)
    out = [0] * len(units)
    for i in range(len(units) - 1, -1, -1):
        out[i] = inv * (prefix[i - 1] if i else 1) % modulus
        inv = inv * units[i] % modulus
    return out


def _sum_pow2_over_k(n_terms: int, p: int, abs_prec: int) -> tuple[int, int, int]:
    """Scaled prefix sum T = p**G * sum_{k=1..n_terms} 2**k / k mod p**(abs_prec+G).

    Returns (T, G, modulus). G is the largest power of p among 1..n_terms, so
    every term of the scaled sum is a p-adic integer.
    """
    G = 0
    while p ** (G + 1) <= n_terms:
        G += 1
    modulus = p ** (abs_prec + G)
    scale_by_level = [p ** (G - g) for g in range(G + 1)]
    total = 0
    pow2 = 1
    chunk: list[int] = []
    scales: list[int] = []
    powers: list[int] = []
    batch = 1024
    for k in range(1, n_terms + 1):
        pow2 = pow2 * 2 % modulus
        g = 0
        kk = k
        while kk % p == 0:
            kk //= p
            g += 1
        chunk.append(kk % modulus)
        scales.append(scale_by_level[g])
        powers.append(pow2)
        if len(chunk) == batch or k == n_terms:
            for inv, s, w in zip(_batched_inverses(chunk, modulus), scales, powers):
                total = (total + w * inv % modulus * s) % modulus
            chunk.clear()
            scales.clear()
            powers.clear()
    return total, G, modulus


def _f_padic_odd(n: int, p: int, rel_precision: int) -> PadicValue:
    guard = 2
    while True:
        abs_prec = rel_precision + guard
        total, G, modulus = _sum_pow2_over_k(n + 1, p, abs_prec)
        if total == 0:
            guard += abs_prec
            if guard > config.PRECISION_CEILING:
                raise PrecisionExhausted("precision exhausted")
            continue
        t = valuation_int(total, p)
        rel = abs_prec + G - t
        if rel < rel_precision:
            guard += rel_precision - rel + 2
            if guard > config.PRECISION_CEILING:
                raise PrecisionExhausted("precision exhausted")
            continue
        unit_mod = p ** rel
        v_n1 = valuation_int(n + 1, p)
        unit = (total // p ** t) % unit_mod
        unit = unit * (((n + 1) // p ** v_n1) % unit_mod) % unit_mod
        unit = unit * pow(2, -(n + 1), unit_mod) % unit_mod
        return PadicValue(p, (t - G) + v_n1, unit, rel)


def _f_padic_two(n: int, rel_precision: int, cap: int | None = None) -> PadicValue:
    cap = config.env_caps()["modular_n_cap"] if cap is None else cap
    if n > cap:
        raise CapExceeded("n beyond the p=2 modular cap")
    U, L = _identity_numerator(n)
    v = valuation_int(n + 1, 2) + valuation_int(U, 2) - valuation_int(L, 2) - (n + 1)
    modulus = 1 << rel_precision
    unit = ((n + 1) >> valuation_int(n + 1, 2)) % modulus
    unit = unit * ((U >> valuation_int(U, 2)) % modulus) % modulus
    unit = unit * pow((L >> valuation_int(L, 2)) % modulus, -1, modulus) % modulus
    return PadicValue(2, v, unit, rel_precision)


def f_padic(n: int, p: int, rel_precision: int = config.DEFAULT_PRECISION) -> PadicValue:
    """f(n) as a PadicValue with exact valuation and >= rel_precision digits."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if not is_prime(p):
        raise ValueError("p must be prime")
    if p == 2:
        return _f_padic_two(n, rel_precision)
    return _f_padic_odd(n, p, rel_precision)


# ---------------------------------------------------------------------------
# 2-adic row sum (reaches n beyond the transform cap, e.g. sparse-digit work)


def f2_rowsum(n: int, rel_precision: int = 16, cap: int | None = None) -> PadicValue:
    """f(n) 2-adically by summing the reciprocal binomial row term by term.

    Tracks each 1/C(n, k) as (valuation, unit) over a scaled accumulator, so
    the working integers stay near machine size no matter how large n is.
    """
    if n == 0:
        return PadicValue.from_rational(1, 2, rel_precision)
    cap = config.env_caps()["rowsum_n_cap"] if cap is None else cap
    if n > cap:
        raise CapExceeded("n beyond the 2-adic row-sum cap")
    scale = n.bit_length()  # nu_2(C(n,k)) is at most the digit count
    guard = 3 * n.bit_length() + 16
    while True:
        width = scale + guard + rel_precision
        modulus = 1 << width
        acc = 2 << scale  # k = 0 term (C = 1), doubled by row symmetry
        half = (n - 1) // 2  # k = 0..half doubled; even n adds the middle term
        num_prod = 1  # odd part of n(n-1)...(n-k+1)
        den_prod = 1  # odd part of k!
        v = 0
        batch = 2048
        pending: list[tuple[int, int]] = []  # (valuation, den_prod)
        nums: list[int] = []
        for k in range(1, half + 1):
            a = n - k + 1
            v += valuation_int(a, 2) - valuation_int(k, 2)
            num_prod = num_prod * (a >> valuation_int(a, 2)) % modulus
            den_prod = den_prod * (k >> valuation_int(k, 2)) % modulus
            pending.append((v, den_prod))
            nums.append(num_prod)
            if len(nums) == batch or k == half:
                for (vk, dk), inv in zip(pending, _batched_inverses(nums, modulus)):
                    acc += dk * inv % modulus << (scale - vk + 1)
                acc %= modulus
                pending.clear()
                nums.clear()
        if n % 2 == 0:
            k = n // 2
            a = n - k + 1
            v += valuation_int(a, 2) - valuation_int(k, 2)
            num_prod = num_prod * (a >> valuation_int(a, 2)) % modulus
            den_prod = den_prod * (k >> valuation_int(k, 2)) % modulus
            acc = (acc + (den_prod * pow(num_prod, -1, modulus) % modulus << (scale - v))) % modulus
        if acc != 0:
            t = valuation_int(acc, 2)
            rel = width - t
            if rel >= rel_precision:
                unit = (acc >> t) % (1 << rel)
                return PadicValue(2, t - scale, unit, rel)
        guard *= 2
        if guard > config.PRECISION_CEILING + 4 * n.bit_length():
            raise PrecisionExhausted("precision exhausted")


# ---------------------------------------------------------------------------
# certified valuations and differences


def fval_padic(n: int, p: int, rel_precision: int = config.DEFAULT_PRECISION) -> PadicValue:
    """f(n) p-adically by whichever modular route reaches this n."""
    if p == 2 and n > config.env_caps()["modular_n_cap"]:
        return f2_rowsum(n, rel_precision)
    return f_padic(n, p, rel_precision)


def nu_f(n: int, p: int, dual_cap: int = 2000) -> int:
    """Certified nu_p(f(n)); small n are recomputed on two engines."""
    if n <= dual_cap:
        exact = valuation_rational(f_recursive(n), p)
        modular = f_padic(n, p, 8).valuation
        if exact != modular:
            raise EngineMismatch(
                f"nu_{p}(f({n})): exact {exact} vs modular {modular}")
        return exact
    try:
        return valuation_rational(fval_exact(n), p)
    except CapExceeded:
        return fval_padic(n, p, 8).valuation


def f_diff_padic(m: int, n: int, p: int,
                 rel_precision: int = config.DEFAULT_PRECISION) -> PadicValue:
    """f(m) - f(n) as a PadicValue, escalating precision on cancellation."""
    if m == n:
        raise ValueError("m and n must differ")
    rel = rel_precision
    while True:
        try:
            return fval_padic(m, p, rel) - fval_padic(n, p, rel)
        except PrecisionExhausted:
            rel *= 2
            if rel > config.PRECISION_CEILING:
                raise


def f_diff_valuation(m: int, n: int, p: int) -> int:
    """Certified nu_p(f(m) - f(n))."""
    if m == n:
        raise ValueError("m and n must differ")
    a, b = max(m, n), min(m, n)
    try:
        return valuation_rational(fval_exact(a) - fval_exact(b), p)
    except CapExceeded:
        return f_diff_padic(a, b, p).valuation


# ---------------------------------------------------------------------------
# auxiliary exact sums


def iter_odd_reciprocal_sums(limit: int):
    """Yield (n, sum of 1/(2j-1) for j=1..n) for n = 1..limit."""
    total = Fraction(0)
    for j in range(1, limit + 1):
        total += Fraction(1, 2 * j - 1)
        yield j, total


def odd_reciprocal_sum(n: int) -> tuple[Fraction, int]:
    """(exact sum of 1/(2j-1) for j = 1..n, its nu_2)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for j, total in iter_odd_reciprocal_sums(n):
        pass
    return total, valuation_rational(total, 2)


def elementary_symmetric(args: list[int], k: int) -> int:
    """Exact elementary symmetric polynomial sigma_k of the arguments."""
    if not 0 <= k <= len(args):
        raise ValueError("need 0 <= k <= len(args)")
    es = [1] + [0] * k
    seen = 0
    for a in args:
        seen += 1
        for j in range(min(k, seen), 0, -1):
            es[j] += a * es[j - 1]
    return es[k]


def signed_reciprocal_sum(p: int) -> tuple[int, int]:
    """Residues mod p of sum_{c=1..p-1} (-1)^(c+1)/c and of (2**p - 2)/p."""
    if p == 2 or not is_prime(p):
        raise ValueError("p must be an odd prime")
    lhs = Fraction(0)
    for c in range(1, p):
        lhs += Fraction((-1) ** (c + 1), c)
    lhs_res = lhs.numerator * pow(lhs.denominator, -1, p) % p
    rhs_res = (pow(2, p, p * p) - 2) % (p * p) // p % p
    return lhs_res, rhs_res


def reciprocal_binomial_row_sum(n: int, k_max: int) -> Fraction:
    """Exact sum of 1/C(n, k) for k = 1..k_max (small partial rows)."""
    total = Fraction(0)
    b = 1
    for k in range(1, k_max + 1):
        b = b * (n - k + 1) // k
        total += Fraction(1, b)
    return total
