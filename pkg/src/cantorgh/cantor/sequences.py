"""Shrinking sequences ``alpha`` and branching sequences ``m`` in the log domain.

A shrinking sequence is described through ``E(n) = -log2 alpha(n)``, which
stays representable when ``alpha(n)`` itself underflows every float format
(``2**-(n**3)``, towers, ``2**-(2**(i!))``).  When the values ``alpha(n)``
are rational but not dyadic (``1/(n+1)``) an exact value function is kept
alongside so that radius comparisons remain exact.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction
from functools import lru_cache
from typing import Callable, NamedTuple

from . import numbers as nb

MAX_INDEX = 1 << 40
EXACT_ALPHA_BITS = 1 << 20


class Log2Radius(NamedTuple):
    """A radius given by its negative base-2 logarithm: ``r = 2**(-e)``."""

    e: object


class ShrinkingSequence:
    """Strictly decreasing positive sequence tending to zero.

    Parameters
    ----------
    E : callable
        ``n -> -log2 alpha(n)``, returning a ``Fraction`` (exact) or an
        ``mpf`` (100-bit).  Must be strictly increasing and unbounded.
    descriptor : str
        Human readable description.
    alpha : callable, optional
        ``n -> alpha(n)`` as an exact ``Fraction``, for non-dyadic rational
        sequences.
    """

    def __init__(self, E: Callable[[int], object], descriptor: str,
                 alpha: Callable[[int], Fraction] | None = None, params: dict | None = None):
        self._E = lru_cache(maxsize=None)(lambda n: nb.exact_or_mp(E(n)))
        self._alpha = lru_cache(maxsize=None)(alpha) if alpha is not None else None
        self.descriptor = descriptor
        self.params = dict(params or {})

    def __repr__(self) -> str:
        return f"ShrinkingSequence({self.descriptor!r})"

    def E(self, n: int):
        if n < 0:
            raise IndexError("sequence index must be non-negative")
        return self._E(n)

    @property
    def has_exact_values(self) -> bool:
        return self._alpha is not None

    def alpha(self, n: int):
        """``alpha(n)``: exact ``Fraction`` when representable, else ``mpf``."""
        if self._alpha is not None:
            return self._alpha(n)
        e = self.E(n)
        if nb.is_exact(e) and e.denominator == 1 and abs(e) <= EXACT_ALPHA_BITS:
            return Fraction(1, 2 ** int(e)) if e >= 0 else Fraction(2 ** int(-e))
        return nb.MP.power(2, -nb.mp(e))

    def alpha_le(self, n: int, r) -> bool:
        """Whether ``alpha(n) <= r`` (exact whenever the data allow it)."""
        if isinstance(r, Log2Radius):
            return nb.le(r.e, self.E(n))
        if isinstance(r, float):
            r = Fraction(r)
        if nb.is_exact(r):
            r = Fraction(r)
            if r <= 0:
                return False
            if self._alpha is not None:
                return self._alpha(n) <= r
            e = self.E(n)
            if nb.is_exact(e):
                return nb.pow2_neg_le(e, r)
            return bool(nb.mp(e) >= -nb.MP.log(nb.mp(r), 2))
        return bool(nb.mp(self.E(n)) >= -nb.MP.log(nb.mp(r), 2))

    def gap(self, r) -> int:
        """Index ``n`` with ``alpha(n+1) <= r < alpha(n)``; ``-1`` when ``r >= alpha(0)``."""
        if self.alpha_le(0, r):
            return -1
        hi = 1
        while not self.alpha_le(hi, r):
            hi *= 2
            if hi > MAX_INDEX:
                raise OverflowError("radius below every computable scale")
        lo = hi // 2  # alpha(lo) > r
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if self.alpha_le(mid, r):
                hi = mid
            else:
                lo = mid
        return hi - 1

    def scaled_radius(self, n: int, factor):
        """Radius ``factor * alpha(n)`` in the most exact available form."""
        factor = Fraction(factor) if isinstance(factor, (int, float, Fraction)) else factor
        if self._alpha is not None and nb.is_exact(factor):
            return self._alpha(n) * factor
        e = self.E(n)
        return Log2Radius(nb.sub(e, nb.log2(factor)))

    def snowflake(self, gamma) -> "ShrinkingSequence":
        """The sequence ``alpha**gamma`` (``E`` scaled by ``gamma``)."""
        g = Fraction(gamma) if nb.is_exact(gamma) or isinstance(gamma, str) else gamma
        alpha = None
        if self._alpha is not None and nb.is_exact(g) and g.denominator == 1 and g > 0:
            base = self._alpha
            alpha = lambda n: base(n) ** int(g)  # noqa: E731
        return ShrinkingSequence(lambda n: nb.mul(self.E(n), g),
                                 f"({self.descriptor})^{g}", alpha,
                                 {**self.params, "snowflake": str(g)})

    def shifted(self, k: int) -> "ShrinkingSequence":
        alpha = None
        if self._alpha is not None:
            base = self._alpha
            alpha = lambda n: base(n + k)  # noqa: E731
        return ShrinkingSequence(lambda n: self.E(n + k), f"shift{k}({self.descriptor})",
                                 alpha, {**self.params, "shift": k})

    def check_strictly_decreasing(self, upto: int) -> bool:
        return all(nb.lt(self.E(n), self.E(n + 1)) for n in range(upto))

    def exceeds(self, bound, limit: int = 1 << 20) -> int | None:
        """Some ``n`` with ``E(n) > bound`` (witness of ``alpha -> 0``), searched by doubling."""
        n = 1
        while n <= limit:
            if nb.lt(bound, self.E(n)):
                return n
            n *= 2
        return None


class BranchingSequence:
    """Integers ``m_n >= 2`` with ``L(n) = log2 m_n``.

    ``L`` may be supplied directly for giants that cannot be materialized as
    integers (then :meth:`m` raises ``OverflowError``).  A ``constant``
    branching number gives the closed form ``S(n) = (n+1) log2 m``.
    """

    def __init__(self, m: Callable[[int], int] | None = None,
                 L: Callable[[int], object] | None = None,
                 descriptor: str = "", params: dict | None = None, constant: int | None = None):
        self.constant = constant
        if m is None and L is None:
            raise ValueError("need m or L")
        self._m = lru_cache(maxsize=None)(m) if m is not None else None
        if L is None:
            L = lambda n: nb.log2(Fraction(self._m(n)))  # noqa: E731
        self._L = lru_cache(maxsize=None)(lambda n: nb.exact_or_mp(L(n)))
        self.descriptor = descriptor
        self.params = dict(params or {})
        self._prefix: list = []
        self._lock = threading.Lock()

    def __repr__(self) -> str:
        return f"BranchingSequence({self.descriptor!r})"

    def m(self, n: int) -> int:
        if self._m is not None:
            v = self._m(n)
            if v < 2:
                raise ValueError(f"branching number m_{n} = {v} < 2")
            return v
        L = self.L(n)
        if nb.is_exact(L) and L.denominator == 1 and L < EXACT_ALPHA_BITS:
            return 1 << int(L)
        raise OverflowError(f"m_{n} = 2**{nb.fmt(L, 8)} is too large to materialize")

    def L(self, n: int):
        return self._L(n)

    def S(self, n: int):
        """``sum_{i<=n} L(i)``; ``S(-1) = 0``."""
        if n < 0:
            return Fraction(0)
        if self.constant is not None:
            return nb.mul(n + 1, self.L(0))
        with self._lock:
            while len(self._prefix) <= n:
                prev = self._prefix[-1] if self._prefix else Fraction(0)
                self._prefix.append(nb.add(prev, self.L(len(self._prefix))))
            return self._prefix[n]

    def product(self, lo: int, hi: int) -> int | None:
        """``m_lo * ... * m_hi`` as an integer (1 when empty), ``None`` if too large."""
        if hi < lo:
            return 1
        log = nb.sub(self.S(hi), self.S(lo - 1))
        if nb.to_float(log) > EXACT_ALPHA_BITS:
            return None
        try:
            return math.prod(self.m(i) for i in range(lo, hi + 1))
        except OverflowError:
            return None


def constant_branching(m: int = 2) -> BranchingSequence:
    if m < 2:
        raise ValueError("branching number must be >= 2")
    return BranchingSequence(lambda n: m, descriptor=f"m={m}", params={"m": m}, constant=m)


# ---------------------------------------------------------------------------
# Builtin families
# ---------------------------------------------------------------------------

def geometric(ratio_log2=1, offset=1) -> ShrinkingSequence:
    """``alpha(n) = 2**(-ratio_log2 * (n + offset))``."""
    c, o = Fraction(ratio_log2), Fraction(offset)
    if c <= 0:
        raise ValueError("ratio_log2 must be positive")
    return ShrinkingSequence(lambda n: c * (n + o), f"2^-({c}(n+{o}))",
                             params={"family": "geometric", "ratio_log2": str(c), "offset": str(o)})


def harmonic() -> ShrinkingSequence:
    """``alpha(n) = 1/(n+1)``; ``E`` is a 100-bit float, values are exact."""
    return ShrinkingSequence(lambda n: nb.MP.log(n + 1, 2) if n else Fraction(0), "1/(n+1)",
                             alpha=lambda n: Fraction(1, n + 1), params={"family": "harmonic"})


def square() -> ShrinkingSequence:
    """``beta(n) = 2**(-n**2)``: the gap pattern giving dimensional type (0,0,0,0)."""
    return ShrinkingSequence(lambda n: Fraction(n * n), "2^-(n^2)", params={"family": "square"})


def cubic() -> ShrinkingSequence:
    return ShrinkingSequence(lambda n: Fraction(n ** 3), "2^-(n^3)", params={"family": "cubic"})


def _level(N: int) -> tuple[int, int]:
    """Split ``N = n(n+1)/2 + k`` with ``0 <= k <= n``."""
    n = (math.isqrt(8 * N + 1) - 1) // 2
    return n, N - n * (n + 1) // 2


def interleaved_dyadic() -> ShrinkingSequence:
    """Scales ``2**(-n**3)`` refined by ``2**(-k) 2**(-n**3)``, ``k = 1..n``, in decreasing order.

    Index ``phi(n) = n(n+1)/2`` carries ``2**(-n**3)``.
    """
    def E(N: int) -> Fraction:
        n, k = _level(N)
        return Fraction(n ** 3 + k)
    return ShrinkingSequence(E, "theta: 2^-(n^3) refined by 2^-k, k<=n", params={"family": "lemma0001"})


def interleaved_harmonic() -> ShrinkingSequence:
    """Scales ``2**(-n**3)`` refined by ``k/(k+1) 2**(-n**3)``, ``k = 1..n``, in decreasing order."""
    def ratio(N: int) -> Fraction:
        n, k = _level(N)
        return Fraction(1) if k == 0 else Fraction(n + 1 - k, n + 2 - k)

    def alpha(N: int) -> Fraction:
        n, _ = _level(N)
        return ratio(N) / (1 << n ** 3)

    def E(N: int):
        n, k = _level(N)
        if k == 0:
            return Fraction(n ** 3)
        return nb.mp(n ** 3) - nb.MP.log(nb.mp(ratio(N)), 2)
    return ShrinkingSequence(E, "theta': 2^-(n^3) refined by k/(k+1), k<=n", alpha,
                             params={"family": "lemma000i"})


def mild_0111_k(i: int) -> int:
    """Block boundaries ``k(i) = 2**(4 i**2 - 2 i + 1)``: 2, 8, 8192, 2**31, ..."""
    return 1 << (4 * i * i - 2 * i + 1)


def mild_0111_jump(i: int) -> int:
    """Extra exponent ``J_i = k(i) * 4**(i+1)`` placed at index ``k(i) + 1``."""
    return mild_0111_k(i) << (2 * i + 2)


def mild_0111() -> ShrinkingSequence:
    """``alpha(n) = c_0 ... c_n`` with ``c_n = 1/2`` except ``c_{k(i)+1} = 2**-(1 + J_i)``.

    ``E(n) = (n + 1) + sum of J_i over k(i) + 1 <= n``.
    """
    def E(n: int) -> Fraction:
        total = n + 1
        i = 0
        while mild_0111_k(i) + 1 <= n:
            total += mild_0111_jump(i)
            i += 1
        return Fraction(total)
    return ShrinkingSequence(E, "mild (0,1,1,1): c_n=1/2 except c_{k(i)+1}=2^-(1+J_i)",
                             params={"family": "mild0111"})


def tower(n: int) -> int:
    """``t(0) = 2``, ``t(n+1) = 2**t(n)``; only ``n <= 3`` fit in memory."""
    if n > 3:
        raise OverflowError(f"t({n}) has more than 2**65536 bits")
    v = 2
    for _ in range(n):
        v = 1 << v
    return v


def _giant_g(i: int):
    """``g(i) = 2**(i!)`` as an exact integer when small, else ``mpf``."""
    f = math.factorial(i)
    if f <= 4096:
        return Fraction(1 << f)
    return nb.MP.power(2, f)


def lemma0iii(mild: bool = False) -> tuple[BranchingSequence, ShrinkingSequence]:
    """``m_i = 2**g(2i+2)``, ``alpha(n) = c_0...c_n`` with ``c_i = 2**-g(2i+1)``.

    ``g(i) = 2**(i!)`` (giant, ``mpf`` exponents) or ``g(i) = 2**(i**2)`` when ``mild``.
    """
    if mild:
        g = lambda i: Fraction(1 << (i * i))  # noqa: E731
        tag = "2^(i^2)"
    else:
        g = _giant_g
        tag = "2^(i!)"
    m = BranchingSequence(L=lambda i: g(2 * i + 2), descriptor=f"m_i=2^g(2i+2), g(i)={tag}",
                          params={"family": "lemma0iii", "mild": mild})
    prefix: list = []
    lock = threading.Lock()

    def E(n: int):
        with lock:
            while len(prefix) <= n:
                prev = prefix[-1] if prefix else Fraction(0)
                prefix.append(nb.add(prev, g(2 * len(prefix) + 1)))
            return prefix[n]
    alpha = ShrinkingSequence(E, f"c_i=2^-g(2i+1), g(i)={tag}",
                              params={"family": "lemma0iii", "mild": mild})
    return m, alpha


FAMILIES = ("geometric", "harmonic", "square", "cubic", "lemma1111", "lemmaiiii",
            "lemma0000", "lemma0001", "lemma000i", "mild0111", "lemma0iii", "mild0iii")


def family(name: str, **params) -> tuple[BranchingSequence, ShrinkingSequence]:
    """Builtin ``(m, alpha)`` pair by name (the CLI's sequence JSON ``family`` field).

    ``lemma1111`` uses ``alpha(n) = 2**-(n+1)``; a constant ``alpha`` would not
    be a shrinking sequence.
    """
    m = params.pop("m", 2)
    if name in ("geometric", "lemma1111"):
        return constant_branching(m), geometric(**params)
    if name in ("harmonic", "lemmaiiii"):
        return constant_branching(m), harmonic()
    if name in ("square", "lemma0000"):
        return constant_branching(m), square()
    if name == "cubic":
        return constant_branching(m), cubic()
    if name == "lemma0001":
        return constant_branching(2), interleaved_dyadic()
    if name == "lemma000i":
        return constant_branching(2), interleaved_harmonic()
    if name == "mild0111":
        return constant_branching(2), mild_0111()
    if name == "lemma0iii":
        return lemma0iii(mild=False)
    if name == "mild0iii":
        return lemma0iii(mild=True)
    raise KeyError(f"unknown sequence family {name!r}; choose from {', '.join(FAMILIES)}")


def explicit(alphas, ms) -> tuple[BranchingSequence, ShrinkingSequence]:
    """Finite prefix data extended geometrically (ratio 1/2, m=2) past its end."""
    alphas = [Fraction(a) for a in alphas]
    ms = [int(x) for x in ms]
    if any(b >= a for a, b in zip(alphas, alphas[1:])) or any(a <= 0 for a in alphas):
        raise ValueError("alpha prefix must be positive and strictly decreasing")

    def alpha(n: int) -> Fraction:
        if n < len(alphas):
            return alphas[n]
        return alphas[-1] / 2 ** (n - len(alphas) + 1)

    def E(n: int):
        return nb.mul(-1, nb.log2(alpha(n)))

    def m(n: int) -> int:
        return ms[n] if n < len(ms) else 2
    return (BranchingSequence(m, descriptor="explicit", params={"m": ms}),
            ShrinkingSequence(E, "explicit", alpha, params={"alpha": [str(a) for a in alphas]}))
