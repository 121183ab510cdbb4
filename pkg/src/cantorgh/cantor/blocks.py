"""Building blocks: Cantor ultrametric spaces of fixed dimensional types.

Each tag names the four dimensions (Hausdorff, packing, upper box, Assouad)
with ``0``, ``1`` or ``i`` (infinity).  Most blocks are sequence spaces
``S(m, alpha)``.  Types ``0011`` and ``00ii`` need a countable skeleton with
small Cantor pieces attached; :class:`SkeletonBlock` is an explicit choice of
such a skeleton whose covering numbers are exactly computable.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from ..metric import FiniteMetricSpace, SizeError
from . import numbers as nb
from .sequences import (
    ShrinkingSequence, constant_branching, cubic, geometric, harmonic, interleaved_dyadic,
    interleaved_harmonic, lemma0iii, mild_0111, mild_0111_jump, mild_0111_k, square,
)
from .space import INF, CantorSpec, DimensionalType

TAGS = ("0000", "1111", "iiii", "0111", "0iii", "0011", "00ii", "0001", "000i")


def tag_type(tag: str) -> DimensionalType:
    vals = [INF if ch == "i" else int(ch) for ch in tag]
    return DimensionalType(*vals)


# ---------------------------------------------------------------------------
# Skeleton blocks (types 0011 and 00ii)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SkeletonBlock:
    """Convergent sequence in ``S(2)`` with a ``(0,0,0,0)`` Cantor piece attached to each point.

    Points are finite sets of positions carrying a ``1``.  The skeleton is
    the limit point ``{}`` together with, for each ``s >= 1``, every string
    with first ``1`` at ``s`` and support in ``[s, s + s**2)`` (``2**(s**2-1)``
    points).  A skeleton point with first ``1`` at ``s`` is isolated at radius
    ``alpha(s + s**2 - 1)``; its piece consists of the strings obtained by
    adding ``1``s at positions ``piece_position(s, i)``, all lying in the
    closed ball of one third of that radius.
    """

    ambient: ShrinkingSequence
    piece_position: Callable[[int, int], int]
    name: str

    def skeleton(self, s: int) -> list[frozenset]:
        if s < 1:
            raise ValueError("skeleton levels start at s = 1")
        free = range(s + 1, s + s * s)
        out = []
        for bits in itertools.product((0, 1), repeat=len(free)):
            out.append(frozenset([s] + [p for p, b in zip(free, bits) if b]))
        return out

    def isolation_radius(self, s: int):
        return self.ambient.alpha(s + s * s - 1)

    def piece_radius(self, s: int):
        return self.ambient.alpha(self.piece_position(s, 0))

    def distance(self, x: frozenset, y: frozenset):
        diff = x ^ y
        return Fraction(0) if not diff else self.ambient.alpha(min(diff))

    def points(self, s_max: int, piece_depth: int) -> list[frozenset]:
        pts = [frozenset()]
        for s in range(1, s_max + 1):
            pos = [self.piece_position(s, i) for i in range(piece_depth)]
            for a in self.skeleton(s):
                for bits in itertools.product((0, 1), repeat=piece_depth):
                    pts.append(a | {p for p, b in zip(pos, bits) if b})
        return pts

    def enumerate(self, s_max: int = 2, piece_depth: int = 2, max_points: int = 4096
                  ) -> FiniteMetricSpace:
        count = 1 + sum(2 ** (s * s - 1) for s in range(1, s_max + 1)) * 2 ** piece_depth
        if count > max_points:
            raise SizeError(f"{count} points exceed the budget of {max_points}")
        pts = self.points(s_max, piece_depth)
        n = len(pts)
        dist = np.empty((n, n), dtype=object)
        for i in range(n):
            dist[i, i] = Fraction(0)
            for j in range(i + 1, n):
                d = self.distance(pts[i], pts[j])
                dist[i, j] = dist[j, i] = d
        labels = tuple(tuple(sorted(p)) for p in pts)
        return FiniteMetricSpace(labels, dist, "ultrametric")

    def piece_spec(self, s: int = 1, depth: int = 8) -> CantorSpec:
        """The piece attached at level ``s`` as a sequence space ``S(2, alpha(pos(s, i)))``."""
        amb = self.ambient
        if amb.has_exact_values:
            seq = ShrinkingSequence(lambda i: amb.E(self.piece_position(s, i)),
                                    f"piece(s={s}) of {self.name}",
                                    alpha=lambda i: amb.alpha(self.piece_position(s, i)))
        else:
            seq = ShrinkingSequence(lambda i: amb.E(self.piece_position(s, i)),
                                    f"piece(s={s}) of {self.name}")
        return CantorSpec(constant_branching(2), seq, depth)

    def designed_ratio(self, n: int) -> Fraction:
        """``k_n / (c_n + k_n)`` with ``c_n = n``, ``k_n = n**2``."""
        return Fraction(n * n, n + n * n)

    def level_count_log2(self, n: int) -> int:
        """``log2`` of the exact number of level-``n`` skeleton classes at radius ``alpha(n + n**2)``."""
        return n * n - 1

    def ubdim_certificate(self, n: int):
        """Covering ratio ``log2 N(K, r) / -log2 r`` at ``r = alpha(n + n**2)``.

        Level-``n`` skeleton points are pairwise farther apart than ``r``, so
        closed ``r``-balls separate them and ``N(K, r) >= 2**(n**2 - 1)``.
        """
        return nb.div(Fraction(self.level_count_log2(n)), self.ambient.E(n + n * n))


def _skeleton_0011() -> SkeletonBlock:
    amb = geometric(1, 1)
    return SkeletonBlock(amb, lambda s, i: s + s * s + 1 + i * i, "0011 skeleton in S(2, 2^-(n+1))")


def _skeleton_00ii() -> SkeletonBlock:
    amb = harmonic()
    return SkeletonBlock(amb, lambda s, i: 3 * (s + s * s) * 2 ** (i * i) - 1,
                         "00ii skeleton in S(2, 1/(n+1))")


def upadim2_certificate(alpha: ShrinkingSequence, upto: int = 10_000) -> bool:
    """Check ``alpha(i+1)/alpha(i) <= 1/2`` (``E(i+1) - E(i) >= 1``) for ``i < upto``.

    For the exact affine and polynomial families the difference is a closed
    form, so the finite check matches the symbolic one.
    """
    return all(nb.le(1, nb.sub(alpha.E(i + 1), alpha.E(i))) for i in range(upto))


# ---------------------------------------------------------------------------
# Tower certificates (exact type 0111)
# ---------------------------------------------------------------------------

def tower_inequalities_base(hmax: int = 3) -> bool:
    """Exact base facts used by the tower certificate: ``t(h+1) >= 2 t(h) + h + 2`` for ``h >= 1``.

    The inequality fails at ``h = 0`` (``4 < 6``); every height used below is at
    least 5, and the step ``h -> h+1`` follows from ``2**x >= 2x + 2`` for ``x >= 3``.
    """
    from .sequences import tower
    return all(tower(h + 1) >= 2 * tower(h) + h + 2 for h in range(1, hmax))


@dataclass(frozen=True)
class TowerCondition:
    i: int
    name: str
    holds: bool
    bound: str


def tower_certificate(i_max: int = 2) -> list[TowerCondition]:
    """Symbolic check of the block conditions for ``k(i) = t(5i+5)``, ``c = 1/t(5i+8)``.

    Quantities are tracked by tower height.  With ``D_i = k(i+1) - k(i) - 1``
    and ``E_i = -log2(c_0 ... c_{k(i)+1}) = k(i) + 1 - i + sum_{j<=i} t(5j+7)``:

    * ``k(i)/E_i <= t(5i+5)/t(5i+7) <= 2**-t(5i+5)``;
    * ``k(i)/D_i <= 2 t(5i+5)/t(5i+10) <= 2**-t(5i+8)``;
    * ``E_i/D_i <= 4 t(5i+7)/t(5i+10) <= 2**-t(5i+8)``.

    Each step needs only ``t(h+1) = 2**t(h) >= 2 t(h) + h + 2`` and
    monotonicity in ``h``, which reduce to comparisons of heights.
    """
    base = tower_inequalities_base()
    out = []
    for i in range(i_max + 1):
        hk, hc, hk1 = 5 * i + 5, 5 * i + 8, 5 * i + 10
        out.append(TowerCondition(i, "k(i)+1<k(i+1)", hk < hk1, f"t({hk})+1 < t({hk1})"))
        out.append(TowerCondition(i, "c<=1/2", base and hc >= 0, f"1/t({hc}) <= 1/t(0) = 1/2"))
        # log2(t(a)/t(b)) = t(a-1) - t(b-1) <= -t(b-2) once b >= a + 2
        out.append(TowerCondition(i, "4.A", base and hc - 1 >= hk + 2,
                                  f"ratio <= 2^-t({hk})"))
        out.append(TowerCondition(i, "4.B", base and hk1 >= hk + 2,
                                  f"ratio <= 2^-t({hk1 - 2})"))
        out.append(TowerCondition(i, "4.C", base and hk1 >= hc - 1 + 2,
                                  f"ratio <= 2^-t({hk1 - 2})"))
    return out


def mild_0111_conditions(i_max: int = 5) -> list[dict]:
    """Exact ratios of the three limit conditions for the mild variant, with envelopes.

    ``A_i = k(i)/E(k(i)+1) <= 4**-i``, ``B_i = k(i)/D_i <= 2**-(8i+1)``,
    ``C_i = E(k(i)+1)/D_i <= 2**(3-6i)``; all envelopes tend to zero.
    """
    seq = mild_0111()
    rows = []
    for i in range(i_max + 1):
        k, k1 = mild_0111_k(i), mild_0111_k(i + 1)
        E = seq.E(k + 1)
        D = k1 - k - 1
        A, B, C = Fraction(k) / E, Fraction(k, D), E / D
        rows.append({
            "i": i, "k": k, "A": A, "B": B, "C": C,
            "monotone": k + 1 < k1,
            "A_ok": A <= Fraction(1, 4 ** i),
            "B_ok": B <= Fraction(1, 2 ** (8 * i + 1)),
            "C_ok": C <= Fraction(2 ** 3, 2 ** (6 * i)),
            "jump": mild_0111_jump(i),
        })
    return rows


# ---------------------------------------------------------------------------
# Block registry
# ---------------------------------------------------------------------------

@dataclass
class Block:
    """A building block with its analytic type and construction parameters."""

    tag: str
    target: DimensionalType
    provenance: str
    variant: str = "canonical"
    spec: CantorSpec | None = None
    skeleton: SkeletonBlock | None = None
    mild: "Block | None" = None
    notes: list = field(default_factory=list)

    @property
    def effective(self) -> "Block":
        """The computable variant (the mild one when the exact parameters are out of reach)."""
        if self.spec is None and self.skeleton is None and self.mild is not None:
            return self.mild
        return self

    def certifying_spec(self, depth: int = 8) -> CantorSpec:
        """Sequence space whose ``h_n``/``p_n`` certify ``a1``/``a2`` (pieces for skeleton blocks)."""
        b = self.effective
        if b.spec is not None:
            return b.spec.with_depth(depth)
        if b.skeleton is not None:
            return b.skeleton.piece_spec(1, depth)
        raise ValueError(f"block {self.tag} has no computable sequence data")

    def truncation(self, depth: int = 3, max_points: int = 4096) -> FiniteMetricSpace:
        """A finite truncation; the basepoint is the first label (all-zeros / limit point)."""
        from .space import enumerate_space
        b = self.effective
        if b.skeleton is not None:
            return b.skeleton.enumerate(s_max=2, piece_depth=max(0, depth - 1), max_points=max_points)
        spec = b.spec
        d = depth
        while d > 1:
            try:
                return enumerate_space(spec.with_depth(d), max_points)
            except (SizeError, OverflowError):
                d -= 1
        return enumerate_space(spec.with_depth(1), max_points)


def _seq_block(tag, provenance, m, alpha, variant="canonical", depth=8, notes=()) -> Block:
    return Block(tag, tag_type(tag), provenance, variant, CantorSpec(m, alpha, depth),
                 notes=list(notes))


def building_block(tag: str) -> Block:
    """Construction for ``tag`` in ``0000 1111 iiii 0111 0iii 0011 00ii 0001 000i``."""
    two = constant_branching(2)
    if tag == "0000":
        return _seq_block(tag, "S(2, 2^-(n^2))", two, square())
    if tag == "1111":
        return _seq_block(tag, "S(2, 2^-(n+1))", two, geometric(1, 1),
                          notes=["alpha(n) = 2^-(n+1) (a constant alpha is not shrinking)"])
    if tag == "iiii":
        return _seq_block(tag, "S(2, 1/(n+1))", two, harmonic())
    if tag == "0111":
        mild = _seq_block(tag, "mild: k(i)=2^(4i^2-2i+1), c_{k(i)+1}=2^-(1+k(i)4^(i+1))",
                          two, mild_0111(), variant="mild")
        return Block(tag, tag_type(tag), "towers: k(i)=t(5i+5), c_{k(i)+1}=1/t(5i+8)", "canonical",
                     mild=mild, notes=["exact variant verified by tower certificate only"])
    if tag == "0iii":
        m, a = lemma0iii(mild=False)
        mm, ma = lemma0iii(mild=True)
        mild = _seq_block(tag, "mild: g(i)=2^(i^2)", mm, ma, variant="mild")
        blk = _seq_block(tag, "m_i=2^g(2i+2), c_i=2^-g(2i+1), g(i)=2^(i!)", m, a, depth=1)
        blk.mild = mild
        return blk
    if tag == "0011":
        return Block(tag, tag_type(tag), "skeleton [n, n+n^2) in S(2, 2^-(n+1)) + 2^-(i^2) pieces",
                     "constructive", skeleton=_skeleton_0011())
    if tag == "00ii":
        return Block(tag, tag_type(tag), "skeleton [n, n+n^2) in S(2, 1/(n+1)) + 2^-(i^2) pieces",
                     "constructive", skeleton=_skeleton_00ii())
    if tag == "0001":
        return _seq_block(tag, "theta: 2^-(n^3) refined by 2^-k, k=1..n", two, interleaved_dyadic())
    if tag == "000i":
        return _seq_block(tag, "theta': 2^-(n^3) refined by k/(k+1), k=1..n", two,
                          interleaved_harmonic())
    raise KeyError(f"unknown block tag {tag!r}; choose from {', '.join(TAGS)}")


def cubic_spec(depth: int = 4) -> CantorSpec:
    return CantorSpec(constant_branching(2), cubic(), depth)
