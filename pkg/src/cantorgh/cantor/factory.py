"""Cantor ultrametric spaces with a prescribed dimensional type.

For a target ``(a1, a2, a3, a4)`` every positive entry ``a_i`` contributes one
block: for finite ``a_i`` the block of type ``(1,1,1,1)``, ``(0,1,1,1)``,
``(0,0,1,1)`` or ``(0,0,0,1)`` (position ``i``) snowflaked by ``1/a_i``, which
multiplies its type by ``a_i``; for ``a_i = inf`` the corresponding
infinite block.  Blocks are glued by the max-amalgam, whose type is the
entrywise maximum of the component types.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ..metric import (
    BasepointedFamily, FiniteMetricSpace, GlueExponent, discrete_glue, p_amalgam,
)
from . import numbers as nb
from .blocks import Block, building_block, tag_type
from .space import (
    INF, CantorSpec, DimensionalType, DimensionReport, dim_sequences, non_doubling_flag,
    window_estimates,
)

FINITE_TAGS = ("1111", "0111", "0011", "0001")
INFINITE_TAGS = ("iiii", "0iii", "00ii", "000i")


@dataclass
class AssemblyComponent:
    """One block with its snowflake exponent ``gamma = 1/a_i`` (``None`` means unscaled)."""

    block: Block
    scale: object  # the factor a_i multiplying the block's type, or None
    position: int

    @property
    def gamma(self):
        return None if self.scale is None else 1 / self.scale

    @property
    def scaled_target(self) -> DimensionalType:
        if self.scale is None:
            return self.block.target
        return self.block.target.scaled(self.scale)

    @property
    def provenance(self) -> str:
        return f"{self.block.tag}: {self.block.effective.provenance}"

    def certifying_spec(self, depth: int = 8) -> CantorSpec:
        spec = self.block.certifying_spec(depth)
        return spec if self.gamma is None else spec.snowflake(self.gamma)

    def report(self, N: int) -> DimensionReport:
        spec = self.certifying_spec()
        rows = dim_sequences(spec, N)
        h, p = window_estimates(rows, N)
        return DimensionReport(self.scaled_target, rows, h, p, [], False, (N // 2, N))

    def truncation(self, depth: int = 3, max_points: int = 4096) -> FiniteMetricSpace:
        from ..metric import snowflake
        space = self.block.truncation(depth, max_points)
        return space if self.gamma is None else snowflake(space, self.gamma)


@dataclass
class CantorAssembly:
    target: DimensionalType
    components: list
    notes: list = field(default_factory=list)
    cube_dim: object = None
    cube_resolution: int = 0

    @property
    def declared_target(self) -> DimensionalType:
        types = [c.scaled_target for c in self.components]
        out = types[0]
        for t in types[1:]:
            out = out.maximum(t)
        return out

    def truncation(self, depth: int = 3, max_points: int = 4096) -> FiniteMetricSpace:
        """Max-amalgam of the component truncations (glue = largest component diameter).

        With a cube attached, the ultrametric assembly and the grid are then
        joined by the additive amalgam.
        """
        parts = [c.truncation(depth, max_points) for c in self.components]
        if len(parts) == 1:
            space = parts[0]
        else:
            glue_value = max(p.diameter for p in parts)
            exact = all(p.exact for p in parts)
            glue = discrete_glue(len(parts), glue_value if exact else float(glue_value))
            fam = BasepointedFamily(parts, [p.labels[0] for p in parts], glue)
            space = p_amalgam(fam, GlueExponent(math.inf))
        if self.cube_dim not in (None, 0, INF):
            cube = grid_cube(int(self.cube_dim), self.cube_resolution)
            glue_value = max(space.diameter, cube.diameter)
            exact = space.exact and cube.exact
            glue = discrete_glue(2, glue_value if exact else float(glue_value))
            fam = BasepointedFamily([space, cube], [space.labels[0], cube.labels[0]], glue)
            space = p_amalgam(fam, GlueExponent(1))
        return space

    def to_dict(self) -> dict:
        return {
            "target": str(self.target),
            "declared_target": str(self.declared_target),
            "components": [
                {"tag": c.block.tag, "variant": c.block.effective.variant,
                 "scale": None if c.scale is None else str(c.scale),
                 "scaled_target": str(c.scaled_target), "provenance": c.provenance}
                for c in self.components
            ],
            "cube_dim": None if self.cube_dim is None else str(self.cube_dim),
            "cube_resolution": self.cube_resolution,
            "notes": list(self.notes),
        }


def prescribed_factory(target: DimensionalType | str) -> CantorAssembly:
    """Assemble a Cantor ultrametric space of dimensional type ``target``."""
    if isinstance(target, str):
        target = DimensionalType.parse(target)
    vals = target.values
    if all(v == 0 for v in vals):
        return CantorAssembly(target, [AssemblyComponent(building_block("0000"), None, 0)])
    comps = []
    for i, a in enumerate(vals):
        # a block at position i contributes a_i to positions >= i, so a
        # repeated value is already supplied by the previous block
        if a == 0 or (i > 0 and vals[i - 1] == a):
            continue
        if a == INF:
            comps.append(AssemblyComponent(building_block(INFINITE_TAGS[i]), None, i))
        else:
            scale = None if a == 1 else Fraction(a)
            comps.append(AssemblyComponent(building_block(FINITE_TAGS[i]), scale, i))
    asm = CantorAssembly(target, comps)
    if asm.declared_target != DimensionalType(*vals):
        raise AssertionError(f"max rule gives {asm.declared_target}, expected {target}")
    return asm


def grid_cube(l: int, k: int) -> FiniteMetricSpace:
    """``(k+1)**l`` grid points of ``[0,1]**l`` with the Euclidean metric (exact when ``l = 1``)."""
    if l < 1 or k < 1:
        raise ValueError("cube dimension and resolution must be positive")
    pts = list(itertools.product(range(k + 1), repeat=l))
    arr = np.array(pts, dtype=float) / k
    if l == 1:
        n = len(pts)
        dist = np.empty((n, n), dtype=object)
        for i in range(n):
            for j in range(n):
                dist[i, j] = Fraction(abs(pts[i][0] - pts[j][0]), k)
    else:
        diff = arr[:, None, :] - arr[None, :, :]
        dist = np.sqrt((diff ** 2).sum(axis=-1))
    labels = tuple(tuple(Fraction(c, k) for c in p) for p in pts)
    return FiniteMetricSpace(labels, dist, "metric")


def prescribed_with_tdim(target: DimensionalType | str, l=None, resolution: int = 4) -> CantorAssembly:
    """Factory output plus a grid sample of ``[0,1]**l`` carrying the ``tdim`` label ``l``.

    ``l = 0`` attaches nothing; ``l = inf`` keeps the label only (no finite
    grid can stand in for an infinite-dimensional cube).
    """
    if isinstance(target, str):
        target = DimensionalType.parse(target, l=l)
    elif l is not None:
        target = DimensionalType(*target.values, l=l)
    if target.l is None:
        raise ValueError("a tdim label l is required")
    base = prescribed_factory(DimensionalType(*target.values))
    base.target = target
    base.cube_dim = target.l
    base.cube_resolution = resolution if target.l not in (0, INF) else 0
    if target.l == INF:
        base.notes.append("tdim = inf: label only, no cube component")
    return base


def assembly_reports(asm: CantorAssembly, N: int) -> list[DimensionReport]:
    return [c.report(N) for c in asm.components]


def block_report(tag: str, N: int, doubling_window: int = 60) -> DimensionReport:
    """Dimension tables for a single sequence block (effective variant)."""
    blk = building_block(tag)
    spec = blk.certifying_spec()
    rows = dim_sequences(spec, N)
    h, p = window_estimates(rows, N)
    flag = non_doubling_flag(spec, Fraction(1, 2), doubling_window)
    return DimensionReport(tag_type(tag), rows, h, p, [], flag, (N // 2, N))


def component_bounds_ok(report: DimensionReport, tol=Fraction(1, 20)) -> bool:
    """Window liminf of ``h`` within ``tol`` of ``a1`` and limsup of ``p`` within ``tol`` of ``a2``."""
    t = report.target
    return (abs(nb.to_float(report.h_liminf) - float(t.a1)) <= tol
            and abs(nb.to_float(report.p_limsup) - float(t.a2)) <= tol)
