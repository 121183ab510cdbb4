from fractions import Fraction

import pytest

from cantorgh.cantor import numbers as nb
from cantorgh.cantor.blocks import (
    TAGS, building_block, mild_0111_conditions, tag_type, tower_certificate,
    tower_inequalities_base, upadim2_certificate,
)
from cantorgh.cantor.factory import (
    FINITE_TAGS, assembly_reports, block_report, component_bounds_ok, grid_cube,
    prescribed_factory, prescribed_with_tdim,
)
from cantorgh.cantor.sequences import geometric, harmonic
from cantorgh.cantor.space import INF, DimensionalType
from cantorgh.metric import validate

import oracles


class TestBlocks:
    @pytest.mark.parametrize("tag", TAGS)
    def test_every_block_truncates_to_an_ultrametric(self, tag):
        X = building_block(tag).truncation(2)
        assert len(X) >= 2 and validate(X).is_ultrametric

    def test_tag_type(self):
        assert tag_type("0iii") == DimensionalType(0, INF, INF, INF)
        assert tag_type("0011") == DimensionalType(0, 0, 1, 1)

    def test_unknown_tag(self):
        with pytest.raises(KeyError):
            building_block("0101")

    def test_mild_0111_is_the_effective_variant(self):
        blk = building_block("0111")
        assert blk.spec is None and blk.effective.variant == "mild"

    def test_mild_0111_conditions_hold(self):
        rows = mild_0111_conditions(5)
        assert all(r["monotone"] and r["A_ok"] and r["B_ok"] and r["C_ok"] for r in rows)
        assert rows[1]["A"] == Fraction(8, oracles.mild_0111_E(9))

    def test_tower_certificate(self):
        assert tower_inequalities_base()
        assert all(c.holds for c in tower_certificate(3))

    def test_upadim2(self):
        assert upadim2_certificate(geometric(1, 1), 500)
        assert not upadim2_certificate(harmonic(), 10)

    def test_skeleton_0011_structure(self):
        sk = building_block("0011").skeleton
        assert len(sk.skeleton(3)) == 2 ** (9 - 1)
        assert all(min(p) == 3 and max(p) < 3 + 9 for p in sk.skeleton(3))
        # the designed ratio and the covering certificate both tend to 1
        assert sk.designed_ratio(100) == Fraction(100, 101)
        assert nb.to_float(sk.ubdim_certificate(100)) == pytest.approx(9999 / 10101)

    def test_skeleton_points_separated_at_level_radius(self):
        sk = building_block("0011").skeleton
        pts = sk.skeleton(2)
        r = sk.ambient.alpha(2 + 4)
        assert all(sk.distance(a, b) > r for a in pts for b in pts if a != b)

    def test_block_report_1111(self):
        rep = block_report("1111", 2000)
        assert component_bounds_ok(rep)
        assert not rep.non_doubling

    def test_block_report_000i_flags(self):
        assert block_report("000i", 100).non_doubling


class TestFactory:
    def test_four_components(self):
        asm = prescribed_factory("0.5,0.7,1.3,2.0")
        assert [c.block.tag for c in asm.components] == list(FINITE_TAGS)
        assert [c.scale for c in asm.components] == [Fraction(1, 2), Fraction(7, 10),
                                                     Fraction(13, 10), Fraction(2)]
        assert asm.declared_target == DimensionalType.parse("0.5,0.7,1.3,2.0")

    def test_all_zero_single_block(self):
        asm = prescribed_factory("0,0,0,0")
        assert [c.block.tag for c in asm.components] == ["0000"]

    def test_repeated_values_collapse(self):
        asm = prescribed_factory("1,1,1,1")
        assert [c.block.tag for c in asm.components] == ["1111"]
        assert asm.components[0].scale is None

    def test_infinite_entries(self):
        asm = prescribed_factory("0,1,inf,inf")
        assert [c.block.tag for c in asm.components] == ["0111", "00ii"]
        assert asm.declared_target == DimensionalType(0, 1, INF, INF)

    def test_ordering_violation(self):
        with pytest.raises(ValueError, match="a1 <= a2"):
            prescribed_factory("1,0.5,1,1")

    def test_truncation_is_ultrametric(self):
        X = prescribed_factory("0.5,0.7,1.3,2.0").truncation(2)
        assert validate(X).is_ultrametric

    def test_component_convergence(self):
        # the mild 0111 window must contain the jump after k = 8192
        asm = prescribed_factory("0.5,0.7,0.7,2")
        for rep, comp in zip(assembly_reports(asm, 10_000), asm.components):
            assert component_bounds_ok(rep), comp.block.tag

    def test_tdim_cube_makes_a_metric(self):
        asm = prescribed_with_tdim("2,2,2,2", l=2, resolution=2)
        X = asm.truncation(2)
        rep = validate(X)
        assert rep.is_metric and not rep.is_ultrametric
        assert asm.target.l == 2

    def test_tdim_infinite_is_label_only(self):
        asm = prescribed_with_tdim("inf,inf,inf,inf", l=INF)
        assert any("label only" in n for n in asm.notes)

    def test_grid_cube(self):
        C = grid_cube(1, 4)
        assert C.exact and len(C) == 5 and C.diameter == 1
        assert len(grid_cube(2, 3)) == 16
