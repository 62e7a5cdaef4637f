import logging
import os

import pytest

from surfcalc.endspace import INFINITE, Cantor, EndLabel, Pt, Seq
from surfcalc.errors import UnknownCurve
from surfcalc.exhaustion import (
    DepthZero,
    ExhaustionLevel,
    InvalidExhaustion,
    NotInfiniteType,
    PieceSignature,
    PrincipalExhaustion,
    alexander_curve_count,
    alexander_system,
    build_exhaustion,
    check_local_finiteness,
    exhaustion_table,
    pants_curve_count,
    validate_exhaustion,
)
from surfcalc.paths import SURFACES_PATH
from surfcalc.surface import (
    BoundaryNotSupported,
    FiniteSurface,
    OrientClass,
    SurfaceSpec,
    load_surface_spec,
)

OR = EndLabel.ORIENTABLE


def packaged(name):
    return load_surface_spec(os.path.join(SURFACES_PATH, f"{name}.json"))


def one_level(surface, piece, punctures=0):
    """Hand built single level exhaustion with a genus end beyond every curve."""
    curves = piece.new_boundary
    level = ExhaustionLevel(0, (piece,), curves)
    beyond = tuple(
        SurfaceSpec(INFINITE, OrientClass.ORIENTABLE, 1, Pt(OR)) for _ in curves
    )
    return PrincipalExhaustion(surface, (level,), (beyond,), (punctures,))


class TestBuild:
    def test_loch_ness(self):
        """
        Test three levels of the Loch Ness monster.
        """
        pe = build_exhaustion(packaged("loch_ness"), 3)
        assert validate_exhaustion(pe) == []
        assert pe.curves == ["b0_0", "b1_0", "b2_0"]
        root = pe.levels[0].pieces[0].surface
        assert root.orientable
        assert root.genus >= 3

    def test_jacobs_ladder(self):
        """
        Test two levels of the two-ended ladder.
        """
        pe = build_exhaustion(packaged("jacobs_ladder"), 2)
        assert validate_exhaustion(pe) == []
        assert len(pe.levels[0].boundary) == 2
        assert len(pe.levels[1].pieces) == 2

    def test_mixed_three_root_piece(self):
        """
        Test that the root piece of a non-orientable surface with three genus
        ends is non-orientable with three boundary curves.
        """
        pe = build_exhaustion(packaged("mixed_three"), 2)
        assert validate_exhaustion(pe) == []
        root = pe.levels[0].pieces[0].surface
        assert root == FiniteSurface(False, 5, 0, 3)

    def test_cantor_tree_absorbs_levels(self):
        """
        Test that planar pieces grow until they meet the complexity bound.
        """
        pe = build_exhaustion(packaged("cantor_tree"), 2)
        assert validate_exhaustion(pe) == []
        assert len(pe.levels[1].pieces) == len(pe.levels[0].boundary)
        assert all(p.surface.genus == 0 for p in pe.pieces())
        assert all(p.surface.complexity >= 5 for p in pe.pieces())

    @pytest.mark.parametrize(
        "name", ["one_ended_nonor", "blooming_cantor_tree", "mixed_three"]
    )
    def test_packaged_surfaces(self, name):
        """
        Test three levels of every packaged infinite-genus surface.
        """
        assert validate_exhaustion(build_exhaustion(packaged(name), 3)) == []

    def test_odd_root_carries_crosscap(self):
        """
        Test that an odd surface puts its crosscap in the root piece.
        """
        s = SurfaceSpec(INFINITE, OrientClass.ODD, 0, Pt(OR))
        pe = build_exhaustion(s, 2)
        assert validate_exhaustion(pe) == []
        assert not pe.levels[0].pieces[0].surface.orientable
        assert pe.levels[1].pieces[0].surface.orientable

    def test_planar_sequence_punctures(self):
        """
        Test that isolated planar ends become punctures.
        """
        s = SurfaceSpec(INFINITE, OrientClass.ORIENTABLE, 0, Seq(Pt(EndLabel.PLANAR), OR))
        pe = build_exhaustion(s, 3)
        assert validate_exhaustion(pe) == []
        assert pe.punctures[-1] >= 1

    def test_depth_zero(self):
        """
        Test that depth must be positive.
        """
        with pytest.raises(DepthZero):
            build_exhaustion(packaged("loch_ness"), 0)

    def test_finite_type(self):
        """
        Test that finite-type surfaces have no exhaustion.
        """
        s = SurfaceSpec(2, OrientClass.ORIENTABLE, 0, Pt(EndLabel.PLANAR))
        with pytest.raises(NotInfiniteType):
            build_exhaustion(s, 2)

    def test_boundary(self):
        """
        Test that boundary is rejected.
        """
        s = SurfaceSpec(INFINITE, OrientClass.ORIENTABLE, 1, Pt(OR))
        with pytest.raises(BoundaryNotSupported):
            build_exhaustion(s, 2)

    def test_table(self):
        """
        Test one table row per piece.
        """
        pe = build_exhaustion(packaged("jacobs_ladder"), 2)
        df = exhaustion_table(pe)
        assert len(df) == 3
        assert list(df["level"]) == [0, 1, 1]


class TestValidate:
    def test_small_orientable_piece(self):
        """
        Test that a genus one piece with two boundary curves is too small.
        """
        piece = PieceSignature("p0_0", FiniteSurface(True, 1, 0, 2), (), ("b0_0", "b0_1"))
        violations = validate_exhaustion(one_level(packaged("jacobs_ladder"), piece))
        assert len(violations) == 1
        assert "3g-3+n+b" in violations[0].message

    def test_small_nonorientable_piece(self):
        """
        Test that a three crosscap piece with a puncture and two boundary
        curves is too small.
        """
        piece = PieceSignature(
            "p0_0", FiniteSurface(False, 3, 1, 2), (), ("b0_0", "b0_1")
        )
        violations = validate_exhaustion(one_level(packaged("jacobs_ladder"), piece))
        assert len(violations) == 1
        assert "g+n+b" in violations[0].message

    def test_boundary_count_mismatch(self):
        """
        Test that listed curves must match the piece's boundary.
        """
        piece = PieceSignature("p0_0", FiniteSurface(True, 3, 0, 2), (), ("b0_0",))
        violations = validate_exhaustion(one_level(packaged("loch_ness"), piece))
        assert [v.where for v in violations] == ["p0_0"]

    def test_missing_ends(self):
        """
        Test that complements must account for every end.
        """
        piece = PieceSignature("p0_0", FiniteSurface(True, 3, 0, 1), (), ("b0_0",))
        violations = validate_exhaustion(one_level(packaged("jacobs_ladder"), piece))
        assert [v.where for v in violations] == ["level 0"]

    def test_finite_type_complement(self):
        """
        Test that every complementary component must be of infinite type.
        """
        piece = PieceSignature("p0_0", FiniteSurface(True, 3, 0, 1), (), ("b0_0",))
        level = ExhaustionLevel(0, (piece,), ("b0_0",))
        beyond = (SurfaceSpec(0, OrientClass.ORIENTABLE, 1, Pt(EndLabel.PLANAR)),)
        pe = PrincipalExhaustion(
            SurfaceSpec(0, OrientClass.ORIENTABLE, 0, Pt(EndLabel.PLANAR)),
            (level,),
            (beyond,),
            (0,),
        )
        assert "b0_0" in [v.where for v in validate_exhaustion(pe)]

    def test_no_levels(self):
        """
        Test that an empty exhaustion is invalid.
        """
        pe = PrincipalExhaustion(packaged("loch_ness"), (), ())
        assert validate_exhaustion(pe)[0].where == "levels"

    def test_undecided_ends_warn(self, caplog):
        """
        Test that an end space outside the decidable fragment is not a
        violation but is logged as unchecked.
        """
        surface = SurfaceSpec(
            INFINITE, OrientClass.ORIENTABLE, 0, Seq(Cantor(EndLabel.PLANAR), OR)
        )
        piece = PieceSignature("p0_0", FiniteSurface(True, 3, 0, 1), (), ("b0_0",))
        with caplog.at_level(logging.WARNING, logger="surfcalc.EXHAUSTION"):
            assert validate_exhaustion(one_level(surface, piece)) == []
        assert any(
            r.name == "surfcalc.EXHAUSTION" and "left unchecked" in r.getMessage()
            for r in caplog.records
        )

    def test_decided_ends_do_not_warn(self, caplog):
        """
        Test that a decided end space logs no warning.
        """
        with caplog.at_level(logging.WARNING, logger="surfcalc.EXHAUSTION"):
            assert validate_exhaustion(build_exhaustion(packaged("loch_ness"), 2)) == []
        assert not [r for r in caplog.records if r.name == "surfcalc.EXHAUSTION"]


class TestAlexander:
    def test_curve_counts(self):
        """
        Test local curve counts.
        """
        f = FiniteSurface(True, 3, 0, 1)
        assert pants_curve_count(f) == 7
        assert alexander_curve_count(f) == 15
        assert pants_curve_count(FiniteSurface(False, 5, 0, 3)) == 10

    def test_system_contents(self):
        """
        Test B, B* and the local family of a one level system.
        """
        pe = build_exhaustion(packaged("loch_ness"), 1)
        system = alexander_system(pe)
        assert system.B == ("b0_0",)
        assert system.Bstar == {"b0_0": "b0_0*"}
        root = pe.levels[0].pieces[0]
        assert len(system.Gamma_j["p0_0"]) == alexander_curve_count(root.surface)

    def test_local_finiteness(self):
        """
        Test that a boundary curve meets its dual and one arc per adjacent piece.
        """
        system = alexander_system(build_exhaustion(packaged("loch_ness"), 1))
        assert check_local_finiteness(system, "b0_0") == 2
        assert check_local_finiteness(system, "b0_0*") == 1
        assert system.intersection("b0_0", "b0_0*") == 2
        deeper = alexander_system(build_exhaustion(packaged("loch_ness"), 3))
        assert check_local_finiteness(deeper, "b0_0") == 3

    def test_probe(self):
        """
        Test registering a probe curve.
        """
        system = alexander_system(build_exhaustion(packaged("loch_ness"), 1))
        system.register_probe("x")
        assert check_local_finiteness(system, "x") == 0
        system.register_probe("y", {"b0_0": 1})
        assert check_local_finiteness(system, "y") == 1

    def test_unknown_curve(self):
        """
        Test that unregistered curves raise UnknownCurve.
        """
        system = alexander_system(build_exhaustion(packaged("loch_ness"), 1))
        with pytest.raises(UnknownCurve):
            check_local_finiteness(system, "nope")
        with pytest.raises(UnknownCurve):
            system.intersection("b0_0", "nope")

    def test_invalid_exhaustion(self):
        """
        Test that a broken exhaustion has no system.
        """
        piece = PieceSignature("p0_0", FiniteSurface(True, 1, 0, 2), (), ("b0_0", "b0_1"))
        with pytest.raises(InvalidExhaustion):
            alexander_system(one_level(packaged("jacobs_ladder"), piece))
