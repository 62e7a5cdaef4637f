import os
from collections import Counter

import networkx as nx
import numpy as np
import pytest

from surfcalc.endspace import INFINITE, parse_end_expr
from surfcalc.paths import SURFACES_PATH
from surfcalc.shiftbasis import (
    COUNTABLY_INFINITE,
    FewerThanTwoGenusEnds,
    KindMismatch,
    Rank,
    ShiftKind,
    Token,
    WindowTooSmall,
    basis_table,
    broken_strip_relation_check,
    classify_shift,
    complement_components,
    dyck_normal_form,
    end_tree,
    ends_graph,
    genus_ends,
    good_basis,
    homology_rank_oracle,
    nteg,
    pseudo_orientable_shift,
    rank_r,
    shift_between,
    strip_relation_check,
    strip_round_trip,
    teg,
    three_crosscap_strip,
    to_crosscap_strip,
    to_dot,
    to_handle_strip,
    window_complex,
)
from surfcalc.surface import (
    OrientClass,
    SurfaceSpec,
    forget_planar,
    load_surface_spec,
    validate_surface,
)


def packaged(name):
    return forget_planar(load_surface_spec(os.path.join(SURFACES_PATH, f"{name}.json")))


def spec(orient, ends):
    s = SurfaceSpec(INFINITE, OrientClass(orient), 0, parse_end_expr(ends))
    assert validate_surface(s) == []
    return forget_planar(s)


SUITE = [
    ("or", "union(pt(or),pt(or))"),
    ("or", "union(pt(or),pt(or),pt(or))"),
    ("or", "union(pt(or),pt(or),pt(or),pt(or),pt(or),pt(or))"),
    ("or", "union(pt(or),pt(planar),pt(or))"),
    ("or", "seq(pt(or);limit=or)"),
    ("or", "cantor(or)"),
    ("even", "union(pt(or),pt(or))"),
    ("odd", "union(pt(or),pt(or),pt(or))"),
    ("infnonor", "union(pt(nonor),pt(nonor))"),
    ("infnonor", "union(pt(or),pt(nonor),pt(nonor))"),
    ("infnonor", "union(pt(nonor),pt(or),pt(nonor),pt(or))"),
    ("infnonor", "seq(pt(or);limit=nonor)"),
    ("infnonor", "union(pt(or),seq(pt(nonor);limit=nonor))"),
    ("infnonor", "union(cantor(or),pt(nonor),pt(nonor))"),
    ("infnonor", "union(pt(nonor),union(pt(or),pt(nonor)))"),
]


class TestEndTree:
    def test_finite_union(self):
        """
        Test that a finite union is expanded completely.
        """
        tree = end_tree(packaged("mixed_three"), 4)
        assert [e.name for e in genus_ends(tree)] == ["e.0", "e.1", "e.2"]
        assert not any(e.tail for e in genus_ends(tree))

    def test_cantor_truncation(self):
        """
        Test that a Cantor block splits once per unit of depth.
        """
        ends = genus_ends(end_tree(packaged("blooming_cantor_tree"), 4))
        assert len(ends) == 16
        assert all(e.tail for e in ends)

    def test_seq_truncation(self):
        """
        Test that a seq unrolls one copy per unit of depth.
        """
        ends = genus_ends(end_tree(spec("or", "seq(pt(or);limit=or)"), 4))
        assert [e.name for e in ends] == [
            "e.0",
            "e.1.0",
            "e.1.1.0",
            "e.1.1.1.0",
            "e.1.1.1.1",
        ]
        assert [e.tail for e in ends] == [False] * 4 + [True]

    def test_planar_ends_rejected(self):
        """
        Test that the tree needs planar ends removed first.
        """
        s = SurfaceSpec(
            INFINITE,
            OrientClass.ORIENTABLE,
            0,
            parse_end_expr("union(pt(planar),pt(or))"),
        )
        with pytest.raises(ValueError):
            end_tree(s)


class TestGoodBasis:
    def test_jacobs_ladder(self):
        """
        Test the single curve between the two ends of the ladder.
        """
        basis = good_basis(packaged("jacobs_ladder"))
        assert len(basis) == 1
        c = basis[0]
        assert c.id == "g0"
        assert [e.name for e in c.sides[0]] == ["e.0"]
        assert [e.name for e in c.sides[1]] == ["e.1"]
        assert rank_r(basis) == Rank(1)

    def test_mixed_three(self):
        """
        Test the semi-orientable and non-orientable shifts of three ends.
        """
        basis = good_basis(packaged("mixed_three"))
        shifts = [classify_shift(c) for c in basis]
        assert [(h.minus_end.name, h.plus_end.name) for h in shifts] == [
            ("e.1", "e.0"),
            ("e.1", "e.2"),
        ]
        assert [h.kind for h in shifts] == [
            ShiftKind.SEMI_ORIENTABLE,
            ShiftKind.NONORIENTABLE,
        ]
        assert [c.level for c in basis] == [(0, 0), (0, 1)]

    def test_mixed_components_start_a_stage(self):
        """
        Test that curves inside a mixed component belong to the next stage.
        """
        basis = good_basis(spec("infnonor", "union(pt(nonor),union(pt(or),pt(nonor)))"))
        assert [c.level for c in basis] == [(0, 0), (1, 0)]
        assert classify_shift(basis[0]).kind == ShiftKind.NONORIENTABLE

    def test_one_end(self):
        """
        Test that a one-ended surface has no basis.
        """
        with pytest.raises(FewerThanTwoGenusEnds):
            good_basis(packaged("one_ended_nonor"))
        with pytest.raises(FewerThanTwoGenusEnds):
            good_basis(packaged("loch_ness"))

    @pytest.mark.parametrize("k", [2, 3, 4, 5, 6])
    def test_finitely_many_ends(self, k):
        """
        Test that k genus ends give rank k - 1, confirmed by the oracle.
        """
        s = spec("or", "union(" + ",".join(["pt(or)"] * k) + ")")
        basis = good_basis(s)
        assert rank_r(basis) == Rank(k - 1)
        report = homology_rank_oracle(basis)
        assert report.rank == k - 1
        assert report.generates

    def test_countably_infinite(self):
        """
        Test that truncated regions make the rank countably infinite.
        """
        basis = good_basis(packaged("blooming_cantor_tree"))
        assert rank_r(basis) == COUNTABLY_INFINITE
        assert rank_r(basis).to_json() == "countably_infinite"
        report = homology_rank_oracle(basis)
        assert report.rank == 15
        assert report.generates

    @pytest.mark.parametrize("orient, ends", SUITE)
    def test_one_end_per_component(self, orient, ends):
        """
        Test that each complementary component holds one genus end and that
        the handle-shifts span a tree.
        """
        s = spec(orient, ends)
        tree = end_tree(s, 4)
        basis = good_basis(s, tree=tree)
        components = complement_components(basis, tree)
        assert len(components) == len(basis) + 1
        assert all(len(c) == 1 for c in components)
        g = teg(basis)
        assert nx.is_tree(g)
        assert set(g.nodes) == {e.name for e in tree.leaves()}
        sub = nteg(g)
        if len(sub) >= 2:
            assert nx.is_weakly_connected(sub)

    @pytest.mark.parametrize("orient, ends", SUITE)
    def test_oracle_agrees(self, orient, ends):
        """
        Test that the oracle rank equals the number of basis curves.
        """
        basis = good_basis(spec(orient, ends))
        report = homology_rank_oracle(basis)
        assert report.rank == len(basis)
        assert report.generates

    @pytest.mark.parametrize("genus", [0, 4, 50])
    def test_window_homology_counts_handles(self, genus):
        """
        Test that the doubled window of k ends with g handles per piece has
        H_1 of rank 2(2gk + k - 1) and that the curve rank ignores handles.
        """
        k = 3
        basis = good_basis(spec("or", "union(pt(or),pt(or),pt(or))"))
        cx = window_complex(basis, genus)
        assert not np.any(cx.d1 @ cx.d2)
        assert cx.h1_rank == 2 * (2 * genus * k + k - 1)
        report = homology_rank_oracle(basis, genus)
        assert report.h1_rank == cx.h1_rank
        assert report.rank == 2
        assert report.generates
        assert report.invariant_factors == homology_rank_oracle(basis, 0).invariant_factors

    def test_window_complex_cells(self):
        """
        Test the cells of the doubled window of Jacob's ladder.
        """
        basis = good_basis(packaged("jacobs_ladder"))
        cx = window_complex(basis, 1)
        assert len(cx.faces) == 4
        assert cx.d1.shape == (len(cx.vertices), len(cx.edges))
        assert cx.d2.shape == (len(cx.edges), len(cx.faces))
        assert sum(name.startswith("c[") for name in cx.edges) == 2
        assert cx.h1_rank == 2 * (2 * 1 * 2 + 1)
        assert homology_rank_oracle(basis, 1).to_dict()["h1_rank"] == cx.h1_rank

    def test_to_dict(self):
        """
        Test the json form of a curve.
        """
        c = good_basis(packaged("jacobs_ladder"))[0]
        assert c.to_dict() == {
            "id": "g0",
            "level": [0, 0],
            "sides": [["e.0"], ["e.1"]],
            "homology_index": 0,
        }


class TestShifts:
    def test_kind_mismatch(self):
        """
        Test that non-orientable ends cannot appear on an orientable spec.
        """
        basis = good_basis(packaged("mixed_three"))
        with pytest.raises(KindMismatch):
            classify_shift(basis[1], packaged("jacobs_ladder"))

    def test_pseudo_orientable(self):
        """
        Test the pseudo-orientable companion of a non-orientable shift.
        """
        basis = good_basis(packaged("mixed_three"))
        assert pseudo_orientable_shift(basis[1]).kind == ShiftKind.PSEUDO_ORIENTABLE
        with pytest.raises(KindMismatch):
            pseudo_orientable_shift(basis[0])

    def test_shift_to_dict(self):
        """
        Test the json form of a handle-shift.
        """
        shift = classify_shift(good_basis(packaged("jacobs_ladder"))[0])
        assert shift.to_dict() == {
            "index": 0,
            "minus": "e.0",
            "plus": "e.1",
            "kind": "orientable",
            "support": "g0",
        }

    def test_ends_graph(self):
        """
        Test the complete graph on the genus ends.
        """
        g = ends_graph(packaged("mixed_three"))
        assert g.number_of_nodes() == 3
        assert g.number_of_edges() == 3
        assert g.nodes["e.1"]["label"] == "nonor"

    def test_teg_edges(self):
        """
        Test TEG and nTEG of three mixed ends.
        """
        g = teg(good_basis(packaged("mixed_three")))
        assert set(g.edges) == {("e.1", "e.0"), ("e.1", "e.2")}
        assert g.edges["e.1", "e.0"]["kind"] == "semi"
        sub = nteg(g)
        assert set(sub.nodes) == {"e.1", "e.2"}
        assert set(sub.edges) == {("e.1", "e.2")}

    def test_shift_between(self):
        """
        Test writing a shift between two ends as a signed tree path.
        """
        basis = good_basis(packaged("mixed_three"))
        assert shift_between("e.0", "e.2", basis) == [(0, -1), (1, 1)]
        with pytest.raises(KeyError):
            shift_between("e.0", "e.9", basis)

    def test_dot(self):
        """
        Test dot export of TEG.
        """
        dot = to_dot(teg(good_basis(packaged("mixed_three"))))
        assert "digraph" in dot
        assert "e.1" in dot

    def test_basis_table(self):
        """
        Test one table row per curve.
        """
        basis = good_basis(packaged("mixed_three"))
        df = basis_table(basis, [classify_shift(c) for c in basis])
        assert list(df["curve"]) == ["g0", "g1"]
        assert list(df["kind"]) == ["semi_orientable", "nonorientable"]


class TestStrip:
    @pytest.mark.parametrize("window", range(4, 33))
    def test_relation_holds(self, window):
        """
        Test the three crosscap relation on every window from 4 to 32.
        """
        assert strip_relation_check(window)

    @pytest.mark.parametrize("window", range(4, 33))
    def test_broken_relation_fails(self, window):
        """
        Test that leaving one crosscap row in place breaks the relation.
        """
        assert not broken_strip_relation_check(window)

    def test_window_too_small(self):
        """
        Test the smallest window.
        """
        with pytest.raises(WindowTooSmall):
            strip_relation_check(3)

    def test_dyck_rewrite(self):
        """
        Test that a handle next to a crosscap becomes two crosscaps.
        """
        column = Counter({Token.HANDLE: 1, Token.CROSSCAP: 1})
        assert dyck_normal_form(column) == Counter({Token.CROSSCAP: 3})
        assert dyck_normal_form(Counter({Token.HANDLE: 2})) == Counter({Token.HANDLE: 2})
        assert dyck_normal_form(Counter({Token.CROSSCAP: 1})) == Counter(
            {Token.CROSSCAP: 1}
        )

    def test_f_round_trip(self):
        """
        Test that f followed by its inverse restores the crosscap rows.
        """
        start = three_crosscap_strip(8)
        back = to_crosscap_strip(to_handle_strip(start))
        for row in ("x1", "x2", "x3"):
            assert np.array_equal(back.rows[row], start.rows[row])

    @pytest.mark.parametrize("window", [4, 8, 16])
    def test_round_trip_after_paired_shift(self, window):
        """
        Test the round trip once x1 and x2 have moved together.
        """
        assert strip_round_trip(window)

    def test_f_needs_paired_rows(self):
        """
        Test that f is undefined once x1 and x2 move apart.
        """
        with pytest.raises(ValueError):
            to_handle_strip(three_crosscap_strip(8).shift("x1"))

    def test_shift_enters_from_the_left(self):
        """
        Test that shifting a row moves tokens right and adds one on the left.
        """
        model = three_crosscap_strip(4).shift("x3")
        assert list(model.rows["x3"][:3]) == [-5, -4, -3]
