import random

import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from surfcalc.endspace import (
    INFINITE,
    Cantor,
    ClosednessError,
    EndLabel,
    EndParseError,
    FragmentExceeded,
    PointClass,
    Pt,
    Seq,
    Union,
    Verdict,
    count_ends,
    count_genus_ends,
    count_nonorientable_ends,
    delete_planar,
    end_labels,
    equivalent,
    form_to_expr,
    format_count,
    format_end_expr,
    normalize,
    parse_end_expr,
    random_end_expr,
    reassociate,
    split_region,
    validate_closedness,
)

P = EndLabel.PLANAR
OR = EndLabel.ORIENTABLE
NONOR = EndLabel.NONORIENTABLE


def nested_seq(levels):
    e = Pt(P)
    for _ in range(levels):
        e = Seq(e, P)
    return e


class TestGrammar:
    def test_parse_all_nodes(self):
        """
        Test parsing every node kind.
        """
        text = "union(pt(or),cantor(planar),seq(pt(planar);limit=nonor))"
        e = parse_end_expr(text)
        assert e == Union((Pt(OR), Cantor(P), Seq(Pt(P), NONOR)))

    def test_format_is_canonical(self):
        """
        Test that whitespace is dropped when formatting.
        """
        e = parse_end_expr("  seq( pt(planar) ; limit = or ) ")
        assert format_end_expr(e) == "seq(pt(planar);limit=or)"
        assert parse_end_expr(format_end_expr(e)) == e

    @pytest.mark.parametrize(
        "text",
        [
            "pt(foo)",
            "pt(or",
            "blob(or)",
            "union()",
            "pt(or) pt(or)",
            "seq(pt(or))",
            "pt(or)!",
        ],
    )
    def test_parse_errors(self, text):
        """
        Test that malformed expressions raise EndParseError.
        """
        with pytest.raises(EndParseError):
            parse_end_expr(text)

    def test_parse_error_is_value_error(self):
        """
        Test that parse errors can be caught as ValueError.
        """
        with pytest.raises(ValueError):
            parse_end_expr("pt(")


class TestClosedness:
    def test_nonorientable_limit_planar(self):
        """
        Test that a planar limit of non-orientable ends is flagged at the root.
        """
        violations = validate_closedness(Seq(Pt(NONOR), P))
        assert len(violations) == 1
        assert violations[0].where == "root"

    def test_planar_sequence(self):
        """
        Test that a planar sequence converging to a planar end is closed.
        """
        assert validate_closedness(Seq(Pt(P), P)) == []

    def test_dominating_label(self):
        """
        Test a union whose seq limit dominates its body.
        """
        assert validate_closedness(Union((Pt(OR), Seq(Pt(OR), OR)))) == []

    def test_nested_violation_path(self):
        """
        Test that nested violations report their path.
        """
        e = Union((Pt(P), Seq(Seq(Pt(OR), P), OR)))
        violations = validate_closedness(e)
        assert [v.where for v in violations] == ["root.1.body"]


class TestCounting:
    def test_single_genus_end(self):
        """
        Test counting one orientable genus end.
        """
        assert count_genus_ends(Pt(OR)) == 1

    def test_two_genus_ends(self):
        """
        Test counting an orientable and a non-orientable end.
        """
        e = Union((Pt(OR), Pt(NONOR)))
        assert count_genus_ends(e) == 2
        assert count_nonorientable_ends(e) == 1

    def test_sequence_of_genus_ends(self):
        """
        Test that a sequence of genus ends is infinite.
        """
        assert count_genus_ends(Seq(Pt(OR), OR)) == INFINITE

    def test_planar_only(self):
        """
        Test that planar ends are not genus ends.
        """
        e = Seq(Pt(P), P)
        assert count_genus_ends(e) == 0
        assert count_ends(e) == INFINITE

    def test_end_labels(self):
        """
        Test the set of labels present.
        """
        assert end_labels(Seq(Pt(P), OR)) == frozenset({P, OR})

    def test_format_count(self):
        """
        Test json friendly counts.
        """
        assert format_count(INFINITE) == "inf"
        assert format_count(3) == 3


class TestDeletePlanar:
    def test_delete_planar_point(self):
        """
        Test removing a planar point from a union.
        """
        e = Union((Pt(P), Pt(OR), Pt(OR)))
        assert delete_planar(e) == Union((Pt(OR), Pt(OR)))

    def test_seq_collapses_to_limit(self):
        """
        Test that a seq of planar points collapses to its limit.
        """
        assert delete_planar(Seq(Pt(P), OR)) == Pt(OR)

    def test_nothing_left(self):
        """
        Test that a planar-only expression deletes to None.
        """
        assert delete_planar(Cantor(P)) is None


class TestNormalize:
    def test_cantor_blocks_merge(self):
        """
        Test that two Cantor blocks of one label form one block.
        """
        form = normalize(Union((Cantor(OR), Cantor(OR))))
        assert form.cantor_part == (OR,)
        assert form.countable_part == ()

    def test_single_point(self):
        """
        Test the form of a single genus end.
        """
        assert normalize(Pt(OR)).countable_part == ((0, OR, 1),)

    def test_convergent_sequence(self):
        """
        Test the rank profile of planar points converging to a genus end.
        """
        form = normalize(Seq(Pt(P), OR))
        assert form.countable_part == ((0, P, INFINITE), (1, OR, 1))
        assert form.attachment == ((1, (0,)),)

    def test_seq_over_uniform_cantor(self):
        """
        Test that a sequence of Cantor blocks of the limit label is a Cantor block.
        """
        form = normalize(Seq(Cantor(OR), OR))
        assert form.cantor_part == (OR,)

    def test_seq_over_other_cantor(self):
        """
        Test that Cantor blocks accumulating at a point of another label leave
        the fragment.
        """
        with pytest.raises(FragmentExceeded):
            normalize(Seq(Cantor(P), OR))

    def test_nesting_bound(self):
        """
        Test that seq nesting beyond the bound leaves the fragment.
        """
        normalize(nested_seq(6), max_seq_nesting=6)
        with pytest.raises(FragmentExceeded):
            normalize(nested_seq(7), max_seq_nesting=6)

    def test_not_closed(self):
        """
        Test that a non-closed expression is rejected.
        """
        with pytest.raises(ClosednessError):
            normalize(Seq(Pt(NONOR), P))

    def test_point_class_rank(self):
        """
        Test the rank of nested point classes.
        """
        isolated = PointClass(P)
        limit = PointClass(OR, (isolated,))
        assert isolated.rank == 0
        assert limit.rank == 1
        assert PointClass(OR, (limit, isolated)).rank == 2

    def test_genus_end_count_invariant(self):
        """
        Test that the genus end count survives normalization.
        """
        e = Union((Pt(OR), Seq(Pt(P), NONOR), Pt(P)))
        assert normalize(e).genus_end_count() == count_genus_ends(e) == 2

    def test_to_dict(self):
        """
        Test the json form of a canonical form.
        """
        data = normalize(Seq(Pt(P), OR)).to_dict()
        assert data["countable_part"] == [[0, "planar", "inf"], [1, "or", 1]]
        assert data["cantor_part"] == []

    def test_idempotent_on_seeded_sample(self):
        """
        Test that normalize is idempotent through form_to_expr on 10^4
        random fragment expressions.
        """
        rng = random.Random(20241)
        for _ in range(10_000):
            e = random_end_expr(rng)
            form = normalize(e)
            assert normalize(form_to_expr(form)) == form

    @settings(max_examples=200, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_idempotent_property(self, seed):
        """
        Test idempotence on hypothesis chosen seeds.
        """
        e = random_end_expr(random.Random(seed))
        form = normalize(e)
        assert normalize(form_to_expr(form)) == form


class TestEquivalent:
    def test_same_point(self):
        """
        Test that a genus end is homeomorphic to itself.
        """
        assert equivalent(Pt(OR), Pt(OR)) == Verdict.HOMEOMORPHIC

    def test_point_counts_differ(self):
        """
        Test that two points are not one point.
        """
        assert equivalent(Union((Pt(P), Pt(P))), Pt(P)) == Verdict.DISTINCT

    def test_point_absorbed_by_sequence(self):
        """
        Test that an isolated point next to a convergent sequence of its
        class is absorbed.
        """
        seq = Seq(Pt(P), P)
        assert equivalent(seq, Union((seq, Pt(P)))) == Verdict.HOMEOMORPHIC

    def test_labels_differ(self):
        """
        Test that the labels of the limit point matter.
        """
        assert equivalent(Seq(Pt(P), OR), Seq(Pt(P), NONOR)) == Verdict.DISTINCT

    def test_unknown_outside_fragment(self):
        """
        Test that expressions outside the fragment give unknown.
        """
        assert equivalent(Seq(Cantor(P), OR), Pt(OR)) == Verdict.UNKNOWN

    def test_reassociation_is_homeomorphic(self):
        """
        Test 10^3 random expressions against random re-associations.
        """
        rng = random.Random(7)
        for _ in range(1000):
            e = random_end_expr(rng)
            assert equivalent(e, reassociate(e, rng)) == Verdict.HOMEOMORPHIC

    def test_added_cantor_block_is_distinct(self):
        """
        Test 10^3 random expressions against a copy with one more Cantor
        label.
        """
        rng = random.Random(11)
        checked = 0
        while checked < 1000:
            e = random_end_expr(rng)
            missing = [l for l in EndLabel if l not in normalize(e).cantor_part]
            if not missing:
                continue
            other = Union((e, Cantor(rng.choice(missing))))
            assert equivalent(e, other) == Verdict.DISTINCT
            checked += 1

    @settings(max_examples=100, deadline=None)
    @given(st.integers(min_value=0, max_value=2**32))
    def test_symmetric(self, seed):
        """
        Test that the verdict does not depend on argument order.
        """
        rng = random.Random(seed)
        a, b = random_end_expr(rng), random_end_expr(rng)
        assert equivalent(a, b) == equivalent(b, a)


def limit_tower(labels):
    e = Pt(labels[0])
    for label in labels[1:]:
        e = Seq(e, label)
    return e


def class_expr(cls):
    if not cls.accumulating:
        return Pt(cls.label)
    return Seq(Union(tuple(class_expr(a) for a in cls.accumulating)), cls.label)


seeds = st.integers(min_value=0, max_value=2**32)
labels = st.sampled_from(list(EndLabel))
towers = st.lists(labels, min_size=2, max_size=4).map(sorted)


class TestCountablePerturbation:
    @settings(max_examples=200, deadline=None)
    @given(seeds, labels)
    def test_new_isolated_class_is_distinct(self, seed, label):
        """
        Test that an isolated end of a class the space lacks changes the type.
        """
        e = random_end_expr(random.Random(seed))
        assume(PointClass(label) not in normalize(e).classes)
        assert equivalent(e, Union((e, Pt(label)))) == Verdict.DISTINCT

    @settings(max_examples=200, deadline=None)
    @given(seeds, towers)
    def test_new_limit_class_is_distinct(self, seed, tower_labels):
        """
        Test that a limit point of a rank and class the space lacks changes
        the type.
        """
        e = random_end_expr(random.Random(seed))
        tower = limit_tower(tower_labels)
        top = max(normalize(tower).classes, key=lambda c: c.rank)
        assert top.rank == len(tower_labels) - 1
        assume(top not in normalize(e).classes)
        assert equivalent(e, Union((e, tower))) == Verdict.DISTINCT
        assert equivalent(Union((tower, e)), e) == Verdict.DISTINCT

    @settings(max_examples=200, deadline=None)
    @given(seeds, st.integers(min_value=0, max_value=16))
    def test_point_of_infinite_class_is_absorbed(self, seed, pick):
        """
        Test that one more end of a class that already occurs infinitely
        often leaves the type unchanged.
        """
        e = random_end_expr(random.Random(seed))
        form = normalize(e)
        infinite = [
            cls
            for cls, (_, _, count) in zip(form.classes, form.countable_part)
            if count == INFINITE
        ]
        assume(infinite)
        extra = class_expr(infinite[pick % len(infinite)])
        assert equivalent(e, Union((e, extra))) == Verdict.HOMEOMORPHIC

    @settings(max_examples=100, deadline=None)
    @given(seeds, labels)
    def test_second_cantor_block_is_absorbed(self, seed, label):
        """
        Test that a Cantor block of a label already present is absorbed.
        """
        e = Union((random_end_expr(random.Random(seed)), Cantor(label)))
        assert equivalent(e, Union((Cantor(label), e))) == Verdict.HOMEOMORPHIC
        assert equivalent(e, Union((e, Cantor(label)))) == Verdict.HOMEOMORPHIC

    def test_examples(self):
        """
        Test fixed perturbations of a convergent sequence.
        """
        seq = Seq(Pt(P), OR)
        assert equivalent(seq, Union((seq, Pt(OR)))) == Verdict.DISTINCT
        assert equivalent(seq, Union((seq, Pt(P)))) == Verdict.HOMEOMORPHIC
        assert equivalent(seq, Union((seq, Seq(Pt(P), OR)))) == Verdict.DISTINCT
        assert equivalent(seq, Union((seq, Seq(Pt(P), NONOR)))) == Verdict.DISTINCT


class TestSplitRegion:
    def test_point_does_not_split(self):
        """
        Test that a single point has no sub-regions.
        """
        assert split_region(Pt(OR)) is None

    def test_seq_splits_into_copy_and_rest(self):
        """
        Test that a seq splits into its first copy and itself.
        """
        e = Seq(Pt(P), OR)
        assert split_region(e) == [Pt(P), e]

    def test_cantor_halves(self):
        """
        Test that a Cantor block splits into two blocks.
        """
        assert split_region(Cantor(OR)) == [Cantor(OR), Cantor(OR)]
