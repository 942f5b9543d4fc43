"""Haar moments, joint cumulants, genus coefficients, recursions, reductions."""

from fractions import Fraction

import pytest

from haarmaps import (
    AlternationError,
    Permutation,
    TraceExpression,
    all_permutations,
    canonical_word_tuples,
    genus_zero_functional,
    monotone_hurwitz_by_genus,
    parse_word,
    trace_of_permutation,
)
from haarmaps.expansion import (
    EnumerationBudgetError,
    Potential,
    alternated_parts,
    bound_constants,
    bounds_check,
    clear_caches,
    cumulant_haar,
    formal_cumulant,
    formal_radius,
    genus_coefficient,
    genus_partial_sum,
    genus_value,
    gradient_trick_check,
    hurwitz_reduction,
    master_operator_check,
    moment_haar,
    operator_norm_bound_check,
    set_partitions,
    tutte_check,
)

w = parse_word


class TestMoments:
    def test_conjugation_pair_factorizes(self):
        got = moment_haar((w("a1 u1 a2 u1^-1"),), 5)
        assert got.format() == "5 * tr(a1) tr(a2)"

    def test_unitary_letters_cancel_inside_the_trace(self):
        assert moment_haar((w("u1 u1^-1"),), 3).format() == "3"

    def test_unbalanced_word_vanishes(self):
        assert moment_haar((w("a1 u1"),), 5).is_zero()
        assert moment_haar((w("u1 u1 u1^-1"),), 5).is_zero()

    def test_per_color_balance_is_required(self):
        assert moment_haar((w("u1"), w("u2^-1")), 4).is_zero()

    def test_deterministic_words_factor_out(self):
        got = moment_haar((w("a1"), w("u1"), w("u1^-1")), 6)
        random_part = moment_haar((w("u1"), w("u1^-1")), 6)
        assert got == random_part * TraceExpression.single([w("a1")], Fraction(6))
        assert got.format() == "6 * tr(a1)"

    def test_budget_guard(self):
        word = w(
            "a1 u1 a2 u1 a3 u1 a4 u1^-1 a5 u1^-1 a6 u1^-1"
        )
        with pytest.raises(EnumerationBudgetError):
            moment_haar((word,), 7, max_work=2)


class TestCumulants:
    def test_pair_of_bare_traces(self):
        assert cumulant_haar((w("u1"), w("u1^-1")), 9).format() == "1"

    def test_matches_moment_mobius_for_two_blocks(self):
        P1, P2 = w("a1 u1 a2 u1^-1"), w("a3 u1 a4 u1^-1")
        m12 = moment_haar((P1, P2), 4)
        m1 = moment_haar((P1,), 4)
        m2 = moment_haar((P2,), 4)
        c2 = cumulant_haar((P1, P2), 4)
        assert c2 == m12 + (m1 * m2).scale(Fraction(-1))

    def test_two_block_gold_value(self):
        c2 = cumulant_haar((w("a1 u1 a2 u1^-1"), w("a3 u1 a4 u1^-1")), 4)
        assert c2.format() == (
            "16/15 * tr(a1 a3) tr(a2 a4)"
            " + -16/15 * tr(a1) tr(a3) tr(a2 a4)"
            " + -16/15 * tr(a2) tr(a4) tr(a1 a3)"
            " + 16/15 * tr(a1) tr(a2) tr(a3) tr(a4)"
        )

    def test_matches_moment_mobius_for_three_blocks(self):
        words = (w("u1"), w("u1"), w("u1^-1 u1^-1"))
        expected = TraceExpression.zero()
        for partition in set_partitions(list(range(3))):
            sign = Fraction((-1) ** (len(partition) - 1))
            weight = sign * Fraction(
                1, 1
            ) * __import__("math").factorial(len(partition) - 1)
            product = TraceExpression.constant(Fraction(1))
            for block in partition:
                product = product * cumulant_haar(
                    tuple(words[i] for i in block), 5
                )
            expected = expected + product
        assert expected == moment_haar(words, 5)

    def test_set_partition_count(self):
        assert sum(1 for _ in set_partitions([1, 2, 3])) == 5
        assert sum(1 for _ in set_partitions([1, 2, 3, 4])) == 15


class TestGenusCoefficients:
    def test_planar_conjugation_pair(self):
        assert genus_value(0, (w("a1 u1 a2 u1^-1"),)).format() == "1 * tr(a1) tr(a2)"
        assert genus_value(1, (w("a1 u1 a2 u1^-1"),)).is_zero()

    def test_bare_trace_pair(self):
        assert genus_value(0, (w("u1"), w("u1^-1"))).format() == "1"
        assert genus_value(1, (w("u1"), w("u1^-1"))).is_zero()

    def test_third_power_pair(self):
        assert genus_value(0, (w("u1 u1 u1"), w("u1^-1 u1^-1 u1^-1"))).format() == "3"
        assert genus_value(1, (w("u1 u1 u1"), w("u1^-1 u1^-1 u1^-1"))).is_zero()

    def test_negative_genus_and_empty_tuple_vanish(self):
        assert genus_value(-1, (w("a1 u1 a2 u1^-1"),)).is_zero()
        assert genus_value(0, ()).is_zero()

    def test_degree_zero_word_conventions(self):
        assert genus_value(0, (w("a1 a2"),)).format() == "1 * tr(a1 a2)"
        assert genus_value(1, (w("a1 a2"),)).is_zero()
        assert genus_value(0, (w("a1"), w("u1"))).is_zero()

    def test_first_genus_correction_of_a_degree_four_word(self):
        got = genus_value(1, (w("a1 u1 a2 u1 a3 u1^-1 a4 u1^-1"),))
        assert got.format() == (
            "1 * tr(a1 a4 a3 a2)"
            " + -1 * tr(a1) tr(a2 a4 a3)"
            " + -1 * tr(a3) tr(a1 a4 a2)"
            " + 1 * tr(a1) tr(a3) tr(a2 a4)"
        )

    def test_wrapper_carries_genus_and_length(self):
        gc = genus_coefficient(0, (w("a1 u1 a2 u1^-1"),))
        assert (gc.g, gc.l) == (0, 1)
        assert gc.value.format() == "1 * tr(a1) tr(a2)"

    def test_color_unbalanced_tuple_vanishes(self):
        assert genus_value(0, (w("u1"), w("u2^-1"))).is_zero()

    def test_repeated_calls_are_stable(self):
        word = w("a1 u1 a2 u1 a3 u1^-1 a4 u1^-1")
        first = genus_value(1, (word,))
        clear_caches()
        assert genus_value(1, (word,)) == first


class TestTopologicalExpansion:
    def test_partial_sum_is_exact_for_terminating_series(self):
        word = w("a1 u1 a2 u1^-1")
        for N in (3, 5, 8):
            exact = cumulant_haar((word,), N).scale(Fraction(1, N))
            for G in (0, 1, 2):
                assert genus_partial_sum((word,), N, G) == exact

    def test_partial_sum_for_bare_pair(self):
        pair = (w("u1 u1 u1"), w("u1^-1 u1^-1 u1^-1"))
        for N in (4, 7):
            assert genus_partial_sum(pair, N, 0) == cumulant_haar(pair, N)

    def test_truncation_misses_only_higher_order_terms(self):
        word = w("a1 u1 a2 u1 a3 u1^-1 a4 u1^-1")
        N = 5
        exact = cumulant_haar((word,), N).scale(Fraction(1, N))
        partial = genus_partial_sum((word,), N, 1)
        difference = exact + partial.scale(Fraction(-1))
        # every residual coefficient is O(N^-4) in exact arithmetic
        for _, coeff in difference.items():
            assert coeff.norm_upper() <= Fraction(16, N**4)


class TestTutteRecursion:
    def test_theorem_form_on_a_conjugation_pair(self):
        res = tutte_check(0, (w("a1 u1^-1 a2 u1"),), form="theorem")
        assert res.equal
        assert res.lhs.format() == "1 * tr(a1) tr(a2)"
        assert res.form == "theorem"

    def test_corollary_form_nonzero_instance(self):
        res = tutte_check(0, (w("u1^-1"), w("u1")), form="corollary")
        assert res.equal
        assert res.lhs.format() == "1"

    def test_both_forms_across_a_small_grid(self):
        for g in (0, 1):
            for words in canonical_word_tuples(3, 2):
                for form in ("theorem", "corollary"):
                    assert tutte_check(g, words, form=form).equal

    def test_two_color_instances(self):
        for words in canonical_word_tuples(3, 2, n_colors=2, require_all_colors=True):
            split_color = words[-1].letters[-1].index
            for form in ("theorem", "corollary"):
                assert tutte_check(0, words, color=split_color, form=form).equal

    def test_last_word_must_end_with_an_uninverted_letter(self):
        with pytest.raises(ValueError):
            tutte_check(0, (w("a1 u1 a2 u1^-1"),), form="theorem")

    def test_potential_series_form(self):
        res = tutte_check(
            0,
            (w("a1 u1^-1 a2 u1"),),
            potential=Potential((w("a3 u1 a4 u1^-1"),)),
            z_cap=1,
        )
        assert res.equal

    def test_potential_series_richer_instance(self):
        res = tutte_check(
            1,
            (w("a1 u1^-1 a2 u1"),),
            potential=Potential((w("a7 u1 a8 u1^-1"),)),
            z_cap=2,
        )
        assert res.equal


class TestFormalCumulant:
    def test_zeroth_coefficient_is_the_plain_value(self):
        fc = formal_cumulant(
            0, 1, (w("a1 u1^-1 a2 u1"),), Potential((w("a7 u1 a8 u1^-1"),)), 1
        )
        assert fc.coefficient((0,)).format() == "1 * tr(a1) tr(a2)"

    def test_first_coefficient_inserts_one_potential_copy(self):
        fc = formal_cumulant(
            0, 1, (w("a1 u1^-1 a2 u1"),), Potential((w("a7 u1 a8 u1^-1"),)), 1
        )
        assert fc.coefficient((1,)).format() == (
            "1 * tr(a1 a8) tr(a2 a7)"
            " + -1 * tr(a1) tr(a8) tr(a2 a7)"
            " + -1 * tr(a2) tr(a7) tr(a1 a8)"
            " + 1 * tr(a1) tr(a2) tr(a7) tr(a8)"
        )


def inline_hurwitz_style(g, word, invert_second):
    """Independent re-derivation of the alternated-word reduction, with a
    switch for the orientation convention of the second trace factor."""
    B, C, _color = alternated_parts(word)
    m = len(B)
    labels = tuple(range(1, m + 1))
    gamma = Permutation.from_cycles([labels], labels)
    total = TraceExpression.zero()
    for rho in all_permutations(labels):
        for sigma in all_permutations(labels):
            pairing = sigma.inverse() if invert_second else sigma
            count = monotone_hurwitz_by_genus(rho.inverse(), gamma, pairing, g)
            if count == 0:
                continue
            sign = Fraction((-1) ** (rho.cycle_count() + sigma.cycle_count()))
            total = total + (
                trace_of_permutation(rho, B) * trace_of_permutation(sigma, C)
            ).scale(sign * count)
    return total.scale(Fraction((-1) ** (m + 1)))


class TestHurwitzReduction:
    ALTERNATED = [
        "a1 u1 a2 u1^-1",
        "a1 u1 a3 u1^-1 a2 u1 a4 u1^-1",
        "a1 u1 a4 u1^-1 a2 u1 a5 u1^-1 a3 u1 a6 u1^-1",
    ]

    @pytest.mark.parametrize("text", ALTERNATED)
    @pytest.mark.parametrize("g", [0, 1])
    def test_matches_direct_genus_coefficient(self, text, g):
        word = w(text)
        assert hurwitz_reduction(g, (word,)) == genus_value(g, (word,))

    @pytest.mark.parametrize("g", [0, 1])
    def test_two_argument_reduction(self, g):
        words = (w("a1 u1 a2 u1^-1"), w("a3 u1 a4 u1^-1"))
        assert hurwitz_reduction(g, words) == genus_value(g, words)

    def test_non_alternated_word_is_refused(self):
        with pytest.raises(AlternationError):
            hurwitz_reduction(0, (w("u1 u1 u1^-1 u1^-1"),))

    @pytest.mark.parametrize("g", [0, 1])
    def test_orientation_convention_is_forced(self, g):
        """The second trace factor must pair through the inverse permutation:
        the same sum with the plain permutation disagrees already at three
        alternation blocks."""
        word = w("a1 u1 a4 u1^-1 a2 u1 a5 u1^-1 a3 u1 a6 u1^-1")
        direct = genus_value(g, (word,))
        assert inline_hurwitz_style(g, word, True) == direct
        assert inline_hurwitz_style(g, word, False) != direct


class TestBounds:
    def test_planar_conjugation_pair_bound(self):
        lhs, rhs, holds = bounds_check(0, 1, (), (w("a1 u1 a2 u1^-1"),), ())
        assert lhs == 1
        assert holds
        assert rhs > 1

    def test_with_one_potential_insertion(self):
        lhs, rhs, holds = bounds_check(
            0, 1, (1,), (w("a1 u1 a2 u1^-1"),), (w("a3 u1 a4 u1^-1"),)
        )
        assert lhs == 4
        assert holds

    def test_constant_brackets_are_ordered(self):
        consts = bound_constants(2, 3)
        for lo, hi in consts.values():
            assert 0 <= lo <= hi

    def test_formal_radius_is_a_small_positive_rational(self):
        r = formal_radius(1, 2)
        assert isinstance(r, Fraction)
        assert 0 < r < 1

    def test_multi_index_length_must_match(self):
        with pytest.raises(ValueError):
            bounds_check(0, 1, (1, 2), (w("a1 u1 a2 u1^-1"),), (w("u1 u1^-1"),))


class TestMasterOperator:
    def test_bare_pair(self):
        res = master_operator_check(w("u1"), w("u1^-1"))
        assert res.equal
        assert res.lhs.format() == "1"

    @pytest.mark.parametrize(
        "p1,p2",
        [
            ("u1", "u1"),
            ("a1 u1", "a2 u1"),
            ("u1 u1", "u1^-1"),
            ("a1 u1 a2 u1^-1", "a3 u1"),
        ],
    )
    def test_various_pairs_balance(self, p1, p2):
        assert master_operator_check(w(p1), w(p2)).equal

    def test_degree_zero_second_word_is_refused(self):
        with pytest.raises(ValueError):
            master_operator_check(w("u1"), w("a1"))


class TestGradientTrick:
    @pytest.mark.parametrize(
        "text",
        [
            "u1",
            "u1^-1",
            "u1 a1",
            "a1 u1 a2 u1^-1",
            "u1 u1",
            "u1 a1 u1^-1",
            "u1 u1^-1 u1",
        ],
    )
    def test_identity_holds(self, text):
        assert gradient_trick_check(w(text), 1)

    def test_foreign_color_is_trivial(self):
        assert gradient_trick_check(w("u2 a1"), 1)


class TestOperatorNormBound:
    def test_bound_holds_on_small_words(self):
        samples = [w("u1"), w("a1 u1"), w("u1 u1"), w("a1 u1 a2 u1^-1")]
        assert operator_norm_bound_check(
            genus_zero_functional, 2, 4, samples, tau_norm=1
        )

    def test_rejects_bad_radii(self):
        with pytest.raises(ValueError):
            operator_norm_bound_check(genus_zero_functional, 4, 2, [w("u1")])


class TestCanonicalGrid:
    def test_tiny_grid_size(self):
        assert len(canonical_word_tuples(2, 1)) == 3

    def test_last_letter_is_an_uninverted_unitary(self):
        for words in canonical_word_tuples(3, 2):
            last = words[-1].letters[-1]
            assert last.kind == "u"

    def test_deterministic_letters_are_distinct(self):
        for words in canonical_word_tuples(3, 2):
            seen = [
                letter.index
                for word in words
                for letter in word.letters
                if letter.kind == "a"
            ]
            assert len(seen) == len(set(seen))

    def test_two_color_grid_uses_both_colors(self):
        tuples = canonical_word_tuples(3, 2, n_colors=2, require_all_colors=True)
        for words in tuples:
            colors = {
                letter.index
                for word in words
                for letter in word.letters
                if letter.kind in ("u", "u^-1")
            }
            assert colors == {1, 2}
