"""Words, polynomials, tensors, trace expressions, and their exact evaluation."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from haarmaps import (
    DeterministicWordError,
    GaussianRational,
    Letter,
    NCPolynomial,
    NCWord,
    Permutation,
    TensorPolynomial,
    TraceExpression,
    cyclic_derivative,
    decompose,
    evaluate_trace_expression,
    format_word,
    gamma_of_tuple,
    nc_derivative,
    parse_word,
    reduced_laplacian,
    trace_of_permutation,
    xi_norm,
)
from haarmaps.ncpoly import EMPTY_WORD, evaluate_trace_expression_exact


def word_texts():
    """Strategy producing parseable word strings."""
    letter = st.one_of(
        st.integers(1, 3).map(lambda i: f"a{i}"),
        st.integers(1, 3).map(lambda i: f"a{i}*"),
        st.integers(1, 2).map(lambda i: f"u{i}"),
        st.integers(1, 2).map(lambda i: f"u{i}^-1"),
    )
    return st.lists(letter, min_size=1, max_size=6).map(" ".join)


class TestLetter:
    def test_kinds_and_index(self):
        u = Letter("u", 2)
        assert u.kind == "u" and u.index == 2
        assert Letter("u^-1", 2) != u
        assert Letter("a", 1) == Letter("a", 1)

    def test_invalid_kind_rejected(self):
        with pytest.raises(ValueError):
            Letter("x", 1)


class TestWordParsing:
    @settings(deadline=None, max_examples=80)
    @given(word_texts())
    def test_parse_format_round_trip(self, text):
        word = parse_word(text)
        assert format_word(word) == text
        assert parse_word(format_word(word)) == word

    def test_empty_word_formats_as_one(self):
        assert format_word(EMPTY_WORD) == "1"
        assert parse_word("1") == EMPTY_WORD

    def test_bad_tokens_rejected(self):
        for bad in ("b1", "u0", "a", "u1^2", "a1^-1"):
            with pytest.raises(ValueError):
                parse_word(bad)


class TestWordAlgebra:
    def test_reduce_cancels_adjacent_inverses(self):
        assert format_word(parse_word("a1 u1 u1^-1 a2").reduce()) == "a1 a2"
        assert format_word(parse_word("u1^-1 u1").reduce()) == "1"

    def test_cyclic_reduce_cancels_across_the_seam(self):
        assert format_word(parse_word("u1^-1 a1 u1").cyclic_reduce()) == "a1"

    def test_rotations_and_min_rotation(self):
        word = parse_word("u1 a1")
        assert [format_word(r) for r in word.rotations()] == ["u1 a1", "a1 u1"]
        assert format_word(word.min_rotation()) == "a1 u1"

    def test_min_rotation_is_rotation_invariant(self):
        word = parse_word("a1 u1 a2 u1^-1")
        for rot in word.rotations():
            assert rot.min_rotation() == word.min_rotation()

    def test_adjoint_reverses_and_stars(self):
        assert (
            format_word(parse_word("a1 u1 a2 u1^-1").adjoint())
            == "u1 a2* u1^-1 a1*"
        )

    @settings(deadline=None, max_examples=80)
    @given(word_texts())
    def test_adjoint_is_an_involution(self, text):
        word = parse_word(text)
        assert word.adjoint().adjoint() == word

    def test_degree_counts_unitary_letters(self):
        assert parse_word("a1 u1 a2 u1^-1").degree() == 2
        assert parse_word("a1 a2").degree() == 0

    def test_degree_signed_by_color(self):
        word = parse_word("u1 u1 u1^-1 u2")
        assert word.degree_signed(1, +1) == 2
        assert word.degree_signed(1, -1) == 1
        assert word.degree_signed(2, +1) == 1

    def test_unitary_colors(self):
        assert parse_word("u1 u2 a1").unitary_colors() == (1, 2)

    def test_substitute_replaces_deterministic_letters(self):
        word = parse_word("a1 u1 a2 u1^-1")
        image = word.substitute({1: parse_word("u2 a3")})
        assert format_word(image) == "u2 a3 u1 a2 u1^-1"
        assert image.degree() == 3
        assert image.unitary_colors() == (1, 2)


class TestDecomposition:
    def test_single_color_pair(self):
        dec = decompose(parse_word("a1 u1 a2 u1^-1"))
        assert dec.d == 2
        assert [format_word(m) for m in dec.M] == ["a1", "a2"]
        assert dec.eps.to_string() == "+-"
        assert dec.colors == (1, 1)
        assert dec.reassemble() == parse_word("a1 u1 a2 u1^-1")

    def test_rotation_recorded(self):
        dec = decompose(parse_word("u1 a1"))
        assert dec.rotation == 1
        assert format_word(dec.rotated) == "a1 u1"
        assert dec.reassemble() == dec.rotated

    def test_degree_zero_word_is_refused(self):
        with pytest.raises(DeterministicWordError):
            decompose(parse_word("a1 a2"))

    @settings(deadline=None, max_examples=60)
    @given(word_texts())
    def test_reassemble_recovers_the_word_up_to_rotation(self, text):
        word = parse_word(text)
        if word.degree() == 0:
            with pytest.raises(DeterministicWordError):
                decompose(word)
        else:
            dec = decompose(word)
            assert dec.reassemble() == dec.rotated
            assert dec.rotated in word.rotations()
            assert tuple(dec.rotated.letters) == tuple(
                word.letters[dec.rotation :] + word.letters[: dec.rotation]
            )

    def test_gamma_of_tuple_has_one_cycle_per_word(self):
        words = (parse_word("a1 u1 a2 u1^-1"), parse_word("u1 a3 u1"))
        gamma = gamma_of_tuple(words)
        assert gamma.to_cycle_string() == "(1 2)(3 4)"


class TestDerivatives:
    @staticmethod
    def tensor_as_set(tp):
        return {
            (format_word(a), format_word(b), str(c.re))
            for (a, b), c in tp.terms.items()
        }

    def test_derivative_of_two_positive_letters(self):
        tp = nc_derivative(parse_word("u1 a1 u1"), 1)
        assert self.tensor_as_set(tp) == {
            ("u1", "a1 u1", "1"),
            ("u1 a1 u1", "1", "1"),
        }

    def test_derivative_of_an_inverse_letter_is_negative(self):
        tp = nc_derivative(parse_word("u1^-1"), 1)
        assert self.tensor_as_set(tp) == {("1", "u1^-1", "-1")}

    def test_derivative_ignores_other_colors(self):
        assert nc_derivative(parse_word("u2 a1"), 1).is_zero()

    def test_cyclic_derivative_single_letter(self):
        assert cyclic_derivative(parse_word("u1 a1"), 1).format() == "1 * a1 u1"

    def test_cyclic_derivative_mixed_signs(self):
        got = cyclic_derivative(parse_word("u1 a1 u1^-1 a2"), 1).format()
        assert got == "1 * a1 u1^-1 a2 u1 + -1 * u1^-1 a2 u1 a1"

    def test_reduced_laplacian_pairs_distinct_occurrences(self):
        tp = reduced_laplacian(parse_word("u1 a1 u1"), 1)
        assert self.tensor_as_set(tp) == {
            ("a1 u1", "u1", "1"),
            ("u1", "a1 u1", "1"),
        }

    def test_reduced_laplacian_of_single_letter_vanishes(self):
        assert reduced_laplacian(parse_word("u1"), 1).is_zero()


class TestTensorPolynomial:
    def test_from_pair_and_scale(self):
        tp = TensorPolynomial.from_pair(parse_word("a1"), parse_word("u1"))
        tp2 = tp.scale(Fraction(3))
        ((pair, coeff),) = list(tp2.terms.items())
        assert format_word(pair[0]) == "a1" and format_word(pair[1]) == "u1"
        assert coeff.re == 3

    def test_addition_merges_terms(self):
        tp = TensorPolynomial.from_pair(parse_word("a1"), parse_word("u1"))
        assert (tp + tp.scale(Fraction(-1))).is_zero()


class TestGaussianRational:
    def test_arithmetic(self):
        g = GaussianRational(Fraction(1, 2), Fraction(-1, 3))
        assert g + g == GaussianRational(Fraction(1), Fraction(-2, 3))
        assert g * g == GaussianRational(Fraction(5, 36), Fraction(-1, 3))
        assert (-g).re == Fraction(-1, 2)
        assert g.conjugate().im == Fraction(1, 3)

    def test_norm_upper_is_rectangular_bound(self):
        g = GaussianRational(Fraction(1, 2), Fraction(-1, 3))
        assert g.norm_upper() == Fraction(5, 6)

    def test_coerce(self):
        assert GaussianRational.coerce(Fraction(2)) == GaussianRational(
            Fraction(2), Fraction(0)
        )
        assert GaussianRational.coerce(3).re == 3

    def test_json_round_trip(self):
        g = GaussianRational(Fraction(1, 2), Fraction(-1, 3))
        assert GaussianRational.from_json(g.to_json()) == g


class TestTraceExpression:
    def test_format_sorts_deterministically(self):
        te = TraceExpression.single(
            [parse_word("a1"), parse_word("a2")], Fraction(2)
        )
        assert te.format() == "2 * tr(a1) tr(a2)"

    def test_zero_formats_as_zero(self):
        assert TraceExpression.zero().format() == "0"

    def test_addition_and_scaling(self):
        te = TraceExpression.single([parse_word("a1")], Fraction(1))
        both = te + te.scale(Fraction(2))
        assert both.format() == "3 * tr(a1)"

    def test_constant_part(self):
        te = TraceExpression.constant(Fraction(5)) + TraceExpression.single(
            [parse_word("a1")], Fraction(1)
        )
        assert te.constant_part() == GaussianRational(Fraction(5), Fraction(0))

    def test_conjugate_stars_letters_and_conjugates_coefficients(self):
        te = TraceExpression.single(
            [parse_word("a1"), parse_word("a2")],
            GaussianRational(Fraction(0), Fraction(2)),
        )
        assert te.conjugate().format() == "0-2i * tr(a1*) tr(a2*)"

    def test_conjugate_is_an_involution(self):
        te = TraceExpression.single(
            [parse_word("a1 u1")], GaussianRational(Fraction(1, 2), Fraction(3))
        )
        assert te.conjugate().conjugate() == te

    def test_norm_upper_bound_sums_coefficient_surrogates(self):
        te = TraceExpression.single(
            [parse_word("a1")], GaussianRational(Fraction(1, 2), Fraction(1, 3))
        ) + TraceExpression.constant(Fraction(-1))
        assert te.norm_upper_bound() == Fraction(5, 6) + 1

    def test_json_round_trip_preserves_value_and_adds_render(self):
        te = TraceExpression.single(
            [parse_word("a1"), parse_word("a2 a3")], Fraction(-3, 7)
        )
        data = te.to_json()
        assert data["render"] == te.format()
        assert TraceExpression.from_json(data) == te

    def test_trace_of_permutation_groups_words_by_cycles(self):
        words = (parse_word("a1"), parse_word("a2"), parse_word("a3"))
        sigma = Permutation.from_cycle_string("(1 2)", domain=(1, 2, 3))
        te = trace_of_permutation(sigma, words)
        assert te.format() == "1 * tr(a3) tr(a1 a2)"


class TestNumericEvaluation:
    def setup_method(self):
        self.A = {
            1: np.array([[0.5, 0.25], [0.0, 0.5]], dtype=complex),
            2: np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
        }

    def test_product_of_normalized_traces(self):
        te = TraceExpression.single(
            [parse_word("a1"), parse_word("a2 a2")], Fraction(2)
        )
        value = evaluate_trace_expression(te, self.A, 2)
        assert value == pytest.approx(2 * 0.5 * 1.0)

    def test_star_letters_use_conjugate_transpose(self):
        matrix = np.array([[1j, 0.0], [0.0, 0.0]], dtype=complex)
        te = TraceExpression.single([parse_word("a1*")], Fraction(1))
        value = evaluate_trace_expression(te, {1: matrix}, 2)
        assert value == pytest.approx(-0.5j)

    def test_exact_evaluation_matches_float(self):
        A = {
            1: [[Fraction(1, 2), Fraction(1, 4)], [Fraction(0), Fraction(1, 2)]],
        }
        te = TraceExpression.single(
            [parse_word("a1 a1")], Fraction(3)
        ) + TraceExpression.constant(Fraction(1, 7))
        exact = evaluate_trace_expression_exact(te, A, 2)
        assert exact.im == 0
        floats = {1: np.array(A[1], dtype=float).astype(complex)}
        assert float(exact.re) == pytest.approx(
            evaluate_trace_expression(te, floats, 2).real
        )


class TestXiNorm:
    def test_word_norm_is_geometric_in_unitary_degree(self):
        assert xi_norm(parse_word("a1 u1 a2 u1^-1"), 2) == 4
        assert xi_norm(parse_word("a1"), 2) == 1

    def test_polynomial_norm_uses_coefficient_surrogate(self):
        p = NCPolynomial.from_word(parse_word("u1")).scale(
            GaussianRational(Fraction(3), Fraction(-4))
        ) + NCPolynomial.from_word(parse_word("u1 u1"))
        assert xi_norm(p, 2) == 7 * 2 + 4


class TestNCPolynomial:
    def test_multiplication_is_concatenation(self):
        p = NCPolynomial.from_word(parse_word("u1")) * NCPolynomial.from_word(
            parse_word("a1")
        )
        assert p.format() == "1 * u1 a1"

    def test_reduce_cancels(self):
        p = NCPolynomial.from_word(parse_word("u1 u1^-1 a1")).reduce()
        assert p.format() == "1 * a1"

    def test_adjoint_distributes(self):
        p = NCPolynomial.from_word(parse_word("a1 u1")) + NCPolynomial.from_word(
            parse_word("a2")
        )
        assert p.adjoint().format() == "1 * a2* + 1 * u1^-1 a1*"

    def test_json_round_trip(self):
        p = NCPolynomial.from_word(parse_word("a1 u1")).scale(Fraction(2, 3))
        assert NCPolynomial.from_json(p.to_json()) == p
