import math
import random

import pytest

from complexity_lens.corpus import HighlightMask
from complexity_lens.metrics import (
    SentenceScore,
    correlate,
    edit_distance,
    macro_average,
    score_highlights,
    score_sentence,
    ter,
    unhighlighted_remainder,
)
from conftest import toks
from oracles import (
    edit_cost_enumerate,
    edit_cost_recursive,
    kendall_tau_b_oracle,
    pearson_oracle,
    prf_oracle,
    spearman_oracle,
)


def mask(*bits):
    return HighlightMask(bits=bits, kind="predicted")


class TestScoreHighlights:
    def test_mask_equals_reference(self):
        out = score_highlights(mask(0, 1, 0), toks("a b c"), toks("a c"))
        assert (out.precision, out.recall, out.f1) == (1.0, 1.0, 1.0)

    def test_over_highlighting_costs_precision(self):
        out = score_highlights(mask(1, 1, 0), toks("a b c"), toks("a c"))
        assert out.precision == 0.5
        assert out.recall == 1.0
        assert out.f1 == pytest.approx(2 / 3)

    def test_zero_mask_leaves_precision_undefined(self):
        out = score_highlights(mask(0, 0, 0), toks("a b c"), toks("a c"))
        assert out.precision is None
        assert out.recall == 0.0
        assert out.f1 is None

    def test_recall_undefined_when_nothing_absent(self):
        out = score_highlights(mask(1, 0), toks("a b"), toks("b a"))
        assert out.recall is None
        assert out.precision == 0.0
        assert out.f1 is None

    def test_f1_zero_when_p_plus_r_zero(self):
        out = score_highlights(mask(1, 0, 0), toks("a b c"), toks("a")).f1
        # highlighted token "a" occurs in the simple side: P = 0, R = 0.
        assert out == 0.0

    def test_occurrences_counted_not_types(self):
        out = score_highlights(mask(1, 1, 0), toks("x x a"), toks("a"))
        assert out.precision == 1.0
        assert out.recall == 1.0

    def test_case_insensitive_membership(self):
        out = score_highlights(mask(1, 0), toks("The end"), toks("the end"))
        assert out.precision == 0.0

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            score_highlights(mask(1), toks("a b"), toks("a"))

    def test_matches_set_comprehension_oracle(self):
        rng = random.Random(13)
        alphabet = list("abcdefg")
        for _ in range(300):
            n = rng.randint(1, 8)
            complex_norms = [rng.choice(alphabet) for _ in range(n)]
            simple_norms = [rng.choice(alphabet) for _ in range(rng.randint(1, 8))]
            bits = tuple(rng.randint(0, 1) for _ in range(n))
            got = score_highlights(
                HighlightMask(bits=bits, kind="predicted"),
                toks(" ".join(complex_norms)),
                toks(" ".join(simple_norms)),
            )
            assert (got.precision, got.recall, got.f1) == prf_oracle(
                bits, complex_norms, simple_norms
            )


class TestEditDistance:
    def test_identical_sequences(self):
        assert edit_distance(toks("a b c"), toks("a b c"), 1.5) == 0.0

    def test_cheap_substitution_wins(self):
        assert edit_distance(toks("the cat sat"), toks("the dog sat"), 1.5) == 1.5
        assert edit_cost_recursive(("the", "cat", "sat"), ("the", "dog", "sat"), 1.5) == 1.5

    def test_expensive_substitution_loses_to_indel(self):
        assert edit_distance(toks("cat"), toks("dog"), 3.0) == 2.0

    def test_empty_side(self):
        assert edit_distance(toks(""), toks("a b c d"), 1.0) == 4.0
        assert edit_distance(toks("a b"), toks(""), 1.0) == 2.0

    def test_plain_strings_accepted(self):
        assert edit_distance(["a", "b"], ["a", "c"], 1.0) == 1.0

    def test_invalid_sub_cost(self):
        with pytest.raises(ValueError):
            edit_distance(toks("a"), toks("b"), 0.0)

    def test_metric_properties_on_random_triples(self):
        rng = random.Random(21)
        alphabet = "xyz"
        for sub_cost in (1.0, 1.5, 2.0):
            for _ in range(60):
                seqs = [
                    [rng.choice(alphabet) for _ in range(rng.randint(0, 8))]
                    for _ in range(3)
                ]
                a, b, c = seqs
                assert edit_distance(a, b, sub_cost) == edit_distance(b, a, sub_cost)
                assert edit_distance(a, a, sub_cost) == 0.0
                if a != b:
                    assert edit_distance(a, b, sub_cost) > 0.0
                assert (
                    edit_distance(a, c, sub_cost)
                    <= edit_distance(a, b, sub_cost) + edit_distance(b, c, sub_cost) + 1e-12
                )

    def test_small_cases_match_full_enumeration(self):
        rng = random.Random(17)
        for _ in range(40):
            a = [rng.choice("pq") for _ in range(rng.randint(0, 3))]
            b = [rng.choice("pq") for _ in range(rng.randint(0, 3))]
            for sub_cost in (1.0, 1.5, 2.0):
                want = edit_cost_enumerate(a, b, sub_cost)
                assert edit_distance(a, b, sub_cost) == want
                assert edit_cost_recursive(a, b, sub_cost) == want


class TestRemainderAndTer:
    def test_remainder_all_ones(self):
        assert unhighlighted_remainder(toks("a b"), mask(1, 1)) == ()

    def test_remainder_all_zeros(self):
        sent = toks("a b")
        assert unhighlighted_remainder(sent, mask(0, 0)) == sent

    def test_remainder_keeps_order(self):
        out = unhighlighted_remainder(toks("a b c"), mask(1, 0, 1))
        assert tuple(t.surface for t in out) == ("b",)

    def test_remainder_length_mismatch(self):
        with pytest.raises(ValueError):
            unhighlighted_remainder(toks("a b"), mask(1,))

    def test_ter_zero_when_remainder_matches(self):
        assert ter(toks("a b"), toks("a b")) == 0.0

    def test_ter_one_when_remainder_empty(self):
        assert ter((), toks("a b c")) == 1.0

    def test_ter_partial(self):
        assert ter(toks("a x"), toks("a b c")) == pytest.approx(2 / 3)
        assert edit_cost_recursive(("a", "x"), ("a", "b", "c"), 1.0) == 2.0

    def test_ter_empty_reference(self):
        with pytest.raises(ValueError):
            ter(toks("a"), ())

    def test_ter_depends_only_on_remainder_norm_sequence(self):
        # Distinct masks with the same unhighlighted norm sequence tie.
        sent = toks("w w v w")
        reference = toks("v w")
        same_remainder = [mask(1, 0, 0, 0), mask(0, 1, 0, 0)]
        values = {
            ter(unhighlighted_remainder(sent, m), reference) for m in same_remainder
        }
        assert len(values) == 1

    def test_ter_grouped_by_remainder_sequence_property(self):
        rng = random.Random(31)
        sent = toks("p q p p q")
        reference = toks("q p")
        by_remainder = {}
        for _ in range(200):
            bits = tuple(rng.randint(0, 1) for _ in range(5))
            m = HighlightMask(bits=bits, kind="predicted")
            remainder = unhighlighted_remainder(sent, m)
            key = tuple(t.norm for t in remainder)
            value = ter(remainder, reference)
            by_remainder.setdefault(key, set()).add(value)
        assert all(len(values) == 1 for values in by_remainder.values())


class TestMacroAverage:
    def single(self, **kwargs):
        defaults = dict(
            precision=0.5, recall=0.5, f1=0.5, edit_distances={1.0: 2.0}, ter=0.4
        )
        defaults.update(kwargs)
        return SentenceScore(**defaults)

    def test_single_sentence_equals_its_scores(self):
        agg = macro_average([self.single()])
        assert agg.means["P"] == 0.5
        assert agg.means["ED_1"] == 2.0
        assert agg.means["TER"] == 0.4
        assert agg.n == 1

    def test_mean_of_two(self):
        agg = macro_average([self.single(precision=0.4), self.single(precision=0.6)])
        assert agg.means["P"] == pytest.approx(0.5)

    def test_undefined_excluded_and_counted(self):
        agg = macro_average([self.single(precision=None), self.single(precision=1.0)])
        assert agg.means["P"] == 1.0
        assert agg.undefined["P"] == 1

    def test_zero_policy_coerces(self):
        agg = macro_average(
            [self.single(precision=None), self.single(precision=1.0)],
            undefined_policy="zero",
        )
        assert agg.means["P"] == 0.5
        assert agg.undefined["P"] == 1

    def test_metric_absent_when_never_defined(self):
        agg = macro_average([self.single(precision=None, f1=None)])
        assert "P" not in agg.means
        assert agg.undefined["P"] == 1

    def test_unknown_policy(self):
        with pytest.raises(ValueError):
            macro_average([self.single()], undefined_policy="nan")

    def test_ed_keys_follow_sub_costs(self):
        score = score_sentence(
            mask(0, 1), toks("a b"), toks("a"), sub_costs=(1.0, 1.5, 2.0)
        )
        assert set(score.edit_distances) == {1.0, 1.5, 2.0}
        agg = macro_average([score])
        assert {"ED_1", "ED_1.5", "ED_2"} <= set(agg.means)


class TestCorrelate:
    def test_perfect_agreement(self):
        x = [1.0, 2.0, 3.0, 4.0]
        for method in ("pearson", "spearman", "kendall_tau_b"):
            assert correlate(x, x, method) == pytest.approx(1.0)

    def test_perfect_disagreement(self):
        x = [1.0, 2.0, 3.0, 4.0]
        y = x[::-1]
        for method in ("pearson", "spearman", "kendall_tau_b"):
            assert correlate(x, y, method) == pytest.approx(-1.0)

    def test_tau_b_with_ties_matches_oracle(self):
        x = [1.0, 2.0, 2.0, 3.0]
        y = [1.0, 3.0, 2.0, 4.0]
        expected = 5 / math.sqrt(30)
        assert correlate(x, y, "kendall_tau_b") == pytest.approx(expected, abs=1e-12)
        assert kendall_tau_b_oracle(x, y) == pytest.approx(expected, abs=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(ValueError, match="zero-variance"):
            correlate([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_short_input_rejected(self):
        with pytest.raises(ValueError):
            correlate([1.0], [2.0])

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            correlate([1.0, 2.0], [2.0, 1.0], "tau_c")

    def test_rank_methods_invariant_under_monotone_transform(self):
        rng = random.Random(23)
        for _ in range(20):
            x = [rng.uniform(-3, 3) for _ in range(12)]
            y = [rng.uniform(-3, 3) for _ in range(12)]
            warped = [math.exp(v) for v in x]
            for method in ("spearman", "kendall_tau_b"):
                assert correlate(x, y, method) == pytest.approx(
                    correlate(warped, y, method), abs=1e-12
                )

    def test_coefficients_bounded_and_match_oracles(self):
        rng = random.Random(29)
        for _ in range(40):
            n = rng.randint(2, 20)
            x = [rng.choice([0.0, 0.5, 1.0, 2.0]) + rng.random() for _ in range(n)]
            y = [rng.choice([0.0, 1.0]) + rng.random() for _ in range(n)]
            for method, oracle in (
                ("pearson", pearson_oracle),
                ("spearman", spearman_oracle),
                ("kendall_tau_b", kendall_tau_b_oracle),
            ):
                got = correlate(x, y, method)
                assert -1.0 - 1e-12 <= got <= 1.0 + 1e-12
                assert got == pytest.approx(oracle(x, y), abs=1e-12)
