import pytest
from hypothesis import given
from hypothesis import strategies as st

from cfdistill.metrics import (
    CounterfactualPair,
    FlipAnnotation,
    counterfactual_accuracy,
    flip_rate,
    mean_sensitivity,
    sensitivity,
    soft_flip_rate,
)
from cfdistill.types import Label, NliExample

from helpers import dist

E, N, C = Label.ENTAILMENT, Label.NEUTRAL, Label.CONTRADICTION


def ann(orig, target, annotated):
    return FlipAnnotation(original_label=orig, target_label=target, annotated_label=annotated)


class TestFlipRates:
    def test_all_match_target(self):
        annotations = [ann(E, C, C)] * 4
        assert flip_rate(annotations) == 1.0

    def test_hand_counted_three_of_four(self):
        annotations = [ann(E, C, C), ann(E, C, C), ann(E, C, C), ann(E, C, N)]
        assert flip_rate(annotations) == 0.75

    def test_none_match(self):
        assert flip_rate([ann(E, C, E)] * 3) == 0.0

    def test_soft_all_equal_original(self):
        assert soft_flip_rate([ann(E, C, E)] * 3) == 0.0

    def test_soft_hand_counted(self):
        annotations = [ann(E, C, C), ann(E, C, C), ann(E, C, E), ann(E, C, N)]
        assert soft_flip_rate(annotations) == 0.75

    def test_empty_is_error(self):
        with pytest.raises(ValueError):
            flip_rate([])
        with pytest.raises(ValueError):
            soft_flip_rate([])

    def test_original_equal_target_rejected(self):
        with pytest.raises(ValueError):
            ann(E, E, C)

    @given(
        st.lists(
            st.tuples(st.sampled_from(list(Label)), st.sampled_from(list(Label)), st.sampled_from(list(Label))).filter(
                lambda t: t[0] != t[1]
            ),
            min_size=1,
            max_size=40,
        )
    )
    def test_strict_never_exceeds_soft(self, triples):
        annotations = [ann(*t) for t in triples]
        assert flip_rate(annotations) <= soft_flip_rate(annotations)


def pair(pred_orig, pred_cf, gold=E, cf_gold=C, premise="A dog runs today"):
    return CounterfactualPair(
        original=NliExample(id="p#0", premise=premise, hypothesis="An animal moves", label=gold),
        cf_premise="A dog sits today",
        cf_label=cf_gold,
        pred_orig=pred_orig,
        pred_cf=pred_cf,
    )


class TestSensitivity:
    def test_unchanged_prediction_is_zero(self):
        d = dist(0.6, 0.3, 0.1)
        assert sensitivity(pair(d, d)) == 0.0

    def test_unchanged_argmax_different_distributions_is_zero(self):
        # predicted label identical on both sides: the two shifts cancel exactly
        assert sensitivity(pair(dist(0.6, 0.3, 0.1), dist(0.8, 0.1, 0.1))) == 0.0

    def test_binary_hand_case(self):
        # two-class case, changed prediction: general formula gives p' + p - 1
        p_orig = dist(0.8, 0.0, 0.2)
        p_cf = dist(0.1, 0.0, 0.9)
        assert sensitivity(pair(p_orig, p_cf)) == pytest.approx(0.9 + 0.8 - 1.0)

    def test_extreme_confidence_normalized_to_one(self):
        assert sensitivity(pair(dist(1.0, 0.0, 0.0), dist(0.0, 0.0, 1.0))) == pytest.approx(1.0)

    @given(st.floats(0.51, 1.0), st.floats(0.51, 1.0))
    def test_binary_identity_property(self, p, q):
        p_orig = dist(p, 0.0, 1.0 - p)      # argmax entailment
        p_cf = dist(1.0 - q, 0.0, q)        # argmax contradiction
        general = sensitivity(pair(p_orig, p_cf))
        assert general == pytest.approx(p + q - 1.0, abs=1e-12)

    def test_mean_sensitivity_empty_is_error(self):
        with pytest.raises(ValueError):
            mean_sensitivity([])


class TestCounterfactualAccuracy:
    def test_all_correct(self):
        pairs = [pair(dist(0.9, 0.05, 0.05), dist(0.1, 0.1, 0.8))] * 3
        assert counterfactual_accuracy(pairs) == 1.0

    def test_hand_counted_quarter(self):
        both = pair(dist(0.9, 0.05, 0.05), dist(0.1, 0.1, 0.8))
        orig_only = pair(dist(0.9, 0.05, 0.05), dist(0.8, 0.1, 0.1))
        cf_only = pair(dist(0.1, 0.8, 0.1), dist(0.1, 0.1, 0.8))
        neither = pair(dist(0.1, 0.8, 0.1), dist(0.8, 0.1, 0.1))
        assert counterfactual_accuracy([both, orig_only, cf_only, neither]) == 0.25

    def test_bounded_by_plain_accuracy(self):
        pairs = [
            pair(dist(0.9, 0.05, 0.05), dist(0.6, 0.3, 0.1)),
            pair(dist(0.2, 0.7, 0.1), dist(0.05, 0.05, 0.9)),
            pair(dist(0.5, 0.3, 0.2), dist(0.2, 0.2, 0.6)),
        ]
        plain = sum(1 for p in pairs if p.pred_orig.argmax() == p.original.label) / len(pairs)
        assert counterfactual_accuracy(pairs) <= plain

    def test_empty_is_error(self):
        with pytest.raises(ValueError):
            counterfactual_accuracy([])
