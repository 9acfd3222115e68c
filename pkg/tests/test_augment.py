import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cfdistill.augment import CartographyStats, build_augmented, read_stats, select_ambiguous, write_stats
from cfdistill.errors import DatasetError
from cfdistill.types import Label, NliExample


def ex(i, premise=None, label=Label.NEUTRAL):
    return NliExample(id=f"e{i:02d}", premise=premise or f"premise number {i}", hypothesis=f"hypothesis {i}", label=label)


def stats_for(examples, variability):
    return {e.id: CartographyStats(example_id=e.id, confidence=0.5, variability=v) for e, v in zip(examples, variability)}


class TestSelectAmbiguous:
    def test_full_fraction_returns_everything(self):
        data = [ex(i) for i in range(5)]
        stats = stats_for(data, [0.1, 0.5, 0.3, 0.2, 0.4])
        assert select_ambiguous(data, stats, 1.0) == data

    def test_hand_sorted_top_three_of_ten(self):
        data = [ex(i) for i in range(10)]
        variability = [0.11, 0.93, 0.25, 0.77, 0.31, 0.08, 0.85, 0.40, 0.19, 0.66]
        stats = stats_for(data, variability)
        # top 3 by variability: e01 (0.93), e06 (0.85), e03 (0.77)
        chosen = select_ambiguous(data, stats, 0.3)
        assert [e.id for e in chosen] == ["e01", "e03", "e06"]  # dataset order preserved

    def test_tie_at_cut_prefers_lower_id(self):
        data = [ex(i) for i in range(4)]
        stats = stats_for(data, [0.9, 0.5, 0.5, 0.1])
        chosen = select_ambiguous(data, stats, 0.5)  # k = 2; e01 and e02 tie
        assert [e.id for e in chosen] == ["e00", "e01"]

    def test_size_is_exactly_ceil(self):
        data = [ex(i) for i in range(10)]
        stats = stats_for(data, [i / 10 for i in range(10)])
        assert len(select_ambiguous(data, stats, 0.3)) == 3
        assert len(select_ambiguous(data, stats, 0.25)) == 3  # ceil(2.5)
        assert len(select_ambiguous(data, stats, 0.1)) == 1
        assert len(select_ambiguous(data, stats, 1 / 3)) == 4  # ceil(3.33)

    def test_missing_stats_record_names_the_id(self):
        data = [ex(0), ex(1)]
        stats = stats_for(data[:1], [0.5])
        with pytest.raises(DatasetError, match="e01"):
            select_ambiguous(data, stats, 0.5)

    def test_fraction_validated(self):
        data = [ex(0)]
        stats = stats_for(data, [0.5])
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                select_ambiguous(data, stats, bad)


class TestBuildAugmented:
    def test_union_identity_when_subset_contained(self):
        base = [ex(i) for i in range(4)]
        assert build_augmented(base, base[:2], []) == base

    def test_hand_set_arithmetic(self):
        base = [ex(i) for i in range(100)]
        subset = [ex(i) for i in range(50, 150)]           # 50 overlap with base
        counterfactuals = [ex(i, premise=f"different premise {i}") for i in range(1000, 1080)]
        merged = build_augmented(base, subset, counterfactuals)
        assert len(merged) == 230
        dropped = len(base) + len(subset) + len(counterfactuals) - len(merged)
        assert dropped == 50

    def test_idempotent(self):
        base = [ex(i) for i in range(5)]
        once = build_augmented(base, base[:3], [ex(9, premise="another premise")])
        again = build_augmented(once, [], [])
        assert again == once

    def test_first_occurrence_wins(self):
        a = NliExample(id="first", premise="same premise", hypothesis="same hypothesis", label=Label.NEUTRAL)
        b = NliExample(id="second", premise="same  premise", hypothesis="same hypothesis", label=Label.NEUTRAL)
        merged = build_augmented([a], [b], [])
        assert merged == [a]

    def test_label_is_part_of_the_key(self):
        a = NliExample(id="x", premise="p text", hypothesis="h text", label=Label.NEUTRAL)
        b = NliExample(id="y", premise="p text", hypothesis="h text", label=Label.CONTRADICTION)
        assert len(build_augmented([a], [b], [])) == 2

    @settings(max_examples=40)
    @given(st.lists(st.integers(0, 30), max_size=20), st.lists(st.integers(0, 30), max_size=20))
    def test_dropped_count_matches_size_difference(self, base_ids, cf_ids):
        base = [ex(i) for i in dict.fromkeys(base_ids)]
        counterfactuals = [ex(i) for i in dict.fromkeys(cf_ids)]
        merged = build_augmented(base, [], counterfactuals)
        keys = {e.dedup_key for e in base} | {e.dedup_key for e in counterfactuals}
        assert len(merged) == len(keys)


class TestStatsIo:
    def test_round_trip(self, tmp_path):
        stats = [CartographyStats("a", 0.25, 0.5), CartographyStats("b", 1.0, 0.0)]
        path = tmp_path / "stats.jsonl"
        write_stats(stats, path)
        loaded = read_stats(path)
        assert loaded == {"a": stats[0], "b": stats[1]}

    def test_duplicate_id_rejected(self, tmp_path):
        path = tmp_path / "stats.jsonl"
        path.write_text(
            '{"id": "a", "confidence": 0.5, "variability": 0.1}\n{"id": "a", "confidence": 0.5, "variability": 0.2}\n'
        )
        with pytest.raises(DatasetError, match="duplicate"):
            read_stats(path)

    def test_validation(self):
        with pytest.raises(ValueError):
            CartographyStats("a", confidence=1.5, variability=0.1)
        with pytest.raises(ValueError):
            CartographyStats("a", confidence=0.5, variability=-0.1)
