import math

import numpy as np
import pytest

from cfdistill.metrics import EmbeddedDataset, OtddConfig, embed_text, embed_texts, label_distances, otdd
from cfdistill.types import Label, NliExample

from test_ot import oracle_grid_ot

E, C = Label.ENTAILMENT, Label.CONTRADICTION

# 4-point fixture with two labels; inner label distances were hand-checked
# (W(E,E)=0.625, W(E,C)=7, W(C,E)=2.625, W(C,C)=1) and the outer value was
# computed with the independent grid-plan oracle before the build
FIXTURE_A = EmbeddedDataset(
    vectors=np.array([[0.0, 0.0], [0.0, 1.0], [2.0, 0.0], [2.0, 1.0]]),
    labels=(E, E, C, C),
)
FIXTURE_B = EmbeddedDataset(
    vectors=np.array([[0.0, 0.5], [1.0, 1.0], [3.0, 0.0], [2.0, 2.0]]),
    labels=(E, E, C, C),
)
FIXTURE_OUTER_VALUE = 1.625
FIXTURE_DISTANCE = math.sqrt(FIXTURE_OUTER_VALUE)


def random_dataset(rng, n_points=8, dim=4):
    labels = tuple(rng.choice([Label.ENTAILMENT, Label.NEUTRAL, Label.CONTRADICTION]) for _ in range(n_points))
    return EmbeddedDataset(vectors=rng.uniform(-1, 1, (n_points, dim)), labels=labels)


class TestOtddFixture:
    def test_inner_label_distances_match_hand_values(self):
        inner = label_distances(FIXTURE_A, FIXTURE_B, OtddConfig())
        assert inner[(E, E)] == pytest.approx(0.625, abs=1e-9)
        assert inner[(E, C)] == pytest.approx(7.0, abs=1e-9)
        assert inner[(C, E)] == pytest.approx(2.625, abs=1e-9)
        assert inner[(C, C)] == pytest.approx(1.0, abs=1e-9)

    def test_distance_matches_oracle_composition(self):
        assert otdd(FIXTURE_A, FIXTURE_B) == pytest.approx(FIXTURE_DISTANCE, abs=1e-9)

    def test_oracle_recomputation(self):
        # recompute the frozen value with the independent oracle end to end
        def sq(p, r):
            return float(((p - r) ** 2).sum())

        W = {}
        for y in (E, C):
            for y2 in (E, C):
                ca, cb = FIXTURE_A.class_cloud(y), FIXTURE_B.class_cloud(y2)
                cost = np.array([[sq(p, r) for r in cb] for p in ca])
                W[(y, y2)] = oracle_grid_ot(cost, [0.5, 0.5], [0.5, 0.5], q=2)
        outer = np.array(
            [
                [sq(p, r) + W[(la, lb)] for r, lb in zip(FIXTURE_B.vectors, FIXTURE_B.labels)]
                for p, la in zip(FIXTURE_A.vectors, FIXTURE_A.labels)
            ]
        )
        value = oracle_grid_ot(outer, [0.25] * 4, [0.25] * 4, q=4)
        assert value == pytest.approx(FIXTURE_OUTER_VALUE, abs=1e-12)


class TestOtddProperties:
    def test_identical_datasets_have_zero_distance(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            ds = random_dataset(rng)
            assert otdd(ds, ds) == pytest.approx(0.0, abs=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            a, b = random_dataset(rng), random_dataset(rng)
            assert abs(otdd(a, b) - otdd(b, a)) <= 1e-9

    def test_nonnegative(self):
        rng = np.random.default_rng(2)
        for _ in range(5):
            a, b = random_dataset(rng), random_dataset(rng)
            assert otdd(a, b) >= 0.0

    def test_dimension_mismatch_rejected(self):
        a = EmbeddedDataset(vectors=np.zeros((2, 3)), labels=(E, C))
        b = EmbeddedDataset(vectors=np.zeros((2, 4)), labels=(E, C))
        with pytest.raises(ValueError):
            otdd(a, b)

    def test_entropic_path_agrees_with_exact_path(self):
        rng = np.random.default_rng(3)
        a, b = random_dataset(rng, n_points=8), random_dataset(rng, n_points=8)
        entropic_only = OtddConfig(exact_limit=1)
        assert otdd(a, b, entropic_only) == pytest.approx(otdd(a, b, OtddConfig()), rel=0.05)

    def test_oversize_instances_use_the_entropic_solver(self):
        rng = np.random.default_rng(4)
        a, b = random_dataset(rng, n_points=12), random_dataset(rng, n_points=12)
        value = otdd(a, b)  # 12x12 outer problem exceeds the exact bound
        assert value >= 0.0
        assert otdd(a, b) == value  # deterministic


class TestEmbedder:
    def test_equal_texts_map_to_equal_vectors(self):
        assert np.array_equal(embed_text("a man rides a bike"), embed_text("a man rides a bike"))

    def test_vectors_are_unit_norm(self):
        v = embed_text("a man rides a bike")
        assert np.linalg.norm(v) == pytest.approx(1.0)

    def test_no_tokens_gives_zero_vector(self):
        assert np.linalg.norm(embed_text("!!!")) == 0.0

    def test_from_examples_is_deterministic(self):
        examples = [
            NliExample(id="a", premise="A dog runs far", hypothesis="An animal moves", label=E),
            NliExample(id="b", premise="A cat sleeps now", hypothesis="A cat rests", label=C),
        ]
        d1 = EmbeddedDataset.from_examples(examples)
        d2 = EmbeddedDataset.from_examples(examples)
        assert np.array_equal(d1.vectors, d2.vectors)
        assert d1.labels == (E, C)

    def test_embed_texts_shape(self):
        assert embed_texts(["one text", "two text"], dim=64).shape == (2, 64)
