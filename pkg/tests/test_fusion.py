import math
import random

import numpy as np
import pytest

from newsim.corpus import ArticlePair
from newsim.encoder import PrecomputedStore
from newsim.entities import EntityMention, build_profile
from newsim.fusion import (
    FEATURE_ORDER,
    FeatureRow,
    FusionMLP,
    FusionTrainConfig,
    build_feature_row,
    forward,
    fusion_gradient_check,
    predict_pair,
    train_fusion,
    write_feature_dump,
)


def zeroed_mlp():
    mlp = FusionMLP(seed=0)
    for p in mlp.params():
        p[:] = 0.0
    return mlp


def random_row(rng):
    return FeatureRow(rng.uniform(-1, 1), rng.random(), rng.random(),
                      rng.random(), rng.random())


class TestForward:
    def test_all_zero_weights_give_half(self):
        mlp = zeroed_mlp()
        row = FeatureRow(0.3, 0.1, 0.9, 0.5, 0.0)
        assert forward(mlp, row) == 0.5

    def test_large_output_bias_saturates(self):
        mlp = zeroed_mlp()
        mlp.b2[0] = 50.0
        assert forward(mlp, FeatureRow(0, 0, 0, 0, 0)) > 0.999999

    def test_hand_computed_single_unit(self):
        # only hidden unit 0 is wired: z1 = x . (1, .5, -.25, 0, 2) + .1,
        # z2 = 1.5 * relu(z1) - .2, out = sigmoid(z2)
        mlp = zeroed_mlp()
        mlp.w1[:, 0] = [1.0, 0.5, -0.25, 0.0, 2.0]
        mlp.b1[0] = 0.1
        mlp.w2[0, 0] = 1.5
        mlp.b2[0] = -0.2
        row = FeatureRow(0.8, 1.0, 0.0, 0.5, 0.25)
        z1 = 0.8 * 1.0 + 1.0 * 0.5 + 0.0 * -0.25 + 0.5 * 0.0 + 0.25 * 2.0 + 0.1
        expected = 1.0 / (1.0 + math.exp(-(1.5 * z1 - 0.2)))
        assert abs(forward(mlp, row) - expected) < 1e-12

    def test_output_strictly_inside_unit_interval(self):
        rng = random.Random(8)
        mlp = FusionMLP(seed=3)
        for _ in range(200):
            out = forward(mlp, random_row(rng))
            assert 0.0 < out < 1.0

    def test_feature_order_sensitivity(self):
        mlp = zeroed_mlp()
        mlp.w1[:, 0] = [1.0, 0.5, -0.25, 0.0, 2.0]
        mlp.w2[0, 0] = 1.5
        row = FeatureRow(0.8, 1.0, 0.0, 0.5, 0.25)
        swapped = FeatureRow(0.25, 1.0, 0.0, 0.5, 0.8)  # narrative <-> qty
        assert forward(mlp, row) != forward(mlp, swapped)

    def test_deterministic(self):
        mlp = FusionMLP(seed=11)
        row = FeatureRow(0.2, 0.4, 0.6, 0.8, 1.0)
        assert forward(mlp, row) == forward(mlp, row)


class TestTrainFusion:
    def test_constant_labels_converge(self):
        rng = random.Random(1)
        rows = [(random_row(rng), 0.5) for _ in range(64)]
        mlp, losses = train_fusion(rows, FusionTrainConfig(epochs=200, seed=2))
        assert losses[-1] < 1e-3
        preds = mlp.forward_batch(np.array([r.as_array() for r, _ in rows]))
        assert np.allclose(preds, 0.5, atol=0.05)

    def test_zero_learning_rate_is_identity(self):
        rng = random.Random(2)
        rows = [(random_row(rng), rng.random()) for _ in range(16)]
        mlp, _ = train_fusion(rows, FusionTrainConfig(
            epochs=5, learning_rate=0.0, seed=7))
        fresh = FusionMLP(in_dim=5, seed=7)
        for p, q in zip(mlp.params(), fresh.params()):
            np.testing.assert_array_equal(p, q)

    def test_gradient_check_random_rows(self):
        rng = random.Random(3)
        for seed in range(10):
            mlp = FusionMLP(seed=seed)
            err = fusion_gradient_check(mlp, random_row(rng), rng.random(),
                                        seed=seed)
            assert err < 1e-4

    def test_deterministic_given_seed(self):
        rng = random.Random(4)
        rows = [(random_row(rng), rng.random()) for _ in range(32)]
        m1, l1 = train_fusion(rows, FusionTrainConfig(epochs=30, seed=5))
        m2, l2 = train_fusion(rows, FusionTrainConfig(epochs=30, seed=5))
        assert l1 == l2
        for p, q in zip(m1.params(), m2.params()):
            np.testing.assert_array_equal(p, q)

    def test_early_stopping_uses_patience(self):
        rng = random.Random(6)
        rows = [(random_row(rng), rng.random()) for _ in range(32)]
        dev = [(random_row(rng), rng.random()) for _ in range(16)]
        _, losses = train_fusion(rows, FusionTrainConfig(epochs=5000, patience=5,
                                                         seed=1), dev_rows=dev)
        assert len(losses) < 5000

    def test_empty_rows_rejected(self):
        with pytest.raises(ValueError):
            train_fusion([], FusionTrainConfig())


class TestCheckpoint:
    def test_round_trip_bytes(self, tmp_path):
        mlp = FusionMLP(seed=13)
        path = tmp_path / "fusion.ckpt"
        mlp.save(path)
        loaded = FusionMLP.load(path)
        for p, q in zip(mlp.params(), loaded.params()):
            np.testing.assert_array_equal(p, q)
        loaded.save(tmp_path / "fusion2.ckpt")
        assert (tmp_path / "fusion.ckpt").read_bytes() == \
            (tmp_path / "fusion2.ckpt").read_bytes()


class TestPredictPair:
    def make_pair(self):
        return ArticlePair(pair_id="a_b", doc_a="a", doc_b="b",
                           lang_pair=("en", "en"), overall_raw=2.0)

    def test_identical_documents_full_row(self):
        vec = np.array([0.3, -0.7, 0.2])
        store = PrecomputedStore({"a": vec, "b": vec.copy()})
        mentions = [EntityMention("Paris", "GPE"), EntityMention("NATO", "ORG"),
                    EntityMention("2021-05-01", "DATE"), EntityMention("7", "CARDINAL")]
        profiles = {"a": build_profile(mentions), "b": build_profile(mentions)}
        mlp = FusionMLP(seed=21)
        got = predict_pair(mlp, store, profiles, self.make_pair())
        assert got == forward(mlp, FeatureRow(1.0, 1.0, 1.0, 1.0, 1.0))

    def test_disjoint_entities_zero_components(self):
        store = PrecomputedStore({"a": np.array([1.0, 0.0]),
                                  "b": np.array([0.0, 1.0])})
        profiles = {"a": build_profile([EntityMention("Paris", "GPE")]),
                    "b": build_profile([EntityMention("Berlin", "GPE")])}
        row = build_feature_row(store, profiles, "a", "b")
        assert (row.geo, row.org, row.date, row.qty) == (0.0, 0.0, 0.0, 0.0)
        assert row.narrative == 0.0

    def test_output_in_unit_interval_and_lookup_propagates(self):
        store = PrecomputedStore({"a": np.array([1.0, 2.0]),
                                  "b": np.array([2.0, 1.0])})
        mlp = FusionMLP(seed=2)
        out = predict_pair(mlp, store, {}, self.make_pair())
        assert 0.0 < out < 1.0
        bad = ArticlePair(pair_id="a_z", doc_a="a", doc_b="z",
                          lang_pair=("en", "en"))
        with pytest.raises(KeyError):
            predict_pair(mlp, store, {}, bad)


class TestFeatureDump:
    def test_csv_layout(self, tmp_path):
        path = tmp_path / "features.csv"
        row = FeatureRow(0.5, 0.1, 0.2, 0.3, 0.4)
        write_feature_dump(path, [("p1_p2", row, 0.75, 0.6),
                                  ("p3_p4", row, None, 0.4)])
        lines = path.read_text().strip().splitlines()
        assert lines[0] == "pair_id," + ",".join(FEATURE_ORDER) + ",label,prediction"
        assert lines[1].startswith("p1_p2,0.5,0.1,0.2,0.3,0.4,0.75,")
        assert ",,"  in lines[2]
