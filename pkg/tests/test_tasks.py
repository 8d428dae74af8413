import math

import numpy as np
import pytest

from gln.network import ModelConfig, init_model
from gln.seeds import make_rng
from gln.tasks import AutoregressiveDensityModel, OvaClassifier, argmax_label

from oracles import enumerate_total_probability

EPS = 0.01


def shared_gate_classifier(n_classes=3, seed=0):
    """All class models share one gate seed (identical gating)."""
    cfg = ModelConfig(layer_sizes=(3, 1), context_dim=2, base_dim=5, side_dim=4)
    return OvaClassifier([init_model(cfg, seed) for _ in range(n_classes)])


class TestArgmax:
    def test_plain(self):
        assert argmax_label([0.1, 0.9, 0.3]) == 1

    def test_tie_goes_to_lowest_index(self):
        assert argmax_label([0.4, 0.4, 0.2]) == 0

    def test_invariant_under_monotone_transform(self):
        rng = make_rng(4)
        for _ in range(100):
            probs = rng.uniform(0.01, 0.99, 7)
            assert argmax_label(probs) == argmax_label(np.log(probs) * 2.0 + 1.0)


class TestOvaClassifier:
    def test_fresh_symmetric_models_tie_to_class_zero(self):
        clf = shared_gate_classifier()
        label, probs = clf.predict(np.zeros(4), p_base=np.full(4, 0.5))
        assert np.all(probs == probs[0])
        assert label == 0

    def test_update_routes_targets(self):
        clf = shared_gate_classifier(n_classes=2, seed=3)
        z = make_rng(5).standard_normal(4)
        p = np.full(4, 0.8)
        ctx = clf.models[0].context_row(z)
        before = [m.layers[0].weights[0, ctx[0], 0] for m in clf.models]
        clf.update(z, p, 1, 0.1)
        after = [m.layers[0].weights[0, ctx[0], 0] for m in clf.models]
        # bias weight moves down for the negative model, up for the positive
        assert after[0] < before[0]
        assert after[1] > before[1]

    def test_repeated_updates_grow_true_class_probability(self):
        clf = shared_gate_classifier(n_classes=3, seed=9)
        z = make_rng(6).standard_normal(4)
        p = np.full(4, 0.3)
        prev = None
        for _ in range(10):
            probs = clf.update(z, p, 1, 0.05)
            if prev is not None:
                assert probs[1] >= prev
            prev = probs[1]

    def test_rejects_bad_label_and_rate(self):
        clf = shared_gate_classifier()
        with pytest.raises(ValueError):
            clf.update(np.zeros(4), np.full(4, 0.5), 3, 0.1)
        with pytest.raises(ValueError):
            clf.update(np.zeros(4), np.full(4, 0.5), 0, 0.0)

    def test_rejects_mismatched_models(self):
        cfg_a = ModelConfig(layer_sizes=(3, 1), context_dim=2, base_dim=5, side_dim=4)
        cfg_b = ModelConfig(layer_sizes=(2, 1), context_dim=2, base_dim=5, side_dim=4)
        with pytest.raises(ValueError):
            OvaClassifier([init_model(cfg_a, 0), init_model(cfg_b, 0)])

    def test_create_uses_distinct_gates_per_class(self):
        cfg = ModelConfig(layer_sizes=(2, 1), context_dim=2, base_dim=4, side_dim=3)
        clf = OvaClassifier.create(3, cfg, master_seed=5)
        g0 = clf.models[0].layers[0].gate_normals
        g1 = clf.models[1].layers[0].gate_normals
        assert not np.array_equal(g0, g1)


class TestDensityModel:
    def test_single_pixel_hand_value(self):
        # one pixel, bias-only base: fresh weights are exactly 1, so the
        # prediction is sigmoid(logit(beta)) = sigmoid(1)
        dm = AutoregressiveDensityModel.create(1, layer_sizes=(1,), context_dim=1, master_seed=0)
        got = dm.logprob(np.array([1]))
        assert got == pytest.approx(math.log(1.0 / (1.0 + math.exp(-1.0))), abs=1e-12)

    def test_all_neutral_weights_give_uniform_distribution(self):
        d = 5
        dm = AutoregressiveDensityModel.create(d, layer_sizes=(2, 1), context_dim=1, master_seed=1)
        for model in dm.models:
            for layer in model.layers:
                layer.weights[:] = 0.0
        img = np.array([1, 0, 1, 1, 0])
        assert dm.logprob(img) == pytest.approx(-d * math.log(2.0), abs=1e-12)

    def test_probability_is_proper(self):
        dm = AutoregressiveDensityModel.create(4, layer_sizes=(2, 1), context_dim=1, master_seed=2)
        value = dm.logprob(np.array([0, 1, 1, 0]))
        assert 0.0 < math.exp(value) < 1.0

    def test_normalizes_after_training(self):
        d = 6
        dm = AutoregressiveDensityModel.create(d, layer_sizes=(2, 1), context_dim=1, master_seed=3)
        rng = make_rng(10)
        for _ in range(40):
            dm.logprob(rng.integers(0, 2, d), update=True, eta=0.1)
        total = enumerate_total_probability(lambda img: dm.logprob(img), d)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_causality(self):
        d = 6
        dm = AutoregressiveDensityModel.create(d, layer_sizes=(2, 1), context_dim=2, master_seed=4)
        rng = make_rng(11)
        for _ in range(30):
            dm.logprob(rng.integers(0, 2, d), update=True, eta=0.1)
        img = np.array([1, 0, 1, 0, 1, 1])
        base = dm.pixel_probabilities(img)
        for j in range(d):
            flipped = img.copy()
            flipped[j] ^= 1
            got = dm.pixel_probabilities(flipped)
            assert np.array_equal(got[: j + 1], base[: j + 1])

    def test_online_pass_beats_uniform_on_structured_data(self):
        d = 9
        dm = AutoregressiveDensityModel.create(d, layer_sizes=(2, 1), context_dim=1, master_seed=5)
        rng = make_rng(12)
        # strongly correlated images: all-ones or all-zeros with noise
        images = []
        for _ in range(120):
            bit = int(rng.integers(0, 2))
            img = np.full(d, bit)
            flip = rng.integers(0, d)
            img[flip] ^= 1
            images.append(img)
        nats = dm.nats_per_image(np.array(images), update=True, eta=0.2)
        assert nats < d * math.log(2.0)

    def test_rejects_bad_images(self):
        dm = AutoregressiveDensityModel.create(3, layer_sizes=(1,), context_dim=1, master_seed=6)
        with pytest.raises(ValueError):
            dm.logprob(np.array([1, 0]))
        with pytest.raises(ValueError):
            dm.logprob(np.array([1, 2, 0]))

    def test_nats_per_image_rejects_empty(self):
        dm = AutoregressiveDensityModel.create(3, layer_sizes=(1,), context_dim=1, master_seed=7)
        with pytest.raises(ValueError):
            dm.nats_per_image(np.empty((0, 3)))
