import numpy as np
import pytest

from gln.interpret import collapse, saliency
from gln.mixer import logit, sigmoid
from gln.network import ModelConfig, init_model
from gln.seeds import make_rng

EPS = 0.01


def perturbed_model(cfg, seed, scale=0.3):
    """Random model: uniform init plus a small weight perturbation."""
    model = init_model(cfg, seed)
    rng = make_rng(seed + 1000)
    for layer in model.layers:
        layer.weights += rng.uniform(-scale, scale, layer.weights.shape)
    return model


class TestCollapse:
    def test_single_neuron_collapse_is_its_active_row(self):
        cfg = ModelConfig(layer_sizes=(1,), context_dim=2, base_dim=4, side_dim=3)
        model = perturbed_model(cfg, 1)
        z = make_rng(2).standard_normal(3)
        ctx = model.layers[0].context_ids(z)[0]
        got = collapse(model, z, p_base=np.full(3, 0.4))
        assert np.array_equal(got.w_eff, model.layers[0].weights[0, ctx])

    def test_identity_selection_rows(self):
        # every neuron's rows copy its own slot from the layer below, so
        # the product collapses to the output neuron's selector
        cfg = ModelConfig(layer_sizes=(3, 3, 1), context_dim=1, base_dim=4, side_dim=3)
        model = init_model(cfg, 0)
        for layer in model.layers[:-1]:
            for k in range(layer.size):
                row = np.zeros(layer.in_dim)
                row[k + 1] = 1.0
                layer.weights[k, :, :] = row
        top = np.zeros(4)
        top[1] = 1.0  # output neuron reads the first neuron below
        model.layers[-1].weights[0, :, :] = top
        z = np.array([0.3, -0.2, 1.0])
        got = collapse(model, z, p_base=np.full(3, 0.4))
        expected = np.zeros(4)
        expected[1] = 1.0  # chains down to base slot 1
        assert np.allclose(got.w_eff, expected, atol=1e-15)

    def test_matches_forward_when_clip_clean(self):
        cfg = ModelConfig(layer_sizes=(4, 3, 1), context_dim=2, base_dim=6, side_dim=5)
        rng = make_rng(33)
        checked = 0
        model = perturbed_model(cfg, 3)
        while checked < 100:
            z = rng.standard_normal(5)
            p_base = rng.uniform(0.2, 0.8, 5)
            got = collapse(model, z, p_base)
            if not got.clip_clean:
                continue
            p0 = np.concatenate([[cfg.beta], p_base])
            linear = float(sigmoid(got.w_eff @ logit(p0)))
            assert abs(linear - model.forward(z, p_base)[0]) <= 1e-9
            checked += 1

    def test_clip_dirty_is_reported(self):
        cfg = ModelConfig(layer_sizes=(2, 1), context_dim=0, base_dim=3, side_dim=2)
        model = init_model(cfg, 0)
        model.layers[0].weights[:, :, :] = 40.0  # force saturation
        got = collapse(model, np.zeros(2), p_base=np.array([0.9, 0.9]))
        assert not got.clip_clean

    def test_shape_is_base_width(self):
        cfg = ModelConfig(layer_sizes=(5, 4, 1), context_dim=1, base_dim=9, side_dim=8)
        model = perturbed_model(cfg, 9)
        got = collapse(model, make_rng(0).standard_normal(8), p_base=np.full(8, 0.5))
        assert got.w_eff.shape == (9,)


class TestSaliency:
    def test_drops_bias_coordinate(self):
        cfg = ModelConfig(layer_sizes=(1,), context_dim=1, base_dim=4, side_dim=3)
        model = perturbed_model(cfg, 5)
        z = np.array([1.0, 0.0, -2.0])
        ctx = model.layers[0].context_ids(z)[0]
        got = saliency(model, z, p_base=np.full(3, 0.4))
        assert np.array_equal(got, model.layers[0].weights[0, ctx, 1:])

    def test_constant_within_joint_context_cell(self):
        cfg = ModelConfig(layer_sizes=(3, 2, 1), context_dim=2, base_dim=5, side_dim=4)
        model = perturbed_model(cfg, 6)
        rng = make_rng(8)
        z = rng.standard_normal(4)
        z_near = z * (1.0 + 1e-9)  # tiny perturbation, same cells
        assert np.array_equal(model.context_row(z), model.context_row(z_near))
        a = saliency(model, z, p_base=np.full(4, 0.3))
        b = saliency(model, z_near, p_base=np.full(4, 0.7))
        assert np.array_equal(a, b)

    def test_different_cells_generally_differ(self):
        cfg = ModelConfig(layer_sizes=(3, 2, 1), context_dim=3, base_dim=5, side_dim=4)
        model = perturbed_model(cfg, 7)
        rng = make_rng(9)
        z1, z2 = rng.standard_normal(4), rng.standard_normal(4)
        if np.array_equal(model.context_row(z1), model.context_row(z2)):
            pytest.skip("sampled the same joint cell twice")
        a = saliency(model, z1, p_base=np.full(4, 0.5))
        b = saliency(model, z2, p_base=np.full(4, 0.5))
        assert not np.array_equal(a, b)
